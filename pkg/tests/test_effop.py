import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from conftest import random_density, random_open_system
from kaon_bell.errors import DimensionError, InvalidStateError
from kaon_bell.effop import (
    DecayModel,
    EffectiveOperator,
    EvolutionMode,
    MeasurementSetting,
    effective_operator,
    expectation,
    initial_pair_state,
    kaon_model,
    measurement_projector,
    outcome_probability,
    tensor_witness,
)
from kaon_bell.kaon import K_SHORT, K_ZERO, K_ZERO_BAR, KaonBasis, KaonParams, QuasiSpin, singlet_state
from kaon_bell.liouville import build_liouvillian, propagate
from kaon_bell.numkernel import eig_hermitian, projector

ANALYTIC = EvolutionMode.ANALYTIC
LINDBLAD = EvolutionMode.LINDBLAD

directions = st.builds(
    QuasiSpin,
    alpha=st.floats(min_value=0.0, max_value=math.pi),
    phi=st.floats(min_value=0.0, max_value=6.28),
)
times = st.floats(min_value=0.0, max_value=20.0)


def setting(direction=K_ZERO_BAR, time=0.0, mode=LINDBLAD) -> MeasurementSetting:
    return MeasurementSetting(direction=direction, time=time, mode=mode)


def test_setting_needs_exactly_one_target():
    with pytest.raises(ValueError):
        MeasurementSetting(time=1.0)
    with pytest.raises(ValueError):
        MeasurementSetting(direction=K_ZERO, projector=np.diag([1.0, 0.0]))
    with pytest.raises(ValueError):
        MeasurementSetting(direction=K_ZERO, time=-1.0)


def test_setting_rejects_non_projectors():
    with pytest.raises(ValueError):
        MeasurementSetting(projector=np.diag([1.0, 0.5]))
    with pytest.raises(ValueError):
        MeasurementSetting(projector=np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_setting_at_moves_time_only():
    moved = setting(time=0.0).at(2.5)
    assert moved.time == 2.5
    assert moved.direction == K_ZERO_BAR


@pytest.mark.parametrize("mode", [ANALYTIC, LINDBLAD])
def test_zero_time_is_reflection(params, mode):
    op = effective_operator(params, setting(K_ZERO, 0.0, mode))
    k = measurement_projector(params, setting(K_ZERO, 0.0, mode))
    assert np.allclose(op.matrix, 2 * k - np.eye(op.dim))


@pytest.mark.parametrize("mode", [ANALYTIC, LINDBLAD])
def test_long_times_tend_to_minus_identity(params, mode):
    t = 50.0 / params.gamma_L
    for direction in (K_SHORT, K_ZERO, K_ZERO_BAR, QuasiSpin(alpha=2.0, phi=4.0)):
        op = effective_operator(params, setting(direction, t, mode))
        assert np.max(np.abs(op.matrix + np.eye(op.dim))) <= 1e-6


@seed(31)
@settings(max_examples=60, deadline=None)
@given(directions, times, st.floats(min_value=0.0, max_value=0.5))
def test_spectrum_stays_in_unit_interval(direction, t, epsilon):
    op = effective_operator(KaonParams(epsilon=epsilon), setting(direction, t, LINDBLAD))
    eigenvalues = eig_hermitian(op.matrix).eigenvalues
    assert eigenvalues[0] >= -1.0 - 1e-9
    assert eigenvalues[-1] <= 1.0 + 1e-9


@seed(32)
@settings(max_examples=40, deadline=None)
@given(directions, times)
def test_modes_agree_without_cp_violation(direction, t):
    params = KaonParams()
    frame = kaon_model(params).frame
    analytic = effective_operator(params, setting(direction, t, ANALYTIC)).matrix
    lindblad = effective_operator(params, setting(direction, t, LINDBLAD)).matrix
    assert np.max(np.abs(frame.conj().T @ lindblad @ frame - analytic)) <= 1e-8


def test_decayed_level_counts_as_no(params):
    op = effective_operator(params, setting(K_ZERO_BAR, 0.4))
    assert np.allclose(op.matrix[0], [-1.0, 0.0, 0.0])


@seed(33)
@settings(max_examples=30, deadline=None)
@given(directions, times, st.integers(min_value=0, max_value=2**32 - 1))
def test_duality_with_schrodinger_picture(direction, t, s):
    params = KaonParams(epsilon=0.05)
    model = kaon_model(params)
    rho0 = random_density(np.random.default_rng(s), 3)
    op = effective_operator(params, setting(direction, t))
    k = measurement_projector(params, setting(direction, t))
    rho_t = propagate(model.liouvillian, rho0, t)
    assert abs(expectation(op.matrix, rho0) - (2 * np.trace(k @ rho_t).real - 1)) <= 1e-9


def test_detection_probability_decays(params):
    k = measurement_projector(params, setting(K_ZERO))
    model = kaon_model(params)
    previous = math.inf
    for t in np.linspace(0.0, 30.0, 61):
        op = effective_operator(params, setting(K_ZERO, float(t)))
        # Tr K(t) = (Tr O + N) / 2
        trace_k = 0.5 * (np.trace(op.matrix).real + model.dim)
        assert trace_k <= previous + 1e-12
        previous = trace_k
    assert math.isclose(np.trace(k).real, 1.0)


def test_raw_projector_setting(params):
    k = np.zeros((3, 3))
    k[2, 2] = 1.0
    op = effective_operator(params, MeasurementSetting(projector=k, time=0.1))
    assert math.isclose(op.matrix[2, 2].real, 2 * math.exp(-params.gamma_S * 0.1) - 1, rel_tol=1e-10)
    with pytest.raises(DimensionError):
        effective_operator(params, MeasurementSetting(projector=np.diag([1.0, 0.0]), time=0.1))


def test_bare_open_system_with_raw_projector(rng):
    system = random_open_system(rng, 3)
    k = np.diag([0.0, 1.0, 0.0])
    rho0 = random_density(rng, 3)
    op = effective_operator(system, MeasurementSetting(projector=k, time=0.5))
    assert op.dim == 3
    evolved = propagate(build_liouvillian(system), rho0, 0.5)
    expected = 2.0 * np.trace(k @ evolved).real - 1.0
    assert math.isclose(expectation(op.matrix, rho0), expected, abs_tol=1e-10)
    p_yes, _ = outcome_probability(system, MeasurementSetting(projector=k, time=0.5), rho0)
    assert math.isclose(p_yes, np.trace(k @ evolved).real, abs_tol=1e-10)


def test_bare_open_system_needs_a_projector(rng):
    system = random_open_system(rng, 3)
    with pytest.raises(DimensionError):
        effective_operator(system, setting(time=0.5))
    with pytest.raises(DimensionError):
        effective_operator(system, MeasurementSetting(projector=np.diag([1.0, 0.0]), time=0.5))
    with pytest.raises(DimensionError):
        effective_operator(system, MeasurementSetting(projector=np.diag([1.0, 0.0]), mode=ANALYTIC))
    with pytest.raises(DimensionError):
        initial_pair_state(system, LINDBLAD)


def test_effective_operator_record_checks_hermiticity():
    with pytest.raises(ValueError):
        EffectiveOperator(matrix=np.array([[0.0, 1.0], [0.0, 0.0]]), setting=setting())


def test_tensor_witness():
    minus = -np.eye(3)
    assert np.array_equal(tensor_witness([minus]), minus)
    assert np.allclose(tensor_witness([minus, minus]), np.eye(9))
    with pytest.raises(DimensionError):
        tensor_witness([])


def test_expectation_basics(rng):
    rho = random_density(rng, 4)
    assert math.isclose(expectation(np.eye(4), rho), 1.0)
    assert math.isclose(expectation(-np.eye(4), rho), -1.0)
    with pytest.raises(DimensionError):
        expectation(np.eye(3), rho)
    with pytest.raises(InvalidStateError):
        expectation(np.eye(4), 2 * rho)


def test_singlet_is_perfectly_anticorrelated(params):
    # both sides look for K0bar at t = 0: never both "yes"
    op = effective_operator(params, setting(K_ZERO_BAR, 0.0, ANALYTIC))
    rho = singlet_state()
    value = expectation(tensor_witness([op, op]), rho)

    yes = projector(KaonBasis.K0_BAR)
    no = np.eye(2) - yes
    joint = {
        (a, b): np.trace(np.kron(pa, pb) @ rho).real
        for a, pa in ((1, yes), (-1, no))
        for b, pb in ((1, yes), (-1, no))
    }
    assert math.isclose(value, sum(a * b * p for (a, b), p in joint.items()), abs_tol=1e-12)
    assert math.isclose(value, -1.0, abs_tol=1e-12)


def test_pair_state_in_both_modes(params):
    analytic = initial_pair_state(params, ANALYTIC)
    lindblad = initial_pair_state(params, LINDBLAD)
    assert analytic.shape == (4, 4)
    assert lindblad.shape == (9, 9)
    assert math.isclose(np.trace(lindblad).real, 1.0)
    assert np.allclose(lindblad @ lindblad, lindblad)


def test_outcome_probabilities(params):
    rho = np.zeros((3, 3))
    rho[2, 2] = 1.0
    p_yes, p_no = outcome_probability(params, MeasurementSetting(direction=K_SHORT, time=0.2), rho)
    assert math.isclose(p_yes, math.exp(-params.gamma_S * 0.2), rel_tol=1e-10)
    assert math.isclose(p_yes + p_no, 1.0)


def test_decay_model_validation(params):
    model = kaon_model(params)
    with pytest.raises(ValueError):
        DecayModel(params=params, system=model.system, frame=np.ones((3, 2)))
    with pytest.raises(ValueError):
        DecayModel(params=params, system=model.system, frame=np.eye(2))


def test_decay_model_embeds_flavour_operators(params):
    model = kaon_model(params)
    embedded = model.embed(np.eye(2))
    assert math.isclose(np.trace(embedded).real, 2.0)
    assert embedded[0, 0] == 0.0
