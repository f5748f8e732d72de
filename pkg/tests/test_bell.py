import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from conftest import random_open_system
from kaon_bell.bell import (
    SCHEDULES,
    TSIRELSON_BOUND,
    VIOLATION_TOL,
    Schedule,
    ScheduledSetting,
    ViolationResult,
    WitnessKind,
    WitnessSpec,
    build_witness,
    chsh_witness,
    default_lifetime_grid,
    evaluate,
    kaon_factory,
    max_violation,
    scan,
    scg_witness,
    violation_lifetime,
    witness_extremes,
    witness_trace,
)
from kaon_bell.effop import EvolutionMode, MeasurementSetting, effective_operator, initial_pair_state
from kaon_bell.errors import DimensionError, NotHermitianError
from kaon_bell.kaon import K_SHORT, K_ZERO_BAR, TAU_L_NS, KaonParams, QuasiSpin

CHSH = WitnessKind.CHSH
SCG = WitnessKind.SCG
LINDBLAD = EvolutionMode.LINDBLAD

SIGMA_Z = np.diag([1.0, -1.0])
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])

settings_strategy = st.tuples(
    st.floats(min_value=0.0, max_value=math.pi),
    st.floats(min_value=0.0, max_value=6.28),
    st.floats(min_value=0.0, max_value=5.0),
)


def spec(kind, alice, bob, system=None, mode=LINDBLAD):
    return WitnessSpec(kind=kind, alice=alice, bob=bob, system=system or KaonParams(), mode=mode)


def at(time, direction=K_ZERO_BAR, mode=LINDBLAD):
    return MeasurementSetting(direction=direction, time=time, mode=mode)


def test_schedules_follow_measurement_plan():
    chsh = SCHEDULES["standard-chsh"]
    assert [s.time(1.5) for s in chsh.alice] == [1.5, 0.0]
    assert [s.time(1.5) for s in chsh.bob] == [0.0, 1.5]
    scg = SCHEDULES["standard-scg"]
    assert [s.time(1.0) for s in scg.alice] == [0.0, 1.0, 2.0]
    assert [s.time(1.0) for s in scg.bob] == [0.0, 2.0, 1.0]
    assert all(s.direction == K_ZERO_BAR for s in scg.alice + scg.bob)
    assert chsh.kind is CHSH and scg.kind is SCG


def test_schedule_arity_checks():
    with pytest.raises(ValueError):
        Schedule(name="bad", alice=(ScheduledSetting(),) * 2, bob=(ScheduledSetting(),) * 3)
    with pytest.raises(ValueError):
        Schedule(name="bad", alice=(ScheduledSetting(),) * 4, bob=(ScheduledSetting(),) * 4)


def test_spec_arity_and_mode_checks():
    with pytest.raises(ValueError):
        spec(CHSH, [at(0.0)] * 3, [at(0.0)] * 2)
    with pytest.raises(ValueError):
        spec(SCG, [at(0.0)] * 2, [at(0.0)] * 2)
    with pytest.raises(ValueError):
        spec(CHSH, [at(0.0), at(0.0, mode=EvolutionMode.ANALYTIC)], [at(0.0)] * 2)


def test_builders_reject_wrong_kind():
    chsh = spec(CHSH, [at(0.0)] * 2, [at(0.0)] * 2)
    with pytest.raises(DimensionError):
        scg_witness(chsh)
    scg = spec(SCG, [at(0.0)] * 3, [at(0.0)] * 3)
    with pytest.raises(DimensionError):
        chsh_witness(scg)


def test_commuting_settings_give_classical_chsh():
    # alpha = 0 at t = 0 embeds sigma_z on the surviving block
    s = spec(CHSH, [at(0.0, K_SHORT)] * 2, [at(0.0, K_SHORT)] * 2)
    low, high = witness_extremes(chsh_witness(s))
    assert math.isclose(low, -2.0, abs_tol=1e-12)
    assert math.isclose(high, 2.0, abs_tol=1e-12)


def test_ideal_qubits_reach_tsirelson():
    a1, a2 = SIGMA_Z, SIGMA_X
    b1 = (SIGMA_Z + SIGMA_X) / math.sqrt(2.0)
    b2 = (SIGMA_Z - SIGMA_X) / math.sqrt(2.0)
    s = np.kron(a1, b1 - b2) + np.kron(a2, b1 + b2)
    low, high = witness_extremes(s)
    assert math.isclose(high, TSIRELSON_BOUND, rel_tol=1e-12)
    assert math.isclose(low, -TSIRELSON_BOUND, rel_tol=1e-12)


def test_bare_open_system_witness(rng):
    system = random_open_system(rng, 3)
    k0, k1 = np.diag([1.0, 0.0, 0.0]), np.diag([0.0, 1.0, 0.0])
    alice = [MeasurementSetting(projector=k0, time=0.4), MeasurementSetting(projector=k1)]
    bob = [MeasurementSetting(projector=k1), MeasurementSetting(projector=k0, time=0.4)]
    witness = chsh_witness(spec(CHSH, alice, bob, system=system))
    assert witness.shape == (9, 9)
    low, high = witness_extremes(witness)
    assert -TSIRELSON_BOUND - 1e-9 <= low <= high <= TSIRELSON_BOUND + 1e-9
    with pytest.raises(DimensionError):
        evaluate(CHSH, SCHEDULES["standard-chsh"], system, 0.1)


def test_scg_algebraic_limits():
    identity = np.eye(3)

    def scg_of(o):
        return (
            np.kron(o, identity + 3 * o)
            + np.kron(o, identity + o)
            + np.kron(o, o - o)
            + np.kron(identity, 2 * o)
        )

    low, high = witness_extremes(scg_of(identity))
    assert math.isclose(low, 8.0) and math.isclose(high, 8.0)
    # every detector says no
    low, high = witness_extremes(scg_of(-identity))
    assert math.isclose(low, 0.0, abs_tol=1e-12) and math.isclose(high, 0.0, abs_tol=1e-12)


def test_scg_builder_matches_formula(params):
    alice = [at(0.0), at(0.3), at(0.6)]
    bob = [at(0.0), at(0.6), at(0.3)]
    a1, a2, a3 = (effective_operator(params, s).matrix for s in alice)
    b1, b2, b3 = (effective_operator(params, s).matrix for s in bob)
    identity = np.eye(3)
    expected = (
        np.kron(a1, identity + b1 + b2 + b3)
        + np.kron(a2, identity + b1 + b2 - b3)
        + np.kron(a3, b1 - b2)
        + np.kron(identity, b1 + b2)
    )
    assert np.allclose(scg_witness(spec(SCG, alice, bob)), expected, atol=1e-12)


def test_witness_extremes_basics():
    assert witness_extremes(np.eye(4)) == pytest.approx((1.0, 1.0))
    assert witness_extremes(2 * np.kron(SIGMA_Z, SIGMA_Z)) == pytest.approx((-2.0, 2.0))
    with pytest.raises(NotHermitianError):
        witness_extremes(np.triu(np.ones((4, 4))))


def test_witness_trace_of_mixed_state():
    traceless = np.kron(SIGMA_Z, SIGMA_X)
    assert math.isclose(witness_trace(traceless, np.eye(4) / 4), 0.0, abs_tol=1e-15)


@seed(41)
@settings(max_examples=200, deadline=None)
@given(st.lists(settings_strategy, min_size=4, max_size=4))
def test_chsh_never_exceeds_tsirelson(raw):
    a1, a2, b1, b2 = (at(t, QuasiSpin(alpha=alpha, phi=phi)) for alpha, phi, t in raw)
    low, high = witness_extremes(build_witness(spec(CHSH, [a1, a2], [b1, b2])))
    assert high <= TSIRELSON_BOUND + 1e-8
    assert low >= -TSIRELSON_BOUND - 1e-8


def test_fully_decayed_pairs_do_not_violate(params):
    t = 50.0 / params.gamma_L
    w = build_witness(spec(CHSH, [at(t)] * 2, [at(t)] * 2))
    rho = initial_pair_state(params, LINDBLAD)
    assert abs(witness_trace(w, rho)) <= 2.0 + 1e-9
    result = evaluate(CHSH, SCHEDULES["standard-chsh"], params, t)
    assert not result.violated


def test_decayed_pair_sits_on_the_chsh_bound(params):
    result = evaluate(CHSH, SCHEDULES["standard-chsh"], params, 50.0)
    assert abs(result.lambda_max - 2.0) <= 1e-6
    assert not result.violated


def test_margin_and_tolerance():
    assert CHSH.margin(-1.0, 2.5) == pytest.approx(0.5)
    assert SCG.margin(-4.5, 3.0) == pytest.approx(0.5)
    assert not CHSH.violates(-2.0, 2.0 + VIOLATION_TOL / 2)
    assert CHSH.violates(-2.0, 2.0 + 10 * VIOLATION_TOL)
    assert SCG.violates(-4.1, 0.0)
    assert CHSH.violates(-2.0, 1.9, bound=1.5)


def test_trace_lies_inside_spectrum(params):
    for tau in (0.0, 0.05, 0.2, 1.0):
        result = evaluate(CHSH, SCHEDULES["standard-chsh"], params, tau, with_trace=True)
        assert result.lambda_min - 1e-9 <= result.trace_value <= result.lambda_max + 1e-9


def test_result_rejects_trace_outside_spectrum():
    with pytest.raises(ValueError):
        ViolationResult(lambda_min=-1.0, lambda_max=1.0, trace_value=1.5, classical_bound=2.0, violated=False, tau=0.0)


def test_chsh_violated_at_short_tau(params):
    result = evaluate(CHSH, SCHEDULES["standard-chsh"], params, 0.02)
    assert result.lambda_max > 2.0
    assert result.violated


def test_zero_tau_is_classical(params):
    result = evaluate(CHSH, SCHEDULES["standard-chsh"], params, 0.0)
    assert math.isclose(result.lambda_max, 2.0, abs_tol=1e-9)
    assert not result.violated


def test_analytic_and_lindblad_extremes_agree_without_cp_violation(params):
    for tau in (0.02, 0.1, 0.5):
        analytic = evaluate(CHSH, SCHEDULES["standard-chsh"], params, tau, mode=EvolutionMode.ANALYTIC)
        lindblad = evaluate(CHSH, SCHEDULES["standard-chsh"], params, tau)
        # one-sided decays put an exact eigenvalue 2 next to the surviving block
        assert lindblad.lambda_max == pytest.approx(max(analytic.lambda_max, 2.0), abs=1e-9)
        assert lindblad.violated == analytic.violated


def test_scan_order_and_concurrency(params):
    epsilons, taus = [0.0, 0.01], [0.0, 0.1, 0.3]
    serial = scan(CHSH, SCHEDULES["standard-chsh"], epsilons, taus)
    threaded = scan(CHSH, SCHEDULES["standard-chsh"], epsilons, taus, workers=4)
    assert [(r.epsilon, r.tau) for r in serial] == [(e, t) for e in epsilons for t in taus]
    assert serial == threaded


def test_scan_single_point_matches_direct_construction(params):
    (row,) = scan(SCG, SCHEDULES["standard-scg"], [0.0], [0.4])
    alice, bob = SCHEDULES["standard-scg"].settings(0.4, LINDBLAD)
    direct = witness_extremes(build_witness(spec(SCG, alice, bob)))
    assert (row.lambda_min, row.lambda_max) == pytest.approx(direct, abs=1e-12)


def test_scan_needs_points():
    with pytest.raises(ValueError):
        scan(CHSH, SCHEDULES["standard-chsh"], [], [0.1])


def test_kaon_factory_keeps_base_parameters():
    base = KaonParams(omega=4.0)
    system = kaon_factory(base)(0.05)
    assert system.omega == 4.0 and system.epsilon == 0.05


def test_default_lifetime_grid():
    grid = default_lifetime_grid()
    assert grid[0] > 0.0
    assert math.isclose(grid[-1], 10 * TAU_L_NS)
    assert np.all(np.diff(grid) > 0)
    assert np.max(np.diff(grid[grid < TAU_L_NS / 10])) <= TAU_L_NS / 10000 * 1.01


def test_lifetime_grid_validation():
    with pytest.raises(ValueError):
        violation_lifetime(CHSH, SCHEDULES["standard-chsh"], 0.0, [])
    with pytest.raises(ValueError):
        violation_lifetime(CHSH, SCHEDULES["standard-chsh"], 0.0, [0.2, 0.1])


def test_lifetime_zero_without_violation():
    grid = np.linspace(30.0, 60.0, 7)
    assert violation_lifetime(CHSH, SCHEDULES["standard-chsh"], 0.0, grid) == 0.0


def test_lifetime_is_refined_crossing():
    grid = np.linspace(0.005, 3.0, 300)
    lifetime = violation_lifetime(CHSH, SCHEDULES["standard-chsh"], 0.0, grid)
    assert 0.0 < lifetime < 3.0
    before = evaluate(CHSH, SCHEDULES["standard-chsh"], KaonParams(), lifetime - 1e-3)
    after = evaluate(CHSH, SCHEDULES["standard-chsh"], KaonParams(), lifetime + 1e-3)
    assert before.violated
    assert not after.violated


def test_lifetime_reports_window_end_when_still_violated():
    grid = np.linspace(0.01, 0.03, 5)
    assert violation_lifetime(CHSH, SCHEDULES["standard-chsh"], 0.0, grid) == pytest.approx(0.03)


def test_max_violation_refines_grid_optimum():
    grid = np.linspace(0.0, 1.0, 51)
    result = max_violation(CHSH, SCHEDULES["standard-chsh"], 0.0, grid)
    coarse = max(evaluate(CHSH, SCHEDULES["standard-chsh"], KaonParams(), t).lambda_max for t in grid)
    assert result.lambda_max >= coarse - 1e-12
    assert result.violated
