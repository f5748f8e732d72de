"""
Effective operators O^eff = 2K(t) - 1 for decaying systems.

E(k, t) = Tr[O^eff(k, t) rho(0)] = 2 P(Y: k, t) - 1, where the "N" outcome
covers both the orthogonal state and every decayed / undetected event.
"""

import logging
from enum import Enum
from functools import cached_property, lru_cache
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from kaon_bell.errors import DimensionError, InvalidStateError, PhysicsRangeError
from kaon_bell.kaon import (
    KaonParams,
    QuasiSpin,
    flavor_frame,
    kaon_open_system,
    quasi_spin_state,
    singlet_state,
    ww_propagator,
)
from kaon_bell.liouville import (
    Liouvillian,
    OpenSystem,
    build_liouvillian,
    dual_apply,
    heisenberg_evolve,
    propagator,
    validate_density_matrix,
)
from kaon_bell.numkernel import (
    ComplexMatrix,
    as_matrix,
    eig_hermitian,
    freeze,
    hermitize,
    is_hermitian,
    kron,
    projector,
)

logger = logging.getLogger(__name__)

PROJECTOR_TOL = 1e-10
SPECTRUM_TOL = 1e-9


class EvolutionMode(str, Enum):
    ANALYTIC = "analytic"
    LINDBLAD = "lindblad"


class MeasurementSetting(BaseModel):
    """A quasi-spin direction (or raw projector) measured at time t (ns)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    direction: Optional[QuasiSpin] = None
    projector: Optional[np.ndarray] = None
    time: float = Field(default=0.0, ge=0.0)
    mode: EvolutionMode = EvolutionMode.LINDBLAD

    @field_validator("projector", mode="before")
    @classmethod
    def _check_projector(cls, value):
        if value is None:
            return None
        k = as_matrix(value).copy()
        if k.shape[0] != k.shape[1]:
            raise ValueError(f"projector must be square, got {k.shape}")
        if not is_hermitian(k, PROJECTOR_TOL):
            raise ValueError("projector must be Hermitian")
        if np.max(np.abs(k @ k - k)) > PROJECTOR_TOL:
            raise ValueError("projector must satisfy K^2 = K")
        return freeze(k)

    @model_validator(mode="after")
    def _one_target(self):
        if (self.direction is None) == (self.projector is None):
            raise ValueError("exactly one of direction or projector must be given")
        return self

    def at(self, time: float) -> "MeasurementSetting":
        return self.model_copy(update={"time": float(time)})


class DecayModel(BaseModel):
    """An open system together with the frame its two-state measurement space lives in.

    ``frame`` is an N x 2 isometry whose columns are the images of K0 and K0bar.
    ``superoperator`` optionally replaces e^{At} (e.g. by a Trotterized product).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    params: KaonParams
    system: OpenSystem
    frame: np.ndarray
    superoperator: Optional[Callable[[float], np.ndarray]] = None
    label: str = "kaon"

    @field_validator("frame", mode="before")
    @classmethod
    def _check_frame(cls, value):
        frame = as_matrix(value).copy()
        if frame.shape[1] != 2:
            raise ValueError(f"frame must have two columns, got {frame.shape}")
        if np.max(np.abs(frame.conj().T @ frame - np.eye(2))) > PROJECTOR_TOL:
            raise ValueError("frame columns must be orthonormal")
        return freeze(frame)

    @model_validator(mode="after")
    def _check_dims(self):
        if self.frame.shape[0] != self.system.dim:
            raise ValueError(
                f"frame has {self.frame.shape[0]} rows, system dimension is {self.system.dim}"
            )
        return self

    @property
    def dim(self) -> int:
        return self.system.dim

    @cached_property
    def liouvillian(self) -> Liouvillian:
        return build_liouvillian(self.system)

    def evolution(self, t: float) -> np.ndarray:
        if self.superoperator is not None:
            return self.superoperator(t)
        return propagator(self.liouvillian, t)

    def embed(self, flavour_operator: np.ndarray) -> np.ndarray:
        """Carry a 2x2 flavour-basis operator into the N-level space (zero elsewhere)."""
        return self.frame @ as_matrix(flavour_operator) @ self.frame.conj().T


class EffectiveOperator(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: np.ndarray
    setting: MeasurementSetting

    @field_validator("matrix", mode="before")
    @classmethod
    def _check_matrix(cls, value):
        m = as_matrix(value).copy()
        if not is_hermitian(m, PROJECTOR_TOL):
            raise ValueError("effective operator must be Hermitian")
        return freeze(hermitize(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


SystemLike = Union[DecayModel, KaonParams, OpenSystem]


@lru_cache(maxsize=128)
def kaon_model(params: KaonParams) -> DecayModel:
    """The 3-level Lindblad model of a kaon with the given parameters."""
    return DecayModel(params=params, system=kaon_open_system(params), frame=flavor_frame())


def params_of(system: SystemLike) -> KaonParams:
    if isinstance(system, OpenSystem):
        raise DimensionError("A bare open system carries no kaon parameters")
    return system.params if isinstance(system, DecayModel) else system


def epsilon_of(system: SystemLike) -> float:
    """CP-violation parameter of the system; 0 for a bare open system."""
    return 0.0 if isinstance(system, OpenSystem) else params_of(system).epsilon


def _model_of(system: SystemLike) -> DecayModel:
    if isinstance(system, OpenSystem):
        raise DimensionError("A bare open system has no flavour frame; measure it with a raw projector")
    return system if isinstance(system, DecayModel) else kaon_model(system)


def measurement_projector(system: SystemLike, setting: MeasurementSetting) -> np.ndarray:
    """|k><k| in the space the setting's mode evolves in."""
    if setting.mode is EvolutionMode.ANALYTIC:
        dim = 2
        if setting.direction is not None:
            return projector(quasi_spin_state(params_of(system), setting.direction))
    elif isinstance(system, OpenSystem):
        dim = system.dim
        if setting.direction is not None:
            raise DimensionError("Quasi-spin directions need a flavour frame; pass a raw projector instead")
    else:
        model = _model_of(system)
        dim = model.dim
        if setting.direction is not None:
            return projector(model.frame @ quasi_spin_state(model.params, setting.direction))
    if setting.projector.shape != (dim, dim):
        raise DimensionError(
            f"Projector of shape {setting.projector.shape} does not fit a {dim}-level space"
        )
    return setting.projector


def _check_spectrum(matrix: np.ndarray, setting: MeasurementSetting) -> None:
    eigenvalues = eig_hermitian(matrix).eigenvalues
    if eigenvalues[0] < -1.0 - SPECTRUM_TOL or eigenvalues[-1] > 1.0 + SPECTRUM_TOL:
        raise PhysicsRangeError(
            f"Effective operator spectrum [{eigenvalues[0]:.6f}, {eigenvalues[-1]:.6f}] leaves "
            f"[-1, 1] at t={setting.time}; the parameters violate the unitarity bound"
        )


def effective_operator(system: SystemLike, setting: MeasurementSetting) -> EffectiveOperator:
    k = measurement_projector(system, setting)
    t = setting.time
    if setting.mode is EvolutionMode.ANALYTIC:
        g = ww_propagator(params_of(system), t)
        evolved = g.conj().T @ k @ g
    elif isinstance(system, OpenSystem):
        evolved = heisenberg_evolve(build_liouvillian(system), k, t)
    else:
        model = _model_of(system)
        evolved = k if t == 0 else dual_apply(model.evolution(t), k)
    matrix = hermitize(2.0 * evolved - np.eye(k.shape[0]))
    _check_spectrum(matrix, setting)
    return EffectiveOperator(matrix=matrix, setting=setting)


def tensor_witness(ops: Sequence[Union[EffectiveOperator, np.ndarray]]) -> ComplexMatrix:
    """Kronecker product of the operators in list order."""
    if not ops:
        raise DimensionError("tensor_witness needs at least one operator")
    result = None
    for op in ops:
        matrix = op.matrix if isinstance(op, EffectiveOperator) else as_matrix(op)
        result = matrix if result is None else kron(result, matrix)
    return result


def expectation(witness: np.ndarray, rho0: np.ndarray) -> float:
    """Re Tr[W rho0]; the imaginary residual must vanish."""
    w = as_matrix(witness)
    rho = validate_density_matrix(rho0)
    if w.shape != rho.shape:
        raise DimensionError(f"Witness {w.shape} and state {rho.shape} do not match")
    value = np.trace(w @ rho)
    if abs(value.imag) > 1e-10:
        raise InvalidStateError(f"Expectation value has imaginary part {value.imag:.3e}")
    return float(value.real)


def outcome_probability(system: SystemLike, setting: MeasurementSetting, rho0: np.ndarray) -> Tuple[float, float]:
    """(P(Y), P(N)) for a single particle; P(N) includes decayed and undetected events."""
    op = effective_operator(system, setting)
    value = expectation(op.matrix, rho0)
    p_yes = 0.5 * (value + 1.0)
    return p_yes, 1.0 - p_yes


def initial_pair_state(system: SystemLike, mode: EvolutionMode) -> ComplexMatrix:
    """The two-particle singlet in the space the given mode works in."""
    rho = singlet_state()
    if mode is EvolutionMode.ANALYTIC:
        return rho
    frame = _model_of(system).frame
    pair_frame = kron(frame, frame)
    return pair_frame @ rho @ pair_frame.conj().T
