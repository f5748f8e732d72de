"""
Trapped-ion analogues of the decaying kaon pair.

Level order of every ion model: 0 = qubit |0> (plays K2), 1 = qubit |1>
(plays K1, the decaying state), 2 = the aggregated decayed level.
K0 is identified with |+> and K0bar with |->.
"""

import logging
import math
from enum import Enum
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from kaon_bell.bell import Schedule, SCHEDULES, WitnessKind, default_lifetime_grid, violation_lifetime
from kaon_bell.effop import DecayModel, EvolutionMode
from kaon_bell.errors import DimensionError, InvalidStateError, PhysicsRangeError
from kaon_bell.kaon import GAMMA_S_DEFAULT, OMEGA_DEFAULT, KaonParams
from kaon_bell.liouville import (
    JumpChannel,
    Liouvillian,
    OpenSystem,
    apply_superoperator,
    build_liouvillian,
    validate_density_matrix,
)
from kaon_bell.numkernel import ComplexMatrix, expm, freeze

logger = logging.getLogger(__name__)

QUBIT_0 = 0
QUBIT_1 = 1
DECAYED = 2


class IonKind(str, Enum):
    """172Yb+ decays purely; 171Yb+ splits gamma_S into decay and dephasing."""

    YB171 = "yb171"
    YB172 = "yb172"


class TrotterConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    dt: float = Field(gt=0.0)
    order: int = Field(default=2, ge=1, le=2)

    @classmethod
    def default_for(cls, omega: float, gamma_S: float) -> "TrotterConfig":
        return cls(dt=1.0 / (50.0 * max(omega, gamma_S)), order=2)


def tilt_from_epsilon(epsilon: float, omega: float) -> Tuple[float, float]:
    """Detuning and Rabi frequency whose tilted axis emulates CP violation epsilon.

    delta / sqrt(delta^2 + rabi^2) = (1 - eps)/(1 + eps) and sqrt(delta^2 + rabi^2) = omega.
    """
    if not 0.0 <= epsilon < 1.0:
        raise PhysicsRangeError(f"epsilon must lie in [0, 1), got {epsilon}")
    if not omega > 0.0:
        raise PhysicsRangeError(f"omega must be positive, got {omega}")
    ratio = (1.0 - epsilon) / (1.0 + epsilon)
    return omega * ratio, omega * math.sqrt(1.0 - ratio * ratio)


def epsilon_from_tilt(delta: float, rabi: float) -> float:
    r = math.hypot(delta, rabi)
    if r == 0.0:
        raise PhysicsRangeError("delta and rabi cannot both vanish")
    return (r - delta) / (r + delta)


def ion_frame() -> ComplexMatrix:
    """3x2 isometry: K0 -> |+>, K0bar -> |->."""
    frame = np.zeros((3, 2), dtype=np.complex128)
    frame[QUBIT_0, :] = 1.0 / math.sqrt(2.0)
    frame[QUBIT_1, 0] = 1.0 / math.sqrt(2.0)
    frame[QUBIT_1, 1] = -1.0 / math.sqrt(2.0)
    return freeze(frame)


def _jump(to: int, frm: int) -> np.ndarray:
    op = np.zeros((3, 3), dtype=np.complex128)
    op[to, frm] = 1.0
    return op


def _channels(kind: IonKind, gamma_S: float) -> Tuple[JumpChannel, ...]:
    if kind is IonKind.YB172:
        return (JumpChannel(operator=_jump(DECAYED, QUBIT_1), rate=gamma_S, label="decay"),)
    return (
        JumpChannel(operator=_jump(DECAYED, QUBIT_1), rate=2.0 * gamma_S / 3.0, label="decay"),
        JumpChannel(operator=_jump(QUBIT_1, QUBIT_1), rate=gamma_S / 3.0, label="dephasing"),
    )


class IonModel(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: IonKind
    system: OpenSystem
    delta: float
    rabi: float
    gamma_S: float
    epsilon: float
    omega: float
    within_validity: bool

    @property
    def params(self) -> KaonParams:
        """Kaon-equivalent parameters (no long-lived decay)."""
        return KaonParams(gamma_S=self.gamma_S, gamma_L=0.0, omega=self.omega, epsilon=self.epsilon)

    @cached_property
    def oscillation(self) -> Liouvillian:
        return build_liouvillian(OpenSystem(hamiltonian=self.system.hamiltonian))

    @cached_property
    def decay(self) -> Liouvillian:
        zero = np.zeros_like(self.system.hamiltonian)
        return build_liouvillian(OpenSystem(hamiltonian=zero, channels=self.system.channels))

    def decay_model(self, trotter: Optional[TrotterConfig] = None) -> DecayModel:
        """The model as a DecayModel; with ``trotter`` its evolution is digitally split."""
        superoperator = None
        if trotter is not None:
            osc, dec = self.oscillation, self.decay

            def superoperator(t: float) -> np.ndarray:
                return trotter_superoperator(osc, dec, t, trotter)

        return DecayModel(
            params=self.params,
            system=self.system,
            frame=ion_frame(),
            superoperator=superoperator,
            label=self.kind.value,
        )


def yb_model(
    kind: IonKind,
    gamma_S: float = GAMMA_S_DEFAULT,
    epsilon: float = 0.0,
    omega: float = OMEGA_DEFAULT,
) -> IonModel:
    kind = IonKind(kind)
    if not gamma_S > 0.0:
        raise PhysicsRangeError(f"gamma_S must be positive, got {gamma_S}")
    delta, rabi = tilt_from_epsilon(epsilon, omega)
    hamiltonian = np.zeros((3, 3), dtype=np.complex128)
    hamiltonian[:2, :2] = 0.5 * np.array([[delta, rabi], [rabi, -delta]])
    within_validity = epsilon < omega / gamma_S
    if not within_validity:
        logger.warning(
            f"epsilon={epsilon} is not small against omega/gamma_S={omega / gamma_S:.4f}; "
            f"the tilted-axis emulation is outside its range of validity"
        )
    return IonModel(
        kind=kind,
        system=OpenSystem(hamiltonian=hamiltonian, channels=_channels(kind, gamma_S)),
        delta=delta,
        rabi=rabi,
        gamma_S=gamma_S,
        epsilon=epsilon,
        omega=omega,
        within_validity=within_validity,
    )


def _step(osc: np.ndarray, dec: np.ndarray, h: float, order: int) -> np.ndarray:
    if order == 1:
        return expm(dec * h) @ expm(osc * h)
    half = expm(osc * (0.5 * h))
    return half @ expm(dec * h) @ half


def trotter_superoperator(osc: Liouvillian, dec: Liouvillian, t: float, cfg: TrotterConfig) -> np.ndarray:
    """Split-step approximation of e^{(A_osc + A_dec) t}.

    Full steps of length dt followed by one shorter step for the remainder.
    """
    if osc.dim != dec.dim:
        raise DimensionError(f"Generators act on {osc.dim} and {dec.dim} levels")
    if not np.isfinite(t) or t < 0:
        raise InvalidStateError(f"Evolution time must be finite and >= 0, got {t}")
    a_osc, a_dec = osc.generator, dec.generator
    ratio = t / cfg.dt
    steps = int(round(ratio)) if abs(ratio - round(ratio)) < 1e-9 else int(math.floor(ratio))
    remainder = t - steps * cfg.dt
    result = np.linalg.matrix_power(_step(a_osc, a_dec, cfg.dt, cfg.order), steps)
    if remainder > 1e-12 * cfg.dt:
        result = _step(a_osc, a_dec, remainder, cfg.order) @ result
    return result


def trotter_propagate(
    osc: Liouvillian, dec: Liouvillian, rho0: np.ndarray, t: float, cfg: TrotterConfig
) -> ComplexMatrix:
    rho0 = validate_density_matrix(rho0)
    if rho0.shape[0] != osc.dim:
        raise DimensionError(f"State dimension {rho0.shape[0]} does not match {osc.dim}")
    if t == 0:
        return rho0.copy()
    return apply_superoperator(trotter_superoperator(osc, dec, t, cfg), rho0)


class LifetimeComparison(BaseModel):
    """One row of the dephasing comparison: lifetimes in ns."""

    model_config = ConfigDict(frozen=True)

    epsilon: float
    lifetime_pure_decay: float
    lifetime_with_dephasing: float

    @property
    def relative_difference(self) -> float:
        reference = max(self.lifetime_pure_decay, self.lifetime_with_dephasing)
        if reference == 0.0:
            return 0.0
        return abs(self.lifetime_pure_decay - self.lifetime_with_dephasing) / reference


def compare_lifetimes(
    epsilons: Sequence[float],
    gamma_S: float = GAMMA_S_DEFAULT,
    omega: float = OMEGA_DEFAULT,
    schedule: Schedule = SCHEDULES["standard-scg"],
    grid: Optional[np.ndarray] = None,
    trotter: Optional[TrotterConfig] = None,
) -> List[LifetimeComparison]:
    """SCG violation lifetimes of the pure-decay and decay-plus-dephasing ion models."""
    if len(epsilons) == 0:
        raise ValueError("compare_lifetimes needs at least one epsilon")
    grid = default_lifetime_grid() if grid is None else grid
    rows = []
    for epsilon in epsilons:
        lifetimes = {}
        for kind in (IonKind.YB172, IonKind.YB171):

            def factory(eps: float, kind: IonKind = kind) -> DecayModel:
                return yb_model(kind, gamma_S, eps, omega).decay_model(trotter)

            lifetimes[kind] = violation_lifetime(
                WitnessKind.SCG, schedule, epsilon, grid, factory=factory, mode=EvolutionMode.LINDBLAD
            )
        row = LifetimeComparison(
            epsilon=epsilon,
            lifetime_pure_decay=lifetimes[IonKind.YB172],
            lifetime_with_dephasing=lifetimes[IonKind.YB171],
        )
        logger.info(
            f"eps={epsilon}: lifetime {row.lifetime_pure_decay:.4f} ns (decay) vs "
            f"{row.lifetime_with_dephasing:.4f} ns (decay + dephasing)"
        )
        rows.append(row)
    return rows
