"""
Neutral-kaon model.

Units: hbar = 1, times in ns, rates and frequencies in 1/ns.

Bases used throughout:
  * flavour basis {K0, K0bar} for the analytic (Wigner-Weisskopf) path,
  * 3-level embedding |0> = decayed, |1> = K_L (~K2), |2> = K_S (~K1) for the
    Lindblad path. For epsilon > 0 levels 1 and 2 are the CP eigenstates
    K2 and K1 and CP violation enters through a tilted Hamiltonian.
"""

import logging
import math
from enum import IntEnum
from functools import lru_cache
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from kaon_bell.errors import InvalidStateError, PhysicsRangeError
from kaon_bell.liouville import JumpChannel, OpenSystem
from kaon_bell.numkernel import ComplexMatrix, freeze, projector

logger = logging.getLogger(__name__)

TAU_S_NS = 8.95e-2
TAU_L_NS = 51.1
GAMMA_S_DEFAULT = 1.0 / TAU_S_NS
GAMMA_L_DEFAULT = 1.0 / TAU_L_NS
# Standard kaon mass splitting; not fixed by the effective-operator model itself.
OMEGA_OVER_GAMMA_S = 0.474
OMEGA_DEFAULT = OMEGA_OVER_GAMMA_S * GAMMA_S_DEFAULT


class Level(IntEnum):
    """Level order of the 3-level kaon embedding."""

    DECAYED = 0
    LONG = 1
    SHORT = 2


class KaonBasis:
    """Basis conventions. Vectors are in the flavour basis {K0, K0bar}."""

    K0 = freeze(np.array([1.0, 0.0], dtype=np.complex128))
    K0_BAR = freeze(np.array([0.0, 1.0], dtype=np.complex128))
    # CP eigenstates
    K1 = freeze((K0 - K0_BAR) / math.sqrt(2.0))
    K2 = freeze((K0 + K0_BAR) / math.sqrt(2.0))


class KaonParams(BaseModel):
    """Decay widths, mass splitting and CP-violation parameter of the kaon pair."""

    model_config = ConfigDict(frozen=True)

    gamma_S: float = Field(default=GAMMA_S_DEFAULT, gt=0.0)
    gamma_L: float = Field(default=GAMMA_L_DEFAULT, ge=0.0)
    omega: float = Field(default=OMEGA_DEFAULT, gt=0.0)
    epsilon: float = Field(default=0.0, ge=0.0, lt=1.0)

    @model_validator(mode="after")
    def _check_widths(self):
        if not self.gamma_L < self.gamma_S:
            raise ValueError(
                f"gamma_L ({self.gamma_L}) must be smaller than gamma_S ({self.gamma_S})"
            )
        return self

    @property
    def gamma(self) -> float:
        """Mean width (Gamma_S + Gamma_L)/2."""
        return 0.5 * (self.gamma_S + self.gamma_L)

    @property
    def lambda_S(self) -> complex:
        # m_S = 0 fixes the irrelevant energy offset
        return -0.5j * self.gamma_S

    @property
    def lambda_L(self) -> complex:
        return self.omega - 0.5j * self.gamma_L

    def overlap(self) -> float:
        """<K_S|K_L> = 2 eps / (1 + eps^2)."""
        return 2.0 * self.epsilon / (1.0 + self.epsilon**2)

    def unitarity_bound(self) -> float:
        """Largest |<K_S|K_L>| for which the decay matrix stays positive."""
        return math.sqrt(self.gamma_S * self.gamma_L) / abs(complex(self.gamma, -self.omega))

    def with_epsilon(self, epsilon: float) -> "KaonParams":
        return KaonParams(
            gamma_S=self.gamma_S, gamma_L=self.gamma_L, omega=self.omega, epsilon=epsilon
        )


class QuasiSpin(BaseModel):
    """Measurement direction cos(a/2)|K_S> + sin(a/2) e^{i phi}|K_L>."""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(ge=0.0, le=math.pi)
    phi: float = Field(default=0.0, ge=0.0, lt=2.0 * math.pi)


K_SHORT = QuasiSpin(alpha=0.0, phi=0.0)
K_ZERO = QuasiSpin(alpha=math.pi / 2, phi=0.0)
# equals -|K0bar> for every epsilon
K_ZERO_BAR = QuasiSpin(alpha=math.pi / 2, phi=math.pi)


def eigenstates(params: KaonParams) -> Tuple[np.ndarray, np.ndarray]:
    """(K_S, K_L) in the flavour basis, each of unit norm with real overlap >= 0."""
    eps = params.epsilon
    norm = math.sqrt(1.0 + eps**2)
    k_short = (KaonBasis.K1 + eps * KaonBasis.K2) / norm
    k_long = (KaonBasis.K2 + eps * KaonBasis.K1) / norm
    return k_short, k_long


def ww_propagator(params: KaonParams, t: float) -> ComplexMatrix:
    """Non-unitary Wigner-Weisskopf propagator G(t) in the flavour basis.

    Columns are the evolved basis states:
    K0(t) = g+ K0 + (q/p) g- K0bar,  K0bar(t) = (p/q) g- K0 + g+ K0bar.
    """
    if not np.isfinite(t) or t < 0:
        raise InvalidStateError(f"Evolution time must be finite and >= 0, got {t}")
    e_short = np.exp(-1j * params.lambda_S * t)
    e_long = np.exp(-1j * params.lambda_L * t)
    g_plus = 0.5 * (e_short + e_long)
    g_minus = 0.5 * (-e_short + e_long)
    # p ~ (1 + eps), q ~ (1 - eps); only the ratio enters
    p_over_q = (1.0 + params.epsilon) / (1.0 - params.epsilon)
    return np.array(
        [[g_plus, p_over_q * g_minus], [g_minus / p_over_q, g_plus]],
        dtype=np.complex128,
    )


def singlet_state() -> ComplexMatrix:
    """(|K0 K0bar> - |K0bar K0>)/sqrt(2) as a 4x4 density matrix."""
    psi = (np.kron(KaonBasis.K0, KaonBasis.K0_BAR) - np.kron(KaonBasis.K0_BAR, KaonBasis.K0)) / math.sqrt(2.0)
    return projector(psi)


def quasi_spin_state(params: KaonParams, direction: QuasiSpin) -> np.ndarray:
    """Normalized quasi-spin state in the flavour basis.

    K_S and K_L overlap for epsilon > 0, so the raw combination is renormalized.
    """
    k_short, k_long = eigenstates(params)
    state = math.cos(direction.alpha / 2) * k_short + (
        math.sin(direction.alpha / 2) * np.exp(1j * direction.phi) * k_long
    )
    return state / np.linalg.norm(state)


def closed_form_effop(params: KaonParams, direction: QuasiSpin, t: float) -> ComplexMatrix:
    """O^eff = 2K(t) - 1 in the {K_S, K_L} basis, valid without CP violation.

    The off-diagonal phase is e^{-i(phi + omega t)} with m_L - m_S = omega.
    """
    if params.epsilon != 0.0:
        raise PhysicsRangeError("closed_form_effop is only valid for epsilon = 0")
    if not np.isfinite(t) or t < 0:
        raise InvalidStateError(f"Measurement time must be finite and >= 0, got {t}")
    c2 = math.cos(direction.alpha / 2) ** 2
    s2 = math.sin(direction.alpha / 2) ** 2
    off = math.sin(direction.alpha) * np.exp(-1j * (direction.phi + params.omega * t)) * math.exp(
        -params.gamma * t
    )
    return np.array(
        [
            [2.0 * c2 * math.exp(-params.gamma_S * t) - 1.0, off],
            [np.conj(off), 2.0 * s2 * math.exp(-params.gamma_L * t) - 1.0],
        ],
        dtype=np.complex128,
    )


def flavor_frame() -> ComplexMatrix:
    """3x2 isometry taking flavour-basis vectors into the 3-level embedding."""
    frame = np.zeros((3, 2), dtype=np.complex128)
    for column, flavour in enumerate((KaonBasis.K0, KaonBasis.K0_BAR)):
        frame[Level.LONG, column] = np.vdot(KaonBasis.K2, flavour)
        frame[Level.SHORT, column] = np.vdot(KaonBasis.K1, flavour)
    return freeze(frame)


@lru_cache(maxsize=128)
def kaon_open_system(params: KaonParams) -> OpenSystem:
    """3-level open system: decays |2> -> |0> at Gamma_S and |1> -> |0> at Gamma_L."""
    # ionsim builds on this module
    from kaon_bell.ionsim import tilt_from_epsilon

    delta, rabi = tilt_from_epsilon(params.epsilon, params.omega)
    hamiltonian = np.zeros((3, 3), dtype=np.complex128)
    block = 0.5 * np.array([[delta, rabi], [rabi, -delta]]) + 0.5 * params.omega * np.eye(2)
    hamiltonian[1:, 1:] = block

    def jump(to: Level, frm: Level) -> np.ndarray:
        op = np.zeros((3, 3), dtype=np.complex128)
        op[to, frm] = 1.0
        return op

    channels = (
        JumpChannel(operator=jump(Level.DECAYED, Level.SHORT), rate=params.gamma_S, label="L20"),
        JumpChannel(operator=jump(Level.DECAYED, Level.LONG), rate=params.gamma_L, label="L10"),
        JumpChannel(operator=jump(Level.LONG, Level.SHORT), rate=0.0, label="L21"),
    )
    return OpenSystem(hamiltonian=hamiltonian, channels=channels)
