"""
Vectorized Lindblad generators and propagation in both pictures.

    d rho/dt = -i[H, rho] - sum_i (gamma_i/2)({L_i^dag L_i, rho} - 2 L_i rho L_i^dag)

With row-major vectorization the generator is

    A = -i(H (x) I - I (x) H^T)
        - sum_i (gamma_i/2)[(L^dag L) (x) I + I (x) (L^dag L)^T - 2 L (x) (L^dag)^T]

which is the fully general (transposed) form; it only reduces to the short
form without transposes when L^T = L^dag.
"""

import logging
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from kaon_bell.errors import DimensionError, InvalidStateError, NotHermitianError
from kaon_bell.numkernel import (
    ComplexMatrix,
    as_matrix,
    eig_hermitian,
    expm,
    freeze,
    hermitize,
    is_hermitian,
    unvec,
    vec,
)

logger = logging.getLogger(__name__)

HAMILTONIAN_TOL = 1e-12
STATE_TOL = 1e-10


class JumpChannel(BaseModel):
    """A jump operator L with its rate gamma (1/ns)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    operator: np.ndarray
    rate: float = Field(ge=0.0)
    label: str = ""

    @field_validator("operator", mode="before")
    @classmethod
    def _coerce_operator(cls, value):
        m = as_matrix(value).copy()
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"jump operator must be square, got {m.shape}")
        return freeze(m)


class OpenSystem(BaseModel):
    """Hermitian Hamiltonian plus jump channels on an N-level space (hbar = 1, ns)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    hamiltonian: np.ndarray
    channels: Tuple[JumpChannel, ...] = ()

    @field_validator("hamiltonian", mode="before")
    @classmethod
    def _coerce_hamiltonian(cls, value):
        h = as_matrix(value).copy()
        if h.shape[0] != h.shape[1]:
            raise ValueError(f"hamiltonian must be square, got {h.shape}")
        if not is_hermitian(h, HAMILTONIAN_TOL):
            raise ValueError("hamiltonian must be Hermitian")
        return freeze(h)

    @model_validator(mode="after")
    def _check_channel_dims(self):
        for channel in self.channels:
            if channel.operator.shape != self.hamiltonian.shape:
                raise ValueError(
                    f"channel {channel.label or '?'} has shape {channel.operator.shape}, "
                    f"system dimension is {self.dim}"
                )
        return self

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


class Liouvillian(BaseModel):
    """The N^2 x N^2 generator A with vec(rho)' = A vec(rho)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    generator: np.ndarray
    dim: int

    def trace_defect(self) -> float:
        """max |vec(I)^T A|; zero for trace-preserving dynamics."""
        identity = vec(np.eye(self.dim))
        return float(np.max(np.abs(identity @ self.generator)))


def build_liouvillian(system: OpenSystem) -> Liouvillian:
    n = system.dim
    identity = np.eye(n, dtype=np.complex128)
    h = system.hamiltonian
    a = -1j * (np.kron(h, identity) - np.kron(identity, h.T))
    for channel in system.channels:
        if channel.operator.shape != (n, n):
            raise DimensionError(
                f"Channel operator shape {channel.operator.shape} does not match dimension {n}"
            )
        if channel.rate == 0.0:
            continue
        op = channel.operator
        op_dag = op.conj().T
        number = op_dag @ op
        a -= 0.5 * channel.rate * (
            np.kron(number, identity)
            + np.kron(identity, number.T)
            - 2.0 * np.kron(op, op_dag.T)
        )
    logger.debug(f"Built Liouvillian for {n}-level system with {len(system.channels)} channels")
    return Liouvillian(generator=freeze(a), dim=n)


def _check_time(t: float) -> None:
    if not np.isfinite(t) or t < 0:
        raise InvalidStateError(f"Evolution time must be finite and >= 0, got {t}")


def validate_density_matrix(rho: np.ndarray, tol: float = STATE_TOL) -> np.ndarray:
    """Check Hermiticity, unit trace and positivity; return the matrix as complex."""
    rho = as_matrix(rho)
    if rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"Density matrix must be square, got {rho.shape}")
    if not is_hermitian(rho, tol):
        raise InvalidStateError("Density matrix is not Hermitian")
    trace = np.trace(rho).real
    if abs(trace - 1.0) > tol:
        raise InvalidStateError(f"Density matrix trace is {trace}, expected 1")
    smallest = eig_hermitian(rho).eigenvalues[0]
    if smallest < -tol:
        raise InvalidStateError(f"Density matrix has negative eigenvalue {smallest:.3e}")
    return rho


def propagator(liouvillian: Liouvillian, t: float) -> np.ndarray:
    """The superoperator e^{A t}."""
    _check_time(t)
    return expm(liouvillian.generator * t)


def apply_superoperator(superop: np.ndarray, rho: np.ndarray) -> np.ndarray:
    n = rho.shape[0]
    if superop.shape != (n * n, n * n):
        raise DimensionError(f"Superoperator {superop.shape} does not act on {n}x{n} matrices")
    return hermitize(unvec(superop @ vec(rho), n))


def dual_apply(superop: np.ndarray, observable: np.ndarray) -> np.ndarray:
    """Heisenberg-picture action of a superoperator.

    Returns K' with Tr[K' rho] = Tr[K unvec(P vec(rho))] for every rho, i.e.
    vec(K'^T) = P^T vec(K^T).
    """
    k = as_matrix(observable)
    n = k.shape[0]
    if superop.shape != (n * n, n * n):
        raise DimensionError(f"Superoperator {superop.shape} does not act on {n}x{n} matrices")
    return unvec(superop.T @ vec(k.T), n).T


def propagate(liouvillian: Liouvillian, rho0: np.ndarray, t: float) -> np.ndarray:
    """rho(t) = unvec(e^{At} vec(rho0)) (Schrodinger picture)."""
    _check_time(t)
    rho0 = validate_density_matrix(rho0)
    if rho0.shape[0] != liouvillian.dim:
        raise DimensionError(
            f"State dimension {rho0.shape[0]} does not match system dimension {liouvillian.dim}"
        )
    if t == 0:
        return rho0.copy()
    return apply_superoperator(propagator(liouvillian, t), rho0)


def heisenberg_evolve(liouvillian: Liouvillian, observable: np.ndarray, t: float) -> np.ndarray:
    """K(t) with Tr[K(t) rho0] = Tr[K propagate(rho0, t)] (Heisenberg picture)."""
    _check_time(t)
    k = as_matrix(observable)
    if k.shape != (liouvillian.dim, liouvillian.dim):
        raise DimensionError(
            f"Observable shape {k.shape} does not match system dimension {liouvillian.dim}"
        )
    if not is_hermitian(k, STATE_TOL):
        raise NotHermitianError("Observable must be Hermitian")
    if t == 0:
        return k.copy()
    return hermitize(dual_apply(propagator(liouvillian, t), k))
