"""
Bell witnesses built from effective operators.

CHSH:  S = A1 (x) (B1 - B2) + A2 (x) (B1 + B2),                 violated if lambda_max > 2
SCG:   A1 (x) (I + B1 + B2 + B3) + A2 (x) (I + B1 + B2 - B3)
       + A3 (x) (B1 - B2) + I (x) (B1 + B2),                      violated if lambda_min < -4

All schedules measure a fixed quasi-spin and vary the measurement times with a
single parameter tau (ns).
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.optimize import brentq, minimize_scalar

from kaon_bell.effop import (
    EffectiveOperator,
    EvolutionMode,
    MeasurementSetting,
    SystemLike,
    effective_operator,
    epsilon_of,
    expectation,
    initial_pair_state,
)
from kaon_bell.errors import DimensionError
from kaon_bell.kaon import K_ZERO_BAR, TAU_L_NS, KaonParams, QuasiSpin
from kaon_bell.numkernel import ComplexMatrix, eig_hermitian, hermitize, kron

logger = logging.getLogger(__name__)

SystemFactory = Callable[[float], SystemLike]

TSIRELSON_BOUND = 2.0 * math.sqrt(2.0)

# The decayed pair sits exactly on the CHSH bound; margins below this are round-off.
VIOLATION_TOL = 1e-9


class WitnessKind(str, Enum):
    CHSH = "chsh"
    SCG = "scg"

    @property
    def arity(self) -> int:
        return 2 if self is WitnessKind.CHSH else 3

    @property
    def classical_bound(self) -> float:
        return 2.0 if self is WitnessKind.CHSH else -4.0

    def margin(self, lambda_min: float, lambda_max: float, bound: Optional[float] = None) -> float:
        """Positive exactly when the classical bound is violated."""
        bound = self.classical_bound if bound is None else bound
        if self is WitnessKind.CHSH:
            return lambda_max - bound
        return bound - lambda_min

    def violates(self, lambda_min: float, lambda_max: float, bound: Optional[float] = None) -> bool:
        return self.margin(lambda_min, lambda_max, bound) > VIOLATION_TOL


class ScheduledSetting(BaseModel):
    """A quasi-spin measured at time scale * tau + offset."""

    model_config = ConfigDict(frozen=True)

    direction: QuasiSpin = K_ZERO_BAR
    scale: float = Field(default=0.0, ge=0.0)
    offset: float = Field(default=0.0, ge=0.0)

    def time(self, tau: float) -> float:
        return self.scale * tau + self.offset


class Schedule(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    alice: Tuple[ScheduledSetting, ...]
    bob: Tuple[ScheduledSetting, ...]

    @model_validator(mode="after")
    def _same_arity(self):
        if len(self.alice) != len(self.bob):
            raise ValueError(
                f"schedule '{self.name}' has {len(self.alice)} Alice and {len(self.bob)} Bob settings"
            )
        if len(self.alice) not in (2, 3):
            raise ValueError(f"schedule '{self.name}' needs 2 (CHSH) or 3 (SCG) settings per party")
        return self

    @property
    def kind(self) -> WitnessKind:
        return WitnessKind.CHSH if len(self.alice) == 2 else WitnessKind.SCG

    def settings(self, tau: float, mode: EvolutionMode) -> Tuple[List[MeasurementSetting], List[MeasurementSetting]]:
        def expand(party):
            return [MeasurementSetting(direction=s.direction, time=s.time(tau), mode=mode) for s in party]

        return expand(self.alice), expand(self.bob)


def _times(name: str, alice: Sequence[float], bob: Sequence[float]) -> Schedule:
    return Schedule(
        name=name,
        alice=tuple(ScheduledSetting(scale=s) for s in alice),
        bob=tuple(ScheduledSetting(scale=s) for s in bob),
    )


SCHEDULES: Dict[str, Schedule] = {
    s.name: s
    for s in (
        _times("standard-chsh", (1, 0), (0, 1)),
        _times("chsh-reversed", (0, 1), (1, 0)),
        _times("standard-scg", (0, 1, 2), (0, 2, 1)),
        _times("scg-staggered", (0, 1, 1), (1, 1, 0)),
    )
}

SCHEDULE_ALIASES: Dict[str, str] = {"paper-chsh": "standard-chsh", "paper-scg": "standard-scg"}
SCHEDULES.update({alias: SCHEDULES[name] for alias, name in SCHEDULE_ALIASES.items()})


class WitnessSpec(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: WitnessKind
    alice: Tuple[MeasurementSetting, ...]
    bob: Tuple[MeasurementSetting, ...]
    system: SystemLike
    mode: EvolutionMode = EvolutionMode.LINDBLAD

    @field_validator("alice", "bob", mode="before")
    @classmethod
    def _as_tuple(cls, value):
        return tuple(value)

    @model_validator(mode="after")
    def _check_arity(self):
        for party, settings in (("alice", self.alice), ("bob", self.bob)):
            if len(settings) != self.kind.arity:
                raise ValueError(
                    f"{self.kind.value} needs {self.kind.arity} settings for {party}, got {len(settings)}"
                )
            if any(s.mode is not self.mode for s in settings):
                raise ValueError(f"all {party} settings must use mode {self.mode.value}")
        return self


class ViolationResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    lambda_min: float
    lambda_max: float
    trace_value: Optional[float] = None
    classical_bound: float
    violated: bool
    tau: float
    epsilon: float = 0.0

    @model_validator(mode="after")
    def _trace_inside_spectrum(self):
        if self.trace_value is not None:
            slack = 1e-9 * max(1.0, abs(self.lambda_min), abs(self.lambda_max))
            if not self.lambda_min - slack <= self.trace_value <= self.lambda_max + slack:
                raise ValueError(
                    f"trace value {self.trace_value} outside [{self.lambda_min}, {self.lambda_max}]"
                )
        return self


def _operators(spec: WitnessSpec) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    cache: Dict[Tuple[QuasiSpin, float], EffectiveOperator] = {}

    def op(setting: MeasurementSetting) -> np.ndarray:
        if setting.direction is None:
            return effective_operator(spec.system, setting).matrix
        key = (setting.direction, setting.time)
        if key not in cache:
            cache[key] = effective_operator(spec.system, setting)
        return cache[key].matrix

    return [op(s) for s in spec.alice], [op(s) for s in spec.bob]


def _require(spec: WitnessSpec, kind: WitnessKind) -> None:
    if spec.kind is not kind:
        raise DimensionError(f"Expected a {kind.value} witness spec, got {spec.kind.value}")


def chsh_witness(spec: WitnessSpec) -> ComplexMatrix:
    _require(spec, WitnessKind.CHSH)
    (a1, a2), (b1, b2) = _operators(spec)
    return hermitize(kron(a1, b1 - b2) + kron(a2, b1 + b2))


def scg_witness(spec: WitnessSpec) -> ComplexMatrix:
    _require(spec, WitnessKind.SCG)
    (a1, a2, a3), (b1, b2, b3) = _operators(spec)
    identity = np.eye(a1.shape[0], dtype=np.complex128)
    return hermitize(
        kron(a1, identity + b1 + b2 + b3)
        + kron(a2, identity + b1 + b2 - b3)
        + kron(a3, b1 - b2)
        + kron(identity, b1 + b2)
    )


def build_witness(spec: WitnessSpec) -> ComplexMatrix:
    if spec.kind is WitnessKind.CHSH:
        return chsh_witness(spec)
    return scg_witness(spec)


def witness_extremes(witness: np.ndarray) -> Tuple[float, float]:
    eigenvalues = eig_hermitian(witness).eigenvalues
    return float(eigenvalues[0]), float(eigenvalues[-1])


def witness_trace(witness: np.ndarray, rho0: np.ndarray) -> float:
    return expectation(witness, rho0)


def kaon_factory(base: Optional[KaonParams] = None) -> SystemFactory:
    """Systems for each epsilon, sharing every other kaon parameter with ``base``."""
    base = KaonParams() if base is None else base
    return base.with_epsilon


def evaluate(
    kind: WitnessKind,
    schedule: Schedule,
    system: SystemLike,
    tau: float,
    *,
    mode: EvolutionMode = EvolutionMode.LINDBLAD,
    rho0: Optional[np.ndarray] = None,
    with_trace: bool = False,
    bound: Optional[float] = None,
) -> ViolationResult:
    """Witness extremes (and optionally its singlet or ``rho0`` trace) at one tau."""
    kind = WitnessKind(kind)
    alice, bob = schedule.settings(tau, mode)
    spec = WitnessSpec(kind=kind, alice=alice, bob=bob, system=system, mode=mode)
    witness = build_witness(spec)
    lambda_min, lambda_max = witness_extremes(witness)
    trace_value = None
    if rho0 is None and with_trace:
        rho0 = initial_pair_state(system, mode)
    if rho0 is not None:
        trace_value = witness_trace(witness, rho0)
    bound = kind.classical_bound if bound is None else bound
    epsilon = epsilon_of(system)
    return ViolationResult(
        lambda_min=lambda_min,
        lambda_max=lambda_max,
        trace_value=trace_value,
        classical_bound=bound,
        violated=kind.violates(lambda_min, lambda_max, bound),
        tau=float(tau),
        epsilon=epsilon,
    )


def _check_grid(grid: Sequence[float]) -> np.ndarray:
    grid = np.asarray(grid, dtype=np.float64).reshape(-1)
    if grid.size == 0:
        raise ValueError("time grid is empty")
    if grid[0] < 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("time grid must be non-negative and strictly ascending")
    return grid


def default_lifetime_grid(tau_L: float = TAU_L_NS) -> np.ndarray:
    """Window (0, 10 tau_L] with step tau_L / 200, plus a tau_L / 10000 step below tau_L / 10.

    The fine segment resolves CHSH violations, which end within a few K_S lifetimes.
    """
    coarse = np.linspace(tau_L / 200.0, 10.0 * tau_L, 2000)
    fine = np.linspace(tau_L / 10000.0, tau_L / 10.0, 1000)
    return np.unique(np.concatenate([fine, coarse]))


def default_peak_grid(stop: float = 2.0, steps: int = 401) -> np.ndarray:
    return np.linspace(0.0, stop, steps)


def violation_lifetime(
    kind: WitnessKind,
    schedule: Schedule,
    epsilon: float,
    grid: Optional[Sequence[float]] = None,
    bound: Optional[float] = None,
    *,
    factory: Optional[SystemFactory] = None,
    mode: EvolutionMode = EvolutionMode.LINDBLAD,
) -> float:
    """Largest tau in the grid window at which the witness still violates its bound.

    The crossing after the last violating grid point is refined to 1e-4 ns.
    Returns 0 if nothing on the grid violates and the window end if the last
    point still does.
    """
    kind = WitnessKind(kind)
    grid = _check_grid(default_lifetime_grid() if grid is None else grid)
    system = (factory or kaon_factory())(epsilon)

    def margin(tau: float) -> float:
        r = evaluate(kind, schedule, system, tau, mode=mode, bound=bound)
        return kind.margin(r.lambda_min, r.lambda_max, bound) - VIOLATION_TOL

    margins = np.array([margin(tau) for tau in grid])
    violating = np.flatnonzero(margins > 0)
    if violating.size == 0:
        logger.info(f"{kind.value} eps={epsilon}: no violation on the grid")
        return 0.0
    last = int(violating[-1])
    if last == grid.size - 1:
        logger.info(f"{kind.value} eps={epsilon}: still violated at window end {grid[-1]:.4f} ns")
        return float(grid[-1])
    if margins[last + 1] == 0.0:
        return float(grid[last + 1])
    lifetime = brentq(margin, grid[last], grid[last + 1], xtol=1e-4)
    logger.info(f"{kind.value} eps={epsilon}: violation lifetime {lifetime:.4f} ns")
    return float(lifetime)


def max_violation(
    kind: WitnessKind,
    schedule: Schedule,
    epsilon: float,
    grid: Optional[Sequence[float]] = None,
    *,
    factory: Optional[SystemFactory] = None,
    mode: EvolutionMode = EvolutionMode.LINDBLAD,
) -> ViolationResult:
    """The most violating tau (max lambda_max for CHSH, min lambda_min for SCG)."""
    kind = WitnessKind(kind)
    grid = _check_grid(default_peak_grid() if grid is None else grid)
    system = (factory or kaon_factory())(epsilon)
    sign = -1.0 if kind is WitnessKind.CHSH else 1.0

    def objective(tau: float) -> float:
        r = evaluate(kind, schedule, system, tau, mode=mode)
        return sign * (r.lambda_max if kind is WitnessKind.CHSH else r.lambda_min)

    values = np.array([objective(tau) for tau in grid])
    best = int(np.argmin(values))
    best_tau = float(grid[best])
    lo, hi = grid[max(best - 1, 0)], grid[min(best + 1, grid.size - 1)]
    if hi > lo:
        refined = minimize_scalar(objective, bounds=(lo, hi), method="bounded", options={"xatol": 1e-6})
        if refined.success and refined.fun < values[best]:
            best_tau = float(refined.x)
    result = evaluate(kind, schedule, system, best_tau, mode=mode)
    logger.info(
        f"{kind.value} eps={epsilon}: extreme eigenvalue "
        f"{result.lambda_max if kind is WitnessKind.CHSH else result.lambda_min:.4f} at tau={best_tau:.5f} ns"
    )
    return result


def scan(
    kind: WitnessKind,
    schedule: Schedule,
    epsilons: Sequence[float],
    taus: Sequence[float],
    *,
    factory: Optional[SystemFactory] = None,
    mode: EvolutionMode = EvolutionMode.LINDBLAD,
    with_trace: bool = False,
    workers: int = 1,
) -> List[ViolationResult]:
    """Evaluate every (epsilon, tau) pair; rows are epsilon-major, tau-minor."""
    if len(epsilons) == 0 or len(taus) == 0:
        raise ValueError("scan needs at least one epsilon and one tau")
    kind = WitnessKind(kind)
    factory = factory or kaon_factory()
    systems = [factory(epsilon) for epsilon in epsilons]
    points = list(itertools.product(systems, taus))

    def one(point) -> ViolationResult:
        system, tau = point
        result = evaluate(kind, schedule, system, tau, mode=mode, with_trace=with_trace)
        logger.debug(
            f"eps={result.epsilon} tau={tau}: [{result.lambda_min:.6f}, {result.lambda_max:.6f}]"
        )
        return result

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, points))
    else:
        rows = [one(point) for point in points]
    logger.info(
        f"Scanned {kind.value} over {len(epsilons)} epsilon x {len(taus)} tau points "
        f"({sum(r.violated for r in rows)} violating)"
    )
    return rows
