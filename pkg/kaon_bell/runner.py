"""
Runs a RunConfig against the bell / ionsim machinery and returns flat rows.
"""

import logging
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, model_validator

from kaon_bell.bell import (
    SCHEDULES,
    SystemFactory,
    ViolationResult,
    WitnessKind,
    default_lifetime_grid,
    evaluate,
    kaon_factory,
    max_violation,
    scan,
    violation_lifetime,
)
from kaon_bell.config import RunConfig, SystemKind
from kaon_bell.effop import EffectiveOperator, MeasurementSetting, effective_operator
from kaon_bell.ionsim import IonKind, LifetimeComparison, compare_lifetimes, yb_model
from kaon_bell.kaon import TAU_L_NS, QuasiSpin

logger = logging.getLogger(__name__)


class ScanRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    epsilon: float
    tau_ns: float
    lambda_min: float
    lambda_max: float
    trace_value: Optional[float] = None
    bound: float
    violated: bool
    witness: WitnessKind = WitnessKind.CHSH

    @model_validator(mode="after")
    def _flag_matches_eigenvalues(self):
        if self.violated != self.witness.violates(self.lambda_min, self.lambda_max, self.bound):
            raise ValueError("violated flag does not follow from the eigenvalues and bound")
        return self

    @classmethod
    def from_result(cls, result: ViolationResult, witness: WitnessKind) -> "ScanRow":
        return cls(
            epsilon=result.epsilon,
            tau_ns=result.tau,
            lambda_min=result.lambda_min,
            lambda_max=result.lambda_max,
            trace_value=result.trace_value,
            bound=result.classical_bound,
            violated=result.violated,
            witness=witness,
        )


class LifetimeRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    epsilon: float
    lifetime_ns: float


def system_factory(config: RunConfig) -> SystemFactory:
    """Maps epsilon to the configured kaon parameters or ion decay model."""
    if config.system.kind is SystemKind.KAON:
        return kaon_factory(config.kaon_params())
    kind = IonKind(config.system.kind.value)
    gamma_S, omega = config.system.gamma_S, config.system.omega_value
    trotter = config.trotter_config()

    def factory(epsilon: float):
        return yb_model(kind, gamma_S, epsilon, omega).decay_model(trotter)

    return factory


def _lifetime_window(config: RunConfig) -> float:
    if config.system.kind is SystemKind.KAON:
        return 1.0 / config.system.gamma_L if config.system.gamma_L > 0 else TAU_L_NS
    return TAU_L_NS


def run(config: RunConfig) -> List[ScanRow]:
    """Witness extremes over the epsilon x tau grid, epsilon-major."""
    witness = config.witness_kind
    results = scan(
        witness,
        config.schedule(),
        config.epsilons(),
        config.scan.tau_grid(),
        factory=system_factory(config),
        mode=config.system.mode,
        with_trace=config.witness.with_trace,
        workers=config.scan.workers,
    )
    return [ScanRow.from_result(r, witness) for r in results]


def run_point(config: RunConfig, tau: float) -> ScanRow:
    """One witness evaluation with the singlet trace."""
    witness = config.witness_kind
    system = system_factory(config)(config.system.epsilon)
    result = evaluate(witness, config.schedule(), system, tau, mode=config.system.mode, with_trace=True)
    return ScanRow.from_result(result, witness)


def run_effop(config: RunConfig, alpha: float, phi: float, time: float) -> EffectiveOperator:
    system = system_factory(config)(config.system.epsilon)
    setting = MeasurementSetting(direction=QuasiSpin(alpha=alpha, phi=phi), time=time, mode=config.system.mode)
    return effective_operator(system, setting)


def run_max_violation(config: RunConfig) -> List[ScanRow]:
    """Most violating tau per epsilon, searched over the configured tau grid."""
    witness = config.witness_kind
    factory = system_factory(config)
    rows = []
    for epsilon in config.epsilons():
        result = max_violation(
            witness,
            config.schedule(),
            epsilon,
            config.scan.tau_grid(),
            factory=factory,
            mode=config.system.mode,
        )
        rows.append(ScanRow.from_result(result, witness))
    return rows


def run_lifetimes(config: RunConfig) -> List[LifetimeRow]:
    grid = default_lifetime_grid(_lifetime_window(config))
    factory = system_factory(config)
    rows = []
    for epsilon in config.epsilons():
        lifetime = violation_lifetime(
            config.witness_kind,
            config.schedule(),
            epsilon,
            grid,
            factory=factory,
            mode=config.system.mode,
        )
        rows.append(LifetimeRow(epsilon=epsilon, lifetime_ns=lifetime))
    return rows


def run_ion_compare(config: RunConfig) -> List[LifetimeComparison]:
    schedule = config.schedule()
    if schedule.kind is not WitnessKind.SCG:
        schedule = SCHEDULES["standard-scg"]
    return compare_lifetimes(
        config.epsilons(),
        gamma_S=config.system.gamma_S,
        omega=config.system.omega_value,
        schedule=schedule,
        trotter=config.trotter_config(),
    )
