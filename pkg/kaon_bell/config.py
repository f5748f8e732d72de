"""
Run configuration.

Layers, lowest precedence first: built-in defaults, an INI file, CLI overrides.

    [system]   kind, gamma_S, gamma_L, omega, epsilon, mode
    [witness]  kind, schedule, alice, bob, with_trace
    [scan]     tau_start, tau_stop, tau_steps,
               epsilon_start, epsilon_stop, epsilon_steps, epsilons, workers
    [trotter]  dt, order
    [output]   path, format

Explicit schedules use ``schedule = explicit`` with ``alice``/``bob`` entries
``alpha:phi:scale[:offset]`` separated by ``;`` (time = scale * tau + offset).
"""

import configparser
import logging
from enum import Enum
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from kaon_bell.bell import SCHEDULES, Schedule, ScheduledSetting, WitnessKind
from kaon_bell.effop import EvolutionMode
from kaon_bell.errors import ConfigError
from kaon_bell.ionsim import TrotterConfig
from kaon_bell.kaon import GAMMA_L_DEFAULT, GAMMA_S_DEFAULT, OMEGA_OVER_GAMMA_S, KaonParams, QuasiSpin

logger = logging.getLogger(__name__)

EXPLICIT = "explicit"


class SystemKind(str, Enum):
    KAON = "kaon"
    YB171 = "yb171"
    YB172 = "yb172"


class OutputFormat(str, Enum):
    CSV = "csv"
    PLOTDATA = "plotdata"
    SVG = "svg"


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class SystemSection(_Section):
    kind: SystemKind = SystemKind.KAON
    gamma_S: float = Field(default=GAMMA_S_DEFAULT, gt=0.0)
    gamma_L: float = Field(default=GAMMA_L_DEFAULT, ge=0.0)
    omega: Optional[float] = Field(default=None, gt=0.0)
    epsilon: float = Field(default=0.0, ge=0.0, lt=1.0)
    mode: EvolutionMode = EvolutionMode.LINDBLAD

    @property
    def omega_value(self) -> float:
        return OMEGA_OVER_GAMMA_S * self.gamma_S if self.omega is None else self.omega

    @model_validator(mode="after")
    def _check_system(self):
        if self.kind is SystemKind.KAON and not self.gamma_L < self.gamma_S:
            raise ValueError("gamma_L must be smaller than gamma_S")
        if self.kind is not SystemKind.KAON and self.mode is EvolutionMode.ANALYTIC:
            raise ValueError("ion systems only support mode = lindblad")
        return self


def parse_entries(text: str) -> Tuple[ScheduledSetting, ...]:
    """``alpha:phi:scale[:offset]; ...`` -> scheduled settings."""
    entries = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [p.strip() for p in chunk.split(":")]
        if len(parts) not in (3, 4):
            raise ValueError(f"entry '{chunk}' must be alpha:phi:scale[:offset]")
        alpha, phi, scale = (float(p) for p in parts[:3])
        offset = float(parts[3]) if len(parts) == 4 else 0.0
        entries.append(
            ScheduledSetting(direction=QuasiSpin(alpha=alpha, phi=phi), scale=scale, offset=offset)
        )
    return tuple(entries)


class WitnessSection(_Section):
    kind: Optional[WitnessKind] = None
    schedule: Optional[str] = None
    alice: Optional[str] = None
    bob: Optional[str] = None
    with_trace: bool = False

    @field_validator("schedule")
    @classmethod
    def _known_schedule(cls, value):
        if value is not None and value != EXPLICIT and value not in SCHEDULES:
            raise ValueError(f"unknown schedule '{value}' (known: {', '.join(SCHEDULES)}, {EXPLICIT})")
        return value

    @model_validator(mode="after")
    def _check_explicit(self):
        if self.schedule == EXPLICIT:
            if self.alice is None or self.bob is None:
                raise ValueError("an explicit schedule needs both alice and bob entries")
            alice, bob = parse_entries(self.alice), parse_entries(self.bob)
            Schedule(name=EXPLICIT, alice=alice, bob=bob)
        elif self.alice is not None or self.bob is not None:
            raise ValueError("alice/bob entries require schedule = explicit")
        if self.kind is not None and self.schedule is not None:
            if self.template().kind is not self.kind:
                raise ValueError(f"schedule '{self.schedule}' does not fit a {self.kind.value} witness")
        return self

    @property
    def witness_kind(self) -> WitnessKind:
        if self.kind is not None:
            return self.kind
        return WitnessKind.CHSH if self.schedule is None else self.template().kind

    def template(self) -> Schedule:
        if self.schedule == EXPLICIT:
            return Schedule(name=EXPLICIT, alice=parse_entries(self.alice), bob=parse_entries(self.bob))
        if self.schedule is not None:
            return SCHEDULES[self.schedule]
        default = "standard-scg" if self.kind is WitnessKind.SCG else "standard-chsh"
        return SCHEDULES[default]


def _grid(start: float, stop: float, steps: int, what: str) -> List[float]:
    if steps < 1:
        raise ValueError(f"{what}_steps must be positive")
    if steps == 1:
        if start != stop:
            raise ValueError(f"{what}_steps = 1 requires {what}_start = {what}_stop")
        return [float(start)]
    if not stop > start:
        raise ValueError(f"{what}_stop must exceed {what}_start")
    return [float(x) for x in np.linspace(start, stop, steps)]


class ScanSection(_Section):
    tau_start: float = Field(default=0.0, ge=0.0)
    tau_stop: float = Field(default=2.0, ge=0.0)
    tau_steps: int = 201
    epsilon_start: Optional[float] = Field(default=None, ge=0.0, lt=1.0)
    epsilon_stop: Optional[float] = Field(default=None, ge=0.0, lt=1.0)
    epsilon_steps: Optional[int] = None
    epsilons: Optional[Tuple[float, ...]] = None
    workers: int = Field(default=1, ge=1)

    @field_validator("epsilons", mode="before")
    @classmethod
    def _split(cls, value):
        if isinstance(value, str):
            return tuple(float(v) for v in value.replace(",", " ").split())
        return value

    @field_validator("epsilons")
    @classmethod
    def _check_epsilons(cls, value):
        if value is None:
            return value
        if not value:
            raise ValueError("epsilons must not be empty")
        if any(not 0.0 <= e < 1.0 for e in value):
            raise ValueError("every epsilon must lie in [0, 1)")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("epsilons must be strictly ascending")
        return value

    @model_validator(mode="after")
    def _check_grids(self):
        self.tau_grid()
        given = [v is not None for v in (self.epsilon_start, self.epsilon_stop, self.epsilon_steps)]
        if any(given) and not all(given):
            raise ValueError("epsilon_start, epsilon_stop and epsilon_steps go together")
        if all(given) and self.epsilons is not None:
            raise ValueError("give either an epsilon grid or an epsilons list, not both")
        self.epsilon_grid()
        return self

    def tau_grid(self) -> List[float]:
        return _grid(self.tau_start, self.tau_stop, self.tau_steps, "tau")

    def epsilon_grid(self) -> Optional[List[float]]:
        if self.epsilons is not None:
            return list(self.epsilons)
        if self.epsilon_steps is None:
            return None
        return _grid(self.epsilon_start, self.epsilon_stop, self.epsilon_steps, "epsilon")


class TrotterSection(_Section):
    dt: Optional[float] = Field(default=None, gt=0.0)
    order: int = Field(default=2, ge=1, le=2)


class OutputSection(_Section):
    path: str = "-"
    format: OutputFormat = OutputFormat.CSV


class RunConfig(_Section):
    system: SystemSection = SystemSection()
    witness: WitnessSection = WitnessSection()
    scan: ScanSection = ScanSection()
    trotter: Optional[TrotterSection] = None
    output: OutputSection = OutputSection()

    @model_validator(mode="after")
    def _check_trotter(self):
        if self.trotter is not None and self.system.kind is SystemKind.KAON:
            raise ValueError("[trotter] only applies to ion systems")
        return self

    @property
    def witness_kind(self) -> WitnessKind:
        return self.witness.witness_kind

    def schedule(self) -> Schedule:
        return self.witness.template()

    def kaon_params(self, epsilon: Optional[float] = None) -> KaonParams:
        s = self.system
        gamma_L = s.gamma_L if s.kind is SystemKind.KAON else 0.0
        return KaonParams(
            gamma_S=s.gamma_S,
            gamma_L=gamma_L,
            omega=s.omega_value,
            epsilon=s.epsilon if epsilon is None else epsilon,
        )

    def epsilons(self) -> List[float]:
        return self.scan.epsilon_grid() or [self.system.epsilon]

    def trotter_config(self) -> Optional[TrotterConfig]:
        if self.trotter is None:
            return None
        if self.trotter.dt is None:
            default = TrotterConfig.default_for(self.system.omega_value, self.system.gamma_S)
            return default.model_copy(update={"order": self.trotter.order})
        return TrotterConfig(dt=self.trotter.dt, order=self.trotter.order)


def _diagnostics(error: ValidationError) -> List[Tuple[str, str]]:
    out = []
    for item in error.errors():
        path = ".".join(str(part) for part in item["loc"]) or "<config>"
        out.append((path, item["msg"]))
    return out


def parse_config(text: str = "", overrides: Optional[Mapping[str, Mapping[str, str]]] = None) -> RunConfig:
    """Parse INI text (plus per-section overrides) into a validated RunConfig."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigError([("<config>", str(e).splitlines()[0])]) from e

    raw: Dict[str, Dict[str, str]] = {name: dict(parser[name]) for name in parser.sections()}
    for section, values in (overrides or {}).items():
        raw.setdefault(section, {}).update({k: v for k, v in values.items() if v is not None})

    try:
        config = RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(_diagnostics(e)) from e

    if config.system.omega is None:
        logger.warning(
            f"omega not configured; using {OMEGA_OVER_GAMMA_S} * gamma_S = {config.system.omega_value:.6f} 1/ns "
            f"(standard kaon mass splitting, not fixed by the model)"
        )
    return config


def read_config(path: Optional[str], overrides: Optional[Mapping[str, Mapping[str, str]]] = None) -> RunConfig:
    text = ""
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise ConfigError([("<config>", f"cannot read {path}: {e.strerror}")]) from e
    return parse_config(text, overrides)


def describe(config: RunConfig) -> Dict[str, Dict[str, object]]:
    """The effective configuration as plain values, section by section."""
    data = config.model_dump(mode="json")
    data["system"]["omega"] = config.system.omega_value
    data["witness"]["kind"] = config.witness_kind.value
    data["witness"]["schedule"] = config.schedule().name
    return data
