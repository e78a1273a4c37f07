"""Declarative scenario parameters and the run record every driver returns."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from ..errors import SchemaError, ValidationError

CONFIG_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Param:
    """One configurable value with its default and admissible range."""

    name: str
    default: Any
    doc: str = ""
    lo: float | None = None
    hi: float | None = None
    lo_open: bool = False
    choices: tuple | None = None
    unit: str = ""

    def coerce(self, value):
        d = self.default
        if isinstance(d, bool):
            if not isinstance(value, bool):
                raise ValidationError(f"{self.name}: expected true/false, got {value!r}")
            return value
        if isinstance(d, int):
            if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
                raise ValidationError(f"{self.name}: expected an integer, got {value!r}")
            value = int(value)
        elif isinstance(d, float):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValidationError(f"{self.name}: expected a number, got {value!r}")
            value = float(value)
            if not math.isfinite(value):
                raise ValidationError(f"{self.name}: must be finite")
        elif isinstance(d, str):
            if not isinstance(value, str):
                raise ValidationError(f"{self.name}: expected a string, got {value!r}")
        elif isinstance(d, (list, tuple)):
            if not isinstance(value, (list, tuple)) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
            ):
                raise ValidationError(f"{self.name}: expected a list of numbers")
            value = [float(v) for v in value]
            for v in value:
                self._check_range(v)
            return value
        if self.choices is not None and value not in self.choices:
            raise ValidationError(f"{self.name}: {value!r} not one of {list(self.choices)}")
        if isinstance(value, (int, float)):
            self._check_range(value)
        return value

    def _check_range(self, v):
        if self.lo is not None:
            if self.lo_open and not v > self.lo:
                raise ValidationError(f"{self.name} = {v!r} violates lower bound {self.name} > {self.lo!r}")
            if not self.lo_open and not v >= self.lo:
                raise ValidationError(f"{self.name} = {v!r} violates lower bound {self.name} >= {self.lo!r}")
        if self.hi is not None and not v <= self.hi:
            raise ValidationError(f"{self.name} = {v!r} violates upper bound {self.name} <= {self.hi!r}")


def positive(name, default, doc="", unit="", hi=None):
    return Param(name, default, doc, lo=0.0, lo_open=True, unit=unit, hi=hi)


def count(name, default, doc="", lo=1, hi=None):
    return Param(name, default, doc, lo=lo, hi=hi)


COMMON = (
    count("seed", 0, "run seed for all random streams", lo=0),
)


@dataclass(frozen=True)
class ScenarioSpec:
    id: str
    summary: str
    params: tuple
    runner: Callable

    def param_map(self):
        return {p.name: p for p in COMMON + self.params}

    def defaults(self):
        return {name: p.default for name, p in self.param_map().items()}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    values: dict

    @property
    def seed(self) -> int:
        return int(self.values["seed"])

    def __getitem__(self, key):
        return self.values[key]

    def replace(self, **changes) -> "ScenarioConfig":
        return resolve(self.scenario, {**self.values, **changes})


REGISTRY: dict[str, ScenarioSpec] = {}


def register(spec: ScenarioSpec):
    REGISTRY[spec.id] = spec
    return spec


def resolve(scenario: str, overrides: dict | None = None) -> ScenarioConfig:
    """Fill defaults, reject unknown keys and check every bound."""
    if scenario not in REGISTRY:
        raise SchemaError(f"unknown scenario {scenario!r}; known: {sorted(REGISTRY)}")
    pmap = REGISTRY[scenario].param_map()
    values = {}
    overrides = dict(overrides or {})
    unknown = sorted(set(overrides) - set(pmap))
    if unknown:
        raise SchemaError(f"unknown key(s) for {scenario}: {', '.join(unknown)}")
    for name, p in pmap.items():
        values[name] = p.coerce(overrides[name]) if name in overrides else p.default
    return ScenarioConfig(scenario, values)


@dataclass
class DensityFrame:
    """Density on a 1D or 2D grid with its axis coordinates (SI)."""

    label: str
    time: float
    axes: list
    density: np.ndarray


@dataclass
class RunRecord:
    """Everything a scenario run produced.

    ``stats`` holds scalar results; ``uncertainty`` holds the one-sigma
    estimator error for each sampled statistic under the same key.
    """

    config: ScenarioConfig
    stats: dict = field(default_factory=dict)
    uncertainty: dict = field(default_factory=dict)
    frames: list = field(default_factory=list)
    spacetime: DensityFrame | None = None
    trajectories: list = field(default_factory=list)
    series: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def stat(self, key, value, sigma=None):
        self.stats[key] = value
        if sigma is not None:
            self.uncertainty[key] = float(sigma)
