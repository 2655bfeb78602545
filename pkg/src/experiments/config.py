"""Experiment configuration: one JSON document per run.

Every field has an explicit default so the echoed configuration in the report
describes the run completely.
"""
import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, ValidationError, field_validator

from coeffs.families import FAMILIES
from measures.test_functions import TestFunction, bank_by_name, test_function_bank
from simulate.initial_law import InitialLaw
from simulate.noise import TimeGrid
from utils.errors import ConfigError, UnknownModelError

Kind = Literal["simulate", "picard", "weakcheck", "duality", "rate", "chaos",
               "stratcheck", "assumptions", "coupling"]
KINDS: Tuple[str, ...] = Kind.__args__


class Tolerances(BaseModel):
    """Acceptance thresholds; every statistical rule reads its bound from here."""
    picard_tol: float = 1e-3
    picard_max_iter: int = 20
    contraction_ratio: float = 0.9
    z_threshold: float = 3.0
    exact_tol: float = 1e-12
    shift_oracle_tol: float = 0.05
    weak_ratio_band: Tuple[float, float] = (1.4, 3.0)
    deterministic_gap_factor: float = 5.0
    rate_slope_band: Tuple[float, float] = (-0.65, -0.35)
    coupling_slope_band: Tuple[float, float] = (-1.3, -0.7)
    strat_min_order: float = 0.5
    martingale_pass_fraction: float = 0.99

    @field_validator("weak_ratio_band", "rate_slope_band", "coupling_slope_band")
    @classmethod
    def _ordered(cls, band: Tuple[float, float]) -> Tuple[float, float]:
        if band[0] > band[1]:
            raise ValueError(f"band {band} is not ordered")
        return band


class ExperimentConfig(BaseModel):
    kind: Kind
    model: str = "mean_reversion_to_conditional_mean"
    params: Dict[str, Any] = Field(default_factory=dict)
    d: int = Field(default=1, ge=1)
    d1: Optional[int] = Field(default=None, ge=1)
    n_particles: int = Field(default=1000, ge=1)
    dt: float = 0.01
    horizon: float = 1.0
    mass: float = Field(default=1.0, gt=0)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    n_paths: int = Field(default=1, ge=1)
    n_inner: int = 200
    n_reference: Optional[int] = None
    n_values: List[int] = Field(default_factory=lambda: [64, 128, 256, 512, 1024])
    refinements: int = Field(default=4, ge=2)
    times: List[float] = Field(default_factory=list)
    test_functions: List[str] = Field(default_factory=list)
    initial: InitialLaw = Field(default_factory=InitialLaw)
    integrand: str = "one"
    which: Literal["B", "W"] = "B"
    repetitions: int = Field(default=1, ge=1)
    probes: int = Field(default=64, ge=1)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    output: Optional[str] = None
    threads: Optional[int] = Field(default=None, ge=1)

    @field_validator("n_values")
    @classmethod
    def _positive_sizes(cls, values: List[int]) -> List[int]:
        if any(v < 1 for v in values):
            raise ValueError(f"particle numbers must be positive, got {values}")
        return values

    @property
    def dim_w(self) -> int:
        return self.d if self.d1 is None else self.d1

    def grid(self) -> TimeGrid:
        """Raises InvalidGridError unless horizon / dt is a positive integer."""
        return TimeGrid.from_step(self.horizon, self.dt)

    def report_times(self) -> List[float]:
        return list(self.times) if self.times else [self.horizon]

    def bank(self) -> List[TestFunction]:
        """Configured test functions, default the whole bank."""
        if not self.test_functions:
            return test_function_bank(self.d)
        known = bank_by_name(self.d)
        missing = [name for name in self.test_functions if name not in known]
        if missing:
            raise ConfigError(
                f"unknown test function(s) {missing}; known: {', '.join(known)}")
        return [known[name] for name in self.test_functions]

    def primary_phi(self, default: str = "sin_x1") -> TestFunction:
        names = self.test_functions or [default]
        return self.bank_lookup(names[0])

    def bank_lookup(self, name: str) -> TestFunction:
        known = bank_by_name(self.d)
        if name not in known:
            raise ConfigError(f"unknown test function '{name}'; known: {', '.join(known)}")
        return known[name]

    def check(self) -> TimeGrid:
        """Validate the parts pydantic cannot: grid, model name, initial dimension."""
        grid = self.grid()
        if self.model not in FAMILIES:
            raise UnknownModelError(
                f"unknown model '{self.model}'; known: {', '.join(sorted(FAMILIES))}")
        if self.initial.dim != self.d:
            raise ConfigError(f"initial law has dimension {self.initial.dim}, d = {self.d}")
        for t in self.times:
            grid.index_of(t)
        return grid

    def echo(self) -> dict:
        return self.model_dump(mode="json")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        data = dict(data)
        initial = dict(data.get("initial") or {})
        initial.setdefault("dim", data.get("d", 1))
        data["initial"] = initial
        try:
            return cls(**data)
        except ValidationError as e:
            raise ConfigError(f"invalid configuration: {e}") from e

    @classmethod
    def from_file(cls, path: str, kind: Optional[str] = None) -> "ExperimentConfig":
        """Load a JSON config; ``kind`` from the command line wins over the file."""
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {path} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        if kind is not None:
            data["kind"] = kind
        return cls.from_dict(data)
