from typing import Any, Dict, List, Optional, Sequence

from pydantic import BaseModel, Field, model_validator

EXIT_PASS = 0
EXIT_STATISTICAL_FAIL = 1
EXIT_ERROR = 2


class Statistic(BaseModel):
    """A reported number with its error bar, or tagged exact."""
    name: str
    value: float
    error: Optional[float] = None
    exact: bool = False

    @model_validator(mode="after")
    def _has_error_bar(self) -> "Statistic":
        if self.error is None and not self.exact:
            raise ValueError(f"statistic '{self.name}' needs an error bar or the exact tag")
        return self


class Check(BaseModel):
    """Outcome of one acceptance rule."""
    name: str
    passed: bool
    detail: str = ""


class Table(BaseModel):
    name: str
    columns: List[str]
    rows: List[List[Any]]


class PipelineResult(BaseModel):
    """What a pipeline hands back to the runner."""
    statistics: List[Statistic] = Field(default_factory=list)
    checks: List[Check] = Field(default_factory=list)
    tables: List[Table] = Field(default_factory=list)
    particle_steps: int = 0

    def stat(self, name: str, value: float, error: Optional[float] = None,
             exact: bool = False) -> None:
        self.statistics.append(Statistic(name=name, value=float(value),
                                         error=None if error is None else float(error),
                                         exact=exact))

    def check(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append(Check(name=name, passed=bool(passed), detail=detail))

    def table(self, name: str, columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
        self.tables.append(Table(name=name, columns=list(columns),
                                 rows=[list(row) for row in rows]))


class RunReport(BaseModel):
    kind: str
    run_id: str
    config: Dict[str, Any]
    statistics: List[Statistic] = Field(default_factory=list)
    checks: List[Check] = Field(default_factory=list)
    tables: List[str] = Field(default_factory=list)
    particle_steps: int = 0
    wall_clock_seconds: float = 0.0
    throughput: float = 0.0
    error_code: Optional[str] = None
    error_message: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.error_code is None and all(check.passed for check in self.checks)

    @property
    def exit_status(self) -> int:
        if self.error_code is not None:
            return EXIT_ERROR
        return EXIT_PASS if self.passed else EXIT_STATISTICAL_FAIL

    def to_dict(self, include_timing: bool = True) -> dict:
        data = self.model_dump()
        data["passed"] = self.passed
        data["exit_status"] = self.exit_status
        if not include_timing:
            data.pop("wall_clock_seconds")
            data.pop("throughput")
        return data

    @classmethod
    def from_result(cls, kind: str, run_id: str, config: Dict[str, Any],
                    result: PipelineResult, elapsed: float,
                    tables: Sequence[str]) -> "RunReport":
        return cls(kind=kind, run_id=run_id, config=config,
                   statistics=result.statistics, checks=result.checks,
                   tables=list(tables), particle_steps=result.particle_steps,
                   wall_clock_seconds=elapsed,
                   throughput=result.particle_steps / elapsed if elapsed > 0 else 0.0)
