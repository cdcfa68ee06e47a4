"""Canonical data types shared by every module.

Frames carry a T x D float64 matrix plus an explicit missing mask; NaN is
stored under masked cells only so that accidental unmasked math fails loudly
instead of silently. All types are immutable after construction and safe to
share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

CATEGORIES = ("M", "O", "C")
HIGH_ACTIONS = ("M", "O", "C", "F")
TEMPORAL_KINDS = ("Speed", "Acceleration", "Variance")
TASKS = ("Forecast", "Classify", "Cluster")


class DataError(ValueError):
    """Invalid data or file content (CLI exit code 2)."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TimeSeriesFrame:
    """Regular multivariate series: integer grid ticks, values, missing mask."""

    timestamps: np.ndarray
    values: np.ndarray
    variable_names: tuple[str, ...]
    regularized: bool = True
    source_timestamps: tuple | None = None

    def __post_init__(self):
        ts = _frozen(np.asarray(self.timestamps, dtype=np.int64))
        vals = _frozen(np.asarray(self.values, dtype=np.float64))
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "variable_names", tuple(self.variable_names))

    @property
    def n_rows(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_vars(self) -> int:
        return int(self.values.shape[1])

    @property
    def missing_mask(self) -> np.ndarray:
        return np.isnan(self.values)

    def with_values(self, values: np.ndarray) -> "TimeSeriesFrame":
        return replace(self, values=np.asarray(values, dtype=np.float64))

    def column(self, d: int) -> np.ndarray:
        return self.values[:, d]

    def equals(self, other: "TimeSeriesFrame") -> bool:
        return (
            self.variable_names == other.variable_names
            and np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.values, other.values, equal_nan=True)
        )


def validate_frame(frame: TimeSeriesFrame) -> list[str]:
    """Return a list of invariant violations; empty means OK."""
    problems: list[str] = []
    ts, vals = frame.timestamps, frame.values
    if vals.ndim != 2:
        return [f"values must be 2-D, got ndim={vals.ndim}"]
    T, D = vals.shape
    if T < 2:
        problems.append(f"at least 2 rows required, got T={T}")
    if D < 1:
        problems.append(f"at least 1 variable required, got D={D}")
    if len(ts) != T:
        problems.append(f"timestamps length {len(ts)} != row count {T}")
    if len(frame.variable_names) != D:
        problems.append(
            f"variable_names length {len(frame.variable_names)} != column count {D}"
        )
    if len(ts) > 1:
        diffs = np.diff(ts)
        if frame.regularized:
            bad = np.nonzero(diffs <= 0)[0]
            for i in bad[:5]:
                problems.append(f"non-strict timestamps at rows {i},{i + 1}")
        else:
            bad = np.nonzero(diffs < 0)[0]
            for i in bad[:5]:
                problems.append(f"decreasing timestamps at rows {i},{i + 1}")
    finite_or_nan = np.isfinite(vals) | np.isnan(vals)
    if not finite_or_nan.all():
        for t, d in zip(*np.nonzero(~finite_or_nan)):
            problems.append(f"non-finite cell at ({t},{d})")
            if len(problems) > 20:
                break
    return problems


def cell_count(frame: TimeSeriesFrame) -> int:
    """Total number of cells, the denominator of every quality rate."""
    return frame.n_rows * frame.n_vars


@dataclass(frozen=True)
class QualityRates:
    r_missing: float
    r_outlier: float
    r_violation: float

    def __post_init__(self):
        for name in ("r_missing", "r_outlier", "r_violation"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name}={v} outside [0,1]")

    def total(self) -> float:
        return self.r_missing + self.r_outlier + self.r_violation

    def to_dict(self) -> dict:
        return {
            "r_missing": self.r_missing,
            "r_outlier": self.r_outlier,
            "r_violation": self.r_violation,
        }

    @staticmethod
    def from_dict(d: dict) -> "QualityRates":
        return QualityRates(d["r_missing"], d["r_outlier"], d["r_violation"])

    @staticmethod
    def from_masks(missing, outlier, violation) -> "QualityRates":
        n = missing.size
        return QualityRates(
            int(missing.sum()) / n,
            int(outlier.sum()) / n,
            int(violation.sum()) / n,
        )


@dataclass(frozen=True)
class TemporalConstraint:
    """Bound on a per-variable transition statistic between grid ticks."""

    kind: str
    variable: int
    g_min: float
    g_max: float
    window: int | None = None

    def __post_init__(self):
        if self.kind not in TEMPORAL_KINDS:
            raise ValueError(f"unknown temporal kind {self.kind!r}")
        if self.g_min > self.g_max:
            raise ValueError("g_min > g_max")
        if self.kind == "Variance" and (self.window is None or self.window < 2):
            raise ValueError("Variance constraints need window >= 2")

    def to_dict(self) -> dict:
        d = {
            "g_max": self.g_max,
            "g_min": self.g_min,
            "kind": self.kind,
            "variable": self.variable,
        }
        if self.window is not None:
            d["window"] = self.window
        return d

    @staticmethod
    def from_dict(d: dict) -> "TemporalConstraint":
        return TemporalConstraint(
            d["kind"], d["variable"], d["g_min"], d["g_max"], d.get("window")
        )


@dataclass(frozen=True)
class CrossConstraint:
    """Bounded polynomial relation over a variable subset at one timestamp.

    terms: ((exponents aligned with variables, coefficient), ...); the fitted
    target appears with coefficient -1 so f(x) is the fit residual.
    """

    variables: tuple[int, ...]
    terms: tuple[tuple[tuple[int, ...], float], ...]
    f_min: float
    f_max: float
    fit_r2: float

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(int(v) for v in self.variables))
        object.__setattr__(
            self,
            "terms",
            tuple((tuple(int(e) for e in exps), float(c)) for exps, c in self.terms),
        )
        if len(self.variables) < 2:
            raise ValueError("cross constraints need at least 2 variables")
        if self.f_min > self.f_max:
            raise ValueError("f_min > f_max")
        for exps, _ in self.terms:
            if len(exps) != len(self.variables):
                raise ValueError("term exponent arity != variable count")
            if sum(exps) > 2:
                raise ValueError("monomial degree above 2")

    def evaluate(self, rows: np.ndarray) -> np.ndarray:
        """Evaluate f on rows shaped (n, |variables|)."""
        out = np.zeros(rows.shape[0])
        for exps, coeff in self.terms:
            term = np.full(rows.shape[0], coeff)
            for j, e in enumerate(exps):
                if e:
                    term = term * rows[:, j] ** e
            out += term
        return out

    def coefficient(self, exponents: Sequence[int]) -> float | None:
        key = tuple(exponents)
        for exps, coeff in self.terms:
            if exps == key:
                return coeff
        return None

    def to_dict(self) -> dict:
        return {
            "f_max": self.f_max,
            "f_min": self.f_min,
            "fit_r2": self.fit_r2,
            "terms": [{"coeff": c, "exponents": list(e)} for e, c in self.terms],
            "variables": list(self.variables),
        }

    @staticmethod
    def from_dict(d: dict) -> "CrossConstraint":
        return CrossConstraint(
            tuple(d["variables"]),
            tuple((tuple(t["exponents"]), t["coeff"]) for t in d["terms"]),
            d["f_min"],
            d["f_max"],
            d["fit_r2"],
        )


@dataclass(frozen=True)
class ConstraintSet:
    temporal: tuple[TemporalConstraint, ...]
    cross: tuple[CrossConstraint, ...]
    variable_names: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "temporal", tuple(self.temporal))
        object.__setattr__(self, "cross", tuple(self.cross))
        object.__setattr__(self, "variable_names", tuple(self.variable_names))
        seen = set()
        for c in self.temporal:
            key = (c.kind, c.variable)
            if key in seen:
                raise ValueError(f"duplicate temporal constraint for {key}")
            seen.add(key)

    def to_dict(self) -> dict:
        return {
            "cross": [c.to_dict() for c in self.cross],
            "temporal": [c.to_dict() for c in self.temporal],
            "variable_names": list(self.variable_names),
            "version": 1,
        }

    @staticmethod
    def from_dict(d: dict) -> "ConstraintSet":
        return ConstraintSet(
            tuple(TemporalConstraint.from_dict(c) for c in d["temporal"]),
            tuple(CrossConstraint.from_dict(c) for c in d["cross"]),
            tuple(d.get("variable_names", ())),
        )


@dataclass(frozen=True)
class OperatorDescriptor:
    id: str
    category: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown category {self.category!r}")

    def to_dict(self) -> dict:
        return {"category": self.category, "id": self.id, "params": dict(self.params)}

    @staticmethod
    def from_dict(d: dict) -> "OperatorDescriptor":
        return OperatorDescriptor(d["id"], d["category"], dict(d.get("params", {})))


@dataclass(frozen=True)
class StepProvenance:
    pre_rates: QualityRates
    post_rates: QualityRates
    reward: dict

    def to_dict(self) -> dict:
        return {
            "post_rates": self.post_rates.to_dict(),
            "pre_rates": self.pre_rates.to_dict(),
            "reward": dict(self.reward),
        }

    @staticmethod
    def from_dict(d: dict) -> "StepProvenance":
        return StepProvenance(
            QualityRates.from_dict(d["pre_rates"]),
            QualityRates.from_dict(d["post_rates"]),
            dict(d["reward"]),
        )


@dataclass(frozen=True)
class CleaningPipeline:
    """Ordered operator sequence; first element is applied first."""

    steps: tuple[OperatorDescriptor, ...]
    provenance: tuple[StepProvenance, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        object.__setattr__(self, "provenance", tuple(self.provenance))
        if self.provenance and len(self.provenance) != len(self.steps):
            raise ValueError("provenance length != steps length")

    def __len__(self) -> int:
        return len(self.steps)

    def to_dict(self) -> dict:
        steps = []
        for i, op in enumerate(self.steps):
            entry = op.to_dict()
            if self.provenance:
                entry.update(self.provenance[i].to_dict())
            steps.append(entry)
        return {"steps": steps, "version": 1}

    @staticmethod
    def from_dict(d: dict) -> "CleaningPipeline":
        ops = tuple(OperatorDescriptor.from_dict(s) for s in d["steps"])
        prov = ()
        if d["steps"] and "pre_rates" in d["steps"][0]:
            prov = tuple(StepProvenance.from_dict(s) for s in d["steps"])
        return CleaningPipeline(ops, prov)


@dataclass(frozen=True)
class EvaluationReport:
    f1: float | None
    nmse: float | None
    rra: float | None
    perf_dirty: float
    perf_clean: float
    delta_perf: float
    task: str

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        for name in ("f1", "rra", "perf_dirty", "perf_clean"):
            v = getattr(self, name)
            if v is not None and not (-1e-9 <= v <= 1.0 + 1e-9):
                raise ValueError(f"{name}={v} outside [0,1]")
        if self.nmse is not None and self.nmse < 0:
            raise ValueError("nmse must be >= 0")

    def to_dict(self) -> dict:
        return {
            "delta_perf": self.delta_perf,
            "f1": self.f1,
            "nmse": self.nmse,
            "perf_clean": self.perf_clean,
            "perf_dirty": self.perf_dirty,
            "rra": self.rra,
            "task": self.task,
        }

    @staticmethod
    def from_dict(d: dict) -> "EvaluationReport":
        return EvaluationReport(
            d["f1"],
            d["nmse"],
            d["rra"],
            d["perf_dirty"],
            d["perf_clean"],
            d["delta_perf"],
            d["task"],
        )
