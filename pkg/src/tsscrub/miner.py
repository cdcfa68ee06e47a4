"""Constraint mining directly from dirty data.

Temporal bounds come from median +/- k * 1.48 * MAD over the per-variable
transition sample (speed, acceleration, windowed variance), which stays
stable under heavy contamination where mean/std bounds explode. Cross-variable
constraints are degree-<=2 polynomials over correlation-screened variable
sets, bounded by empirical residual quantiles.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from tsscrub import kernels, stats
from tsscrub.core import (
    ConstraintSet,
    CrossConstraint,
    DataError,
    TemporalConstraint,
    TimeSeriesFrame,
)

MIN_SUPPORT = 8  # samples per variable below which mining is skipped


@dataclass(frozen=True)
class MinerConfig:
    k_sigma: float = 3.0
    variance_window: int = 8
    corr_threshold: float = 0.6
    r2_threshold: float = 0.9
    residual_quantile: float = 0.995
    coeff_prune_eps: float = 1e-6
    mad_floor_frac: float = 0.01

    def __post_init__(self):
        if self.k_sigma <= 0:
            raise ValueError("k_sigma must be positive")
        if self.variance_window < 2:
            raise ValueError("variance_window must be >= 2")
        for name in ("corr_threshold", "r2_threshold", "residual_quantile"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ValueError(f"{name}={v} outside (0,1)")
        if self.coeff_prune_eps < 0 or self.mad_floor_frac < 0:
            raise ValueError("eps/floor fractions must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "coeff_prune_eps": self.coeff_prune_eps,
            "corr_threshold": self.corr_threshold,
            "k_sigma": self.k_sigma,
            "mad_floor_frac": self.mad_floor_frac,
            "r2_threshold": self.r2_threshold,
            "residual_quantile": self.residual_quantile,
            "variance_window": self.variance_window,
        }

    @staticmethod
    def from_dict(d: dict) -> "MinerConfig":
        return MinerConfig(**d)


def transition_samples(x: np.ndarray, kind: str, window: int) -> np.ndarray:
    """Finite transition values for one variable; gaps around NaN are skipped."""
    if kind == "Speed":
        g = x[1:] - x[:-1]
    elif kind == "Acceleration":
        g = x[2:] - 2.0 * x[1:-1] + x[:-2]
    elif kind == "Variance":
        g = kernels.trailing_var(x, window)
    else:
        raise ValueError(f"unknown temporal kind {kind!r}")
    return g[~np.isnan(g)]


def mine_temporal(
    frame: TimeSeriesFrame, kind: str, config: MinerConfig = MinerConfig()
) -> list[TemporalConstraint]:
    out = []
    for d in range(frame.n_vars):
        x = frame.column(d)
        g = transition_samples(x, kind, config.variance_window)
        if g.size < MIN_SUPPORT:
            continue
        med, sigma = stats.robust_sigma(g)
        if sigma == 0.0:
            eps = config.mad_floor_frac * stats.value_range(x)
            lo, hi = med - eps, med + eps
        else:
            lo = med - config.k_sigma * sigma
            hi = med + config.k_sigma * sigma
        window = config.variance_window if kind == "Variance" else None
        out.append(TemporalConstraint(kind, d, lo, hi, window))
    return out


def _poly_features(rows: np.ndarray) -> tuple[np.ndarray, list[tuple[int, ...]]]:
    """Design matrix and exponent tuples for all monomials of degree <= 2."""
    n, p = rows.shape
    cols = [np.ones(n)]
    exps: list[tuple[int, ...]] = [tuple([0] * p)]
    for j in range(p):
        cols.append(rows[:, j])
        e = [0] * p
        e[j] = 1
        exps.append(tuple(e))
    for j in range(p):
        for k in range(j, p):
            cols.append(rows[:, j] * rows[:, k])
            e = [0] * p
            e[j] += 1
            e[k] += 1
            exps.append(tuple(e))
    return np.column_stack(cols), exps


def _fit_candidate(frame, target, preds, config):
    cols = (target,) + tuple(preds)
    sub = frame.values[:, cols]
    ok = ~np.isnan(sub).any(axis=1)
    n_ok = int(ok.sum())
    X_raw = sub[ok][:, 1:]
    y = sub[ok][:, 0]
    design, exps = _poly_features(X_raw)
    if n_ok < max(MIN_SUPPORT, design.shape[1] + 2):
        return None
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot == 0.0:
        return None
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = design @ coef - y
    r2 = 1.0 - float((resid**2).sum()) / ss_tot
    if r2 < config.r2_threshold:
        return None
    variables = tuple(sorted(cols))
    pos = {v: i for i, v in enumerate(variables)}
    terms = []
    for e, c in zip(exps, coef):
        full = [0] * len(variables)
        for j, v in enumerate(preds):
            full[pos[v]] = e[j]
        terms.append((tuple(full), float(c)))
    t_exp = [0] * len(variables)
    t_exp[pos[target]] = 1
    terms.append((tuple(t_exp), -1.0))
    terms = _prune_terms(terms, config.coeff_prune_eps)
    # bounds come from the shipped polynomial's own evaluation path so the
    # boundary rows land exactly on f_min/f_max when rechecked
    shipped = CrossConstraint(variables, terms, -np.inf, np.inf, r2)
    f_vals = shipped.evaluate(frame.values[np.ix_(ok, variables)])
    q = config.residual_quantile
    f_min = float(np.quantile(f_vals, 1.0 - q))
    f_max = float(np.quantile(f_vals, q))
    return variables, terms, f_min, f_max, r2


def _prune_terms(terms, eps):
    max_c = max(abs(c) for _, c in terms)
    kept = [(e, c) for e, c in terms if abs(c) >= eps * max_c]
    return tuple(kept)


def mine_cross(
    frame: TimeSeriesFrame, config: MinerConfig = MinerConfig()
) -> list[CrossConstraint]:
    """Correlation-screened polynomial constraints, strongest fits first."""
    D = frame.n_vars
    if D < 2:
        return []
    corr = np.zeros((D, D))
    for i in range(D):
        for j in range(i + 1, D):
            corr[i, j] = corr[j, i] = abs(
                stats.nan_pearson(frame.column(i), frame.column(j))
            )
    variances = np.array(
        [np.var(stats.finite(frame.column(d))) if stats.finite(frame.column(d)).size else 0.0 for d in range(D)]
    )
    candidates = []
    for size in (2, 3):
        for combo in combinations(range(D), size):
            # the member with the most signal to explain becomes the target
            target = max(combo, key=lambda v: (variances[v], v))
            preds = tuple(v for v in combo if v != target)
            if all(corr[target, p] >= config.corr_threshold for p in preds):
                candidates.append((target, preds))
    fits = []
    for target, preds in candidates:
        fit = _fit_candidate(frame, target, preds, config)
        if fit is not None:
            fits.append(fit)
    fits.sort(key=lambda f: (-f[4], f[0]))
    accepted: list[CrossConstraint] = []
    taken: list[set] = []
    for variables, terms, f_min, f_max, r2 in fits:
        vs = set(variables)
        if any(vs <= t for t in taken):
            continue
        accepted.append(CrossConstraint(variables, terms, f_min, f_max, r2))
        taken.append(vs)
        if len(accepted) >= D:
            break
    return accepted


def mine_all(frame: TimeSeriesFrame, config: MinerConfig = MinerConfig()) -> ConstraintSet:
    temporal = []
    for kind in ("Speed", "Acceleration", "Variance"):
        temporal.extend(mine_temporal(frame, kind, config))
    return ConstraintSet(
        tuple(temporal), tuple(mine_cross(frame, config)), frame.variable_names
    )


def check_violations(
    frame: TimeSeriesFrame, constraints: ConstraintSet
) -> tuple[np.ndarray, list[int]]:
    """Violation mask (marks the later cell of a bad transition, the window's
    last cell for variance, and every participating cell for cross rules)
    plus the violating-event count per constraint."""
    if constraints.variable_names and constraints.variable_names != frame.variable_names:
        raise DataError(
            "constraint schema mismatch: "
            f"{constraints.variable_names} vs {frame.variable_names}"
        )
    T, D = frame.values.shape
    mask = np.zeros((T, D), dtype=bool)
    counts: list[int] = []
    for c in constraints.temporal:
        if c.variable >= D:
            raise DataError(f"constraint variable {c.variable} outside schema")
        x = frame.column(c.variable)
        if c.kind == "Speed":
            g = x[1:] - x[:-1]
            bad = np.nonzero(~np.isnan(g) & ((g < c.g_min) | (g > c.g_max)))[0] + 1
        elif c.kind == "Acceleration":
            g = x[2:] - 2.0 * x[1:-1] + x[:-2]
            bad = np.nonzero(~np.isnan(g) & ((g < c.g_min) | (g > c.g_max)))[0] + 2
        else:
            g = kernels.trailing_var(x, c.window)
            bad = np.nonzero(~np.isnan(g) & ((g < c.g_min) | (g > c.g_max)))[0]
        mask[bad, c.variable] = True
        counts.append(int(bad.size))
    for c in constraints.cross:
        if max(c.variables) >= D:
            raise DataError(f"constraint variables {c.variables} outside schema")
        sub = frame.values[:, c.variables]
        ok = ~np.isnan(sub).any(axis=1)
        f = c.evaluate(sub[ok])
        bad_rows = np.nonzero(ok)[0][(f < c.f_min) | (f > c.f_max)]
        for d in c.variables:
            mask[bad_rows, d] = True
        counts.append(int(bad_rows.size))
    return mask, counts
