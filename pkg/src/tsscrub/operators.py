"""The extensible cleaning-operator library, grouped into the M/O/C
sub-libraries with 48 default instantiations.

Every operator is pure: it returns a candidate value matrix and the registry
enforces category masking mechanically, so an imputer can only fill missing
cells, an outlier corrector can only touch outlier-flagged cells, and a
violation repairer can only touch violation-flagged cells. Inapplicable
operators degrade to the identity with a warning instead of raising.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from tsscrub import kernels, stats
from tsscrub.core import CATEGORIES, ConstraintSet, OperatorDescriptor, TimeSeriesFrame


@dataclass(frozen=True)
class OperatorContext:
    constraints: ConstraintSet
    outlier_mask: np.ndarray
    violation_mask: np.ndarray


@dataclass(frozen=True)
class ApplyResult:
    frame: TimeSeriesFrame
    cells_changed: int
    warning: str | None = None


CandidateFn = Callable[[TimeSeriesFrame, OperatorContext], np.ndarray]


class OperatorRegistry:
    """id -> (descriptor, candidate function); append-only within a category."""

    def __init__(self):
        self._fns: dict[str, CandidateFn] = {}
        self._descriptors: dict[str, OperatorDescriptor] = {}
        self._order: dict[str, list[str]] = {c: [] for c in CATEGORIES}

    def register(self, descriptor: OperatorDescriptor, fn: CandidateFn) -> None:
        if descriptor.id in self._fns:
            raise ValueError(f"duplicate operator id {descriptor.id!r}")
        self._fns[descriptor.id] = fn
        self._descriptors[descriptor.id] = descriptor
        self._order[descriptor.category].append(descriptor.id)

    def list(self, category: str) -> list[OperatorDescriptor]:
        return [self._descriptors[i] for i in self._order[category]]

    def ids(self, category: str) -> list[str]:
        return list(self._order[category])

    def get(self, op_id: str) -> OperatorDescriptor:
        if op_id not in self._descriptors:
            raise KeyError(f"unknown operator id {op_id!r}")
        return self._descriptors[op_id]

    def __contains__(self, op_id: str) -> bool:
        return op_id in self._descriptors

    def __len__(self) -> int:
        return len(self._fns)

    def max_category_size(self) -> int:
        return max(len(v) for v in self._order.values())

    def subset(self, ids: list[str]) -> "OperatorRegistry":
        sub = OperatorRegistry()
        for op_id in ids:
            sub.register(self._descriptors[op_id], self._fns[op_id])
        return sub

    def apply(
        self, op: OperatorDescriptor | str, frame: TimeSeriesFrame, context: OperatorContext
    ) -> ApplyResult:
        op_id = op if isinstance(op, str) else op.id
        descriptor = self.get(op_id)
        old = frame.values
        warning = None
        try:
            candidate = self._fns[op_id](frame, context)
        except _Inapplicable as exc:
            return ApplyResult(frame, 0, str(exc))
        candidate = np.asarray(candidate, dtype=np.float64)
        usable = np.isfinite(candidate)
        if descriptor.category == "M":
            permitted = np.isnan(old)
        elif descriptor.category == "O":
            permitted = context.outlier_mask & ~np.isnan(old)
        else:
            permitted = context.violation_mask & ~np.isnan(old)
        write = permitted & usable
        new = old.copy()
        new[write] = candidate[write]
        if descriptor.category == "M":
            changed = int(write.sum())
        else:
            changed = int((new[write] != old[write]).sum())
        if changed == 0:
            return ApplyResult(frame, 0, warning)
        return ApplyResult(frame.with_values(new), changed, warning)


class _Inapplicable(Exception):
    """Operator cannot run on this input; apply degrades to the identity."""


# ---------------------------------------------------------------- helpers


def _per_column(fn):
    def wrapped(frame: TimeSeriesFrame, context: OperatorContext) -> np.ndarray:
        out = np.empty_like(frame.values)
        for d in range(frame.n_vars):
            out[:, d] = fn(frame.column(d), d, frame, context)
        return out

    return wrapped


def _ffill(x: np.ndarray) -> np.ndarray:
    ok = ~np.isnan(x)
    idx = np.where(ok, np.arange(x.size), -1)
    idx = np.maximum.accumulate(idx)
    out = np.where(idx >= 0, x[np.maximum(idx, 0)], np.nan)
    return out


def _interp_interior(x: np.ndarray) -> np.ndarray:
    """Linear interpolation strictly between the first and last anchors."""
    ok = ~np.isnan(x)
    if ok.sum() < 2:
        raise _Inapplicable("fewer than 2 anchors for interpolation")
    t = np.arange(x.size, dtype=np.float64)
    anchors = np.nonzero(ok)[0]
    out = np.full(x.size, np.nan)
    inner = slice(anchors[0], anchors[-1] + 1)
    out[inner] = np.interp(t[inner], t[ok], x[ok])
    return out


def _spline_interior(x: np.ndarray) -> np.ndarray:
    ok = ~np.isnan(x)
    anchors = np.nonzero(ok)[0]
    if anchors.size < 4:
        raise _Inapplicable("fewer than 4 anchors for spline")
    cs = CubicSpline(anchors, x[ok])
    out = np.full(x.size, np.nan)
    inner = np.arange(anchors[0], anchors[-1] + 1)
    out[inner] = cs(inner)
    return out


def _ewma_states(x: np.ndarray, alpha: float) -> np.ndarray:
    """Running EWMA of present values, carried forward across gaps."""
    out = np.full(x.size, np.nan)
    state = np.nan
    for t in range(x.size):
        v = x[t]
        if not np.isnan(v):
            state = v if np.isnan(state) else alpha * v + (1.0 - alpha) * state
        out[t] = state
    return out


def _column_seed(x: np.ndarray, d: int, tag: str) -> int:
    payload = np.nan_to_num(x, nan=-1.2345e300).tobytes()
    return zlib.crc32(payload + tag.encode() + bytes([d % 256]))


def _neighbor_indices(ok: np.ndarray):
    """Index of the previous and next True position for every element."""
    n = ok.size
    idx = np.arange(n)
    prev = np.where(ok, idx, -1)
    prev = np.maximum.accumulate(prev)
    nxt = np.where(ok, idx, n)
    nxt = np.minimum.accumulate(nxt[::-1])[::-1]
    return prev, nxt


def _masked(x: np.ndarray, hide: np.ndarray) -> np.ndarray:
    out = x.copy()
    out[hide] = np.nan
    return out


def _runs(mask: np.ndarray):
    """(start, stop) pairs of contiguous True runs."""
    idx = np.nonzero(mask)[0]
    if idx.size == 0:
        return []
    breaks = np.nonzero(np.diff(idx) > 1)[0]
    starts = np.concatenate([[idx[0]], idx[breaks + 1]])
    stops = np.concatenate([idx[breaks] + 1, [idx[-1] + 1]])
    return list(zip(starts, stops))


def _speed_bounds(constraints: ConstraintSet, d: int):
    for c in constraints.temporal:
        if c.kind == "Speed" and c.variable == d:
            return c.g_min, c.g_max
    return None


def _accel_bounds(constraints: ConstraintSet, d: int):
    for c in constraints.temporal:
        if c.kind == "Acceleration" and c.variable == d:
            return c.g_min, c.g_max
    return None


def cross_target_variable(constraint) -> int | None:
    """The fitted target: appears only in its own linear term with coeff -1."""
    for j, v in enumerate(constraint.variables):
        own = [(e, c) for e, c in constraint.terms if e[j] > 0]
        if len(own) == 1 and sum(own[0][0]) == 1 and own[0][1] == -1.0:
            return v
    return None


# ---------------------------------------------------------------- M: imputers


def _m_ffill(x, d, frame, ctx):
    return _ffill(x)


def _m_bfill(x, d, frame, ctx):
    return _ffill(x[::-1])[::-1]


def _m_mean(x, d, frame, ctx):
    v = stats.finite(x)
    if v.size == 0:
        raise _Inapplicable("column entirely missing")
    return np.full(x.size, v.mean())


def _m_median(x, d, frame, ctx):
    v = stats.finite(x)
    if v.size == 0:
        raise _Inapplicable("column entirely missing")
    return np.full(x.size, np.median(v))


def _m_linear(x, d, frame, ctx):
    return _interp_interior(x)


def _m_spline(x, d, frame, ctx):
    return _spline_interior(x)


def _m_movavg(window):
    def fn(x, d, frame, ctx):
        mean, _ = kernels.rolling_mean_std(x, window)
        return mean

    return fn


def _m_seasonal(half: bool):
    def fn(x, d, frame, ctx):
        period = stats.dominant_period(x)
        if period is None:
            raise _Inapplicable("no dominant period detected")
        if half:
            period = max(2, period // 2)
        T = x.size
        acc = np.zeros(T)
        cnt = np.zeros(T)
        for k in (1, 2, 3):
            for sign in (-1, 1):
                shift = sign * k * period
                lo, hi = max(0, -shift), min(T, T - shift)
                seg = x[lo + shift : hi + shift]
                good = ~np.isnan(seg)
                acc[lo:hi][good] += seg[good]
                cnt[lo:hi][good] += 1
        with np.errstate(invalid="ignore"):
            return np.where(cnt > 0, acc / np.maximum(cnt, 1), np.nan)

    return fn


def _m_knn(k):
    def fn(frame: TimeSeriesFrame, ctx: OperatorContext) -> np.ndarray:
        D = frame.n_vars
        if D < 2:
            raise _Inapplicable("KNN imputer needs at least 2 variables")
        vals = frame.values
        out = np.full_like(vals, np.nan)
        cors = np.zeros((D, D))
        for i in range(D):
            for j in range(D):
                if i != j:
                    cors[i, j] = stats.nan_pearson(vals[:, i], vals[:, j])
        for d in range(D):
            order = sorted(
                (e for e in range(D) if e != d),
                key=lambda e: (-abs(cors[d, e]), e),
            )[:k]
            v_d = stats.finite(vals[:, d])
            if v_d.size < 2:
                continue
            mu_d, sd_d = v_d.mean(), v_d.std()
            est = np.zeros(frame.n_rows)
            wsum = np.zeros(frame.n_rows)
            for e in order:
                w = abs(cors[d, e])
                if w == 0.0:
                    continue
                v_e = stats.finite(vals[:, e])
                if v_e.size < 2 or v_e.std() == 0.0:
                    continue
                z = (vals[:, e] - v_e.mean()) / v_e.std()
                pred = mu_d + np.sign(cors[d, e]) * sd_d * z
                good = ~np.isnan(pred)
                est[good] += w * pred[good]
                wsum[good] += w
            with np.errstate(invalid="ignore"):
                out[:, d] = np.where(wsum > 0, est / np.maximum(wsum, 1e-300), np.nan)
        return out

    return fn


def _m_ewma(alpha):
    def fn(x, d, frame, ctx):
        return _ewma_states(x, alpha)

    return fn


def _m_hybrid(x, d, frame, ctx):
    ok = ~np.isnan(x)
    if ok.sum() == 0:
        raise _Inapplicable("column entirely missing")
    if ok.sum() >= 2:
        out = _interp_interior(x)
    else:
        out = x.copy()
    out = np.where(np.isnan(out), _ffill(x), out)
    out = np.where(np.isnan(out), _ffill(x[::-1])[::-1], out)
    return out


def _m_medwindow(window):
    def fn(x, d, frame, ctx):
        return kernels.rolling_median(x, window)

    return fn


def _m_random_mad(x, d, frame, ctx):
    v = stats.finite(x)
    if v.size < 2:
        raise _Inapplicable("column entirely missing")
    med, sigma = stats.robust_sigma(v)
    rng = np.random.default_rng(_column_seed(x, d, "random_mad"))
    return med + rng.uniform(-1.0, 1.0, x.size) * sigma


# ---------------------------------------------------------------- O: outlier correctors


def _flagged_col(ctx, d):
    return ctx.outlier_mask[:, d]


def _o_madclip(k):
    def fn(x, d, frame, ctx):
        v = stats.finite(x)
        if v.size < 2:
            raise _Inapplicable("column entirely missing")
        med, sigma = stats.robust_sigma(v)
        if sigma == 0.0:
            return np.full(x.size, med)
        return np.clip(x, med - k * sigma, med + k * sigma)

    return fn


def _o_winsorize(q):
    def fn(x, d, frame, ctx):
        v = stats.finite(x)
        if v.size < 2:
            raise _Inapplicable("column entirely missing")
        lo, hi = np.quantile(v, (q, 1.0 - q))
        return np.clip(x, lo, hi)

    return fn


def _o_hampel(window):
    def fn(x, d, frame, ctx):
        med, _ = kernels.rolling_median_mad(x, window)
        return med

    return fn


def _o_medfilter(window):
    def fn(x, d, frame, ctx):
        return kernels.rolling_median(_masked(x, _flagged_col(ctx, d)), window)

    return fn


def _o_linear(x, d, frame, ctx):
    return _interp_interior(_masked(x, _flagged_col(ctx, d)))


def _o_spline(x, d, frame, ctx):
    return _spline_interior(_masked(x, _flagged_col(ctx, d)))


def _o_ewma(alpha):
    def fn(x, d, frame, ctx):
        return _ewma_states(_masked(x, _flagged_col(ctx, d)), alpha)

    return fn


def _o_segment(maxlen):
    def fn(x, d, frame, ctx):
        flagged = _flagged_col(ctx, d)
        hidden = _masked(x, flagged)
        out = np.full(x.size, np.nan)
        ok = ~np.isnan(hidden)
        if ok.sum() < 2:
            raise _Inapplicable("not enough anchors around flagged segments")
        t = np.arange(x.size, dtype=np.float64)
        interp = np.interp(t, t[ok], hidden[ok])
        anchors = np.nonzero(ok)[0]
        for start, stop in _runs(flagged & ~np.isnan(x)):
            if stop - start > maxlen:
                continue
            if start <= anchors[0] or stop > anchors[-1]:
                continue
            out[start:stop] = interp[start:stop]
        return out

    return fn


def _o_neighbor_mean(x, d, frame, ctx):
    hidden = _masked(x, _flagged_col(ctx, d))
    ok = ~np.isnan(hidden)
    if ok.sum() == 0:
        raise _Inapplicable("no clean neighbors")
    prev, nxt = _neighbor_indices(ok)
    out = np.full(x.size, np.nan)
    has_prev, has_next = prev >= 0, nxt < x.size
    both = has_prev & has_next
    out[both] = 0.5 * (hidden[np.maximum(prev[both], 0)] + hidden[np.minimum(nxt[both], x.size - 1)])
    only_p = has_prev & ~has_next
    out[only_p] = hidden[prev[only_p]]
    only_n = has_next & ~has_prev
    out[only_n] = hidden[nxt[only_n]]
    return out


def _o_prev_value(x, d, frame, ctx):
    return _ffill(_masked(x, _flagged_col(ctx, d)))


# ---------------------------------------------------------------- C: violation repairers


def _viol_col(ctx, d):
    return ctx.violation_mask[:, d]


def _speed_clamp(values, d, ctx, anchor=None):
    """Sequential minimal-change clamp of flagged cells into the speed corridor."""
    bounds = _speed_bounds(ctx.constraints, d)
    if bounds is None:
        return None
    g_min, g_max = bounds
    x = values[:, d].copy()
    flagged = np.nonzero(_viol_col(ctx, d) & ~np.isnan(values[:, d]))[0]
    for t in flagged:
        if t == 0 or np.isnan(x[t - 1]):
            continue
        lo, hi = x[t - 1] + g_min, x[t - 1] + g_max
        base = x[t] if anchor is None else anchor[t]
        if np.isnan(base):
            base = x[t]
        x[t] = min(max(base, lo), hi)
    return x


def _c_speed_clamp_min(frame, ctx):
    out = np.full_like(frame.values, np.nan)
    hit = False
    for d in range(frame.n_vars):
        col = _speed_clamp(frame.values, d, ctx)
        if col is not None:
            out[:, d] = col
            hit = True
    if not hit:
        raise _Inapplicable("no speed constraints available")
    return out


def _c_speed_clamp_median(window):
    def fn(frame, ctx):
        out = np.full_like(frame.values, np.nan)
        hit = False
        for d in range(frame.n_vars):
            anchor = kernels.rolling_median(
                _masked(frame.values[:, d], _viol_col(ctx, d)), window
            )
            col = _speed_clamp(frame.values, d, ctx, anchor=anchor)
            if col is not None:
                out[:, d] = col
                hit = True
        if not hit:
            raise _Inapplicable("no speed constraints available")
        return out

    return fn


def _c_accel_clamp(frame, ctx):
    out = np.full_like(frame.values, np.nan)
    hit = False
    for d in range(frame.n_vars):
        bounds = _accel_bounds(ctx.constraints, d)
        if bounds is None:
            continue
        hit = True
        g_min, g_max = bounds
        x = frame.values[:, d].copy()
        flagged = np.nonzero(_viol_col(ctx, d) & ~np.isnan(x))[0]
        for t in flagged:
            if t < 2 or np.isnan(x[t - 1]) or np.isnan(x[t - 2]):
                continue
            base = 2.0 * x[t - 1] - x[t - 2]
            x[t] = min(max(x[t], base + g_min), base + g_max)
        out[:, d] = x
    if not hit:
        raise _Inapplicable("no acceleration constraints available")
    return out


def _c_variance_smooth(window):
    def fn(frame, ctx):
        out = np.empty_like(frame.values)
        for d in range(frame.n_vars):
            mean, _ = kernels.rolling_mean_std(
                _masked(frame.values[:, d], _viol_col(ctx, d)), window
            )
            out[:, d] = mean
        return out

    return fn


def _cross_rows(frame, constraint):
    sub = frame.values[:, constraint.variables]
    ok = ~np.isnan(sub).any(axis=1)
    f = np.full(frame.n_rows, np.nan)
    f[ok] = constraint.evaluate(sub[ok])
    bad = ok & ((f < constraint.f_min) | (f > constraint.f_max))
    return f, bad


def _c_cross_project_target(frame, ctx):
    if not ctx.constraints.cross:
        raise _Inapplicable("no cross constraints available")
    out = np.full_like(frame.values, np.nan)
    for c in ctx.constraints.cross:
        target = cross_target_variable(c)
        if target is None:
            continue
        f, bad = _cross_rows(frame, c)
        rows = np.nonzero(bad & _viol_col(ctx, target))[0]
        clamped = np.clip(f[rows], c.f_min, c.f_max)
        out[rows, target] = frame.values[rows, target] + (f[rows] - clamped)
    return out


def _c_cross_project_least_corr(frame, ctx):
    if not ctx.constraints.cross:
        raise _Inapplicable("no cross constraints available")
    out = np.full_like(frame.values, np.nan)
    for c in ctx.constraints.cross:
        mean_corr = {}
        for v in c.variables:
            others = [w for w in c.variables if w != v]
            mean_corr[v] = np.mean(
                [abs(stats.nan_pearson(frame.column(v), frame.column(w))) for w in others]
            )
        v = min(c.variables, key=lambda w: (mean_corr[w], w))
        j = c.variables.index(v)
        f, bad = _cross_rows(frame, c)
        rows = np.nonzero(bad & _viol_col(ctx, v))[0]
        for t in rows:
            row = frame.values[t, c.variables]
            target_f = min(max(f[t], c.f_min), c.f_max)
            # f restricted to x_v is a degree-<=2 polynomial a*x^2 + b*x + const
            a = b = const = 0.0
            for exps, coeff in c.terms:
                e_v = exps[j]
                rest = coeff
                for jj, e in enumerate(exps):
                    if jj != j and e:
                        rest *= row[jj] ** e
                if e_v == 0:
                    const += rest
                elif e_v == 1:
                    b += rest
                else:
                    a += rest
            const -= target_f
            if abs(a) < 1e-12:
                if abs(b) < 1e-12:
                    continue
                out[t, v] = -const / b
            else:
                disc = b * b - 4.0 * a * const
                if disc < 0:
                    continue
                r = np.sqrt(disc)
                roots = ((-b - r) / (2 * a), (-b + r) / (2 * a))
                out[t, v] = min(roots, key=lambda z: abs(z - row[j]))
    return out


def _c_row_median(frame, ctx):
    out = np.empty_like(frame.values)
    for d in range(frame.n_vars):
        v = stats.finite(frame.column(d))
        out[:, d] = np.median(v) if v.size else np.nan
    return out


def _c_global_bound_clamp(frame, ctx):
    out = np.empty_like(frame.values)
    for d in range(frame.n_vars):
        x = frame.column(d)
        v = stats.finite(x)
        if v.size < 2:
            out[:, d] = np.nan
            continue
        med, sigma = stats.robust_sigma(v)
        if sigma == 0.0:
            out[:, d] = med
        else:
            out[:, d] = np.clip(x, med - 3.0 * sigma, med + 3.0 * sigma)
    return out


def _c_combo(frame, ctx):
    first = _c_speed_clamp_min(frame, ctx)
    merged = np.where(np.isnan(first), frame.values, first)
    staged = frame.with_values(merged)
    second = _c_cross_project_target(staged, ctx)
    return np.where(np.isnan(second), first, second)


# ---------------------------------------------------------------- default grid


def _d(op_id, category, **params):
    return OperatorDescriptor(op_id, category, params)


def default_registry() -> OperatorRegistry:
    """The 48-operator default grid: 20 imputers, 18 outlier correctors,
    10 violation repairers."""
    reg = OperatorRegistry()
    # --- M (20)
    reg.register(_d("m.ffill", "M"), _per_column(_m_ffill))
    reg.register(_d("m.bfill", "M"), _per_column(_m_bfill))
    reg.register(_d("m.mean", "M"), _per_column(_m_mean))
    reg.register(_d("m.median", "M"), _per_column(_m_median))
    reg.register(_d("m.linear", "M"), _per_column(_m_linear))
    reg.register(_d("m.spline", "M"), _per_column(_m_spline))
    for w in (3, 5, 7, 9):
        reg.register(_d(f"m.movavg.w{w}", "M", window=w), _per_column(_m_movavg(w)))
    reg.register(_d("m.seasonal.auto", "M", period="auto"), _per_column(_m_seasonal(False)))
    reg.register(_d("m.seasonal.half", "M", period="half"), _per_column(_m_seasonal(True)))
    for k in (3, 5):
        reg.register(_d(f"m.knn.k{k}", "M", k=k), _m_knn(k))
    for a in (0.3, 0.6):
        reg.register(_d(f"m.ewma.a{a}", "M", alpha=a), _per_column(_m_ewma(a)))
    reg.register(_d("m.hybrid_locf_interp", "M"), _per_column(_m_hybrid))
    for w in (5, 9):
        reg.register(_d(f"m.medwindow.w{w}", "M", window=w), _per_column(_m_medwindow(w)))
    reg.register(_d("m.random_mad", "M"), _per_column(_m_random_mad))
    # --- O (18)
    for k in (2, 3):
        reg.register(_d(f"o.madclip.k{k}", "O", k=k), _per_column(_o_madclip(k)))
    for q in (0.01, 0.02, 0.05):
        reg.register(_d(f"o.winsorize.q{q}", "O", q=q), _per_column(_o_winsorize(q)))
    for w in (5, 9):
        reg.register(_d(f"o.hampel.w{w}", "O", window=w), _per_column(_o_hampel(w)))
    for w in (3, 5, 9):
        reg.register(_d(f"o.medfilter.w{w}", "O", window=w), _per_column(_o_medfilter(w)))
    reg.register(_d("o.linear", "O"), _per_column(_o_linear))
    reg.register(_d("o.spline", "O"), _per_column(_o_spline))
    for a in (0.3, 0.6):
        reg.register(_d(f"o.ewma.a{a}", "O", alpha=a), _per_column(_o_ewma(a)))
    for m in (5, 15):
        reg.register(_d(f"o.segment.max{m}", "O", maxlen=m), _per_column(_o_segment(m)))
    reg.register(_d("o.neighbor_mean", "O"), _per_column(_o_neighbor_mean))
    reg.register(_d("o.prev_value", "O"), _per_column(_o_prev_value))
    # --- C (10)
    reg.register(_d("c.speed_clamp_min", "C"), _c_speed_clamp_min)
    reg.register(
        _d("c.speed_clamp_median.w5", "C", window=5), _c_speed_clamp_median(5)
    )
    reg.register(_d("c.accel_clamp", "C"), _c_accel_clamp)
    for w in (5, 9):
        reg.register(_d(f"c.variance_smooth.w{w}", "C", window=w), _c_variance_smooth(w))
    reg.register(_d("c.cross_project_target", "C"), _c_cross_project_target)
    reg.register(_d("c.cross_project_least_corr", "C"), _c_cross_project_least_corr)
    reg.register(_d("c.row_median", "C"), _c_row_median)
    reg.register(_d("c.global_bound_clamp", "C"), _c_global_bound_clamp)
    reg.register(_d("c.temporal_then_cross", "C"), _c_combo)
    return reg


def toy_registry() -> OperatorRegistry:
    """Two operators per category, used by small-instance search experiments."""
    return default_registry().subset(
        [
            "m.linear",
            "m.median",
            "o.madclip.k3",
            "o.medfilter.w5",
            "c.speed_clamp_median.w5",
            "c.variance_smooth.w5",
        ]
    )
