"""Task-model interface with built-in lightweight and complex proxies.

The lite tier gives fast per-step reward signals; the complex tier scores
finished pipelines. Both return a normalized performance in [0,1]:
forecasting uses (e^{-NRMSE} + (CC+1)/2)/2 on a held-out tail, classification
(macro-F1 + one-vs-rest AUC)/2 on a seeded stratified split, clustering
((silhouette+1)/2 + 1/(1+DBI))/2. Missing cells are zero-filled with a
warning so the score is always defined mid-pipeline.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.metrics import davies_bouldin_score, f1_score, roc_auc_score, silhouette_score

from tsscrub import stats
from tsscrub.core import DataError, TimeSeriesFrame

EPS = 1e-9


@dataclass(frozen=True)
class TaskSpec:
    task: str  # Forecast | Classify | Cluster
    horizon: int = 1
    window: int = 8
    labels: tuple[int, ...] | None = None
    sample_len: int | None = None
    n_clusters: int | None = None
    test_frac: float = 0.25
    seed: int = 0

    def __post_init__(self):
        if self.task not in ("Forecast", "Classify", "Cluster"):
            raise ValueError(f"unknown task {self.task!r}")
        if self.task == "Forecast" and self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.task in ("Classify", "Cluster") and not self.sample_len:
            raise ValueError(f"{self.task} needs sample_len")
        if self.task == "Classify" and not self.labels:
            raise ValueError("Classify needs labels")
        if self.task == "Cluster" and (self.n_clusters is None or self.n_clusters < 2):
            raise ValueError("Cluster needs n_clusters >= 2")
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(int(v) for v in self.labels))

    def to_dict(self) -> dict:
        d = {
            "horizon": self.horizon,
            "seed": self.seed,
            "task": self.task,
            "test_frac": self.test_frac,
            "window": self.window,
        }
        if self.labels is not None:
            d["labels"] = list(self.labels)
        if self.sample_len is not None:
            d["sample_len"] = self.sample_len
        if self.n_clusters is not None:
            d["n_clusters"] = self.n_clusters
        return d

    @staticmethod
    def from_dict(d: dict) -> "TaskSpec":
        return TaskSpec(
            d["task"],
            d.get("horizon", 1),
            d.get("window", 8),
            tuple(d["labels"]) if d.get("labels") is not None else None,
            d.get("sample_len"),
            d.get("n_clusters"),
            d.get("test_frac", 0.25),
            d.get("seed", 0),
        )

TIER_LITE = "Lite"
TIER_COMPLEX = "Complex"


def _zero_filled(frame: TimeSeriesFrame) -> np.ndarray:
    vals = frame.values
    mask = np.isnan(vals)
    if mask.any():
        warnings.warn(
            f"{int(mask.sum())} missing cells zero-filled for evaluation",
            stacklevel=3,
        )
        vals = np.where(mask, 0.0, vals)
    return vals


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    if a.size < 2:
        return 0.0
    sa, sb = a.std(), b.std()
    if sa == 0.0 or sb == 0.0:
        return 0.0
    return float(np.mean((a - a.mean()) * (b - b.mean())) / (sa * sb))


def _lag_matrix(vals: np.ndarray, window: int, horizon: int, rows: np.ndarray):
    """Design rows for predicting x_t from `window` lags ending h steps back."""
    from numpy.lib.stride_tricks import sliding_window_view

    windows = sliding_window_view(vals, window, axis=0)  # (T-w+1, D, w)
    starts = rows - horizon - window + 1
    return windows[starts].transpose(0, 2, 1).reshape(rows.size, -1)


def _forecast_perf(vals: np.ndarray, spec: TaskSpec, tier: str) -> float:
    T, D = vals.shape
    h = spec.horizon
    window = spec.window if tier == TIER_LITE else 3 * spec.window
    n_test = max(1, int(round(spec.test_frac * T)))
    t_split = T - n_test
    first = window + h - 1
    train_rows = np.arange(first, t_split)
    test_rows = np.arange(max(t_split, first), T)
    if train_rows.size < window + 2 or test_rows.size < 2:
        raise DataError("series too short for the forecast window/horizon")
    if tier == TIER_LITE:
        from numpy.lib.stride_tricks import sliding_window_view

        windows = sliding_window_view(vals, window, axis=0)  # (T-w+1, D, w)
        tr = train_rows - h - window + 1
        te = test_rows - h - window + 1
        ones_tr = np.ones((train_rows.size, D, 1))
        ones_te = np.ones((test_rows.size, D, 1))
        X = np.concatenate([windows[tr], ones_tr], axis=2).transpose(1, 0, 2)
        Xt = np.concatenate([windows[te], ones_te], axis=2).transpose(1, 0, 2)
        y = vals[train_rows].T[:, :, None]  # (D, n, 1)
        gram = X.transpose(0, 2, 1) @ X + 1e-8 * np.eye(window + 1)
        beta = np.linalg.solve(gram, X.transpose(0, 2, 1) @ y)  # (D, w+1, 1)
        preds = (Xt @ beta)[:, :, 0].T
    else:
        preds = np.empty((test_rows.size, D))
        X = _lag_matrix(vals, window, h, train_rows)
        X = np.column_stack([X, np.ones(len(X))])
        Xt = _lag_matrix(vals, window, h, test_rows)
        Xt = np.column_stack([Xt, np.ones(len(Xt))])
        n_val = max(2, train_rows.size // 4)
        fit, val = slice(0, train_rows.size - n_val), slice(train_rows.size - n_val, None)
        eye = np.eye(X.shape[1])
        gram_fit = X[fit].T @ X[fit]
        best_lam, best_err = 1.0, np.inf
        for lam in (0.1, 1.0, 10.0):
            err = 0.0
            for d in range(D):
                beta = np.linalg.solve(
                    gram_fit + lam * eye, X[fit].T @ vals[train_rows[fit], d]
                )
                err += float(np.mean((X[val] @ beta - vals[train_rows[val], d]) ** 2))
            if err < best_err:
                best_err, best_lam = err, lam
        gram = X.T @ X + best_lam * eye
        for d in range(D):
            beta = np.linalg.solve(gram, X.T @ vals[train_rows, d])
            preds[:, d] = Xt @ beta
    nrmses, ccs = [], []
    for d in range(D):
        truth = vals[test_rows, d]
        rmse = float(np.sqrt(np.mean((preds[:, d] - truth) ** 2)))
        nrmses.append(rmse / max(float(truth.std()), EPS))
        ccs.append(_pearson(preds[:, d], truth))
    nrmse = float(np.mean(nrmses))
    cc = float(np.mean(ccs))
    return (np.exp(-nrmse) + (cc + 1.0) / 2.0) / 2.0


def _samples(vals: np.ndarray, spec: TaskSpec) -> np.ndarray:
    T, D = vals.shape
    L = spec.sample_len
    if T % L != 0:
        raise DataError(f"frame rows {T} not divisible by sample_len {L}")
    return vals.reshape(T // L, L, D)


def _resample(sample: np.ndarray, n_points: int) -> np.ndarray:
    L, D = sample.shape
    pos = np.linspace(0.0, L - 1.0, n_points)
    base = np.arange(L, dtype=np.float64)
    return np.column_stack([np.interp(pos, base, sample[:, d]) for d in range(D)]).ravel()


def _znorm_flat(samples: np.ndarray) -> np.ndarray:
    mu = samples.mean(axis=1, keepdims=True)
    sd = np.maximum(samples.std(axis=1, keepdims=True), EPS)
    return ((samples - mu) / sd).reshape(samples.shape[0], -1)


def _stratified_split(labels: np.ndarray, test_frac: float, seed: int):
    classes = np.unique(labels)
    for attempt_seed in (seed, seed + 1):
        rng = np.random.default_rng(attempt_seed)
        train_idx, test_idx = [], []
        for c in classes:
            idx = np.nonzero(labels == c)[0]
            perm = rng.permutation(idx)
            n_test = min(len(idx), max(1, int(round(test_frac * len(idx)))))
            test_idx.extend(perm[:n_test])
            train_idx.extend(perm[n_test:])
        train_idx = np.sort(np.asarray(train_idx))
        test_idx = np.sort(np.asarray(test_idx))
        if set(classes) <= set(labels[train_idx]):
            return train_idx, test_idx
    raise DataError("degenerate split: a class is absent from the training fold")


def _knn_proba(
    train_X: np.ndarray, train_y: np.ndarray, test_X: np.ndarray, classes: np.ndarray,
    k: int, weighted: bool,
) -> np.ndarray:
    d2 = (
        (test_X**2).sum(axis=1)[:, None]
        + (train_X**2).sum(axis=1)[None, :]
        - 2.0 * test_X @ train_X.T
    )
    d2 = np.maximum(d2, 0.0)
    k = min(k, train_X.shape[0])
    nn = np.argsort(d2, axis=1, kind="stable")[:, :k]
    proba = np.zeros((test_X.shape[0], classes.size))
    cls_pos = {c: i for i, c in enumerate(classes)}
    for i in range(test_X.shape[0]):
        for j in nn[i]:
            w = 1.0 / (np.sqrt(d2[i, j]) + EPS) if weighted else 1.0
            proba[i, cls_pos[train_y[j]]] += w
    proba /= proba.sum(axis=1, keepdims=True)
    return proba


def _classify_perf(vals: np.ndarray, spec: TaskSpec, tier: str) -> float:
    samples = _samples(vals, spec)
    labels = np.asarray(spec.labels)
    if labels.size != samples.shape[0]:
        raise DataError(
            f"labels count {labels.size} != sample count {samples.shape[0]}"
        )
    train_idx, test_idx = _stratified_split(labels, spec.test_frac, spec.seed)
    classes = np.unique(labels)
    if tier == TIER_LITE:
        feats = np.asarray([_resample(s, 16) for s in samples])
        k, weighted = 1, False
    else:
        feats = _znorm_flat(samples)
        k, weighted = 5, True
    proba = _knn_proba(feats[train_idx], labels[train_idx], feats[test_idx], classes, k, weighted)
    pred = classes[np.argmax(proba, axis=1)]
    y_true = labels[test_idx]
    macro_f1 = f1_score(y_true, pred, labels=classes, average="macro", zero_division=0)
    try:
        if classes.size == 2:
            auc = roc_auc_score(y_true, proba[:, 1])
        else:
            auc = roc_auc_score(y_true, proba, multi_class="ovr", labels=classes)
    except ValueError:
        auc = 0.5  # a class missing from the test fold
    return (float(macro_f1) + float(auc)) / 2.0


def _kmeans(X: np.ndarray, k: int, n_init: int, seed: int) -> np.ndarray:
    """Seeded k-means++ / Lloyd; returns the lowest-inertia labeling."""
    n = X.shape[0]
    rng = np.random.default_rng(seed)
    best_labels, best_inertia = None, np.inf
    for _ in range(n_init):
        centers = np.empty((k, X.shape[1]))
        centers[0] = X[rng.integers(n)]
        d2 = ((X - centers[0]) ** 2).sum(axis=1)
        for j in range(1, k):
            total = d2.sum()
            if total <= 0:
                centers[j] = X[rng.integers(n)]
            else:
                centers[j] = X[rng.choice(n, p=d2 / total)]
            d2 = np.minimum(d2, ((X - centers[j]) ** 2).sum(axis=1))
        labels = np.zeros(n, dtype=np.int64)
        for _ in range(100):
            dist = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
            new_labels = dist.argmin(axis=1)
            for j in range(k):
                sel = new_labels == j
                if sel.any():
                    centers[j] = X[sel].mean(axis=0)
                else:
                    centers[j] = X[dist.min(axis=1).argmax()]
            if (new_labels == labels).all():
                labels = new_labels
                break
            labels = new_labels
        inertia = float(((X - centers[labels]) ** 2).sum())
        if inertia < best_inertia:
            best_inertia, best_labels = inertia, labels
    return best_labels


def _summary_features(samples: np.ndarray) -> np.ndarray:
    feats = []
    for s in samples:
        per_var = []
        for d in range(s.shape[1]):
            x = s[:, d]
            sd = x.std()
            sk = stats.sample_skewness(x)
            ku = stats.excess_kurtosis(x)
            ac = stats.acf_mean_filled(x, 1)[1] if x.size > 2 else 0.0
            slope = _pearson(x, np.arange(x.size, dtype=np.float64))
            per_var.append(
                [x.mean(), sd, x.min(), x.max(), sk or 0.0, ku or 0.0, ac, slope]
            )
        feats.append(np.mean(per_var, axis=0))
    F = np.asarray(feats)
    mu, sd = F.mean(axis=0), np.maximum(F.std(axis=0), EPS)
    return (F - mu) / sd


def _cluster_perf(vals: np.ndarray, spec: TaskSpec, tier: str) -> float:
    samples = _samples(vals, spec)
    k = spec.n_clusters
    if tier == TIER_LITE:
        feats = _summary_features(samples)
        labels = _kmeans(feats, k, n_init=1, seed=spec.seed)
    else:
        feats = _znorm_flat(samples)
        labels = _kmeans(feats, k, n_init=10, seed=spec.seed)
    if np.unique(labels).size < 2:
        return 0.0
    sil = float(silhouette_score(feats, labels))
    dbi = float(davies_bouldin_score(feats, labels))
    return ((sil + 1.0) / 2.0 + 1.0 / (1.0 + dbi)) / 2.0


def evaluate(frame: TimeSeriesFrame, spec: TaskSpec, tier: str = TIER_LITE) -> float:
    """Normalized downstream performance in [0,1]; deterministic given the seed."""
    if tier not in (TIER_LITE, TIER_COMPLEX):
        raise ValueError(f"unknown tier {tier!r}")
    vals = _zero_filled(frame)
    if spec.task == "Forecast":
        perf = _forecast_perf(vals, spec, tier)
    elif spec.task == "Classify":
        perf = _classify_perf(vals, spec, tier)
    else:
        perf = _cluster_perf(vals, spec, tier)
    return float(min(max(perf, 0.0), 1.0))


def delta_perf(
    dirty: TimeSeriesFrame, cleaned: TimeSeriesFrame, spec: TaskSpec, tier: str
) -> float:
    """evaluate(cleaned) - evaluate(dirty), same seed and split throughout."""
    return evaluate(cleaned, spec, tier) - evaluate(dirty, spec, tier)
