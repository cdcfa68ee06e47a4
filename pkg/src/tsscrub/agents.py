"""Tabular Q-learning agents: one high-level table over {M,O,C,F} and one
isolated low-level table per category.

Whenever missing cells are present the high-level action space collapses to
M without touching the Q-table, which both prunes the search and guarantees
imputation precedes every other repair. Selection counts its Q-value reads
so the per-step decision cost can be audited.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from tsscrub.core import CATEGORIES, HIGH_ACTIONS, DataError, QualityRates

BUNDLE_VERSION = 1


@dataclass(frozen=True)
class Hyper:
    alpha: float = 0.1
    gamma: float = 0.9
    epsilon_start: float = 1.0
    epsilon_decay: float = 0.995
    epsilon_floor: float = 0.05

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError("alpha outside (0,1]")
        if not (0.0 <= self.gamma < 1.0):
            raise ValueError("gamma outside [0,1)")
        for name in ("epsilon_start", "epsilon_decay", "epsilon_floor"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} outside [0,1]")

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "epsilon_decay": self.epsilon_decay,
            "epsilon_floor": self.epsilon_floor,
            "epsilon_start": self.epsilon_start,
            "gamma": self.gamma,
        }

    @staticmethod
    def from_dict(d: dict) -> "Hyper":
        return Hyper(**d)


class QTable:
    """Sparse state -> action-value vector map; unseen states read as zeros."""

    def __init__(self, n_actions: int, entries: dict[str, np.ndarray] | None = None):
        self.n_actions = n_actions
        self.entries: dict[str, np.ndarray] = entries or {}

    def values(self, key: str) -> np.ndarray:
        row = self.entries.get(key)
        if row is None:
            return np.zeros(self.n_actions)
        return row

    def update(self, key: str, action: int, delta: float) -> None:
        row = self.entries.get(key)
        if row is None:
            row = np.zeros(self.n_actions)
            self.entries[key] = row
        row[action] += delta

    def widened(self, n_actions: int) -> "QTable":
        if n_actions < self.n_actions:
            raise ValueError("cannot shrink a Q-table")
        entries = {
            k: np.concatenate([v, np.zeros(n_actions - self.n_actions)])
            for k, v in self.entries.items()
        }
        return QTable(n_actions, entries)


@dataclass
class AgentBundle:
    high_q: QTable
    low_q: dict[str, QTable]
    low_op_ids: dict[str, list[str]]
    hyper: Hyper = Hyper()
    epsilon: float | None = None
    train_config: dict | None = None
    q_reads: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.epsilon is None:
            self.epsilon = self.hyper.epsilon_start
        for cat in CATEGORIES:
            if cat not in self.low_q:
                raise ValueError(f"missing low table for category {cat}")
            if len(self.low_op_ids[cat]) != self.low_q[cat].n_actions:
                raise ValueError(f"op id count mismatch for category {cat}")

    @staticmethod
    def fresh(registry, hyper: Hyper = Hyper(), train_config: dict | None = None) -> "AgentBundle":
        return AgentBundle(
            QTable(len(HIGH_ACTIONS)),
            {c: QTable(len(registry.ids(c))) for c in CATEGORIES},
            {c: registry.ids(c) for c in CATEGORIES},
            hyper,
            None,
            train_config,
        )

    def decay_epsilon(self) -> None:
        self.epsilon = max(self.hyper.epsilon_floor, self.epsilon * self.hyper.epsilon_decay)

    def align_with_registry(self, registry) -> None:
        """Accept append-only registry growth; reject any id mismatch."""
        for cat in CATEGORIES:
            current = registry.ids(cat)
            saved = self.low_op_ids[cat]
            if len(saved) > len(current):
                extra = [i for i in saved if i not in current]
                raise DataError(
                    f"agent was trained with operator {extra[0] if extra else saved[-1]!r} "
                    "missing from the current registry"
                )
            for i, op_id in enumerate(saved):
                if current[i] != op_id:
                    raise DataError(
                        f"operator {op_id!r} moved or was removed; "
                        "the registry is append-only"
                    )
            if len(saved) < len(current):
                self.low_q[cat] = self.low_q[cat].widened(len(current))
                self.low_op_ids[cat] = list(current)


def select_high(
    bundle: AgentBundle,
    state,
    rates: QualityRates,
    explore: bool,
    rng: np.random.Generator | None = None,
    allow_finish: bool = True,
) -> str:
    """Pick the next issue category (or F). Missing cells force M outright."""
    if rates.r_missing > 0.0:
        return "M"
    allowed = ["O", "C"] + (["F"] if allow_finish else [])
    if explore:
        if rng is None:
            raise ValueError("exploration requires an rng")
        if rng.random() < bundle.epsilon:
            return allowed[rng.integers(len(allowed))]
    row = bundle.high_q.values(state.key())
    bundle.q_reads += len(allowed)
    best, best_v = None, -np.inf
    for a in allowed:
        v = row[HIGH_ACTIONS.index(a)]
        if v > best_v:
            best, best_v = a, v
    return best


def select_low(
    bundle: AgentBundle,
    state,
    category: str,
    explore: bool,
    rng: np.random.Generator | None = None,
    forbidden: int | None = None,
) -> int:
    """Pick an operator index within the category's isolated table."""
    table = bundle.low_q[category]
    allowed = list(range(table.n_actions))
    if forbidden is not None and len(allowed) > 1:
        allowed = [a for a in allowed if a != forbidden]
    if explore:
        if rng is None:
            raise ValueError("exploration requires an rng")
        if rng.random() < bundle.epsilon:
            return allowed[rng.integers(len(allowed))]
    row = table.values(state.key())
    bundle.q_reads += len(allowed)
    best = allowed[0]
    for a in allowed[1:]:
        if row[a] > row[best]:
            best = a
    return best


def _bootstrap(table: QTable, next_key: str | None, next_actions, gamma: float, terminal: bool) -> float:
    if terminal or next_key is None:
        return 0.0
    row = table.values(next_key)
    if next_actions is None:
        next_actions = range(table.n_actions)
    return gamma * max(row[a] for a in next_actions)


def update_high(
    bundle: AgentBundle,
    state_key: str,
    action: str,
    reward: float,
    next_state_key: str | None,
    next_actions: list[str] | None,
    terminal: bool,
) -> None:
    if not np.isfinite(reward):
        raise ValueError(f"non-finite reward {reward}")
    idxs = None if next_actions is None else [HIGH_ACTIONS.index(a) for a in next_actions]
    table = bundle.high_q
    a = HIGH_ACTIONS.index(action)
    target = reward + _bootstrap(table, next_state_key, idxs, bundle.hyper.gamma, terminal)
    q = table.values(state_key)[a]
    table.update(state_key, a, bundle.hyper.alpha * (target - q))


def update_low(
    bundle: AgentBundle,
    category: str,
    state_key: str,
    action: int,
    reward: float,
    next_state_key: str | None,
    terminal: bool,
) -> None:
    if not np.isfinite(reward):
        raise ValueError(f"non-finite reward {reward}")
    table = bundle.low_q[category]
    target = reward + _bootstrap(table, next_state_key, None, bundle.hyper.gamma, terminal)
    q = table.values(state_key)[action]
    table.update(state_key, action, bundle.hyper.alpha * (target - q))


def to_dict(bundle: AgentBundle) -> dict:
    return {
        "epsilon": bundle.epsilon,
        "high": {
            "actions": list(HIGH_ACTIONS),
            "table": {k: list(v) for k, v in sorted(bundle.high_q.entries.items())},
        },
        "hyper": bundle.hyper.to_dict(),
        "low": {
            c: {
                "op_ids": list(bundle.low_op_ids[c]),
                "table": {k: list(v) for k, v in sorted(bundle.low_q[c].entries.items())},
            }
            for c in CATEGORIES
        },
        "train_config": bundle.train_config,
        "version": BUNDLE_VERSION,
    }


def from_dict(d: dict) -> AgentBundle:
    version = d.get("version")
    if version != BUNDLE_VERSION:
        raise DataError(f"unsupported agent bundle version {version!r}")
    low_q, low_ids = {}, {}
    for c in CATEGORIES:
        entry = d["low"][c]
        low_ids[c] = list(entry["op_ids"])
        low_q[c] = QTable(
            len(low_ids[c]),
            {k: np.asarray(v, dtype=np.float64) for k, v in entry["table"].items()},
        )
    high = QTable(
        len(HIGH_ACTIONS),
        {k: np.asarray(v, dtype=np.float64) for k, v in d["high"]["table"].items()},
    )
    return AgentBundle(
        high, low_q, low_ids, Hyper.from_dict(d["hyper"]), d["epsilon"], d.get("train_config")
    )


def save(bundle: AgentBundle, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_dict(bundle), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load(path, registry=None) -> AgentBundle:
    try:
        with open(path, encoding="utf-8") as fh:
            bundle = from_dict(json.load(fh))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DataError(f"corrupt agent bundle {path}: {exc}") from exc
    if registry is not None:
        bundle.align_with_registry(registry)
    return bundle


def structurally_equal(a: AgentBundle, b: AgentBundle) -> bool:
    if a.hyper != b.hyper or a.epsilon != b.epsilon or a.low_op_ids != b.low_op_ids:
        return False
    if set(a.high_q.entries) != set(b.high_q.entries):
        return False
    if any(not np.array_equal(a.high_q.entries[k], b.high_q.entries[k]) for k in a.high_q.entries):
        return False
    for c in CATEGORIES:
        ta, tb = a.low_q[c], b.low_q[c]
        if set(ta.entries) != set(tb.entries):
            return False
        if any(not np.array_equal(ta.entries[k], tb.entries[k]) for k in ta.entries):
            return False
    return True
