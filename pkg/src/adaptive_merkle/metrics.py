"""Path-length and entropy metrics for adaptive trees.

The quantities of interest for a tree with leaf probabilities p_i and leaf
depths l_i (log taken base m, the tree arity):

* average path length  k_A = sum(p_i * l_i)
* entropy              H   = -sum(p_i * log_m(p_i))
* average discrepancy  delta = k_A - H, with per-leaf contributions
  delta_i = p_i * (l_i + log_m(p_i)); zero-probability leaves contribute 0.

``delta`` is the restructuring objective: it is >= 0 for every valid tree and
hits 0 exactly when every positive-probability leaf sits at depth
-log_m(p_i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .errors import ProbabilityError
from .tree import PROB_SUM_TOL, AdaptiveTree


def log_base(p: float, m: int) -> float:
    # log2-based so that dyadic p and power-of-two m stay exact in floats.
    return math.log2(p) / math.log2(m)


def _check_sum(values: Iterable[float]) -> None:
    total = sum(values)
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise ProbabilityError(f"probabilities sum to {total!r}, expected 1 +/- {PROB_SUM_TOL}")


def avg_path_length(stats: Iterable[tuple[float, int]]) -> float:
    """Weighted mean depth sum(p * l) over (probability, depth) pairs."""
    pairs = list(stats)
    for p, l in pairs:
        if p < 0.0:
            raise ProbabilityError(f"negative probability {p!r}")
        if l < 0:
            raise ProbabilityError(f"negative depth {l!r}")
    _check_sum(p for p, _ in pairs)
    return sum(p * l for p, l in pairs)


def entropy(probs: Iterable[float], m: int) -> float:
    """Base-m entropy -sum(p * log_m p); p = 0 terms contribute 0."""
    values = list(probs)
    if m < 2:
        raise ProbabilityError(f"arity must be >= 2, got {m}")
    for p in values:
        if p < 0.0:
            raise ProbabilityError(f"negative probability {p!r}")
    _check_sum(values)
    return -sum(p * log_base(p, m) for p in values if p > 0.0)


def elemental_discrepancy(p: float, l: int, m: int) -> float:
    """Per-leaf discrepancy p * (l + log_m p); defined as 0 when p = 0."""
    if p == 0.0:
        return 0.0
    return p * (l + log_base(p, m))


@dataclass(frozen=True)
class LeafStats:
    """Probability, depth, and discrepancy contribution of one leaf."""

    key: str
    p: float
    l: int
    delta_i: float


@dataclass(frozen=True)
class MetricsReport:
    """Snapshot metrics: k_A, H, delta = k_A - H, and per-leaf breakdown."""

    k_a: float
    entropy: float
    delta: float
    per_leaf: tuple[LeafStats, ...]

    def delta_by_key(self) -> dict[str, float]:
        return {stats.key: stats.delta_i for stats in self.per_leaf}

    def to_json_dict(self) -> dict:
        return {
            "k_A": self.k_a,
            "H": self.entropy,
            "delta": self.delta,
            "per_leaf": [
                {"key": s.key, "p": s.p, "l": s.l, "delta_i": s.delta_i} for s in self.per_leaf
            ],
        }


def discrepancy_report(tree: AdaptiveTree) -> MetricsReport:
    """Full metrics for a tree; leaves reported in key order."""
    tree.require_probability_sum()
    m = tree.config.arity
    depths = tree.depths()
    per_leaf = tuple(
        LeafStats(key, tree.probabilities[key], depths[key],
                  elemental_discrepancy(tree.probabilities[key], depths[key], m))
        for key in sorted(depths)
    )
    k_a = sum(s.p * s.l for s in per_leaf)
    h = -sum(s.p * log_base(s.p, m) for s in per_leaf if s.p > 0.0)
    return MetricsReport(k_a=k_a, entropy=h, delta=k_a - h, per_leaf=per_leaf)
