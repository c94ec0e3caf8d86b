"""Single-iteration tree restructuring: enumerate, evaluate, apply.

One iteration works in two modes:

* add mode -- a new leaf arrives together with a fresh probability
  distribution. Candidates are one split per existing leaf plus one attach
  per internal node that still has a free child slot (one alternative per
  node, not per slot: the slot choice cannot change any depth).
* swap mode -- no new leaf; candidates are unordered pairs of "misplaced"
  leaves (elemental discrepancy != 0) at differing depths, plus an explicit
  no-op carrying the current delta.

Every alternative is scored by the average discrepancy delta of the
candidate tree. The best one wins; ties break deterministically by
(delta, kind: attach < split < swap < no_op, ascending target labels).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import DuplicateKeyError, ProbabilityError, StructureError
from .metrics import discrepancy_report, entropy
from .tree import AdaptiveTree, check_probabilities

KIND_ORDER = {"attach": 0, "split": 1, "swap": 2, "no_op": 3}

# A swap is applied only if it beats the current delta by more than this.
IMPROVEMENT_EPS = 1e-12
CANDIDATE_EPS = 1e-9
DEFAULT_MAX_ITERS = 64


@dataclass
class Alternative:
    """One candidate restructuring with its evaluated discrepancy."""

    kind: str
    target: tuple[str, ...]
    resulting_delta: float
    sort_labels: tuple[str, ...]
    new_key: str | None = None
    new_payload: bytes | None = None
    new_probs: dict[str, float] | None = None

    @property
    def rank_key(self):
        return (self.resulting_delta, KIND_ORDER[self.kind], self.sort_labels)

    def target_json(self):
        if self.kind == "no_op":
            return None
        if self.kind == "swap":
            return list(self.target)
        return self.target[0]

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "target": self.target_json(), "delta": self.resulting_delta}


@dataclass
class RestructureOutcome:
    """Applied alternative plus the full ranked candidate list for audit."""

    chosen: Alternative
    considered: list[Alternative]
    tree_after: AdaptiveTree
    delta_before: float
    delta_after: float

    def to_json_dict(self) -> dict:
        return {
            "chosen": self.chosen.to_json_dict(),
            "considered": [alt.to_json_dict() for alt in self.considered],
            "delta_before": self.delta_before,
            "delta_after": self.delta_after,
        }


def enumerate_add_alternatives(
    tree: AdaptiveTree,
    new_key: str,
    new_probs: Mapping[str, float],
    new_payload: bytes | None = None,
    allowed_keys: set[str] | None = None,
) -> list[Alternative]:
    """All ways to place one new leaf, scored under the new distribution.

    ``allowed_keys`` optionally restricts which existing leaves may be split.
    """
    if new_key in set(tree.leaf_keys()):
        raise DuplicateKeyError(f"leaf key {new_key!r} already present")
    expected = set(tree.leaf_keys()) | {new_key}
    if set(new_probs) != expected:
        raise ProbabilityError(
            f"new distribution must cover the old leaves plus {new_key!r} "
            f"(missing {sorted(expected - set(new_probs))}, extra {sorted(set(new_probs) - expected)})"
        )
    check_probabilities(new_probs)
    if new_payload is None:
        new_payload = new_key.encode("utf-8")

    m = tree.config.arity
    depths = tree.depths()
    h = entropy(list(new_probs.values()), m)
    base_k = sum(new_probs[key] * depth for key, depth in depths.items())
    p_new = new_probs[new_key]
    probs_copy = {k: float(v) for k, v in new_probs.items()}

    alternatives: list[Alternative] = []
    for node_id in tree.open_internal_ids():
        node_depth = _node_depth(tree, node_id)
        k = base_k + p_new * (node_depth + 1)
        alternatives.append(
            Alternative(
                kind="attach",
                target=(node_id,),
                resulting_delta=k - h,
                sort_labels=(tree.subtree_min_key(node_id),),
                new_key=new_key,
                new_payload=new_payload,
                new_probs=probs_copy,
            )
        )
    for key in sorted(depths):
        if allowed_keys is not None and key not in allowed_keys:
            continue
        k = base_k + new_probs[key] + p_new * (depths[key] + 1)
        alternatives.append(
            Alternative(
                kind="split",
                target=(key,),
                resulting_delta=k - h,
                sort_labels=(key,),
                new_key=new_key,
                new_payload=new_payload,
                new_probs=probs_copy,
            )
        )
    return alternatives


def enumerate_swap_alternatives(
    tree: AdaptiveTree,
    allowed_keys: set[str] | None = None,
) -> list[Alternative]:
    """Swap candidates among misplaced leaves, plus a no-op baseline.

    Leaves qualify when their elemental discrepancy is non-zero (beyond
    1e-9); only pairs at differing depths are emitted since equal-depth swaps
    cannot change any path length.
    """
    report = discrepancy_report(tree)
    depths = {s.key: s.l for s in report.per_leaf}
    candidates = [s.key for s in report.per_leaf if abs(s.delta_i) > CANDIDATE_EPS]
    if allowed_keys is not None:
        candidates = [key for key in candidates if key in allowed_keys]

    alternatives: list[Alternative] = []
    for i, key_a in enumerate(candidates):
        for key_b in candidates[i + 1 :]:
            if depths[key_a] == depths[key_b]:
                continue
            p_a, p_b = tree.probabilities[key_a], tree.probabilities[key_b]
            delta = report.delta + (p_a - p_b) * (depths[key_b] - depths[key_a])
            alternatives.append(
                Alternative(
                    kind="swap",
                    target=(key_a, key_b),
                    resulting_delta=delta,
                    sort_labels=(key_a, key_b),
                )
            )
    alternatives.append(
        Alternative(kind="no_op", target=(), resulting_delta=report.delta, sort_labels=())
    )
    return alternatives


def apply_alternative(tree: AdaptiveTree, alternative: Alternative) -> None:
    """Perform the mutation an alternative describes, mutating ``tree``."""
    if alternative.kind == "split":
        tree.split_leaf(alternative.target[0], alternative.new_key, alternative.new_payload)
    elif alternative.kind == "attach":
        tree.attach_leaf(alternative.target[0], alternative.new_key, alternative.new_payload)
    elif alternative.kind == "swap":
        tree.swap_leaves(*alternative.target)
    elif alternative.kind != "no_op":
        raise StructureError(f"unknown alternative kind {alternative.kind!r}")
    if alternative.new_probs is not None:
        tree.set_probabilities(alternative.new_probs)


def apply_best(tree: AdaptiveTree, alternatives: Sequence[Alternative]) -> RestructureOutcome:
    """Apply the minimal-delta alternative under the deterministic total order."""
    if not alternatives:
        raise StructureError("no restructuring alternatives given")
    delta_before = discrepancy_report(tree).delta
    considered = sorted(alternatives, key=lambda alt: alt.rank_key)
    chosen = considered[0]
    apply_alternative(tree, chosen)
    delta_after = discrepancy_report(tree).delta
    return RestructureOutcome(
        chosen=chosen,
        considered=considered,
        tree_after=tree,
        delta_before=delta_before,
        delta_after=delta_after,
    )


def optimize_swaps(
    tree: AdaptiveTree,
    max_iters: int = DEFAULT_MAX_ITERS,
    allowed_keys: set[str] | None = None,
) -> list[RestructureOutcome]:
    """Repeated swap iterations until no strict improvement remains.

    Returns one outcome per applied swap; an already-optimal tree yields an
    empty list. Delta is strictly decreasing along the sequence.
    """
    if max_iters < 1:
        raise StructureError(f"max_iters must be >= 1, got {max_iters}")
    outcomes: list[RestructureOutcome] = []
    for _ in range(max_iters):
        alternatives = enumerate_swap_alternatives(tree, allowed_keys=allowed_keys)
        ranked = sorted(alternatives, key=lambda alt: alt.rank_key)
        best = ranked[0]
        current = next(alt.resulting_delta for alt in alternatives if alt.kind == "no_op")
        if best.kind == "no_op" or best.resulting_delta >= current - IMPROVEMENT_EPS:
            break
        apply_alternative(tree, best)
        delta_after = discrepancy_report(tree).delta
        outcomes.append(
            RestructureOutcome(
                chosen=best,
                considered=ranked,
                tree_after=tree,
                delta_before=current,
                delta_after=delta_after,
            )
        )
        if delta_after <= CANDIDATE_EPS:
            break
    return outcomes


def _node_depth(tree: AdaptiveTree, node_id: str) -> int:
    depth = 0
    nid = node_id
    while nid != tree.root_id:
        nid = tree.parent_id(nid)
        depth += 1
    return depth
