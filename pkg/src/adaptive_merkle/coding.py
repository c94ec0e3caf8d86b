"""m-ary Huffman codes and a brute-force optimality oracle.

Huffman code lengths are the target depths for the adaptive tree: both
minimize the probability-weighted path length over prefix-free structures.
For m > 2 the merge queue is padded with zero-weight dummy symbols so that
(n - 1) mod (m - 1) == 0; dummies never surface in the output. Merge-order
ties break on the lexicographically smallest leaf key contained in each
queue entry, so generated tables are reproducible bit for bit.
"""

from __future__ import annotations

import csv
import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .errors import FormatError, ProbabilityError, StructureError
from .metrics import entropy
from .tree import (
    AdaptiveTree,
    TreeConfig,
    check_probabilities,
    digit_to_index,
    index_to_digit,
)

BRUTE_FORCE_MAX_N = 10


@dataclass(frozen=True)
class CodeTable:
    """Prefix-free code assignment over digits 0..m-1."""

    entries: dict[str, str]
    probabilities: dict[str, float]
    arity: int
    avg_length: float
    entropy: float

    def length_multiset(self) -> list[int]:
        return sorted(len(code) for code in self.entries.values())

    def validate(self) -> None:
        if not is_prefix_free(self.entries.values()):
            raise StructureError("code table is not prefix-free")
        kraft = sum(Fraction(1, self.arity ** len(code)) for code in self.entries.values())
        if kraft > 1:
            raise StructureError(f"Kraft sum {float(kraft)!r} exceeds 1")
        if self.avg_length < self.entropy - 1e-9:
            raise StructureError("average code length below the entropy bound")


def is_prefix_free(codes) -> bool:
    ordered = sorted(codes)
    for a, b in zip(ordered, ordered[1:]):
        if b.startswith(a):
            return False
    return True


def is_code_string(code: str) -> bool:
    """True when every character is a valid path digit (0-9a-z)."""
    try:
        for ch in code:
            digit_to_index(ch)
    except StructureError:
        return False
    return True


class _MergeNode:
    __slots__ = ("weight", "tiebreak", "children", "key", "dummy")

    def __init__(self, weight, tiebreak, children=None, key=None, dummy=False):
        self.weight = weight
        self.tiebreak = tiebreak
        self.children = children
        self.key = key
        self.dummy = dummy

    def __lt__(self, other):
        return (self.weight, self.tiebreak) < (other.weight, other.tiebreak)


def huffman_codes(probs: Mapping[str, float], m: int) -> CodeTable:
    """Optimal m-ary prefix code for the given distribution.

    Single-symbol inputs get the empty code. Ties in merge order resolve by
    the smallest contained leaf key, making the output deterministic.
    """
    if m < 2:
        raise ProbabilityError(f"arity must be >= 2, got {m}")
    if not probs:
        raise ProbabilityError("distribution is empty")
    check_probabilities(probs)
    prob_map = {key: float(p) for key, p in probs.items()}

    if len(prob_map) == 1:
        key = next(iter(prob_map))
        return CodeTable({key: ""}, prob_map, m, 0.0, 0.0)

    heap: list[_MergeNode] = [
        _MergeNode(p, (0, key), key=key) for key, p in prob_map.items()
    ]
    n_dummies = (m - 1 - (len(heap) - 1) % (m - 1)) % (m - 1)
    heap.extend(_MergeNode(0.0, (1, i), dummy=True) for i in range(n_dummies))
    heapq.heapify(heap)

    while len(heap) > 1:
        merged_children = [heapq.heappop(heap) for _ in range(m)]
        real = [node for node in merged_children if not node.dummy]
        weight = sum(node.weight for node in real)
        heapq.heappush(heap, _MergeNode(weight, min(node.tiebreak for node in real), children=real))

    entries: dict[str, str] = {}

    def assign(node: _MergeNode, prefix: str) -> None:
        if node.children is None:
            entries[node.key] = prefix
            return
        for index, child in enumerate(node.children):
            assign(child, prefix + index_to_digit(index))

    assign(heap[0], "")
    avg = sum(prob_map[key] * len(code) for key, code in entries.items())
    return CodeTable(entries, prob_map, m, avg, entropy(prob_map.values(), m))


def brute_force_min_avg_length(probs, m: int) -> float:
    """Exhaustive minimum of sum(p * l) over Kraft-feasible m-ary depth multisets.

    Independent of the Huffman construction; only valid for n <= 10 symbols.
    ``probs`` may be a mapping or a plain sequence of probabilities.
    """
    values = list(probs.values()) if isinstance(probs, Mapping) else list(probs)
    n = len(values)
    if n > BRUTE_FORCE_MAX_N:
        raise ProbabilityError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {n}")
    if n == 0:
        raise ProbabilityError("distribution is empty")
    check_probabilities({str(i): p for i, p in enumerate(values)})
    if n == 1:
        return 0.0

    ps = sorted(values, reverse=True)
    suffix = [0.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + ps[i]
    max_depth = n - 1
    best = [float("inf")]

    # Depths are assigned non-decreasing to the descending probabilities
    # (rearrangement: any optimum has this form). Kraft bookkeeping is exact
    # via Fractions.
    def rec(i: int, min_depth: int, kraft, acc: float) -> None:
        if i == n:
            if acc < best[0]:
                best[0] = acc
            return
        remaining = n - i
        for depth in range(min_depth, max_depth + 1):
            # Every leaf still to place is at least this deep.
            if acc + suffix[i] * depth >= best[0]:
                break
            used = kraft + Fraction(1, m**depth)
            if used > 1:
                continue
            if used + (remaining - 1) * Fraction(1, m**max_depth) > 1:
                continue
            rec(i + 1, depth, used, acc + ps[i] * depth)

    rec(0, 1, Fraction(0), 0.0)
    return best[0]


def min_avg_length_for_depths(depths, probs) -> float:
    """Best assignment of the given depth multiset: big p onto small l."""
    ds = sorted(depths)
    ps = sorted(probs, reverse=True)
    if len(ds) != len(ps):
        raise ProbabilityError("depth and probability counts differ")
    return sum(p * d for p, d in zip(ps, ds))


def tree_from_codes(codes: CodeTable, payloads: Mapping[str, bytes] | None = None) -> AdaptiveTree:
    """Materialize the code table as a tree whose child indices spell each code.

    Requires prefix-free codes whose digits are contiguous at every node
    (0..k-1 with k >= 2), which the Huffman construction always produces.
    """
    entries = codes.entries
    if not is_prefix_free(entries.values()):
        raise StructureError("codes are not prefix-free")
    if len(entries) == 1:
        (key,) = entries
        if entries[key] != "":
            raise StructureError("a single symbol must carry the empty code")
        return AdaptiveTree.from_nested(
            key, {key: codes.probabilities[key]}, TreeConfig(codes.arity), payloads
        )

    def nest(prefix: str, items: list[tuple[str, str]]):
        if len(items) == 1 and items[0][1] == prefix:
            return items[0][0]
        by_digit: dict[int, list[tuple[str, str]]] = {}
        for key, code in items:
            if len(code) <= len(prefix):
                raise StructureError(f"code {code!r} collides with an internal position")
            index = digit_to_index(code[len(prefix)])
            if index >= codes.arity:
                raise StructureError(
                    f"digit {code[len(prefix)]!r} out of range for arity {codes.arity}"
                )
            by_digit.setdefault(index, []).append((key, code))
        if sorted(by_digit) != list(range(len(by_digit))):
            raise StructureError(f"non-contiguous child digits {sorted(by_digit)} under prefix {prefix!r}")
        if len(by_digit) < 2:
            raise StructureError(f"single-child node under prefix {prefix!r}")
        return [nest(prefix + index_to_digit(d), by_digit[d]) for d in sorted(by_digit)]

    nested = nest("", sorted(entries.items(), key=lambda kv: kv[1]))
    return AdaptiveTree.from_nested(nested, codes.probabilities, TreeConfig(codes.arity), payloads)


def codes_from_tree(tree: AdaptiveTree) -> dict[str, str]:
    """Read the path-digit code of every leaf back out of a tree."""
    return {key: tree.path_digits(key) for key in tree.leaf_keys()}


def export_csv(table: CodeTable, path) -> None:
    """Write ``key,probability,code,length`` rows (header included)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["key", "probability", "code", "length"])
        for key in sorted(table.entries):
            writer.writerow([key, repr(table.probabilities[key]), table.entries[key], len(table.entries[key])])


def load_csv(path) -> CodeTable:
    """Read a table written by :func:`export_csv`; arity inferred from digits."""
    entries: dict[str, str] = {}
    probabilities: dict[str, float] = {}
    max_digit = 1
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["key", "probability", "code", "length"]:
            raise FormatError(f"{path!s}: unexpected header {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 4:
                raise FormatError(f"{path!s}:{lineno}: expected 4 columns, got {len(row)}")
            key, prob_text, code, length_text = row
            if not is_code_string(code):
                raise FormatError(f"{path!s}:{lineno}: code {code!r} is not a digit string")
            if str(len(code)) != length_text:
                raise FormatError(f"{path!s}:{lineno}: length column disagrees with code")
            try:
                probabilities[key] = float(prob_text)
            except ValueError:
                raise FormatError(f"{path!s}:{lineno}: bad probability {prob_text!r}") from None
            entries[key] = code
            max_digit = max([max_digit] + [digit_to_index(c) + 1 for c in code])
    avg = sum(probabilities[k] * len(c) for k, c in entries.items())
    table = CodeTable(entries, probabilities, max(2, max_digit), avg, entropy(probabilities.values(), max(2, max_digit)))
    table.validate()
    return table
