"""Adaptive m-ary Merkle tree.

An :class:`AdaptiveTree` stores key/payload leaves in an m-ary hash tree
together with a per-leaf access probability. The tree starts balanced and is
reshaped incrementally (leaf splits, leaf attachments, leaf swaps) so that
frequently accessed leaves end up on short root paths. Hashing uses SHA-256
with one byte of domain separation: ``0x00`` for leaves, ``0x01`` for
internal nodes.

Mutations rehash only the affected root path(s); everything else is left
untouched. The tree follows a single-writer contract: mutating calls need
exclusive access, reads may interleave freely between mutations.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import (
    DuplicateKeyError,
    FormatError,
    ProbabilityError,
    StructureError,
    UnknownKeyError,
)

HASH_ALGORITHM = "sha-256"
HASH_SIZE = 32
PROB_SUM_TOL = 1e-9

_LEAF_PREFIX = b"\x00"
_INTERNAL_PREFIX = b"\x01"

# Path encodings use one character per level: 0-9 then a-z, so arity 16
# yields nibble-style codes. Caps code-producing operations at arity 36.
CODE_ALPHABET = "0123456789abcdefghijklmnopqrstuvwxyz"


def index_to_digit(index: int) -> str:
    if not 0 <= index < len(CODE_ALPHABET):
        raise StructureError(f"child index {index} exceeds the code alphabet")
    return CODE_ALPHABET[index]


def digit_to_index(digit: str) -> int:
    index = CODE_ALPHABET.find(digit)
    if index < 0:
        raise StructureError(f"{digit!r} is not a code digit")
    return index


def hash_leaf(key: str, payload: bytes) -> bytes:
    """SHA-256 of ``0x00 || key bytes || payload``."""
    return hashlib.sha256(_LEAF_PREFIX + key.encode("utf-8") + payload).digest()


def hash_internal(child_hashes: Iterable[bytes]) -> bytes:
    """SHA-256 of ``0x01 || child hashes`` in child order."""
    h = hashlib.sha256(_INTERNAL_PREFIX)
    for digest in child_hashes:
        h.update(digest)
    return h.digest()


def check_probabilities(probs: Mapping[str, float], *, require_sum: bool = True) -> None:
    """Reject negative values and (optionally) sums off 1 by more than 1e-9."""
    for key, p in probs.items():
        if p < 0.0:
            raise ProbabilityError(f"negative probability {p!r} for key {key!r}")
    if require_sum:
        total = sum(probs.values())
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ProbabilityError(f"probabilities sum to {total!r}, expected 1 +/- {PROB_SUM_TOL}")


@dataclass(frozen=True)
class TreeConfig:
    """Tree-wide parameters: arity m (max children per node) and hash choice."""

    arity: int
    hash_algorithm: str = HASH_ALGORITHM

    def __post_init__(self) -> None:
        if self.arity < 2:
            raise StructureError(f"arity must be >= 2, got {self.arity}")
        if self.hash_algorithm != HASH_ALGORITHM:
            raise StructureError(f"unsupported hash algorithm {self.hash_algorithm!r}")


@dataclass
class TreeNode:
    """One node. Leaves carry ``key``/``payload``; internals carry ``children``."""

    node_id: str
    hash: bytes
    children: list[str] | None = None
    key: str | None = None
    payload: bytes | None = None

    @property
    def is_leaf(self) -> bool:
        return self.children is None


class AdaptiveTree:
    """m-ary Merkle tree with per-leaf probabilities and restructuring support.

    Build instances with :func:`build_balanced`, :meth:`from_nested`, or
    :meth:`load`; do not instantiate nodes by hand.
    """

    def __init__(self, config: TreeConfig) -> None:
        self.config = config
        self.root_id: str = ""
        self.nodes: dict[str, TreeNode] = {}
        self.probabilities: dict[str, float] = {}
        self._parent: dict[str, str] = {}
        self._leaf_by_key: dict[str, str] = {}
        self._next_id = 1

    # -- construction helpers -------------------------------------------------

    def _new_id(self) -> str:
        node_id = f"n{self._next_id}"
        self._next_id += 1
        return node_id

    def _add_leaf_node(self, key: str, payload: bytes) -> TreeNode:
        if key in self._leaf_by_key:
            raise DuplicateKeyError(f"leaf key {key!r} already present")
        node = TreeNode(self._new_id(), hash_leaf(key, payload), key=key, payload=payload)
        self.nodes[node.node_id] = node
        self._leaf_by_key[key] = node.node_id
        return node

    def _add_internal_node(self, child_ids: list[str]) -> TreeNode:
        digest = hash_internal(self.nodes[cid].hash for cid in child_ids)
        node = TreeNode(self._new_id(), digest, children=list(child_ids))
        self.nodes[node.node_id] = node
        for cid in child_ids:
            self._parent[cid] = node.node_id
        return node

    @classmethod
    def from_nested(
        cls,
        nested,
        probabilities: Mapping[str, float],
        config: TreeConfig,
        payloads: Mapping[str, bytes] | None = None,
    ) -> "AdaptiveTree":
        """Build a tree from a nested-list shape.

        ``nested`` is a leaf key (string) or a list of nested shapes, e.g.
        ``["A", [["B", "D"], ["C", "E"]]]``. Payloads default to the UTF-8
        key bytes.
        """
        tree = cls(config)

        def build(spec) -> str:
            if isinstance(spec, str):
                payload = payloads[spec] if payloads is not None else spec.encode("utf-8")
                return tree._add_leaf_node(spec, payload).node_id
            if not 1 <= len(spec) <= config.arity:
                raise StructureError(f"internal node with {len(spec)} children (arity {config.arity})")
            if len(spec) == 1:
                raise StructureError("single-child internal nodes are not allowed in a finished tree")
            return tree._add_internal_node([build(child) for child in spec]).node_id

        tree.root_id = build(nested)
        tree.set_probabilities(probabilities)
        return tree

    # -- basic queries ---------------------------------------------------------

    def node(self, node_id: str) -> TreeNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownKeyError(f"no node with id {node_id!r}") from None

    def leaf_node(self, key: str) -> TreeNode:
        try:
            return self.nodes[self._leaf_by_key[key]]
        except KeyError:
            raise UnknownKeyError(f"no leaf with key {key!r}") from None

    def parent_id(self, node_id: str) -> str | None:
        return self._parent.get(node_id)

    def leaf_keys(self) -> list[str]:
        """Leaf keys in left-to-right tree order."""
        return [self.nodes[nid].key for nid in self._iter_preorder() if self.nodes[nid].is_leaf]

    def leaf_count(self) -> int:
        return len(self._leaf_by_key)

    def _iter_preorder(self) -> Iterator[str]:
        stack = [self.root_id]
        while stack:
            nid = stack.pop()
            yield nid
            node = self.nodes[nid]
            if node.children is not None:
                stack.extend(reversed(node.children))

    def depth(self, key: str) -> int:
        """Edge count from the root to the leaf holding ``key``."""
        nid = self.leaf_node(key).node_id
        depth = 0
        while nid != self.root_id:
            nid = self._parent[nid]
            depth += 1
        return depth

    def depths(self) -> dict[str, int]:
        """Depth of every leaf, computed in one root-down walk."""
        out: dict[str, int] = {}
        stack = [(self.root_id, 0)]
        while stack:
            nid, d = stack.pop()
            node = self.nodes[nid]
            if node.is_leaf:
                out[node.key] = d
            else:
                stack.extend((cid, d + 1) for cid in node.children)
        return out

    def kraft_sum(self) -> float:
        m = self.config.arity
        return sum(m ** -d for d in self.depths().values())

    def path_digits(self, key: str) -> str:
        """Child indices along the root-to-leaf path, one code digit per level."""
        nid = self.leaf_node(key).node_id
        digits: list[str] = []
        while nid != self.root_id:
            pid = self._parent[nid]
            digits.append(index_to_digit(self.nodes[pid].children.index(nid)))
            nid = pid
        return "".join(reversed(digits))

    def root_hash(self) -> bytes:
        """Root digest. A pure function of structure, keys, and payloads."""
        return self.nodes[self.root_id].hash

    def open_internal_ids(self) -> list[str]:
        """Internal nodes with fewer than m children, in preorder."""
        m = self.config.arity
        return [
            nid
            for nid in self._iter_preorder()
            if not self.nodes[nid].is_leaf and len(self.nodes[nid].children) < m
        ]

    def subtree_min_key(self, node_id: str) -> str:
        """Smallest leaf key under ``node_id``; used for deterministic ordering."""
        best: str | None = None
        stack = [node_id]
        while stack:
            node = self.node(stack.pop())
            if node.is_leaf:
                if best is None or node.key < best:
                    best = node.key
            else:
                stack.extend(node.children)
        return best

    # -- mutations -------------------------------------------------------------

    def _rehash_path(self, node_id: str) -> None:
        # Recompute exactly the hashes from node_id up to the root.
        nid: str | None = node_id
        while nid is not None:
            node = self.nodes[nid]
            if not node.is_leaf:
                node.hash = hash_internal(self.nodes[cid].hash for cid in node.children)
            nid = self._parent.get(nid)

    def split_leaf(self, target_key: str, new_key: str, new_payload: bytes) -> None:
        """Replace the target leaf with an internal node over [target, new leaf].

        The target's depth grows by exactly one; every other depth is
        unchanged. The new leaf starts with probability 0; callers normally
        follow up with :meth:`set_probabilities`.
        """
        target = self.leaf_node(target_key)
        if new_key in self._leaf_by_key:
            raise DuplicateKeyError(f"leaf key {new_key!r} already present")
        parent_id = self._parent.get(target.node_id)
        new_leaf = self._add_leaf_node(new_key, new_payload)
        intermediate = self._add_internal_node([target.node_id, new_leaf.node_id])
        if parent_id is None:
            self.root_id = intermediate.node_id
        else:
            parent = self.nodes[parent_id]
            parent.children[parent.children.index(target.node_id)] = intermediate.node_id
            self._parent[intermediate.node_id] = parent_id
            self._rehash_path(parent_id)
        self.probabilities[new_key] = 0.0

    def attach_leaf(self, parent_id: str, new_key: str, new_payload: bytes) -> None:
        """Append a new leaf as the last child of an internal node with room.

        No existing depth changes. The new leaf starts with probability 0.
        """
        parent = self.node(parent_id)
        if parent.is_leaf:
            raise StructureError(f"cannot attach to leaf node {parent_id!r}")
        if len(parent.children) >= self.config.arity:
            raise StructureError(f"node {parent_id!r} already has {self.config.arity} children")
        if new_key in self._leaf_by_key:
            raise DuplicateKeyError(f"leaf key {new_key!r} already present")
        new_leaf = self._add_leaf_node(new_key, new_payload)
        parent.children.append(new_leaf.node_id)
        self._parent[new_leaf.node_id] = parent_id
        self._rehash_path(parent_id)
        self.probabilities[new_key] = 0.0

    def swap_leaves(self, key_a: str, key_b: str) -> None:
        """Exchange the tree positions of two leaves.

        Depths of the two leaves trade places; the depth multiset and all
        probabilities are unchanged. Both root paths are rehashed.
        """
        if key_a == key_b:
            raise StructureError(f"cannot swap leaf {key_a!r} with itself")
        node_a = self.leaf_node(key_a)
        node_b = self.leaf_node(key_b)
        parent_a = self._parent.get(node_a.node_id)
        parent_b = self._parent.get(node_b.node_id)
        if parent_a is None or parent_b is None:
            raise StructureError("cannot swap the root leaf")
        slot_a = self.nodes[parent_a].children.index(node_a.node_id)
        slot_b = self.nodes[parent_b].children.index(node_b.node_id)
        self.nodes[parent_a].children[slot_a] = node_b.node_id
        self.nodes[parent_b].children[slot_b] = node_a.node_id
        self._parent[node_a.node_id] = parent_b
        self._parent[node_b.node_id] = parent_a
        self._rehash_path(parent_a)
        self._rehash_path(parent_b)

    def set_probabilities(self, probs: Mapping[str, float]) -> None:
        """Replace the leaf probability map; structure and hashes are untouched."""
        if set(probs) != set(self._leaf_by_key):
            missing = set(self._leaf_by_key) - set(probs)
            extra = set(probs) - set(self._leaf_by_key)
            raise ProbabilityError(
                f"probability keys do not match tree leaves (missing {sorted(missing)}, extra {sorted(extra)})"
            )
        check_probabilities(probs)
        self.probabilities = {key: float(p) for key, p in probs.items()}

    def require_probability_sum(self) -> None:
        """Raise unless stored probabilities currently sum to 1 +/- 1e-9."""
        check_probabilities(self.probabilities)

    # -- copying / integrity ----------------------------------------------------

    def clone(self) -> "AdaptiveTree":
        """Independent copy; mutations on the clone never touch the original."""
        other = AdaptiveTree(self.config)
        other.root_id = self.root_id
        other.nodes = {
            nid: TreeNode(
                node.node_id,
                node.hash,
                children=None if node.children is None else list(node.children),
                key=node.key,
                payload=node.payload,
            )
            for nid, node in self.nodes.items()
        }
        other.probabilities = dict(self.probabilities)
        other._parent = dict(self._parent)
        other._leaf_by_key = dict(self._leaf_by_key)
        other._next_id = self._next_id
        return other

    def recompute_all_hashes(self) -> None:
        """Full bottom-up rehash; used to cross-check incremental updates."""

        def rec(nid: str) -> bytes:
            node = self.nodes[nid]
            if node.is_leaf:
                node.hash = hash_leaf(node.key, node.payload)
            else:
                node.hash = hash_internal([rec(cid) for cid in node.children])
            return node.hash

        rec(self.root_id)

    def validate(self) -> None:
        """Structural self-check: tree shape, child bounds, key/probability maps."""
        if self.root_id not in self.nodes:
            raise StructureError("root id not present in node map")
        seen: set[str] = set()
        for nid in self._iter_preorder():
            if nid in seen:
                raise StructureError(f"node {nid!r} reachable more than once")
            seen.add(nid)
            node = self.nodes[nid]
            if node.is_leaf:
                if node.key is None or node.payload is None:
                    raise StructureError(f"leaf {nid!r} missing key or payload")
            else:
                n = len(node.children)
                if not 1 <= n <= self.config.arity:
                    raise StructureError(f"node {nid!r} has {n} children (arity {self.config.arity})")
                if n == 1:
                    raise StructureError(f"node {nid!r} has a single child in a finished tree")
                for cid in node.children:
                    if self._parent.get(cid) != nid:
                        raise StructureError(f"parent pointer of {cid!r} is inconsistent")
        if seen != set(self.nodes):
            raise StructureError("unreachable nodes present")
        if self.root_id in self._parent:
            raise StructureError("root must not have a parent")
        leaf_keys = {node.key for node in self.nodes.values() if node.is_leaf}
        if leaf_keys != set(self._leaf_by_key):
            raise StructureError("leaf key index out of sync")
        if set(self.probabilities) != leaf_keys:
            raise StructureError("probability map does not cover exactly the leaf keys")

    # -- snapshots ---------------------------------------------------------------

    def to_snapshot(self) -> dict:
        """JSON-ready snapshot; nodes listed in preorder, hashes as hex."""
        nodes = []
        for nid in self._iter_preorder():
            node = self.nodes[nid]
            if node.is_leaf:
                nodes.append(
                    {
                        "id": nid,
                        "kind": "leaf",
                        "key": node.key,
                        "payload_hex": node.payload.hex(),
                        "hash_hex": node.hash.hex(),
                    }
                )
            else:
                nodes.append(
                    {
                        "id": nid,
                        "kind": "internal",
                        "children": list(node.children),
                        "hash_hex": node.hash.hex(),
                    }
                )
        return {
            "config": {"arity": self.config.arity, "hash": self.config.hash_algorithm},
            "nodes": nodes,
            "root_id": self.root_id,
            "probabilities": dict(sorted(self.probabilities.items())),
        }

    @classmethod
    def from_snapshot(cls, snapshot: dict) -> "AdaptiveTree":
        """Rebuild a tree from a snapshot, re-deriving and checking every hash."""
        try:
            config = TreeConfig(int(snapshot["config"]["arity"]), snapshot["config"]["hash"])
            node_specs = snapshot["nodes"]
            root_id = snapshot["root_id"]
            probabilities = snapshot["probabilities"]
        except (KeyError, TypeError) as exc:
            raise FormatError(f"snapshot missing required field: {exc}") from None

        tree = cls(config)
        tree.root_id = root_id
        max_suffix = 0
        for spec in node_specs:
            nid = spec["id"]
            if nid in tree.nodes:
                raise StructureError(f"duplicate node id {nid!r} in snapshot")
            if spec["kind"] == "leaf":
                key = spec["key"]
                payload = bytes.fromhex(spec["payload_hex"])
                if key in tree._leaf_by_key:
                    raise DuplicateKeyError(f"duplicate leaf key {key!r} in snapshot")
                node = TreeNode(nid, hash_leaf(key, payload), key=key, payload=payload)
                tree._leaf_by_key[key] = nid
            elif spec["kind"] == "internal":
                node = TreeNode(nid, b"", children=list(spec["children"]))
            else:
                raise FormatError(f"unknown node kind {spec['kind']!r}")
            tree.nodes[nid] = node
            if nid.startswith("n") and nid[1:].isdigit():
                max_suffix = max(max_suffix, int(nid[1:]))
        tree._next_id = max_suffix + 1

        for node in tree.nodes.values():
            if node.children is not None:
                for cid in node.children:
                    if cid not in tree.nodes:
                        raise StructureError(f"child id {cid!r} not present in snapshot")
                    if cid in tree._parent:
                        raise StructureError(f"node {cid!r} has two parents")
                    tree._parent[cid] = node.node_id

        tree.probabilities = {str(k): float(p) for k, p in probabilities.items()}
        check_probabilities(tree.probabilities, require_sum=False)
        tree.validate()
        tree.recompute_all_hashes()
        for spec in node_specs:
            if tree.nodes[spec["id"]].hash.hex() != spec["hash_hex"]:
                raise StructureError(f"hash mismatch for node {spec['id']!r} in snapshot")
        return tree

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_snapshot(), fh, indent=2, sort_keys=False)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "AdaptiveTree":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                snapshot = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"snapshot {path!s} is not valid JSON: {exc}") from None
        return cls.from_snapshot(snapshot)


def build_balanced(
    leaves: Sequence[tuple[str, bytes, float]],
    config: TreeConfig,
) -> AdaptiveTree:
    """Build a complete-as-possible m-ary tree over ``(key, payload, p)`` triples.

    Leaf order is preserved left to right and surplus leaves are spread evenly,
    so n = m^d leaves all land at depth d and other counts differ by at most
    one level.
    """
    if not leaves:
        raise StructureError("cannot build a tree over an empty leaf list")
    keys = [key for key, _, _ in leaves]
    if len(set(keys)) != len(keys):
        raise DuplicateKeyError("duplicate leaf keys in input")
    probs = {key: p for key, _, p in leaves}
    check_probabilities(probs)

    tree = AdaptiveTree(config)
    m = config.arity

    def build(chunk: Sequence[tuple[str, bytes, float]]) -> str:
        if len(chunk) == 1:
            key, payload, _ = chunk[0]
            return tree._add_leaf_node(key, payload).node_id
        if len(chunk) <= m:
            return tree._add_internal_node([build([item]) for item in chunk]).node_id
        q, r = divmod(len(chunk), m)
        child_ids = []
        start = 0
        for i in range(m):
            size = q + 1 if i < r else q
            child_ids.append(build(chunk[start : start + size]))
            start += size
        return tree._add_internal_node(child_ids).node_id

    tree.root_id = build(list(leaves))
    tree.probabilities = {key: float(p) for key, p in probs.items()}
    return tree
