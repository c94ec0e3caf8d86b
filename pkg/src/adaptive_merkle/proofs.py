"""Membership proofs over unbalanced m-ary trees.

Because node positions cannot be inferred from a leaf index in an unbalanced
tree, every proof step records the path node's child position in its parent
alongside the (index, digest) pairs of all other children. Steps run from
the leaf to the root.

Wire format (canonical JSON, no whitespace)::

    {"key": ..., "leaf_hash_hex": ...,
     "steps": [{"position": i, "siblings": [{"index": j, "hash_hex": ...}]}]}

``proof_bytes`` is defined as the byte length of exactly that encoding.
Structural defects (bad indices, wrong digest sizes) raise
:class:`MalformedProofError`; a clean ``False`` from :func:`verify` always
means the data genuinely fails to reproduce the expected root.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import MalformedProofError
from .tree import HASH_SIZE, AdaptiveTree, hash_internal


@dataclass(frozen=True)
class ProofStep:
    position: int
    siblings: tuple[tuple[int, bytes], ...]


@dataclass(frozen=True)
class MerkleProof:
    key: str
    leaf_hash: bytes
    steps: tuple[ProofStep, ...]

    def to_json_dict(self) -> dict:
        return {
            "key": self.key,
            "leaf_hash_hex": self.leaf_hash.hex(),
            "steps": [
                {
                    "position": step.position,
                    "siblings": [{"index": i, "hash_hex": h.hex()} for i, h in step.siblings],
                }
                for step in self.steps
            ],
        }

    def to_json_bytes(self) -> bytes:
        return json.dumps(self.to_json_dict(), separators=(",", ":")).encode("utf-8")

    @classmethod
    def from_json_dict(cls, data: dict) -> "MerkleProof":
        try:
            key = data["key"]
            leaf_hash = bytes.fromhex(data["leaf_hash_hex"])
            steps = tuple(
                ProofStep(
                    int(step["position"]),
                    tuple((int(s["index"]), bytes.fromhex(s["hash_hex"])) for s in step["siblings"]),
                )
                for step in data["steps"]
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedProofError(f"unparseable proof: {exc}") from None
        return cls(key, leaf_hash, steps)


@dataclass(frozen=True)
class VerificationCost:
    hash_invocations: int
    proof_bytes: int


def prove(tree: AdaptiveTree, leaf_key: str) -> MerkleProof:
    """Membership proof for a leaf: one step per edge on its root path."""
    leaf = tree.leaf_node(leaf_key)
    steps: list[ProofStep] = []
    nid = leaf.node_id
    while nid != tree.root_id:
        parent = tree.node(tree.parent_id(nid))
        position = parent.children.index(nid)
        siblings = tuple(
            (i, tree.node(cid).hash) for i, cid in enumerate(parent.children) if i != position
        )
        steps.append(ProofStep(position, siblings))
        nid = parent.node_id
    return MerkleProof(leaf_key, leaf.hash, tuple(steps))


def _check_step(step: ProofStep, arity: int) -> None:
    if not 0 <= step.position < arity:
        raise MalformedProofError(f"position {step.position} out of range for arity {arity}")
    seen = {step.position}
    for index, digest in step.siblings:
        if not 0 <= index < arity:
            raise MalformedProofError(f"sibling index {index} out of range for arity {arity}")
        if index in seen:
            raise MalformedProofError(f"duplicate child index {index} in proof step")
        seen.add(index)
        if len(digest) != HASH_SIZE:
            raise MalformedProofError(f"sibling digest of {len(digest)} bytes, expected {HASH_SIZE}")


def verify(proof: MerkleProof, expected_root: bytes, arity: int) -> bool:
    """Fold the leaf hash through all steps and compare against the root.

    Raises :class:`MalformedProofError` for structural defects; returns
    ``False`` only for an honest mismatch.
    """
    if len(proof.leaf_hash) != HASH_SIZE:
        raise MalformedProofError(f"leaf hash of {len(proof.leaf_hash)} bytes, expected {HASH_SIZE}")
    if len(expected_root) != HASH_SIZE:
        raise MalformedProofError(f"root hash of {len(expected_root)} bytes, expected {HASH_SIZE}")
    current = proof.leaf_hash
    for step in proof.steps:
        _check_step(step, arity)
        ordered = sorted([(step.position, current)] + list(step.siblings))
        current = hash_internal(digest for _, digest in ordered)
    return current == expected_root


def verification_cost(proof: MerkleProof) -> VerificationCost:
    """Hash invocations (= steps) and canonical wire size of a proof."""
    return VerificationCost(
        hash_invocations=len(proof.steps),
        proof_bytes=len(proof.to_json_bytes()),
    )
