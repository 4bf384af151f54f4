"""Shared domain types for vessel graphs and the binary component trees.

Everything here is immutable after construction; tree edits build new trees.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional


class Region(enum.Enum):
    BACK = "B"
    LEFT = "L"
    RIGHT = "R"
    FRONT = "F"

    @classmethod
    def from_code(cls, code: str) -> "Region":
        try:
            return cls(code)
        except ValueError:
            raise ValueError(f"unknown region code {code!r} (expected B, L, R or F)")

    @property
    def label(self) -> str:
        return self.name.capitalize()


class UnknownNodeError(KeyError):
    """A node reference does not exist in the tree it was used against."""


@dataclass(frozen=True)
class VesselPoint:
    x: float
    y: float
    z: float
    radius: float

    def __post_init__(self):
        for v in (self.x, self.y, self.z, self.radius):
            if not math.isfinite(v):
                raise ValueError(f"non-finite coordinate/radius in {self!r}")
        if self.radius <= 0:
            raise ValueError(f"radius must be > 0, got {self.radius}")


@dataclass(frozen=True)
class VesselSegment:
    segment_id: str
    points: tuple[VesselPoint, ...]

    def __post_init__(self):
        if len(self.points) < 2:
            raise ValueError(f"segment {self.segment_id!r} needs >= 2 points")


@dataclass(frozen=True)
class RawVesselGraph:
    """Forest of vessel segments for one subject/region."""

    subject_id: str
    region: Region
    segments: dict[str, VesselSegment]
    edges: frozenset[tuple[str, str]]  # (parent_sid, child_sid)
    roots: tuple[str, ...]

    def children_of(self, sid: str) -> list[str]:
        return sorted((c for p, c in self.edges if p == sid), key=_id_sort_key)

    def validate(self) -> None:
        parent: dict[str, str] = {}
        for p, c in self.edges:
            if p not in self.segments or c not in self.segments:
                raise ValueError(f"edge ({p}, {c}) references unknown segment")
            if c in parent:
                raise ValueError(f"segment {c!r} has more than one parent")
            parent[c] = p
        if not self.roots:
            raise ValueError("graph has no roots")
        for r in self.roots:
            if r not in self.segments:
                raise ValueError(f"root {r!r} is not a declared segment")
            if r in parent:
                raise ValueError(f"root {r!r} has a parent")
        # cycle + reachability: every segment reachable from exactly one root
        seen: set[str] = set()
        children: dict[str, list[str]] = {}
        for p, c in self.edges:
            children.setdefault(p, []).append(c)
        for r in self.roots:
            stack = [r]
            while stack:
                s = stack.pop()
                if s in seen:
                    raise ValueError(f"segment {s!r} reachable twice (cycle or shared)")
                seen.add(s)
                stack.extend(children.get(s, ()))
        unreachable = set(self.segments) - seen
        if unreachable:
            raise ValueError(f"segments not reachable from any root: {sorted(unreachable)}")


def _id_sort_key(sid: str):
    # numeric ids sort numerically, everything else lexicographically after
    return (0, int(sid), "") if sid.isdigit() else (1, 0, sid)


@dataclass(frozen=True)
class BinaryNode:
    """One vessel trunk between two split points.

    thickness is the trunk's median diameter in mm; None only for the
    phantom root joining two root vessels.
    """

    node_id: str
    thickness: Optional[float]
    left: Optional["BinaryNode"] = None
    right: Optional["BinaryNode"] = None

    def __post_init__(self):
        if self.thickness is not None and self.thickness < 0:
            raise ValueError(f"negative thickness on node {self.node_id!r}")

    @property
    def children(self) -> tuple["BinaryNode", ...]:
        return tuple(c for c in (self.left, self.right) if c is not None)

    @property
    def is_leaf(self) -> bool:
        return self.left is None and self.right is None


@dataclass(frozen=True)
class BinaryTree:
    subject_id: str
    region: Region
    root: BinaryNode
    node_count: int = field(default=0)

    def __post_init__(self):
        index: dict[str, BinaryNode] = {}
        parents: dict[str, Optional[str]] = {self.root.node_id: None}
        for node in _iter_preorder(self.root):
            if node.node_id in index:
                raise ValueError(f"duplicate node_id {node.node_id!r}")
            index[node.node_id] = node
            for c in node.children:
                parents[c.node_id] = node.node_id
        if self.node_count == 0:
            object.__setattr__(self, "node_count", len(index))
        elif self.node_count != len(index):
            raise ValueError(
                f"node_count {self.node_count} != reachable nodes {len(index)}"
            )
        if self.root.thickness is None and len(self.root.children) != 2:
            raise ValueError("phantom root must have exactly 2 children")
        for node in index.values():
            if node is not self.root and node.thickness is None:
                raise ValueError(f"non-root node {node.node_id!r} lacks thickness")
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_parent", parents)

    def node(self, node_id: str) -> BinaryNode:
        try:
            return self._index[node_id]
        except KeyError:
            raise UnknownNodeError(
                f"node {node_id!r} not in tree {self.subject_id}/{self.region.value}"
            )

    def __contains__(self, node_id: str) -> bool:
        return node_id in self._index

    def parent_id(self, node_id: str) -> Optional[str]:
        self.node(node_id)
        return self._parent[node_id]

    def nodes(self) -> Iterator[BinaryNode]:
        """Pre-order traversal, left before right."""
        return _iter_preorder(self.root)


def _iter_preorder(node: BinaryNode) -> Iterator[BinaryNode]:
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        if n.right is not None:
            stack.append(n.right)
        if n.left is not None:
            stack.append(n.left)


def descendant_count(tree: BinaryTree, node_id: str) -> int:
    """Number of proper descendants of the node (the node itself excluded)."""
    node = tree.node(node_id)
    return sum(1 for _ in _iter_preorder(node)) - 1


def node_level(tree: BinaryTree, node_id: str) -> int:
    """Depth of the node; the root sits at level 0."""
    tree.node(node_id)
    level = 0
    cur = tree.parent_id(node_id)
    while cur is not None:
        level += 1
        cur = tree.parent_id(cur)
    return level


@dataclass(frozen=True)
class CorpusEntry:
    tree: BinaryTree
    covariate: Optional[float] = None

    def __post_init__(self):
        if self.covariate is not None and not math.isfinite(self.covariate):
            raise ValueError("covariate must be finite")
