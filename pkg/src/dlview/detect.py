"""Threshold-rule detectors for the three known discrepancy classes:

* misconnection - a subtree suddenly much thicker than its parent trunk,
* starting point - a spine of thick nodes right at the root,
* vein - a leaf thicker than the artery it hangs off.

Detectors only flag; they never modify trees.  Jumps within the
measurement-error tolerance epsilon are left alone.
"""

from __future__ import annotations

import enum
import statistics
from dataclasses import dataclass

from .core import BinaryNode, BinaryTree


class FlagKind(enum.Enum):
    MISCONNECTION = "Misconnection"
    STARTING_POINT = "StartingPoint"
    VEIN = "Vein"


@dataclass(frozen=True)
class DetectorConfig:
    epsilon_mm: float = 0.3
    misconnection_min_subtree: int = 3
    startpoint_thick_mm: float = 3.0
    startpoint_min_chain: int = 3

    def __post_init__(self):
        if (self.epsilon_mm <= 0 or self.misconnection_min_subtree <= 0
                or self.startpoint_thick_mm <= 0 or self.startpoint_min_chain <= 0):
            raise ValueError("detector thresholds must be positive")


@dataclass(frozen=True)
class FlagRecord:
    subject_id: str
    region_code: str
    kind: FlagKind
    node_id: str
    severity: float  # mm of excess


def _subtree_values(node: BinaryNode) -> list[float]:
    vals = []
    stack = [node]
    while stack:
        n = stack.pop()
        if n.thickness is not None:
            vals.append(n.thickness)
        stack.extend(n.children)
    return vals


def detect_misconnection(tree: BinaryTree, config: DetectorConfig = DetectorConfig()):
    """Flag maximal nodes whose subtree median thickness jumps above the parent."""
    flags = []

    def walk(node: BinaryNode, parent: BinaryNode | None):
        if parent is not None and parent.thickness is not None:
            vals = _subtree_values(node)
            if len(vals) >= config.misconnection_min_subtree:
                med = statistics.median(vals)
                excess = med - parent.thickness - config.epsilon_mm
                if excess > 0:
                    flags.append(FlagRecord(
                        tree.subject_id, tree.region.value,
                        FlagKind.MISCONNECTION, node.node_id,
                        med - parent.thickness,
                    ))
                    return  # maximal node only; descendants not re-reported
        for child in node.children:
            walk(child, node)

    walk(tree.root, None)
    return flags


def _heavy_path(tree: BinaryTree):
    """Root-to-leaf path always descending into the child with more descendants."""
    sizes: dict[str, int] = {}

    def size(node: BinaryNode) -> int:
        s = 1 + sum(size(c) for c in node.children)
        sizes[node.node_id] = s
        return s

    size(tree.root)
    path = []
    node = tree.root
    while node is not None:
        path.append(node)
        kids = node.children
        if not kids:
            break
        node = max(kids, key=lambda c: (sizes[c.node_id], c is node.left))
    return path


def detect_starting_point(tree: BinaryTree, config: DetectorConfig = DetectorConfig()):
    """Flag the root when its heavy path starts with a chain of thick nodes."""
    path = _heavy_path(tree)
    if path and path[0].thickness is None:  # phantom root carries no thickness
        path = path[1:]
    chain = []
    for node in path:
        if node.thickness is not None and node.thickness >= config.startpoint_thick_mm:
            chain.append(node.thickness)
        else:
            break
    if len(chain) < config.startpoint_min_chain:
        return []
    mean_excess = statistics.fmean(t - config.startpoint_thick_mm for t in chain)
    return [FlagRecord(
        tree.subject_id, tree.region.value, FlagKind.STARTING_POINT,
        tree.root.node_id, len(chain) * mean_excess,
    )]


def detect_vein(tree: BinaryTree, config: DetectorConfig = DetectorConfig()):
    """Flag leaves thicker than their parent beyond the error tolerance."""
    flags = []
    for node in tree.nodes():
        if node.thickness is None:
            continue
        for child in node.children:
            if child.is_leaf and child.thickness > node.thickness + config.epsilon_mm:
                flags.append(FlagRecord(
                    tree.subject_id, tree.region.value, FlagKind.VEIN,
                    child.node_id, child.thickness - node.thickness,
                ))
    return flags


_KIND_ORDER = {FlagKind.MISCONNECTION: 0, FlagKind.STARTING_POINT: 1, FlagKind.VEIN: 2}


def scan_tree(tree: BinaryTree, config: DetectorConfig = DetectorConfig()):
    flags = (detect_misconnection(tree, config)
             + detect_starting_point(tree, config)
             + detect_vein(tree, config))
    flags.sort(key=lambda f: (_KIND_ORDER[f.kind], f.node_id))
    return flags


def flags_to_tsv(flags) -> str:
    lines = ["subject\tregion\tkind\tnode\tseverity"]
    for f in flags:
        lines.append(
            f"{f.subject_id}\t{f.region_code}\t{f.kind.value}\t{f.node_id}\t{f.severity:.4f}"
        )
    return "\n".join(lines) + "\n"


def flags_from_tsv(text: str) -> list[FlagRecord]:
    records = []
    for i, line in enumerate(text.splitlines()):
        if not line.strip() or (i == 0 and line.startswith("subject\t")):
            continue
        subject, region, kind, node, severity = line.split("\t")
        records.append(FlagRecord(subject, region, FlagKind(kind), node, float(severity)))
    return records
