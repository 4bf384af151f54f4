"""Synthetic vessel-tree corpora with known ground truth.

Clean trees branch with a level-decaying probability and thin monotonically
toward the leaves, so the default detectors stay silent on them by
construction.  Anomalies are injected with a 5x-epsilon margin so that the
injected locus is unambiguous, and each injection reports the ground-truth
node for recall/precision checks.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from .core import BinaryNode, BinaryTree, CorpusEntry, Region
from .detect import DetectorConfig, FlagKind


@dataclass(frozen=True)
class GenParams:
    p0: float = 0.95           # branching probability at the root level
    decay: float = 0.05        # linear decay of branching probability per level
    t0: float = 3.8            # root trunk thickness, mm
    shrink_lo: float = 0.80
    shrink_hi: float = 0.95
    noise: float = 0.1         # downward additive noise, kept < epsilon/2
    thin_floor: float = 0.05   # thickness never drops below this, mm
    deep_cap_level: int = 2    # from this level thickness is capped ...
    deep_cap_mm: float = 2.9   # ... below the starting-point threshold

    def __post_init__(self):
        # p0 may exceed 1; the per-level probability is clamped into [0, 1]
        if self.p0 < 0.0 or self.decay < 0:
            raise ValueError("branching parameters out of range")
        if not (0.0 < self.shrink_lo <= self.shrink_hi < 1.0):
            raise ValueError("shrink range must sit inside (0, 1)")
        if self.t0 <= 0 or self.noise < 0:
            raise ValueError("t0 must be positive, noise non-negative")


def _branch_p(params: GenParams, level: int) -> float:
    return min(max(params.p0 - params.decay * level, 0.0), 1.0)


def generate_tree(params: GenParams, seed: int, subject_id: str = "synth",
                  region: Region = Region.BACK) -> BinaryTree:
    rng = random.Random(seed)
    counter = [0]

    def fresh() -> str:
        counter[0] += 1
        return f"n{counter[0]}"

    def grow(level: int, thickness: float) -> BinaryNode:
        nid = fresh()
        if rng.random() < _branch_p(params, level):
            kids = [grow(level + 1, _child_thickness(rng, params, thickness, level + 1))
                    for _ in range(2)]
            return BinaryNode(nid, thickness, kids[0], kids[1])
        return BinaryNode(nid, thickness)

    root = grow(0, params.t0)
    return BinaryTree(subject_id, region, root)


def _child_thickness(rng, params: GenParams, parent_t: float, level: int) -> float:
    s = rng.uniform(params.shrink_lo, params.shrink_hi)
    t = max(parent_t * s - rng.uniform(0.0, params.noise), params.thin_floor)
    if level >= params.deep_cap_level:
        t = min(t, params.deep_cap_mm)
    return t


# ---------------------------------------------------------------------------
# anomaly injection


class TreeTooSmallError(ValueError):
    pass


def inject_anomaly(tree: BinaryTree, kind: FlagKind, seed: int,
                   config: DetectorConfig = DetectorConfig(),
                   graft_size: int | None = None) -> tuple[BinaryTree, str]:
    """Inject one anomaly; returns the edited tree and the ground-truth node id.

    graft_size controls how many nodes a misconnection graft carries
    (default: just above the detector's minimum subtree size).
    """
    rng = random.Random(seed)
    if kind is FlagKind.VEIN:
        return _inject_vein(tree, rng, config)
    if kind is FlagKind.MISCONNECTION:
        return _inject_misconnection(tree, rng, config, graft_size)
    if kind is FlagKind.STARTING_POINT:
        return _inject_starting_point(tree, config)
    raise ValueError(f"unknown anomaly kind {kind!r}")


def _used_ids(tree: BinaryTree) -> set[str]:
    return {n.node_id for n in tree.nodes()}


def _replace_node(node: BinaryNode, target_id: str, repl: BinaryNode) -> BinaryNode:
    if node.node_id == target_id:
        return repl
    left = _replace_node(node.left, target_id, repl) if node.left else None
    right = _replace_node(node.right, target_id, repl) if node.right else None
    return BinaryNode(node.node_id, node.thickness, left, right)


def _leaves(tree: BinaryTree) -> list[BinaryNode]:
    return [n for n in tree.nodes() if n.is_leaf]


def _inject_vein(tree: BinaryTree, rng, config: DetectorConfig):
    """Split a leaf into a normal child plus an over-thick vein leaf.

    Hosts are restricted to leaves at level >= 2, below the generator's
    thickness cap, so the thick vein can never extend a root chain.
    """
    from .core import node_level

    leaves = [n for n in _leaves(tree) if node_level(tree, n.node_id) >= 2]
    if not leaves:
        raise TreeTooSmallError("no deep leaf to attach a vein to")
    host = leaves[rng.randrange(len(leaves))]
    used = _used_ids(tree)
    vein_id, sib_id = f"vein{rng.randrange(10**6)}", f"sib{rng.randrange(10**6)}"
    while vein_id in used or sib_id in used:
        vein_id, sib_id = vein_id + "x", sib_id + "x"
    vein_t = host.thickness + 5 * config.epsilon_mm
    sibling = BinaryNode(sib_id, host.thickness * 0.9)
    vein = BinaryNode(vein_id, vein_t)
    new_host = BinaryNode(host.node_id, host.thickness, sibling, vein)
    return (
        BinaryTree(tree.subject_id, tree.region,
                   _replace_node(tree.root, host.node_id, new_host)),
        vein_id,
    )


def _subtree_size(node: BinaryNode) -> int:
    return 1 + sum(_subtree_size(c) for c in node.children)


def _inject_misconnection(tree: BinaryTree, rng, config: DetectorConfig,
                          graft_size: int | None):
    """Replace a leaf with a generated over-thick subtree.

    The host leaf must have a large-enough sibling subtree so that the graft
    cannot shift any ancestor's subtree median.
    """
    graft_size_target = graft_size or max(config.misconnection_min_subtree, 5)
    candidates = []
    for node in tree.nodes():
        if node.left is None or node.right is None:
            continue
        for leaf, sib in ((node.left, node.right), (node.right, node.left)):
            if leaf.is_leaf and _subtree_size(sib) >= graft_size_target + 2:
                candidates.append((node, leaf))
    if not candidates:
        raise TreeTooSmallError("no leaf with a large enough sibling subtree")
    parent, host = candidates[rng.randrange(len(candidates))]
    used = _used_ids(tree)
    tag = rng.randrange(10**6)
    graft_t0 = parent.thickness + 5 * config.epsilon_mm
    graft = _grow_graft(rng, graft_t0, graft_size_target, f"mc{tag}", used)
    return (
        BinaryTree(tree.subject_id, tree.region,
                   _replace_node(tree.root, host.node_id, graft)),
        graft.node_id,
    )


def _grow_graft(rng, t0: float, size: int, prefix: str, used: set[str]) -> BinaryNode:
    """Left-leaning thick chain of `size` nodes, barely thinning.

    The per-step shrink is kept so close to 1 that even a 300-node graft's
    median stays above 0.8 * t0, which keeps the subtree median above
    parent + epsilon for any realistic parent thickness.
    """
    nodes = []
    t = t0
    for i in range(size):
        nid = f"{prefix}.{i}"
        while nid in used:
            nid += "x"
        used.add(nid)
        nodes.append((nid, t))
        t *= rng.uniform(0.9990, 0.9998)
    cur = None
    for nid, thickness in reversed(nodes):
        cur = BinaryNode(nid, thickness, cur, None)
    return cur


def _inject_starting_point(tree: BinaryTree, config: DetectorConfig):
    """Prepend a chain of over-thick trunks above the current root."""
    if tree.root.thickness is None:
        raise TreeTooSmallError("cannot prepend above a phantom root")
    used = _used_ids(tree)
    count = config.startpoint_min_chain + 1
    base = max(config.startpoint_thick_mm, tree.root.thickness) + config.epsilon_mm
    cur = tree.root
    for i in range(count):
        nid = f"sp{i}"
        while nid in used:
            nid += "x"
        used.add(nid)
        cur = BinaryNode(nid, base + 0.1 * (i + 1), cur, None)
    new_tree = BinaryTree(tree.subject_id, tree.region, cur)
    return new_tree, new_tree.root.node_id


def max_graft_size(tree: BinaryTree) -> int:
    """Largest misconnection graft this tree can host (0 if none)."""
    best = 0
    for node in tree.nodes():
        if node.left is None or node.right is None:
            continue
        for leaf, sib in ((node.left, node.right), (node.right, node.left)):
            if leaf.is_leaf:
                best = max(best, _subtree_size(sib) - 2)
    return best


def repair_operation(tree_before: BinaryTree, kind: FlagKind, locus: str):
    """The edit-script line that undoes an injection into `tree_before`."""
    from . import edit

    if kind is FlagKind.VEIN:
        op = edit.DeleteLeaf(locus)
    elif kind is FlagKind.MISCONNECTION:
        op = edit.DeleteSubtree(locus)
    else:
        op = edit.TrimRoot(tree_before.root.node_id)
    return edit.ScriptLine(tree_before.subject_id, tree_before.region, op)


# ---------------------------------------------------------------------------
# corpora


def generate_corpus(n_subjects: int, covariate_effect: float, seed: int,
                    base_params: GenParams = GenParams(p0=0.90)) -> list[CorpusEntry]:
    """Subjects aged uniformly in [20, 80], 4 component trees each.

    The covariate enters through the branching probability:
    p0(subject) = base - covariate_effect * age.
    """
    if n_subjects < 2:
        raise ValueError("need at least 2 subjects")
    rng = random.Random(seed)
    entries = []
    for i in range(n_subjects):
        age = rng.uniform(20.0, 80.0)
        # only floored at 0; values above 1 are meaningful (early levels branch surely)
        p0 = max(base_params.p0 - covariate_effect * age, 0.0)
        params = replace(base_params, p0=p0)
        subject = f"s{i:03d}"
        for region in Region:
            tree_seed = rng.randrange(2**62)
            entries.append(CorpusEntry(
                generate_tree(params, tree_seed, subject, region), covariate=age,
            ))
    return entries


def inject_corpus(entries: list[CorpusEntry], seed: int,
                  inject_fraction: float = 0.25,
                  graft_fraction: float = 0.45,
                  config: DetectorConfig = DetectorConfig()):
    """Inject anomalies into a fraction of corpus trees.

    Misconnection grafts scale with the host tree so the distortion is
    visible at corpus level.  Returns the dirtied entries, ground-truth
    (subject, region code, kind, locus) rows, and the repair script that
    undoes every injection.
    """
    rng = random.Random(seed ^ 0x1AB0)
    dirty = list(entries)
    truth = []
    repairs = []
    n_inject = int(len(dirty) * inject_fraction)
    indices = rng.sample(range(len(dirty)), n_inject)
    k = max(n_inject // 8, 1)
    kinds = ([FlagKind.MISCONNECTION] * (n_inject - 2 * k)
             + [FlagKind.VEIN] * k + [FlagKind.STARTING_POINT] * k)
    for idx, kind in zip(indices, kinds):
        entry = dirty[idx]
        graft = None
        if kind is FlagKind.MISCONNECTION:
            graft = max(config.misconnection_min_subtree + 2,
                        min(int(entry.tree.node_count * graft_fraction),
                            max_graft_size(entry.tree), 300))
        try:
            tree, locus = inject_anomaly(entry.tree, kind, rng.randrange(2**62),
                                         config, graft_size=graft)
        except TreeTooSmallError:
            continue
        repairs.append(repair_operation(entry.tree, kind, locus))
        truth.append((entry.tree.subject_id, entry.tree.region.value, kind, locus))
        dirty[idx] = CorpusEntry(tree, entry.covariate)
    repairs.reverse()  # later injections undone first
    return dirty, truth, repairs
