"""Correction edits applied to component trees via replayable scripts.

Supported operations: delete a (mis-connected) subtree, trim the root chain
to a new cutoff node, delete a (vein) leaf, or exclude a whole case.  When a
deletion leaves a node with a single child, the two trunks merge into one
node carrying the mean of their thicknesses.

Script line format (one operation per line, `#` comments):
    <subject> <region> DELETE_SUBTREE <node>
    <subject> <region> TRIM_ROOT <node>
    <subject> <region> DELETE_LEAF <node>
    <subject> * EXCLUDE
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .core import BinaryNode, BinaryTree, Region, UnknownNodeError


@dataclass(frozen=True)
class DeleteSubtree:
    node_id: str


@dataclass(frozen=True)
class TrimRoot:
    node_id: str


@dataclass(frozen=True)
class DeleteLeaf:
    node_id: str


@dataclass(frozen=True)
class ExcludeCase:
    pass


Operation = Union[DeleteSubtree, TrimRoot, DeleteLeaf, ExcludeCase]


@dataclass(frozen=True)
class ScriptLine:
    subject_id: str
    region: Optional[Region]  # None for subject-wide EXCLUDE
    op: Operation
    lineno: int = 0


class EditScriptError(ValueError):
    pass


def _remove(node: BinaryNode, target_id: str) -> Optional[BinaryNode]:
    """Rebuild the tree below `node` with the target subtree removed.

    Unary survivors merge with their remaining child (mean thickness);
    a phantom parent left unary is dropped in favor of its child.
    """
    if node.node_id == target_id:
        return None
    kids = [c for c in node.children]
    new_kids = [k for k in (_remove(c, target_id) for c in kids) if k is not None]
    if len(kids) == 2 and len(new_kids) == 1:
        survivor = new_kids[0]
        if node.thickness is None:
            return survivor  # phantom root no longer joins two vessels
        merged_t = (node.thickness + survivor.thickness) / 2.0
        return BinaryNode(node.node_id, merged_t, survivor.left, survivor.right)
    left = new_kids[0] if new_kids else None
    right = new_kids[1] if len(new_kids) > 1 else None
    return BinaryNode(node.node_id, node.thickness, left, right)


def delete_subtree(tree: BinaryTree, node_id: str) -> BinaryTree:
    node = tree.node(node_id)
    if node is tree.root:
        raise EditScriptError("cannot delete the root subtree (exclude the case instead)")
    root = _remove(tree.root, node_id)
    return BinaryTree(tree.subject_id, tree.region, root)


def delete_leaf(tree: BinaryTree, node_id: str) -> BinaryTree:
    node = tree.node(node_id)
    if not node.is_leaf:
        raise EditScriptError(f"node {node_id!r} is not a leaf")
    return delete_subtree(tree, node_id)


def trim_root(tree: BinaryTree, new_root_node_id: str) -> BinaryTree:
    new_root = tree.node(new_root_node_id)
    return BinaryTree(tree.subject_id, tree.region, new_root)


def parse_script(text: str) -> list[ScriptLine]:
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        if len(toks) == 3 and toks[1] == "*" and toks[2] == "EXCLUDE":
            lines.append(ScriptLine(toks[0], None, ExcludeCase(), lineno))
            continue
        if len(toks) != 4:
            raise EditScriptError(f"line {lineno}: malformed script line {line!r}")
        subject, region_code, verb, node_id = toks
        region = Region.from_code(region_code)
        ops = {
            "DELETE_SUBTREE": DeleteSubtree,
            "TRIM_ROOT": TrimRoot,
            "DELETE_LEAF": DeleteLeaf,
        }
        if verb not in ops:
            raise EditScriptError(f"line {lineno}: unknown operation {verb!r}")
        lines.append(ScriptLine(subject, region, ops[verb](node_id), lineno))
    return lines


def format_script(lines: list[ScriptLine]) -> str:
    out = []
    for line in lines:
        if isinstance(line.op, ExcludeCase):
            out.append(f"{line.subject_id} * EXCLUDE")
            continue
        verbs = {DeleteSubtree: "DELETE_SUBTREE", TrimRoot: "TRIM_ROOT",
                 DeleteLeaf: "DELETE_LEAF"}
        out.append(f"{line.subject_id} {line.region.value} "
                   f"{verbs[type(line.op)]} {line.op.node_id}")
    return "".join(l + "\n" for l in out)


def apply_script(corpus: dict[tuple[str, str], BinaryTree],
                 script: list[ScriptLine]) -> dict[tuple[str, str], BinaryTree]:
    """Apply script lines in order to a corpus keyed by (subject, region code).

    Untouched trees pass through unchanged.
    """
    out = dict(corpus)
    for line in script:
        if isinstance(line.op, ExcludeCase):
            keys = [k for k in out if k[0] == line.subject_id]
            if not keys:
                raise EditScriptError(
                    f"line {line.lineno}: no trees for subject {line.subject_id!r}"
                )
            for k in keys:
                del out[k]
            continue
        key = (line.subject_id, line.region.value)
        if key not in out:
            raise EditScriptError(
                f"line {line.lineno}: no tree for {line.subject_id}/{line.region.value}"
            )
        tree = out[key]
        try:
            if isinstance(line.op, DeleteSubtree):
                out[key] = delete_subtree(tree, line.op.node_id)
            elif isinstance(line.op, DeleteLeaf):
                out[key] = delete_leaf(tree, line.op.node_id)
            elif isinstance(line.op, TrimRoot):
                out[key] = trim_root(tree, line.op.node_id)
        except UnknownNodeError:
            raise EditScriptError(
                f"line {line.lineno}: node {line.op.node_id!r} not in "
                f"{line.subject_id}/{line.region.value}"
            )
    return out
