"""Lowering from the IR kinds to the target kinds.

Selection is three sweeps plus a cleanup: put constants of commutative
operations on the right, absorb right-hand Consts into immediate-form
target nodes, drop constants nothing reads anymore, then retype whatever
is left onto its plain target counterpart. Blocks, Start and End carry
over unchanged. Div and Mod have no target form, so graphs that still
contain them cannot be lowered.
"""

from __future__ import annotations

from .cfgfold import _exhaust_unused
from .errors import ContractError, VerificationError
from .ir import (
    ANCHOR_KINDS,
    COMMUTATIVE_KINDS,
    IMMEDIATE_TARGET_OF,
    PLAIN_TARGET_OF,
    TARGET_KINDS,
    FirmGraph,
    NodeKind,
)
from .verifier import verify


def normalize_const(g: FirmGraph, nid: int) -> bool:
    """Swap the operands of a commutative operation so that a Const sits
    at position 1, never at position 0. Two Consts stay put, which keeps
    the later immediate pick deterministic."""
    if nid not in g or g.node(nid).kind not in COMMUTATIVE_KINDS:
        return False
    edges = g.operand_edges(nid)
    if len(edges) != 2 or edges[0].position != 0 or edges[1].position != 1:
        return False
    first = g.node(edges[0].dst).kind is NodeKind.CONST
    second = g.node(edges[1].dst).kind is NodeKind.CONST
    if not first or second:
        return False
    edges[0].position = 1
    edges[1].position = 0
    return True


def select_immediate(g: FirmGraph, nid: int) -> bool:
    """Turn op(x, Const c) into the immediate target form.

    The node is retyped to its *I kind, takes c's value as an attribute,
    and drops the operand edge at position 1. The Const itself stays; the
    unused-node sweep afterwards collects it once every user let go."""
    if nid not in g:
        return False
    node = g.node(nid)
    target_kind = IMMEDIATE_TARGET_OF.get(node.kind)
    if target_kind is None:
        return False
    edges = g.operand_edges(nid)
    if len(edges) != 2 or edges[0].position != 0 or edges[1].position != 1:
        return False
    const = g.node(edges[1].dst)
    if const.kind is not NodeKind.CONST:
        return False
    value = const.value
    g.retype_node(nid, target_kind)
    g.node(nid).value = value
    g.delete_edge(edges[1])
    return True


def select_plain(g: FirmGraph, nid: int) -> bool:
    """Retype one IR node onto its same-shape target kind."""
    if nid not in g:
        return False
    target_kind = PLAIN_TARGET_OF.get(g.node(nid).kind)
    if target_kind is None:
        return False
    g.retype_node(nid, target_kind)
    return True


def run_instruction_selection(g: FirmGraph) -> None:
    """Lower a verify-clean IR graph to target kinds in place.

    Raises ContractError when handed a graph that already contains target
    kinds or when an IR operation (Div, Mod, or anything else without a
    target form) survives lowering."""
    findings = verify(g)
    if findings:
        raise VerificationError(findings, "before instruction selection")
    present = [nid for nid, n in g.items() if n.kind in TARGET_KINDS]
    if present:
        raise ContractError(
            f"instruction selection expects an IR-only graph; node {present[0]} is "
            f"{g.node(present[0]).kind.value}"
        )
    for nid in list(g.node_ids()):
        normalize_const(g, nid)
    for nid in list(g.node_ids()):
        select_immediate(g, nid)
    _exhaust_unused(g)
    for nid in list(g.node_ids()):
        select_plain(g, nid)
    leftovers = [
        nid
        for nid, n in g.items()
        if n.kind not in TARGET_KINDS and n.kind not in ANCHOR_KINDS
    ]
    if leftovers:
        kinds = sorted({g.node(nid).kind.value for nid in leftovers})
        raise ContractError(
            f"{len(leftovers)} IR node(s) survived instruction selection: {', '.join(kinds)}"
        )
    findings = verify(g)
    if findings:
        raise VerificationError(findings, "after instruction selection")
