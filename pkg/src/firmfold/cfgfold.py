"""Control-flow cleanup rules and the top-level optimize() driver.

Each rule is a predicate-guarded rewrite on one node; it returns True
when it changed the graph. cleanup_round() runs the rules in a fixed
order and drives each one to its own fixpoint before moving on.
optimize() alternates dataflow folding with cleanup rounds until neither
side changes anything, verifying the graph on entry and on exit.
"""

from __future__ import annotations

from collections import deque
from typing import Callable

from .constfold import fold_dataflow_fixpoint
from .errors import ContractError, GraphError, NoBlockError, VerificationError
from .ir import (
    ANCHOR_KINDS,
    BINARY_KINDS,
    COMMUTATIVE_KINDS,
    EdgeKind,
    FirmGraph,
    NodeKind,
)
from .verifier import verify
from . import constfold


def fold_cond(g: FirmGraph, nid: int) -> bool:
    """A Cond over a Const takes one branch statically.

    The edge for the untaken branch is deleted, the taken edge becomes a
    plain Controlflow edge, and the node itself becomes a Jmp (dropping
    its operand edge).
    """
    if nid not in g or g.node(nid).kind is not NodeKind.COND:
        return False
    op_edges = g.operand_edges(nid)
    if len(op_edges) != 1:
        return False
    operand = g.node(op_edges[0].dst)
    if operand.kind is not NodeKind.CONST:
        return False
    true_edges = g.in_edges(nid, EdgeKind.TRUE)
    false_edges = g.in_edges(nid, EdgeKind.FALSE)
    if len(true_edges) != 1 or len(false_edges) != 1:
        return False
    if operand.value != 0:
        taken, untaken = true_edges[0], false_edges[0]
    else:
        taken, untaken = false_edges[0], true_edges[0]
    g.delete_edge(untaken)
    g.retype_edge(taken, EdgeKind.CONTROLFLOW)
    g.retype_node(nid, NodeKind.JMP)
    g.delete_edge(op_edges[0])
    return True


def remove_unreachable_block(g: FirmGraph, nid: int) -> bool:
    """Delete a block that no control edge can reach.

    Members lose their BlockEdge and are left for unreachable-node
    removal; the start and end blocks are never touched.
    """
    if nid not in g or g.node(nid).kind is not NodeKind.BLOCK:
        return False
    if nid == g.start_block or nid == g.end_block:
        return False
    if g.control_in_edges(nid):
        return False
    g.delete_node(nid)
    return True


def remove_unreachable_node(g: FirmGraph, nid: int) -> bool:
    """Delete a non-Block node that lost its containing block."""
    if nid not in g:
        return False
    node = g.node(nid)
    if node.kind in ANCHOR_KINDS:
        return False
    try:
        g.block_of(nid)
    except NoBlockError:
        g.delete_node(nid)
        return True
    return False


def remove_unreachable_phi_operand(g: FirmGraph, nid: int) -> bool:
    """Drop Phi operands whose position no longer names a predecessor."""
    if nid not in g or g.node(nid).kind is not NodeKind.PHI:
        return False
    try:
        block = g.block_of(nid)
    except NoBlockError:
        return False
    live = {e.position for e in g.control_in_edges(block)}
    fired = False
    for e in g.operand_edges(nid):
        if e.position not in live:
            g.delete_edge(e)
            fired = True
    return fired


def fix_edge_position(g: FirmGraph, block: int) -> bool:
    """Renumber a block's predecessor positions to 0..k-1, keeping order,
    and remap the operands of its Phis the same way."""
    node = g.node(block)
    if node.kind is not NodeKind.BLOCK:
        raise GraphError(f"fix_edge_position expects a Block, got {node.kind.value}")
    ctrl = g.control_in_edges(block)
    mapping: dict[int, int] = {}
    changed = False
    for i, e in enumerate(ctrl):
        mapping.setdefault(e.position, i)
        if e.position != i:
            changed = True
    if not changed:
        return False
    phis = [m for m in g.members_of(block) if g.node(m).kind is NodeKind.PHI]
    for i, e in enumerate(ctrl):
        e.position = i
    for phi in phis:
        for e in g.operand_edges(phi):
            if e.position in mapping:
                e.position = mapping[e.position]
    return True


def simplify_trivial_phi(g: FirmGraph, nid: int) -> bool:
    """Replace a single-operand Phi with that operand."""
    if nid not in g or g.node(nid).kind is not NodeKind.PHI:
        return False
    ops = g.operands_of(nid)
    if len(ops) != 1:
        return False
    target = ops[0][0]
    if target == nid:
        return False
    g.redirect_users(nid, target)
    g.delete_node(nid)
    return True


_PURE_KINDS = frozenset({NodeKind.CONST, NodeKind.NOT, NodeKind.PHI}) | BINARY_KINDS


def _is_removable_when_unused(g: FirmGraph, nid: int) -> bool:
    node = g.node(nid)
    if node.kind in _PURE_KINDS:
        return True
    return node.kind is NodeKind.LOAD and not node.volatile


def remove_unused_node(g: FirmGraph, nid: int) -> bool:
    """Delete a pure value node nothing reads.

    Applies to Const, Not, the binary operations, Phi and non-volatile
    Load; control transfers and volatile memory accesses stay put.
    """
    if nid not in g or not _is_removable_when_unused(g, nid):
        return False
    if g.in_edges(nid, EdgeKind.DATAFLOW):
        return False
    g.delete_node(nid)
    return True


def merge_blocks(g: FirmGraph, nid: int) -> bool:
    """Fold a block with a lone unconditional successor edge into the
    block holding the Jmp that reaches it.

    The Jmp disappears, the block's members move over, and edges from
    successor blocks keep pointing at their (moved) transfer nodes, so no
    positions change. Blocks containing Phis and the start/end anchors
    are left alone.
    """
    if nid not in g or g.node(nid).kind is not NodeKind.BLOCK:
        return False
    if nid == g.start_block or nid == g.end_block:
        return False
    ctrl = g.control_in_edges(nid)
    if len(ctrl) != 1 or ctrl[0].kind is not EdgeKind.CONTROLFLOW:
        return False
    jmp = ctrl[0].dst
    if jmp not in g or g.node(jmp).kind is not NodeKind.JMP:
        return False
    try:
        home = g.block_of(jmp)
    except NoBlockError:
        return False
    if home == nid:
        return False
    members = g.members_of(nid)
    if any(g.node(m).kind is NodeKind.PHI for m in members):
        return False
    for e in g.in_edges(nid, EdgeKind.BLOCK):
        g.retarget_edge(e, home)
    g.delete_node(jmp)
    g.delete_node(nid)
    return True


def _exhaust(
    g: FirmGraph, rule: Callable[[FirmGraph, int], bool], kinds: frozenset[NodeKind]
) -> bool:
    """Apply one rule to every matching node, repeating until quiet."""
    fired_ever = False
    while True:
        fired = False
        for nid in [n for n, node in g.items() if node.kind in kinds]:
            if rule(g, nid):
                fired = True
        if not fired:
            return fired_ever
        fired_ever = True


def _exhaust_unused(g: FirmGraph) -> bool:
    """Worklist form of remove_unused_node: deleting a node may orphan its
    operands, so those are requeued instead of rescanned."""
    queue = deque(
        nid for nid, node in g.items() if node.kind in _PURE_KINDS or node.kind is NodeKind.LOAD
    )
    queued = set(queue)
    fired = False
    while queue:
        nid = queue.popleft()
        queued.discard(nid)
        if nid not in g or not _is_removable_when_unused(g, nid):
            continue
        if g.in_edges(nid, EdgeKind.DATAFLOW):
            continue
        operands = [e.dst for e in g.out_edges(nid, EdgeKind.DATAFLOW)]
        g.delete_node(nid)
        fired = True
        for dst in operands:
            if dst in g and dst not in queued:
                queue.append(dst)
                queued.add(dst)
    return fired


def _exhaust_assoc_comm(g: FirmGraph) -> bool:
    fired_ever = False
    while True:
        fired = False
        for nid in [n for n, node in g.items() if node.kind in COMMUTATIVE_KINDS]:
            if constfold.fold_assoc_comm(g, nid) is not None:
                fired = True
        if not fired:
            return fired_ever
        fired_ever = True


_ALL_KINDS = frozenset(NodeKind)
_NON_ANCHOR_KINDS = _ALL_KINDS - ANCHOR_KINDS
_BLOCK_ONLY = frozenset({NodeKind.BLOCK})
_PHI_ONLY = frozenset({NodeKind.PHI})


def cleanup_round(g: FirmGraph) -> bool:
    """One round of structural cleanup; True when anything changed.

    Rule order matters: conditions fold before reachability is
    recomputed, Phi operands are pruned before positions are renumbered,
    and block merging runs last over the settled shape.
    """
    changed = False
    changed |= _exhaust(g, fold_cond, frozenset({NodeKind.COND}))
    changed |= _exhaust(g, remove_unreachable_block, _BLOCK_ONLY)
    changed |= _exhaust(g, remove_unreachable_node, _NON_ANCHOR_KINDS)
    changed |= _exhaust(g, remove_unreachable_phi_operand, _PHI_ONLY)
    changed |= _exhaust(g, fix_edge_position, _BLOCK_ONLY)
    changed |= _exhaust(g, simplify_trivial_phi, _PHI_ONLY)
    changed |= _exhaust_assoc_comm(g)
    changed |= _exhaust_unused(g)
    changed |= _exhaust(g, merge_blocks, _BLOCK_ONLY)
    return changed


def optimize(
    g: FirmGraph,
    max_rounds: int | None = None,
    on_round: Callable[[int, FirmGraph], None] | None = None,
) -> bool:
    """Run dataflow folding and cleanup rounds to a joint fixpoint.

    The graph must verify cleanly going in and is verified again on the
    way out. Returns True when the graph changed at all. max_rounds
    guards against a runaway loop; exceeding it is a ContractError.
    """
    findings = verify(g)
    if findings:
        raise VerificationError(findings, "before optimize")
    changed_ever = False
    rounds = 0
    while True:
        rounds += 1
        if max_rounds is not None and rounds > max_rounds:
            raise ContractError(f"optimize exceeded {max_rounds} rounds")
        folded = fold_dataflow_fixpoint(g)
        cleaned = cleanup_round(g)
        changed_ever = changed_ever or folded or cleaned
        if on_round is not None:
            on_round(rounds, g)
        if not folded and not cleaned:
            break
    findings = verify(g)
    if findings:
        raise VerificationError(findings, "after optimize")
    return changed_ever
