"""A reference interpreter for graphs in either representation.

This defines one concrete executable semantics for the IR so that
transformations can be checked end to end: run the graph before and
after a pass on the same inputs and compare results. It is a testing
oracle, not a performance path.

Execution walks the control flow graph starting at the start block.
Entering a block bumps an epoch counter; data nodes are evaluated on
demand and memoized per epoch, so re-entering a block (a loop
iteration) recomputes its values. Phi nodes are special: entering a
block along predecessor position p first evaluates every Phi's operand
at position p against the *old* values, then installs all updates at
once. Reading a Phi just returns its current value.

Volatile Loads read from the supplied inputs mapping, keyed by node id;
non-volatile Loads produce 0 and Stores are never demanded. Division by
zero and exceeding the step budget are traps: defined, reportable
outcomes rather than errors.
"""

from __future__ import annotations

from dataclasses import dataclass

from .arith import apply_binary, apply_not
from .errors import InterpreterError
from .ir import (
    CONTROL_TRANSFER_KINDS,
    IMMEDIATE_TARGET_OF,
    PLAIN_TARGET_OF,
    EdgeKind,
    FirmGraph,
    NodeKind,
)

TRAP_DIV_BY_ZERO = "divide-by-zero"
TRAP_STEP_LIMIT = "step-limit"

_IR_OF_PLAIN_TARGET = {t: ir for ir, t in PLAIN_TARGET_OF.items()}
_IR_OF_IMMEDIATE = {t: ir for ir, t in IMMEDIATE_TARGET_OF.items()}
_BINARY_SEMANTICS = {
    k: k
    for k in (
        NodeKind.ADD,
        NodeKind.SUB,
        NodeKind.MUL,
        NodeKind.DIV,
        NodeKind.MOD,
        NodeKind.AND,
        NodeKind.OR,
        NodeKind.XOR,
        NodeKind.SHL,
        NodeKind.SHR,
        NodeKind.CMP,
    )
}
for _t, _ir in _IR_OF_PLAIN_TARGET.items():
    if _ir in _BINARY_SEMANTICS:
        _BINARY_SEMANTICS[_t] = _ir
del _t, _ir

_PHI_KINDS = (NodeKind.PHI, NodeKind.TARGET_PHI)
_CONST_KINDS = (NodeKind.CONST, NodeKind.TARGET_CONST)
_LOAD_KINDS = (NodeKind.LOAD, NodeKind.TARGET_LOAD)
_RETURN_KINDS = (NodeKind.RETURN, NodeKind.TARGET_RETURN)
_JMP_KINDS = (NodeKind.JMP, NodeKind.TARGET_JMP)
_COND_KINDS = (NodeKind.COND, NodeKind.TARGET_COND)


@dataclass
class ExecResult:
    value: int | None
    trapped: str | None
    steps: int

    @property
    def ok(self) -> bool:
        return self.trapped is None


class _Trap(Exception):
    def __init__(self, reason: str):
        self.reason = reason


class _Machine:
    def __init__(self, g: FirmGraph, inputs: dict[int, int], max_steps: int):
        self.g = g
        self.inputs = inputs
        self.max_steps = max_steps
        self.steps = 0
        self.epoch = 0
        self.memo: dict[int, tuple[int, int]] = {}
        self.phi_values: dict[int, int] = {}
        self._block_cache: dict[int, tuple[list[int], int | None]] = {}

    def _bump(self) -> None:
        self.steps += 1
        if self.steps > self.max_steps:
            raise _Trap(TRAP_STEP_LIMIT)

    def block_info(self, block: int) -> tuple[list[int], int | None]:
        """(phi ids ascending, transfer node id or None) for one block."""
        cached = self._block_cache.get(block)
        if cached is None:
            phis = []
            xfer = None
            for m in self.g.members_of(block):
                kind = self.g.node(m).kind
                if kind in _PHI_KINDS:
                    phis.append(m)
                elif xfer is None and kind in CONTROL_TRANSFER_KINDS:
                    xfer = m
            cached = (phis, xfer)
            self._block_cache[block] = cached
        return cached

    def eval(self, root: int) -> int:
        g = self.g
        memo = self.memo
        epoch = self.epoch
        stack = [root]
        onstack: set[int] = set()
        while stack:
            nid = stack[-1]
            cached = memo.get(nid)
            if cached is not None and cached[0] == epoch:
                stack.pop()
                onstack.discard(nid)
                continue
            node = g.node(nid)
            kind = node.kind
            if kind in _CONST_KINDS:
                self._bump()
                memo[nid] = (epoch, node.value)
                stack.pop()
                continue
            if kind in _PHI_KINDS:
                try:
                    value = self.phi_values[nid]
                except KeyError:
                    raise InterpreterError(
                        f"Phi {nid} read before any predecessor assigned it"
                    ) from None
                self._bump()
                memo[nid] = (epoch, value)
                stack.pop()
                continue
            edges = g.operand_edges(nid)
            missing = []
            vals = []
            for e in edges:
                c = memo.get(e.dst)
                if c is None or c[0] != epoch:
                    missing.append(e.dst)
                else:
                    vals.append(c[1])
            if missing:
                onstack.add(nid)
                for d in reversed(missing):
                    if d in onstack:
                        raise InterpreterError(f"dataflow cycle through node {d}")
                    stack.append(d)
                continue
            memo[nid] = (epoch, self._compute(nid, node, kind, vals))
            onstack.discard(nid)
            stack.pop()
        return memo[root][1]

    def _compute(self, nid: int, node, kind: NodeKind, vals: list[int]) -> int:
        self._bump()
        if kind in (NodeKind.NOT, NodeKind.TARGET_NOT):
            return apply_not(vals[0])
        sem = _BINARY_SEMANTICS.get(kind)
        if sem is not None:
            value = apply_binary(sem, vals[0], vals[1], node.relation)
            if value is None:
                raise _Trap(TRAP_DIV_BY_ZERO)
            return value
        sem = _IR_OF_IMMEDIATE.get(kind)
        if sem is not None:
            value = apply_binary(sem, vals[0], node.value, node.relation)
            if value is None:
                raise _Trap(TRAP_DIV_BY_ZERO)
            return value
        if kind in _LOAD_KINDS:
            if node.volatile:
                try:
                    return self.inputs[nid]
                except KeyError:
                    raise InterpreterError(
                        f"no input value for volatile Load {nid}"
                    ) from None
            return 0
        raise InterpreterError(f"{kind.value} node {nid} does not produce a value")


def execute(
    g: FirmGraph,
    inputs: dict[int, int] | None = None,
    max_steps: int = 10**6,
) -> ExecResult:
    """Run a graph to its Return, a trap, or an error.

    Graphs that fail verification are not supported here; run the
    verifier first if in doubt.
    """
    if g.start_block is None or g.start_block not in g:
        raise InterpreterError("graph has no start block")
    m = _Machine(g, dict(inputs or {}), max_steps)
    cur = g.start_block
    entry_pos: int | None = None
    try:
        while True:
            phis, xfer = m.block_info(cur)
            if entry_pos is not None and phis:
                updates = {}
                for phi in phis:
                    operand = None
                    for e in g.operand_edges(phi):
                        if e.position == entry_pos:
                            operand = e.dst
                            break
                    if operand is None:
                        raise InterpreterError(
                            f"Phi {phi} has no operand for predecessor position {entry_pos}"
                        )
                    updates[phi] = m.eval(operand)
                m.epoch += 1
                m.phi_values.update(updates)
            else:
                m.epoch += 1
            if xfer is None:
                raise InterpreterError(f"block {cur} has no control transfer")
            m._bump()
            kind = g.node(xfer).kind
            if kind in _RETURN_KINDS:
                ops = g.operand_edges(xfer)
                if len(ops) != 1:
                    raise InterpreterError(f"Return {xfer} needs exactly one operand")
                return ExecResult(m.eval(ops[0].dst), None, m.steps)
            if kind in _JMP_KINDS:
                succ = g.in_edges(xfer, EdgeKind.CONTROLFLOW)
                if len(succ) != 1:
                    raise InterpreterError(f"Jmp {xfer} has {len(succ)} successors")
                cur, entry_pos = succ[0].src, succ[0].position
                continue
            if kind in _COND_KINDS:
                ops = g.operand_edges(xfer)
                if len(ops) != 1:
                    raise InterpreterError(f"Cond {xfer} needs exactly one operand")
                value = m.eval(ops[0].dst)
                wanted = EdgeKind.TRUE if value != 0 else EdgeKind.FALSE
                succ = g.in_edges(xfer, wanted)
                if len(succ) != 1:
                    raise InterpreterError(
                        f"Cond {xfer} has {len(succ)} {wanted.value} successors"
                    )
                cur, entry_pos = succ[0].src, succ[0].position
                continue
            raise InterpreterError(f"{kind.value} node {xfer} cannot transfer control")
    except _Trap as trap:
        return ExecResult(None, trap.reason, m.steps)
