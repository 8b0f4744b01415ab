"""Typed, attributed multigraph IR.

Nodes are operations; everything else is edges:

* ``Dataflow`` edges point from a user to its operand, with ``position``
  giving the operand index.
* ``Controlflow``/``True``/``False`` edges point from a target Block to the
  control-transfer node (Jmp/Cond/Return) sitting in the predecessor block.
  ``position`` is the predecessor index of the source block, which is what
  Phi operand positions line up with.
* ``BlockEdge`` edges point from a non-Block node to the Block containing
  it. They carry no position.

Node ids are dense ints handed out monotonically and never reused, so
iterating the node table always visits ids in ascending order.
"""

from __future__ import annotations

from enum import Enum
from typing import Iterator

from .errors import GraphError, NoBlockError


class NodeKind(Enum):
    # structural
    BLOCK = "Block"
    START = "Start"
    END = "End"
    RETURN = "Return"
    JMP = "Jmp"
    COND = "Cond"
    PHI = "Phi"
    # dataflow
    CONST = "Const"
    NOT = "Not"
    ADD = "Add"
    SUB = "Sub"
    MUL = "Mul"
    DIV = "Div"
    MOD = "Mod"
    AND = "And"
    OR = "Or"
    XOR = "Xor"
    SHL = "Shl"
    SHR = "Shr"
    CMP = "Cmp"
    LOAD = "Load"
    STORE = "Store"
    # target representation
    TARGET_CONST = "TargetConst"
    TARGET_NOT = "TargetNot"
    TARGET_ADD = "TargetAdd"
    TARGET_ADD_I = "TargetAddI"
    TARGET_SUB = "TargetSub"
    TARGET_SUB_I = "TargetSubI"
    TARGET_MUL = "TargetMul"
    TARGET_MUL_I = "TargetMulI"
    TARGET_AND = "TargetAnd"
    TARGET_AND_I = "TargetAndI"
    TARGET_OR = "TargetOr"
    TARGET_OR_I = "TargetOrI"
    TARGET_XOR = "TargetXor"
    TARGET_XOR_I = "TargetXorI"
    TARGET_SHL = "TargetShl"
    TARGET_SHL_I = "TargetShlI"
    TARGET_SHR = "TargetShr"
    TARGET_SHR_I = "TargetShrI"
    TARGET_CMP = "TargetCmp"
    TARGET_CMP_I = "TargetCmpI"
    TARGET_PHI = "TargetPhi"
    TARGET_JMP = "TargetJmp"
    TARGET_COND = "TargetCond"
    TARGET_RETURN = "TargetReturn"
    TARGET_LOAD = "TargetLoad"
    TARGET_STORE = "TargetStore"


class EdgeKind(Enum):
    DATAFLOW = "Dataflow"
    CONTROLFLOW = "Controlflow"
    TRUE = "True"
    FALSE = "False"
    BLOCK = "BlockEdge"


class Relation(Enum):
    EQUAL = "Equal"
    NOT_EQUAL = "NotEqual"
    LESS = "Less"
    LESS_EQUAL = "LessEqual"
    GREATER = "Greater"
    GREATER_EQUAL = "GreaterEqual"


K = NodeKind

BINARY_KINDS = frozenset(
    {K.ADD, K.SUB, K.MUL, K.DIV, K.MOD, K.AND, K.OR, K.XOR, K.SHL, K.SHR, K.CMP}
)
COMMUTATIVE_KINDS = frozenset({K.ADD, K.MUL, K.AND, K.OR, K.XOR})
TARGET_KINDS = frozenset(k for k in NodeKind if k.value.startswith("Target"))
CONTROL_TRANSFER_KINDS = frozenset(
    {K.JMP, K.COND, K.RETURN, K.TARGET_JMP, K.TARGET_COND, K.TARGET_RETURN}
)
IMMEDIATE_KINDS = frozenset(
    {
        K.TARGET_ADD_I,
        K.TARGET_SUB_I,
        K.TARGET_MUL_I,
        K.TARGET_AND_I,
        K.TARGET_OR_I,
        K.TARGET_XOR_I,
        K.TARGET_SHL_I,
        K.TARGET_SHR_I,
        K.TARGET_CMP_I,
    }
)
TARGET_BINARY_KINDS = frozenset(
    {
        K.TARGET_ADD,
        K.TARGET_SUB,
        K.TARGET_MUL,
        K.TARGET_AND,
        K.TARGET_OR,
        K.TARGET_XOR,
        K.TARGET_SHL,
        K.TARGET_SHR,
        K.TARGET_CMP,
    }
)

# Attribute legality. Each attribute may appear exactly on these kinds.
VALUE_KINDS = frozenset({K.CONST, K.TARGET_CONST}) | IMMEDIATE_KINDS
RELATION_KINDS = frozenset({K.CMP, K.TARGET_CMP, K.TARGET_CMP_I})
MEMORY_KINDS = frozenset({K.LOAD, K.STORE, K.TARGET_LOAD, K.TARGET_STORE})

# Expected Dataflow fan-out per kind; None means variable (at least one).
ARITY: dict[NodeKind, int | None] = {
    K.BLOCK: 0,
    K.START: 0,
    K.END: 0,
    K.RETURN: 1,
    K.JMP: 0,
    K.COND: 1,
    K.PHI: None,
    K.CONST: 0,
    K.NOT: 1,
    K.LOAD: 1,
    K.STORE: 2,
    K.TARGET_CONST: 0,
    K.TARGET_NOT: 1,
    K.TARGET_PHI: None,
    K.TARGET_JMP: 0,
    K.TARGET_COND: 1,
    K.TARGET_RETURN: 1,
    K.TARGET_LOAD: 1,
    K.TARGET_STORE: 2,
}
for _k in BINARY_KINDS | TARGET_BINARY_KINDS:
    ARITY[_k] = 2
for _k in IMMEDIATE_KINDS:
    ARITY[_k] = 1

# Retyping maps used by instruction selection.
PLAIN_TARGET_OF = {
    K.CONST: K.TARGET_CONST,
    K.NOT: K.TARGET_NOT,
    K.ADD: K.TARGET_ADD,
    K.SUB: K.TARGET_SUB,
    K.MUL: K.TARGET_MUL,
    K.AND: K.TARGET_AND,
    K.OR: K.TARGET_OR,
    K.XOR: K.TARGET_XOR,
    K.SHL: K.TARGET_SHL,
    K.SHR: K.TARGET_SHR,
    K.CMP: K.TARGET_CMP,
    K.PHI: K.TARGET_PHI,
    K.JMP: K.TARGET_JMP,
    K.COND: K.TARGET_COND,
    K.RETURN: K.TARGET_RETURN,
    K.LOAD: K.TARGET_LOAD,
    K.STORE: K.TARGET_STORE,
}
IMMEDIATE_TARGET_OF = {
    K.ADD: K.TARGET_ADD_I,
    K.SUB: K.TARGET_SUB_I,
    K.MUL: K.TARGET_MUL_I,
    K.AND: K.TARGET_AND_I,
    K.OR: K.TARGET_OR_I,
    K.XOR: K.TARGET_XOR_I,
    K.SHL: K.TARGET_SHL_I,
    K.SHR: K.TARGET_SHR_I,
    K.CMP: K.TARGET_CMP_I,
}

CONTROL_EDGE_KINDS = frozenset({EdgeKind.CONTROLFLOW, EdgeKind.TRUE, EdgeKind.FALSE})

# Kinds immune to structural retyping and deletion.
ANCHOR_KINDS = frozenset({K.BLOCK, K.START, K.END})

del _k, K


def is_binary(kind: NodeKind) -> bool:
    return kind in BINARY_KINDS


def is_commutative(kind: NodeKind) -> bool:
    return kind in COMMUTATIVE_KINDS


def is_target(kind: NodeKind) -> bool:
    return kind in TARGET_KINDS


def is_control_transfer(kind: NodeKind) -> bool:
    return kind in CONTROL_TRANSFER_KINDS


class Node:
    __slots__ = ("kind", "value", "relation", "volatile")

    def __init__(
        self,
        kind: NodeKind,
        value: int | None = None,
        relation: Relation | None = None,
        volatile: bool | None = None,
    ):
        self.kind = kind
        self.value = value
        self.relation = relation
        self.volatile = volatile

    def __repr__(self) -> str:
        attrs = []
        if self.value is not None:
            attrs.append(f"value={self.value}")
        if self.relation is not None:
            attrs.append(f"relation={self.relation.value}")
        if self.volatile is not None:
            attrs.append(f"volatile={self.volatile}")
        inner = (": " + ", ".join(attrs)) if attrs else ""
        return f"<{self.kind.value}{inner}>"


class Edge:
    __slots__ = ("src", "dst", "kind", "position")

    def __init__(self, src: int, dst: int, kind: EdgeKind, position: int | None):
        self.src = src
        self.dst = dst
        self.kind = kind
        self.position = position

    def __repr__(self) -> str:
        pos = "" if self.position is None else f"@{self.position}"
        return f"<{self.src} -{self.kind.value}{pos}-> {self.dst}>"


class FirmGraph:
    """One function's worth of IR.

    Mutators keep the incidence lists consistent; there is no way to leave
    a dangling edge through the public interface. Verification is a
    separate read-only concern (see verifier.py), so structurally odd but
    representable graphs are allowed here.
    """

    def __init__(self) -> None:
        self._nodes: dict[int, Node] = {}
        self._out: dict[int, list[Edge]] = {}
        self._in: dict[int, list[Edge]] = {}
        self._next_id = 0
        self._edge_count = 0
        self.start_block: int | None = None
        self.end_block: int | None = None

    # -- basic queries ------------------------------------------------

    def __len__(self) -> int:
        return len(self._nodes)

    def __contains__(self, nid: int) -> bool:
        return nid in self._nodes

    @property
    def edge_count(self) -> int:
        return self._edge_count

    def node(self, nid: int) -> Node:
        try:
            return self._nodes[nid]
        except KeyError:
            raise GraphError(f"unknown node id {nid}") from None

    def kind_of(self, nid: int) -> NodeKind:
        return self.node(nid).kind

    def node_ids(self) -> Iterator[int]:
        """All live node ids in ascending order."""
        return iter(self._nodes)

    def items(self):
        return self._nodes.items()

    def edges(self) -> Iterator[Edge]:
        for lst in self._out.values():
            yield from lst

    def out_edges(self, nid: int, kind: EdgeKind | None = None) -> list[Edge]:
        lst = self._out.get(nid, ())
        if kind is None:
            return list(lst)
        return [e for e in lst if e.kind is kind]

    def in_edges(self, nid: int, kind: EdgeKind | None = None) -> list[Edge]:
        lst = self._in.get(nid, ())
        if kind is None:
            return list(lst)
        return [e for e in lst if e.kind is kind]

    # -- construction ---------------------------------------------------

    def add_node(
        self,
        kind: NodeKind,
        *,
        value: int | None = None,
        relation: Relation | None = None,
        volatile: bool | None = None,
        block: int | None = None,
    ) -> int:
        """Create a node, checking attribute legality for its kind.

        Non-Block nodes must name their containing block; a BlockEdge to it
        is created as part of this call. Blocks take no attributes at all.
        """
        if value is not None and kind not in VALUE_KINDS:
            raise GraphError(f"{kind.value} cannot carry a value attribute")
        if value is None and kind in VALUE_KINDS:
            raise GraphError(f"{kind.value} requires a value attribute")
        if relation is not None and kind not in RELATION_KINDS:
            raise GraphError(f"{kind.value} cannot carry a relation attribute")
        if relation is None and kind in RELATION_KINDS:
            raise GraphError(f"{kind.value} requires a relation attribute")
        if volatile is not None and kind not in MEMORY_KINDS:
            raise GraphError(f"{kind.value} cannot carry a volatile attribute")
        if volatile is None and kind in MEMORY_KINDS:
            volatile = False
        if value is not None and not (-(2**31) <= value <= 2**31 - 1):
            raise GraphError(f"value {value} outside 32-bit signed range")

        if kind is NodeKind.BLOCK:
            if block is not None:
                raise GraphError("a Block is not contained in a block")
        elif block is None:
            raise GraphError(f"{kind.value} node needs a containing block")

        nid = self._raw_add_node(kind, value, relation, volatile)
        if block is not None:
            self.add_edge(nid, block, EdgeKind.BLOCK)
        return nid

    def _raw_add_node(
        self,
        kind: NodeKind,
        value: int | None,
        relation: Relation | None,
        volatile: bool | None,
        nid: int | None = None,
    ) -> int:
        """Insert a node without legality checks (deserialization hook)."""
        if nid is None:
            nid = self._next_id
        elif nid in self._nodes:
            raise GraphError(f"duplicate node id {nid}")
        self._next_id = max(self._next_id, nid + 1)
        self._nodes[nid] = Node(kind, value, relation, volatile)
        self._out[nid] = []
        self._in[nid] = []
        return nid

    def add_edge(
        self, src: int, dst: int, kind: EdgeKind, position: int | None = None
    ) -> Edge:
        src_node = self.node(src)
        dst_node = self.node(dst)
        if kind is EdgeKind.BLOCK:
            if position is not None:
                raise GraphError("BlockEdge carries no position")
            if src_node.kind is NodeKind.BLOCK:
                raise GraphError("a Block cannot have a BlockEdge")
            if dst_node.kind is not NodeKind.BLOCK:
                raise GraphError(f"BlockEdge target {dst} is not a Block")
        else:
            if position is None or position < 0:
                raise GraphError(f"{kind.value} edge needs a position >= 0")
            if kind in CONTROL_EDGE_KINDS and src_node.kind is not NodeKind.BLOCK:
                raise GraphError(
                    f"{kind.value} edge must start at the target Block, "
                    f"not at a {src_node.kind.value}"
                )
        edge = Edge(src, dst, kind, position)
        self._out[src].append(edge)
        self._in[dst].append(edge)
        self._edge_count += 1
        return edge

    # -- mutation --------------------------------------------------------

    def delete_edge(self, edge: Edge) -> None:
        try:
            self._out[edge.src].remove(edge)
            self._in[edge.dst].remove(edge)
        except (KeyError, ValueError):
            raise GraphError(f"edge {edge!r} is not in the graph") from None
        self._edge_count -= 1

    def delete_node(self, nid: int) -> None:
        """Remove a node and every incident edge."""
        node = self.node(nid)
        if node.kind in (NodeKind.START, NodeKind.END):
            raise GraphError(f"refusing to delete the {node.kind.value} node")
        seen: dict[int, Edge] = {}
        for e in self._out[nid]:
            seen[id(e)] = e
        for e in self._in[nid]:
            seen[id(e)] = e
        for e in seen.values():
            self._out[e.src].remove(e)
            self._in[e.dst].remove(e)
            self._edge_count -= 1
        del self._nodes[nid]
        del self._out[nid]
        del self._in[nid]

    def retype_node(self, nid: int, new_kind: NodeKind) -> None:
        """Change a node's kind in place, keeping its id and edges.

        Attributes survive when the new kind can carry them and are dropped
        otherwise. Structural anchors (Block, Start, End) cannot take part.
        """
        node = self.node(nid)
        if node.kind in ANCHOR_KINDS or new_kind in ANCHOR_KINDS:
            raise GraphError(f"cannot retype {node.kind.value} to {new_kind.value}")
        node.kind = new_kind
        if new_kind not in VALUE_KINDS:
            node.value = None
        if new_kind not in RELATION_KINDS:
            node.relation = None
        if new_kind in MEMORY_KINDS:
            if node.volatile is None:
                node.volatile = False
        else:
            node.volatile = None

    def retype_edge(self, edge: Edge, new_kind: EdgeKind) -> None:
        """Change an edge's kind; only control kinds are interchangeable."""
        if edge.kind not in CONTROL_EDGE_KINDS or new_kind not in CONTROL_EDGE_KINDS:
            raise GraphError(
                f"cannot retype {edge.kind.value} edge to {new_kind.value}"
            )
        if edge not in self._out.get(edge.src, ()):
            raise GraphError(f"edge {edge!r} is not in the graph")
        edge.kind = new_kind

    def retarget_edge(self, edge: Edge, new_dst: int) -> None:
        """Point an existing edge at a different destination node."""
        self.node(new_dst)
        try:
            self._in[edge.dst].remove(edge)
        except (KeyError, ValueError):
            raise GraphError(f"edge {edge!r} is not in the graph") from None
        edge.dst = new_dst
        self._in[new_dst].append(edge)

    def redirect_users(self, frm: int, to: int) -> int:
        """Move every Dataflow edge ending at `frm` over to `to`.

        Positions are untouched. Returns the number of edges moved.
        """
        self.node(frm)
        self.node(to)
        if frm == to:
            raise GraphError("redirect_users needs two distinct nodes")
        moved = [e for e in self._in[frm] if e.kind is EdgeKind.DATAFLOW]
        for e in moved:
            self._in[frm].remove(e)
            e.dst = to
            self._in[to].append(e)
        return len(moved)

    # -- derived views ----------------------------------------------------

    def users_of(self, nid: int) -> list[tuple[int, int]]:
        """(user id, operand position) pairs, ordered by position then id."""
        self.node(nid)
        pairs = [
            (e.src, e.position)
            for e in self._in[nid]
            if e.kind is EdgeKind.DATAFLOW
        ]
        pairs.sort(key=lambda p: (p[1], p[0]))
        return pairs

    def operands_of(self, nid: int) -> list[tuple[int, int]]:
        """(operand id, position) pairs, ordered by position then id."""
        self.node(nid)
        pairs = [
            (e.dst, e.position)
            for e in self._out[nid]
            if e.kind is EdgeKind.DATAFLOW
        ]
        pairs.sort(key=lambda p: (p[1], p[0]))
        return pairs

    def operand_edges(self, nid: int) -> list[Edge]:
        edges = [e for e in self._out.get(nid, ()) if e.kind is EdgeKind.DATAFLOW]
        edges.sort(key=lambda e: (e.position, e.dst))
        return edges

    def block_of(self, nid: int) -> int:
        """The Block containing nid, via its BlockEdge."""
        for e in self._out.get(nid, ()):
            if e.kind is EdgeKind.BLOCK:
                return e.dst
        raise NoBlockError(f"node {nid} has no containing block")

    def members_of(self, block: int) -> list[int]:
        """Ids of nodes whose BlockEdge points at this block, ascending."""
        self.node(block)
        return sorted(e.src for e in self._in[block] if e.kind is EdgeKind.BLOCK)

    def control_in_edges(self, block: int) -> list[Edge]:
        """Control edges entering this block (src == block), by position."""
        edges = [e for e in self._out.get(block, ()) if e.kind in CONTROL_EDGE_KINDS]
        edges.sort(key=lambda e: (e.position, e.dst))
        return edges

    def control_preds_of(self, block: int) -> list[tuple[int, int, EdgeKind]]:
        """(transfer node, position, edge kind) per predecessor, by position."""
        return [(e.dst, e.position, e.kind) for e in self.control_in_edges(block)]

    # -- whole-graph helpers ----------------------------------------------

    def copy(self) -> "FirmGraph":
        g = FirmGraph()
        for nid, n in self._nodes.items():
            g._raw_add_node(n.kind, n.value, n.relation, n.volatile, nid=nid)
        for e in self.edges():
            g.add_edge(e.src, e.dst, e.kind, e.position)
        g._next_id = self._next_id
        g.start_block = self.start_block
        g.end_block = self.end_block
        return g

    def signature(self) -> tuple:
        """A canonical tuple equal for structurally identical graphs."""
        nodes = tuple(
            (
                nid,
                n.kind.value,
                n.value,
                None if n.relation is None else n.relation.value,
                n.volatile,
            )
            for nid, n in sorted(self._nodes.items())
        )
        edges = tuple(
            sorted(
                (e.src, e.kind.value, -1 if e.position is None else e.position, e.dst)
                for e in self.edges()
            )
        )
        return (nodes, edges, self.start_block, self.end_block)
