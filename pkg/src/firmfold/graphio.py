"""Serialization, DOT export, and seeded random graph generation.

The on-disk format is JSON: nodes carry id/kind/attributes plus a
"block" field naming their containing Block; edges list src/dst/kind/
position for everything except containment. The writer is canonical
(nodes by id, edges by (src, kind, position, dst), fixed key order), so
saving a loaded file reproduces it byte for byte.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .errors import FormatError, GraphError, NoBlockError
from .ir import EdgeKind, FirmGraph, NodeKind, Relation

_NODE_KEYS = frozenset({"id", "kind", "value", "relation", "volatile", "block"})
_EDGE_KEYS = frozenset({"src", "dst", "kind", "position"})


def _int_field(ctx: str, item: dict, key: str) -> int:
    value = item.get(key)
    if not isinstance(value, int) or isinstance(value, bool):
        raise FormatError(f"{ctx}: {key!r} must be an integer")
    return value


# -- JSON ------------------------------------------------------------------


def from_payload(data) -> FirmGraph:
    if not isinstance(data, dict):
        raise FormatError("top level must be a JSON object")
    extra = set(data) - {"nodes", "edges", "start", "end"}
    if extra:
        raise FormatError(f"unknown top-level keys: {sorted(extra)}")
    for key in ("nodes", "edges", "start", "end"):
        if key not in data:
            raise FormatError(f"missing top-level key {key!r}")
    if not isinstance(data["nodes"], list) or not isinstance(data["edges"], list):
        raise FormatError("'nodes' and 'edges' must be arrays")

    g = FirmGraph()
    pending_blocks: list[tuple[str, int, int]] = []
    for i, item in enumerate(data["nodes"]):
        ctx = f"nodes[{i}]"
        if not isinstance(item, dict):
            raise FormatError(f"{ctx}: must be an object")
        extra = set(item) - _NODE_KEYS
        if extra:
            raise FormatError(f"{ctx}: unknown keys {sorted(extra)}")
        nid = _int_field(ctx, item, "id")
        kind_name = item.get("kind")
        if not isinstance(kind_name, str):
            raise FormatError(f"{ctx}: 'kind' must be a string")
        try:
            kind = NodeKind(kind_name)
        except ValueError:
            raise FormatError(f"{ctx}: unknown node kind {kind_name!r}") from None
        value = None
        if "value" in item:
            value = _int_field(ctx, item, "value")
        relation = None
        if "relation" in item:
            rel_name = item["relation"]
            if not isinstance(rel_name, str):
                raise FormatError(f"{ctx}: 'relation' must be a string")
            try:
                relation = Relation(rel_name)
            except ValueError:
                raise FormatError(f"{ctx}: unknown relation {rel_name!r}") from None
        volatile = None
        if "volatile" in item:
            volatile = item["volatile"]
            if not isinstance(volatile, bool):
                raise FormatError(f"{ctx}: 'volatile' must be a boolean")
        try:
            g._raw_add_node(kind, value, relation, volatile, nid=nid)
        except GraphError as exc:
            raise FormatError(f"{ctx}: {exc}") from None
        if "block" in item:
            pending_blocks.append((ctx, nid, _int_field(ctx, item, "block")))

    for ctx, nid, block in pending_blocks:
        try:
            g.add_edge(nid, block, EdgeKind.BLOCK)
        except GraphError as exc:
            raise FormatError(f"{ctx}: {exc}") from None

    for i, item in enumerate(data["edges"]):
        ctx = f"edges[{i}]"
        if not isinstance(item, dict):
            raise FormatError(f"{ctx}: must be an object")
        extra = set(item) - _EDGE_KEYS
        if extra:
            raise FormatError(f"{ctx}: unknown keys {sorted(extra)}")
        src = _int_field(ctx, item, "src")
        dst = _int_field(ctx, item, "dst")
        kind_name = item.get("kind")
        if not isinstance(kind_name, str):
            raise FormatError(f"{ctx}: 'kind' must be a string")
        if kind_name == EdgeKind.BLOCK.value:
            raise FormatError(
                f"{ctx}: containment is written as the node's 'block' field, "
                "not as an explicit edge"
            )
        try:
            kind = EdgeKind(kind_name)
        except ValueError:
            raise FormatError(f"{ctx}: unknown edge kind {kind_name!r}") from None
        position = _int_field(ctx, item, "position") if "position" in item else None
        try:
            g.add_edge(src, dst, kind, position)
        except GraphError as exc:
            raise FormatError(f"{ctx}: {exc}") from None

    for key in ("start", "end"):
        ref = data[key]
        if ref is None:
            continue
        if not isinstance(ref, int) or isinstance(ref, bool):
            raise FormatError(f"{key!r} must be an integer node id")
        if ref not in g:
            raise FormatError(f"{key!r} references missing node {ref}")
        if key == "start":
            g.start_block = ref
        else:
            g.end_block = ref
    return g


def to_payload(g: FirmGraph) -> dict:
    nodes = []
    for nid in sorted(g.node_ids()):
        n = g.node(nid)
        item: dict = {"id": nid, "kind": n.kind.value}
        if n.value is not None:
            item["value"] = n.value
        if n.relation is not None:
            item["relation"] = n.relation.value
        if n.volatile is not None:
            item["volatile"] = n.volatile
        try:
            item["block"] = g.block_of(nid)
        except NoBlockError:
            pass
        nodes.append(item)
    plain = sorted(
        (
            (e.src, e.kind.value, e.position, e.dst)
            for e in g.edges()
            if e.kind is not EdgeKind.BLOCK
        ),
    )
    edges = [
        {"src": src, "dst": dst, "kind": kind, "position": pos}
        for src, kind, pos, dst in plain
    ]
    return {"nodes": nodes, "edges": edges, "start": g.start_block, "end": g.end_block}


def to_json(g: FirmGraph) -> str:
    return json.dumps(to_payload(g), indent=2) + "\n"


def from_json(text: str) -> FirmGraph:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from None
    return from_payload(data)


def load(path) -> FirmGraph:
    return from_json(Path(path).read_text(encoding="utf-8"))


def save(g: FirmGraph, path) -> None:
    Path(path).write_text(to_json(g), encoding="utf-8")


# -- DOT -------------------------------------------------------------------

_EDGE_STYLE = {
    EdgeKind.DATAFLOW: "color=black",
    EdgeKind.CONTROLFLOW: "color=blue, style=bold",
    EdgeKind.TRUE: "color=darkgreen, style=bold",
    EdgeKind.FALSE: "color=red, style=bold",
    EdgeKind.BLOCK: "color=gray60, style=dotted, arrowhead=none",
}


def _node_label(g: FirmGraph, nid: int) -> str:
    n = g.node(nid)
    parts = [f"{nid}: {n.kind.value}"]
    if n.value is not None:
        parts.append(str(n.value))
    if n.relation is not None:
        parts.append(n.relation.value)
    if n.volatile:
        parts.append("volatile")
    return " ".join(parts)


def _node_line(g: FirmGraph, nid: int, highlights) -> str:
    extra = ", style=filled, fillcolor=gold" if nid in highlights else ""
    return f'n{nid} [label="{_node_label(g, nid)}"{extra}];'


def to_dot(g: FirmGraph, highlights=frozenset()) -> str:
    highlights = set(highlights)
    lines = [
        "digraph firmfold {",
        '  node [shape=box, fontname="Helvetica", fontsize=10];',
    ]
    in_block: dict[int, list[int]] = {}
    floating: list[int] = []
    blocks: list[int] = []
    for nid, n in g.items():
        if n.kind is NodeKind.BLOCK:
            blocks.append(nid)
            continue
        try:
            in_block.setdefault(g.block_of(nid), []).append(nid)
        except NoBlockError:
            floating.append(nid)
    for b in blocks:
        lines.append(f"  subgraph cluster_{b} {{")
        lines.append(f'    label="Block {b}";')
        lines.append("    style=rounded;")
        extra = ", style=filled, fillcolor=gold" if b in highlights else ""
        lines.append(f'    n{b} [label="{b}", shape=circle{extra}];')
        for m in sorted(in_block.get(b, ())):
            lines.append("    " + _node_line(g, m, highlights))
        lines.append("  }")
    for nid in floating:
        lines.append("  " + _node_line(g, nid, highlights))
    drawn = sorted(
        g.edges(),
        key=lambda e: (
            e.src,
            e.kind.value,
            -1 if e.position is None else e.position,
            e.dst,
        ),
    )
    for e in drawn:
        style = _EDGE_STYLE[e.kind]
        label = "" if e.position is None else f'label="{e.position}", '
        lines.append(f"  n{e.src} -> n{e.dst} [{label}{style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot(g: FirmGraph, path, highlights=frozenset()) -> None:
    Path(path).write_text(to_dot(g, highlights), encoding="utf-8")


# -- random graphs ---------------------------------------------------------


@dataclass
class GenSpec:
    """Shape parameters for generate().

    blocks counts every Block including the entry and end blocks, so the
    minimum is 2. const_ratio steers how often operand picks mint (or
    reuse) a Const instead of referencing an earlier value.
    """

    blocks: int = 8
    ops_per_block: int = 6
    const_ratio: float = 0.4
    loop_count: int = 1
    input_count: int = 2


_BINARY_PALETTE = (
    NodeKind.ADD,
    NodeKind.SUB,
    NodeKind.MUL,
    NodeKind.AND,
    NodeKind.OR,
    NodeKind.XOR,
    NodeKind.SHL,
    NodeKind.SHR,
)
_NONCOMMUTATIVE = frozenset(
    {NodeKind.SUB, NodeKind.SHL, NodeKind.SHR, NodeKind.CMP}
)
_RELATIONS = tuple(Relation)


class _Generator:
    """Builds one reproducible function graph.

    Every value is tagged: dynamic (True) means it can never collapse to
    a Const under optimize, not-dynamic (False) means it surely does.
    Operands of non-commutative operations are ordered so a constant can
    only ever end up at position 1, mirroring what instruction selection
    expects. Div and Mod are never emitted because they have no target
    kinds to lower to.
    """

    def __init__(self, seed: int, spec: GenSpec):
        self.rng = random.Random(seed)
        self.spec = spec
        self.g = FirmGraph()
        self.consts: dict[int, int] = {}
        self.dyn: dict[int, bool] = {}
        self.entry: int = -1

    def const(self, value: int) -> int:
        nid = self.consts.get(value)
        if nid is None:
            nid = self.g.add_node(NodeKind.CONST, value=value, block=self.entry)
            self.consts[value] = nid
            self.dyn[nid] = False
        return nid

    def _const_value(self) -> int:
        if self.rng.random() < 0.85:
            return self.rng.randint(-9, 9)
        return self.rng.randint(-(2**31), 2**31 - 1)

    def pick(self, pool: list[int]) -> int:
        if not pool or self.rng.random() < self.spec.const_ratio:
            return self.const(self._const_value())
        return self.rng.choice(pool)

    def _ordered(self, kind: NodeKind, a: int, b: int) -> tuple[int, int]:
        if kind in _NONCOMMUTATIVE and not self.dyn[a] and self.dyn[b]:
            return b, a
        return a, b

    def emit_op(self, block: int, pool: list[int]) -> None:
        rng = self.rng
        r = rng.random()
        if r < 0.05 and pool:
            a = self.pick(pool)
            nid = self.g.add_node(NodeKind.NOT, block=block)
            self.g.add_edge(nid, a, EdgeKind.DATAFLOW, 0)
            self.dyn[nid] = self.dyn[a]
        else:
            if r < 0.11:
                kind = NodeKind.CMP
                relation = rng.choice(_RELATIONS)
            else:
                kind = rng.choice(_BINARY_PALETTE)
                relation = None
            a, b = self._ordered(kind, self.pick(pool), self.pick(pool))
            nid = self.g.add_node(kind, relation=relation, block=block)
            self.g.add_edge(nid, a, EdgeKind.DATAFLOW, 0)
            self.g.add_edge(nid, b, EdgeKind.DATAFLOW, 1)
            self.dyn[nid] = self.dyn[a] or self.dyn[b]
        pool.append(nid)

    def emit_ops(self, block: int, pool: list[int]) -> None:
        k = self.spec.ops_per_block
        if k <= 0:
            return
        count = self.rng.randint(max(1, k - 1), k + 1)
        for _ in range(count):
            self.emit_op(block, pool)

    def emit_chain(self, cur: int, pool: list[int]) -> int:
        nxt = self.g.add_node(NodeKind.BLOCK)
        jmp = self.g.add_node(NodeKind.JMP, block=cur)
        self.g.add_edge(nxt, jmp, EdgeKind.CONTROLFLOW, 0)
        return nxt

    def emit_diamond(self, cur: int, pool: list[int]) -> int:
        g, rng = self.g, self.rng
        if rng.random() < 0.8:
            a, b = self._ordered(NodeKind.CMP, self.pick(pool), self.pick(pool))
            cond_val = g.add_node(
                NodeKind.CMP, relation=rng.choice(_RELATIONS), block=cur
            )
            g.add_edge(cond_val, a, EdgeKind.DATAFLOW, 0)
            g.add_edge(cond_val, b, EdgeKind.DATAFLOW, 1)
            self.dyn[cond_val] = self.dyn[a] or self.dyn[b]
        else:
            cond_val = self.pick(pool)
        cond = g.add_node(NodeKind.COND, block=cur)
        g.add_edge(cond, cond_val, EdgeKind.DATAFLOW, 0)
        then_b = g.add_node(NodeKind.BLOCK)
        else_b = g.add_node(NodeKind.BLOCK)
        g.add_edge(then_b, cond, EdgeKind.TRUE, 0)
        g.add_edge(else_b, cond, EdgeKind.FALSE, 0)
        then_pool = list(pool)
        self.emit_ops(then_b, then_pool)
        else_pool = list(pool)
        self.emit_ops(else_b, else_pool)
        then_jmp = g.add_node(NodeKind.JMP, block=then_b)
        else_jmp = g.add_node(NodeKind.JMP, block=else_b)
        join = g.add_node(NodeKind.BLOCK)
        g.add_edge(join, then_jmp, EdgeKind.CONTROLFLOW, 0)
        g.add_edge(join, else_jmp, EdgeKind.CONTROLFLOW, 1)
        for _ in range(rng.randint(1, 2)):
            t = rng.choice(then_pool)
            if self.dyn[cond_val]:
                e = rng.choice(else_pool)
            else:
                # The branch folds statically, so the Phi collapses to one
                # arm; keep both arms in the same fold class so the
                # collapsed value's class stays predictable.
                same = [v for v in else_pool if self.dyn[v] == self.dyn[t]]
                if same:
                    e = rng.choice(same)
                elif self.dyn[t]:
                    e = t
                else:
                    e = self.const(self._const_value())
            phi = g.add_node(NodeKind.PHI, block=join)
            g.add_edge(phi, t, EdgeKind.DATAFLOW, 0)
            g.add_edge(phi, e, EdgeKind.DATAFLOW, 1)
            if t == e:
                self.dyn[phi] = self.dyn[t]
            elif not self.dyn[cond_val]:
                self.dyn[phi] = self.dyn[t]
            else:
                self.dyn[phi] = True
            pool.append(phi)
        return join

    def emit_loop(self, cur: int, pool: list[int]) -> int:
        g, rng = self.g, self.rng
        header = g.add_node(NodeKind.BLOCK)
        body = g.add_node(NodeKind.BLOCK)
        after = g.add_node(NodeKind.BLOCK)
        pre_jmp = g.add_node(NodeKind.JMP, block=cur)
        g.add_edge(header, pre_jmp, EdgeKind.CONTROLFLOW, 0)
        iters = rng.randint(1, 6)
        c_init = self.const(0)
        c_step = self.const(1)
        c_bound = self.const(iters)
        counter = g.add_node(NodeKind.PHI, block=header)
        acc = g.add_node(NodeKind.PHI, block=header)
        self.dyn[counter] = True
        self.dyn[acc] = True
        acc_init = self.pick(pool)
        cmp = g.add_node(NodeKind.CMP, relation=Relation.LESS, block=header)
        g.add_edge(cmp, counter, EdgeKind.DATAFLOW, 0)
        g.add_edge(cmp, c_bound, EdgeKind.DATAFLOW, 1)
        self.dyn[cmp] = True
        cond = g.add_node(NodeKind.COND, block=header)
        g.add_edge(cond, cmp, EdgeKind.DATAFLOW, 0)
        g.add_edge(body, cond, EdgeKind.TRUE, 0)
        g.add_edge(after, cond, EdgeKind.FALSE, 0)
        body_pool = list(pool) + [counter, acc]
        self.emit_ops(body, body_pool)
        step = g.add_node(NodeKind.ADD, block=body)
        g.add_edge(step, counter, EdgeKind.DATAFLOW, 0)
        g.add_edge(step, c_step, EdgeKind.DATAFLOW, 1)
        self.dyn[step] = True
        acc_kind = rng.choice(_BINARY_PALETTE)
        acc_next = g.add_node(acc_kind, block=body)
        g.add_edge(acc_next, acc, EdgeKind.DATAFLOW, 0)
        g.add_edge(acc_next, rng.choice(body_pool), EdgeKind.DATAFLOW, 1)
        self.dyn[acc_next] = True
        back_jmp = g.add_node(NodeKind.JMP, block=body)
        g.add_edge(header, back_jmp, EdgeKind.CONTROLFLOW, 1)
        g.add_edge(counter, c_init, EdgeKind.DATAFLOW, 0)
        g.add_edge(counter, step, EdgeKind.DATAFLOW, 1)
        g.add_edge(acc, acc_init, EdgeKind.DATAFLOW, 0)
        g.add_edge(acc, acc_next, EdgeKind.DATAFLOW, 1)
        pool.append(counter)
        pool.append(acc)
        return after

    def run(self) -> FirmGraph:
        spec, g, rng = self.spec, self.g, self.rng
        if spec.blocks < 2:
            raise ValueError("need at least 2 blocks (code and end)")
        if spec.ops_per_block < 0 or spec.loop_count < 0 or spec.input_count < 0:
            raise ValueError("ops_per_block, loop_count and input_count must be >= 0")
        if not 0.0 <= spec.const_ratio <= 1.0:
            raise ValueError("const_ratio must be within [0, 1]")
        budget = spec.blocks - 2
        if 3 * spec.loop_count > budget:
            raise ValueError(
                f"{spec.loop_count} loop(s) need {3 * spec.loop_count} blocks, "
                f"only {budget} available"
            )
        self.entry = g.add_node(NodeKind.BLOCK)
        g.start_block = self.entry
        g.add_node(NodeKind.START, block=self.entry)
        end_block = g.add_node(NodeKind.BLOCK)
        g.end_block = end_block
        g.add_node(NodeKind.END, block=end_block)

        pool: list[int] = []
        for i in range(spec.input_count):
            addr = self.const(i)
            load = g.add_node(NodeKind.LOAD, volatile=True, block=self.entry)
            g.add_edge(load, addr, EdgeKind.DATAFLOW, 0)
            self.dyn[load] = True
            pool.append(load)

        budget -= 3 * spec.loop_count
        diamonds = rng.randint(0, budget // 3)
        budget -= 3 * diamonds
        plan = (
            ["loop"] * spec.loop_count
            + ["diamond"] * diamonds
            + ["chain"] * budget
        )
        rng.shuffle(plan)

        cur = self.entry
        self.emit_ops(cur, pool)
        for segment in plan:
            if segment == "loop":
                cur = self.emit_loop(cur, pool)
            elif segment == "diamond":
                cur = self.emit_diamond(cur, pool)
            else:
                cur = self.emit_chain(cur, pool)
            self.emit_ops(cur, pool)

        ret = g.add_node(NodeKind.RETURN, block=cur)
        g.add_edge(ret, self.pick(pool), EdgeKind.DATAFLOW, 0)
        g.add_edge(end_block, ret, EdgeKind.CONTROLFLOW, 0)
        return g


def generate(seed: int, spec: GenSpec | None = None) -> FirmGraph:
    """Build a reproducible verify-clean graph from a seed and shape."""
    return _Generator(seed, spec or GenSpec()).run()


def spec_for_nodes(target: int) -> GenSpec:
    """A GenSpec that lands near (at or above) a node-count target."""
    blocks = max(2, target // 50)
    return GenSpec(
        blocks=blocks,
        ops_per_block=48,
        const_ratio=0.35,
        loop_count=blocks // 25,
        input_count=min(8, max(1, target // 100)),
    )
