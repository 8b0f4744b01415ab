"""Reference execution: values, traps, step accounting, Phi timing."""

import pytest

from conftest import (
    DF,
    build_add_graph,
    build_counting_loop,
    build_diamond,
    build_div_graph,
    build_infinite_loop,
    build_swap_loop,
    finish_return,
    func_graph,
)
from firmfold.errors import InterpreterError
from firmfold.interp import TRAP_DIV_BY_ZERO, TRAP_STEP_LIMIT, execute
from firmfold.ir import EdgeKind, FirmGraph, NodeKind, Relation


def test_straight_line_add():
    g, _ = build_add_graph(1, 2)
    result = execute(g)
    assert result.ok
    assert result.value == 3
    assert result.trapped is None
    # one transfer plus three value computations
    assert result.steps == 4


def test_step_budget_boundary():
    g, _ = build_add_graph(1, 2)
    assert execute(g, max_steps=4).ok
    trapped = execute(g, max_steps=3)
    assert trapped.trapped == TRAP_STEP_LIMIT
    assert trapped.value is None
    assert not trapped.ok


def test_static_diamond_branches():
    g_true, _ = build_diamond(cond_const=1)
    assert execute(g_true).value == 10
    g_false, _ = build_diamond(cond_const=0)
    assert execute(g_false).value == 20


def test_dynamic_diamond_reads_inputs():
    g, names = build_diamond(cond_const=None)
    assert execute(g, {names["cond_src"]: 5}).value == 10
    assert execute(g, {names["cond_src"]: 0}).value == 20
    assert execute(g, {names["cond_src"]: -1}).value == 10  # any nonzero


def test_counting_loop_runs_to_its_bound():
    g, _ = build_counting_loop(bound=5)
    result = execute(g)
    assert result.ok and result.value == 5
    g0, _ = build_counting_loop(bound=0)
    assert execute(g0).value == 0


def test_phis_update_simultaneously_on_entry():
    g, _ = build_swap_loop(iters=3, x0=1, y0=2)
    # x, y swap each iteration; after an odd number x holds y0
    assert execute(g).value == 2
    g2, _ = build_swap_loop(iters=4, x0=1, y0=2)
    assert execute(g2).value == 1


def test_divide_by_zero_traps():
    g, names = build_div_graph()
    assert execute(g, {names["x"]: -7, names["d"]: 2}).value == -3
    trapped = execute(g, {names["x"]: 1, names["d"]: 0})
    assert trapped.trapped == TRAP_DIV_BY_ZERO
    assert trapped.value is None


def test_divide_by_const_zero_traps_instead_of_folding():
    g, names = build_div_graph(divisor_const=0)
    assert execute(g, {names["x"]: 1}).trapped == TRAP_DIV_BY_ZERO


def test_step_limit_trap_counts_every_step():
    g, _ = build_infinite_loop()
    result = execute(g, max_steps=50)
    assert result.trapped == TRAP_STEP_LIMIT
    assert result.steps == 51


def test_volatile_load_needs_an_input():
    g, names = build_div_graph()
    with pytest.raises(InterpreterError, match="no input value"):
        execute(g, {names["x"]: 1})


def test_non_volatile_load_reads_zero():
    g, entry, _ = func_graph()
    addr = g.add_node(NodeKind.CONST, value=123, block=entry)
    load = g.add_node(NodeKind.LOAD, block=entry)
    g.add_edge(load, addr, DF, 0)
    finish_return(g, entry, load)
    assert execute(g).value == 0


def test_stores_are_never_demanded():
    g, entry, _ = func_graph()
    addr = g.add_node(NodeKind.CONST, value=0, block=entry)
    val = g.add_node(NodeKind.CONST, value=9, block=entry)
    store = g.add_node(NodeKind.STORE, volatile=True, block=entry)
    g.add_edge(store, addr, DF, 0)
    g.add_edge(store, val, DF, 1)
    finish_return(g, entry, val)
    result = execute(g)
    assert result.ok and result.value == 9
    assert store in g


def test_missing_start_block_is_an_error():
    with pytest.raises(InterpreterError, match="no start block"):
        execute(FirmGraph())


def test_block_without_transfer_is_an_error():
    g, entry, _ = func_graph()
    g.add_node(NodeKind.CONST, value=1, block=entry)
    with pytest.raises(InterpreterError, match="no control transfer"):
        execute(g)


def test_phi_in_the_start_block_is_an_error():
    g, entry, _ = func_graph()
    c = g.add_node(NodeKind.CONST, value=1, block=entry)
    phi = g.add_node(NodeKind.PHI, block=entry)
    g.add_edge(phi, c, DF, 0)
    finish_return(g, entry, phi)
    with pytest.raises(InterpreterError, match="read before any predecessor"):
        execute(g)


def test_lowered_graphs_execute_too():
    g, entry, _ = func_graph()
    c = g.add_node(NodeKind.TARGET_CONST, value=9, block=entry)
    addi = g.add_node(NodeKind.TARGET_ADD_I, value=5, block=entry)
    g.add_edge(addi, c, DF, 0)
    ret = g.add_node(NodeKind.TARGET_RETURN, block=entry)
    g.add_edge(ret, addi, DF, 0)
    g.add_edge(g.end_block, ret, EdgeKind.CONTROLFLOW, 0)
    result = execute(g)
    assert result.ok and result.value == 14
    assert result.steps == 3


def test_lowered_cmp_immediate_uses_its_relation():
    g, entry, _ = func_graph()
    c = g.add_node(NodeKind.TARGET_CONST, value=2, block=entry)
    cmpi = g.add_node(
        NodeKind.TARGET_CMP_I, value=3, relation=Relation.LESS, block=entry
    )
    g.add_edge(cmpi, c, DF, 0)
    ret = g.add_node(NodeKind.TARGET_RETURN, block=entry)
    g.add_edge(ret, cmpi, DF, 0)
    g.add_edge(g.end_block, ret, EdgeKind.CONTROLFLOW, 0)
    assert execute(g).value == 1  # 2 < 3
