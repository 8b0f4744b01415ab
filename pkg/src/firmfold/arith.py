"""32-bit signed two's-complement integer semantics.

All constant values in the IR live in [-2**31, 2**31 - 1] and every
operation wraps. Division and remainder truncate toward zero (C-style),
shifts use only the low five bits of the shift amount, and the right
shift is arithmetic. Comparisons produce 1 or 0.
"""

from __future__ import annotations

from .ir import NodeKind, Relation

INT_MIN = -(2**31)
INT_MAX = 2**31 - 1

_U32 = 1 << 32
_SIGN = 1 << 31


def wrap32(x: int) -> int:
    """Reduce an arbitrary integer into signed 32-bit range."""
    x &= _U32 - 1
    return x - _U32 if x & _SIGN else x


def trunc_div(a: int, b: int) -> int:
    """Signed division truncating toward zero. b must be nonzero."""
    q = abs(a) // abs(b)
    return -q if (a < 0) != (b < 0) else q


def trunc_mod(a: int, b: int) -> int:
    """Remainder matching trunc_div: the result takes the sign of a."""
    r = abs(a) % abs(b)
    return -r if a < 0 else r


def relation_holds(rel: Relation, a: int, b: int) -> bool:
    if rel is Relation.EQUAL:
        return a == b
    if rel is Relation.NOT_EQUAL:
        return a != b
    if rel is Relation.LESS:
        return a < b
    if rel is Relation.LESS_EQUAL:
        return a <= b
    if rel is Relation.GREATER:
        return a > b
    if rel is Relation.GREATER_EQUAL:
        return a >= b
    raise ValueError(f"unknown relation {rel!r}")


def apply_not(a: int) -> int:
    return wrap32(~a)


def apply_binary(kind: NodeKind, a: int, b: int, relation: Relation | None = None) -> int | None:
    """Evaluate one binary operation on in-range operands.

    Returns None for division or remainder by zero; those never fold and
    the interpreter turns them into a trap.
    """
    if kind is NodeKind.ADD:
        return wrap32(a + b)
    if kind is NodeKind.SUB:
        return wrap32(a - b)
    if kind is NodeKind.MUL:
        return wrap32(a * b)
    if kind is NodeKind.DIV:
        if b == 0:
            return None
        return wrap32(trunc_div(a, b))
    if kind is NodeKind.MOD:
        if b == 0:
            return None
        return wrap32(trunc_mod(a, b))
    if kind is NodeKind.AND:
        return wrap32(a & b)
    if kind is NodeKind.OR:
        return wrap32(a | b)
    if kind is NodeKind.XOR:
        return wrap32(a ^ b)
    if kind is NodeKind.SHL:
        return wrap32(a << (b % 32))
    if kind is NodeKind.SHR:
        # Python's >> on a signed int is already an arithmetic shift.
        return a >> (b % 32)
    if kind is NodeKind.CMP:
        if relation is None:
            raise ValueError("Cmp needs a relation")
        return 1 if relation_holds(relation, a, b) else 0
    raise ValueError(f"{kind.value} is not a binary operation")
