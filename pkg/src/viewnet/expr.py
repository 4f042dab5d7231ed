"""Attribute types and the small guard/invariant expression language."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Tuple, Union

from .errors import TypingError, UnresolvedSymbol
from .lexer import Cursor

Value = Union[bool, int, str]


# -- types ---------------------------------------------------------------

@dataclass(frozen=True)
class BoolType:
    def domain(self):
        return (False, True)

    def contains(self, v) -> bool:
        return isinstance(v, bool)

    def __str__(self) -> str:
        return "Bool"


@dataclass(frozen=True)
class IntType:
    lo: Optional[int] = None
    hi: Optional[int] = None

    def domain(self):
        if self.lo is None or self.hi is None:
            raise TypingError(f"type {self} has no finite domain")
        return tuple(range(self.lo, self.hi + 1))

    def contains(self, v) -> bool:
        if isinstance(v, bool) or not isinstance(v, int):
            return False
        return (self.lo is None or v >= self.lo) and (self.hi is None or v <= self.hi)

    def __str__(self) -> str:
        if self.lo is None or self.hi is None:
            return "Int"
        return f"Int {self.lo}..{self.hi}"


@dataclass(frozen=True)
class EnumType:
    literals: Tuple[str, ...]

    def domain(self):
        return self.literals

    def contains(self, v) -> bool:
        return isinstance(v, str) and v in self.literals

    def __str__(self) -> str:
        return f"Enum({', '.join(self.literals)})"


Type = Union[BoolType, IntType, EnumType]
BOOL = BoolType()
INT = IntType()


def same_sort(a: Type, b: Type) -> bool:
    """Int ranges are one sort for comparisons; enums compare by identity."""
    if isinstance(a, IntType) and isinstance(b, IntType):
        return True
    return a == b


def parse_type(cur: Cursor) -> Type:
    name = cur.ident("type")
    if name == "Bool":
        return BOOL
    if name == "Int":
        if cur.tok.kind == "int" or cur.at("-"):
            lo = cur.integer()
            cur.expect("..")
            hi = cur.integer()
            return IntType(lo, hi)
        return INT
    if name == "Enum":
        cur.expect("(")
        lits = [cur.ident("enum literal")]
        while cur.accept(","):
            lits.append(cur.ident("enum literal"))
        cur.expect(")")
        return EnumType(tuple(lits))
    cur.error(f"unknown type {name!r}")


def format_value(v: Value) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


# -- expressions ---------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: Value


@dataclass(frozen=True)
class SelfAttr:
    name: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # "not" | "-"
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Const, SelfAttr, Var, Unary, Binary]

_CMP = ("==", "!=", "<", "<=", ">", ">=")


def parse_expr(cur: Cursor) -> Expr:
    return _or(cur)


def _or(cur):
    e = _and(cur)
    while cur.accept("or", "||", "∨"):
        e = Binary("or", e, _and(cur))
    return e


def _and(cur):
    e = _not(cur)
    while cur.accept("and", "&&", "∧"):
        e = Binary("and", e, _not(cur))
    return e


def _not(cur):
    if cur.accept("not", "!", "¬"):
        return Unary("not", _not(cur))
    return _cmp(cur)


def _cmp(cur):
    e = _add(cur)
    if cur.tok.kind == "op" and cur.tok.text in _CMP:
        op = cur.advance().text
        e = Binary(op, e, _add(cur))
    return e


def _add(cur):
    e = _neg(cur)
    while cur.tok.kind == "op" and cur.tok.text in ("+", "-"):
        op = cur.advance().text
        e = Binary(op, e, _neg(cur))
    return e


def _neg(cur):
    if cur.accept("-"):
        inner = _neg(cur)
        if isinstance(inner, Const) and isinstance(inner.value, int) and not isinstance(inner.value, bool):
            return Const(-inner.value)
        return Unary("-", inner)
    return _primary(cur)


def _primary(cur):
    t = cur.tok
    if cur.accept("("):
        e = parse_expr(cur)
        cur.expect(")")
        return e
    if t.kind == "int":
        cur.advance()
        return Const(int(t.text))
    if t.kind == "ident":
        cur.advance()
        if t.text == "true":
            return Const(True)
        if t.text == "false":
            return Const(False)
        if t.text == "self":
            cur.expect(".")
            return SelfAttr(cur.ident("attribute"))
        return Var(t.text)
    cur.error(f"expected expression, found {cur.describe(t)}")


def format_expr(e: Expr) -> str:
    if isinstance(e, Const):
        return format_value(e.value)
    if isinstance(e, SelfAttr):
        return f"self.{e.name}"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        if e.op == "not":
            return f"not {_wrap(e.operand)}"
        return f"-{_wrap(e.operand)}"
    return f"{_wrap(e.left)} {e.op} {_wrap(e.right)}"


def _wrap(e: Expr) -> str:
    s = format_expr(e)
    return f"({s})" if isinstance(e, (Binary, Unary)) else s


def attrs_of(e: Expr) -> set:
    if isinstance(e, SelfAttr):
        return {e.name}
    if isinstance(e, Unary):
        return attrs_of(e.operand)
    if isinstance(e, Binary):
        return attrs_of(e.left) | attrs_of(e.right)
    return set()


def rename_attrs(e: Expr, mapping: Mapping[str, str]) -> Expr:
    if isinstance(e, SelfAttr):
        if e.name not in mapping:
            raise UnresolvedSymbol(f"attribute {e.name!r} is not mapped")
        return SelfAttr(mapping[e.name])
    if isinstance(e, Unary):
        return Unary(e.op, rename_attrs(e.operand, mapping))
    if isinstance(e, Binary):
        return Binary(e.op, rename_attrs(e.left, mapping), rename_attrs(e.right, mapping))
    return e


def typecheck(
    e: Expr,
    attrs: Mapping[str, Type],
    params: Mapping[str, Type] = {},
    literals: Mapping[str, Type] = {},
) -> Type:
    if isinstance(e, Const):
        return BOOL if isinstance(e.value, bool) else INT
    if isinstance(e, SelfAttr):
        if e.name not in attrs:
            raise UnresolvedSymbol(f"unknown attribute self.{e.name}")
        return attrs[e.name]
    if isinstance(e, Var):
        if e.name in params:
            return params[e.name]
        if e.name in literals:
            return literals[e.name]
        raise UnresolvedSymbol(f"unbound name {e.name!r}")
    if isinstance(e, Unary):
        t = typecheck(e.operand, attrs, params, literals)
        want = BOOL if e.op == "not" else INT
        if not same_sort(t, want):
            raise TypingError(f"operator {e.op} applied to {t}")
        return want
    lt = typecheck(e.left, attrs, params, literals)
    rt = typecheck(e.right, attrs, params, literals)
    if e.op in ("and", "or"):
        if lt != BOOL or rt != BOOL:
            raise TypingError(f"operator {e.op} needs Bool operands, got {lt} and {rt}")
        return BOOL
    if e.op in ("+", "-"):
        if not (isinstance(lt, IntType) and isinstance(rt, IntType)):
            raise TypingError(f"operator {e.op} needs Int operands, got {lt} and {rt}")
        return INT
    if e.op in ("==", "!="):
        if not same_sort(lt, rt):
            raise TypingError(f"cannot compare {lt} with {rt}")
        return BOOL
    if not (isinstance(lt, IntType) and isinstance(rt, IntType)):
        raise TypingError(f"operator {e.op} needs Int operands, got {lt} and {rt}")
    return BOOL


def evaluate(
    e: Expr,
    attrs: Mapping[str, Value],
    bindings: Mapping[str, Value] = {},
    literals=frozenset(),
) -> Value:
    """Evaluate ``e`` with ``self`` attributes ``attrs`` and parameter ``bindings``.

    Integer arithmetic is unbounded here; ranges are only enforced on
    assignment.
    """
    if isinstance(e, Const):
        return e.value
    if isinstance(e, SelfAttr):
        try:
            return attrs[e.name]
        except KeyError:
            raise UnresolvedSymbol(f"unknown attribute self.{e.name}") from None
    if isinstance(e, Var):
        if e.name in bindings:
            return bindings[e.name]
        if e.name in literals:
            return e.name
        raise UnresolvedSymbol(f"unbound name {e.name!r}")
    if isinstance(e, Unary):
        v = evaluate(e.operand, attrs, bindings, literals)
        if e.op == "not":
            _need_bool(v, e.op)
            return not v
        _need_int(v, e.op)
        return -v
    if e.op == "and":
        l = evaluate(e.left, attrs, bindings, literals)
        _need_bool(l, e.op)
        if not l:
            return False
        r = evaluate(e.right, attrs, bindings, literals)
        _need_bool(r, e.op)
        return r
    if e.op == "or":
        l = evaluate(e.left, attrs, bindings, literals)
        _need_bool(l, e.op)
        if l:
            return True
        r = evaluate(e.right, attrs, bindings, literals)
        _need_bool(r, e.op)
        return r
    l = evaluate(e.left, attrs, bindings, literals)
    r = evaluate(e.right, attrs, bindings, literals)
    if e.op == "==":
        return _same_kind(l, r, e.op) and l == r
    if e.op == "!=":
        return not (_same_kind(l, r, e.op) and l == r)
    _need_int(l, e.op)
    _need_int(r, e.op)
    if e.op == "+":
        return l + r
    if e.op == "-":
        return l - r
    if e.op == "<":
        return l < r
    if e.op == "<=":
        return l <= r
    if e.op == ">":
        return l > r
    if e.op == ">=":
        return l >= r
    raise TypingError(f"unknown operator {e.op}")


def _need_bool(v, op):
    if not isinstance(v, bool):
        raise TypingError(f"operator {op} expects Bool, got {v!r}")


def _need_int(v, op):
    if isinstance(v, bool) or not isinstance(v, int):
        raise TypingError(f"operator {op} expects Int, got {v!r}")


def _same_kind(l, r, op) -> bool:
    if isinstance(l, bool) != isinstance(r, bool) or type(l) is str and type(r) is not str:
        raise TypingError(f"operator {op} compares {l!r} with {r!r}")
    return True


def type_of_value(v: Value) -> Type:
    if isinstance(v, bool):
        return BOOL
    if isinstance(v, int):
        return IntType(v, v)
    return EnumType((v,))


Bindings = Dict[str, Value]
