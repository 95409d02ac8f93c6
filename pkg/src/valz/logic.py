"""The two-sorted formula language: terms, AST, parser, printer, evaluation.

Group terms are integer linear combinations of group variables. Value terms
live in the sort -inf < 0 < 1 < ... < +inf and are built from value
variables, literals, the successor S and the scaled valuations v[l](t).

Concrete syntax::

    term    := INT | IDENT | term "+" term | term "-" term | INT "*" term | "-" term
    vterm   := IDENT | INT | "+inf" | "-inf" | "S(" vterm ")" | "v[" INT "](" term ")"
    atom    := term "=" "0" | vterm CMP vterm | "true" | "false"
             | "Div(" INT "," INT "," PRIMESET "," INT ";" vterm "," vterm ")"
             | "Ind(" INT "," PRIMESET "," INT ";" vterm "," vterm ")"
             | "@" IDENT "(" vterm ("," vterm)* ")"
    formula := atom | "~" formula | formula ("&" | "|" | "->") formula
             | ("E" | "A") IDENT ":" ("G" | "I") "." formula

Binding strength, tightest first: ``~``, ``&``, ``|``, ``->`` (right
associative); a quantifier body extends as far right as possible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping, Union

from .chain import NEG_INF, POS_INF, Value, ValuationChain, div_pred, fin, ind_pred
from .errors import DomainError, ParseError, SortError, UnsupportedFragment

GROUP, VALUE = "G", "I"


# --- group terms ------------------------------------------------------------


@dataclass(frozen=True)
class Term:
    """sum(k_v * v) + const with canonical (sorted, nonzero) coefficients."""

    coeffs: tuple[tuple[str, int], ...] = ()
    const: int = 0

    @staticmethod
    def make(coeffs: Mapping[str, int] | None = None, const: int = 0) -> Term:
        items = tuple(sorted((v, k) for v, k in (coeffs or {}).items() if k))
        return Term(items, const)

    @staticmethod
    def var(name: str) -> Term:
        return Term(((name, 1),), 0)

    @staticmethod
    def constant(c: int) -> Term:
        return Term((), c)

    def as_dict(self) -> dict[str, int]:
        return dict(self.coeffs)

    def coeff(self, name: str) -> int:
        return self.as_dict().get(name, 0)

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(v for v, _ in self.coeffs)

    @property
    def is_constant(self) -> bool:
        return not self.coeffs

    def __add__(self, other: Term | int) -> Term:
        if isinstance(other, int):
            return Term(self.coeffs, self.const + other)
        d = self.as_dict()
        for v, k in other.coeffs:
            d[v] = d.get(v, 0) + k
        return Term.make(d, self.const + other.const)

    def __neg__(self) -> Term:
        return Term(tuple((v, -k) for v, k in self.coeffs), -self.const)

    def __sub__(self, other: Term | int) -> Term:
        return self + (-other)

    def __radd__(self, other: int) -> Term:
        return self + other

    def __rsub__(self, other: int) -> Term:
        return (-self) + other

    def __mul__(self, k: int) -> Term:
        return Term.make({v: c * k for v, c in self.coeffs}, self.const * k)

    __rmul__ = __mul__

    def without(self, name: str) -> Term:
        return Term.make({v: k for v, k in self.coeffs if v != name}, self.const)

    def substitute(self, name: str, value: Term) -> Term:
        k = self.coeff(name)
        return self.without(name) + value * k if k else self

    def evaluate(self, env: Mapping[str, int]) -> int:
        try:
            return self.const + sum(k * env[v] for v, k in self.coeffs)
        except KeyError as exc:
            raise DomainError(f"unassigned group variable {exc.args[0]}") from None

    def __str__(self) -> str:
        out = ""
        for v, k in self.coeffs:
            mag = abs(k)
            piece = v if mag == 1 else f"{mag}*{v}"
            if not out:
                out = piece if k > 0 else f"-{piece}"
            else:
                out += f" + {piece}" if k > 0 else f" - {piece}"
        if not out:
            return str(self.const)
        if self.const > 0:
            out += f" + {self.const}"
        elif self.const < 0:
            out += f" - {-self.const}"
        return out


# --- value terms ------------------------------------------------------------


@dataclass(frozen=True)
class VVar:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class VLit:
    value: Value

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Succ:
    arg: VTerm

    def __str__(self) -> str:
        return f"S({self.arg})"


@dataclass(frozen=True)
class Val:
    scale: int
    term: Term

    def __post_init__(self) -> None:
        if self.scale < 1:
            raise DomainError("valuation scale must be positive")

    def __str__(self) -> str:
        return f"v[{self.scale}]({self.term})"


VTerm = Union[VVar, VLit, Succ, Val]


# --- formulas ---------------------------------------------------------------

CMP_OPS = ("=", "<=", ">=", "<", ">")


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Eq:
    """term = 0"""

    term: Term


@dataclass(frozen=True)
class Cmp:
    lhs: VTerm
    op: str
    rhs: VTerm

    def __post_init__(self) -> None:
        if self.op not in CMP_OPS:
            raise DomainError(f"unknown comparison {self.op!r}")


@dataclass(frozen=True)
class Div:
    q: int
    k: int
    pi: frozenset[int]
    scale: int
    lo: VTerm
    hi: VTerm


@dataclass(frozen=True)
class Ind:
    k: int
    pi: frozenset[int]
    scale: int
    lo: VTerm
    hi: VTerm


@dataclass(frozen=True)
class Rel:
    """User-supplied predicate or monotone relation on the value sort."""

    name: str
    args: tuple[VTerm, ...]


@dataclass(frozen=True)
class Not:
    arg: Formula


@dataclass(frozen=True)
class And:
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Or:
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Implies:
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Quant:
    kind: str  # "E" or "A"
    var: str
    sort: str  # GROUP or VALUE
    body: Formula


Atom = Union[Const, Eq, Cmp, Div, Ind, Rel]
Formula = Union[Atom, Not, And, Or, Implies, Quant]
ATOMS = (Const, Eq, Cmp, Div, Ind, Rel)

TRUE, FALSE = Const(True), Const(False)


def Exists(var: str, sort: str, body: Formula) -> Quant:
    return Quant("E", var, sort, body)


def Forall(var: str, sort: str, body: Formula) -> Quant:
    return Quant("A", var, sort, body)


def conj(parts: list[Formula]) -> Formula:
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(parts: list[Formula]) -> Formula:
    if not parts:
        return FALSE
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


# --- traversal helpers ------------------------------------------------------


def vterm_children(t: VTerm) -> Iterator[VTerm]:
    if isinstance(t, Succ):
        yield t.arg


def atom_vterms(a: Atom) -> tuple[VTerm, ...]:
    if isinstance(a, Cmp):
        return (a.lhs, a.rhs)
    if isinstance(a, (Div, Ind)):
        return (a.lo, a.hi)
    if isinstance(a, Rel):
        return a.args
    return ()


def vterm_group_terms(t: VTerm) -> Iterator[Term]:
    while isinstance(t, Succ):
        t = t.arg
    if isinstance(t, Val):
        yield t.term


def atom_group_terms(a: Atom) -> list[Term]:
    if isinstance(a, Eq):
        return [a.term]
    return [g for vt in atom_vterms(a) for g in vterm_group_terms(vt)]


def vterm_vars(t: VTerm) -> set[str]:
    while isinstance(t, Succ):
        t = t.arg
    return {t.name} if isinstance(t, VVar) else set()


def atom_value_vars(a: Atom) -> set[str]:
    out: set[str] = set()
    for vt in atom_vterms(a):
        out |= vterm_vars(vt)
    return out


def atom_group_vars(a: Atom) -> set[str]:
    out: set[str] = set()
    for g in atom_group_terms(a):
        out |= g.variables
    return out


def free_vars(f: Formula) -> dict[str, str]:
    """Free variables with their sorts."""
    if isinstance(f, ATOMS):
        out = {v: GROUP for v in atom_group_vars(f)}
        out.update({v: VALUE for v in atom_value_vars(f)})
        return out
    if isinstance(f, Not):
        return free_vars(f.arg)
    if isinstance(f, (And, Or, Implies)):
        return {**free_vars(f.lhs), **free_vars(f.rhs)}
    if isinstance(f, Quant):
        inner = free_vars(f.body)
        inner.pop(f.var, None)
        return inner
    raise TypeError(f"not a formula: {f!r}")


def atoms(f: Formula) -> Iterator[Atom]:
    if isinstance(f, ATOMS):
        yield f
    elif isinstance(f, Not):
        yield from atoms(f.arg)
    elif isinstance(f, (And, Or, Implies)):
        yield from atoms(f.lhs)
        yield from atoms(f.rhs)
    elif isinstance(f, Quant):
        yield from atoms(f.body)


def is_quantifier_free(f: Formula) -> bool:
    if isinstance(f, ATOMS):
        return True
    if isinstance(f, Not):
        return is_quantifier_free(f.arg)
    if isinstance(f, (And, Or, Implies)):
        return is_quantifier_free(f.lhs) and is_quantifier_free(f.rhs)
    return False


def quantifier_count(f: Formula) -> int:
    if isinstance(f, ATOMS):
        return 0
    if isinstance(f, Not):
        return quantifier_count(f.arg)
    if isinstance(f, (And, Or, Implies)):
        return quantifier_count(f.lhs) + quantifier_count(f.rhs)
    return 1 + quantifier_count(f.body)


def map_atoms(f: Formula, fn: Callable[[Atom], Formula]) -> Formula:
    if isinstance(f, ATOMS):
        return fn(f)
    if isinstance(f, Not):
        return Not(map_atoms(f.arg, fn))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(map_atoms(f.lhs, fn), map_atoms(f.rhs, fn))
    if isinstance(f, Quant):
        return Quant(f.kind, f.var, f.sort, map_atoms(f.body, fn))
    raise TypeError(f"not a formula: {f!r}")


def _map_vterm(t: VTerm, fn: Callable[[VTerm], VTerm | None]) -> VTerm:
    out = fn(t)
    if out is not None:
        return out
    if isinstance(t, Succ):
        return Succ(_map_vterm(t.arg, fn))
    return t


def map_atom_vterms(a: Atom, fn: Callable[[VTerm], VTerm | None]) -> Atom:
    if isinstance(a, Cmp):
        return Cmp(_map_vterm(a.lhs, fn), a.op, _map_vterm(a.rhs, fn))
    if isinstance(a, Div):
        return Div(a.q, a.k, a.pi, a.scale, _map_vterm(a.lo, fn), _map_vterm(a.hi, fn))
    if isinstance(a, Ind):
        return Ind(a.k, a.pi, a.scale, _map_vterm(a.lo, fn), _map_vterm(a.hi, fn))
    if isinstance(a, Rel):
        return Rel(a.name, tuple(_map_vterm(t, fn) for t in a.args))
    return a


def substitute_value(f: Formula, name: str, value: Value) -> Formula:
    """Replace the free value variable ``name`` by a literal."""

    def on_vterm(t: VTerm) -> VTerm | None:
        if isinstance(t, VVar) and t.name == name:
            return VLit(value)
        return None

    if isinstance(f, Quant):
        if f.var == name:
            return f
        return Quant(f.kind, f.var, f.sort, substitute_value(f.body, name, value))
    if isinstance(f, ATOMS):
        return map_atom_vterms(f, on_vterm)
    if isinstance(f, Not):
        return Not(substitute_value(f.arg, name, value))
    return type(f)(substitute_value(f.lhs, name, value), substitute_value(f.rhs, name, value))


def substitute_group(f: Formula, name: str, value: Term) -> Formula:
    """Replace the free group variable ``name`` by a term."""

    def on_vterm(t: VTerm) -> VTerm | None:
        if isinstance(t, Val):
            return Val(t.scale, t.term.substitute(name, value))
        return None

    def on_atom(a: Atom) -> Atom:
        if isinstance(a, Eq):
            return Eq(a.term.substitute(name, value))
        return map_atom_vterms(a, on_vterm)

    if isinstance(f, Quant):
        if f.var == name:
            return f
        if f.var in value.variables:
            raise DomainError(f"substitution would capture {f.var}")
        return Quant(f.kind, f.var, f.sort, substitute_group(f.body, name, value))
    if isinstance(f, ATOMS):
        return on_atom(f)
    if isinstance(f, Not):
        return Not(substitute_group(f.arg, name, value))
    return type(f)(substitute_group(f.lhs, name, value), substitute_group(f.rhs, name, value))


# --- printing ---------------------------------------------------------------

_P_IMP, _P_OR, _P_AND, _P_NOT = 1, 2, 3, 4


def _fmt_primes(pi: frozenset[int]) -> str:
    return "{" + ",".join(str(p) for p in sorted(pi)) + "}"


def format_atom(a: Atom) -> str:
    if isinstance(a, Const):
        return "true" if a.value else "false"
    if isinstance(a, Eq):
        return f"{a.term} = 0"
    if isinstance(a, Cmp):
        return f"{a.lhs} {a.op} {a.rhs}"
    if isinstance(a, Div):
        return f"Div({a.q},{a.k},{_fmt_primes(a.pi)},{a.scale}; {a.lo}, {a.hi})"
    if isinstance(a, Ind):
        return f"Ind({a.k},{_fmt_primes(a.pi)},{a.scale}; {a.lo}, {a.hi})"
    if isinstance(a, Rel):
        return f"@{a.name}(" + ", ".join(str(t) for t in a.args) + ")"
    raise TypeError(a)


def to_text(f: Formula, prec: int = 0) -> str:
    if isinstance(f, ATOMS):
        return format_atom(f)
    if isinstance(f, Not):
        if isinstance(f.arg, (Eq, Cmp)):
            return f"~({format_atom(f.arg)})"
        return "~" + to_text(f.arg, _P_NOT)
    if isinstance(f, Quant):
        s = f"{f.kind} {f.var}:{f.sort}. {to_text(f.body, 0)}"
        return f"({s})" if prec > 0 else s
    if isinstance(f, And):
        s = f"{to_text(f.lhs, _P_AND)} & {to_text(f.rhs, _P_AND + 1)}"
        return f"({s})" if prec > _P_AND else s
    if isinstance(f, Or):
        s = f"{to_text(f.lhs, _P_OR)} | {to_text(f.rhs, _P_OR + 1)}"
        return f"({s})" if prec > _P_OR else s
    if isinstance(f, Implies):
        s = f"{to_text(f.lhs, _P_IMP + 1)} -> {to_text(f.rhs, _P_IMP)}"
        return f"({s})" if prec > _P_IMP else s
    raise TypeError(f"not a formula: {f!r}")


# --- evaluation -------------------------------------------------------------

Relations = Mapping[str, Callable[..., bool]]


def eval_vterm(
    t: VTerm, genv: Mapping[str, int], venv: Mapping[str, Value], chain: ValuationChain
) -> Value:
    if isinstance(t, VLit):
        return t.value
    if isinstance(t, VVar):
        try:
            return venv[t.name]
        except KeyError:
            raise DomainError(f"unassigned value variable {t.name}") from None
    if isinstance(t, Succ):
        return eval_vterm(t.arg, genv, venv, chain).succ()
    if isinstance(t, Val):
        return chain.valuate(t.term.evaluate(genv), t.scale)
    raise TypeError(t)


def compare(a: Value, op: str, b: Value) -> bool:
    if op == "=":
        return a == b
    if op == "<=":
        return a <= b
    if op == ">=":
        return a >= b
    if op == "<":
        return a < b
    return a > b


def eval_atom(
    a: Atom,
    genv: Mapping[str, int],
    venv: Mapping[str, Value],
    chain: ValuationChain,
    relations: Relations | None = None,
) -> bool:
    if isinstance(a, Const):
        return a.value
    if isinstance(a, Eq):
        return a.term.evaluate(genv) == 0
    if isinstance(a, Cmp):
        return compare(eval_vterm(a.lhs, genv, venv, chain), a.op, eval_vterm(a.rhs, genv, venv, chain))
    if isinstance(a, Div):
        lo, hi = eval_vterm(a.lo, genv, venv, chain), eval_vterm(a.hi, genv, venv, chain)
        return div_pred(chain, a.q, a.k, a.pi, a.scale, lo, hi)
    if isinstance(a, Ind):
        lo, hi = eval_vterm(a.lo, genv, venv, chain), eval_vterm(a.hi, genv, venv, chain)
        return ind_pred(chain, a.k, a.pi, a.scale, lo, hi)
    if isinstance(a, Rel):
        if not relations or a.name not in relations:
            raise UnsupportedFragment(f"no interpretation supplied for @{a.name}")
        return bool(relations[a.name](*(eval_vterm(t, genv, venv, chain) for t in a.args)))
    raise TypeError(a)


def evaluate_qf(
    f: Formula,
    genv: Mapping[str, int],
    venv: Mapping[str, Value],
    chain: ValuationChain,
    relations: Relations | None = None,
) -> bool:
    """Truth of a quantifier-free formula over (Z, chain) under an assignment."""
    if isinstance(f, ATOMS):
        return eval_atom(f, genv, venv, chain, relations)
    if isinstance(f, Not):
        return not evaluate_qf(f.arg, genv, venv, chain, relations)
    if isinstance(f, And):
        return evaluate_qf(f.lhs, genv, venv, chain, relations) and evaluate_qf(
            f.rhs, genv, venv, chain, relations
        )
    if isinstance(f, Or):
        return evaluate_qf(f.lhs, genv, venv, chain, relations) or evaluate_qf(
            f.rhs, genv, venv, chain, relations
        )
    if isinstance(f, Implies):
        return (not evaluate_qf(f.lhs, genv, venv, chain, relations)) or evaluate_qf(
            f.rhs, genv, venv, chain, relations
        )
    raise DomainError("evaluate_qf expects a quantifier-free formula")


# --- parsing ----------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<op><=|>=|->|!=|[<>=~&|()\[\]{},;:.*+\-@]))"
)
_KEYWORDS = {"E", "A", "S", "v", "Div", "Ind", "inf", "true", "false"}


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup or "op"
        start = m.start(kind)
        toks.append(_Tok(kind, m.group(kind), start))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


# raw expressions, resolved to a sort once the atom's shape is known
@dataclass(frozen=True)
class _RInt:
    n: int
    pos: int


@dataclass(frozen=True)
class _RId:
    name: str
    pos: int


@dataclass(frozen=True)
class _RLin:
    """Arithmetic node: forces the group sort."""

    op: str  # "+", "-", "neg", "*"
    args: tuple
    pos: int


@dataclass(frozen=True)
class _RVal:
    node: object  # VLit-like payload for inf, ("S", raw), ("v", l, raw)
    pos: int


@dataclass
class _RawAtom:
    kind: str  # "cmp", "div", "ind", "rel", "const"
    payload: tuple
    pos: int


@dataclass
class _Scope:
    bound: dict[str, str] = field(default_factory=dict)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    # token helpers
    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "ident") and self.tok.text == text

    def expect(self, text: str) -> _Tok:
        if not self.at(text):
            raise ParseError(f"expected {text!r}, found {self.tok.text or 'end of input'!r}", self.tok.pos)
        t = self.tok
        self.i += 1
        return t

    def expect_int(self) -> int:
        if self.tok.kind != "int":
            raise ParseError(f"expected integer, found {self.tok.text or 'end of input'!r}", self.tok.pos)
        n = int(self.tok.text)
        self.i += 1
        return n

    def expect_ident(self) -> _Tok:
        if self.tok.kind != "ident" or self.tok.text in _KEYWORDS:
            raise ParseError(f"expected identifier, found {self.tok.text or 'end of input'!r}", self.tok.pos)
        t = self.tok
        self.i += 1
        return t

    # formulas
    def formula(self) -> object:
        lhs = self.disjunction()
        if self.at("->"):
            self.i += 1
            return ("imp", lhs, self.formula())
        return lhs

    def disjunction(self) -> object:
        out = self.conjunction()
        while self.at("|"):
            self.i += 1
            out = ("or", out, self.conjunction())
        return out

    def conjunction(self) -> object:
        out = self.unary()
        while self.at("&"):
            self.i += 1
            out = ("and", out, self.unary())
        return out

    def unary(self) -> object:
        if self.at("~"):
            self.i += 1
            return ("not", self.unary())
        if self.tok.kind == "ident" and self.tok.text in ("E", "A") and self.peek().kind == "ident":
            kind = self.tok.text
            self.i += 1
            var = self.expect_ident()
            self.expect(":")
            if not (self.at("G") or self.at("I")):
                raise ParseError("expected sort G or I", self.tok.pos)
            sort = self.tok.text
            self.i += 1
            self.expect(".")
            return ("q", kind, var.text, sort, self.formula(), var.pos)
        if self.at("("):
            save = self.i
            try:
                return self.atom()
            except ParseError:
                self.i = save
            self.i += 1
            inner = self.formula()
            self.expect(")")
            return inner
        return self.atom()

    def atom(self) -> _RawAtom:
        t = self.tok
        if t.kind == "ident" and t.text in ("true", "false"):
            self.i += 1
            return _RawAtom("const", (t.text == "true",), t.pos)
        if t.kind == "ident" and t.text == "Div" and self.peek().text == "(":
            self.i += 2
            q = self.expect_int()
            self.expect(",")
            k = self.expect_int()
            self.expect(",")
            pi = self.primeset()
            self.expect(",")
            l = self.expect_int()
            self.expect(";")
            lo = self.expr()
            self.expect(",")
            hi = self.expr()
            self.expect(")")
            return _RawAtom("div", (q, k, pi, l, lo, hi), t.pos)
        if t.kind == "ident" and t.text == "Ind" and self.peek().text == "(":
            self.i += 2
            k = self.expect_int()
            self.expect(",")
            pi = self.primeset()
            self.expect(",")
            l = self.expect_int()
            self.expect(";")
            lo = self.expr()
            self.expect(",")
            hi = self.expr()
            self.expect(")")
            return _RawAtom("ind", (k, pi, l, lo, hi), t.pos)
        if self.at("@"):
            self.i += 1
            name = self.expect_ident().text
            self.expect("(")
            args = [self.expr()]
            while self.at(","):
                self.i += 1
                args.append(self.expr())
            self.expect(")")
            return _RawAtom("rel", (name, tuple(args)), t.pos)
        lhs = self.expr()
        if not (self.tok.kind == "op" and self.tok.text in CMP_OPS + ("!=",)):
            raise ParseError(f"expected comparison, found {self.tok.text or 'end of input'!r}", self.tok.pos)
        op = self.tok.text
        self.i += 1
        rhs = self.expr()
        return _RawAtom("cmp", (lhs, op, rhs), t.pos)

    def primeset(self) -> frozenset[int]:
        self.expect("{")
        out: list[int] = []
        if not self.at("}"):
            out.append(self.expect_int())
            while self.at(","):
                self.i += 1
                out.append(self.expect_int())
        self.expect("}")
        return frozenset(out)

    # expressions
    def expr(self) -> object:
        out = self.product()
        while self.at("+") or self.at("-"):
            op, pos = self.tok.text, self.tok.pos
            self.i += 1
            out = _RLin(op, (out, self.product()), pos)
        return out

    def product(self) -> object:
        t = self.tok
        if self.at("-"):
            if self.peek().kind == "ident" and self.peek().text == "inf":
                self.i += 2
                return _RVal(VLit(NEG_INF), t.pos)
            self.i += 1
            return _RLin("neg", (self.product(),), t.pos)
        if self.at("+") and self.peek().kind == "ident" and self.peek().text == "inf":
            self.i += 2
            return _RVal(VLit(POS_INF), t.pos)
        if t.kind == "int":
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text == "*":
                self.i += 2
                return _RLin("*", (int(t.text), self.product()), t.pos)
            if nxt.kind == "ident" and nxt.text not in _KEYWORDS and nxt.pos == t.pos + len(t.text):
                self.i += 1
                return _RLin("*", (int(t.text), self.product()), t.pos)
        return self.primary()

    def primary(self) -> object:
        t = self.tok
        if t.kind == "int":
            self.i += 1
            return _RInt(int(t.text), t.pos)
        if t.kind == "ident" and t.text == "inf":
            self.i += 1
            return _RVal(VLit(POS_INF), t.pos)
        if t.kind == "ident" and t.text == "S" and self.peek().text == "(":
            self.i += 2
            arg = self.expr()
            self.expect(")")
            return _RVal(("S", arg), t.pos)
        if t.kind == "ident" and t.text == "v" and self.peek().text == "[":
            self.i += 2
            l = self.expect_int()
            self.expect("]")
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return _RVal(("v", l, arg), t.pos)
        if t.kind == "ident" and t.text not in _KEYWORDS:
            self.i += 1
            return _RId(t.text, t.pos)
        if self.at("("):
            self.i += 1
            inner = self.expr()
            self.expect(")")
            return inner
        raise ParseError(f"unexpected token {t.text or 'end of input'!r}", t.pos)


def _raw_ids(node: object, ctx: str | None, out: list[tuple[str, str | None, int]]) -> None:
    """Collect identifiers with the sort their syntactic context forces (None if open)."""
    if isinstance(node, _RId):
        out.append((node.name, ctx, node.pos))
    elif isinstance(node, _RLin):
        for a in node.args:
            if not isinstance(a, int):
                _raw_ids(a, GROUP, out)
    elif isinstance(node, _RVal) and isinstance(node.node, tuple):
        if node.node[0] == "S":
            _raw_ids(node.node[1], VALUE, out)
        else:
            _raw_ids(node.node[2], GROUP, out)


def _is_valueish(node: object) -> bool:
    return isinstance(node, _RVal)


def _is_groupish(node: object) -> bool:
    return isinstance(node, _RLin)


class _Resolver:
    def __init__(self, text: str):
        self.text = text
        self.free: dict[str, str] = {}

    def sort_of(self, name: str, scope: dict[str, str]) -> str | None:
        return scope.get(name, self.free.get(name))

    def note(self, name: str, sort: str, scope: dict[str, str], pos: int) -> None:
        have = self.sort_of(name, scope)
        if have is None:
            self.free[name] = sort
        elif have != sort:
            raise SortError(f"variable {name} used at sort {sort} but has sort {have}", pos)

    # pass 1: definite sorts of free identifiers
    def collect(self, raw: object, scope: dict[str, str]) -> None:
        if isinstance(raw, _RawAtom):
            ids: list[tuple[str, str | None, int]] = []
            if raw.kind == "cmp":
                lhs, op, rhs = raw.payload
                _raw_ids(lhs, None, ids)
                _raw_ids(rhs, None, ids)
            elif raw.kind in ("div", "ind"):
                for node in raw.payload[-2:]:
                    _raw_ids(node, VALUE, ids)
            elif raw.kind == "rel":
                for node in raw.payload[1]:
                    _raw_ids(node, VALUE, ids)
            for name, ctx, pos in ids:
                if ctx is not None:
                    self.note(name, ctx, scope, pos)
            return
        tag = raw[0]
        if tag == "not":
            self.collect(raw[1], scope)
        elif tag in ("and", "or", "imp"):
            self.collect(raw[1], scope)
            self.collect(raw[2], scope)
        elif tag == "q":
            _, kind, var, sort, body, pos = raw
            self.collect(body, {**scope, var: sort})

    # pass 2: build the AST
    def build(self, raw: object, scope: dict[str, str]) -> Formula:
        if isinstance(raw, _RawAtom):
            return self.build_atom(raw, scope)
        tag = raw[0]
        if tag == "not":
            return Not(self.build(raw[1], scope))
        if tag in ("and", "or", "imp"):
            cls = {"and": And, "or": Or, "imp": Implies}[tag]
            return cls(self.build(raw[1], scope), self.build(raw[2], scope))
        _, kind, var, sort, body, pos = raw
        return Quant(kind, var, sort, self.build(body, {**scope, var: sort}))

    def build_atom(self, raw: _RawAtom, scope: dict[str, str]) -> Atom:
        if raw.kind == "const":
            return Const(raw.payload[0])
        if raw.kind == "div":
            q, k, pi, l, lo, hi = raw.payload
            return Div(q, k, pi, l, self.vterm(lo, scope), self.vterm(hi, scope))
        if raw.kind == "ind":
            k, pi, l, lo, hi = raw.payload
            return Ind(k, pi, l, self.vterm(lo, scope), self.vterm(hi, scope))
        if raw.kind == "rel":
            name, args = raw.payload
            return Rel(name, tuple(self.vterm(a, scope) for a in args))
        lhs, op, rhs = raw.payload
        if self.side_sort(lhs, scope) == VALUE or self.side_sort(rhs, scope) == VALUE:
            sort = VALUE
        elif self.side_sort(lhs, scope) == GROUP or self.side_sort(rhs, scope) == GROUP:
            sort = GROUP
        else:
            sort = GROUP if op in ("=", "!=") else VALUE
        if sort == GROUP:
            if op not in ("=", "!="):
                raise SortError(f"ordering {op!r} is not defined on the group sort", raw.pos)
            atom: Atom = Eq(self.term(lhs, scope) - self.term(rhs, scope))
        else:
            atom = Cmp(self.vterm(lhs, scope), "=" if op == "!=" else op, self.vterm(rhs, scope))
        return Not(atom) if op == "!=" else atom  # type: ignore[return-value]

    def side_sort(self, node: object, scope: dict[str, str]) -> str | None:
        if _is_valueish(node):
            return VALUE
        if _is_groupish(node):
            return GROUP
        if isinstance(node, _RId):
            return self.sort_of(node.name, scope)
        return None

    def term(self, node: object, scope: dict[str, str]) -> Term:
        if isinstance(node, _RInt):
            return Term.constant(node.n)
        if isinstance(node, _RId):
            self.note(node.name, GROUP, scope, node.pos)
            return Term.var(node.name)
        if isinstance(node, _RLin):
            if node.op == "neg":
                return -self.term(node.args[0], scope)
            if node.op == "*":
                return self.term(node.args[1], scope) * node.args[0]
            a, b = (self.term(x, scope) for x in node.args)
            return a + b if node.op == "+" else a - b
        pos = getattr(node, "pos", None)
        raise SortError("value-sort expression used where a group term is expected", pos)

    def vterm(self, node: object, scope: dict[str, str]) -> VTerm:
        if isinstance(node, _RInt):
            return VLit(fin(node.n))
        if isinstance(node, _RId):
            self.note(node.name, VALUE, scope, node.pos)
            return VVar(node.name)
        if isinstance(node, _RVal):
            payload = node.node
            if isinstance(payload, VLit):
                return payload
            if payload[0] == "S":
                return Succ(self.vterm(payload[1], scope))
            _, l, arg = payload
            if l < 1:
                raise ParseError("valuation scale must be positive", node.pos)
            return Val(l, self.term(arg, scope))
        raise SortError("group term used where a value term is expected", getattr(node, "pos", None))


def parse(text: str) -> Formula:
    """Parse a formula; raises ParseError / SortError with a character position."""
    p = _Parser(text)
    raw = p.formula()
    if p.tok.kind != "eof":
        raise ParseError(f"unexpected trailing input {p.tok.text!r}", p.tok.pos)
    r = _Resolver(text)
    r.collect(raw, {})
    return r.build(raw, {})


def parse_with_sorts(text: str) -> tuple[Formula, dict[str, str]]:
    f = parse(text)
    return f, free_vars(f)
