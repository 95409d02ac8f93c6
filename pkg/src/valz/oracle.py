"""Brute-force reference implementations.

Nothing here touches the congruence or elimination engines: every answer
comes from evaluating memberships pointwise through the chain's valuation.

Why finite enumeration decides group quantifiers: an atom v[l](t) compared
against values below K only depends on t modulo l*n_K, unless t = 0 exactly.
So for a bound variable x it suffices to try one representative of every
residue class modulo G = lcm(l)*n_K, chosen so that no term vanishes there,
plus the finitely many points where some term in x does vanish. G also
absorbs the term coefficients, since eliminating an inner variable from
k*y = t leaves the condition "k divides t" on the outer ones.
"""

from __future__ import annotations

import math
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .ambient import FiniteQuotient
from .arith import lcm
from .chain import NEG_INF, POS_INF, Value, ValuationChain, fin
from .errors import DepthExceeded, DomainError, ResourceLimit
from .logic import (
    ATOMS,
    GROUP,
    Atom,
    And,
    Formula,
    Implies,
    Not,
    Or,
    Quant,
    Relations,
    Succ,
    Term,
    VLit,
    VVar,
    Val,
    VTerm,
    atom_group_terms,
    atom_vterms,
    atoms,
    eval_atom,
    free_vars,
)
from .system import CongruenceSystem

MAX_MODULUS = 1 << 24
MAX_QUOTIENT = 1 << 20


def brute_count(system: CongruenceSystem, chain: ValuationChain, max_modulus: int = MAX_MODULUS) -> int:
    """Residues r mod M (the boundary modulus) whose class contains a solution.

    When a positive equation fixes x the count is the number of solutions
    itself (0 or 1).
    """
    points = [c.rhs // c.coeff for c in system.positives if c.is_equation and c.rhs % c.coeff == 0]
    if any(c.is_equation for c in system.positives):
        eqs = [c for c in system.positives if c.is_equation]
        if len(points) < len(eqs):
            return 0
        return int(len(set(points)) == 1 and system.holds(points[0], chain))
    m = system.boundary_modulus(chain)
    if m > max_modulus:
        raise ResourceLimit(f"boundary modulus {m} exceeds {max_modulus}")
    holes = sum(1 for c in system.negations if c.is_equation)
    return sum(
        1 for r in range(m) if any(system.holds(r + t * m, chain) for t in range(holes + 1))
    )


def brute_solutions(system: CongruenceSystem, chain: ValuationChain, lo: int, hi: int) -> list[int]:
    return [x for x in range(lo, hi + 1) if system.holds(x, chain)]


def brute_count_quotient(n: int, a: Sequence[int] | int, q: FiniteQuotient, m2: int) -> int:
    """#{x in Q : n*x - a in m2*Q} by exhaustive enumeration."""
    if q.order > MAX_QUOTIENT:
        raise ResourceLimit(f"quotient of order {q.order} exceeds {MAX_QUOTIENT}")
    rhs = q.embed(a) if isinstance(a, int) else tuple(a)
    # membership in m2*Q, coordinate by coordinate: divisibility by the step
    steps = [math.gcd(m, m2) for m in q.moduli]
    checks = list(zip(rhs, steps))
    return sum(1 for x in q.elements() if all((n * c - r) % step == 0 for c, (r, step) in zip(x, checks)))


def brute_multi(
    per_valuation: Sequence[tuple[ValuationChain, CongruenceSystem]], limit: int | None = None
) -> int | None:
    """Least x >= 0 satisfying every system, scanning one full common period."""
    total = lcm(*(s.boundary_modulus(c) for c, s in per_valuation))
    holes = sum(1 for _, s in per_valuation for m in s.members if m.negated and m.is_equation)
    eq_points = [
        m.rhs // m.coeff
        for _, s in per_valuation
        for m in s.positives
        if m.is_equation and m.rhs % m.coeff == 0
    ]
    if any(m.is_equation for _, s in per_valuation for m in s.positives):
        for x in eq_points:
            if all(s.holds(x, c) for c, s in per_valuation):
                return x
        return None
    stop = limit if limit is not None else total * (holes + 1)
    for x in range(stop):
        if all(s.holds(x, c) for c, s in per_valuation):
            return x
    return None


# --- sentences --------------------------------------------------------------


def _bare(t: VTerm) -> VTerm:
    while isinstance(t, Succ):
        t = t.arg
    return t


def _two_sided_level(a: Atom, x: str, genv: Mapping[str, int], chain: ValuationChain) -> int:
    """A level that the two sides of ``a`` cannot both reach.

    If both sides are valuations of terms t1, t2 in x, then D = c2*t1 - c1*t2
    is free of x, and n_j | t1, t2 would force n_j | D. So when D is a known
    nonzero integer, one side always sits below level v(D) + 1 and is read
    off exactly from x modulo a bounded modulus.
    """
    sides = [t.term for t in map(_bare, atom_vterms(a)) if isinstance(t, Val) and t.term.coeff(x)]
    top = 0
    for t1, t2 in combinations(sides, 2):
        d = t1 * t2.coeff(x) - t2 * t1.coeff(x)
        if d.variables <= genv.keys():
            value = d.evaluate(genv)
            if value:
                try:
                    top = max(top, chain.valuate(value).n + 1)
                except DepthExceeded:
                    pass
    return top


def _level_need(
    f: Formula, value_bound: int, venv: Mapping[str, Value], x: str, genv: Mapping[str, int], chain: ValuationChain
) -> int:
    """Largest level an atom of ``f`` can tell apart, plus successor depth."""
    top, depth = 0, 0
    for a in atoms(f):
        top = max(top, _two_sided_level(a, x, genv, chain))
        for t in atom_vterms(a):
            d = 0
            while isinstance(t, Succ):
                d += 1
                t = t.arg
            depth = max(depth, d)
            if isinstance(t, VLit) and t.value.is_finite:
                top = max(top, t.value.n)
            if isinstance(t, VVar):
                v = venv.get(t.name)
                top = max(top, v.n if v is not None and v.is_finite else value_bound)
    return top + depth + 1


def _coefficient_product(f: Formula, x: str, assigned: Iterable[str]) -> int:
    """Product of the distinct |coefficients| of variables bound inside ``f``.

    Eliminating an inner variable y from k*y = t leaves the condition
    "k divides t" on the outer variables, which a residue modulo the chain's
    moduli alone does not see.
    """
    known = set(assigned) | {x}
    seen = {1}
    for a in atoms(f):
        for t in atom_group_terms(a):
            if t.variables - known:
                seen.update(abs(c) for _, c in t.coeffs)
    out = 1
    for c in seen:
        out *= c
    return out


def _primitive(t: Term) -> Term:
    g = 0
    for _, c in t.coeffs:
        g = math.gcd(g, c)
    g = math.gcd(g, t.const) or 1
    if t.coeffs and t.coeffs[0][1] < 0:
        g = -g
    return Term.make({v: c // g for v, c in t.coeffs}, t.const // g)


MAX_POINT_TERMS = 4096


def _point_terms(f: Formula, x: str, assigned: Iterable[str]) -> set[Term]:
    """Terms whose zeros can single out a value of ``x``.

    Besides the terms of ``f`` this includes every combination obtained by
    eliminating the still-unassigned inner variables pairwise: an inner
    equation k1*y = ... pins y, and substituting it into another term can make
    that term vanish at one specific x.
    """
    known = set(assigned) | {x}
    terms = {_primitive(t) for a in atoms(f) for t in atom_group_terms(a)}
    inner = sorted({v for t in terms for v in t.variables} - known)
    for y in inner:
        with_y = [t for t in terms if t.coeff(y)]
        out = {t for t in terms if not t.coeff(y)}
        for t1, t2 in combinations(with_y, 2):
            combo = t1 * t2.coeff(y) - t2 * t1.coeff(y)
            if combo.coeffs:
                out.add(_primitive(combo))
        if len(out) > MAX_POINT_TERMS:
            raise ResourceLimit(f"more than {MAX_POINT_TERMS} candidate-point terms")
        terms = out
    return terms


def _scales(f: Formula) -> list[int]:
    out = [1]
    for a in atoms(f):
        for t in atom_vterms(a):
            while isinstance(t, Succ):
                t = t.arg
            if isinstance(t, Val):
                out.append(t.scale)
        if hasattr(a, "scale") and not isinstance(a, Val):
            out.append(getattr(a, "scale"))
    return out


class _Brute:
    def __init__(self, chain: ValuationChain, value_bound: int, group_bound: int, relations: Relations | None):
        self.chain = chain
        self.value_bound = value_bound
        self.group_bound = group_bound
        self.relations = relations
        self.values = [NEG_INF, *(fin(i) for i in range(value_bound + 1)), POS_INF]

    def candidates(self, x: str, body: Formula, genv: dict[str, int], venv: dict[str, Value]) -> list[int]:
        k = _level_need(body, self.value_bound, venv, x, genv, self.chain)
        g = lcm(*_scales(body)) * _coefficient_product(body, x, genv) * self.chain.modulus(k)
        if g > self.group_bound:
            raise ResourceLimit(f"enumeration modulus {g} exceeds {self.group_bound}")
        terms: list[tuple[int, int]] = []
        for t in _point_terms(body, x, genv):
            k_x = t.coeff(x)
            rest = t.without(x)
            if k_x and rest.variables <= genv.keys():
                terms.append((k_x, rest.evaluate(genv)))
        zeros = sorted({-r // k for k, r in terms if r % k == 0})
        out = []
        for r in range(g):
            rep = r
            while any(k * rep + c == 0 for k, c in terms):
                rep += g
            out.append(rep)
        return out + zeros

    def eval(self, f: Formula, genv: dict[str, int], venv: dict[str, Value]) -> bool:
        if isinstance(f, ATOMS):
            return eval_atom(f, genv, venv, self.chain, self.relations)
        if isinstance(f, Not):
            return not self.eval(f.arg, genv, venv)
        if isinstance(f, And):
            return self.eval(f.lhs, genv, venv) and self.eval(f.rhs, genv, venv)
        if isinstance(f, Or):
            return self.eval(f.lhs, genv, venv) or self.eval(f.rhs, genv, venv)
        if isinstance(f, Implies):
            return (not self.eval(f.lhs, genv, venv)) or self.eval(f.rhs, genv, venv)
        assert isinstance(f, Quant)
        want = f.kind == "E"
        if f.sort == GROUP:
            domain: Iterable = self.candidates(f.var, f.body, genv, venv)
            for x in domain:
                if self.eval(f.body, {**genv, f.var: x}, venv) == want:
                    return want
            return not want
        for v in self.values:
            if self.eval(f.body, genv, {**venv, f.var: v}) == want:
                return want
        return not want


def brute_decide(
    sentence: Formula,
    chain: ValuationChain,
    group_bound: int = MAX_MODULUS,
    value_bound: int = 6,
    relations: Relations | None = None,
) -> bool:
    """Decide a sentence by enumeration.

    Value variables range over {-inf, 0..value_bound, +inf}; ``group_bound``
    caps the per-quantifier enumeration modulus.
    """
    free = free_vars(sentence)
    if free:
        raise DomainError(f"not a sentence: free variables {sorted(free)}")
    return _Brute(chain, value_bound, group_bound, relations).eval(sentence, {}, {})


def brute_eval(
    f: Formula,
    chain: ValuationChain,
    genv: Mapping[str, int],
    venv: Mapping[str, Value] | None = None,
    group_bound: int = MAX_MODULUS,
    value_bound: int = 6,
) -> bool:
    """Truth of a formula (quantifiers allowed) under an assignment of its free variables."""
    return _Brute(chain, value_bound, group_bound, None).eval(f, dict(genv), dict(venv or {}))


__all__ = [
    "brute_count",
    "brute_count_quotient",
    "brute_decide",
    "brute_eval",
    "brute_multi",
    "brute_solutions",
]
