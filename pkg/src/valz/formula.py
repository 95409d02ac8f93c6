"""Quantifier elimination and sentence decision over (Z, +, 0, 1, v).

Group quantifiers are eliminated exactly: the body is put in DNF, each
clause is normalized into linear congruences in the bound variable, and the
clause is replaced by the solvability conditions of that congruence system,
written as divisibility atoms ``v[K](t) >= 0`` in the remaining group
variables. Value quantifiers range over {-inf, 0..T, +inf} where T is a
periodicity threshold computed from the chain and the formula's constants.

Supported fragment (anything else raises UnsupportedFragment):

* the ambient group is Z;
* value quantifiers, and valuations that must be enumerated, need a chain
  with a repeating cycle;
* an atom that mentions a quantified value variable must not contain a group
  variable that is free at that quantifier;
* inside a group quantifier over x, every valuation comparison involving x
  has an x-free side that does not depend on other group variables;
* when one atom holds two valuations of x, of terms t1 and t2, the x-free
  combination c2*t1 - c1*t2 (ci the coefficient of x in ti) is a constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator, Sequence

from .arith import crt_pair, ext_gcd, is_pi_number, lcm, mod_inverse
from .chain import NEG_INF, POS_INF, Value, ValuationChain, fin
from .congruence import count_system, lift, reduce_pairs, witness as system_witness
from .errors import DomainError, ResourceLimit, UnsupportedFragment
from .logic import (
    ATOMS,
    atoms as formula_atoms,
    GROUP,
    VALUE,
    And,
    Atom,
    Cmp,
    Const,
    Div,
    Eq,
    FALSE,
    Formula,
    Implies,
    Ind,
    Not,
    Or,
    Quant,
    Rel,
    Relations,
    Succ,
    TRUE,
    Term,
    VLit,
    VTerm,
    VVar,
    Val,
    atom_group_vars,
    vterm_group_terms,
    atom_value_vars,
    atom_vterms,
    conj,
    disj,
    compare,
    eval_atom,
    evaluate_qf,
    free_vars,
    map_atom_vterms,
    substitute_value,
)
from .system import Congruence, CongruenceSystem

DEFAULT_MAX_DNF = 1 << 14
MAX_RESIDUE_SPLIT = 64
MAX_SYMBOLIC_CASES = 4096
MAX_PERIOD_SCAN = 1 << 16


# --- smart constructors -----------------------------------------------------


def mk_not(f: Formula) -> Formula:
    if isinstance(f, Const):
        return Const(not f.value)
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def mk_and(*parts: Formula) -> Formula:
    out: list[Formula] = []
    for p in parts:
        if p == FALSE:
            return FALSE
        if p != TRUE and p not in out:
            out.append(p)
    if not out:
        return TRUE
    f = out[0]
    for p in out[1:]:
        f = And(f, p)
    return f


def mk_or(*parts: Formula) -> Formula:
    out: list[Formula] = []
    for p in parts:
        if p == TRUE:
            return TRUE
        if p != FALSE and p not in out:
            out.append(p)
    if not out:
        return FALSE
    f = out[0]
    for p in out[1:]:
        f = Or(f, p)
    return f


def divides(k: int, t: Term) -> Formula:
    """k | t, written as v[k](t) >= 0 after cancelling common factors."""
    k = abs(k)
    g = math.gcd(k, *(c for _, c in t.coeffs), t.const)
    if g > 1:
        k //= g
        t = Term.make(dict((v, c // g) for v, c in t.coeffs), t.const // g)
    if k == 1:
        return TRUE
    if t.is_constant:
        return Const(t.const % k == 0)
    return Cmp(Val(k, t), ">=", VLit(fin(0)))


def _vterm_closed(t: VTerm) -> bool:
    while isinstance(t, Succ):
        t = t.arg
    if isinstance(t, VVar):
        return False
    if isinstance(t, Val):
        return t.term.is_constant
    return True


def _eval_closed(t: VTerm, chain: ValuationChain) -> Value:
    depth = 0
    while isinstance(t, Succ):
        depth += 1
        t = t.arg
    v = t.value if isinstance(t, VLit) else chain.valuate(t.term.const, t.scale)
    for _ in range(depth):
        v = v.succ()
    return v


def fold_atom(a: Atom, chain: ValuationChain, relations: Relations | None = None) -> Formula:
    """Evaluate an atom without variables; close constant valuations."""
    if isinstance(a, Const):
        return a
    if isinstance(a, Eq):
        return Const(a.term.const == 0) if a.term.is_constant else a
    if atom_group_vars(a) or atom_value_vars(a):
        return map_atom_vterms(a, lambda t: VLit(_eval_closed(t, chain)) if _vterm_closed(t) else None)
    return Const(eval_atom(a, {}, {}, chain, relations))


def simplify(f: Formula, chain: ValuationChain, relations: Relations | None = None) -> Formula:
    if isinstance(f, ATOMS):
        return fold_atom(f, chain, relations)
    if isinstance(f, Not):
        return mk_not(simplify(f.arg, chain, relations))
    if isinstance(f, And):
        return mk_and(simplify(f.lhs, chain, relations), simplify(f.rhs, chain, relations))
    if isinstance(f, Or):
        return mk_or(simplify(f.lhs, chain, relations), simplify(f.rhs, chain, relations))
    if isinstance(f, Implies):
        return mk_or(mk_not(simplify(f.lhs, chain, relations)), simplify(f.rhs, chain, relations))
    return Quant(f.kind, f.var, f.sort, simplify(f.body, chain, relations))


# --- periodicity threshold --------------------------------------------------


def _s_depth(t: VTerm) -> int:
    d = 0
    while isinstance(t, Succ):
        d += 1
        t = t.arg
    return d


def _bits(n: int) -> int:
    return abs(n).bit_length()


def _tie_bits(a: Atom) -> int:
    """Bit length of the constant tying two valuations in ``a`` together."""
    terms = [g for t in atom_vterms(a) for g in vterm_group_terms(t)]
    out = 0
    for i, t1 in enumerate(terms):
        for t2 in terms[i + 1 :]:
            for y in t1.variables & t2.variables:
                d = t1 * t2.coeff(y) - t2 * t1.coeff(y)
                if not d.variables:
                    out = max(out, _bits(d.const))
    return out


def value_threshold(f: Formula, chain: ValuationChain) -> int:
    """T = max(prefix, max literal + S-depth) + cycle * (2 + E).

    E bounds how many levels the formula's integer data can resolve: bit
    lengths of constants, coefficients and scales, k*bitlen(q) for Div and
    bitlen(k) for Ind.
    """
    if not chain.has_cycle:
        raise UnsupportedFragment("value enumeration needs a chain with a repeating cycle")
    max_lit, s_depth, e = 0, 0, 0
    for a in formula_atoms(f):
        for t in atom_vterms(a):
            s_depth = max(s_depth, _s_depth(t))
            base = t
            while isinstance(base, Succ):
                base = base.arg
            if isinstance(base, VLit) and base.value.is_finite:
                max_lit = max(max_lit, base.value.n)
            if isinstance(base, Val):
                e = max(e, _bits(base.scale), _bits(base.term.const), *(_bits(c) for _, c in base.term.coeffs))
        if isinstance(a, Eq):
            e = max(e, _bits(a.term.const), *(_bits(c) for _, c in a.term.coeffs))
        e = max(e, _tie_bits(a))
        if isinstance(a, Div):
            e = max(e, a.k * _bits(a.q), _bits(a.scale))
        if isinstance(a, Ind):
            e = max(e, _bits(a.k), _bits(a.scale))
    return max(len(chain.prefix), max_lit + s_depth) + len(chain.cycle) * (2 + e)


def value_range(bound: int) -> list[Value]:
    return [NEG_INF, *(fin(i) for i in range(bound + 1)), POS_INF]


# --- congruences with symbolic right-hand sides -----------------------------


@dataclass(frozen=True)
class SymCongruence:
    """coeff*x = rhs (mod scale*B_level) with rhs a term in the other group variables."""

    coeff: int
    rhs: Term
    scale: int = 1
    level: Value = fin(0)
    negated: bool = False

    def concrete(self) -> Congruence:
        return Congruence(self.coeff, self.rhs.const, self.scale, self.level, self.negated)


@dataclass
class _Clause:
    congruences: list[SymCongruence]
    side: list[Formula]


def _interval_runs(members: list[bool]) -> list[tuple[int, int]]:
    runs: list[tuple[int, int]] = []
    start = None
    for idx, ok in enumerate(members + [False]):
        if ok and start is None:
            start = idx
        elif not ok and start is not None:
            runs.append((start, idx - 1))
            start = None
    return runs


def _direct_alternatives(
    x: str, s: int, val: Val, op: str, c: Value, positive: bool
) -> list[list[SymCongruence]]:
    """Alternatives for S^s(v^l(k*x + r)) op c (negated unless ``positive``)."""
    k = val.term.coeff(x)
    r = val.term.without(x)
    l = val.scale
    top = (c.n if c.is_finite else 0) + 1
    cands = value_range(top)

    def shifted(w: Value) -> Value:
        for _ in range(s):
            w = w.succ()
        return w

    members = [compare(shifted(w), op, c) == positive for w in cands]
    out: list[list[SymCongruence]] = []
    for a, b in _interval_runs(members):
        lo, hi = cands[a], cands[b]
        lits: list[SymCongruence] = []
        if lo.is_pos_inf:
            lits.append(SymCongruence(k, -r, 1, POS_INF))
        elif lo.is_finite:
            lits.append(SymCongruence(k, -r, l, lo))
        if hi.is_neg_inf:
            if l <= MAX_RESIDUE_SPLIT:
                # outside lZ: one alternative per nonzero residue mod l
                out.extend([SymCongruence(k, rho - r, l, fin(0))] for rho in range(1, l))
                continue
            lits.append(SymCongruence(k, -r, l, fin(0), True))
        elif hi.is_finite and hi.n == top and not hi.is_pos_inf:
            lits.append(SymCongruence(k, -r, 1, POS_INF, True))
        elif hi.is_finite:
            lits.append(SymCongruence(k, -r, l, fin(hi.n + 1), True))
        out.append(lits)
    return out


def _x_vals(t: VTerm, x: str) -> Iterator[Val]:
    while isinstance(t, Succ):
        t = t.arg
    if isinstance(t, Val) and x in t.term.variables:
        yield t


def _check_split(a: Atom, x: str) -> None:
    """Reject atoms whose case split on a valuation of x would not be exact.

    Two valuations of x are tied together through c2*t1 - c1*t2, which is free
    of x. When that difference depends on other group variables the levels it
    can reach are unbounded, and so are the levels the split would need.
    """
    sides = [v.term for t in atom_vterms(a) for v in _x_vals(t, x)]
    for i, t1 in enumerate(sides):
        for t2 in sides[i + 1 :]:
            d = t1 * t2.coeff(x) - t2 * t1.coeff(x)
            if d.variables:
                raise UnsupportedFragment(
                    f"valuations of {x} in {a} differ by a term in {', '.join(sorted(d.variables))}"
                )
    for t in atom_vterms(a):
        if not list(_x_vals(t, x)) and not _vterm_closed(t):
            raise UnsupportedFragment(f"{a}: the side without {x} is not closed")


def _replace_val(a: Atom, target: Val, value: Value) -> Atom:
    return map_atom_vterms(a, lambda t: VLit(value) if t == target else None)


def _dnf(f: Formula, pos: bool, cap: int) -> list[list[tuple[Atom, bool]]]:
    """Clauses of (atom, polarity) pairs; at most ``cap`` of them."""
    if isinstance(f, ATOMS):
        return [[(f, pos)]]
    if isinstance(f, Not):
        return _dnf(f.arg, not pos, cap)
    if isinstance(f, Implies):
        return _dnf(Or(Not(f.lhs), f.rhs), pos, cap)
    if isinstance(f, (And, Or)):
        left, right = _dnf(f.lhs, pos, cap), _dnf(f.rhs, pos, cap)
        if isinstance(f, And) != pos:
            out = left + right
        else:
            if len(left) * len(right) > cap:
                raise ResourceLimit(f"DNF exceeds {cap} clauses")
            out = [p + q for p in left for q in right]
        if len(out) > cap:
            raise ResourceLimit(f"DNF exceeds {cap} clauses")
        return out
    raise UnsupportedFragment("quantifier inside a clause; eliminate inner quantifiers first")


class _Eliminator:
    def __init__(self, chain: ValuationChain, max_dnf: int, relations: Relations | None, bound: int | None):
        if not chain.ambient.is_integers:
            raise UnsupportedFragment("formula decision is implemented for the ambient group Z only")
        self.chain = chain
        self.max_dnf = max_dnf
        self.relations = relations
        self.bound = bound  # enumeration threshold for valuations of the bound variable

    # literal normalization -------------------------------------------------

    def literal(self, x: str, a: Atom, positive: bool) -> list[_Clause]:
        """Alternatives (a disjunction) equivalent to the literal."""
        chain = self.chain
        folded = fold_atom(a, chain, self.relations)
        if isinstance(folded, Const):
            return [_Clause([], [])] if folded.value == positive else []
        a = folded  # type: ignore[assignment]
        if x not in atom_group_vars(a):
            return [_Clause([], [a if positive else Not(a)])]
        if isinstance(a, Eq):
            k, r = a.term.coeff(x), a.term.without(x)
            return [_Clause([SymCongruence(k, -r, 1, POS_INF, not positive)], [])]
        if isinstance(a, Cmp):
            for lhs, op, rhs in ((a.lhs, a.op, a.rhs), (a.rhs, _flip(a.op), a.lhs)):
                base = lhs
                s = 0
                while isinstance(base, Succ):
                    s += 1
                    base = base.arg
                if isinstance(base, Val) and x in base.term.variables and not list(_x_vals(rhs, x)):
                    if not _vterm_closed(rhs):
                        raise UnsupportedFragment(
                            f"comparison {lhs} {op} {rhs}: the side without {x} is not closed"
                        )
                    c = _eval_closed(rhs, chain)
                    return [_Clause(alt, []) for alt in _direct_alternatives(x, s, base, op, c, positive)]
        # x occurs inside Div/Ind/Rel or on both sides: case split on one valuation
        _check_split(a, x)
        target = next(v for t in atom_vterms(a) for v in _x_vals(t, x))
        out: list[_Clause] = []
        for j in value_range(self._bound()):
            fix = self.literal(x, Cmp(target, "=", VLit(j)), True)
            if not fix:
                continue
            rest = self.literal(x, _replace_val(a, target, j), positive)
            out.extend(_merge(p, q) for p in fix for q in rest)
        return out

    def _bound(self) -> int:
        if self.bound is None:
            raise UnsupportedFragment("valuation enumeration needs a chain with a repeating cycle")
        return self.bound

    # DNF -------------------------------------------------------------------

    def dnf(self, f: Formula) -> list[list[tuple[Atom, bool]]]:
        return _dnf(f, True, self.max_dnf)

    # clause normalization --------------------------------------------------

    def clauses(self, x: str, body: Formula) -> list[_Clause]:
        out: list[_Clause] = []
        for lits in self.dnf(body):
            partial = [_Clause([], [])]
            for atom, pos in lits:
                alts = self.literal(x, atom, pos)
                partial = [_merge(p, q) for p in partial for q in alts]
                if len(partial) > self.max_dnf:
                    raise ResourceLimit(f"normalization exceeds {self.max_dnf} alternatives")
                if not partial:
                    break
            out.extend(partial)
            if len(out) > self.max_dnf:
                raise ResourceLimit(f"normalization exceeds {self.max_dnf} alternatives")
        return out

    # elimination -----------------------------------------------------------

    def exists(self, x: str, body: Formula) -> Formula:
        """Quantifier-free equivalent of E x. body (body quantifier-free)."""
        results = []
        for clause in self.clauses(x, body):
            cond = self.solve_clause(clause.congruences)
            results.append(mk_and(*clause.side, cond))
            if results[-1] == TRUE:
                return TRUE
        return mk_or(*results)

    def solve_clause(self, congs: list[SymCongruence]) -> Formula:
        if all(c.rhs.is_constant for c in congs):
            system = CongruenceSystem(c.concrete() for c in congs)
            return Const(count_system(system, self.chain).solvable)
        eqs = [c for c in congs if c.level.is_pos_inf and not c.negated]
        if eqs:
            return self._solve_with_equation(eqs[0], [c for c in congs if c is not eqs[0]])
        return self._solve_congruences([c for c in congs if not c.level.is_pos_inf])

    def _solve_with_equation(self, eq: SymCongruence, rest: list[SymCongruence]) -> Formula:
        # x = a0/k0; multiply each member through by k0
        k0, a0 = eq.coeff, eq.rhs
        parts = [divides(k0, a0)]
        for c in rest:
            y = a0 * c.coeff - c.rhs * k0
            if c.level.is_pos_inf:
                atom: Formula = Eq(y) if not y.is_constant else Const(y.const == 0)
            elif c.level.is_neg_inf:
                atom = TRUE
            else:
                atom = fold_atom(Cmp(Val(c.scale * abs(k0), y), ">=", VLit(c.level)), self.chain)
            parts.append(mk_not(atom) if c.negated else atom)
        return mk_and(*parts)

    def _solve_congruences(self, congs: list[SymCongruence]) -> Formula:
        chain = self.chain
        live = []
        for c in congs:
            if c.level.is_neg_inf:
                if c.negated:
                    return FALSE
                continue
            live.append(c)
        mods = [chain.ball_modulus(c.level, c.scale) for c in live]
        m = lcm(*mods)
        pos = [(c.coeff * (m // mod), c.rhs * (m // mod)) for c, mod in zip(live, mods) if not c.negated]
        neg = [(c.coeff * (m // mod), c.rhs * (m // mod)) for c, mod in zip(live, mods) if c.negated]
        if not pos:
            pos = [(m, Term.constant(0))]
        n, z = ext_gcd([p for p, _ in pos])
        a = Term.constant(0)
        for zr, (_, ar) in zip(z, pos):
            a = a + ar * zr
        d = math.gcd(n, m)
        step = m // d
        u = mod_inverse(n // d, step) if step > 1 else 0
        # x0 = u*a/d solves n*x = a (mod m) once d | a
        parts = [divides(d, a)]
        for nr, ar in pos:
            parts.append(divides(d * m, a * (nr * u) - ar * d))
        if neg:
            if d > MAX_SYMBOLIC_CASES:
                raise ResourceLimit(f"{d} residue cases exceed the cap of {MAX_SYMBOLIC_CASES}")
            cases = []
            for s in range(d):
                avoid = [
                    mk_not(divides(d * m, a * (ns * u) + Term.constant(d * ns * s * step) - as_ * d))
                    for ns, as_ in neg
                ]
                cases.append(mk_and(*avoid))
                if cases[-1] == TRUE:
                    break
            parts.append(mk_or(*cases))
        return mk_and(*parts)

    # recursive elimination -------------------------------------------------

    def eliminate(self, f: Formula) -> Formula:
        """Quantifier-free equivalent; free value variables must already be bound."""
        if isinstance(f, ATOMS):
            return fold_atom(f, self.chain, self.relations)
        if isinstance(f, Not):
            return mk_not(self.eliminate(f.arg))
        if isinstance(f, And):
            left = self.eliminate(f.lhs)
            return FALSE if left == FALSE else mk_and(left, self.eliminate(f.rhs))
        if isinstance(f, Or):
            left = self.eliminate(f.lhs)
            return TRUE if left == TRUE else mk_or(left, self.eliminate(f.rhs))
        if isinstance(f, Implies):
            left = self.eliminate(f.lhs)
            return TRUE if left == FALSE else mk_or(mk_not(left), self.eliminate(f.rhs))
        if f.sort == VALUE:
            return self._value_quantifier(f)
        body = self.eliminate(f.body)
        if f.kind == "E":
            return self._exists_qf(f.var, body)
        return mk_not(self._exists_qf(f.var, mk_not(body)))

    def _exists_qf(self, x: str, body: Formula) -> Formula:
        if isinstance(body, Const):
            return body
        saved = self.bound
        if self.chain.has_cycle:
            self.bound = value_threshold(body, self.chain)
        try:
            return self.exists(x, body)
        except ResourceLimit:
            if set(free_vars(body)) != {x}:
                raise
            return Const(self._periodic_exists(x, body))
        finally:
            self.bound = saved

    def _periodic_exists(self, x: str, body: Formula) -> bool:
        """Decide E x. body when x is the only variable and the DNF is too large.

        Each atom v[l](k*x + c) compared with a closed value below level L is
        fixed by x modulo l*n_L once k*x + c is nonzero, so the truth set of
        the body is periodic apart from the zeros of its terms. Scanning one
        period plus those zeros decides the existential.
        """
        period, zeros = 1, set()
        for a in formula_atoms(body):
            if x not in atom_group_vars(a):
                continue
            if isinstance(a, Eq):
                k, c = a.term.coeff(x), a.term.const
                if c % k == 0:
                    zeros.add(-c // k)
                continue
            vals = [t for t in atom_vterms(a) if any(x in g.variables for g in vterm_group_terms(t))]
            if not isinstance(a, Cmp) or len(vals) != 1:
                raise ResourceLimit(f"DNF exceeds {self.max_dnf} clauses and {a} is not residue-determined")
            side, other = (a.lhs, a.rhs) if vals[0] is a.lhs else (a.rhs, a.lhs)
            if not _vterm_closed(other):
                raise ResourceLimit(f"DNF exceeds {self.max_dnf} clauses")
            depth = _s_depth(side)
            base = side
            while isinstance(base, Succ):
                base = base.arg
            assert isinstance(base, Val)
            lit = _eval_closed(other, self.chain)
            level = lit.n + depth + 1 if lit.is_finite else 0
            period = lcm(period, base.scale * self.chain.modulus(level))
            k, c = base.term.coeff(x), base.term.const
            if c % k == 0:
                zeros.add(-c // k)
        if period > MAX_PERIOD_SCAN:
            raise ResourceLimit(f"DNF exceeds {self.max_dnf} clauses and the period {period} is too long to scan")
        for z in sorted(zeros):
            if evaluate_qf(body, {x: z}, {}, self.chain, self.relations):
                return True
        for r in range(period):
            while r in zeros:
                r += period
            if evaluate_qf(body, {x: r}, {}, self.chain, self.relations):
                return True
        return False

    def _value_quantifier(self, f: Quant) -> Formula:
        outer_group = {v for v, srt in free_vars(f.body).items() if srt == GROUP}
        for a in formula_atoms(f.body):
            if f.var in atom_value_vars(a) and atom_group_vars(a) & outer_group:
                raise UnsupportedFragment(
                    f"atom mixes the value variable {f.var} with a free group variable"
                )
        bound = value_threshold(f.body, self.chain)
        results = []
        for val in value_range(bound):
            r = self.eliminate(substitute_value(f.body, f.var, val))
            if f.kind == "E" and r == TRUE:
                return TRUE
            if f.kind == "A" and r == FALSE:
                return FALSE
            results.append(r)
        return mk_or(*results) if f.kind == "E" else mk_and(*results)


def _flip(op: str) -> str:
    return {"<": ">", ">": "<", "<=": ">=", ">=": "<=", "=": "="}[op]


def _merge(p: _Clause, q: _Clause) -> _Clause:
    return _Clause(p.congruences + q.congruences, p.side + q.side)


# --- public API -------------------------------------------------------------


def to_dnf(f: Formula, max_dnf: int = DEFAULT_MAX_DNF) -> Formula:
    """Disjunction of conjunctions of literals equivalent to quantifier-free ``f``."""
    clauses = _dnf(f, True, max_dnf)
    return disj([conj([a if pos else Not(a) for a, pos in lits]) for lits in clauses])


def normalize_exists(
    body: Formula | Sequence[Formula], x: str, chain: ValuationChain, max_dnf: int = DEFAULT_MAX_DNF
) -> list[CongruenceSystem]:
    """Disjunction of congruence systems in ``x`` equivalent to ``body``.

    ``body`` is a quantifier-free formula (or a list of literals read as a
    conjunction) whose only variable is ``x``. Equations become level +inf
    members, so isolated candidate points are part of the systems.
    """
    if not isinstance(body, ATOMS + (Not, And, Or, Implies, Quant)):
        parts = list(body)
        body = parts[0] if parts else TRUE
        for p in parts[1:]:
            body = And(body, p)
    extra = set(free_vars(body)) - {x}
    if extra:
        raise UnsupportedFragment(f"normalize_exists expects {x} as the only variable, found {sorted(extra)}")
    el = _Eliminator(chain, max_dnf, None, value_threshold(body, chain) if chain.has_cycle else None)
    out = []
    for clause in el.clauses(x, body):
        if any(s == FALSE for s in clause.side):
            continue
        out.append(CongruenceSystem(c.concrete() for c in clause.congruences))
    return out


def eliminate_group_quantifier(
    f: Formula,
    chain: ValuationChain,
    max_dnf: int = DEFAULT_MAX_DNF,
    relations: Relations | None = None,
) -> Formula:
    """Quantifier-free formula in the free group variables equivalent to ``f``.

    ``f`` is typically E x. phi(x, z...); nested quantifiers are eliminated
    too. Free value variables are not supported.
    """
    if any(s == VALUE for s in free_vars(f).values()):
        raise UnsupportedFragment("symbolic value parameters are not supported; substitute them first")
    return _Eliminator(chain, max_dnf, relations, None).eliminate(f)


def decide(
    sentence: Formula,
    chain: ValuationChain,
    max_dnf: int = DEFAULT_MAX_DNF,
    relations: Relations | None = None,
) -> bool:
    """Truth value of a sentence over (Z, chain)."""
    free = free_vars(sentence)
    if free:
        raise DomainError(f"not a sentence: free variables {sorted(free)}")
    out = simplify(_Eliminator(chain, max_dnf, relations, None).eliminate(sentence), chain, relations)
    if not isinstance(out, Const):
        raise AssertionError(f"elimination left a non-constant residue: {out}")
    return out.value


def find_witness(
    sentence: Formula,
    chain: ValuationChain,
    max_dnf: int = DEFAULT_MAX_DNF,
    relations: Relations | None = None,
) -> int | None:
    """For a sentence E x. phi, a witness for x of least |x| (positive on ties)."""
    if not (isinstance(sentence, Quant) and sentence.kind == "E" and sentence.sort == GROUP):
        raise DomainError("witnesses exist only for a leading group existential")
    el = _Eliminator(chain, max_dnf, relations, None)
    body = el.eliminate(sentence.body)
    if isinstance(body, Const):
        return 0 if body.value else None
    if chain.has_cycle:
        el.bound = value_threshold(body, chain)
    best: int | None = None
    for clause in el.clauses(sentence.var, body):
        if any(s == FALSE for s in clause.side):
            continue
        w = system_witness(CongruenceSystem(c.concrete() for c in clause.congruences), chain)
        if w is not None and (best is None or (abs(w), w < 0) < (abs(best), best < 0)):
            best = w
    return best


def multi_decide(
    per_valuation: Sequence[tuple[ValuationChain, CongruenceSystem]],
    prime_supports: Sequence[Iterable[int]],
) -> int | None:
    """Least non-negative x satisfying every per-valuation system, or None.

    Supports must be pairwise disjoint and each chain's multipliers must be
    numbers over its support; the positive parts are combined by CRT.
    """
    supports = [frozenset(s) for s in prime_supports]
    if len(supports) != len(per_valuation):
        raise DomainError("one prime support per valuation is required")
    for i, s in enumerate(supports):
        for t in supports[i + 1 :]:
            if s & t:
                raise DomainError(f"prime supports {sorted(s)} and {sorted(t)} overlap")
    for (chain, _), s in zip(per_valuation, supports):
        span = (chain.prefix or ()) + (chain.cycle or ())
        if not all(is_pi_number(m, s) for m in span):
            raise DomainError(f"chain {chain.describe()} is not supported on {sorted(s)}")
    residue, modulus = 0, 1
    total, holes = 1, 0
    for chain, system in per_valuation:
        count = count_system(system, chain)
        if not count.solvable:
            return None
        if count.modulus == 0:
            # an equation pins x to a single point
            point = count.witness
            ok = all(s.holds(point, c) for c, s in per_valuation)
            return point if ok else None
        m = system.boundary_modulus(chain)
        total = lcm(total, m)
        holes += sum(1 for c in system.members if c.negated and c.is_equation)
        pos = [lift(c, m, chain) for c in system.positives if c.level.is_finite]
        _, _, base = reduce_pairs(pos or [(m, 0)], m)
        if base is None:
            return None
        merged = crt_pair(residue, modulus, base[0], base[1])
        if merged is None:
            return None
        residue, modulus = merged
    x = residue % modulus
    for _ in range(total // modulus + holes + 1):
        if all(system.holds(x, chain) for chain, system in per_valuation):
            return x
        x += modulus
    return None
