"""Solving and counting systems of linear congruences over a valuation chain.

All counting over the integers happens in Z/M for the system's boundary
modulus M. Positive members are lifted to M by rescaling, each positive
system is reduced to one congruence through a Bezout combination, and negated
members are handled by inclusion-exclusion.
"""

from __future__ import annotations

import math
from itertools import combinations
from typing import Iterable, Iterator, Sequence

from .ambient import AmbientGroup, Z, quotient_mod
from .arith import ext_gcd, factorize, is_pi_number, mod_inverse, padic_val
from .chain import ValuationChain, fin
from .errors import DomainError, PreconditionError, ResourceLimit, UsageError
from .system import Congruence, CongruenceSystem, SolutionCount, unsolvable

MAX_NEGATIONS = 16


def _base_solution(n: int, a: int, m: int) -> tuple[int, int] | None:
    """Least x >= 0 and step m/d describing {x : n*x = a (mod m)}, or None."""
    d = math.gcd(n, m)
    if a % d:
        return None
    step = m // d
    if step == 1:
        return 0, 1
    x0 = (a // d) * mod_inverse(n // d, step) % step
    return x0, step


def single_solutions(n: int, a: int, m: int) -> list[int]:
    """Every residue x in [0, m) with n*x = a (mod m)."""
    base = _base_solution(n, a, m)
    if base is None:
        return []
    x0, step = base
    return list(range(x0, m, step))


def solve_single(n: int, a: int | Sequence[int], m: int, ambient: AmbientGroup = Z) -> SolutionCount:
    """Solutions of n*x = a in A/mA.

    Over the integers the count is d = gcd(n, m). For a general ambient the
    quotient splits into cyclic p-power factors and each factor Z/p^e
    contributes p^min(n(p), e) solutions, which gives the product of
    p^(rank_p*d(p)) on the torsion-free part. ``a`` may then be an integer (embedded diagonally)
    or a tuple of residues addressing A/mA.
    """
    if n == 0:
        raise DomainError("coefficient must be nonzero")
    if m < 1:
        raise DomainError("modulus must be positive")
    if ambient.is_integers:
        if not isinstance(a, int):
            raise DomainError("rhs over the integers must be an integer")
        base = _base_solution(n, a, m)
        if base is None:
            return unsolvable(m)
        return SolutionCount(True, math.gcd(n, m), base[0], m)

    q = quotient_mod(ambient, m)
    rhs = q.embed(a) if isinstance(a, int) else tuple(a)
    if len(rhs) != len(q.moduli):
        raise DomainError("rhs does not address the quotient")
    count = 1
    witness = []
    for r, mod in zip(rhs, q.moduli):
        base = _base_solution(n, r, mod)
        if base is None:
            return unsolvable(m)
        count *= math.gcd(n, mod)
        witness.append(base[0])
    return SolutionCount(True, count, tuple(witness), m)


def closed_form_count(n: int, m: int, ambient: AmbientGroup) -> int:
    """Product over p | d of p^(rank_p * d(p)), d = gcd(n, m)."""
    d = math.gcd(n, m)
    out = 1
    for p, e in factorize(d).factors.items():
        out *= p ** (ambient.alpha_at(p) * e)
    return out


def rescale(c: Congruence, t: int, pi: Iterable[int] | None = None) -> Congruence:
    """t*n*x = t*a (mod t*l*B_i): same solutions, finer scale."""
    if t < 1:
        raise DomainError("rescale factor must be positive")
    if pi is not None and not is_pi_number(t, pi):
        raise DomainError(f"{t} is not a pi-number for pi = {sorted(set(pi))}")
    return Congruence(c.coeff * t, c.rhs * t, c.scale * t, c.level, c.negated)


def reduce_pairs(pairs: Sequence[tuple[int, int]], m: int) -> tuple[int, int, tuple[int, int] | None]:
    """Bezout-combine n_r*x = a_r (mod m).

    Returns (n, a, base) where n*x = a is the combined congruence and ``base``
    is (x0, step) for the system's solution set, or None when unsolvable. When
    the system is solvable its solutions are exactly those of n*x = a: every
    n_r is a multiple of n, so adding a solution of n*y = 0 keeps each member.
    Hence one particular solution of the combination decides solvability.
    """
    g, z = ext_gcd([n for n, _ in pairs])
    a = sum(zr * ar for zr, (_, ar) in zip(z, pairs))
    base = _base_solution(g, a, m)
    if base is not None:
        x0 = base[0]
        if any((nr * x0 - ar) % m for nr, ar in pairs):
            base = None
    return g, a, base


def reduce_fixed_modulus(
    members: Sequence[Congruence], chain: ValuationChain
) -> tuple[Congruence, SolutionCount]:
    """Replace positive members sharing one modulus l*B_i by a single congruence."""
    if not members:
        raise UsageError("reduce_fixed_modulus needs at least one congruence")
    first = members[0]
    for c in members:
        if c.negated:
            raise DomainError("reduce_fixed_modulus takes positive members only")
        if (c.scale, c.level) != (first.scale, first.level):
            raise DomainError("members must share scale and level")
    m = first.modulus(chain)
    if m is None:
        raise DomainError("equations have no modulus; resolve them first")
    n, a, base = reduce_pairs([(c.coeff, c.rhs) for c in members], m)
    eq = Congruence(n, a, first.scale, first.level)
    if base is None:
        return eq, unsolvable(m)
    return eq, SolutionCount(True, m // base[1], base[0], m)


def collapse(c: Congruence, target: int, chain: ValuationChain, u: int = 1) -> Congruence:
    """Coarsen n*x = a (mod l*B_i) toward u*l*B_j, j <= i.

    With m = l*n_i, t = u*l*n_j and d = gcd(n, m), the result is
    n*x = a (mod k*t) where k collects p^d(p) over primes p | d that divide
    m/t. Requires p^d(p) | m/t or p not dividing m/t for each p | d.
    """
    if c.negated or not c.level.is_finite:
        raise DomainError("collapse takes a positive congruence at a finite level")
    i = c.level.n
    if not 0 <= target <= i:
        raise DomainError(f"target level {target} must lie in [0, {i}]")
    if u < 1:
        raise DomainError("u must be positive")
    m = c.scale * chain.modulus(i)
    t = u * c.scale * chain.modulus(target)
    if m % t:
        raise PreconditionError(f"target modulus {t} does not divide {m}")
    ratio = m // t
    d = math.gcd(c.coeff, m)
    k = 1
    for p, e in factorize(d).factors.items():
        if ratio % p == 0:
            if ratio % p**e:
                raise PreconditionError(f"{p}^{e} divides d but not the index {ratio}; rescale first")
            k *= p**e
    return Congruence(c.coeff, c.rhs, k * u * c.scale, fin(target))


def lift(c: Congruence, m_total: int, chain: ValuationChain) -> tuple[int, int]:
    """(n, a) for ``c`` rewritten modulo m_total."""
    m = c.modulus(chain)
    t = m_total // m
    return c.coeff * t, c.rhs * t


def _equation_point(eqs: Sequence[Congruence]) -> tuple[bool, int | None]:
    """Common integer solution of the positive equations: (consistent, point)."""
    point = None
    for c in eqs:
        if c.rhs % c.coeff:
            return False, None
        x = c.rhs // c.coeff
        if point is not None and point != x:
            return False, None
        point = x
    return True, point


def _split(system: CongruenceSystem) -> tuple[list[Congruence], list[Congruence], list[Congruence], bool]:
    """(positive equations, positive finite, negated finite, trivially empty)."""
    eqs, pos, neg = [], [], []
    empty = False
    for c in system.members:
        if c.level.is_neg_inf:
            empty |= c.negated
        elif c.is_equation:
            if not c.negated:
                eqs.append(c)
        elif c.negated:
            neg.append(c)
        else:
            pos.append(c)
    return eqs, pos, neg, empty


def count_system(system: CongruenceSystem, chain: ValuationChain) -> SolutionCount:
    """Number of residues modulo the boundary modulus that contain solutions.

    If a positive equation pins x down, the count is exact (0 or 1) and the
    reported modulus is 0. Negated equations remove single points from
    infinite residue classes, so they never change the residue count.
    """
    eqs, pos, neg, empty = _split(system)
    m = system.boundary_modulus(chain)
    if empty:
        return unsolvable(m)
    if eqs:
        ok, point = _equation_point(eqs)
        if ok and system.holds(point, chain):
            return SolutionCount(True, 1, point, 0)
        return unsolvable(0)
    if len(neg) > MAX_NEGATIONS:
        raise ResourceLimit(f"{len(neg)} negated members exceed the cap of {MAX_NEGATIONS}")
    base = [lift(c, m, chain) for c in pos] or [(m, 0)]
    lifted_neg = [lift(c, m, chain) for c in neg]
    total = 0
    for size in range(len(lifted_neg) + 1):
        sign = -1 if size % 2 else 1
        for subset in combinations(lifted_neg, size):
            _, _, sol = reduce_pairs(base + list(subset), m)
            if sol is not None:
                total += sign * (m // sol[1])
    if total <= 0:
        return unsolvable(m)
    found = witness(system, chain, _checked=True)
    return SolutionCount(True, total, found, m)


def _by_abs(x0: int, step: int) -> Iterator[int]:
    """Members of x0 + step*Z by increasing |x|, positive first on ties."""
    lo = x0 % step
    hi_next, lo_next = lo, lo - step
    while True:
        if hi_next <= -lo_next:
            yield hi_next
            hi_next += step
        else:
            yield lo_next
            lo_next -= step


def witness(system: CongruenceSystem, chain: ValuationChain, _checked: bool = False) -> int | None:
    """A solution of least absolute value (positive on ties), or None."""
    eqs, pos, neg, empty = _split(system)
    if empty:
        return None
    if eqs:
        ok, point = _equation_point(eqs)
        return point if ok and system.holds(point, chain) else None
    if not _checked and not count_system(system, chain).solvable:
        return None
    m = system.boundary_modulus(chain)
    _, _, sol = reduce_pairs([lift(c, m, chain) for c in pos] or [(m, 0)], m)
    if sol is None:
        return None
    x0, step = sol
    holes = sum(1 for c in system.members if c.negated and c.is_equation)
    budget = 2 * (m // step + holes + 1)
    for k, x in enumerate(_by_abs(x0, step)):
        if system.holds(x, chain):
            return x
        if k > budget:
            break
    raise AssertionError("solvable system without a witness inside one period")
