import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from generators import random_chain, random_system
from valz.ambient import AmbientGroup, Z, quotient_mod
from valz.chain import POS_INF, cyclic, fin, padic
from valz.congruence import (
    MAX_NEGATIONS,
    closed_form_count,
    collapse,
    count_system,
    reduce_fixed_modulus,
    rescale,
    single_solutions,
    solve_single,
    witness,
)
from valz.errors import DomainError, PreconditionError, ResourceLimit, UsageError
from valz.oracle import brute_count, brute_count_quotient, brute_solutions
from valz.system import Congruence as C, CongruenceSystem as S, SolutionCount


def residues(n, a, m):
    return [x for x in range(m) if (n * x - a) % m == 0]


def test_solve_single_examples():
    r = solve_single(4, 2, 6)
    assert (r.solvable, r.count) == (True, 2)
    assert single_solutions(4, 2, 6) == residues(4, 2, 6) == [2, 5]
    assert solve_single(2, 0, 4, AmbientGroup(alpha={2: 2})).count == 4
    r = solve_single(1, 5, 8)
    assert (r.count, r.witness) == (1, 5)
    assert not solve_single(2, 1, 4).solvable


def test_solve_single_rejects_zero():
    with pytest.raises(DomainError):
        solve_single(0, 1, 5)


@given(st.integers(-50, 50).filter(bool), st.integers(-300, 300), st.integers(1, 400))
def test_solve_single_matches_enumeration(n, a, m):
    r = solve_single(n, a, m)
    sols = residues(n, a, m)
    assert r.count == len(sols)
    if sols:
        assert r.witness in sols
        assert single_solutions(n, a, m) == sols
        assert r.count == math.gcd(n, m)


def test_closed_form_general_ambient():
    a = AmbientGroup(alpha={2: 2, 3: 1})
    for n in (1, 2, 4, 6, 12):
        for m in (2, 4, 12, 36):
            q = quotient_mod(a, m)
            assert closed_form_count(n, m, a) == brute_count_quotient(n, 0, q, m)
            assert solve_single(n, 0, m, a).count == closed_form_count(n, m, a)


def test_rescale_examples(two_adic):
    c = C(2, 2, 1, fin(1))
    r = rescale(c, 3, {2, 3})
    assert (r.coeff, r.rhs, r.scale, r.level) == (6, 6, 3, fin(1))
    assert rescale(C(1, 1), 1) == C(1, 1)
    with pytest.raises(DomainError):
        rescale(c, 5, {2, 3})
    for x in range(-100, 101):
        assert c.holds(x, two_adic) == r.holds(x, two_adic)


@given(
    st.sampled_from([(2,), (3,), (2, 3), (6,)]),
    st.integers(-20, 20).filter(bool),
    st.integers(-40, 40),
    st.integers(1, 6),
    st.integers(0, 4),
    st.integers(1, 12),
    st.booleans(),
)
def test_rescale_is_solution_set_noop(cycle, n, a, l, i, t, neg):
    chain = cyclic(*cycle)
    c = C(n, a, l, fin(i), neg)
    r = rescale(c, t)
    assert all(c.holds(x, chain) == r.holds(x, chain) for x in range(-60, 61))


def test_reduce_examples():
    c8 = padic(2)
    eq, cnt = reduce_fixed_modulus([C(2, 2, 1, fin(3)), C(3, 3, 1, fin(3))], c8)
    assert (cnt.count, cnt.witness) == (1, 1)
    assert residues(eq.coeff, eq.rhs, 8) == [1]
    c6 = cyclic(6)
    eq, cnt = reduce_fixed_modulus([C(4, 4, 1, fin(1)), C(12, 12, 1, fin(1))], c6)
    assert cnt.count == 2 and residues(eq.coeff, eq.rhs, 6) == [1, 4]
    _, cnt = reduce_fixed_modulus([C(2, 4, 1, fin(1)), C(6, 12, 1, fin(1))], c6)
    assert cnt.count == 2
    eq, cnt = reduce_fixed_modulus([C(1, 3, 1, fin(3))], c8)
    assert (eq.coeff, eq.rhs, cnt.count) == (1, 3, 1)


def test_reduce_errors(two_adic):
    with pytest.raises(UsageError):
        reduce_fixed_modulus([], two_adic)
    with pytest.raises(DomainError):
        reduce_fixed_modulus([C(1, 1, 1, fin(1)), C(1, 1, 1, fin(2))], two_adic)


def test_collapse_examples(two_adic):
    c = C(2, 4, 1, fin(3))
    out = collapse(c, 1, two_adic)
    assert (out.coeff, out.rhs, out.scale * two_adic.modulus(out.level.n)) == (2, 4, 4)
    assert {x % 2 for x in residues(2, 4, 8)} == {x % 2 for x in residues(2, 4, 4)} == {0}
    unit = collapse(C(3, 1, 1, fin(3)), 1, two_adic)
    assert unit.scale * two_adic.modulus(1) == 2
    with pytest.raises(PreconditionError):
        collapse(C(4, 0, 1, fin(3)), 2, two_adic)


def test_count_system_examples(two_adic):
    assert str(count_system(S([C(1, 1, 1, fin(1)), C(1, 3, 1, fin(3))]), two_adic)) == "1 (mod 8)"
    r = count_system(S([C(1, 1, 1, fin(1)), C(1, 3, 1, fin(3), True)]), two_adic)
    assert str(r) == "3 (mod 8)"
    assert sorted(x % 8 for x in brute_solutions(S([C(1, 1, 1, fin(1)), C(1, 3, 1, fin(3), True)]), two_adic, 0, 7)) == [1, 5, 7]
    assert str(count_system(S([C(1, 0, 1, fin(0))]), two_adic)) == "1 (mod 1)"
    assert str(count_system(S([]), two_adic)) == "1 (mod 1)"


def test_count_with_equations(two_adic):
    r = count_system(S([C(2, 6, 1, POS_INF), C(1, 1, 1, fin(1))]), two_adic)
    assert (r.count, r.witness, r.modulus) == (1, 3, 0)
    assert not count_system(S([C(2, 5, 1, POS_INF)]), two_adic).solvable
    assert not count_system(S([C(1, 3, 1, POS_INF), C(1, 4, 1, POS_INF)]), two_adic).solvable
    # removing one point leaves the residue count unchanged
    r = count_system(S([C(1, 1, 1, fin(1)), C(1, 1, 1, POS_INF, True)]), two_adic)
    assert r.count == 1 and r.witness == -1


def test_witness_examples(two_adic):
    assert witness(S([C(1, 1, 1, fin(1)), C(1, 3, 1, fin(3))]), two_adic) == 3
    assert witness(S([C(2, 1, 1, fin(2))]), two_adic) is None
    w = witness(S([C(1, 1, 1, fin(1)), C(1, 1, 1, fin(2), True)]), two_adic)
    assert w == -1  # |-1| < |3|; the tie rule only matters between x and -x


def test_negation_cap(two_adic):
    system = S([C(1, k, 1, fin(6), True) for k in range(MAX_NEGATIONS + 1)])
    with pytest.raises(ResourceLimit):
        count_system(system, two_adic)


def test_solution_count_invariant():
    with pytest.raises(DomainError):
        SolutionCount(True, 0, None, 4)


@settings(max_examples=150, deadline=None)
@given(st.randoms(use_true_random=False))
def test_count_matches_oracle(rng):
    cycle, chain = random_chain(rng)
    system = random_system(rng, cycle, max_members=4)
    r = count_system(system, chain)
    assert r.count == brute_count(system, chain)
    if r.solvable:
        x = r.witness
        assert system.holds(x, chain)
        m = system.boundary_modulus(chain)
        closer = [y for y in range(-abs(x) + 1, abs(x)) if system.holds(y, chain)]
        assert not closer
        if x < 0:
            assert not system.holds(-x, chain)
        assert r.modulus == m


@settings(max_examples=100, deadline=None)
@given(st.randoms(use_true_random=False))
def test_brute_count_invariant_under_rescale(rng):
    cycle, chain = random_chain(rng)
    system = random_system(rng, cycle, max_members=3)
    k = rng.randrange(len(system.members))
    t = rng.choice([2, 3, 5])
    members = list(system.members)
    members[k] = rescale(members[k], t)
    scaled = S(members)
    m, m2 = system.boundary_modulus(chain), scaled.boundary_modulus(chain)
    # solution sets coincide, so per-period densities agree
    assert brute_count(system, chain) * m2 == brute_count(scaled, chain) * m
