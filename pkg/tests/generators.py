"""Random instance generators shared by unit and acceptance tests."""

from __future__ import annotations

import random

from valz.chain import cyclic, fin
from valz.system import Congruence, CongruenceSystem

# deepest level per cycle keeping the boundary modulus enumerable
LEVEL_CAP = {(2,): 6, (3,): 6, (2, 3): 6, (2, 3, 5): 6, (6,): 4}


def random_system(rng: random.Random, cycle: tuple[int, ...], max_members: int = 5) -> CongruenceSystem:
    base = rng.randint(1, 12)
    divisors = [d for d in range(1, base + 1) if base % d == 0]
    members = []
    for _ in range(rng.randint(1, max_members)):
        n = rng.choice([k for k in range(-30, 31) if k])
        level = rng.randint(0, LEVEL_CAP[cycle])
        members.append(
            Congruence(n, rng.randint(-60, 60), rng.choice(divisors), fin(level), rng.random() < 0.35)
        )
    return CongruenceSystem(members)


def random_chain(rng: random.Random):
    cycle = rng.choice(list(LEVEL_CAP))
    return cycle, cyclic(*cycle)


# --- formulas -----------------------------------------------------------------

from valz.chain import NEG_INF, POS_INF  # noqa: E402
from valz.logic import (  # noqa: E402
    And,
    Cmp,
    Div,
    Eq,
    Implies,
    Ind,
    Not,
    Or,
    Quant,
    Succ,
    Term,
    VLit,
    VVar,
    Val,
)

# deepest literal level per cycle for formula corpora (oracle cost grows as n_level)
FORMULA_LEVEL = {(2,): 4, (3,): 3, (2, 3): 4, (6,): 2, (2, 3, 5): 3}
OPS = ["=", "<=", ">=", "<", ">"]


def random_term(rng: random.Random, variables: list[str], must: str | None = None) -> Term:
    coeffs = {}
    for v in variables:
        if v == must or rng.random() < 0.5:
            coeffs[v] = rng.choice([1, 1, 2, 3, -1, -2])
    return Term.make(coeffs, rng.randint(-6, 6))


def random_literal_value(rng: random.Random, top: int):
    r = rng.random()
    if r < 0.08:
        return NEG_INF
    if r < 0.14:
        return POS_INF
    return fin(rng.randint(0, top))


def random_atom(rng: random.Random, variables: list[str], must: str, top: int, two_sided: bool = True):
    r = rng.random()
    if r < 0.15:
        return Eq(random_term(rng, variables, must))
    lhs = Val(rng.choice([1, 1, 2, 3]), random_term(rng, variables, must))
    if two_sided and r < 0.25:
        # both sides mention x, and they differ by a constant after scaling
        t1 = lhs.term
        if t1.variables - {must}:
            t2 = t1 * rng.choice([1, 2, 3, -1]) + rng.randint(-6, 6)
        else:
            t2 = random_term(rng, [must], must)
        rhs = Val(rng.choice([1, 2]), t2)
        if rng.random() < 0.5:
            rhs = Succ(rhs)
        return Cmp(lhs, rng.choice(OPS), rhs)
    return Cmp(lhs, rng.choice(OPS), VLit(random_literal_value(rng, top)))


def random_body(rng: random.Random, variables: list[str], must: str, top: int, size: int, two_sided: bool = True):
    parts = [random_atom(rng, variables, must, top, two_sided) for _ in range(size)]
    parts = [Not(p) if rng.random() < 0.3 else p for p in parts]
    out = parts[0]
    for p in parts[1:]:
        r = rng.random()
        out = And(out, p) if r < 0.55 else Or(out, p) if r < 0.85 else Implies(out, p)
    return out


def random_sentence(rng: random.Random, cycle: tuple[int, ...]):
    """A closed formula with at most two quantifier alternations."""
    top = FORMULA_LEVEL[cycle]
    shape = rng.choice(["E", "A", "EA", "AE", "EE", "value", "value"])
    if shape in ("E", "A"):
        body = random_body(rng, ["x"], "x", top, rng.randint(1, 4))
        return Quant(shape, "x", "G", body)
    if shape in ("EA", "AE", "EE"):
        low = max(1, top - 1)
        body = random_body(rng, ["x", "z"], "x", low, rng.randint(1, 3), two_sided=False)
        inner = Quant(shape[1], "x", "G", body)
        return Quant(shape[0], "z", "G", inner)
    return random_value_sentence(rng, cycle)


def random_value_sentence(rng: random.Random, cycle: tuple[int, ...]):
    """Value quantifier outermost, optionally over a group existential."""
    i = VVar("i")
    primes = sorted({p for m in cycle for p in (2, 3, 5) if m % p == 0})
    q = rng.choice(primes)
    parts = []
    for _ in range(rng.randint(1, 3)):
        r = rng.random()
        if r < 0.3:
            parts.append(Div(q, rng.randint(0, 2), frozenset(primes), 1, i, Succ(i) if rng.random() < 0.7 else Succ(Succ(i))))
        elif r < 0.5:
            parts.append(Ind(rng.choice([2, 3, 4, 6, 9]), frozenset(primes), 1, i, Succ(i)))
        elif r < 0.7:
            parts.append(Cmp(i, rng.choice(OPS), VLit(fin(rng.randint(0, 3)))))
        else:
            x_atom = Cmp(Val(rng.choice([1, 2]), random_term(rng, ["x"], "x")), rng.choice(OPS), rng.choice([i, Succ(i)]))
            parts.append(Quant("E", "x", "G", x_atom))
    parts = [Not(p) if rng.random() < 0.25 else p for p in parts]
    body = parts[0]
    for p in parts[1:]:
        body = And(body, p) if rng.random() < 0.5 else Or(body, p)
    guard = And(Cmp(i, ">=", VLit(fin(0))), Cmp(i, "<=", VLit(fin(4))))
    kind = rng.choice("EA")
    if kind == "A" and rng.random() < 0.5:
        body = Implies(guard, body)
    return Quant(kind, "i", "I", body)


def random_qe_formula(rng: random.Random, cycle: tuple[int, ...]):
    """E x. phi(x, z) with one free group parameter z."""
    top = FORMULA_LEVEL[cycle]
    return Quant("E", "x", "G", random_body(rng, ["x", "z"], "x", top, rng.randint(1, 4)))
