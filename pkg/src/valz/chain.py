"""Valuation chains B_i = n_i A, the scaled valuations v^l and the value sort.

A chain is described by a finite list of prefix multipliers followed by an
optional cycle that repeats forever: n_0 = 1 and n_i = m_1 * ... * m_i.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

from .ambient import AmbientGroup, Z, pi_index
from .arith import FactoredInt, factorize, is_prime
from .errors import DepthExceeded, DomainError, PreconditionError

_NEG, _FIN, _POS = 0, 1, 2


@functools.total_ordering
@dataclass(frozen=True)
class Value:
    """An element of the value sort: -inf, a natural number, or +inf."""

    kind: int
    n: int = 0

    def __post_init__(self) -> None:
        if self.kind == _FIN and self.n < 0:
            raise DomainError("finite values are natural numbers")
        if self.kind != _FIN and self.n != 0:
            raise DomainError("infinite values carry no payload")

    def _key(self) -> tuple[int, int]:
        return (self.kind, self.n)

    def __lt__(self, other: Value) -> bool:
        if not isinstance(other, Value):
            return NotImplemented
        return self._key() < other._key()

    @property
    def is_finite(self) -> bool:
        return self.kind == _FIN

    @property
    def is_pos_inf(self) -> bool:
        return self.kind == _POS

    @property
    def is_neg_inf(self) -> bool:
        return self.kind == _NEG

    def succ(self) -> Value:
        # the endpoints are fixed points of the successor
        return fin(self.n + 1) if self.kind == _FIN else self

    def __str__(self) -> str:
        if self.kind == _NEG:
            return "-inf"
        if self.kind == _POS:
            return "+inf"
        return str(self.n)

    __repr__ = __str__

    @classmethod
    def parse(cls, text: str) -> Value:
        text = text.strip()
        if text in ("+inf", "inf"):
            return POS_INF
        if text == "-inf":
            return NEG_INF
        return fin(int(text))


NEG_INF = Value(_NEG)
POS_INF = Value(_POS)


def fin(n: int) -> Value:
    return Value(_FIN, n)


@dataclass(frozen=True)
class ValuationChain:
    prefix: tuple[int, ...] = ()
    cycle: tuple[int, ...] | None = None
    ambient: AmbientGroup = Z
    name: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "prefix", tuple(int(m) for m in self.prefix))
        if self.cycle is not None:
            object.__setattr__(self, "cycle", tuple(int(m) for m in self.cycle))
            if not self.cycle:
                raise DomainError("a cycle must be nonempty")
        for m in self.prefix + (self.cycle or ()):
            if m < 2:
                raise DomainError(f"multipliers must be >= 2, got {m}")
        # n_0, n_1, ... grown on demand; appends only, so concurrent readers stay consistent
        object.__setattr__(self, "_moduli", [1])

    @property
    def has_cycle(self) -> bool:
        return self.cycle is not None

    @property
    def depth(self) -> int | None:
        """Number of representable levels beyond 0, or None when infinite."""
        return None if self.has_cycle else len(self.prefix)

    def multiplier(self, i: int) -> int:
        """m_i for i >= 1, so that n_i = n_{i-1} * m_i."""
        if i < 1:
            raise DomainError("multipliers are indexed from 1")
        if i <= len(self.prefix):
            return self.prefix[i - 1]
        if self.cycle is None:
            raise DepthExceeded(f"level {i} lies beyond the prefix of length {len(self.prefix)}")
        return self.cycle[(i - len(self.prefix) - 1) % len(self.cycle)]

    def multipliers(self, count: int) -> list[int]:
        return [self.multiplier(i) for i in range(1, count + 1)]

    def modulus(self, i: int) -> int:
        """n_i as a plain integer."""
        if i < 0:
            raise DomainError("levels are natural numbers")
        cache: list[int] = self._moduli  # type: ignore[attr-defined]
        while len(cache) <= i:
            cache.append(cache[-1] * self.multiplier(len(cache)))
        return cache[i]

    def modulus_at(self, i: int) -> FactoredInt:
        return factorize(self.modulus(i))

    def ball_modulus(self, level: Value, scale: int = 1) -> int | None:
        """Integer m with l*B_level = mZ; None for +inf (the zero subgroup)."""
        if level.is_pos_inf:
            return None
        if level.is_neg_inf:
            return 1
        return scale * self.modulus(level.n)

    def valuate(self, a: int, scale: int = 1) -> Value:
        """v^l(a): +inf at 0, -inf off lZ, else the largest i with l*n_i | a."""
        if scale < 1:
            raise DomainError("scale must be positive")
        if a == 0:
            return POS_INF
        if a % scale:
            return NEG_INF
        rest = abs(a) // scale
        i = 0
        while True:
            try:
                m = self.multiplier(i + 1)
            except DepthExceeded:
                raise DepthExceeded(
                    f"v({a}) is at least {i}, beyond the prefix-only chain"
                ) from None
            if rest % m:
                return fin(i)
            rest //= m
            i += 1

    def quotient_size(self, i: int) -> int:
        """|B_i : B_{i+1}| (the multiplier over Z, pi_index for general ambients)."""
        if self.ambient.is_integers:
            return self.multiplier(i + 1)
        return pi_index(self.ambient, (), self.modulus(i), self.modulus(i + 1)).value

    def to_json(self) -> dict[str, Any]:
        data: dict[str, Any] = {"ambient": self.ambient.to_json(), "prefix": list(self.prefix)}
        if self.cycle is not None:
            data["cycle"] = list(self.cycle)
        if self.name:
            data["name"] = self.name
        return data

    @classmethod
    def from_json(cls, data: Any) -> ValuationChain:
        if not isinstance(data, dict):
            raise DomainError("chain spec must be a JSON object")
        unknown = set(data) - {"ambient", "prefix", "cycle", "name"}
        if unknown:
            raise DomainError(f"unknown chain-spec fields {sorted(unknown)}")
        for key in ("prefix", "cycle"):
            val = data.get(key)
            if val is not None and (
                not isinstance(val, list) or not all(isinstance(m, int) for m in val)
            ):
                raise DomainError(f"field {key!r} must be a list of integers")
        return cls(
            prefix=tuple(data.get("prefix", [])),
            cycle=tuple(data["cycle"]) if data.get("cycle") is not None else None,
            ambient=AmbientGroup.from_json(data.get("ambient", "Z")),
            name=data.get("name"),
        )

    def describe(self) -> str:
        if self.name:
            return self.name
        body = f"prefix {list(self.prefix)}"
        if self.cycle is not None:
            body += f", cycle {list(self.cycle)}"
        return body


def cyclic(*cycle: int, prefix: Sequence[int] = ()) -> ValuationChain:
    return ValuationChain(prefix=tuple(prefix), cycle=tuple(cycle))


def padic(p: int) -> ValuationChain:
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    return ValuationChain(cycle=(p,), name=f"{p}-adic")


# --- Div / Ind --------------------------------------------------------------


def _index(chain: ValuationChain, pi: Iterable[int], scale: int, i: Value, j: Value) -> FactoredInt:
    lo = chain.ball_modulus(i, scale)
    hi = chain.ball_modulus(j, scale)
    assert lo is not None and hi is not None
    return pi_index(chain.ambient, pi, lo, hi)


def div_pred(
    chain: ValuationChain, q: int, k: int, pi: Iterable[int], scale: int, i: Value, j: Value
) -> bool:
    """Div: i <= j and q^(k*rank_q) divides the index of ball j in ball i (pi-torsion removed)."""
    pi = frozenset(pi)
    if not is_prime(q) or q not in pi:
        raise DomainError(f"Div needs a prime q in pi, got q={q}, pi={sorted(pi)}")
    if k < 0 or scale < 1:
        raise DomainError("Div needs k >= 0 and a positive scale")
    if j.is_pos_inf:
        return True
    if i > j:
        return False
    index = _index(chain, pi, scale, i, j)
    return index.exponent(q) >= k * chain.ambient.alpha_at(q)


def ind_pred(chain: ValuationChain, k: int, pi: Iterable[int], scale: int, i: Value, j: Value) -> bool:
    """Ind: i <= j and the index of ball j in ball i (pi-torsion removed) is at least k."""
    if k < 0 or scale < 1:
        raise DomainError("Ind needs k >= 0 and a positive scale")
    if j.is_pos_inf:
        return True
    if i > j:
        return False
    return _index(chain, frozenset(pi), scale, i, j).value >= k


# --- distality --------------------------------------------------------------


@dataclass(frozen=True)
class DistalityReport:
    verdict: str  # "distal" | "notDistal" | "undeterminedBeyondPrefix"
    bound: int | None

    def __str__(self) -> str:
        if self.verdict == "distal":
            return f"distal, bound {self.bound}"
        if self.verdict == "notDistal":
            return "not distal"
        return f"undetermined beyond prefix (max {self.bound})"


def distality_report(chain: ValuationChain) -> DistalityReport:
    """Distal iff the quotient sizes |B_i/B_{i+1}| are bounded.

    An eventually periodic chain always has bounded quotients; a prefix-only
    chain says nothing about the tail, so only the bound so far is reported.
    """
    levels = len(chain.prefix)
    if chain.cycle is not None:
        levels += len(chain.cycle)
        if not chain.ambient.is_integers:
            # torsion contributions die out once n_i absorbs the torsion exponents
            extra = max((max(es) for es in chain.ambient.torsion.values()), default=0)
            levels += len(chain.cycle) * extra
    sizes = [chain.quotient_size(i) for i in range(levels)]
    bound = max(sizes, default=None)
    if chain.cycle is None:
        return DistalityReport("undeterminedBeyondPrefix", bound)
    return DistalityReport("distal", bound)


# --- the sigma construction -------------------------------------------------

Sigma = Sequence[bool] | Callable[[int], bool]


def build_sigma_chain(p0: int, p1: int, q: int, sigma: Sigma, depth: int = 0) -> ValuationChain:
    """Chain with blocks (p_sigma_l(0), p_sigma_l(1), q); sigma_l true means swap.

    A sequence ``sigma`` is read as eventually constant (its last entry
    repeats forever) and yields a chain with a 3-cycle. A callable is
    materialized to ``depth`` multipliers as a prefix-only chain.
    """
    primes = (p0, p1, q)
    if len(set(primes)) != 3 or not all(is_prime(p) for p in primes):
        raise DomainError(f"p0, p1, q must be pairwise distinct primes, got {primes}")

    def block(swap: bool) -> tuple[int, int, int]:
        return (p1, p0, q) if swap else (p0, p1, q)

    name = f"sigma({p0},{p1},{q})"
    if callable(sigma):
        blocks = math.ceil(depth / 3)
        mults = [m for l in range(blocks) for m in block(bool(sigma(l)))][:depth]
        return ValuationChain(prefix=tuple(mults), name=name)
    flags = [bool(s) for s in sigma]
    if not flags:
        raise DomainError("sigma must have at least one entry")
    prefix = [m for s in flags[:-1] for m in block(s)]
    return ValuationChain(prefix=tuple(prefix), cycle=block(flags[-1]), name=name)


def _sigma_primes(chain: ValuationChain) -> tuple[int, int, int]:
    m1, m2, q = chain.multipliers(3)
    return m1, m2, q


def sigma_profile(chain: ValuationChain, a: int) -> tuple[int, int]:
    """(valuation of a, selector) where the selector is the unique multiplier t with v(a) < v(t*a)."""
    va = chain.valuate(a)
    assert va.is_finite
    raising = [t for t in _sigma_primes(chain) if chain.valuate(t * a) > va]
    if len(raising) != 1:
        raise PreconditionError(f"selector for {a} is not unique: {raising}")
    return va.n, raising[0]


def compare_profiles(pa: tuple[int, int], pb: tuple[int, int], q: int) -> bool:
    """Whether a has smaller s-adic valuation than b, judged from their chain profiles."""
    (va, ta), (vb, tb) = pa, pb
    if abs(va - vb) >= 3:
        return va < vb
    if va >= vb:
        return False
    if vb - va == 1:
        # only a step out of the last slot of a block changes w
        return ta == q
    # gap 2: same block exactly when b sits in the last slot
    return tb != q


def w_compare(chain: ValuationChain, a: int, b: int) -> bool:
    """Whether s_adic(a) < s_adic(b) for s = p0*p1*q, computed from the chain valuation alone.

    ``chain`` must come from build_sigma_chain; q is its third multiplier.
    """
    if a == 0 or b == 0:
        raise DomainError("w_compare needs nonzero arguments")
    q = _sigma_primes(chain)[2]
    return compare_profiles(sigma_profile(chain, a), sigma_profile(chain, b), q)


def s_adic(a: int, s: int) -> int:
    """Largest k with s^k | a (direct, independent of any chain)."""
    if a == 0:
        raise DomainError("s-adic valuation of 0")
    a, k = abs(a), 0
    while a % s == 0:
        a //= s
        k += 1
    return k


def parse_sigma(text: str) -> list[bool]:
    """"id", "swap", or a string over {i, s} whose last letter repeats forever."""
    text = text.strip().lower()
    if text == "id":
        return [False]
    if text == "swap":
        return [True]
    if not text or set(text) - {"i", "s"}:
        raise DomainError(f"sigma pattern must be id, swap or letters i/s, got {text!r}")
    return [c == "s" for c in text]


@dataclass(frozen=True)
class RetractReport:
    agree: int
    total: int
    mismatch: tuple[int, int] | None

    @property
    def passed(self) -> bool:
        return self.agree == self.total

    def __str__(self) -> str:
        status = "pass" if self.passed else f"FAIL (e.g. a={self.mismatch[0]}, b={self.mismatch[1]})"
        return f"{status}: {self.agree}/{self.total} pairs agree"


def retract_check(chain: ValuationChain, bound: int) -> RetractReport:
    """Compare w_compare with the direct s-adic order on all 0 < |a|, |b| <= bound.

    w_compare(a, b) only depends on the profiles of a and b and the truth only
    on w(a), w(b), so grouping integers by (profile, w) and weighting pairs of
    groups by their sizes covers every pair exactly.
    """
    if bound < 1:
        raise DomainError("bound must be positive")
    p0, p1, q = _sigma_primes(chain)
    s = p0 * p1 * q
    groups: dict[tuple[tuple[int, int], int], list[int]] = {}
    for a in range(-bound, bound + 1):
        if a:
            key = (sigma_profile(chain, a), s_adic(a, s))
            groups.setdefault(key, [0, a])[0] += 1
    agree = total = 0
    mismatch = None
    for (pa, wa), (ca, ra) in groups.items():
        for (pb, wb), (cb, rb) in groups.items():
            total += ca * cb
            if compare_profiles(pa, pb, q) == (wa < wb):
                agree += ca * cb
            elif mismatch is None:
                mismatch = (ra, rb)
    return RetractReport(agree, total, mismatch)
