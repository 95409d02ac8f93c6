"""Exact integer number theory used throughout the engine.

Everything here works on Python ints and targets desk-scale inputs
(moduli well below 2**64); factorization is plain trial division.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Mapping

from .errors import DomainError, UsageError

_SIEVE_LIMIT = 1 << 16


def _sieve(limit: int) -> list[int]:
    flags = bytearray([1]) * (limit + 1)
    flags[0] = flags[1] = 0
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = bytearray(len(flags[p * p :: p]))
    return [i for i, f in enumerate(flags) if f]


SMALL_PRIMES: tuple[int, ...] = tuple(_sieve(_SIEVE_LIMIT))


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in SMALL_PRIMES:
        if p * p > n:
            return True
        if n % p == 0:
            return n == p
    # deterministic Miller-Rabin bases for n < 3.3e24
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class FactoredInt:
    """A positive integer together with its prime factorization."""

    value: int
    factors: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "factors", dict(sorted(self.factors.items())))
        if self.value < 1:
            raise DomainError("FactoredInt value must be positive")
        prod = 1
        for p, e in self.factors.items():
            if e < 1 or not is_prime(p):
                raise DomainError(f"bad factor {p}^{e}")
            prod *= p**e
        if prod != self.value:
            raise DomainError(f"factors {self.factors} do not multiply to {self.value}")

    def __int__(self) -> int:
        return self.value

    def exponent(self, p: int) -> int:
        return self.factors.get(p, 0)

    def primes(self) -> tuple[int, ...]:
        return tuple(self.factors)

    def __str__(self) -> str:
        return str(self.value)


def factorize(n: int) -> FactoredInt:
    if n == 0:
        raise DomainError("cannot factorize 0")
    if n < 0:
        raise DomainError("factorize expects a positive integer")
    rest = n
    factors: dict[int, int] = {}
    for p in SMALL_PRIMES:
        if p * p > rest:
            break
        if rest % p == 0:
            e = 0
            while rest % p == 0:
                rest //= p
                e += 1
            factors[p] = e
    else:
        # continue past the sieve with odd trial divisors
        p = SMALL_PRIMES[-1] + 2
        while p * p <= rest:
            if rest % p == 0:
                e = 0
                while rest % p == 0:
                    rest //= p
                    e += 1
                factors[p] = e
            p += 2
    if rest > 1:
        factors[rest] = factors.get(rest, 0) + 1
    return FactoredInt(n, factors)


def ext_gcd(ns: Iterable[int]) -> tuple[int, list[int]]:
    """Return ``(g, coeffs)`` with ``g = gcd(|n_r|)`` and ``sum(c*n) == g``.

    Folds the pairwise extended Euclidean algorithm over the list; the
    certificate is one valid choice among many.
    """
    ns = list(ns)
    if not ns:
        raise UsageError("ext_gcd needs at least one integer")
    if any(n == 0 for n in ns):
        raise DomainError("ext_gcd expects nonzero integers")
    g = abs(ns[0])
    coeffs = [1 if ns[0] > 0 else -1]
    for n in ns[1:]:
        h, s, t = _euclid(g, n)
        coeffs = [c * s for c in coeffs] + [t]
        g = h
    return g, coeffs


def _euclid(a: int, b: int) -> tuple[int, int, int]:
    r0, r1 = a, b
    s0, s1 = 1, 0
    t0, t1 = 0, 1
    while r1:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if r0 < 0:
        r0, s0, t0 = -r0, -s0, -t0
    return r0, s0, t0


def mod_inverse(a: int, m: int) -> int:
    g, s, _ = _euclid(a % m, m)
    if g != 1:
        raise DomainError(f"{a} is not invertible modulo {m}")
    return s % m


def padic_val(n: int, p: int) -> int:
    if n == 0:
        raise DomainError("p-adic valuation of 0 is +inf")
    if p < 2:
        raise DomainError(f"{p} is not a prime")
    n = abs(n)
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def pi_split(n: int, pi: Iterable[int]) -> tuple[int, int]:
    """Split ``n`` into its pi-part and the cofactor coprime to every prime in pi."""
    if n < 1:
        raise DomainError("pi_split expects a positive integer")
    pi_part = 1
    rest = n
    for p in set(pi):
        while rest % p == 0:
            rest //= p
            pi_part *= p
    return pi_part, rest


def is_pi_number(n: int, pi: Iterable[int]) -> bool:
    return n >= 1 and pi_split(n, pi)[1] == 1


def lcm(*ns: int) -> int:
    return reduce(math.lcm, ns, 1)


def crt_pair(r1: int, m1: int, r2: int, m2: int) -> tuple[int, int] | None:
    """Combine ``x = r1 (m1)`` and ``x = r2 (m2)``; moduli need not be coprime."""
    g, s, _ = _euclid(m1, m2)
    if (r2 - r1) % g:
        return None
    m = m1 // g * m2
    x = (r1 + (r2 - r1) // g * s % (m2 // g) * m1) % m
    return x, m
