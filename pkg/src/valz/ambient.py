"""Ambient profinite groups (p-adic integer factors times finite p-groups) and their finite quotients."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Mapping

from .arith import FactoredInt, factorize, is_prime
from .errors import DomainError

Element = tuple[int, ...]


@dataclass(frozen=True)
class AmbientGroup:
    """Descriptor of an abelian profinite group.

    ``alpha`` maps a prime to the rank of the Z_p factor, ``torsion`` maps a
    prime to the invariant-factor exponents of A_p. The integers are the
    special instance with ``is_integers`` set (rank 1 at every prime).
    """

    alpha: Mapping[int, int] = field(default_factory=dict)
    torsion: Mapping[int, tuple[int, ...]] = field(default_factory=dict)
    is_integers: bool = False

    def __post_init__(self) -> None:
        alpha = {int(p): int(a) for p, a in self.alpha.items() if int(a) != 0}
        torsion = {
            int(p): tuple(sorted(int(e) for e in es))
            for p, es in self.torsion.items()
            if len(es)
        }
        for p, a in alpha.items():
            if not is_prime(p) or a < 0:
                raise DomainError(f"bad alpha entry {p}: {a}")
        for p, es in torsion.items():
            if not is_prime(p) or any(e < 1 for e in es):
                raise DomainError(f"bad torsion entry {p}: {list(es)}")
        if self.is_integers and (alpha or torsion):
            raise DomainError("the integers carry no explicit alpha/torsion")
        object.__setattr__(self, "alpha", dict(sorted(alpha.items())))
        object.__setattr__(self, "torsion", dict(sorted(torsion.items())))

    def alpha_at(self, p: int) -> int:
        if self.is_integers:
            return 1
        return self.alpha.get(p, 0)

    def to_json(self) -> Any:
        if self.is_integers:
            return "Z"
        return {
            "alpha": {str(p): a for p, a in self.alpha.items()},
            "torsion": {str(p): list(es) for p, es in self.torsion.items()},
        }

    @classmethod
    def from_json(cls, data: Any) -> AmbientGroup:
        if data == "Z":
            return Z
        if not isinstance(data, dict):
            raise DomainError(f'ambient must be "Z" or an object, got {data!r}')
        unknown = set(data) - {"alpha", "torsion"}
        if unknown:
            raise DomainError(f"unknown ambient fields {sorted(unknown)}")
        return cls(
            alpha={int(p): a for p, a in data.get("alpha", {}).items()},
            torsion={int(p): es for p, es in data.get("torsion", {}).items()},
        )

    def __str__(self) -> str:
        if self.is_integers:
            return "Z"
        parts = [f"Z_{p}^{a}" for p, a in self.alpha.items()]
        parts += [f"Z/{p}^{e}" for p, es in self.torsion.items() for e in es]
        return " x ".join(parts) or "0"


Z = AmbientGroup(is_integers=True)


@dataclass(frozen=True)
class FiniteQuotient:
    """prod (Z/p^e)^mult, elements addressed as flat tuples of residues."""

    components: tuple[tuple[int, int, int], ...]

    @property
    def moduli(self) -> tuple[int, ...]:
        return tuple(p**e for p, e, mult in self.components for _ in range(mult))

    @property
    def order(self) -> int:
        out = 1
        for m in self.moduli:
            out *= m
        return out

    def elements(self) -> Iterator[Element]:
        return itertools.product(*(range(m) for m in self.moduli))

    def zero(self) -> Element:
        return tuple(0 for _ in self.moduli)

    def add(self, x: Element, y: Element) -> Element:
        return tuple((a + b) % m for a, b, m in zip(x, y, self.moduli))

    def sub(self, x: Element, y: Element) -> Element:
        return tuple((a - b) % m for a, b, m in zip(x, y, self.moduli))

    def scale(self, n: int, x: Element) -> Element:
        return tuple(n * a % m for a, m in zip(x, self.moduli))

    def embed(self, a: int) -> Element:
        """Image of an integer constant (the diagonal image of Z)."""
        return tuple(a % m for m in self.moduli)

    def in_multiple(self, x: Element, k: int) -> bool:
        """Whether ``x`` lies in the subgroup k*Q."""
        for (p, e), a in zip(self._flat_pe(), x):
            step = p ** min(e, _exp(k, p))
            if a % step:
                return False
        return True

    def _flat_pe(self) -> Iterable[tuple[int, int]]:
        for p, e, mult in self.components:
            for _ in range(mult):
                yield p, e

    def __str__(self) -> str:
        if not self.components:
            return "0"
        return " x ".join(
            f"(Z/{p**e})^{mult}" if mult > 1 else f"Z/{p**e}" for p, e, mult in self.components
        )


def _exp(k: int, p: int) -> int:
    if k == 0:
        return 1 << 30
    return factorize(abs(k)).exponent(p)


def quotient_mod(ambient: AmbientGroup, m: int) -> FiniteQuotient:
    """The finite group A/mA."""
    if m < 1:
        raise DomainError("quotient modulus must be positive")
    fm = factorize(m)
    comps: list[tuple[int, int, int]] = []
    if ambient.is_integers:
        comps = [(p, e, 1) for p, e in fm.factors.items()]
    else:
        for p, a in ambient.alpha.items():
            if fm.exponent(p):
                comps.append((p, fm.exponent(p), a))
        for p, es in ambient.torsion.items():
            for e in es:
                keep = min(e, fm.exponent(p))
                if keep:
                    comps.append((p, keep, 1))
    merged: dict[tuple[int, int], int] = {}
    for p, e, mult in comps:
        merged[(p, e)] = merged.get((p, e), 0) + mult
    return FiniteQuotient(tuple((p, e, mult) for (p, e), mult in sorted(merged.items())))


def pi_index(ambient: AmbientGroup, pi: Iterable[int], m: int, m2: int) -> FactoredInt:
    """Index of m2*A inside m*A for m dividing m2, returned factored.

    The index is taken in the subgroup that keeps every p-adic factor and
    drops the torsion at the primes in ``pi``.
    """
    if m < 1 or m2 < 1:
        raise DomainError("moduli must be positive")
    if m2 % m:
        raise DomainError(f"{m} does not divide {m2}")
    pi = set(pi)
    fm, fm2 = factorize(m), factorize(m2)
    factors: dict[int, int] = {}
    for p in fm2.factors:
        gap = fm2.exponent(p) - fm.exponent(p)
        e = ambient.alpha_at(p) * gap
        if not ambient.is_integers and p not in pi:
            for t in ambient.torsion.get(p, ()):
                e += min(t, fm2.exponent(p)) - min(t, fm.exponent(p))
        if e:
            factors[p] = e
    value = 1
    for p, e in factors.items():
        value *= p**e
    return FactoredInt(value, factors)
