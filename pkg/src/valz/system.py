"""Congruence constraints n*x = a (mod l*B_i) and their membership semantics.

This module only describes constraints and checks them pointwise through the
chain's valuation; the counting engine lives in ``valz.congruence``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

from .arith import FactoredInt, factorize, lcm
from .chain import NEG_INF, POS_INF, Value, ValuationChain, fin
from .errors import DomainError

Element = tuple[int, ...]


@dataclass(frozen=True)
class Congruence:
    """``v^scale(coeff*x - rhs) >= level``, flipped when ``negated``.

    Level +inf is the equation coeff*x = rhs; level -inf holds everywhere.
    """

    coeff: int
    rhs: int
    scale: int = 1
    level: Value = fin(0)
    negated: bool = False

    def __post_init__(self) -> None:
        if self.coeff == 0:
            raise DomainError("congruence coefficient must be nonzero")
        if self.scale < 1:
            raise DomainError("congruence scale must be positive")
        if isinstance(self.level, int):
            object.__setattr__(self, "level", fin(self.level))

    @property
    def is_equation(self) -> bool:
        return self.level.is_pos_inf

    def modulus(self, chain: ValuationChain) -> int | None:
        """l*n_i, 1 at level -inf, None for an equation."""
        return chain.ball_modulus(self.level, self.scale)

    def holds(self, x: int, chain: ValuationChain) -> bool:
        inside = chain.valuate(self.coeff * x - self.rhs, self.scale) >= self.level
        return inside != self.negated

    def negate(self) -> Congruence:
        return Congruence(self.coeff, self.rhs, self.scale, self.level, not self.negated)

    def __str__(self) -> str:
        rel = "!=" if self.negated else "="
        if self.is_equation:
            return f"{self.coeff}x {rel} {self.rhs}"
        lvl = self.level
        scale = f"{self.scale}*" if self.scale != 1 else ""
        return f"{self.coeff}x {rel} {self.rhs} mod {scale}B[{lvl}]"


@dataclass(frozen=True)
class CongruenceSystem:
    members: tuple[Congruence, ...] = ()

    def __init__(self, members: Iterable[Congruence] = ()):
        object.__setattr__(self, "members", tuple(members))

    @property
    def positives(self) -> tuple[Congruence, ...]:
        return tuple(c for c in self.members if not c.negated)

    @property
    def negations(self) -> tuple[Congruence, ...]:
        return tuple(c for c in self.members if c.negated)

    def boundary_modulus(self, chain: ValuationChain) -> int:
        """lcm of l*n_i over every member with a finite level (negated ones included)."""
        mods = [c.modulus(chain) for c in self.members if c.level.is_finite]
        return lcm(*(m for m in mods if m is not None))

    def holds(self, x: int, chain: ValuationChain) -> bool:
        return all(c.holds(x, chain) for c in self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __str__(self) -> str:
        return "; ".join(str(c) for c in self.members) or "(empty)"


@dataclass(frozen=True)
class SolutionCount:
    """Number of solutions modulo ``modulus``.

    ``modulus == 0`` marks an exact count of isolated points (an equation fixed x).
    """

    solvable: bool
    count: int
    witness: Union[int, Element, None]
    modulus: int

    def __post_init__(self) -> None:
        if self.solvable != (self.count >= 1) or self.solvable != (self.witness is not None):
            raise DomainError("inconsistent solution count")

    @property
    def boundary_modulus(self) -> FactoredInt | None:
        return factorize(self.modulus) if self.modulus else None

    def __str__(self) -> str:
        if self.modulus == 0:
            return f"{self.count} (exact)"
        return f"{self.count} (mod {self.modulus})"


def unsolvable(modulus: int) -> SolutionCount:
    return SolutionCount(False, 0, None, modulus)


__all__ = [
    "Congruence",
    "CongruenceSystem",
    "SolutionCount",
    "unsolvable",
    "NEG_INF",
    "POS_INF",
]
