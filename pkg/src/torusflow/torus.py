"""Exact arithmetic for a compact torus T = (S^1)^r.

Conventions
-----------
The exponential map is ``a -> (exp(2 pi i a_1), ..., exp(2 pi i a_r))``, so
an integer weight ``m`` defines the character ``exp(a) -> exp(2 pi i <m, a>)``
and its derivative at the identity sends ``a0`` to ``2 pi i <m, a0>``. The
real flow exponent attached to ``m`` is therefore ``2 pi <m, a0>``.

Weights are integer vectors and generators are rational vectors, so every
pairing is an exact :class:`fractions.Fraction` and genericity is decided
without rounding.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Weight:
    """Integer covector in the character lattice Z^r."""

    components: tuple

    def __init__(self, components: Iterable[int]):
        comps = []
        for c in components:
            if isinstance(c, bool) or int(c) != c:
                raise TypeError(f"weight entries must be integers, got {c!r}")
            comps.append(int(c))
        object.__setattr__(self, "components", tuple(comps))

    @property
    def rank(self) -> int:
        return len(self.components)

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def _check(self, other):
        if len(other) != len(self):
            raise DimensionError(f"rank mismatch: {len(self)} vs {len(other)}")

    def __add__(self, other):
        self._check(other)
        return Weight(a + b for a, b in zip(self, other))

    def __sub__(self, other):
        self._check(other)
        return Weight(a - b for a, b in zip(self, other))

    def __neg__(self):
        return Weight(-a for a in self)

    def is_zero(self) -> bool:
        return not any(self.components)

    def to_json(self):
        return list(self.components)

    def __repr__(self):
        return f"Weight{self.components}"

    def __str__(self):
        return "(" + ",".join(str(c) for c in self.components) + ")"


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, int) and not isinstance(x, bool):
        return Fraction(x)
    if isinstance(x, float):
        # exact binary value; callers wanting 1/3 should pass "1/3"
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a rational")


@dataclass(frozen=True)
class GeneratorVector:
    """Element a0 of Lie(T) = R^r with exact rational entries."""

    components: tuple

    def __init__(self, components: Iterable):
        object.__setattr__(
            self, "components", tuple(_as_fraction(c) for c in components)
        )

    @classmethod
    def parse(cls, text: str) -> "GeneratorVector":
        """Parse ``"1/3,1/7"`` (commas or whitespace separate entries)."""
        parts = [p for p in text.replace(",", " ").split() if p]
        if not parts:
            raise ValueError("empty generator vector")
        return cls(parts)

    @property
    def rank(self) -> int:
        return len(self.components)

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __neg__(self):
        return GeneratorVector(-c for c in self.components)

    def to_json(self):
        return [f"{c.numerator}/{c.denominator}" for c in self.components]

    def __str__(self):
        return ",".join(f"{c.numerator}/{c.denominator}" for c in self.components)


@dataclass(frozen=True)
class TorusElement:
    """A point of T stored by its angles theta in [0, 1)^r."""

    angles: tuple

    def __init__(self, angles: Iterable[float]):
        object.__setattr__(
            self, "angles", tuple(float(a) % 1.0 for a in angles)
        )

    @classmethod
    def identity(cls, rank: int) -> "TorusElement":
        return cls([0.0] * rank)

    @classmethod
    def exp(cls, a0: GeneratorVector, s: float = 1.0) -> "TorusElement":
        """Image of ``s * a0`` under the exponential map."""
        if isinstance(s, int):
            return cls(float((s * c) % 1) for c in a0)
        return cls(float(s) * float(c) for c in a0)

    @classmethod
    def random(cls, rank: int, rng: np.random.Generator) -> "TorusElement":
        return cls(rng.random(rank))

    @property
    def rank(self) -> int:
        return len(self.angles)

    def __len__(self):
        return len(self.angles)

    def __mul__(self, other: "TorusElement") -> "TorusElement":
        if len(other) != len(self):
            raise DimensionError(f"rank mismatch: {len(self)} vs {len(other)}")
        return TorusElement(a + b for a, b in zip(self.angles, other.angles))

    def inverse(self) -> "TorusElement":
        return TorusElement(-a for a in self.angles)


@dataclass(frozen=True)
class FlowExponent:
    """Exact pairing ``value = <m, a0>`` and its real scaling ``2 pi value``."""

    value: Fraction
    scaled: float

    def __float__(self):
        return self.scaled

    def sign(self) -> int:
        return (self.value > 0) - (self.value < 0)


def pairing(m: Weight, a0: GeneratorVector) -> Fraction:
    if len(m) != len(a0):
        raise DimensionError(f"weight has rank {len(m)}, generator has rank {len(a0)}")
    return sum((Fraction(k) * c for k, c in zip(m, a0)), Fraction(0))


def character_eval(m: Weight, t: TorusElement) -> complex:
    if len(m) != len(t):
        raise DimensionError(f"weight has rank {len(m)}, element has rank {len(t)}")
    # reduce the phase mod 1 before exponentiating to keep |result| = 1 tightly
    phase = math.fsum(k * th for k, th in zip(m, t.angles)) % 1.0
    return complex(math.cos(TWO_PI * phase), math.sin(TWO_PI * phase))


def exponent(m: Weight, a0: GeneratorVector) -> FlowExponent:
    q = pairing(m, a0)
    return FlowExponent(q, TWO_PI * float(q))


@dataclass
class GenericityVerdict:
    """Result of :func:`is_generic`.

    ``witnesses`` holds every nonzero weight pairing to zero with a0.
    The zero weight does not affect ``generic``; it is listed in
    ``zero_weights`` because, as a tangential weight, it would mean a
    positive-dimensional fixed set and callers must reject it themselves.
    """

    generic: bool
    witnesses: list
    zero_weights: list

    def __bool__(self):
        return self.generic


def is_generic(a0: GeneratorVector, weights: Iterable[Weight]) -> GenericityVerdict:
    witnesses = []
    zero_weights = []
    seen = set()
    for m in weights:
        if m in seen:
            continue
        seen.add(m)
        if m.is_zero():
            zero_weights.append(m)
            continue
        if pairing(m, a0) == 0:
            witnesses.append(m)
    return GenericityVerdict(not witnesses, witnesses, zero_weights)


def default_generator(rank: int) -> GeneratorVector:
    """A generic-looking default a0 = (1/3, 1/7, 1/11, 1/13, ...)."""
    primes = []
    k = 3
    while len(primes) < rank:
        if k != 5 and all(k % p for p in range(2, int(k ** 0.5) + 1)):
            primes.append(k)
        k += 2
    return GeneratorVector(Fraction(1, p) for p in primes)


def weights_from_json(data: Sequence[Sequence[int]]) -> list:
    return [Weight(w) for w in data]
