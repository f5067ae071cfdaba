"""Exact complex numbers with rational real and imaginary parts."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational


def to_fraction(value) -> Fraction:
    """Parse an int, a decimal/rational string ("0.1", "1/3") or a float.

    Floats go through their shortest decimal repr so ``0.1`` means 1/10.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot read {value!r} as a rational number")


@dataclass(frozen=True)
class Gaussian:
    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", to_fraction(self.re))
        object.__setattr__(self, "im", to_fraction(self.im))

    @classmethod
    def parse(cls, value) -> "Gaussian":
        """Accept a Gaussian, a real literal, a complex, or an ``[re, im]`` pair."""
        if isinstance(value, Gaussian):
            return value
        if isinstance(value, complex):
            return cls(Fraction(repr(value.real)), Fraction(repr(value.imag)))
        if isinstance(value, (list, tuple)):
            if len(value) != 2:
                raise ValueError(f"complex literal needs [re, im], got {value!r}")
            return cls(to_fraction(value[0]), to_fraction(value[1]))
        return cls(to_fraction(value), Fraction(0))

    def __add__(self, other):
        other = Gaussian.parse(other)
        return Gaussian(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return Gaussian(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-Gaussian.parse(other))

    def __rsub__(self, other):
        return Gaussian.parse(other) - self

    def __mul__(self, other):
        other = Gaussian.parse(other)
        return Gaussian(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def conjugate(self) -> "Gaussian":
        return Gaussian(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def is_zero(self, tol: Fraction = Fraction(0)) -> bool:
        return self.abs2() <= tol * tol

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        try:
            other = Gaussian.parse(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def to_json(self):
        return [_fraction_json(self.re), _fraction_json(self.im)]

    def __repr__(self):
        if not self.im:
            return str(self.re)
        return f"({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i)"


def _fraction_json(q: Fraction):
    return int(q) if q.denominator == 1 else str(q)


ZERO = Gaussian()
ONE = Gaussian(1)
