"""Exact scalar values and the built-in weight monoids.

Stream outputs and transition weights are exact rationals (``fractions.Fraction``)
so that equality, and hence bisimilarity and lasso detection, are decidable.
The min-weight monoid additionally needs a top element; ``INF`` is a singleton
that compares above every rational.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Union

from .errors import InputError


class _Infinity:
    """The single point at infinity of the (min, inf) weight monoid."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "inf"

    def __eq__(self, other):
        return isinstance(other, _Infinity)

    def __hash__(self):
        return hash("ratfix-infinity")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return isinstance(other, _Infinity)

    def __gt__(self, other):
        return not isinstance(other, _Infinity)

    def __ge__(self, other):
        return True


INF = _Infinity()

Weight = Union[Fraction, _Infinity]


def parse_scalar(text: str) -> Fraction:
    """Parse ``"p"`` or ``"p/q"`` into a rational in lowest terms."""
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"not a rational: {text!r}") from exc
    return value


def show_scalar(value: Fraction) -> str:
    return str(value)


def show_weight(value: Weight) -> str:
    return "inf" if value is INF or isinstance(value, _Infinity) else str(value)


@dataclass(frozen=True)
class MonoidSpec:
    """A built-in commutative weight monoid.

    ``member`` is the carrier test; ``combine`` the monoid operation.  Only
    ordered monoids admit order guards in WTS rules.  Equality is by name:
    the built-ins are the whole menu.
    """

    name: str
    unit: Weight
    combine: Callable[[Weight, Weight], Weight] = field(compare=False)
    member: Callable[[Weight], bool] = field(compare=False)
    ordered: bool = False

    def sum(self, values: Iterable[Weight]) -> Weight:
        total = self.unit
        for v in values:
            total = self.combine(total, v)
        return total

    def parse(self, text: str) -> Weight:
        text = text.strip()
        if text == "inf":
            value: Weight = INF
        else:
            value = parse_scalar(text)
        if not self.member(value):
            raise InputError(f"{text!r} is not an element of monoid {self.name}")
        return value


def _is_nat(v: Weight) -> bool:
    return isinstance(v, Fraction) and v.denominator == 1 and v >= 0


def _is_rat(v: Weight) -> bool:
    return isinstance(v, Fraction)


def _is_nonneg_or_inf(v: Weight) -> bool:
    return isinstance(v, _Infinity) or (isinstance(v, Fraction) and v >= 0)


NAT_PLUS = MonoidSpec("nat-plus", Fraction(0), lambda a, b: a + b, _is_nat)
RAT_PLUS = MonoidSpec("rat-plus", Fraction(0), lambda a, b: a + b, _is_rat)
MIN_INF = MonoidSpec("min-inf", INF, min, _is_nonneg_or_inf, ordered=True)

MONOIDS = {m.name: m for m in (NAT_PLUS, RAT_PLUS, MIN_INF)}


def get_monoid(name: str) -> MonoidSpec:
    try:
        return MONOIDS[name]
    except KeyError:
        raise InputError(
            f"unknown monoid {name!r}; built-ins: {', '.join(sorted(MONOIDS))}"
        ) from None
