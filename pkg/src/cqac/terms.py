"""Terms: variables are plain strings, constants are Fractions, Skolem values are Func."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union


@dataclass(frozen=True)
class Func:
    """A functional (Skolem) term ``name(args...)``."""

    name: str
    args: tuple

    def __str__(self) -> str:
        return f"{self.name}({','.join(term_str(a) for a in self.args)})"


Term = Union[str, Fraction, Func]


def is_var(t) -> bool:
    return isinstance(t, str)


def is_const(t) -> bool:
    return isinstance(t, Fraction)


def is_func(t) -> bool:
    return isinstance(t, Func)


def const(value) -> Fraction:
    """Build an exact constant from an int, a Fraction or a decimal / ``p/q`` string."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floating point constants are not allowed")
    return Fraction(value)


class HashedFraction(Fraction):
    """A Fraction that computes its hash once; equal to and interchangeable with Fraction."""

    __slots__ = ("_hash",)

    def __hash__(self):
        try:
            return self._hash
        except AttributeError:
            self._hash = Fraction.__hash__(self)
            return self._hash


_interned: dict = {}


def interned(c: Fraction) -> HashedFraction:
    """Shared hash-caching copy of a constant, for hot evaluation loops."""
    h = _interned.get(c)
    if h is None:
        if len(_interned) > 100_000:
            _interned.clear()
        h = _interned[c] = HashedFraction(c)
    return h


def term_key(t) -> tuple:
    """Total order on terms used for canonical orientation and deterministic output."""
    if isinstance(t, str):
        return (0, t, 0)
    if isinstance(t, Fraction):
        return (1, "", t)
    return (2, str(t), 0)


def fraction_str(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def term_str(t) -> str:
    if isinstance(t, Fraction):
        return fraction_str(t)
    return str(t)


def const_tag(c: Fraction) -> str:
    """Identifier-safe rendering of a constant, used inside predicate names."""
    s = fraction_str(c).replace("/", "o")
    return s.replace("-", "m")


def fresh_name(base: str, used: set) -> str:
    """Return ``base_k`` for the smallest k >= 1 not in ``used`` and record it."""
    k = 1
    while f"{base}_{k}" in used:
        k += 1
    name = f"{base}_{k}"
    used.add(name)
    return name
