"""Exact rationals and lazily evaluated rational sequences.

Every value in the library is a :class:`fractions.Fraction`; nothing is ever
rounded.  Sequences are total maps ``index -> Fraction`` whose values are
memoized on first access.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational as _RationalABC
from typing import Callable, Iterable, Optional, Sequence, Union

Rational = Fraction
RationalLike = Union[Fraction, int, str]

__all__ = [
    "Rational",
    "IndexedSequence",
    "Name",
    "as_rational",
    "clamp_unit",
    "constant_name",
    "dotminus",
    "format_rational",
    "perturbed_name",
    "pow2",
    "prefix",
    "rational_from_json",
    "rational_to_json",
]


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions, ``"num/den"`` strings and ``[num, den]`` pairs.

    Floats are rejected: they would smuggle rounding into the core.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, _RationalABC):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational: {value!r}") from exc
    if isinstance(value, (list, tuple)):
        return rational_from_json(value)
    raise TypeError(f"cannot interpret {type(value).__name__} as an exact rational")


def format_rational(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def rational_to_json(q: Fraction) -> list[int]:
    return [q.numerator, q.denominator]


def rational_from_json(obj) -> Fraction:
    if isinstance(obj, (list, tuple)):
        if len(obj) != 2 or not all(isinstance(v, int) and not isinstance(v, bool) for v in obj):
            raise ValueError(f"rational must be a [num, den] integer pair, got {obj!r}")
        num, den = obj
        if den == 0:
            raise ValueError("zero denominator")
        return Fraction(num, den)
    if isinstance(obj, int) and not isinstance(obj, bool):
        return Fraction(obj)
    if isinstance(obj, str):
        return as_rational(obj)
    raise ValueError(f"cannot decode rational from {obj!r}")


def pow2(k: int) -> Fraction:
    """2**k as an exact rational, for negative k too."""
    return Fraction(1 << k) if k >= 0 else Fraction(1, 1 << -k)


def dotminus(a: Fraction, b: Fraction) -> Fraction:
    """Truncated subtraction ``max(a - b, 0)``."""
    d = a - b
    return d if d > 0 else Fraction(0)


def clamp_unit(x: Fraction) -> Fraction:
    # projecting onto [0, 1] never moves a point further from any x in [0, 1]
    if x < 0:
        return Fraction(0)
    if x > 1:
        return Fraction(1)
    return x


class IndexedSequence:
    """A total, deterministic rational sequence with an internal memo.

    ``seq(i)`` evaluates the generator at most once per index.  The memo is
    guarded by a lock so instances can be shared between threads; generators
    must be pure.
    """

    def __init__(self, generator: Callable[[int], RationalLike], label: Optional[str] = None):
        self._generator = generator
        self._memo: dict[int, Fraction] = {}
        self._lock = threading.Lock()
        self.label = label

    def __call__(self, index: int) -> Fraction:
        if index < 0:
            raise IndexError("sequence indices are natural numbers")
        try:
            return self._memo[index]
        except KeyError:
            pass
        value = as_rational(self._generator(index))
        with self._lock:
            return self._memo.setdefault(index, value)

    def prefix(self, n: int) -> list[Fraction]:
        if n < 0:
            raise ValueError("prefix length must be non-negative")
        return [self(i) for i in range(n)]

    def __repr__(self) -> str:
        name = self.label or "IndexedSequence"
        shown = ", ".join(format_rational(v) for v in self.prefix(4))
        return f"<{name}: {shown}, ...>"

    # constructors ---------------------------------------------------------

    @classmethod
    def constant(cls, value: RationalLike) -> "IndexedSequence":
        q = as_rational(value)
        return cls(lambda _s: q, label=f"constant {format_rational(q)}")

    @classmethod
    def from_values(cls, values: Iterable[RationalLike]) -> "IndexedSequence":
        """Finite list extended by repeating its last entry (so it stays total)."""
        items = [as_rational(v) for v in values]
        if not items:
            raise ValueError("a literal sequence needs at least one value")
        last = len(items) - 1
        return cls(lambda s: items[min(s, last)], label="literal")

    @classmethod
    def accumulate(
        cls,
        source: "IndexedSequence",
        step: Callable[[Fraction, Fraction], Fraction],
        initial: Optional[Fraction] = None,
        label: Optional[str] = None,
    ) -> "IndexedSequence":
        """Left fold of ``source``: ``out(s) = step(out(s-1), source(s))``.

        With ``initial`` given, ``out(0) = step(initial, source(0))``;
        otherwise ``out(0) = source(0)``.  Values are produced iteratively,
        so deep indices do not recurse.
        """
        cache: list[Fraction] = []
        lock = threading.Lock()

        def gen(index: int) -> Fraction:
            with lock:
                while len(cache) <= index:
                    s = len(cache)
                    if s == 0:
                        value = source(0) if initial is None else step(initial, source(0))
                    else:
                        value = step(cache[-1], source(s))
                    cache.append(value)
                return cache[index]

        return cls(gen, label=label)

    def map(self, fn: Callable[[Fraction], Fraction]) -> "IndexedSequence":
        return IndexedSequence(lambda s: fn(self(s)))

    def shift(self, k: int) -> "IndexedSequence":
        """The tail ``s -> self(s + k)``."""
        if k < 0:
            raise ValueError("shift must be non-negative")
        return IndexedSequence(lambda s: self(s + k))

    def __neg__(self) -> "IndexedSequence":
        return self.map(lambda v: -v)


def prefix(seq: IndexedSequence, n: int) -> list[Fraction]:
    return seq.prefix(n)


@dataclass(frozen=True)
class Name:
    """A rho-name: a sequence promised to satisfy ``|x - seq(s)| <= 2**-s``.

    ``promise`` is the named real when it is known exactly; externally
    supplied names leave it as ``None`` and the contract is taken on trust.
    """

    seq: IndexedSequence
    promise: Optional[Fraction] = None

    def audit(self, depth: int) -> Optional[int]:
        """First index below ``depth`` breaking the contract, else ``None``."""
        if self.promise is None:
            raise ValueError("cannot audit a name whose real is not known exactly")
        for s in range(depth):
            if abs(self.promise - self.seq(s)) > pow2(-s):
                return s
        return None


def constant_name(r: RationalLike) -> Name:
    q = as_rational(r)
    return Name(IndexedSequence.constant(q), q)


def perturbed_name(r: RationalLike, sign: int = 1) -> Name:
    """A name of ``r`` that wobbles: ``r + sign * (-1)**s * 2**-(s+1)``.

    Entries may leave [0, 1] near the endpoints; consumers clamp.
    """
    q = as_rational(r)
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")

    def gen(s: int) -> Fraction:
        wobble = pow2(-(s + 1))
        return q + wobble if (s % 2 == 0) == (sign == 1) else q - wobble

    return Name(IndexedSequence(gen, label=f"wobbling name of {format_rational(q)}"), q)

