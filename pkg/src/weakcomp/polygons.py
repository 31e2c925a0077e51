"""Rational polygons: continuous piecewise-linear functions on [0, 1].

Breakpoints are exact rationals.  Consecutive collinear breakpoints are merged
on construction, so two polygons are equal as functions exactly when their
breakpoint tuples are equal.
"""

from __future__ import annotations

from bisect import bisect_right
from fractions import Fraction
from typing import Iterable, Sequence

from .core import as_rational, format_rational, pow2, rational_from_json, rational_to_json

__all__ = [
    "DomainError",
    "Polygon",
    "ceil_log2",
    "pointwise_max",
    "pointwise_min",
    "sup_distance",
]


class DomainError(ValueError):
    """Evaluation point outside [0, 1]."""


def ceil_log2(q: Fraction) -> int:
    """Smallest integer k with ``2**k >= q`` for ``q >= 1``."""
    if q < 1:
        raise ValueError("ceil_log2 is only used for q >= 1")
    c = -((-q.numerator) // q.denominator)
    return (c - 1).bit_length()


class Polygon:
    __slots__ = ("_xs", "_ys")

    def __init__(self, points: Iterable[Sequence]):
        pts = [(as_rational(x), as_rational(y)) for x, y in points]
        if len(pts) < 2:
            raise ValueError("a polygon needs at least two breakpoints")
        if pts[0][0] != 0 or pts[-1][0] != 1:
            raise ValueError("breakpoints must start at x = 0 and end at x = 1")
        if any(b[0] <= a[0] for a, b in zip(pts, pts[1:])):
            raise ValueError("breakpoint x-coordinates must be strictly increasing")
        kept = [pts[0]]
        for i in range(1, len(pts) - 1):
            (x0, y0), (x1, y1), (x2, y2) = kept[-1], pts[i], pts[i + 1]
            if (y1 - y0) * (x2 - x1) != (y2 - y1) * (x1 - x0):
                kept.append(pts[i])
        kept.append(pts[-1])
        self._xs = tuple(p[0] for p in kept)
        self._ys = tuple(p[1] for p in kept)

    # constructors ---------------------------------------------------------

    @classmethod
    def constant(cls, c) -> "Polygon":
        c = as_rational(c)
        return cls([(0, c), (1, c)])

    @classmethod
    def identity(cls) -> "Polygon":
        return cls([(0, 0), (1, 1)])

    @classmethod
    def tent(cls, peak=1, apex=Fraction(1, 2)) -> "Polygon":
        return cls([(0, 0), (apex, peak), (1, 0)])

    @classmethod
    def from_json(cls, obj) -> "Polygon":
        try:
            raw = obj["breakpoints"]
            return cls((rational_from_json(x), rational_from_json(y)) for x, y in raw)
        except (KeyError, TypeError) as exc:
            raise ValueError("polygon JSON must look like {'breakpoints': [[x, y], ...]}") from exc

    def to_json(self) -> dict:
        return {"breakpoints": [[rational_to_json(x), rational_to_json(y)] for x, y in self.breakpoints]}

    # basic access ---------------------------------------------------------

    @property
    def breakpoints(self) -> tuple[tuple[Fraction, Fraction], ...]:
        return tuple(zip(self._xs, self._ys))

    @property
    def xs(self) -> tuple[Fraction, ...]:
        return self._xs

    def __call__(self, x) -> Fraction:
        x = as_rational(x)
        if x < 0 or x > 1:
            raise DomainError(f"{format_rational(x)} is outside [0, 1]")
        i = bisect_right(self._xs, x) - 1
        if i >= len(self._xs) - 1:
            return self._ys[-1]
        x0, x1 = self._xs[i], self._xs[i + 1]
        y0, y1 = self._ys[i], self._ys[i + 1]
        if x == x0:
            return y0
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    evaluate = __call__

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polygon):
            return NotImplemented
        return self._xs == other._xs and self._ys == other._ys

    def __hash__(self) -> int:
        return hash((self._xs, self._ys))

    def __repr__(self) -> str:
        pts = ", ".join(f"({format_rational(x)}, {format_rational(y)})" for x, y in self.breakpoints)
        return f"Polygon[{pts}]"

    # shape ----------------------------------------------------------------

    def slopes(self) -> list[Fraction]:
        return [
            (y1 - y0) / (x1 - x0)
            for x0, x1, y0, y1 in zip(self._xs, self._xs[1:], self._ys, self._ys[1:])
        ]

    def max_slope(self) -> Fraction:
        return max(abs(a) for a in self.slopes())

    def modulus_index(self, s: int) -> int:
        """An m with ``|x - y| < 2**-m  =>  |pg(x) - pg(y)| < 2**-s``.

        ``m = s + max(0, ceil(log2 slope)) + 1`` gives
        ``slope * 2**-m <= 2**-(s+1)``, so the bound even holds for
        ``|x - y| <= 2**-m``.
        """
        if s < 0:
            raise ValueError("precision index must be natural")
        slope = self.max_slope()
        extra = ceil_log2(slope) if slope > 1 else 0
        return s + extra + 1

    def max_value(self) -> tuple[Fraction, Fraction]:
        """``(argmax, max)``; ties resolve to the leftmost breakpoint."""
        best = max(self._ys)
        return self._xs[self._ys.index(best)], best

    def min_value(self) -> tuple[Fraction, Fraction]:
        best = min(self._ys)
        return self._xs[self._ys.index(best)], best

    # arithmetic -----------------------------------------------------------

    def _combine(self, other: "Polygon", op) -> "Polygon":
        grid = sorted(set(self._xs) | set(other._xs))
        return Polygon((x, op(self(x), other(x))) for x in grid)

    def __add__(self, other):
        if isinstance(other, Polygon):
            return self._combine(other, lambda a, b: a + b)
        c = as_rational(other)
        return Polygon((x, y + c) for x, y in self.breakpoints)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Polygon):
            return self._combine(other, lambda a, b: a - b)
        return self + (-as_rational(other))

    def __neg__(self) -> "Polygon":
        return Polygon((x, -y) for x, y in self.breakpoints)

    def scale(self, c) -> "Polygon":
        c = as_rational(c)
        return Polygon((x, c * y) for x, y in self.breakpoints)

    def __mul__(self, c):
        if isinstance(c, Polygon):
            return NotImplemented  # the product of two polygons is not a polygon
        return self.scale(c)

    __rmul__ = __mul__

    def restrict_join(self, other: "Polygon", at) -> "Polygon":
        """``self`` on [0, at] followed by ``other`` on [at, 1]; they must agree at ``at``."""
        at = as_rational(at)
        if self(at) != other(at):
            raise ValueError("pieces do not meet continuously")
        left = [(x, y) for x, y in self.breakpoints if x < at]
        right = [(x, y) for x, y in other.breakpoints if x > at]
        return Polygon(left + [(at, self(at))] + right)

    def grid_rows(self, depth: int) -> list[tuple[Fraction, Fraction]]:
        """Values on the dyadic grid ``k / 2**depth``."""
        n = 1 << depth
        return [(Fraction(k, n), self(Fraction(k, n))) for k in range(n + 1)]


def sup_distance(a: Polygon, b: Polygon) -> Fraction:
    """``max |a(x) - b(x)|`` over [0, 1].

    ``a - b`` is linear between consecutive points of the merged grid, so the
    maximum of its absolute value sits on that grid.
    """
    grid = set(a.xs) | set(b.xs)
    return max(abs(a(x) - b(x)) for x in grid)


def _crossing_grid(a: Polygon, b: Polygon) -> list[Fraction]:
    grid = sorted(set(a.xs) | set(b.xs))
    out = [grid[0]]
    for x0, x1 in zip(grid, grid[1:]):
        d0, d1 = a(x0) - b(x0), a(x1) - b(x1)
        if d0 * d1 < 0:
            out.append(x0 + (x1 - x0) * d0 / (d0 - d1))
        out.append(x1)
    return out


def pointwise_max(a: Polygon, b: Polygon) -> Polygon:
    return Polygon((x, max(a(x), b(x))) for x in _crossing_grid(a, b))


def pointwise_min(a: Polygon, b: Polygon) -> Polygon:
    return Polygon((x, min(a(x), b(x))) for x in _crossing_grid(a, b))
