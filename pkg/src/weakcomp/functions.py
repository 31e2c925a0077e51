"""Two representations of continuous functions on [0, 1] and the conversions between them.

* :class:`PolygonSequence` -- a computable sequence of rational polygons tagged
  with the way it converges (increasing, uniformly weakly effective, ...).
* :class:`StreamTransformer` -- a finite-use map from input prefixes to output
  prefixes, standing in for a type-2 machine.  It states explicitly how many
  input terms it reads to produce ``n`` outputs.
"""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

from .core import (
    IndexedSequence,
    Name,
    as_rational,
    clamp_unit,
    constant_name,
    pow2,
    rational_from_json,
    rational_to_json,
)
from .polygons import Polygon, pointwise_max, sup_distance
from .sequences import (
    AuditReport,
    CertifiedSequence,
    Decreasing,
    Effective,
    Increasing,
    WeaklyEffective,
    variation_split,
)

__all__ = [
    "BudgetViolation",
    "CoverNotFound",
    "FunctionClass",
    "Mode",
    "PolygonSequence",
    "StreamTransformer",
    "classify_constant",
    "lsc_to_machine",
    "machine_to_lsc",
    "machine_to_lsc_sequence",
    "machine_to_uwc_polyseq",
    "max_of_lsc",
    "usc_to_machine",
    "uwc_polyseq_to_machine",
    "wc_from_difference",
    "wc_machine_to_difference",
]


class CoverNotFound(RuntimeError):
    """Dyadic probes up to the grid limit did not produce a finite subcover of [0, 1]."""


class BudgetViolation(ValueError):
    """A polygon sequence overran the variation budget it was handed in with."""


class Mode(enum.Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"
    UNIFORMLY_EFFECTIVE = "uniformly_effective"
    UNIFORM_WEAKLY_EFFECTIVE = "uniform_weakly_effective"
    POINTWISE = "pointwise"


class FunctionClass(enum.Enum):
    COMPUTABLE = "computable"
    LSC = "lsc"
    USC = "usc"
    SC = "sc"
    WC = "wc"
    UWC = "uwc"

    def within(self, other: "FunctionClass") -> bool:
        """Whether every function of this class belongs to ``other``."""
        return other in _SUPERCLASSES[self]


_FC = FunctionClass
_SUPERCLASSES = {
    _FC.COMPUTABLE: {_FC.COMPUTABLE, _FC.LSC, _FC.USC, _FC.SC, _FC.UWC, _FC.WC},
    _FC.LSC: {_FC.LSC, _FC.SC, _FC.WC},
    _FC.USC: {_FC.USC, _FC.SC, _FC.WC},
    _FC.SC: {_FC.SC, _FC.WC},
    _FC.UWC: {_FC.UWC, _FC.WC},
    _FC.WC: {_FC.WC},
}


# polygon sequences ------------------------------------------------------------


class PolygonSequence:
    """Lazily generated, memoized polygon sequence with a convergence mode."""

    def __init__(
        self,
        generator: Callable[[int], Polygon],
        mode: Mode = Mode.POINTWISE,
        budget=None,
        label: Optional[str] = None,
    ):
        self._generator = generator
        self._memo: dict[int, Polygon] = {}
        self._lock = threading.Lock()
        self.mode = mode
        self.budget = None if budget is None else as_rational(budget)
        if mode is Mode.UNIFORM_WEAKLY_EFFECTIVE and self.budget is None:
            raise ValueError("uniform weakly effective mode needs a budget")
        self.label = label

    def __getitem__(self, n: int) -> Polygon:
        if n < 0:
            raise IndexError("polygon sequences are indexed by naturals")
        try:
            return self._memo[n]
        except KeyError:
            pass
        pg = self._generator(n)
        with self._lock:
            return self._memo.setdefault(n, pg)

    def prefix(self, n: int) -> list[Polygon]:
        return [self[i] for i in range(n)]

    def values_at(self, x) -> IndexedSequence:
        x = as_rational(x)
        return IndexedSequence(lambda n: self[n](x))

    def negate(self) -> "PolygonSequence":
        swap = {Mode.INCREASING: Mode.DECREASING, Mode.DECREASING: Mode.INCREASING}
        return PolygonSequence(lambda n: -self[n], swap.get(self.mode, self.mode), self.budget)

    def uniform_variation(self, depth: int) -> Fraction:
        """``sum_{s < depth} d(pg(s+1), pg(s))``."""
        return sum((sup_distance(self[s + 1], self[s]) for s in range(depth)), Fraction(0))

    def audit(self, depth: int) -> AuditReport:
        """Check the mode's claim on ``pg(0..depth-1)``."""
        if self.mode in (Mode.INCREASING, Mode.DECREASING):
            sign = 1 if self.mode is Mode.INCREASING else -1
            for n in range(1, depth):
                where, low = ((self[n] - self[n - 1]).scale(sign)).min_value()
                if low < 0:
                    return AuditReport(False, n, {"x": where, "drop": -low})
            return AuditReport(True)
        if self.mode is Mode.UNIFORMLY_EFFECTIVE:
            for m in range(1, depth):
                for n in range(m):
                    d = sup_distance(self[n], self[m])
                    if d > pow2(-n) + pow2(-m):
                        return AuditReport(False, m, {"n": n, "distance": d})
            return AuditReport(True)
        if self.mode is Mode.UNIFORM_WEAKLY_EFFECTIVE:
            total = Fraction(0)
            for n in range(1, depth):
                total += sup_distance(self[n], self[n - 1])
                if total > self.budget:
                    return AuditReport(False, n, {"variation": total, "budget": self.budget})
            return AuditReport(True, witness={"variation": total})
        return AuditReport(True)

    # serialization ---------------------------------------------------------

    def header(self) -> dict:
        out = {"mode": self.mode.value}
        if self.budget is not None:
            out["budget"] = rational_to_json(self.budget)
        return out

    def to_json(self, depth: int) -> dict:
        return {**self.header(), "polygons": [pg.to_json() for pg in self.prefix(depth)]}

    @classmethod
    def from_polygons(cls, polygons: Sequence[Polygon], mode: Mode = Mode.POINTWISE, budget=None) -> "PolygonSequence":
        """A finite list made total by repeating the last polygon."""
        pgs = list(polygons)
        if not pgs:
            raise ValueError("need at least one polygon")
        last = len(pgs) - 1
        return cls(lambda n: pgs[min(n, last)], mode, budget, label="literal")

    @classmethod
    def from_json(cls, obj: dict) -> "PolygonSequence":
        mode = Mode(obj.get("mode", "pointwise"))
        budget = rational_from_json(obj["budget"]) if "budget" in obj else None
        pgs = [Polygon.from_json(p) for p in obj["polygons"]]
        return cls.from_polygons(pgs, mode, budget)

    # catalog ---------------------------------------------------------------

    @classmethod
    def constant(cls, pg: Polygon, mode: Mode = Mode.INCREASING) -> "PolygonSequence":
        budget = 0 if mode is Mode.UNIFORM_WEAKLY_EFFECTIVE else None
        return cls(lambda n: pg, mode, budget, label="constant")

    @classmethod
    def zero(cls) -> "PolygonSequence":
        return cls.constant(Polygon.constant(0))

    @classmethod
    def scaled_identity(cls, factor=1) -> "PolygonSequence":
        """``pg(n)(x) = factor * (1 - 2**-n) * x``; increasing for factor >= 0."""
        factor = as_rational(factor)
        ident = Polygon.identity()
        return cls(lambda n: ident.scale(factor * (1 - pow2(-n))), Mode.INCREASING, label="scaled identity")

    @classmethod
    def tent_growth(cls) -> "PolygonSequence":
        """Tent at 1/2 with peak ``1 - 2**-n``."""
        return cls(lambda n: Polygon.tent(1 - pow2(-n)), Mode.INCREASING, label="tent growth")

    @classmethod
    def uniform_ramp(cls) -> "PolygonSequence":
        """``pg(n)(x) = (1/2 - 2**-(n+1)) x``: consecutive distance ``2**-(n+2)``, total 1/2."""
        ident = Polygon.identity()
        half = Fraction(1, 2)
        return cls(
            lambda n: ident.scale(half - pow2(-(n + 1))),
            Mode.UNIFORM_WEAKLY_EFFECTIVE,
            half,
            label="uniform ramp",
        )

    @classmethod
    def damped_oscillation(cls, base: Optional[Polygon] = None) -> "PolygonSequence":
        """``base + (-1)**n 2**-(n+3)``: oscillates, total variation 3/8."""
        base = base if base is not None else Polygon.tent(Fraction(1, 2))
        return cls(
            lambda n: base + (pow2(-(n + 3)) if n % 2 == 0 else -pow2(-(n + 3))),
            Mode.UNIFORM_WEAKLY_EFFECTIVE,
            Fraction(3, 8),
            label="damped oscillation",
        )


# stream transformers ----------------------------------------------------------


class StreamTransformer:
    """A finite-use machine on rational streams.

    ``produce(inputs, n)`` returns the first ``n`` outputs and may only look
    at ``inputs[:usage(n)]``; :meth:`outputs` enforces that by slicing.  The
    usage map must be non-decreasing and outputs for ``n`` must extend those
    for ``n - 1``.
    """

    def __init__(
        self,
        produce: Callable[[Sequence[Fraction], int], list[Fraction]],
        usage: Callable[[int], int],
        label: Optional[str] = None,
    ):
        self._produce = produce
        self._usage = usage
        self.label = label

    def usage(self, n: int) -> int:
        return self._usage(n)

    def outputs(self, inputs: Sequence[Fraction], n: int) -> list[Fraction]:
        k = self.usage(n)
        if len(inputs) < k:
            raise ValueError(f"{n} outputs need {k} input terms, got {len(inputs)}")
        out = self._produce(list(inputs[:k]), n)
        if len(out) != n:
            raise RuntimeError(f"machine produced {len(out)} outputs, expected {n}")
        return out

    def run(self, name: Union[Name, IndexedSequence], n: int) -> list[Fraction]:
        seq = name.seq if isinstance(name, Name) else name
        return self.outputs(seq.prefix(self.usage(n)), n)


def _running_max(fn: Callable[[int], int]) -> Callable[[int], int]:
    """Memoized ``n -> max(fn(0..n))``."""
    cache: list[int] = []
    lock = threading.Lock()

    def get(n: int) -> int:
        with lock:
            while len(cache) <= n:
                v = fn(len(cache))
                cache.append(v if not cache else max(cache[-1], v))
            return cache[n]

    return get


def lsc_to_machine(ps: PolygonSequence) -> StreamTransformer:
    """Machine emitting an increasing sequence of lower bounds converging to ``lim ps``.

    Output ``s`` is ``max_{t<=s} (pg_t(u_t) - 2**-t)`` where
    ``u_t = input[modulus_index(pg_t, t)]`` (clamped into [0, 1]).
    """
    if ps.mode is not Mode.INCREASING:
        raise ValueError("lsc_to_machine needs an increasing polygon sequence")
    read_index = lambda t: ps[t].modulus_index(t)  # noqa: E731
    reach = _running_max(read_index)

    def usage(n: int) -> int:
        return 0 if n == 0 else reach(n - 1) + 1

    def produce(inputs: Sequence[Fraction], n: int) -> list[Fraction]:
        out: list[Fraction] = []
        for t in range(n):
            y = ps[t](clamp_unit(inputs[read_index(t)])) - pow2(-t)
            out.append(y if not out else max(out[-1], y))
        return out

    return StreamTransformer(produce, usage, label="lsc machine")


def usc_to_machine(ps: PolygonSequence) -> StreamTransformer:
    """Decreasing upper bounds for a decreasing sequence, by negation symmetry."""
    if ps.mode is not Mode.DECREASING:
        raise ValueError("usc_to_machine needs a decreasing polygon sequence")
    inner = lsc_to_machine(ps.negate())
    return StreamTransformer(
        lambda inputs, n: [-v for v in inner.outputs(inputs, n)], inner.usage, label="usc machine"
    )


# finite subcovers ----------------------------------------------------------------


@dataclass(frozen=True)
class Probe:
    """Output of a machine on the constant name of ``r`` and the open interval it certifies.

    ``radius is None`` means the machine read no input at all, so the value
    holds on the whole interval.
    """

    r: Fraction
    value: Fraction
    radius: Optional[Fraction]

    @property
    def lo(self) -> Optional[Fraction]:
        return None if self.radius is None else self.r - self.radius

    @property
    def hi(self) -> Optional[Fraction]:
        return None if self.radius is None else self.r + self.radius


def dyadic_level(level: int) -> list[Fraction]:
    """Dyadic rationals first appearing at ``level``: 0 and 1, then odd multiples of 2**-level."""
    if level == 0:
        return [Fraction(0), Fraction(1)]
    n = 1 << level
    return [Fraction(k, n) for k in range(1, n, 2)]


def _probe(m: StreamTransformer, r: Fraction, n_outputs: int, output_index: int) -> Probe:
    values = m.run(constant_name(r), n_outputs)
    k = m.usage(n_outputs) - 1
    # agreeing with r on indices 0..k is compatible with any x within 2**-k of r
    return Probe(r, values[output_index], None if k < 0 else pow2(-k))


def _chain_cover(probes: Sequence[Probe]) -> Optional[list[Probe]]:
    """Greedy chain of open intervals covering [0, 1], or ``None``.

    At the current uncovered point p pick, among intervals containing p, the
    one reaching furthest right.  The resulting chain overlaps consecutively
    and ``J[i+1].lo >= J[i-1].hi``.
    """
    for p in probes:
        if p.radius is None:
            return [p]
    chain: list[Probe] = []
    point = Fraction(0)
    while True:
        best = None
        for p in probes:
            if p.lo < point < p.hi and (best is None or p.hi > best.hi):
                best = p
        if best is None:
            return None
        chain.append(best)
        if best.hi > 1:
            return chain
        point = best.hi


def _find_cover(m: StreamTransformer, n_outputs: int, output_index: int, grid_limit: int):
    probes: list[Probe] = []
    for level in range(grid_limit + 1):
        probes.extend(_probe(m, r, n_outputs, output_index) for r in dyadic_level(level))
        chain = _chain_cover(probes)
        if chain is not None:
            return level, probes, chain
    raise CoverNotFound(
        f"dyadic probes up to level {grid_limit} do not cover [0, 1] "
        f"(machine reads {m.usage(n_outputs)} terms for {n_outputs} outputs)"
    )


def _lower_polygon(chain: Sequence[Probe]) -> Polygon:
    """Polygon below every certified value: plateaus on chain intervals, ramps across overlaps."""
    if len(chain) == 1:
        return Polygon.constant(chain[0].value)
    pts: list[tuple[Fraction, Fraction]] = [(Fraction(0), chain[0].value)]
    for cur, nxt in zip(chain, chain[1:]):
        pts.append((max(nxt.lo, Fraction(0)), cur.value))
        pts.append((min(cur.hi, Fraction(1)), nxt.value))
    pts.append((Fraction(1), chain[-1].value))
    merged: list[tuple[Fraction, Fraction]] = []
    for x, y in pts:
        if merged and merged[-1][0] == x:
            if merged[-1][1] != y:
                raise AssertionError("inconsistent chain joinery")
            continue
        merged.append((x, y))
    return Polygon(merged)


def machine_to_lsc_sequence(m: StreamTransformer, grid_limit: int, lookahead: int = 2) -> PolygonSequence:
    """Increasing polygon sequence below the function an LSC machine computes.

    Stage ``s`` probes constant names of dyadic rationals level by level,
    runs ``m`` to ``s + lookahead + 1`` outputs, and stops once the open
    intervals of agreement cover [0, 1].  The chain of covering intervals is
    turned into a polygon that never exceeds a certified value, and stages
    are combined by running pointwise maxima.
    """
    if lookahead < 0:
        raise ValueError("lookahead must be non-negative")

    def raw(s: int) -> Polygon:
        t = s + lookahead
        _, _, chain = _find_cover(m, t + 1, t, grid_limit)
        return _lower_polygon(chain)

    cache: list[Polygon] = []
    lock = threading.Lock()

    def gen(s: int) -> Polygon:
        with lock:
            while len(cache) <= s:
                pg = raw(len(cache))
                cache.append(pg if not cache else pointwise_max(cache[-1], pg))
            return cache[s]

    return PolygonSequence(gen, Mode.INCREASING, label="reconstructed lsc")


def machine_to_lsc(m: StreamTransformer, stage: int, grid_limit: int, lookahead: int = 2) -> Polygon:
    return machine_to_lsc_sequence(m, grid_limit, lookahead)[stage]


def machine_to_uwc_polyseq(m: StreamTransformer, grid_limit: int, budget=4) -> PolygonSequence:
    """Polygon sequence tracking a uniformly weakly effective machine stage by stage.

    Stage ``s`` starts from the first probe level whose intervals cover
    [0, 1] and interpolates the machine's ``s``-th output at the probes.  The
    level is refined until the interpolant agrees with the machine to within
    ``2**-(s+1)`` at every dyadic of the next level.
    """

    def stage(s: int) -> Polygon:
        level, probes, _ = _find_cover(m, s + 1, s, grid_limit)
        known = {p.r: p.value for p in probes}
        tol = pow2(-(s + 1))

        def value(r: Fraction) -> Fraction:
            if r not in known:
                known[r] = m.run(constant_name(r), s + 1)[s]
            return known[r]

        while True:
            n = 1 << level
            pg = Polygon((Fraction(k, n), value(Fraction(k, n))) for k in range(n + 1))
            if level >= grid_limit:
                return pg
            if all(abs(pg(r) - value(r)) <= tol for r in dyadic_level(level + 1)):
                return pg
            level += 1

    return PolygonSequence(stage, Mode.UNIFORM_WEAKLY_EFFECTIVE, budget, label="reconstructed uwc")


# weakly computable functions ------------------------------------------------------


def wc_from_difference(g: PolygonSequence, h: PolygonSequence) -> StreamTransformer:
    """Machine for ``lim g - lim h``: difference of the two LSC machines' outputs."""
    mg, mh = lsc_to_machine(g), lsc_to_machine(h)

    def usage(n: int) -> int:
        return max(mg.usage(n), mh.usage(n))

    def produce(inputs: Sequence[Fraction], n: int) -> list[Fraction]:
        ys, zs = mg.outputs(inputs, n), mh.outputs(inputs, n)
        return [y - z for y, z in zip(ys, zs)]

    return StreamTransformer(produce, usage, label="wc machine")


def wc_machine_to_difference(m: StreamTransformer) -> tuple[StreamTransformer, StreamTransformer]:
    """Two increasing machines whose outputs differ by ``m``'s output shifted one index."""

    def split(inputs: Sequence[Fraction], n: int) -> tuple[list[Fraction], list[Fraction]]:
        u = IndexedSequence.from_values(m.outputs(inputs, n + 1))
        y, z = variation_split(u)
        return y.prefix(n), z.prefix(n)

    usage = lambda n: m.usage(n + 1)  # noqa: E731
    rising = StreamTransformer(lambda inputs, n: split(inputs, n)[0], usage, label="rising part")
    falling = StreamTransformer(lambda inputs, n: split(inputs, n)[1], usage, label="falling part")
    return rising, falling


def uwc_polyseq_to_machine(ps: PolygonSequence, budget=Fraction(1, 2)) -> StreamTransformer:
    """Machine ``y_s = pg_s(input[m(s, s)])`` for a uniformly weakly effective sequence.

    With ``sum d(pg_{s+1}, pg_s) <= 1/2`` the outputs vary by at most 1 in
    total.  ``m(i, s)`` is the running maximum of ``modulus_index(pg_i', s + 3)``
    over ``i' <= i``; the budget is re-audited on every prefix that gets used.
    """
    budget = as_rational(budget)

    def read_index(s: int) -> int:
        return max(ps[i].modulus_index(s + 3) for i in range(s + 1))

    reach = _running_max(read_index)

    def usage(n: int) -> int:
        return 0 if n == 0 else reach(n - 1) + 1

    def produce(inputs: Sequence[Fraction], n: int) -> list[Fraction]:
        spent = Fraction(0)
        for s in range(1, n):
            spent += sup_distance(ps[s], ps[s - 1])
            if spent > budget:
                raise BudgetViolation(f"polygons 0..{s} already vary by {spent} > {budget}")
        return [ps[s](clamp_unit(inputs[read_index(s)])) for s in range(n)]

    return StreamTransformer(produce, usage, label="uwc machine")


# propositions on LSC functions ---------------------------------------------------------


def max_of_lsc(ps: PolygonSequence) -> CertifiedSequence:
    """The maxima ``max pg_n`` increase to ``max lim pg_n``."""
    if ps.mode is not Mode.INCREASING:
        raise ValueError("max_of_lsc needs an increasing polygon sequence")
    return CertifiedSequence(IndexedSequence(lambda n: ps[n].max_value()[1], label="maxima"), Increasing())


def classify_constant(c: CertifiedSequence) -> FunctionClass:
    """Class of the constant function whose value is ``lim c``."""
    cert = c.cert
    if isinstance(cert, Effective):
        return FunctionClass.COMPUTABLE
    if isinstance(cert, Increasing):
        return FunctionClass.LSC
    if isinstance(cert, Decreasing):
        return FunctionClass.USC
    if isinstance(cert, WeaklyEffective):
        return FunctionClass.WC
    raise ValueError(f"no function class is attached to {type(cert).__name__} convergence")
