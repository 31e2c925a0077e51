"""Stage construction of a weakly computable function that escapes a finite
list of uniformly weakly effective polygon sequences.

``f_s = g_s - h_s`` with ``(g_s)`` and ``(h_s)`` increasing.  Adversary ``e``
is attacked at the witness ``x_e = 2**-e``: while its emitted polygons stay
within unit variation at ``x_e`` and its latest polygon sits within ``2**-e``
of ``f_s(x_e)``, the construction moves ``f`` by ``2**-e`` there.

The universal enumeration of all machines is replaced by a caller-supplied
finite list of adversaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .core import as_rational, pow2, rational_to_json
from .polygons import Polygon, pointwise_max, sup_distance

__all__ = [
    "Adversary",
    "ConstructionState",
    "Report",
    "budget_burner",
    "constant_adversary",
    "default_catalog",
    "follower",
    "initial_state",
    "literal_adversary",
    "oscillator",
    "run",
    "run_stage",
    "verify_report",
    "witness",
]

ZERO = Polygon.constant(0)

Emitter = Callable[[int, Sequence[Polygon]], Sequence[Polygon]]


def witness(e: int) -> Fraction:
    return pow2(-e)


@dataclass(frozen=True)
class Adversary:
    """A polygon-sequence machine simulated stage by stage.

    ``emit(s, f_trace)`` returns every polygon output by stage ``s``; the list
    must only grow.  ``f_trace`` holds ``f_0 .. f_s`` for adversaries that
    watch the construction; oblivious ones ignore it.
    """

    id: int
    emit: Emitter
    name: str = "adversary"


def constant_adversary(e: int, value=0) -> Adversary:
    pg = Polygon.constant(as_rational(value))
    return Adversary(e, lambda s, _trace: [pg] * (s + 1), "constant")


def follower(e: int, delay: int = 1) -> Adversary:
    """Re-emits ``f_t`` at stage ``t + delay``."""
    if delay < 1:
        raise ValueError("a follower needs a delay of at least one stage")
    return Adversary(e, lambda s, trace: list(trace[: max(0, s - delay + 1)]), f"follower-{delay}")


def oscillator(e: int, amplitude=1) -> Adversary:
    a = as_rational(amplitude)
    low, high = ZERO, Polygon.constant(a)
    return Adversary(e, lambda s, _trace: [low if i % 2 == 0 else high for i in range(s + 1)], "oscillator")


def budget_burner(e: int, step=Fraction(1, 4), total=Fraction(5, 4)) -> Adversary:
    """Climbs by ``step`` per stage until its value reaches ``total``, then sits there."""
    step, total = as_rational(step), as_rational(total)
    return Adversary(
        e,
        lambda s, _trace: [Polygon.constant(min(i * step, total)) for i in range(s + 1)],
        "budget-burner",
    )


def literal_adversary(e: int, polygons: Sequence[Polygon], per_stage: int = 1) -> Adversary:
    pgs = list(polygons)
    return Adversary(e, lambda s, _trace: pgs[: min(len(pgs), (s + 1) * per_stage)], "literal")


def default_catalog() -> list[Adversary]:
    return [constant_adversary(0), follower(1), oscillator(2), budget_burner(3)]


# construction -----------------------------------------------------------------


@dataclass(frozen=True)
class ConstructionState:
    stage: int
    g: Polygon
    h: Polygon
    f: Polygon
    f_trace: tuple[Polygon, ...]
    bump_count: dict = field(default_factory=dict)
    examined: dict = field(default_factory=dict)  # e -> number of polygons seen at last look
    spent: dict = field(default_factory=dict)  # e -> variation of the adversary at x_e
    separation: dict = field(default_factory=dict)  # e -> |f_s(x_e) - last polygon(x_e)| at last look
    bumps: tuple = ()  # (e, "g" | "h") applied in the transition into this stage


def initial_state() -> ConstructionState:
    return ConstructionState(0, ZERO, ZERO, ZERO, (ZERO,))


def _bump(e: int, height: Fraction) -> Polygon:
    """Non-negative tent of ``height`` at ``x_e`` vanishing at the neighbouring witnesses."""
    x = witness(e)
    pts = [(Fraction(0), Fraction(0))]
    if x / 2 > 0:
        pts.append((x / 2, Fraction(0)))
    pts.append((x, height))
    if x < 1:
        pts.append((min(2 * x, Fraction(1)), Fraction(0)))
    if pts[-1][0] < 1:
        pts.append((Fraction(1), Fraction(0)))
    return Polygon(pts)


def _extend_left(pg: Polygon, e: int) -> Polygon:
    """Raise ``pg`` on [0, x_e] to at least ``pg(x_e)``.

    Taking the maximum (rather than overwriting) keeps the sequence increasing.
    """
    x = witness(e)
    lifted = pointwise_max(pg, Polygon.constant(pg(x)))
    return lifted if x == 1 else lifted.restrict_join(pg, x)


def _variation_at(polygons: Sequence[Polygon], x: Fraction) -> Fraction:
    vals = [pg(x) for pg in polygons]
    return sum((abs(b - a) for a, b in zip(vals, vals[1:])), Fraction(0))


def run_stage(state: ConstructionState, adversaries: Sequence[Adversary]) -> ConstructionState:
    """Advance from stage ``s`` to ``s + 1``."""
    s = state.stage
    examined, spent, separation = dict(state.examined), dict(state.spent), dict(state.separation)
    bumps: list[tuple[int, str]] = []
    for adv in adversaries:
        e = adv.id
        if e > s + 1:
            continue
        emitted = list(adv.emit(s, state.f_trace))
        if not emitted or len(emitted) == examined.get(e, 0):
            continue
        examined[e] = len(emitted)
        x = witness(e)
        last = emitted[-1](x)
        spent[e] = _variation_at(emitted, x)
        fx = state.f(x)
        separation[e] = abs(fx - last)
        if spent[e] > 1 or separation[e] >= pow2(-e):
            continue
        # both branches are enabled at fx == last + 2**-e; the g branch wins ties
        bumps.append((e, "g" if fx <= last + pow2(-e) else "h"))

    if not bumps:
        return replace(
            state,
            stage=s + 1,
            f_trace=state.f_trace + (state.f,),
            examined=examined,
            spent=spent,
            separation=separation,
            bumps=(),
        )

    g, h = state.g, state.h
    counts = dict(state.bump_count)
    for e, side in bumps:
        counts[e] = counts.get(e, 0) + 1
        if side == "g":
            g = g + _bump(e, pow2(-e))
        else:
            h = h + _bump(e, pow2(-e))
    for side in ("g", "h"):
        touched = [e for e, which in bumps if which == side]
        if touched:
            if side == "g":
                g = _extend_left(g, max(touched))
            else:
                h = _extend_left(h, max(touched))
    f = g - h
    return ConstructionState(
        s + 1, g, h, f, state.f_trace + (f,), counts, examined, spent, separation, tuple(bumps)
    )


# reporting --------------------------------------------------------------------


@dataclass
class AdversaryOutcome:
    id: int
    name: str
    witness: Fraction
    emitted: int
    separation: Optional[Fraction]
    spent: Fraction
    sup_variation: Fraction
    bump_count: int
    verdict: str = "undetermined"

    def to_json(self) -> dict:
        enc = lambda q: None if q is None else rational_to_json(q)  # noqa: E731
        return {
            "id": self.id,
            "name": self.name,
            "witness": enc(self.witness),
            "emitted": self.emitted,
            "separation": enc(self.separation),
            "spent": enc(self.spent),
            "sup_variation": enc(self.sup_variation),
            "bump_count": self.bump_count,
            "verdict": self.verdict,
        }


@dataclass
class Report:
    stages: int
    outcomes: list[AdversaryOutcome]
    g_trace: list[Polygon]
    h_trace: list[Polygon]
    f_trace: list[Polygon]
    bump_log: list[tuple]  # (stage, e, side)
    max_bump_count: dict

    def to_json(self, include_trace: bool = True) -> dict:
        out = {
            "stages": self.stages,
            "adversaries": [o.to_json() for o in self.outcomes],
            "bumps": [{"stage": s, "id": e, "side": side} for s, e, side in self.bump_log],
        }
        if include_trace:
            out["f_trace"] = [pg.to_json() for pg in self.f_trace]
        return out


def run(adversaries: Sequence[Adversary], stages: int) -> tuple[ConstructionState, Report]:
    if stages < 1:
        raise ValueError("run at least one stage")
    ids = [a.id for a in adversaries]
    if len(set(ids)) != len(ids):
        raise ValueError("adversary ids must be distinct")
    state = initial_state()
    g_trace, h_trace = [state.g], [state.h]
    bump_log: list[tuple] = []
    for _ in range(stages):
        state = run_stage(state, adversaries)
        g_trace.append(state.g)
        h_trace.append(state.h)
        bump_log.extend((state.stage, e, side) for e, side in state.bumps)

    outcomes = []
    for adv in adversaries:
        e = adv.id
        x = witness(e)
        emitted = list(adv.emit(state.stage, state.f_trace))
        sep = abs(state.f(x) - emitted[-1](x)) if emitted else None
        sup_var = sum((sup_distance(b, a) for a, b in zip(emitted, emitted[1:])), Fraction(0))
        outcomes.append(
            AdversaryOutcome(
                e, adv.name, x, len(emitted), sep, _variation_at(emitted, x), sup_var, state.bump_count.get(e, 0)
            )
        )
    report = Report(stages, outcomes, g_trace, h_trace, list(state.f_trace), bump_log, dict(state.bump_count))
    verify_report(report)
    return state, report


def verify_report(report: Report) -> dict[int, str]:
    """Fill in and return per-adversary verdicts.

    ``budget-exceeded`` when the adversary's variation at its witness is above
    one, ``defeated`` when it stays within budget and ends more than
    ``2**-(e+1)`` away from ``f``, ``undetermined`` otherwise.
    """
    verdicts = {}
    for o in report.outcomes:
        if o.emitted and o.spent > 1:
            o.verdict = "budget-exceeded"
        elif o.separation is not None and o.separation > pow2(-(o.id + 1)):
            o.verdict = "defeated"
        else:
            o.verdict = "undetermined"
        verdicts[o.id] = o.verdict
    return verdicts
