"""Convergence certificates for rational sequences and their prefix audits.

A certificate is a *claim* about how a sequence converges (effectively,
monotonically, with bounded total variation, ...).  Audits inspect a finite
prefix and can only falsify a claim, never prove it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .core import IndexedSequence, as_rational, dotminus, pow2, rational_from_json, rational_to_json

__all__ = [
    "AuditReport",
    "BoundViolation",
    "BudgetNotReached",
    "CertifiedSequence",
    "Decreasing",
    "DivergenceScanner",
    "Effective",
    "HBounded",
    "Increasing",
    "Plain",
    "WeaklyEffective",
    "audit",
    "certificate_from_json",
    "certificate_to_json",
    "certified_add",
    "certified_mul",
    "certified_neg",
    "divergence_count",
    "monotone_envelope",
    "tail_drop",
    "variation_prefix",
    "variation_split",
]


class BudgetNotReached(ValueError):
    """No tail within the searched depth has variation under the target budget."""


class BoundViolation(ValueError):
    """A caller-supplied magnitude bound was contradicted by a computed term."""


# certificates -----------------------------------------------------------------


@dataclass(frozen=True)
class Effective:
    """``|x(n) - x(n+1)| <= 2**-n`` for every n."""


@dataclass(frozen=True)
class Increasing:
    pass


@dataclass(frozen=True)
class Decreasing:
    pass


@dataclass(frozen=True)
class WeaklyEffective:
    """Total variation ``sum |x(n+1) - x(n)|`` is at most ``budget``."""

    budget: Fraction

    def __post_init__(self):
        object.__setattr__(self, "budget", as_rational(self.budget))
        if self.budget < 0:
            raise ValueError("variation budget must be non-negative")


@dataclass(frozen=True)
class HBounded:
    """At most ``h(n)`` disjoint index pairs jump by ``2**-n`` or more.

    ``h`` is stored as a finite non-decreasing table; past its end the last
    entry repeats, which keeps it total.
    """

    table: tuple[int, ...]

    def __post_init__(self):
        table = tuple(int(v) for v in self.table)
        if not table:
            raise ValueError("h needs at least one value")
        if any(v < 0 for v in table):
            raise ValueError("h takes values in the naturals")
        if any(a > b for a, b in zip(table, table[1:])):
            raise ValueError("h must be non-decreasing")
        object.__setattr__(self, "table", table)

    def h(self, n: int) -> int:
        return self.table[min(n, len(self.table) - 1)]


@dataclass(frozen=True)
class Plain:
    """Convergence with no rate information at all."""


Certificate = Union[Effective, Increasing, Decreasing, WeaklyEffective, HBounded, Plain]

_VARIANT_NAMES = {
    Effective: "effective",
    Increasing: "increasing",
    Decreasing: "decreasing",
    WeaklyEffective: "weakly_effective",
    HBounded: "h_bounded",
    Plain: "plain",
}


def certificate_to_json(cert: Certificate) -> dict:
    out: dict = {"variant": _VARIANT_NAMES[type(cert)]}
    if isinstance(cert, WeaklyEffective):
        out["budget"] = rational_to_json(cert.budget)
    elif isinstance(cert, HBounded):
        out["h"] = list(cert.table)
    return out


def certificate_from_json(obj: dict) -> Certificate:
    if not isinstance(obj, dict) or "variant" not in obj:
        raise ValueError("certificate must be an object with a 'variant' key")
    variant = obj["variant"]
    if variant == "weakly_effective":
        if "budget" not in obj:
            raise ValueError("weakly_effective certificate needs a budget")
        return WeaklyEffective(rational_from_json(obj["budget"]))
    if variant == "h_bounded":
        if "h" not in obj:
            raise ValueError("h_bounded certificate needs an 'h' table")
        return HBounded(tuple(obj["h"]))
    for cls, name in _VARIANT_NAMES.items():
        if name == variant and cls not in (WeaklyEffective, HBounded):
            return cls()
    raise ValueError(f"unknown certificate variant {variant!r}")


@dataclass
class CertifiedSequence:
    seq: IndexedSequence
    cert: Certificate

    def audit(self, depth: int) -> "AuditReport":
        return audit(self, depth)


@dataclass
class AuditReport:
    passed: bool
    violation_index: Optional[int] = None
    witness: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed

    def to_json(self) -> dict:
        witness = {
            k: rational_to_json(v) if isinstance(v, Fraction) else v for k, v in self.witness.items()
        }
        return {"pass": self.passed, "violation_index": self.violation_index, "witness": witness}


# audits -----------------------------------------------------------------------


def audit(cs: CertifiedSequence, depth: int) -> AuditReport:
    """Check the certificate on ``seq(0..depth-1)``.

    The reported index ``j`` is the first term at which the claim is seen to
    fail (the later element of the offending step).
    """
    if depth < 1:
        raise ValueError("audit depth must be at least 1")
    xs = cs.seq.prefix(depth)
    cert = cs.cert

    if isinstance(cert, Plain):
        return AuditReport(True)
    if isinstance(cert, Effective):
        for j in range(1, depth):
            step = abs(xs[j] - xs[j - 1])
            if step > pow2(-(j - 1)):
                return AuditReport(False, j, {"step": step, "allowed": pow2(-(j - 1))})
        return AuditReport(True)
    if isinstance(cert, (Increasing, Decreasing)):
        sign = 1 if isinstance(cert, Increasing) else -1
        for j in range(1, depth):
            if sign * (xs[j] - xs[j - 1]) < 0:
                return AuditReport(False, j, {"previous": xs[j - 1], "value": xs[j]})
        return AuditReport(True)
    if isinstance(cert, WeaklyEffective):
        total = Fraction(0)
        first = None
        for j in range(1, depth):
            total += abs(xs[j] - xs[j - 1])
            if first is None and total > cert.budget:
                first = j
        if first is None:
            return AuditReport(True, witness={"prefix_variation": total})
        return AuditReport(False, first, {"prefix_variation": total, "budget": cert.budget})
    if isinstance(cert, HBounded):
        return _audit_h_bounded(xs, cert)
    raise TypeError(f"unknown certificate {cert!r}")


def _audit_h_bounded(xs: Sequence[Fraction], cert: HBounded) -> AuditReport:
    distinct = sorted(set(xs))
    gaps = [b - a for a, b in zip(distinct, distinct[1:])]
    # below the smallest gap every threshold sees the same pairs
    n_max = 0
    if gaps:
        smallest = min(gaps)
        while pow2(-n_max) > smallest:
            n_max += 1
    worst = None
    for n in range(n_max + 1):
        limit = cert.h(n)
        scanner = DivergenceScanner(pow2(-n))
        for j, x in enumerate(xs):
            scanner = scanner.push(x)
            if scanner.count > limit:
                if worst is None or j < worst[0]:
                    worst = (j, n, scanner.count, limit)
                break
    if worst is None:
        return AuditReport(True)
    j, n, count, limit = worst
    return AuditReport(False, j, {"n": n, "count": count, "h": limit})


def variation_prefix(seq: IndexedSequence, depth: int) -> Fraction:
    """``sum_{s <= depth-2} |seq(s+1) - seq(s)|``."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    xs = seq.prefix(depth)
    return sum((abs(b - a) for a, b in zip(xs, xs[1:])), Fraction(0))


# transforms -------------------------------------------------------------------


def monotone_envelope(seq: IndexedSequence) -> IndexedSequence:
    """Running maximum ``s -> max(seq(0..s))``."""
    return IndexedSequence.accumulate(seq, max, label="monotone envelope")


def variation_split(seq: IndexedSequence) -> tuple[IndexedSequence, IndexedSequence]:
    """Split ``u`` into rising and falling parts ``(y, z)``.

    ``y(s) = u(0) + sum_{i<=s} (u(i+1) -. u(i))`` and
    ``z(s) = sum_{i<=s} (u(i) -. u(i+1))``; both are non-decreasing and
    ``y(s) - z(s) = u(s+1)``.
    """
    rises = IndexedSequence(lambda i: dotminus(seq(i + 1), seq(i)))
    falls = IndexedSequence(lambda i: dotminus(seq(i), seq(i + 1)))
    add = lambda acc, v: acc + v  # noqa: E731
    y = IndexedSequence.accumulate(rises, add, initial=seq(0), label="rising part")
    z = IndexedSequence.accumulate(falls, add, initial=Fraction(0), label="falling part")
    return y, z


@dataclass(frozen=True)
class DivergenceScanner:
    """Incremental greedy for disjoint index pairs with a jump of ``threshold``.

    The scan closes a pair at the earliest index ``j`` for which some open
    index ``i`` in the current window satisfies ``|x(i) - x(j)| >= threshold``
    and restarts the window after ``j``.  Earliest-finishing choice is optimal
    for packing disjoint intervals.  Only the window's min and max matter.
    """

    threshold: Fraction
    count: int = 0
    low: Optional[Fraction] = None
    high: Optional[Fraction] = None

    def push(self, x: Fraction) -> "DivergenceScanner":
        if self.low is not None and (x - self.low >= self.threshold or self.high - x >= self.threshold):
            return DivergenceScanner(self.threshold, self.count + 1)
        low = x if self.low is None else min(self.low, x)
        high = x if self.high is None else max(self.high, x)
        return DivergenceScanner(self.threshold, self.count, low, high)


def divergence_count(seq: IndexedSequence, n: int, depth: int) -> int:
    """Maximum number of disjoint pairs ``i < j < depth`` with ``|x(i) - x(j)| >= 2**-n``."""
    if depth < 2:
        raise ValueError("depth must be at least 2")
    scanner = DivergenceScanner(pow2(-n))
    for x in seq.prefix(depth):
        scanner = scanner.push(x)
    return scanner.count


def tail_drop(cs: CertifiedSequence, target_budget, audit_depth: int) -> tuple[CertifiedSequence, int]:
    """Drop the fewest initial terms so the tail fits ``target_budget``.

    Candidate offsets ``k < audit_depth`` are tried in order; a tail passes
    when its own audit window ``seq(k .. k + audit_depth - 1)`` varies by at
    most ``target_budget``.  Returns the shifted sequence (certified
    ``WeaklyEffective(target_budget)``) and ``k``.
    """
    target = as_rational(target_budget)
    if not isinstance(cs.cert, (WeaklyEffective, Effective)):
        raise TypeError("tail_drop needs a weakly effective certificate")
    if target <= 0:
        raise ValueError("target budget must be positive")
    if audit_depth < 1:
        raise ValueError("audit depth must be at least 1")
    xs = cs.seq.prefix(2 * audit_depth - 1)
    steps = [abs(b - a) for a, b in zip(xs, xs[1:])]
    window = sum(steps[: audit_depth - 1], Fraction(0))
    for k in range(audit_depth):
        if window <= target:
            return CertifiedSequence(cs.seq.shift(k), WeaklyEffective(target)), k
        if k + audit_depth - 1 < len(steps):
            window += steps[k + audit_depth - 1] - steps[k]
    raise BudgetNotReached(f"no tail starting below index {audit_depth} varies by at most {target}")


# certificate algebra ----------------------------------------------------------


def _as_weak(cert: Certificate) -> Optional[WeaklyEffective]:
    if isinstance(cert, WeaklyEffective):
        return cert
    if isinstance(cert, Effective):
        return WeaklyEffective(Fraction(2))  # sum of 2**-n
    return None


def certified_add(a: CertifiedSequence, b: CertifiedSequence) -> CertifiedSequence:
    ca, cb = a.cert, b.cert
    total = IndexedSequence(lambda s: a.seq(s) + b.seq(s))

    if isinstance(ca, Plain) or isinstance(cb, Plain):
        return CertifiedSequence(total, Plain())
    for mono in (Increasing, Decreasing):
        if isinstance(ca, mono) and isinstance(cb, mono):
            return CertifiedSequence(total, mono())
        if (isinstance(ca, mono) and isinstance(cb, Effective)) or (isinstance(ca, Effective) and isinstance(cb, mono)):
            # the raw sum need not be monotone; shifting by 2**-(s-1) absorbs the effective wobble
            sign = -1 if mono is Increasing else 1
            slack = IndexedSequence(lambda s: a.seq(s) + b.seq(s) + sign * pow2(1 - s))
            return CertifiedSequence(slack, mono())
    wa, wb = _as_weak(ca), _as_weak(cb)
    if wa is not None and wb is not None:
        return CertifiedSequence(total, WeaklyEffective(wa.budget + wb.budget))
    return CertifiedSequence(total, Plain())


def certified_neg(a: CertifiedSequence) -> CertifiedSequence:
    flipped = {Increasing: Decreasing, Decreasing: Increasing}
    cert = a.cert
    if type(cert) in flipped:
        cert = flipped[type(cert)]()
    return CertifiedSequence(-a.seq, cert)


def certified_mul(a: CertifiedSequence, b: CertifiedSequence, bound_a, bound_b) -> CertifiedSequence:
    """Pointwise product of two weakly effective sequences.

    Uses ``|a'b' - ab| <= |b'| |a' - a| + |a| |b' - b|``, so the product's
    budget is ``bound_b * c_a + bound_a * c_b``.  The magnitude bounds are
    checked on every term that gets computed.
    """
    wa, wb = _as_weak(a.cert), _as_weak(b.cert)
    if wa is None or wb is None:
        raise TypeError("certified_mul needs weakly effective inputs")
    ba, bb = as_rational(bound_a), as_rational(bound_b)

    def gen(s: int) -> Fraction:
        x, y = a.seq(s), b.seq(s)
        if abs(x) > ba:
            raise BoundViolation(f"|a({s})| = {abs(x)} exceeds bound {ba}")
        if abs(y) > bb:
            raise BoundViolation(f"|b({s})| = {abs(y)} exceeds bound {bb}")
        return x * y

    budget = bb * wa.budget + ba * wb.budget
    return CertifiedSequence(IndexedSequence(gen, label="product"), WeaklyEffective(budget))
