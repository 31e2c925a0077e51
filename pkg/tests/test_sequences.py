import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from weakcomp.core import IndexedSequence, pow2
from weakcomp.sequences import (
    BoundViolation,
    BudgetNotReached,
    CertifiedSequence,
    Decreasing,
    Effective,
    HBounded,
    Increasing,
    Plain,
    WeaklyEffective,
    audit,
    certificate_from_json,
    certificate_to_json,
    certified_add,
    certified_mul,
    certified_neg,
    divergence_count,
    monotone_envelope,
    tail_drop,
    variation_prefix,
    variation_split,
)

small = st.fractions(-4, 4, max_denominator=16)
value_lists = st.lists(small, min_size=1, max_size=20)


def lit(*values):
    return IndexedSequence.from_values([Fraction(v) for v in values])


def test_audit_examples():
    geometric = IndexedSequence(lambda s: pow2(-s))
    assert audit(CertifiedSequence(geometric, Effective()), 10)

    alternating = IndexedSequence(lambda s: (-1) ** s)
    report = audit(CertifiedSequence(alternating, WeaklyEffective(3)), 4)
    assert not report
    assert report.witness["prefix_variation"] == 6
    assert report.violation_index == 2

    report = audit(CertifiedSequence(lit(3, 1, 4), Increasing()), 3)
    assert not report and report.violation_index == 1


def test_audit_needs_positive_depth():
    with pytest.raises(ValueError):
        audit(CertifiedSequence(lit(0), Plain()), 0)


def test_h_bounded_audit():
    seq = lit(0, 1, 0, 1, 0)
    assert audit(CertifiedSequence(seq, HBounded((2,))), 5)
    report = audit(CertifiedSequence(seq, HBounded((1,))), 5)
    assert not report and report.violation_index == 3
    with pytest.raises(ValueError):
        HBounded((2, 1))


def test_variation_prefix_examples():
    assert variation_prefix(lit(1, 0, 1, 0), 4) == 3
    assert variation_prefix(IndexedSequence.constant(5), 9) == 0
    assert variation_prefix(lit(0, Fraction(1, 2), Fraction(3, 4), Fraction(7, 8)), 4) == Fraction(7, 8)


def test_monotone_envelope_examples():
    assert monotone_envelope(lit(3, 1, 4, 1, 5)).prefix(5) == [3, 3, 4, 4, 5]
    assert monotone_envelope(lit(0, -1, Fraction(1, 2))).prefix(3) == [0, 0, Fraction(1, 2)]


@given(value_lists)
def test_envelope_idempotent_and_dominating(values):
    seq = lit(*values)
    env = monotone_envelope(seq)
    n = len(values)
    assert monotone_envelope(env).prefix(n) == env.prefix(n)
    assert all(e >= v for e, v in zip(env.prefix(n), values))


def test_variation_split_examples():
    y, z = variation_split(lit(1, 0, 1))
    assert y.prefix(2) == [1, 2] and z.prefix(2) == [1, 1]
    y, z = variation_split(IndexedSequence.constant(Fraction(2, 3)))
    assert y.prefix(3) == [Fraction(2, 3)] * 3 and z.prefix(3) == [0, 0, 0]
    inc = IndexedSequence(lambda s: 1 - pow2(-s))
    y, z = variation_split(inc)
    assert z.prefix(6) == [0] * 6 and y.prefix(6) == inc.shift(1).prefix(6)


@given(value_lists)
def test_variation_split_bounds(values):
    seq = lit(*values)
    c = variation_prefix(seq, len(values))
    y, z = variation_split(seq)
    for s in range(len(values)):
        assert y(s) <= seq(0) + c and z(s) <= c


def brute_pairs(xs, eps):
    # every set of pairwise non-overlapping intervals, by exhaustive search
    intervals = [(i, j) for i, j in itertools.combinations(range(len(xs)), 2) if abs(xs[i] - xs[j]) >= eps]
    best = 0

    def extend(chosen, start, last_end):
        nonlocal best
        best = max(best, chosen)
        for k in range(start, len(intervals)):
            i, j = intervals[k]
            if i > last_end:
                extend(chosen + 1, k + 1, j)

    intervals.sort()
    extend(0, 0, -1)
    return best


def test_divergence_examples():
    assert divergence_count(lit(0, 1, 0, 1, 0), 0, 5) == 2
    assert divergence_count(IndexedSequence.constant(3), 4, 10) == 0
    assert divergence_count(lit(0, Fraction(1, 4)), 1, 2) == 0


@settings(max_examples=300)
@given(st.lists(st.sampled_from([Fraction(k, 8) for k in range(9)]), min_size=2, max_size=9), st.integers(0, 3))
def test_divergence_greedy_matches_exhaustive_search(xs, n):
    assert divergence_count(lit(*xs), n, len(xs)) == brute_pairs(xs, pow2(-n))


def test_tail_drop_examples():
    cs = CertifiedSequence(lit(1, 0, Fraction(1, 2)), WeaklyEffective(2))
    dropped, k = tail_drop(cs, Fraction(1, 2), 10)
    assert k == 1
    assert variation_prefix(dropped.seq, 9) == Fraction(1, 2)
    assert dropped.cert == WeaklyEffective(Fraction(1, 2))

    _, k = tail_drop(CertifiedSequence(IndexedSequence.constant(1), WeaklyEffective(0)), 1, 10)
    assert k == 0

    alternating = CertifiedSequence(IndexedSequence(lambda s: s % 2), WeaklyEffective(100))
    with pytest.raises(BudgetNotReached):
        tail_drop(alternating, Fraction(1, 2), 10)


@given(value_lists, st.fractions(Fraction(1, 8), 4, max_denominator=8))
def test_tail_drop_is_least(values, target):
    cs = CertifiedSequence(lit(*values), WeaklyEffective(100))
    depth = len(values) + 2
    try:
        dropped, k = tail_drop(cs, target, depth)
    except BudgetNotReached:
        return
    assert dropped.audit(depth)
    assert variation_prefix(cs.seq.shift(k), depth) <= target
    if k:
        assert variation_prefix(cs.seq.shift(k - 1), depth) > target


def test_certified_add_examples():
    a = CertifiedSequence(IndexedSequence(lambda s: 1 - pow2(-s)), Increasing())
    b = CertifiedSequence(IndexedSequence(lambda s: 2 - pow2(-s)), Increasing())
    total = certified_add(a, b)
    assert total.cert == Increasing() and total.seq(60) == 3 - 2 * pow2(-60)

    w1 = CertifiedSequence(IndexedSequence.constant(0), WeaklyEffective(1))
    w2 = CertifiedSequence(IndexedSequence.constant(0), WeaklyEffective(2))
    assert certified_add(w1, w2).cert == WeaklyEffective(3)

    e = CertifiedSequence(IndexedSequence(lambda s: pow2(-s)), Effective())
    ee = certified_add(e, e)
    assert isinstance(ee.cert, WeaklyEffective) and ee.cert.budget == 4
    assert ee.audit(40)

    plain = CertifiedSequence(IndexedSequence.constant(0), Plain())
    assert certified_add(w1, plain).cert == Plain()


@given(st.lists(st.fractions(-1, 1, max_denominator=64), min_size=1, max_size=12))
def test_increasing_plus_effective_is_increasing(noise):
    # an effective sequence: partial sums with |step n| <= 2**-n
    eff_values = [Fraction(0)]
    for n, v in enumerate(noise):
        eff_values.append(eff_values[-1] + v * pow2(-n))
    eff = CertifiedSequence(lit(*eff_values), Effective())
    assert eff.audit(len(eff_values))
    inc = CertifiedSequence(IndexedSequence(lambda s: Fraction(s, s + 1)), Increasing())
    for first, second in ((inc, eff), (eff, inc)):
        out = certified_add(first, second)
        assert out.cert == Increasing()
        assert out.audit(len(eff_values) + 3)


@given(value_lists)
def test_negation_swaps_monotone_certificates(values):
    inc = CertifiedSequence(monotone_envelope(lit(*values)), Increasing())
    neg = certified_neg(inc)
    assert neg.cert == Decreasing()
    assert neg.audit(len(values))


def test_certified_mul_examples():
    half = CertifiedSequence(IndexedSequence.constant(Fraction(1, 2)), WeaklyEffective(0))
    prod = certified_mul(half, half, 1, 1)
    assert prod.seq(5) == Fraction(1, 4) and prod.cert.budget == 0

    a = CertifiedSequence(lit(1, 0, 1), WeaklyEffective(2))
    two = CertifiedSequence(IndexedSequence.constant(2), WeaklyEffective(0))
    assert certified_mul(a, two, 1, 2).cert.budget == 4

    a = CertifiedSequence(lit(1, Fraction(1, 2)), WeaklyEffective(Fraction(1, 2)))
    prod = certified_mul(a, a, 1, 1)
    assert prod.seq.prefix(3) == [1, Fraction(1, 4), Fraction(1, 4)]
    assert prod.cert.budget == 1
    assert variation_prefix(prod.seq, 10) == Fraction(3, 4)


def test_certified_mul_checks_bounds():
    big = CertifiedSequence(IndexedSequence.constant(5), WeaklyEffective(0))
    prod = certified_mul(big, big, 1, 10)
    with pytest.raises(BoundViolation):
        prod.seq(0)


@given(
    st.lists(st.fractions(-2, 2, max_denominator=8), min_size=1, max_size=10),
    st.lists(st.fractions(-2, 2, max_denominator=8), min_size=1, max_size=10),
)
def test_algebra_outputs_pass_their_own_audits(xs, ys):
    depth = max(len(xs), len(ys)) + 1
    a = CertifiedSequence(lit(*xs), WeaklyEffective(variation_prefix(lit(*xs), depth)))
    b = CertifiedSequence(lit(*ys), WeaklyEffective(variation_prefix(lit(*ys), depth)))
    assert certified_add(a, b).audit(depth)
    assert certified_mul(a, b, 2, 2).audit(depth)


@pytest.mark.parametrize(
    "cert",
    [Effective(), Increasing(), Decreasing(), Plain(), WeaklyEffective(Fraction(3, 2)), HBounded((0, 1, 3))],
)
def test_certificate_json_round_trip(cert):
    assert certificate_from_json(certificate_to_json(cert)) == cert
