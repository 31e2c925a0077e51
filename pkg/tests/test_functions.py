from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from weakcomp.core import IndexedSequence, constant_name, perturbed_name, pow2
from weakcomp.functions import (
    BudgetViolation,
    CoverNotFound,
    FunctionClass,
    Mode,
    PolygonSequence,
    StreamTransformer,
    classify_constant,
    lsc_to_machine,
    machine_to_lsc,
    machine_to_lsc_sequence,
    machine_to_uwc_polyseq,
    max_of_lsc,
    usc_to_machine,
    uwc_polyseq_to_machine,
    wc_from_difference,
    wc_machine_to_difference,
)
from weakcomp.polygons import Polygon, sup_distance
from weakcomp.sequences import (
    CertifiedSequence,
    Decreasing,
    Effective,
    Increasing,
    Plain,
    WeaklyEffective,
    monotone_envelope,
)

HALF = Fraction(1, 2)
unit = st.fractions(0, 1, max_denominator=1000)


def variation(values):
    return sum((abs(b - a) for a, b in zip(values, values[1:])), Fraction(0))


def stream_machine(values, usage=lambda n: 0):
    """Machine ignoring its input and replaying ``values`` (repeating the last)."""
    seq = IndexedSequence.from_values(values)
    return StreamTransformer(lambda inputs, n: seq.prefix(n), usage)


# lsc_to_machine ---------------------------------------------------------------


def test_lsc_machine_on_scaled_identity():
    ps = PolygonSequence.scaled_identity()
    m = lsc_to_machine(ps)
    y = IndexedSequence(lambda s: HALF - 3 * pow2(-(s + 1)))
    assert m.run(constant_name(HALF), 20) == monotone_envelope(y).prefix(20)
    for n in range(1, 10):
        assert m.usage(n) == ps[n - 1].modulus_index(n - 1) + 1


def test_lsc_machine_on_zero():
    z = lsc_to_machine(PolygonSequence.zero()).run(perturbed_name(Fraction(1, 3)), 12)
    assert z == [-pow2(-s) for s in range(12)]


def test_lsc_machine_requires_increasing_mode():
    with pytest.raises(ValueError):
        lsc_to_machine(PolygonSequence.uniform_ramp())


def test_machine_reads_only_its_usage():
    m = lsc_to_machine(PolygonSequence.tent_growth())
    with pytest.raises(ValueError):
        m.outputs([HALF] * (m.usage(5) - 1), 5)
    inputs = [HALF] * m.usage(5)
    assert m.outputs(inputs, 5) == m.outputs(inputs + [Fraction(9)] * 10, 5)


@settings(max_examples=40, deadline=None)
@given(unit, st.sampled_from([1, -1]), st.sampled_from(["tent", "identity", "ramp"]))
def test_lower_bound_soundness(x, sign, which):
    ps = {
        "tent": PolygonSequence.tent_growth(),
        "identity": PolygonSequence.scaled_identity(3),
        "ramp": PolygonSequence(lambda n: Polygon([(0, 0), (HALF, 1 - pow2(-n)), (1, 2)]), Mode.INCREASING),
    }[which]
    m = lsc_to_machine(ps)
    z = m.run(perturbed_name(x, sign), 25)
    assert all(a <= b for a, b in zip(z, z[1:]))
    assert all(v <= ps[24](x) for v in z)


def test_usc_machine_gives_decreasing_upper_bounds():
    ps = PolygonSequence.tent_growth().negate()
    z = usc_to_machine(ps).run(constant_name(Fraction(1, 4)), 15)
    assert all(a >= b for a, b in zip(z, z[1:]))
    assert all(v >= ps[14](Fraction(1, 4)) for v in z)


# machine_to_lsc ---------------------------------------------------------------


def test_reconstruct_zero_stage_three():
    pg = machine_to_lsc(lsc_to_machine(PolygonSequence.zero()), 3, grid_limit=10)
    for k in range(257):
        assert -pow2(-3) <= pg(Fraction(k, 256)) <= 0


def test_instant_machine_is_covered_at_level_zero():
    m = StreamTransformer(lambda inputs, n: [inputs[0]] * n if n else [], lambda n: 1 if n else 0)
    pg = machine_to_lsc(m, 2, grid_limit=0)
    assert pg == Polygon([(0, 0), (1, 1)])


def test_reconstruct_identity_round_trip():
    m = lsc_to_machine(PolygonSequence.scaled_identity())
    seq = machine_to_lsc_sequence(m, grid_limit=12)
    assert seq.audit(5)
    for s in range(5):
        for k in range(33):
            assert seq[s](Fraction(k, 32)) <= Fraction(k, 32)


def test_cover_not_found_is_reported():
    m = lsc_to_machine(PolygonSequence.scaled_identity())
    with pytest.raises(CoverNotFound):
        machine_to_lsc(m, 6, grid_limit=3)


# weakly computable ------------------------------------------------------------


def test_wc_difference_with_zero_subtrahend():
    g = PolygonSequence.tent_growth()
    u = wc_from_difference(g, PolygonSequence.zero()).run(constant_name(Fraction(1, 3)), 12)
    y = lsc_to_machine(g).run(constant_name(Fraction(1, 3)), 12)
    # the zero machine's outputs are -2**-s, so they shift the g machine upward
    assert u == [a + pow2(-s) for s, a in enumerate(y)]


def test_wc_difference_of_equal_sequences_vanishes():
    g = PolygonSequence.scaled_identity()
    assert wc_from_difference(g, g).run(perturbed_name(HALF), 20) == [0] * 20


def test_wc_difference_converges_with_bounded_variation():
    g, h = PolygonSequence.scaled_identity(), PolygonSequence.scaled_identity(HALF)
    name = perturbed_name(HALF)
    u = wc_from_difference(g, h).run(name, 50)
    assert abs(u[-1] - Fraction(1, 4)) <= pow2(-40)
    y0, z0 = lsc_to_machine(g).run(name, 1)[0], lsc_to_machine(h).run(name, 1)[0]
    assert variation(u) <= g[49](HALF) + h[49](HALF) - y0 - z0


def test_split_machine_examples():
    y, z = wc_machine_to_difference(stream_machine([Fraction(2, 3)]))
    assert y.outputs([], 4) == [Fraction(2, 3)] * 4 and z.outputs([], 4) == [0] * 4
    y, z = wc_machine_to_difference(stream_machine([1, 0, 1]))
    assert y.outputs([], 2) == [1, 2] and z.outputs([], 2) == [1, 1]


@given(st.lists(st.fractions(-3, 3, max_denominator=8), min_size=1, max_size=15))
def test_split_machine_recreates_the_stream(values):
    m = stream_machine(values)
    y, z = wc_machine_to_difference(m)
    n = len(values) + 2
    u = m.outputs([], n + 1)
    ys, zs = y.outputs([], n), z.outputs([], n)
    assert [a - b for a, b in zip(ys, zs)] == u[1:]
    assert all(a <= b for a, b in zip(ys, ys[1:])) and all(a <= b for a, b in zip(zs, zs[1:]))


# uniformly weakly computable ----------------------------------------------------


def test_uwc_machine_on_constant_sequence():
    pg = Polygon.tent()
    m = uwc_polyseq_to_machine(PolygonSequence.constant(pg, Mode.UNIFORM_WEAKLY_EFFECTIVE))
    for x in (0, Fraction(1, 3), HALF, 1):
        assert variation(m.run(perturbed_name(x), 65)) <= HALF
        assert m.run(constant_name(x), 10) == [pg(x)] * 10


def test_uwc_machine_on_ramp_and_constant_names():
    ps = PolygonSequence.uniform_ramp()
    assert ps.uniform_variation(64) == HALF - pow2(-65)
    m = uwc_polyseq_to_machine(ps)
    for x in (Fraction(1, 5), 1):
        assert variation(m.run(perturbed_name(x, -1), 65)) <= 1
        assert variation(m.run(constant_name(x), 65)) <= ps.uniform_variation(64)


def test_uwc_machine_rejects_overspent_sequences():
    ps = PolygonSequence(lambda n: Polygon.constant(n), Mode.UNIFORM_WEAKLY_EFFECTIVE, budget=100)
    m = uwc_polyseq_to_machine(ps)
    with pytest.raises(BudgetViolation):
        m.run(constant_name(0), 3)


def test_uwc_round_trip_on_constant_sequence():
    pg = Polygon.tent(HALF)
    m = uwc_polyseq_to_machine(PolygonSequence.constant(pg, Mode.UNIFORM_WEAKLY_EFFECTIVE))
    ps = machine_to_uwc_polyseq(m, grid_limit=12)
    grid = [Fraction(k, 256) for k in range(257)]
    for s in range(5):
        assert all(abs(ps[s](x) - pg(x)) <= pow2(-s) for x in grid)
    assert ps.uniform_variation(4) <= 4


def test_uwc_recovery_of_trivial_machine():
    ps = machine_to_uwc_polyseq(stream_machine([0]), grid_limit=2)
    assert all(ps[s] == Polygon.constant(0) for s in range(8))
    assert ps.uniform_variation(7) == 0


# propositions ---------------------------------------------------------------------


def test_max_of_lsc_examples():
    assert max_of_lsc(PolygonSequence.tent_growth()).seq.prefix(4) == [0, HALF, Fraction(3, 4), Fraction(7, 8)]
    const = max_of_lsc(PolygonSequence.constant(Polygon.tent(Fraction(2, 3))))
    assert const.seq.prefix(3) == [Fraction(2, 3)] * 3
    ident = max_of_lsc(PolygonSequence.scaled_identity())
    assert ident.seq(5) == 1 - pow2(-5) and ident.audit(30)


@pytest.mark.parametrize(
    "cert, tag",
    [
        (Increasing(), FunctionClass.LSC),
        (Effective(), FunctionClass.COMPUTABLE),
        (Decreasing(), FunctionClass.USC),
        (WeaklyEffective(1), FunctionClass.WC),
    ],
)
def test_classify_constant(cert, tag):
    assert classify_constant(CertifiedSequence(IndexedSequence.constant(0), cert)) is tag


def test_classify_plain_is_an_error():
    with pytest.raises(ValueError):
        classify_constant(CertifiedSequence(IndexedSequence.constant(0), Plain()))


def test_class_order():
    fc = FunctionClass
    assert fc.COMPUTABLE.within(fc.LSC) and fc.COMPUTABLE.within(fc.USC)
    assert fc.LSC.within(fc.SC) and fc.USC.within(fc.SC) and fc.SC.within(fc.WC)
    assert fc.UWC.within(fc.WC)
    assert not fc.WC.within(fc.SC) and not fc.LSC.within(fc.USC)


# polygon sequences -----------------------------------------------------------------


def test_polygon_sequence_audits():
    assert PolygonSequence.tent_growth().audit(10)
    bad = PolygonSequence.from_polygons([Polygon.tent(), Polygon.tent(HALF)], Mode.INCREASING)
    report = bad.audit(3)
    assert not report and report.violation_index == 1
    assert PolygonSequence.damped_oscillation().audit(30)
    effective = PolygonSequence(lambda n: Polygon.identity().scale(pow2(-n)), Mode.UNIFORMLY_EFFECTIVE)
    assert effective.audit(8)


def test_polygon_sequence_json_round_trip():
    ps = PolygonSequence.uniform_ramp()
    back = PolygonSequence.from_json(ps.to_json(4))
    assert back.mode is Mode.UNIFORM_WEAKLY_EFFECTIVE and back.budget == HALF
    assert back.prefix(6) == ps.prefix(4) + [ps[3]] * 2
    assert sup_distance(back[3], ps[3]) == 0
