from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from uchains.ordinal import OMEGA, ZERO, add, omega_power, ordinal, parse_ordinal
from uchains.qreal import (
    ALL_RATIONALS, EMPTY_SET, EXCEEDS_BUDGET, AscendingLadder, BinaryExpansion,
    DescendingLadder, FinitePoints, InvalidIntervalError, SymbolicReal,
    UnresolvableDigitError, canonical_wo_set, decode_sieve, encode_real, format_rat,
    index_of, initial_segment, parse_real, rat, rat_of_index, well_ordered_part,
)

from strategies import (
    early_rationals, finite_reals, intervals, rationals, small_ordinals, symbolic_reals,
)

W = parse_ordinal


def test_enumeration_is_a_bijection_on_a_prefix():
    seen = set()
    for n in range(10_000):
        q = rat_of_index(n)
        assert q not in seen
        seen.add(q)
        assert index_of(q) == n
    assert rat_of_index(0) == 0
    assert index_of(rat_of_index(17)) == 17


@given(rationals)
def test_index_round_trip(q):
    assert rat_of_index(index_of(q)) == q


def test_rat_rejects_floats():
    with pytest.raises(TypeError):
        rat(0.5)
    assert rat("3/6") == F(1, 2)
    assert format_rat(F(2)) == "2/1"


def test_sieve_fixed_values():
    assert encode_real(EMPTY_SET).exact == F(2, 3)
    assert encode_real(ALL_RATIONALS).exact == 0
    # 0.101010...: partial sums of 2^-(2n+1) approach 2/3 from below
    partial = sum(F(1, 2 ** (2 * n + 1)) for n in range(30))
    assert 0 < F(2, 3) - partial < F(1, 2 ** 60)
    assert encode_real(EMPTY_SET).digits(10) == "1010101010"


def test_decode_examples():
    x = encode_real(parse_real("fin{0,1}"))
    assert decode_sieve(x, 1) and decode_sieve(x, 0)
    assert not decode_sieve(x, F(1, 2))
    assert not decode_sieve(encode_real(EMPTY_SET), F(7, 3))


@given(finite_reals(early_rationals), st.lists(rationals, min_size=1, max_size=10))
def test_finite_round_trip_through_exact_value(z, probes):
    x = encode_real(z)
    value = x.exact
    for r in probes + [q for b in z.blocks for q in b.points]:
        assert decode_sieve(value, r) == z.contains(r)
        assert decode_sieve(x, r) == z.contains(r)


@settings(max_examples=50)
@given(symbolic_reals(), st.lists(rationals, min_size=1, max_size=10))
def test_stream_round_trip(z, probes):
    x = encode_real(z)
    for r in probes:
        assert decode_sieve(x, r) == z.contains(r)
        assert x.digit(2 * index_of(r) + 2) == 0


@given(finite_reals(early_rationals), rationals)
def test_sparse_comparison_matches_exact(z, p):
    x = encode_real(z)
    v = x.exact
    for q in (p / 100, v, v + F(1, 2 ** 70), v - F(1, 2 ** 70)):
        assert x.compare(q) == (v > q) - (v < q)


def test_sparse_comparison_far_in_the_enumeration():
    z = parse_real("fin{60,-1/60}")
    x = encode_real(z)
    assert decode_sieve(x, 60) and not decode_sieve(x, 59)
    assert x.compare(F(2, 3)) == -1 and x.compare(F(1, 2)) == 1


def test_stream_compare_and_unresolvable():
    z = parse_real("asc(0,1)")
    x = encode_real(z)
    assert x.compare(F(-1)) == 1 and x.compare(F(1)) == -1
    stuck = BinaryExpansion(digit_fn=lambda pos: None)
    with pytest.raises(UnresolvableDigitError):
        stuck.digit(3)


def test_initial_segment_examples():
    rep = initial_segment(parse_real("fin{0,1,2}"))
    assert rep.order_type == 3 and rep.element_at(1) == 1
    rep = initial_segment(parse_real("asc(0,1)+fin{2}"))
    assert rep.order_type == add(OMEGA, 1) and rep.element_at(OMEGA) == 2
    rep = initial_segment(parse_real("asc(0,1)+desc(2,3)"))
    assert rep.order_type == OMEGA


@pytest.mark.parametrize("mu", ["0", "3", "w", "w+1", "w*2+5", "w^2", "w^2*3+w+1", "w^w+w*2+1", "w^{w+1}*2+w^3"])
def test_canonical_sets_have_their_type(mu):
    z = canonical_wo_set(W(mu), (0, 1))
    assert initial_segment(z).order_type == W(mu)
    assert initial_segment(z, budget=add(W(mu), 1)).order_type == W(mu)
    assert initial_segment(z, budget=W(mu)).order_type is EXCEEDS_BUDGET or W(mu) == 0


def test_canonical_set_errors_and_empty():
    assert canonical_wo_set(0, (1, 1)) == EMPTY_SET
    with pytest.raises(InvalidIntervalError):
        canonical_wo_set(3, (1, 1))


@settings(max_examples=60)
@given(small_ordinals, small_ordinals)
def test_concatenation_measures_the_sum(a, b):
    z = canonical_wo_set(a, (0, 1)) + canonical_wo_set(b, (1, 2))
    assert initial_segment(z).order_type == add(a, b)


@settings(max_examples=60)
@given(small_ordinals, small_ordinals, intervals())
def test_overlapping_canonical_sets(a, b, iv):
    # two overlapping copies: the union is well-ordered of type at least max(a, b)
    z = canonical_wo_set(a, (0, 1)) + canonical_wo_set(b, iv)
    t = initial_segment(z).order_type
    assert not t < max(a, b)


def _reference_type(z: SymbolicReal):
    """Order type of W for unions of points and ladders, as w*L + m, computed directly."""
    descs = [b.limit for b in z.blocks if isinstance(b, DescendingLadder)]
    cut = min(descs) if descs else None
    limits, partial = set(), set()
    for b in z.blocks:
        if isinstance(b, FinitePoints):
            partial.update(q for q in b.points if cut is None or q <= cut)
        elif isinstance(b, AscendingLadder):
            if cut is None or b.limit <= cut:
                limits.add(b.limit)
            else:
                k = 0
                while True:
                    q = b.limit - (b.limit - b.start) / (k + 1)
                    if q > cut:
                        break
                    partial.add(q)
                    k += 1
    if not limits:
        return ordinal(len(partial)), sorted(partial)
    top = max(limits)
    m = len([q for q in partial if q >= top])
    return add(omega_power(1, len(limits)), ordinal(m)), None


@st.composite
def ladder_reals(draw):
    bs = []
    for _ in range(draw(st.integers(1, 4))):
        kind = draw(st.sampled_from(["fin", "asc", "desc"]))
        a, b = draw(intervals())
        if kind == "fin":
            bs.append(FinitePoints(tuple(draw(st.lists(rationals, min_size=1, max_size=4)))))
        elif kind == "asc":
            bs.append(AscendingLadder(a, b))
        else:
            bs.append(DescendingLadder(a, b))
    return SymbolicReal(tuple(bs))


@settings(max_examples=150)
@given(ladder_reals())
def test_order_type_matches_reference(z):
    expected, finite = _reference_type(z)
    rep = initial_segment(z)
    assert rep.order_type == expected
    if finite is not None:
        assert [rep.element_at(i) for i in range(len(finite))] == finite


@settings(max_examples=80)
@given(symbolic_reals())
def test_element_at_increasing_and_positions(z):
    w = well_ordered_part(z)
    t = w.order_type
    probes = [ordinal(k) for k in range(4)] + [OMEGA, add(OMEGA, 1), W("w*2"), W("w^2")]
    prev = None
    for xi in sorted(p for p in probes if p < t):
        q = w.element_at(xi)
        assert z.contains(q) and w.contains(q)
        assert w.position(q) == xi
        if prev is not None:
            assert prev < q
        prev = q
    for xi in probes:
        if not xi < t:
            assert w.element_at(xi) is None


@given(finite_reals())
def test_removing_the_greatest_point(z):
    if z.complement or not z.blocks:
        return
    pts = z.finite_points()
    smaller = SymbolicReal((FinitePoints(tuple(pts[:-1])),)) if len(pts) > 1 else EMPTY_SET
    assert initial_segment(smaller).order_type == len(pts) - 1
    assert initial_segment(z).order_type == len(pts)


def test_overlapping_union_example():
    z = parse_real("asc(0,1)+wo(w^2,(0,1))+fin{1/2,3/4,1}+asc(1/2,1)")
    rep = initial_segment(z)
    assert rep.order_type == W("w^2+1")
    assert rep.element_at(W("w^2")) == 1


def test_complement_has_empty_well_ordered_part():
    assert initial_segment(ALL_RATIONALS).order_type == ZERO
    z = parse_real("co(fin{0})")
    assert not z.contains(0) and z.contains(F(1, 3))
    assert z.some_between(F(0), F(1)) is not None


@given(symbolic_reals(), rationals, rationals)
def test_some_between_finds_members(z, p, r):
    q = z.some_between(p, r)
    if q is not None:
        assert p < q < r and z.contains(q)
    else:
        for k in range(1, 20):
            assert not z.contains(p + (r - p) * F(k, 20)) or not p < r


@given(symbolic_reals())
def test_expression_and_json_round_trip(z):
    assert parse_real(z.to_expr()) == z
    assert SymbolicReal.from_json(z.to_json()) == z


def test_parse_real_forms():
    assert parse_real("empty") == EMPTY_SET
    assert parse_real("Q") == ALL_RATIONALS
    z = parse_real("desc(1,2)")
    assert z.contains(2) and z.contains(F(3, 2)) and not z.contains(1)
