import pytest
from hypothesis import given, settings, strategies as st

from uchains.ordinal import (
    OMEGA, ONE, ZERO, ChainPosition, Cmp, EmptyDomainError, InsufficientEnumerationError,
    InvalidOrdinalError, LengthAudit, add, compare, enumerate_below, enumeration_index,
    fold_sum, format_ordinal, interleaved_length, iter_below, left_subtract, normalize,
    omega_power, ordinal, parse_ordinal,
)

from strategies import ordinals, small_ordinals

W = parse_ordinal


# Ordinals below w^w as coefficient tuples (c_0, c_1, ...) for w^i; an
# independent reference for comparison and addition.

def poly(a):
    coeffs = [0] * 4
    for e, k in a.terms:
        coeffs[int(e)] = k
    return coeffs


def poly_lt(p, q):
    return p[::-1] < q[::-1]


def poly_add(p, q):
    deg = max((i for i, c in enumerate(q) if c), default=-1)
    if deg < 0:
        return list(p)
    out = [0] * 4
    for i in range(deg + 1, 4):
        out[i] = p[i]
    out[deg] = p[deg] + q[deg]
    for i in range(deg):
        out[i] = q[i]
    return out


def test_normalize_examples():
    assert normalize([]) == ZERO
    assert normalize([(0, 3), (0, 2)]) == 5
    assert normalize([(0, 2), (1, 3)]) == W("w*3")


def test_normalize_rejects_negative():
    with pytest.raises(InvalidOrdinalError):
        normalize([(0, -1)])


def test_compare_examples():
    assert compare(OMEGA, 5) is Cmp.GT
    assert compare(W("w^2+w"), W("w^2+1")) is Cmp.GT
    assert compare(W("w*3"), W("w*3")) is Cmp.EQ


def test_add_examples():
    assert add(1, OMEGA) == OMEGA
    assert add(OMEGA, 1) == W("w+1")
    assert add(W("w+2"), W("w*3")) == W("w*4")


@pytest.mark.parametrize("text", ["0", "5", "w", "w*3", "w^2*3+w+5", "w^{w+1}", "w^{w^2*2+1}*3+w^w+7"])
def test_format_parse_inverse(text):
    assert format_ordinal(W(text)) == text


def test_parser_accepts_variants():
    assert W("ω^2 * 3 + ω + 5") == W("w^2*3+w+5")
    assert W("w^(w+1)") == W("w^{w+1}")
    assert W("3+w") == OMEGA


@pytest.mark.parametrize("bad", ["", "w^", "w*0x", "(w", "w+*2", "-1"])
def test_parser_rejects(bad):
    with pytest.raises(InvalidOrdinalError):
        W(bad)


@given(small_ordinals, small_ordinals)
def test_compare_matches_polynomial_reference(a, b):
    assert (a < b) == poly_lt(poly(a), poly(b))
    assert (a == b) == (poly(a) == poly(b))


@given(small_ordinals, small_ordinals)
def test_add_matches_polynomial_reference(a, b):
    assert poly(add(a, b)) == poly_add(poly(a), poly(b))


@given(ordinals, ordinals, ordinals)
def test_order_and_addition_laws(a, b, c):
    assert add(add(a, b), c) == add(a, add(b, c))
    assert add(a, ZERO) == a == add(ZERO, a)
    if b < c:
        assert add(a, b) < add(a, c)
    if a < b and b < c:
        assert a < c
    assert (a < b) + (a == b) + (b < a) == 1


@given(ordinals, ordinals)
def test_left_subtract_inverts_add(a, b):
    assert left_subtract(a, add(a, b)) == b


@given(ordinals)
def test_format_round_trip(a):
    assert W(format_ordinal(a)) == a


@given(st.lists(st.tuples(small_ordinals, st.integers(0, 4)), max_size=5))
def test_normalize_idempotent(raw):
    n = normalize(raw)
    assert normalize(n.terms) == n


@given(ordinals.filter(lambda a: a.is_limit))
def test_fundamental_sequences_increase_to_limit(a):
    seq = [a.fundamental(k) for k in range(5)]
    assert all(x < y for x, y in zip(seq, seq[1:]))
    assert all(x < a for x in seq)


def test_enumerate_below_examples():
    assert enumerate_below(OMEGA, 5) == [0, 1, 2, 3, 4]
    assert enumerate_below(W("w*2"), 6) == [0, OMEGA, 1, W("w+1"), 2, W("w+2")]
    assert enumerate_below(5, 10) == [0, 1, 2, 3, 4]


def test_enumerate_below_zero_is_empty_domain():
    with pytest.raises(EmptyDomainError):
        enumerate_below(0, 3)


@pytest.mark.parametrize("mu, n", [("w*2", 200), ("w^2+w*3+2", 600), ("w^3", 500), ("w^w", 400)])
def test_enumeration_injective_and_below(mu, n):
    seq = enumerate_below(W(mu), n)
    assert len(set(seq)) == len(seq)
    assert all(x < W(mu) for x in seq)
    assert enumerate_below(W(mu), n) == seq


@pytest.mark.parametrize("mu, targets", [
    ("w^2+w*3+2", ["0", "w^2", "w^2+w*3+1", "w*5+7", "w^2+w*2"]),
    ("w^3", ["w^2*2+w+1", "w^2"]),
    ("w^w", ["w^3", "w^2*2+5"]),
])
def test_enumeration_reaches_targets(mu, targets):
    for t in targets:
        i = enumeration_index(W(mu), W(t), limit=200_000)
        assert enumerate_below(W(mu), i + 1)[i] == W(t)


def test_finite_enumeration_is_a_bijection():
    assert sorted(iter_below(7)) == list(range(7))


def test_interleaved_length_examples():
    audit = interleaved_length([0, 0, 0], 3)
    assert [str(audit.locate(p)) for p in range(3)] == ["U@0", "U@1", "U@2"]
    audit = interleaved_length([1, 1], 4)
    assert [str(audit.locate(p)) for p in range(4)] == ["U@0", "inserted(0)@0", "U@1", "inserted(0)@1"]
    audit = interleaved_length([OMEGA], OMEGA)
    assert audit.locate(0) == ChainPosition(0)
    assert audit.locate(5) == ChainPosition(0, ordinal(4))
    assert audit.partial_sums == (OMEGA,)


def test_interleaved_length_unreachable():
    with pytest.raises(InsufficientEnumerationError):
        interleaved_length([0, 1], OMEGA)


@given(st.lists(small_ordinals, min_size=1, max_size=6))
def test_partial_sums_are_a_left_fold(nus):
    total = fold_sum([add(ONE, n) for n in nus])
    audit = interleaved_length(nus, total)
    running = ZERO
    for nu, s in zip(audit.nus, audit.partial_sums):
        running = add(running, add(ONE, nu))
        assert s == running
    assert audit.partial_sums[-1] == total


@settings(max_examples=40)
@given(st.lists(st.integers(0, 4), min_size=1, max_size=5))
def test_position_map_is_bijective_on_finite_sums(nus):
    total = fold_sum([1 + n for n in nus])
    audit = interleaved_length(nus, total)
    sources = [audit.locate(p) for p in range(int(total))]
    assert len(set(sources)) == int(total)
    assert [audit.position_of(s) for s in sources] == [ordinal(p) for p in range(int(total))]


def test_lazy_audit_pads_with_empty_insertions():
    audit = LengthAudit(5, iter_below(5), pad_zeros=True)
    assert [str(audit.locate(p)) for p in range(5)] == [
        "U@0", "U@1", "inserted(0)@1", "U@2", "inserted(0)@2"]
    assert audit.pre_cut_total == 6


def test_omega_power_and_structure():
    a = W("w^2*2+w+3")
    assert a.finite_part == 3 and a.limit_part == W("w^2*2+w")
    assert a.is_successor and a.predecessor() == W("w^2*2+w+2")
    assert omega_power(2, 2) == W("w^2*2")
    assert W("w*5+2").divmod_omega() == (5, 2)


def test_audit_json_ignores_earlier_lookups():
    a = LengthAudit(parse_ordinal("w*2"), iter_below(parse_ordinal("w")))
    b = LengthAudit(parse_ordinal("w*2"), iter_below(parse_ordinal("w")))
    b.nu(40)
    assert a.to_json(8) == b.to_json(8)
    assert len(a.to_json(8)["nus"]) == 8
