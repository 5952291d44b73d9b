import json
import subprocess
import sys
from fractions import Fraction as F
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from uchains.borelcode import (
    EMPTY, FULL, BorelMultiCode, CodeParseError, DigitCells, Family, InvalidCodeError, Leaf,
    RationalsBelow, Ref, Union, Var, code_from_json, code_to_json, conj, deserialize,
    eval_code, eval_multicode, expand, materialize, neg, rank, serialize,
)
from uchains.chains import build_D, build_U, sieve_code
from uchains.ordinal import OMEGA, ordinal, parse_ordinal
from uchains.qreal import EMPTY_SET, decode_sieve, encode_real, parse_real

from strategies import codes, early_rationals, evaluable, finite_reals, rationals, symbolic_reals

FIXTURE = Path(__file__).parent / "fixtures" / "u0_multicode.json"
W = parse_ordinal


def test_trivial_codes():
    x = parse_real("fin{0,1,2}")
    assert eval_code(FULL, x)
    assert not eval_code(EMPTY, x)
    assert eval_code(FULL, EMPTY_SET) and not eval_code(EMPTY, EMPTY_SET)


def test_d0_contains_a_singleton():
    assert eval_code(build_D(0), parse_real("fin{0}"))
    assert not eval_code(build_D(0), EMPTY_SET)


def test_u0_multicode_examples():
    mc = build_U(0).multicode
    x = parse_real("fin{0,1,2}")
    assert eval_multicode(mc, x, 0)
    assert not eval_multicode(mc, x, 1)


def test_cached_full_section():
    mc = BorelMultiCode("U", {"xi": ordinal(0)}, {F(7): FULL})
    assert eval_multicode(mc, EMPTY_SET, 7)
    assert mc.section(8) == Ref("U", {"xi": ordinal(0), "r": F(8)})


def test_leaf_intervals():
    # the value of {0} is 2/3 - 1/2 = 1/6
    x = parse_real("fin{0}")
    assert encode_real(x).exact == F(1, 6)
    assert not eval_code(Leaf(((0, F(1, 3)),)), x)
    assert eval_code(Leaf(((F(1, 3), 1),)), x)
    # p >= q is allowed and removes nothing
    assert eval_code(Leaf(((1, 0), (F(1, 6), F(1, 6)))), x)
    # open intervals: the endpoint itself survives
    assert eval_code(Leaf(((0, F(1, 6)),)), x)


@settings(max_examples=60)
@given(evaluable, symbolic_reals())
def test_de_morgan(code, x):
    assert eval_code(neg(code), x) == (not eval_code(code, x))


@settings(max_examples=40)
@given(st.lists(evaluable, min_size=1, max_size=3), symbolic_reals())
def test_conj_is_intersection(cs, x):
    assert eval_code(conj(*cs), x) == all(eval_code(c, x) for c in cs)


@settings(max_examples=60)
@given(symbolic_reals(), rationals)
def test_sieve_code_decodes(z, r):
    assert eval_code(sieve_code(r), z) == z.contains(r) == decode_sieve(encode_real(z), r)


@given(finite_reals(early_rationals), st.integers(1, 7), st.integers(0, 1), st.data())
def test_cell_code_is_a_dyadic_interval(z, k, d, data):
    j = data.draw(st.integers(0, (1 << (k - 1)) - 1))
    v = encode_real(z).exact
    lo = F(2 * j + d, 1 << k)
    assert eval_code(Ref("cell", {"k": k, "d": d, "j": j}), z) == (lo <= v < lo + F(1, 1 << k))


def test_rank_examples():
    assert rank(FULL) == 0
    assert rank(Union((FULL, Leaf(((0, 1),))))) == 1
    assert rank(EMPTY) == 1


def test_rank_of_u_grows_with_xi():
    xis = [W(s) for s in ["0", "1", "2", "3", "w", "w+1", "w+2", "w*2", "w*2+1", "w^2", "w^2+w"]]
    ranks = [rank(build_U(xi).multicode.section(0)) for xi in xis]
    assert all(not r < xi for r, xi in zip(ranks, xis))
    assert all(a < b for a, b in zip(ranks, ranks[1:]))


def test_rank_decreases_along_expansions():
    code = materialize(build_U(OMEGA).multicode.section(F(1, 2)), depth=2)
    top = rank(code)
    for child in code.children:
        assert rank(child) < top


def test_invalid_codes():
    with pytest.raises(InvalidCodeError):
        Family(RationalsBelow(F(0)), Leaf(()))
    with pytest.raises(InvalidCodeError):
        eval_code(Ref("no-such-code", {}), EMPTY_SET)
    with pytest.raises(InvalidCodeError):
        eval_code(Family("not a kind", Ref("G", {"r": Var("i")})), EMPTY_SET)
    with pytest.raises(InvalidCodeError):
        expand(Ref("G", {"r": Var("i")}))
    with pytest.raises(InvalidCodeError):
        eval_code(Family(RationalsBelow(F(0)), Ref("D", {"xi": Var("i")})), parse_real("asc(0,1)"))


def test_digit_cells_index_range():
    kind = DigitCells(3, 1)
    assert kind.admits({"j": 3}) and not kind.admits({"j": 4})


@settings(max_examples=500)
@given(codes)
def test_serialization_round_trip(code):
    data = serialize(code)
    assert deserialize(data) == code
    assert serialize(deserialize(data)) == data
    assert code_from_json(json.loads(data)) == code


@settings(max_examples=100)
@given(codes, codes)
def test_serialization_is_injective(a, b):
    assert (serialize(a) == serialize(b)) == (a == b)


def test_multicode_round_trip():
    mc = build_U(W("w+1")).multicode.with_cache([0, F(1, 2)])
    assert deserialize(serialize(mc)) == mc


def test_golden_fixture():
    mc = build_U(0).multicode.with_cache([-1, 0, F(1, 2), 1])
    assert serialize(mc) == FIXTURE.read_bytes()


def test_serialization_is_stable_across_processes():
    script = ("from fractions import Fraction as F;import sys;from uchains.chains import build_U;"
              "from uchains.borelcode import serialize;"
              "sys.stdout.buffer.write(serialize(build_U(0).multicode.with_cache([-1,0,F(1,2),1])))")
    out = subprocess.run([sys.executable, "-c", script], capture_output=True, check=True).stdout
    assert out == FIXTURE.read_bytes()


@pytest.mark.parametrize("doc, where", [
    ({"union": [{"leaf": [["1/2", "x"]]}]}, "$.union[0].leaf[0][1]"),
    ({"union": [{"leaf": [["2/4", "1/1"]]}]}, "$.union[0].leaf[0][0]"),
    ({"family": {"kind": "digit_cells", "params": {}, "child": {"ref": {"name": "cell"}}}}, "$.family"),
    ({"family": {"kind": "rationals_below", "params": {"bound": None},
                 "child": {"leaf": []}}}, "$.family.child"),
    ({"ref": {"name": "U", "params": {"xi": {"ord": "w^"}}}}, "$.ref.params.xi"),
    ({"ref": {"name": "U", "params": {"xi": {"bogus": 1}}}}, "$.ref.params.xi"),
    ({"leaf": [], "union": []}, "$"),
])
def test_parse_errors_report_position(doc, where):
    with pytest.raises(CodeParseError) as info:
        code_from_json(doc)
    assert info.value.position == where


def test_malformed_bytes():
    with pytest.raises(CodeParseError) as info:
        deserialize(b'{"union": [')
    assert info.value.position == 11
    with pytest.raises(CodeParseError):
        deserialize(b'{"sections": {"ctor": "U", "params": {}}}')
    with pytest.raises(CodeParseError):
        deserialize("{\"leaf\": []}é".encode())


def test_code_json_shape():
    assert code_to_json(Leaf(((0, 1),))) == {"leaf": [["0/1", "1/1"]]}
    assert code_to_json(EMPTY) == {"union": [{"leaf": []}]}
