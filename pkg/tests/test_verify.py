from fractions import Fraction as F

import pytest

from uchains.chains import DIRECT, INTERLEAVED, Chain, build_chain
from uchains.ordinal import ordinal, parse_ordinal
from uchains.qreal import DescendingLadder, canonical_wo_set, parse_real
from uchains.verify import (
    OrderingViolationError, ProbePlan, decompose_layers, default_plan, landmarks, verify_chain,
)

W = parse_ordinal


def test_default_plan_shape():
    plan = default_plan(W("w*2"))
    assert len(plan) >= 50
    assert len(plan.windows) == len(plan.reals)
    assert any(isinstance(b, DescendingLadder) for z in plan.reals for b in z.blocks)
    assert canonical_wo_set(W("w*2"), (0, 1)) in plan.reals
    assert default_plan(W("w*2")) == plan
    assert default_plan(W("w*2"), seed=1) != plan


def test_landmarks_reach_past_mu():
    marks = landmarks(W("w+3"))
    assert W("w+3") in marks and W("w+5") in marks and ordinal(0) in marks
    assert marks == sorted(marks)


def test_plan_windows_must_match():
    with pytest.raises(ValueError):
        ProbePlan((parse_real("empty"),), ())


def test_direct_chain_of_five_passes():
    rep = verify_chain(build_chain(5, DIRECT), default_plan(5))
    assert rep.all_pass
    assert len(rep.pair_verdicts) == 10
    assert rep.to_json()["oracle_agreement"]["agreed"] == rep.oracle_checked


def test_duplicate_element_is_caught():
    ch = Chain(ordinal(5), DIRECT)
    ch._cache[ordinal(3)] = ch.at(2)
    rep = verify_chain(ch, default_plan(5))
    assert not rep.ordering_ok and not rep.all_pass
    bad = rep.ordering_failures
    assert ["2", "3"] in [v[:2] for v in bad]
    assert all("probe" in v[3] for v in bad)


def test_interleaved_chain_passes():
    rep = verify_chain(build_chain(W("w*2"), INTERLEAVED), default_plan(W("w*2")))
    assert rep.all_pass
    assert len(rep.pair_verdicts) >= 500
    assert rep.uniformity_checked > 0 and rep.projection_checked > 0


def test_report_is_deterministic():
    a = verify_chain(build_chain(W("w+3"), INTERLEAVED), default_plan(W("w+3"), seed=4)).dumps()
    b = verify_chain(build_chain(W("w+3"), INTERLEAVED), default_plan(W("w+3"), seed=4)).dumps()
    assert a == b


def test_two_layers_on_a_finite_set():
    x = parse_real("fin{0,1,2}")
    dec = decompose_layers(build_chain(2, DIRECT), ProbePlan((x,), ((F(0),),)))
    assert dec.ok
    assert dec.value(0, 0) == 0 and dec.value(1, 0) == 1
    assert dec.mu_x == [2]


def test_empty_plan_has_no_layers():
    dec = decompose_layers(build_chain(W("w"), INTERLEAVED), ProbePlan.empty())
    assert dec.layers == [] and dec.ok


def test_layers_on_canonical_probes():
    ch = build_chain(W("w"), DIRECT)
    plan = default_plan(W("w"))
    dec = decompose_layers(ch, plan)
    assert dec.ok
    k = plan.reals.index(canonical_wo_set(2, (0, 1)))
    assert dec.mu_x[k] == 2
    for i in range(1, len(dec.layers)):
        assert set(dec.layers[i]) <= set(dec.layers[i - 1])


def test_out_of_order_values_raise():
    ch = Chain(ordinal(3), DIRECT)
    ch._cache[ordinal(1)], ch._cache[ordinal(2)] = ch.at(2), ch.at(1)
    with pytest.raises(OrderingViolationError):
        decompose_layers(ch, ProbePlan((parse_real("fin{0,1,2}"),), ((F(0),),)))
