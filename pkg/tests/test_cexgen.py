import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from helpers import random_adversary
from oracles import all_satisfying_paths
from pomdp_cegar.cexgen import default_tie_key, extract_counterexample, induce_dtmc, satisfying_paths
from pomdp_cegar.checker import model_check
from pomdp_cegar.errors import Exhausted, MissingAdversaryEntry
from pomdp_cegar.generators import random_waz
from pomdp_cegar.logic import BoundedUntilSpec, parse_spec
from pomdp_cegar.models import ObservationAdversary, corresponding_waz, parity_chain, path_probability

SPEC = parse_spec('P<=1 [ true U<=3 "goal" ]')


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_order_matches_exhaustive_enumeration(seed):
    rng = random.Random(seed)
    w = random_waz(rng)
    adv = random_adversary(rng, w, 3)
    got = list(satisfying_paths(induce_dtmc(w, adv, 3), SPEC))
    probs = [p for _, p in got]
    assert probs == sorted(probs, reverse=True)
    expect = sorted(((s, a), p) for s, a, p in all_satisfying_paths(w, SPEC, adv))
    assert sorted(((path.states, path.actions), p) for path, p in got) == expect
    for path, p in got:
        assert path_probability(w, path) == p


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_counterexample_is_a_minimal_prefix(seed):
    rng = random.Random(seed)
    w = random_waz(rng)
    adv = random_adversary(rng, w, 3)
    total = sum((p for _, _, p in all_satisfying_paths(w, SPEC, adv)), Fraction(0))
    if total == 0:
        return
    spec = BoundedUntilSpec("<", min(total, 1) / 2, 3, SPEC.phi1, SPEC.phi2)
    cex = extract_counterexample(induce_dtmc(w, adv, 3), spec)
    assert spec.violated_by(cex.total)
    assert not spec.violated_by(cex.total - cex.paths[-1][1])
    assert cex.total == sum(p for _, p in cex.paths)


def test_ties_follow_length_then_declaration_order():
    w = corresponding_waz(parity_chain(2))
    adv = ObservationAdversary({}, 3, default="a")
    spec = parse_spec('P<=1 [ true U<=3 "fail" ]')
    got = list(satisfying_paths(induce_dtmc(w, adv, 3), spec))
    key = default_tie_key(w)
    for (p1, q1), (p2, q2) in zip(got, got[1:]):
        assert q1 > q2 or (q1 == q2 and key(p1) < key(p2))


def test_first_quotient_counterexample(m0, spec20):
    verdict = model_check(m0, spec20)
    cex = extract_counterexample(induce_dtmc(m0, verdict.witness, 20), spec20)
    assert [str(p) for p, _ in cex.paths] == ["t0 -a-> t3", "t0 -a-> t1 -a-> t3"]
    assert [q for _, q in cex.paths] == [Fraction(1, 4), Fraction(19, 80)]
    assert cex.total == Fraction(39, 80)


def test_exhausted_when_threshold_cannot_be_broken():
    w = corresponding_waz(parity_chain(2))
    spec = parse_spec('P<=0.45 [ true U<=2 "fail" ]')
    with pytest.raises(Exhausted):
        extract_counterexample(induce_dtmc(w, ObservationAdversary({}, 2, default="a"), 2), spec)


def test_unrolling_nodes_and_missing_entries():
    w = corresponding_waz(parity_chain(2))
    u = induce_dtmc(w, ObservationAdversary({("init",): "a"}, 2), 2)
    layer1 = [n for n in u.nodes(1) if n.depth == 1]
    assert sum(n.prob for n in layer1) == 1
    with pytest.raises(MissingAdversaryEntry):
        list(u.nodes())
