"""Verdicts, crossing-change targets, and witness plans."""

import pytest

from sgd import codec, decide, invariants as inv, oracle
from sgd.codec import diagrams_equal
from sgd.core import abstract_graph, component_order
from sgd.decide import (
    Impossible,
    WitnessPlan,
    decide_splittable,
    decide_unknottable,
    descending_target,
    is_descending,
    split_target,
    unknot_target,
    witness_splittable,
    witness_unknottable,
)
from sgd.errors import NonPlanarGraph, NotAKnotComponent
from sgd.oracle import verify_witness
from sgd.transform import apply_crossing_changes, apply_region_set


def test_verdict_table(corpus_diagrams):
    v = decide_unknottable(corpus_diagrams["THETA0"])
    assert v.answer and v.reason == "non-eulerian"
    v = decide_unknottable(corpus_diagrams["LINKED_TRIANGLES"])
    assert not v.answer and v.reason == "eulerian-improper"
    v = decide_unknottable(corpus_diagrams["T24"])
    assert v.answer and v.reason == "eulerian-proper"
    with pytest.raises(NonPlanarGraph):
        decide_unknottable(corpus_diagrams["NONPLANAR-K5"])
    v = decide_splittable(corpus_diagrams["NONPLANAR-K5"])
    assert v.answer and v.reason == "eulerian-proper"
    v = decide_splittable(corpus_diagrams["HOPF"])
    assert not v.answer and v.reason == "eulerian-improper"


def test_split_target(corpus_diagrams):
    d = corpus_diagrams["HOPF"]
    t = split_target(d, component_order(abstract_graph(d)))
    assert len(t.change) == 1
    d = corpus_diagrams["UNLINK2X"]
    t = split_target(d, component_order(abstract_graph(d)))
    assert t.change == frozenset({"x1", "x2"})
    d = corpus_diagrams["TREFOIL"]
    t = split_target(d, component_order(abstract_graph(d)))
    assert not t.change and not t.care


def test_split_target_zeroes_warping(corpus_diagrams):
    for seed in range(10):
        d = oracle.random_diagram(seed, "link3")
        order = component_order(abstract_graph(d))
        t = split_target(d, order)
        after = apply_crossing_changes(d, t.change)
        assert inv.warping_matrix(after, order).all_zero()


def test_descending_target(corpus_diagrams):
    d = corpus_diagrams["TREFOIL"]
    t = descending_target(d, "a1")
    assert 1 <= len(t) <= 2
    assert is_descending(apply_crossing_changes(d, t), "a1")
    assert descending_target(corpus_diagrams["UNKNOT0"], "a1") == frozenset()
    already = apply_crossing_changes(d, t)
    assert descending_target(already, "a1") == frozenset()


def test_descending_direction_and_basepoint(corpus_diagrams):
    d = corpus_diagrams["TREFOIL"]
    for base in sorted(d.arcs):
        for direction in (1, -1):
            t = descending_target(d, "a1", basepoint=base, direction=direction)
            assert 1 <= len(t) <= 2
            after = apply_crossing_changes(d, t)
            assert descending_target(after, "a1", basepoint=base, direction=direction) == frozenset()


def test_descending_requires_knot_like(corpus_diagrams):
    with pytest.raises(NotAKnotComponent):
        descending_target(corpus_diagrams["THETA0"], "a1")


def test_unknot_target(corpus_diagrams):
    d = corpus_diagrams["TREFOIL"]
    assert unknot_target(d, "a1") == descending_target(d, "a1")
    d = corpus_diagrams["LINKED_TRIANGLES"]
    g = abstract_graph(d)
    assert unknot_target(d, g.components[0]) == frozenset()  # clasp is non-self
    d = corpus_diagrams["HANDCUFF0"]
    t = unknot_target(d, "a1")
    assert t <= set(d.crossing_ids())


def test_eulerian_witnesses(corpus_diagrams):
    plan = witness_splittable(corpus_diagrams["T24"])
    assert isinstance(plan, WitnessPlan) and not plan.script
    ok, diffs = verify_witness(corpus_diagrams["T24"], plan)
    assert ok, diffs
    out = witness_splittable(corpus_diagrams["HOPF"])
    assert isinstance(out, Impossible) and len(out.certificate) == 2
    plan = witness_unknottable(corpus_diagrams["TREFOIL"])
    final = apply_region_set(corpus_diagrams["TREFOIL"], plan.regions)
    assert is_descending(final, "a1")
    out = witness_unknottable(corpus_diagrams["LINKED_TRIANGLES"])
    assert isinstance(out, Impossible)
    plan = witness_unknottable(corpus_diagrams["THETA0"])
    assert isinstance(plan, WitnessPlan) and not plan.target


def test_non_eulerian_witness_handcuff(corpus_diagrams):
    d = corpus_diagrams["HANDCUFF0"]
    plan = witness_unknottable(d)
    assert isinstance(plan, WitnessPlan)
    ok, diffs = verify_witness(d, plan)
    assert ok, diffs


def test_theta_with_clasped_companion_splittable():
    # a theta companion makes the whole spatial graph non-Eulerian, so even
    # an improper Hopf pair becomes splittable: the clasp is undone by a far
    # gadget anchored at the theta's odd vertices
    theta = codec.load_corpus("THETA0")
    hopf = codec.load_corpus("HOPF")
    d = oracle.disjoint_union(theta, hopf, prefix2="L_")
    v = decide_splittable(d)
    assert v.answer and v.reason == "non-eulerian"
    plan = witness_splittable(d)
    assert isinstance(plan, WitnessPlan)
    assert any(step[0] == "gadget" for step in plan.script)
    ok, diffs = verify_witness(d, plan)
    assert ok, diffs
    final, records = oracle.replay(d, plan)
    final = apply_region_set(final, plan.regions)
    for rec in reversed(records):
        from sgd.transform import spur_retract

        final = spur_retract(final, rec)
    order = component_order(abstract_graph(final))
    assert inv.warping_matrix(final, order).all_zero()


def test_decide_matches_witness_kind():
    for seed in range(12):
        for profile in ("link2", "non-eulerian-graph"):
            d = oracle.random_diagram(seed, profile)
            verdict = decide_splittable(d)
            plan = witness_splittable(d)
            assert verdict.answer == isinstance(plan, WitnessPlan)


def test_verdict_stable_under_rcc_perturbation():
    import random

    rng = random.Random(1)
    for seed in range(6):
        d = oracle.random_diagram(seed, "link2")
        base = decide_splittable(d).answer
        for _ in range(8):
            fid = rng.choice([f.id for f in d.faces()])
            d = apply_region_set(d, [fid])
            assert decide_splittable(d).answer == base
