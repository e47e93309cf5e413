"""Acceptance suite: one test per criterion, each printing PASS/FAIL.

Every tolerance here is exact (mod-2 equalities, set equalities, zero
failure counts); the only numeric bounds are the wall-clock budgets.
"""

import random
import sys
import time

import pytest

from conftest import corpus, gadget_instance, spur_instance, take_instances
from sgd import codec, decide, invariants as inv, oracle
from sgd.codec import diagrams_equal, serialize
from sgd.core import abstract_graph, component_order
from sgd.decide import Impossible, WitnessPlan
from sgd.errors import NonPlanarGraph
from sgd.gf2 import TargetSet, incidence_matrix, rank, solve
from sgd.oracle import enumerate_targets, random_diagram, verify_witness
from sgd.transform import (
    apply_crossing_changes,
    apply_region_set,
    spur_insert,
    spur_retract,
    far_gadget,
)


def report(criterion, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {criterion}: {status} {detail}", file=sys.stderr)
    assert ok, f"criterion {criterion}: {detail}"


def test_criterion_1_solver_matches_enumeration():
    t0 = time.time()
    rng = random.Random(101)
    diagrams = list(corpus().items())
    seed = 0
    while sum(1 for _, d in diagrams if len(d.faces()) <= 12) < 60:
        profile = ("knot", "link2", "link3", "eulerian-graph", "non-eulerian-graph")[seed % 5]
        d = random_diagram(seed, profile)
        seed += 1
        if len(d.faces()) <= 12:
            diagrams.append((f"gen{seed}", d))
    checked = 0
    for name, d in diagrams:
        if len(d.faces()) > 12:
            continue
        e = enumerate_targets(d)
        m = incidence_matrix(d)
        crossings = d.crossing_ids()
        for _ in range(64):
            t = frozenset(c for c in crossings if rng.random() < 0.5)
            out = solve(m, TargetSet(t))
            if out.sat != (t in e.achievable):
                report(1, False, f"{name}: solver disagrees on {sorted(t)}")
            if out.sat:
                applied = apply_region_set(d, out.regions)
                flipped = frozenset(
                    c for c in crossings if applied.nodes[c].over != d.nodes[c].over
                )
                if flipped != t:
                    report(1, False, f"{name}: witness does not realize {sorted(t)}")
        checked += 1
    dt = time.time() - t0
    report(1, checked >= 60 and dt < 60, f"{checked} diagrams, {dt:.1f}s")


def test_criterion_2_knot_diagrams_unknottable():
    t0 = time.time()
    count = 0
    seed = 0
    while count < 100:
        d = random_diagram(seed, "knot")
        seed += 1
        if len(d.crossing_ids()) > 8:
            continue
        m = incidence_matrix(d)
        if rank(m) != len(m.rows):
            report(2, False, f"seed {seed - 1}: incidence matrix not full row rank")
        plan = decide.witness_unknottable(d)
        if not isinstance(plan, WitnessPlan):
            report(2, False, f"seed {seed - 1}: no plan")
        final = apply_region_set(d, plan.regions)
        comp = component_order(abstract_graph(d))[0]
        if not decide.is_descending(final, comp):
            report(2, False, f"seed {seed - 1}: result not descending")
        count += 1
    report(2, True, f"100 knots, {time.time() - t0:.1f}s")


def test_criterion_3_theorem_1_2_instances():
    out = decide.witness_splittable(codec.load_corpus("HOPF"))
    if not isinstance(out, Impossible) or not out.certificate:
        report(3, False, "HOPF did not yield an odd-parity certificate")
    for name in ("T24", "UNLINK2X"):
        d = codec.load_corpus(name)
        plan = decide.witness_splittable(d)
        if not isinstance(plan, WitnessPlan):
            report(3, False, f"{name}: no plan")
        ok, diffs = verify_witness(d, plan)
        if not ok:
            report(3, False, f"{name}: {diffs}")
        final = apply_region_set(d, plan.regions)
        order = component_order(abstract_graph(final))
        if not inv.warping_matrix(final, order).all_zero():
            report(3, False, f"{name}: warping nonzero after replay")
    report(3, True, "HOPF impossible; T24, UNLINK2X verified")


def test_criterion_4_verdict_table():
    rows = []
    v = decide.decide_unknottable(codec.load_corpus("THETA0"))
    rows.append(v.answer is True and v.reason == "non-eulerian")
    v = decide.decide_unknottable(codec.load_corpus("LINKED_TRIANGLES"))
    rows.append(v.answer is False and v.reason == "eulerian-improper")
    v = decide.decide_unknottable(codec.load_corpus("T24"))
    rows.append(v.answer is True and v.reason == "eulerian-proper")
    k5 = codec.load_corpus("NONPLANAR-K5")
    try:
        decide.decide_unknottable(k5)
        rows.append(False)
    except NonPlanarGraph:
        rows.append(True)
    v = decide.decide_splittable(k5)
    rows.append(v.answer is True)
    report(4, all(rows), f"{sum(rows)}/5 rows exact")


def test_criterion_5_spur_roundtrip_law():
    t0 = time.time()
    instances = take_instances(spur_instance, 200)
    for d, c, path, v in instances:
        out, rec = spur_insert(d, c, path, v)
        flipped = apply_region_set(out, rec.region_set)
        back = spur_retract(flipped, rec)
        if not diagrams_equal(back, apply_crossing_changes(d, [c])):
            report(5, False, f"spur law failed at {c} -> {v}")
    dt = time.time() - t0
    report(5, dt < 30, f"200 instances, {dt:.1f}s")


def test_criterion_6_gadget_roundtrip_law():
    t0 = time.time()
    instances = take_instances(gadget_instance, 100)
    for d, c, v1, v2, base in instances:
        out, rec = far_gadget(d, c, v1, v2, base)
        flipped = apply_region_set(out, rec.region_set)
        back = spur_retract(flipped, rec)
        if not diagrams_equal(back, apply_crossing_changes(d, [c])):
            report(6, False, f"gadget law failed at {c}")
    dt = time.time() - t0
    report(6, dt < 30, f"100 instances, {dt:.1f}s")


def test_criterion_7_section_3_invariants():
    t0 = time.time()
    rng = random.Random(7)
    # properness preserved under 1000 random region crossing changes
    for trial in range(1000):
        profile = ("link2", "link3", "eulerian-graph")[trial % 3]
        d = random_diagram(rng.randint(0, 10 ** 6), profile)
        g = abstract_graph(d)
        order = component_order(g)
        before = inv.is_proper(inv.linking_matrix(d, inv.eulerian_orientation(g), order))[0]
        fid = rng.choice([f.id for f in d.faces()])
        d2 = apply_region_set(d, [fid])
        g2 = abstract_graph(d2)
        after = inv.is_proper(inv.linking_matrix(d2, inv.eulerian_orientation(g2), order))[0]
        if before != after:
            report(7, False, f"properness changed under RCC (trial {trial})")
    # lk parity across 10 sampled Eulerian orientations per Eulerian diagram
    for name, d in corpus().items():
        g = abstract_graph(d)
        if not inv.eulerian_check(g).eulerian:
            continue
        order = component_order(g)
        base = inv.linking_matrix(d, inv.eulerian_orientation(g), order)
        for k in range(10):
            o = inv.eulerian_orientation(g, random.Random((name, k).__repr__()))
            lk = inv.linking_matrix(d, o, order)
            for i, ci in enumerate(order):
                for cj in order[i + 1:]:
                    if (lk.entry(ci, cj) - base.entry(ci, cj)) % 2:
                        report(7, False, f"{name}: lk parity broke")
    # w = lk (mod 2) on 500 random link diagrams
    for k in range(500):
        d = random_diagram(k, "link2" if k % 2 else "link3")
        g = abstract_graph(d)
        order = component_order(g)
        lk = inv.linking_matrix(d, inv.eulerian_orientation(g), order)
        w = inv.warping_matrix(d, order)
        for i, ci in enumerate(order):
            for j in range(i + 1, len(order)):
                if (w.entry(i, j) - lk.entry(ci, order[j])) % 2:
                    report(7, False, f"link seed {k}: w != lk mod 2")
    report(7, True, f"{time.time() - t0:.1f}s")


def test_criterion_8_non_eulerian_pipeline():
    t0 = time.time()
    count = 0
    seed = 0
    while count < 50:
        d = random_diagram(seed, "non-eulerian-graph")
        seed += 1
        plan = decide.witness_splittable(d)
        if not isinstance(plan, WitnessPlan):
            report(8, False, f"seed {seed - 1}: no plan")
        ok, diffs = verify_witness(d, plan)
        if not ok:
            report(8, False, f"seed {seed - 1}: {diffs}")
        count += 1
    dt = time.time() - t0
    report(8, dt < 120, f"50 diagrams, {dt:.1f}s")


def test_criterion_9_tripwire_never_fires():
    # Eulerian-proper direct solves across corpus and generated diagrams;
    # TheoremViolation would propagate as an error and fail this test.
    checked = 0
    for name, d in corpus().items():
        g = abstract_graph(d)
        if not inv.eulerian_check(g).eulerian:
            continue
        order = component_order(g)
        lk = inv.linking_matrix(d, inv.eulerian_orientation(g), order)
        if not inv.is_proper(lk)[0]:
            continue
        plan = decide.witness_splittable(d)
        assert isinstance(plan, WitnessPlan)
        try:
            plan = decide.witness_unknottable(d)
            assert isinstance(plan, WitnessPlan)
        except NonPlanarGraph:
            pass
        checked += 1
    for seed in range(40):
        d = random_diagram(seed, ("knot", "link2", "link3", "eulerian-graph")[seed % 4])
        verdict = decide.decide_splittable(d)
        if verdict.answer and verdict.reason == "eulerian-proper":
            plan = decide.witness_splittable(d)
            assert isinstance(plan, WitnessPlan)
            plan = decide.witness_unknottable(d)
            assert isinstance(plan, WitnessPlan)
            checked += 1
    report(9, checked > 20, f"{checked} Eulerian-proper solves, no TheoremViolation")


def test_criterion_10_codec_roundtrip():
    t0 = time.time()
    for name, d in corpus().items():
        text = serialize(d)
        if not diagrams_equal(d, codec.parse(text)) or serialize(codec.parse(text)) != text:
            report(10, False, f"{name} roundtrip failed")
    for seed in range(1000):
        profile = ("knot", "link2", "link3", "eulerian-graph", "non-eulerian-graph")[seed % 5]
        d = random_diagram(seed, profile)
        text = serialize(d)
        if not diagrams_equal(d, codec.parse(text)):
            report(10, False, f"seed {seed} parse(serialize) not isomorphic")
        if serialize(codec.parse(text)) != text:
            report(10, False, f"seed {seed} serialization not byte-stable")
    report(10, True, f"corpus + 1000 generated, {time.time() - t0:.1f}s")
