"""Incidence matrices and GF(2) solving against spec and oracle values."""

import random

import pytest

from sgd import gf2, oracle
from sgd.errors import UnknownCrossing
from sgd.gf2 import TargetSet, incidence_matrix, kernel_basis, minimum_weight_witness, rank, solve, solve_with_dont_care
from sgd.transform import apply_region_set


def test_hopf_matrix(corpus_diagrams):
    m = incidence_matrix(corpus_diagrams["HOPF"])
    assert len(m.rows) == 2 and len(m.cols) == 4
    assert all(b == 0b1111 for b in m.bits)
    assert rank(m) == 1 and len(kernel_basis(m)) == 3


def test_trefoil_matrix(corpus_diagrams):
    m = incidence_matrix(corpus_diagrams["TREFOIL"])
    assert len(m.rows) == 3 and len(m.cols) == 5
    assert rank(m) == 3 and len(kernel_basis(m)) == 2


def test_unknot0_matrix(corpus_diagrams):
    m = incidence_matrix(corpus_diagrams["UNKNOT0"])
    assert len(m.rows) == 0 and len(m.cols) == 2
    assert len(kernel_basis(m)) == 2


def test_hopf_solves(corpus_diagrams):
    m = incidence_matrix(corpus_diagrams["HOPF"])
    out = solve(m, TargetSet(frozenset({"x1"})))
    assert not out.sat and out.certificate == frozenset({"x1", "x2"})
    out = solve(m, TargetSet(frozenset({"x1", "x2"})))
    assert out.sat and len(out.regions) == 1


def test_trefoil_single_crossing(corpus_diagrams):
    d = corpus_diagrams["TREFOIL"]
    m = incidence_matrix(d)
    out = solve(m, TargetSet(frozenset({"x1"})))
    assert out.sat and out.induced == frozenset({"x1"})
    applied = apply_region_set(d, out.regions)
    assert {c for c in d.crossing_ids() if applied.nodes[c].over != d.nodes[c].over} == {"x1"}


def test_dont_care(corpus_diagrams):
    m = incidence_matrix(corpus_diagrams["HOPF"])
    out = solve_with_dont_care(m, TargetSet(frozenset({"x1"}), frozenset({"x1"})))
    assert out.sat and "x1" in out.induced
    out = solve_with_dont_care(m, TargetSet(frozenset({"x1"}), frozenset({"x1", "x2"})))
    assert not out.sat
    out = solve_with_dont_care(m, TargetSet(frozenset(), frozenset()))
    assert out.sat and out.regions == frozenset()


def test_unknown_crossing(corpus_diagrams):
    m = incidence_matrix(corpus_diagrams["HOPF"])
    with pytest.raises(UnknownCrossing):
        solve(m, TargetSet(frozenset({"zz"})))


def test_kernel_elements_are_noops(corpus_diagrams):
    for name in ("HOPF", "TREFOIL", "T24", "HANDCUFF0"):
        d = corpus_diagrams[name]
        m = incidence_matrix(d)
        for vec in kernel_basis(m):
            applied = apply_region_set(d, vec)
            assert all(
                applied.nodes[c].over == d.nodes[c].over for c in d.crossing_ids()
            )


def test_minimum_weight_witness(corpus_diagrams):
    m = incidence_matrix(corpus_diagrams["HOPF"])
    out = solve(m, TargetSet(frozenset({"x1", "x2"})))
    best = minimum_weight_witness(m, out)
    assert len(best) == 1


def test_solve_constraints_pairs(corpus_diagrams):
    d = corpus_diagrams["T24"]
    m = incidence_matrix(d)
    out = gf2.solve_constraints(m, {"x1"}, set(), [("x2", "x4")])
    assert out.sat
    flips = m.flips(out.regions)
    assert "x1" in flips
    assert ("x2" in flips) == ("x4" in flips)
    # an infeasible mix yields a certificate
    out = gf2.solve_constraints(
        incidence_matrix(corpus_diagrams["HOPF"]), {"x1"}, {"x2"}, []
    )
    assert not out.sat and out.certificate


def test_knot_full_row_rank():
    for seed in range(25):
        d = oracle.random_diagram(seed, "knot")
        m = incidence_matrix(d)
        assert rank(m) == len(m.rows)


def test_pair_realizability_between_two_components():
    rng = random.Random(3)
    for seed in range(25):
        d = oracle.random_diagram(seed, "link2")
        comp = d.strand_component()
        inter = [
            c
            for c in d.crossing_ids()
            if comp[d.crossing_passes()[c][0][0]] != comp[d.crossing_passes()[c][1][0]]
        ]
        if len(inter) < 2:
            continue
        pair = rng.sample(inter, 2)
        out = solve(incidence_matrix(d), TargetSet(frozenset(pair)))
        assert out.sat, (seed, pair)


def test_cycle_realizability():
    # cyclically linked components: one crossing per adjacent pair is
    # realizable even though each pairwise count is odd
    from conftest import necklace

    for n in (3, 4, 5):
        d = necklace(n)
        comp = d.strand_component()
        by_pair = {}
        for c in d.crossing_ids():
            p = d.crossing_passes()[c]
            key = tuple(sorted((comp[p[0][0]], comp[p[1][0]])))
            by_pair.setdefault(key, []).append(c)
        assert len(by_pair) == n
        target = frozenset(min(v) for v in by_pair.values())
        out = solve(incidence_matrix(d), TargetSet(target))
        assert out.sat, n
        assert out.induced == target
