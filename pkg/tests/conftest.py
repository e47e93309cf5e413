"""Shared samplers for randomized instances used across the suite."""

import random

import pytest

from sgd import codec, oracle
from sgd.decide import _dart_bfs


def corpus():
    return {name: codec.load_corpus(name) for name in codec.CORPUS_NAMES}


def spur_instance(seed):
    """A (diagram, crossing, path, odd vertex) tuple for the spur law, or
    None when the sampled diagram has no reachable odd vertex of degree 3."""
    rng = random.Random(("spur", seed).__repr__())
    d = oracle.random_diagram(rng.randint(0, 10 ** 6), "non-eulerian-graph")
    g = d.abstract_graph()
    odd3 = {v for v in g.vertices if g.degree[v] % 2 and g.degree[v] >= 3}
    xs = d.crossing_ids()
    if not odd3 or not xs:
        return None
    c = rng.choice(xs)
    path = _dart_bfs(
        d,
        sorted(d.nodes[c].slots),
        lambda far: far in odd3,
        lambda far: not d.nodes[far].is_crossing()
        and d.abstract_graph().degree[far] % 2 == 0,
    )
    if path is None:
        return None
    v = d.he_node[d.mate(path[-1])][0]
    return d, c, path, v


def gadget_instance(seed):
    """A (diagram, far crossing, v1, v2, base path) tuple, or None."""
    rng = random.Random(("gadget", seed).__repr__())
    base = oracle.random_diagram(rng.randint(0, 10 ** 6), "non-eulerian-graph")
    side = oracle.random_diagram(rng.randint(0, 10 ** 6), rng.choice(["knot", "link2"]))
    d = oracle.disjoint_union(base, side, prefix2="F_")
    g = d.abstract_graph()
    comp_of = d.strand_component()
    odd3 = sorted(v for v in g.vertices if g.degree[v] % 2 and g.degree[v] >= 3)
    if not odd3:
        return None
    gcomps = {g.component_of[v] for v in odd3}
    passes = d.crossing_passes()
    far = [
        c
        for c in d.crossing_ids()
        if comp_of[passes[c][0][0]] not in gcomps and comp_of[passes[c][1][0]] not in gcomps
    ]
    if not far:
        return None
    c = rng.choice(far)
    for v1 in odd3:
        path = _dart_bfs(
            d,
            sorted(d.nodes[v1].slots),
            lambda f: f != v1
            and not d.nodes[f].is_crossing()
            and d.abstract_graph().degree[f] % 2 == 1
            and d.abstract_graph().degree[f] >= 3,
            lambda f: not d.nodes[f].is_crossing()
            and d.abstract_graph().degree[f] % 2 == 0,
        )
        if path:
            v2 = d.he_node[d.mate(path[-1])][0]
            return d, c, v1, v2, path
    return None


def take_instances(sampler, count):
    out = []
    seed = 0
    while len(out) < count:
        inst = sampler(seed)
        seed += 1
        if inst is not None:
            out.append(inst)
        if seed > 40 * count:
            raise RuntimeError("sampler starved")
    return out


def necklace(n):
    """n circles in a ring, each clasping the next with two crossings."""
    from sgd.core import Arc, CROSSING, Node, build_diagram

    nodes = []
    arcs = []
    for i in range(n):
        # one clasp per adjacent pair, with the standard Hopf rotations
        nodes.append(Node(f"u{i}", CROSSING, (f"p{i}", f"t{i}", f"r{i}", f"e{i}"), over=True))
        nodes.append(Node(f"w{i}", CROSSING, (f"v{i}", f"q{i}", f"f{i}", f"s{i}"), over=True))
        arcs.append(Arc(f"am{i}", (f"r{i}", f"s{i}")))
        arcs.append(Arc(f"bm{i}", (f"t{i}", f"v{i}")))
    for i in range(n):
        j = (i - 1) % n
        arcs.append(Arc(f"ca{i}", (f"p{i}", f"e{j}")))
        arcs.append(Arc(f"cb{i}", (f"q{i}", f"f{j}")))
    return build_diagram(nodes, arcs)


@pytest.fixture(scope="session")
def corpus_diagrams():
    return corpus()
