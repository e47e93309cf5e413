"""Verdicts and constructive witnesses for unknottability and complete
splittability under region crossing changes.

A spatial graph is splittable exactly when it is non-Eulerian, or Eulerian
and proper; for unknottability the same rule applies to planar underlying
graphs.  Eulerian-proper witnesses are direct GF(2) solves on the fixed
diagram; non-Eulerian witnesses run the spur/gadget pipeline that retakes a
suitable diagram first.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from . import invariants as inv
from .core import Diagram, component_order, classify_crossing, is_planar_abstract
from .errors import (
    NonPlanarGraph,
    NotAKnotComponent,
    SgdError,
    TheoremViolation,
)
from .gf2 import TargetSet, incidence_matrix, solve, solve_with_dont_care
from .transform import far_gadget, knotify, spur_insert, solve_unit_regions

NON_EULERIAN = "non-eulerian"
EULERIAN_PROPER = "eulerian-proper"
EULERIAN_IMPROPER = "eulerian-improper"


@dataclass(frozen=True)
class Verdict:
    question: str  # "unknottable" | "splittable"
    answer: bool
    reason: str
    certificate: tuple = ()  # components with odd linking-number row sums
    note: str = ""

    def as_record(self):
        rec = {"question": self.question, "answer": self.answer, "reason": self.reason}
        if self.certificate:
            rec["certificate"] = list(self.certificate)
        if self.note:
            rec["note"] = self.note
        return rec


@dataclass(frozen=True)
class Impossible:
    question: str
    certificate: tuple

    def as_record(self):
        return {
            "question": self.question,
            "status": "impossible",
            "certificate": list(self.certificate),
        }


@dataclass(frozen=True)
class WitnessPlan:
    question: str
    target: frozenset  # crossing changes claimed (within the care set)
    care: Optional[frozenset]  # None = every original crossing is constrained
    script: tuple  # ordered insertion steps, replayable
    regions: frozenset  # final region set on the transformed diagram

    def as_record(self):
        return {
            "question": self.question,
            "status": "plan",
            "target": sorted(self.target),
            "care": sorted(self.care) if self.care is not None else None,
            "script": [list(step) for step in self.script],
            "regions": sorted(self.regions),
        }


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------


def _eulerian_properness(d: Diagram):
    g = d.abstract_graph()
    check = inv.eulerian_check(g)
    if not check.eulerian:
        return NON_EULERIAN, ()
    order = component_order(g)
    o = inv.eulerian_orientation(g)
    lk = inv.linking_matrix(d, o, order)
    proper, offending = inv.is_proper(lk)
    return (EULERIAN_PROPER, ()) if proper else (EULERIAN_IMPROPER, offending)


def decide_splittable(d: Diagram) -> Verdict:
    reason, cert = _eulerian_properness(d)
    return Verdict("splittable", reason != EULERIAN_IMPROPER, reason, cert)


def decide_unknottable(d: Diagram) -> Verdict:
    if not is_planar_abstract(d.abstract_graph()):
        raise NonPlanarGraph("underlying graph is not planar")
    reason, cert = _eulerian_properness(d)
    return Verdict(
        "unknottable", reason != EULERIAN_IMPROPER, reason, cert, note="planar"
    )


# ---------------------------------------------------------------------------
# Crossing-change targets
# ---------------------------------------------------------------------------


def split_target(d: Diagram, order) -> TargetSet:
    """All warping crossing points: non-self crossings where the later
    component passes over the earlier.  Flipping them zeroes the warping
    matrix.  Care set: every non-self crossing."""
    comp = d.strand_component()
    pos = {ck: i for i, ck in enumerate(order)}
    change = set()
    care = set()
    for c in d.crossing_ids():
        node = d.nodes[c]
        passes = d.crossing_passes()[c]
        c0 = comp[passes[0][0]]
        c1 = comp[passes[1][0]]
        if c0 == c1:
            continue
        care.add(c)
        over_comp = c0 if node.over else c1
        under_comp = c1 if node.over else c0
        if pos[over_comp] > pos[under_comp]:
            change.add(c)
    return TargetSet(frozenset(change), frozenset(care))


def _knot_traversal(d: Diagram, comp):
    """Cyclic walk of a knot-like component as interleaved events:
    ("a", arc id) and ("x", crossing id, in slot)."""
    g = d.abstract_graph()
    strands = [s for s in d.strands() if g.component_of[s.id] == comp]
    if not strands:
        raise NotAKnotComponent(comp)

    def strand_events(s, forward):
        ev = []
        if forward:
            darts, passes = list(s.darts), list(s.passes)
        else:
            darts = [d.mate(h) for h in reversed(s.darts)]
            passes = [(c, o, i) for (c, i, o) in reversed(s.passes)]
        for k, dart in enumerate(darts):
            ev.append(("a", d.he_arc[dart]))
            if k < len(passes):
                ev.append(("x", passes[k][0], passes[k][1]))
        return ev

    if len(strands) == 1 and strands[0].closed:
        return strand_events(strands[0], True)
    for v in g.vertices:
        if g.component_of[v] == comp and g.degree[v] != 2:
            raise NotAKnotComponent(f"{comp}: vertex {v} has degree {g.degree[v]}")
    by_end = {}
    for s in strands:
        if s.closed:
            raise NotAKnotComponent(comp)
        by_end[s.endpoints[0]] = s
        by_end[s.endpoints[1]] = s
    start = min(strands, key=lambda s: s.id)
    events = []
    s, forward = start, True
    while True:
        events.extend(strand_events(s, forward))
        vid, slot = s.endpoints[1] if forward else s.endpoints[0]
        other_slot = (slot + 1) % 2
        nxt = by_end[(vid, other_slot)]
        forward = nxt.endpoints[0] == (vid, other_slot)
        s = nxt
        if s.id == start.id and forward:
            return events


def descending_target(
    d: Diagram, comp, basepoint: Optional[str] = None, direction: int = 1
) -> frozenset:
    """Self-crossings of the component whose first visit from the basepoint
    runs under; flipping them makes the component descending."""
    events = _knot_traversal(d, comp)
    if basepoint is not None:
        k = next(
            (i for i, e in enumerate(events) if e[0] == "a" and e[1] == basepoint),
            None,
        )
        if k is None:
            raise NotAKnotComponent(f"arc {basepoint} is not on {comp}")
        events = events[k:] + events[:k]
    if direction == -1:
        events = list(reversed(events))
    passes = [e for e in events if e[0] == "x"]
    counts = {}
    for _, c, _ in passes:
        counts[c] = counts.get(c, 0) + 1
    target = set()
    seen = set()
    for _, c, in_slot in passes:
        if counts.get(c, 0) != 2 or c in seen:
            continue
        seen.add(c)
        over_parity = 0 if d.nodes[c].over else 1
        if in_slot % 2 != over_parity:
            target.add(c)
    return frozenset(target)


def is_descending(d: Diagram, comp, ignore=frozenset()) -> bool:
    return not (descending_target(d, comp) - frozenset(ignore))


def _dfs_descending_target(d: Diagram, comp) -> frozenset:
    """Heuristic for components with odd-degree vertices: order the strands
    by depth-first search and put earlier material over later."""
    g = d.abstract_graph()
    strands = [s for s in d.strands() if g.component_of[s.id] == comp]
    by_vertex = {}
    for s in strands:
        for vid, _ in s.endpoints or ():
            by_vertex.setdefault(vid, []).append(s)
    verts = sorted(v for v in g.vertices if g.component_of[v] == comp)
    order = []
    seen = set()
    stack = [verts[0]] if verts else []
    seen_v = set(stack)
    while stack:
        v = stack.pop()
        for s in sorted(by_vertex.get(v, []), key=lambda s: s.id):
            if s.id in seen:
                continue
            seen.add(s.id)
            order.append(s)
            for vid, _ in s.endpoints:
                if vid not in seen_v:
                    seen_v.add(vid)
                    stack.append(vid)
    rank = {}
    for i, s in enumerate(order):
        for k, (c, in_slot, _) in enumerate(s.passes):
            rank[(c, in_slot % 2)] = (i, k)
    target = set()
    for c in d.crossing_ids():
        if (c, 0) in rank and (c, 1) in rank:
            over_parity = 0 if d.nodes[c].over else 1
            if rank[(c, over_parity)] > rank[(c, 1 - over_parity)]:
                target.add(c)
    return frozenset(target)


def unknot_target(d: Diagram, comp) -> frozenset:
    """Self-crossings to flip so the component alone becomes unknotted."""
    g = d.abstract_graph()
    verts = [v for v in g.vertices if g.component_of[v] == comp]
    if not verts or all(g.degree[v] == 2 for v in verts):
        return descending_target(d, comp)
    if any(g.degree[v] % 2 for v in verts):
        return _dfs_descending_target(d, comp)
    dk, _ = knotify(d, comp)
    gk = dk.abstract_graph()
    comp_k = _matching_component(d, dk, comp)
    return descending_target(dk, comp_k)


def _matching_component(d, dk, comp):
    old_arcs = {
        a for s in d.strands() if d.abstract_graph().component_of[s.id] == comp for a in s.arcs
    }
    gk = dk.abstract_graph()
    for ck in gk.components:
        arcs = {
            a for s in dk.strands() if gk.component_of[s.id] == ck for a in s.arcs
        }
        if arcs & old_arcs:
            return ck
    raise NotAKnotComponent(comp)


# ---------------------------------------------------------------------------
# Non-Eulerian pipeline: retake the diagram with spurs and gadgets
# ---------------------------------------------------------------------------


def _dart_bfs(d: Diagram, start_darts, goal, through_ok):
    """Shortest dart walk: expands straight through crossings, turns at the
    vertices accepted by ``through_ok``, stops when ``goal`` holds at the far
    node.  Returns the dart list or None."""
    prev = {}
    queue = deque()
    for h in start_darts:
        if h not in prev:
            prev[h] = None
            queue.append(h)
    while queue:
        h = queue.popleft()
        far = d.he_node[d.mate(h)][0]
        if goal(far):
            path = [h]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return list(reversed(path))
        node = d.nodes[far]
        j = d.he_node[d.mate(h)][1]
        if node.is_crossing():
            exits = [node.slots[(j + 2) % 4]]
        elif through_ok(far):
            exits = [node.slots[k] for k in range(node.degree) if k != j]
        else:
            exits = []
        for e in sorted(exits):
            if e not in prev:
                prev[e] = h
                queue.append(e)
    return None


def _usable_odd(d: Diagram, g, comp):
    return sorted(
        v
        for v in g.vertices
        if g.component_of[v] == comp and g.degree[v] % 2 and g.degree[v] >= 3
    )


def realize_by_spurs(d: Diagram, target: frozenset):
    """Insert spurs for target crossings on a non-Eulerian component G and
    far gadgets for the rest; returns (diagram, script, region set).

    G is tracked through the insertions by one of its odd vertices, which
    no transformation renames or removes.
    """
    g = d.abstract_graph()
    candidates = [c for c in g.components if _usable_odd(d, g, c)]
    if not candidates:
        raise SgdError("no odd vertex of degree >= 3 to anchor spurs")
    G = candidates[0]
    anchor = _usable_odd(d, g, G)[0]
    comp_of = d.strand_component()

    def on_g(c):
        passes = d.crossing_passes()[c]
        return comp_of[passes[0][0]] == G or comp_of[passes[1][0]] == G

    B = sorted(c for c in target if on_g(c))
    C = sorted(c for c in target if not on_g(c))
    cur = d
    script = []
    records = []
    for k, b in enumerate(B):
        gg = cur.abstract_graph()
        gnow = gg.component_of[anchor]
        odd = set(_usable_odd(cur, gg, gnow))
        node = cur.nodes[b]
        comp_now = cur.strand_component()
        starts = []
        passes = cur.crossing_passes()[b]
        for parity in (0, 1):
            if comp_now[passes[parity][0]] == gnow:
                in_slot = passes[parity][1]
                starts.extend([node.slots[in_slot], node.slots[(in_slot + 2) % 4]])
        path = _dart_bfs(
            cur,
            sorted(starts),
            lambda far: far in odd,
            lambda far: not cur.nodes[far].is_crossing()
            and cur.abstract_graph().degree[far] % 2 == 0,
        )
        if path is None:
            raise SgdError(f"no spur path from {b}")
        v = cur.he_node[cur.mate(path[-1])][0]
        prefix = f"sp{k}."
        cur, rec = spur_insert(cur, b, path, v, prefix=prefix)
        script.append(("spur", b, tuple(path), v, prefix))
        records.append(rec)
    for k, c in enumerate(C):
        gg = cur.abstract_graph()
        gnow = gg.component_of[anchor]
        odd = _usable_odd(cur, gg, gnow)
        best = None
        for v1 in odd:
            node = cur.nodes[v1]
            path = _dart_bfs(
                cur,
                sorted(node.slots),
                lambda far: far != v1
                and not cur.nodes[far].is_crossing()
                and cur.abstract_graph().degree[far] % 2 == 1
                and cur.abstract_graph().degree[far] >= 3,
                lambda far: not cur.nodes[far].is_crossing()
                and cur.abstract_graph().degree[far] % 2 == 0,
            )
            if path is not None and (best is None or len(path) < len(best[1])):
                best = (v1, path)
        if best is None:
            raise SgdError("no odd-vertex pair for the far gadget")
        v1, base = best
        v2 = cur.he_node[cur.mate(base[-1])][0]
        prefix = f"gd{k}."
        cur, rec = far_gadget(cur, c, v1, v2, base, prefix=prefix)
        script.append(("gadget", c, v1, v2, tuple(base), prefix))
        records.append(rec)
    regions = (
        solve_unit_regions(cur, records, d.crossing_ids()) if records else frozenset()
    )
    return cur, tuple(script), regions, records


# ---------------------------------------------------------------------------
# Witness construction
# ---------------------------------------------------------------------------


def witness_splittable(d: Diagram):
    g = d.abstract_graph()
    check = inv.eulerian_check(g)
    order = component_order(g)
    t = split_target(d, order)
    if not check.eulerian:
        _, script, regions, _ = realize_by_spurs(d, t.change)
        return WitnessPlan("splittable", t.change, None, script, regions)
    o = inv.eulerian_orientation(g)
    lk = inv.linking_matrix(d, o, order)
    proper, offending = inv.is_proper(lk)
    if not proper:
        return Impossible("splittable", offending)
    m = incidence_matrix(d)
    out = solve_with_dont_care(m, t)
    if not out.sat:
        raise TheoremViolation(
            "Eulerian proper split solve came back unsat; certificate "
            f"{sorted(out.certificate or ())}"
        )
    return WitnessPlan("splittable", t.change, t.care, (), out.regions)


def witness_unknottable(d: Diagram):
    if not is_planar_abstract(d.abstract_graph()):
        raise NonPlanarGraph("underlying graph is not planar")
    g = d.abstract_graph()
    check = inv.eulerian_check(g)
    order = component_order(g)
    split = split_target(d, order)
    if not check.eulerian:
        total = set(split.change)
        for comp in order:
            total |= unknot_target(d, comp)
        _, script, regions, _ = realize_by_spurs(d, frozenset(total))
        return WitnessPlan("unknottable", frozenset(total), None, script, regions)
    o = inv.eulerian_orientation(g)
    lk = inv.linking_matrix(d, o, order)
    proper, offending = inv.is_proper(lk)
    if not proper:
        return Impossible("unknottable", offending)
    m = incidence_matrix(d)
    reducible = frozenset(
        c
        for c in d.crossing_ids()
        if (cc := classify_crossing(d, c)).self_crossing and cc.reducible
    )
    vertex_free = not g.vertices
    care = frozenset(m.rows) if (vertex_free and len(order) == 1) else frozenset(m.rows) - reducible
    regions = frozenset()
    total = set()
    pieces = [split.change]
    for comp in order:
        pieces.append(unknot_target(d, comp))
    for piece in pieces:
        t = TargetSet(frozenset(piece) & care, care)
        out = solve_with_dont_care(m, t)
        if not out.sat:
            raise TheoremViolation(
                f"Eulerian proper unknot solve unsat for target {sorted(t.change)}"
            )
        regions = regions ^ out.regions
        total |= t.change
    return WitnessPlan("unknottable", frozenset(total), care, (), regions)
