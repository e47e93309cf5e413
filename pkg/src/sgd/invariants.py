"""Eulerian orientations, crossing signs, linking and warping matrices."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .core import AbstractGraph, Diagram
from .errors import NotEulerian, OddInterCrossingParity


@dataclass(frozen=True)
class EulerianCheck:
    eulerian: bool
    per_component: dict  # component key -> bool
    v_odd: dict  # component key -> tuple of odd-degree vertex ids


@dataclass(frozen=True)
class EulerianOrientation:
    """Direction per strand: True means the strand's canonical direction."""

    direction: dict  # strand id -> bool


@dataclass(frozen=True)
class LinkingMatrix:
    order: tuple  # component keys
    lk: dict  # (comp_i, comp_j) unordered -> int

    def entry(self, ci, cj) -> int:
        if ci == cj:
            return 0
        return self.lk.get((min(ci, cj), max(ci, cj)), 0)

    def row_sum(self, ci) -> int:
        return sum(self.entry(ci, cj) for cj in self.order if cj != ci)

    def as_rows(self):
        return [[self.entry(ci, cj) for cj in self.order] for ci in self.order]


@dataclass(frozen=True)
class WarpingMatrix:
    order: tuple
    w: dict  # (i, j) with order positions i < j -> count

    def entry(self, i: int, j: int) -> int:
        return self.w.get((i, j), 0)

    def all_zero(self) -> bool:
        return all(v == 0 for v in self.w.values())


def eulerian_check(g: AbstractGraph) -> EulerianCheck:
    """Per-component even-degree check; loops are vacuously Eulerian."""
    per = {}
    v_odd = {}
    for comp in g.components:
        odd = tuple(
            sorted(v for v in g.vertices if g.component_of[v] == comp and g.degree[v] % 2)
        )
        per[comp] = not odd
        v_odd[comp] = odd
    return EulerianCheck(all(per.values()), per, v_odd)


def eulerian_orientation(g: AbstractGraph, rng: random.Random | None = None) -> EulerianOrientation:
    """Orient every strand so indegree equals outdegree at each vertex.

    Found by an Eulerian-circuit walk per component (Hierholzer); loops get
    their canonical direction.  Passing an ``rng`` shuffles the traversal
    order to sample different valid orientations.
    """
    check = eulerian_check(g)
    for comp, ok in check.per_component.items():
        if not ok:
            raise NotEulerian(comp, check.v_odd[comp])
    direction = {}
    for s in g.loops:
        direction[s.id] = True if rng is None else bool(rng.getrandbits(1))
    adj = {}
    for s in g.edges:
        u = s.endpoints[0][0]
        v = s.endpoints[1][0]
        adj.setdefault(u, []).append((s.id, True))  # leave u = canonical direction
        adj.setdefault(v, []).append((s.id, False))
    for lst in adj.values():
        lst.sort()
        if rng is not None:
            rng.shuffle(lst)
    used = set()
    for start in sorted(adj):
        if all(sid in used for sid, _ in adj[start]):
            continue
        # Hierholzer with explicit stack; orientation = direction of traversal.
        stack = [start]
        ptr = {v: 0 for v in adj}
        while stack:
            v = stack[-1]
            advanced = False
            while ptr[v] < len(adj[v]):
                sid, canon = adj[v][ptr[v]]
                ptr[v] += 1
                if sid in used:
                    continue
                used.add(sid)
                direction[sid] = canon
                strand = next(s for s in g.edges if s.id == sid)
                other = strand.endpoints[1][0] if canon else strand.endpoints[0][0]
                stack.append(other)
                advanced = True
                break
            if not advanced:
                stack.pop()
    return EulerianOrientation(direction)


def _pass_in_slots(d: Diagram, o: EulerianOrientation, c: str) -> dict:
    """For crossing ``c``: pass parity (0 or 1) -> oriented in-slot."""
    passes = d.crossing_passes()[c]
    result = {}
    for parity, (sid, in_slot) in passes.items():
        if o.direction[sid]:
            result[parity] = in_slot
        else:
            result[parity] = (in_slot + 2) % 4
    return result


def crossing_sign(d: Diagram, o: EulerianOrientation, c: str) -> int:
    """+1 when the oriented under-strand enters one slot counterclockwise
    from the oriented over-strand's entry; -1 otherwise.

    The convention is anchored so the standard positive Hopf clasp has
    lk = +1.
    """
    node = d.nodes[c]
    ins = _pass_in_slots(d, o, c)
    over_parity = 0 if node.over else 1
    over_in = ins[over_parity]
    under_in = ins[1 - over_parity]
    return 1 if under_in == (over_in + 1) % 4 else -1


def linking_matrix(d: Diagram, o: EulerianOrientation, order: tuple) -> LinkingMatrix:
    comp = d.strand_component()
    sums = {}
    counts = {}
    for c in d.crossing_ids():
        passes = d.crossing_passes()[c]
        c0 = comp[passes[0][0]]
        c1 = comp[passes[1][0]]
        if c0 == c1:
            continue
        key = (min(c0, c1), max(c0, c1))
        sums[key] = sums.get(key, 0) + crossing_sign(d, o, c)
        counts[key] = counts.get(key, 0) + 1
    lk = {}
    for key, total in sums.items():
        if counts[key] % 2:
            raise OddInterCrossingParity(f"{counts[key]} crossings between {key}")
        lk[key] = total // 2
    return LinkingMatrix(tuple(order), lk)


def is_proper(m: LinkingMatrix):
    """All row sums even; returns (flag, offending component list)."""
    offending = [ci for ci in m.order if m.row_sum(ci) % 2]
    return not offending, tuple(offending)


def warping_matrix(d: Diagram, order: tuple) -> WarpingMatrix:
    """w(i, j) for i < j: crossings where component j passes over component i."""
    comp = d.strand_component()
    pos = {ck: i for i, ck in enumerate(order)}
    w = {}
    for i in range(len(order)):
        for j in range(i + 1, len(order)):
            w[(i, j)] = 0
    for c in d.crossing_ids():
        node = d.nodes[c]
        passes = d.crossing_passes()[c]
        c0 = comp[passes[0][0]]
        c1 = comp[passes[1][0]]
        if c0 == c1:
            continue
        over_comp = c0 if node.over else c1
        under_comp = c1 if node.over else c0
        i, j = pos[under_comp], pos[over_comp]
        if j > i:  # the later-ordered component is on top
            w[(i, j)] += 1
    return WarpingMatrix(tuple(order), w)
