"""Diagram data model: a combinatorial map on the sphere.

A diagram is a set of nodes (vertices and 4-valent crossings), each with a
counterclockwise cyclic sequence of half-edge labels, plus arcs pairing the
half-edges.  Faces, strands, the abstract multigraph and crossing
classification are all derived from the rotation system.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import networkx as nx

from .errors import (
    DanglingHalfEdge,
    MalformedCrossing,
    NonSpherical,
    UnknownCrossing,
)

VERTEX = "vertex"
CROSSING = "crossing"


@dataclass(frozen=True)
class Node:
    """A vertex (any degree >= 1) or a crossing (exactly 4 slots).

    ``slots`` lists half-edge labels counterclockwise.  For crossings,
    slots 0,2 carry one strand and slots 1,3 the other; ``over`` is True
    when the (0,2)-strand passes over.
    """

    id: str
    kind: str
    slots: tuple
    over: Optional[bool] = None

    def is_crossing(self) -> bool:
        return self.kind == CROSSING

    @property
    def degree(self) -> int:
        return len(self.slots)


@dataclass(frozen=True)
class Arc:
    """An edge segment between two node slots; ends are unordered."""

    id: str
    ends: tuple

    def other(self, he: str) -> str:
        a, b = self.ends
        return b if he == a else a


@dataclass(frozen=True)
class Face:
    """A region of the diagram.

    ``corners`` are (node id, gap index) pairs in traversal order, where gap
    ``i`` is the sector between slot ``i`` and slot ``i+1``.  A face merged
    from several shadow components concatenates one cycle per component.
    ``darts`` are the half-edges whose right side borders this face.
    """

    id: str
    corners: tuple
    crossings_on_boundary: frozenset
    darts: frozenset


@dataclass(frozen=True)
class Strand:
    """A maximal chain of arcs passing straight through crossings.

    Strands terminate at vertices of any degree; a closed strand meets no
    vertex at all.  ``darts`` lists the half-edges in canonical traversal
    order (each dart is the departing half-edge of one arc); ``passes`` are
    (crossing id, in slot, out slot) triples for the canonical direction.
    """

    id: str
    arcs: tuple
    darts: tuple
    endpoints: Optional[tuple]  # ((vertex, slot), (vertex, slot)) or None if closed
    passes: tuple

    @property
    def closed(self) -> bool:
        return self.endpoints is None


@dataclass(frozen=True)
class CrossingClass:
    crossing: str
    self_crossing: bool
    components: tuple  # (comp, comp); equal for self-crossings
    reducible: bool


@dataclass(frozen=True)
class AbstractGraph:
    """The underlying multigraph: vertices joined by open strands, plus loops."""

    vertices: tuple
    edges: tuple  # open Strands
    loops: tuple  # closed Strands
    degree: dict  # vertex id -> slot count
    component_of: dict  # vertex id / strand id -> component key
    components: tuple  # component keys, sorted


class Diagram:
    """Validated immutable diagram; all derived data is computed lazily."""

    def __init__(self, nodes: dict, arcs: dict):
        self.nodes = nodes
        self.arcs = arcs
        # half-edge -> (node id, slot index)
        self.he_node = {}
        for n in nodes.values():
            for i, h in enumerate(n.slots):
                self.he_node[h] = (n.id, i)
        # half-edge -> arc id
        self.he_arc = {}
        for a in arcs.values():
            for h in a.ends:
                self.he_arc[h] = a.id
        self._faces = None
        self._dart_face = None
        self._strands = None
        self._graph = None
        self._shadow = None

    # -- basic navigation ---------------------------------------------------

    def mate(self, he: str) -> str:
        return self.arcs[self.he_arc[he]].other(he)

    def rot_next(self, he: str) -> str:
        nid, i = self.he_node[he]
        slots = self.nodes[nid].slots
        return slots[(i + 1) % len(slots)]

    def face_next(self, he: str) -> str:
        """Follow dart ``he`` to its far end, then turn to the next slot CCW."""
        return self.rot_next(self.mate(he))

    # -- shadow components ----------------------------------------------------

    def shadow_components(self) -> dict:
        """Connected components of nodes+arcs; node id -> component index."""
        if self._shadow is None:
            parent = {nid: nid for nid in self.nodes}

            def find(x):
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            for a in self.arcs.values():
                r1 = find(self.he_node[a.ends[0]][0])
                r2 = find(self.he_node[a.ends[1]][0])
                if r1 != r2:
                    parent[r1] = r2
            roots = sorted({find(n) for n in self.nodes})
            index = {r: i for i, r in enumerate(roots)}
            self._shadow = {n: index[find(n)] for n in self.nodes}
        return self._shadow

    # -- faces ----------------------------------------------------------------

    def _face_orbits(self):
        seen = set()
        orbits = []
        for start in sorted(self.he_node):
            if start in seen:
                continue
            orbit = []
            corners = []
            h = start
            while True:
                seen.add(h)
                orbit.append(h)
                m = self.mate(h)
                nid, j = self.he_node[m]
                corners.append((nid, j))
                h = self.face_next(h)
                if h == start:
                    break
            orbits.append((orbit, corners))
        return orbits

    def faces(self) -> tuple:
        if self._faces is not None:
            return self._faces
        orbits = self._face_orbits()
        shadow = self.shadow_components()
        ncomp = len(set(shadow.values())) if shadow else 0
        groups = []
        if ncomp > 1:
            # Deterministic placement of split shadow components on one
            # sphere: each component's face holding its smallest corner is
            # merged into a single common region (side-by-side placement).
            anchor_corner = {}
            for orbit, corners in orbits:
                comp = shadow[corners[0][0]]
                lo = min(corners)
                if comp not in anchor_corner or lo < anchor_corner[comp][0]:
                    anchor_corner[comp] = (lo, id(orbit))
            anchors = []
            rest = []
            for orbit, corners in orbits:
                comp = shadow[corners[0][0]]
                if anchor_corner[comp][1] == id(orbit):
                    anchors.append((orbit, corners))
                else:
                    rest.append((orbit, corners))
            anchors.sort(key=lambda oc: min(oc[1]))
            merged_orbit = []
            merged_corners = []
            for orbit, corners in anchors:
                merged_orbit.extend(orbit)
                merged_corners.extend(corners)
            groups = [(merged_orbit, merged_corners)] + rest
        else:
            groups = orbits
        groups.sort(key=lambda oc: min(oc[1]))
        faces = []
        dart_face = {}
        for k, (orbit, corners) in enumerate(groups):
            fid = f"f{k}"
            xings = frozenset(
                nid for nid, _ in corners if self.nodes[nid].is_crossing()
            )
            faces.append(Face(fid, tuple(corners), xings, frozenset(orbit)))
            for h in orbit:
                dart_face[h] = fid
        self._faces = tuple(faces)
        self._dart_face = dart_face
        return self._faces

    def face_of_dart(self, he: str) -> str:
        """Face on the right-hand side of dart ``he``."""
        self.faces()
        return self._dart_face[he]

    def face_by_id(self, fid: str) -> Face:
        for f in self.faces():
            if f.id == fid:
                return f
        raise KeyError(fid)

    # -- strands ----------------------------------------------------------------

    def _trace(self, start: str):
        """Walk from dart ``start`` until a vertex is reached or we loop."""
        darts = []
        passes = []
        h = start
        while True:
            darts.append(h)
            m = self.mate(h)
            nid, j = self.he_node[m]
            node = self.nodes[nid]
            if node.is_crossing():
                out = (j + 2) % 4
                passes.append((nid, j, out))
                h = node.slots[out]
                if h == start:
                    return darts, passes, None
            else:
                return darts, passes, (nid, j)

    def strands(self) -> tuple:
        if self._strands is not None:
            return self._strands
        used = set()
        raw = []
        # open strands start at vertex slots
        for nid in sorted(self.nodes):
            node = self.nodes[nid]
            if node.is_crossing():
                continue
            for i, h in enumerate(node.slots):
                if h in used:
                    continue
                darts, passes, end = self._trace(h)
                for d in darts:
                    used.add(d)
                    used.add(self.mate(d))
                raw.append((darts, passes, (nid, i), end))
        # remaining arcs belong to closed strands
        for aid in sorted(self.arcs):
            h = self.arcs[aid].ends[0]
            if h in used:
                continue
            darts, passes, end = self._trace(h)
            for d in darts:
                used.add(d)
                used.add(self.mate(d))
            raw.append((darts, passes, None, end))
        strands = []
        for darts, passes, start, end in raw:
            if start is None:
                strands.append(self._canonical_closed(darts))
            else:
                strands.append(self._canonical_open(darts, passes, start, end))
        strands.sort(key=lambda s: s.id)
        self._strands = tuple(strands)
        return self._strands

    def _canonical_open(self, darts, passes, start, end) -> Strand:
        if end < start:
            darts, passes, start, end = self._reverse(darts), self._reverse_passes(passes), end, start
        arcs = tuple(self.he_arc[d] for d in darts)
        return Strand(f"s_{min(arcs)}", arcs, tuple(darts), (start, end), tuple(passes))

    def _canonical_closed(self, darts) -> Strand:
        arcs = [self.he_arc[d] for d in darts]
        lo = min(arcs)
        i = arcs.index(lo)
        rot = darts[i:] + darts[:i]
        a, b = self.arcs[lo].ends
        if rot[0] != min(a, b):
            rot = self._reverse(rot)
            arcs2 = [self.he_arc[d] for d in rot]
            i = arcs2.index(lo)
            rot = rot[i:] + rot[:i]
        darts = rot
        passes = []
        for d in darts:
            m = self.mate(d)
            nid, j = self.he_node[m]
            passes.append((nid, j, (j + 2) % 4))
        arcs = tuple(self.he_arc[d] for d in darts)
        return Strand(f"s_{lo}", arcs, tuple(darts), None, tuple(passes))

    def _reverse(self, darts):
        return [self.mate(d) for d in reversed(darts)]

    def _reverse_passes(self, passes):
        return [(c, o, i) for (c, i, o) in reversed(passes)]

    # -- abstract graph -----------------------------------------------------------

    def abstract_graph(self) -> AbstractGraph:
        if self._graph is not None:
            return self._graph
        strands = self.strands()
        vertices = tuple(sorted(n.id for n in self.nodes.values() if not n.is_crossing()))
        edges = tuple(s for s in strands if not s.closed)
        loops = tuple(s for s in strands if s.closed)
        parent = {v: v for v in vertices}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for s in edges:
            u = s.endpoints[0][0]
            v = s.endpoints[1][0]
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
        comp_members = {}
        for v in vertices:
            comp_members.setdefault(find(v), []).append(v)
        component_of = {}
        keys = []
        for root, members in comp_members.items():
            arc_ids = []
            for s in edges:
                if find(s.endpoints[0][0]) == root:
                    arc_ids.extend(s.arcs)
            key = min(min(members), min(arc_ids) if arc_ids else min(members))
            keys.append(key)
            for v in members:
                component_of[v] = key
            for s in edges:
                if find(s.endpoints[0][0]) == root:
                    component_of[s.id] = key
        for s in loops:
            key = min(s.arcs)
            keys.append(key)
            component_of[s.id] = key
        degree = {
            n.id: len(n.slots) for n in self.nodes.values() if not n.is_crossing()
        }
        self._graph = AbstractGraph(
            vertices, edges, loops, degree, component_of, tuple(sorted(keys))
        )
        return self._graph

    # -- crossing helpers -----------------------------------------------------------

    def crossing_ids(self) -> list:
        return sorted(n.id for n in self.nodes.values() if n.is_crossing())

    def crossing_passes(self) -> dict:
        """crossing id -> {0: (strand, in_slot), 1: (strand, in_slot)}.

        Pass p occupies slots (p, p+2); in_slot is for the strand's canonical
        direction.
        """
        result = {c: {} for c in self.crossing_ids()}
        for s in self.strands():
            for (c, i, o) in s.passes:
                result[c][i % 2] = (s.id, i)
        return result

    def strand_component(self) -> dict:
        g = self.abstract_graph()
        return {s.id: g.component_of[s.id] for s in self.strands()}


def build_diagram(nodes: Iterable[Node], arcs: Iterable[Arc]) -> Diagram:
    """Validate and assemble a diagram; raises on structural defects."""
    node_map = {}
    for n in nodes:
        if n.id in node_map:
            raise DanglingHalfEdge(f"duplicate node id {n.id}")
        if n.is_crossing() and len(n.slots) != 4:
            raise MalformedCrossing(f"crossing {n.id} has {len(n.slots)} slots")
        if not n.is_crossing() and len(n.slots) < 1:
            raise MalformedCrossing(f"vertex {n.id} has no slots")
        node_map[n.id] = n
    arc_map = {}
    for a in arcs:
        if a.id in arc_map:
            raise DanglingHalfEdge(f"duplicate arc id {a.id}")
        if len(a.ends) != 2 or a.ends[0] == a.ends[1]:
            raise DanglingHalfEdge(f"arc {a.id} must join two distinct half-edges")
        arc_map[a.id] = a
    slot_count = {}
    for n in node_map.values():
        for h in n.slots:
            slot_count[h] = slot_count.get(h, 0) + 1
    end_count = {}
    for a in arc_map.values():
        for h in a.ends:
            end_count[h] = end_count.get(h, 0) + 1
    for h, c in slot_count.items():
        if c != 1:
            raise DanglingHalfEdge(f"half-edge {h} appears {c} times in node slots")
        if end_count.get(h, 0) != 1:
            raise DanglingHalfEdge(f"half-edge {h} not matched by exactly one arc")
    for h in end_count:
        if h not in slot_count:
            raise DanglingHalfEdge(f"half-edge {h} has no node slot")
    d = Diagram(node_map, arc_map)
    v = len(node_map)
    e = len(arc_map)
    if v == 0:
        if e:
            raise DanglingHalfEdge("arcs without nodes")
        return d
    f = len(d.faces())
    c = len(set(d.shadow_components().values()))
    defect = v - e + f - 1 - c
    if defect != 0:
        raise NonSpherical(defect)
    return d


def faces(d: Diagram) -> tuple:
    return d.faces()


def strands(d: Diagram) -> tuple:
    return d.strands()


def abstract_graph(d: Diagram) -> AbstractGraph:
    return d.abstract_graph()


def component_order(g: AbstractGraph) -> tuple:
    """Components ordered by their smallest member id (vertex, else arc)."""
    return g.components


def classify_crossing(d: Diagram, c: str) -> CrossingClass:
    if c not in d.nodes or not d.nodes[c].is_crossing():
        raise UnknownCrossing(c)
    passes = d.crossing_passes()[c]
    comp = d.strand_component()
    c0 = comp[passes[0][0]]
    c1 = comp[passes[1][0]]
    reducible = False
    for f in d.faces():
        gaps = {g for (n, g) in f.corners if n == c}
        if {0, 2} <= gaps or {1, 3} <= gaps:
            reducible = True
            break
    return CrossingClass(c, c0 == c1, (min(c0, c1), max(c0, c1)), reducible)


def is_planar_abstract(g: AbstractGraph) -> bool:
    """Planarity of the abstract multigraph (loops and multi-edges dropped)."""
    gr = nx.Graph()
    gr.add_nodes_from(g.vertices)
    for s in g.edges:
        u = s.endpoints[0][0]
        v = s.endpoints[1][0]
        if u != v:
            gr.add_edge(u, v)
    ok, _ = nx.check_planarity(gr)
    return ok
