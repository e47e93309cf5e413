"""Diagram transformations: crossing changes, region crossing changes,
vertex splitting and knotification, spur insertion with its region
bookkeeping, the far-crossing gadget, and structural retraction.

The spur of ``c P v`` is threaded as a corridor straddling the path P: an
arc of the transversal strand at c is rerouted alongside P, around the odd
vertex v, and back, crossing each side germ once per side, every germ at v
once, and finally wrapping behind c across its two rear germs.  All walk
bookkeeping (chamber groups between consecutive vertex-germ crossings,
symmetric differences, gate pairing) hangs off that corridor walk.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .core import CROSSING, VERTEX, Arc, Diagram, Node, build_diagram
from .errors import (
    CrossingOnSameComponent,
    EvenTerminalVertex,
    NonContiguousPairing,
    NotConnected,
    NotEulerian,
    NotRetractable,
    OddInteriorVertex,
    PathNotIncident,
    SgdError,
    UnknownCrossing,
    UnknownFace,
    UnknownVertex,
)


# ---------------------------------------------------------------------------
# Elementary moves
# ---------------------------------------------------------------------------


def apply_crossing_changes(d: Diagram, targets) -> Diagram:
    """Toggle the over flag at exactly the given crossings."""
    targets = set(targets)
    for c in targets:
        if c not in d.nodes or not d.nodes[c].is_crossing():
            raise UnknownCrossing(c)
    nodes = {}
    for nid, n in d.nodes.items():
        if nid in targets:
            nodes[nid] = Node(nid, CROSSING, n.slots, over=not n.over)
        else:
            nodes[nid] = n
    return Diagram(nodes, dict(d.arcs))


def region_target(d: Diagram, region_ids) -> frozenset:
    """Crossings changed by a region crossing change at the given faces:
    the GF(2) sum of the boundary sets."""
    by_id = {f.id: f for f in d.faces()}
    acc = frozenset()
    for fid in set(region_ids):
        if fid not in by_id:
            raise UnknownFace(fid)
        acc = acc ^ by_id[fid].crossings_on_boundary
    return acc


def apply_region_set(d: Diagram, region_ids) -> Diagram:
    return apply_crossing_changes(d, region_target(d, region_ids))


# ---------------------------------------------------------------------------
# Vertex splitting and knotification
# ---------------------------------------------------------------------------


def _contiguous(indices, degree) -> Optional[tuple]:
    """Return the indices as a cyclic run, or None if not contiguous."""
    k = len(indices)
    idx = set(indices)
    for start in indices:
        run = [(start + j) % degree for j in range(k)]
        if set(run) == idx:
            return tuple(run)
    return None


def vertex_split(d: Diagram, v: str, pairing):
    """Replace vertex ``v`` by two vertices carrying the two slot groups.

    ``pairing`` is a pair of slot-index groups; each group must be a
    nonempty cyclically contiguous run so the local disk replacement creates
    no crossings.  Returns (diagram, face correspondence old id -> new id).
    """
    if v not in d.nodes or d.nodes[v].is_crossing():
        raise UnknownVertex(v)
    node = d.nodes[v]
    deg = node.degree
    ga, gb = pairing
    if not ga or not gb or set(ga) | set(gb) != set(range(deg)) or set(ga) & set(gb):
        raise NonContiguousPairing(f"{pairing} is not a partition of {deg} slots")
    run_a = _contiguous(tuple(ga), deg)
    run_b = _contiguous(tuple(gb), deg)
    if run_a is None or run_b is None:
        raise NonContiguousPairing(f"{pairing} has a non-contiguous group")
    va, vb = _fresh_split_ids(d, v)
    nodes = dict(d.nodes)
    del nodes[v]
    nodes[va] = Node(va, VERTEX, tuple(node.slots[i] for i in run_a))
    nodes[vb] = Node(vb, VERTEX, tuple(node.slots[i] for i in run_b))
    out = build_diagram(nodes.values(), d.arcs.values())
    corr = _split_face_correspondence(d, out, v, va, vb, run_a, run_b)
    return out, corr


def _fresh_split_ids(d: Diagram, v: str):
    va, vb = v + "a", v + "b"
    while va in d.nodes or vb in d.nodes:
        va += "a"
        vb += "b"
    return va, vb


def _split_face_correspondence(d, out, v, va, vb, run_a, run_b):
    def map_corner(corner):
        nid, gap = corner
        if nid != v:
            return corner
        for name, run in ((va, run_a), (vb, run_b)):
            for j in range(len(run) - 1):
                if run[j] == gap and run[(j + 1)] == (gap + 1) % len(run_a + run_b):
                    return (name, j)
        return None  # one of the two boundary gaps

    new_face_of = {}
    for f in out.faces():
        for corner in f.corners:
            new_face_of[corner] = f.id
    wrap_a = new_face_of[(va, len(run_a) - 1)] if len(run_a) >= 1 else None
    corr = {}
    for f in d.faces():
        hits = set()
        for corner in f.corners:
            mc = map_corner(corner)
            if mc is not None:
                hits.add(new_face_of[mc])
        if hits:
            corr[f.id] = min(hits)
        else:
            corr[f.id] = wrap_a
    return corr


def knotify(d: Diagram, comp):
    """Split vertices of one connected Eulerian component, keeping it
    connected, until every vertex in it has degree two.

    Returns (diagram, accumulated face correspondence).  The crossing set is
    untouched, so crossing-level targets pull back along the identity.
    """
    g = d.abstract_graph()
    if comp not in g.components:
        raise NotConnected(f"unknown component {comp}")
    odd = [x for x in g.vertices if g.component_of[x] == comp and g.degree[x] % 2]
    if odd:
        raise NotEulerian(comp, odd)
    cur = d
    corr = {f.id: f.id for f in d.faces()}
    while True:
        g = cur.abstract_graph()
        comp_now = _descended_component(g, comp)
        big = sorted(
            x for x in g.vertices if g.component_of[x] == comp_now and g.degree[x] >= 4
        )
        if not big:
            return cur, corr
        v = big[0]
        deg = cur.nodes[v].degree
        n_before = len(cur.abstract_graph().components)
        done = False
        for i in range(deg):
            ga = ((i, (i + 1) % deg), tuple((i + 1 + j) % deg for j in range(1, deg - 1)))
            nxt, step = vertex_split(cur, v, ga)
            if len(nxt.abstract_graph().components) == n_before:
                cur = nxt
                corr = {old: step[mid] for old, mid in corr.items()}
                done = True
                break
        if not done:  # the dichotomy lemma guarantees a connected choice
            raise NotConnected(f"no connectivity-preserving split at {v}")


def _descended_component(g, comp):
    """Component keys can change as splitting renames vertices; re-resolve by
    membership when the original key disappeared."""
    if comp in g.components:
        return comp
    for v in g.vertices:
        if v.startswith(comp):
            return g.component_of[v]
    for s in list(g.edges) + list(g.loops):
        if comp in s.arcs:
            return g.component_of[s.id]
    candidates = [k for k in g.components if k.startswith(comp)]
    if candidates:
        return candidates[0]
    raise NotConnected(f"lost track of component {comp}")


# ---------------------------------------------------------------------------
# Spur insertion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Hop:
    """One wall crossing of the corridor: the spur strand crossing the arc
    attached at ``germ``.  ``kind``: side | tip | gate | anchor0 | anchor1."""

    xid: str
    germ: str
    kind: str
    pair: Optional[tuple] = None  # gate pairing key


@dataclass(frozen=True)
class SpurRecord:
    crossing: str
    path: tuple
    vertex: str
    alpha_he: str
    sigma: int
    level: bool
    original_over: bool
    hops: tuple  # Hop, in walk order
    segments: tuple  # (arc id, forward dart) in walk order
    q_groups: tuple  # face-id frozensets, groups 1..l between separators
    region_set: frozenset
    new_nodes: frozenset
    new_arcs: frozenset
    destroyed_arcs: tuple  # Arc objects to restore
    ancestor_map: dict  # new face id -> old face id


@dataclass(frozen=True)
class GadgetRecord:
    crossing: str
    v1: str
    v2: str
    base_path: tuple
    ends: tuple  # (c^1, c^2) crossing ids
    mids: tuple
    region_adjacent: frozenset  # tracked R_i on the final diagram
    bight: SpurRecord  # reuses the spur record shape minus anchors/toggle
    spur1: SpurRecord
    spur2: SpurRecord
    region_set: frozenset  # composite for this gadget on the final diagram
    ancestor_map: dict


class _State:
    """Mutable node/arc dictionaries while a corridor is threaded."""

    def __init__(self, d: Diagram):
        self.nodes = dict(d.nodes)
        self.arcs = dict(d.arcs)
        self.he_arc = dict(d.he_arc)
        self.created_nodes = []
        self.created_arcs = []
        self.destroyed = []

    def remove_arc(self, aid):
        arc = self.arcs.pop(aid)
        for h in arc.ends:
            del self.he_arc[h]
        self.destroyed.append(arc)
        return arc

    def add_arc(self, aid, h1, h2):
        arc = Arc(aid, (h1, h2))
        self.arcs[aid] = arc
        self.he_arc[h1] = aid
        self.he_arc[h2] = aid
        self.created_arcs.append(aid)
        return arc

    def add_crossing(self, xid, slots, over):
        self.nodes[xid] = Node(xid, CROSSING, tuple(slots), over=over)
        self.created_nodes.append(xid)

    def build(self) -> Diagram:
        return build_diagram(self.nodes.values(), self.arcs.values())


def _path_nodes(d: Diagram, path):
    """Nodes entered by each dart of the walk; validates continuity."""
    seq = []
    for i, dart in enumerate(path):
        if dart not in d.he_node:
            raise PathNotIncident(f"unknown half-edge {dart}")
        if i:
            prev_far = d.he_node[d.mate(path[i - 1])][0]
            if d.he_node[dart][0] != prev_far:
                raise PathNotIncident(f"dart {dart} does not continue the walk")
        seq.append(d.he_node[d.mate(dart)][0])
    return seq


def _side_germs(node, j_in, j_out, sigma):
    """Side germs crossed by the rail on side ``sigma`` of the forward walk,
    in the order the forward rail meets them."""
    deg = node.degree
    out = []
    k = 1
    while True:
        idx = (j_in - sigma * k) % deg
        if idx == j_out:
            break
        out.append(idx)
        k += 1
    return out


def _analyze_spur(d: Diagram, c: str, path, v: str):
    """Choose alpha, validate the path, and produce the ordered hop plan."""
    if c not in d.nodes or not d.nodes[c].is_crossing():
        raise UnknownCrossing(c)
    if not path:
        raise PathNotIncident("empty path")
    if d.he_node[path[0]][0] != c:
        raise PathNotIncident(f"path does not start at {c}")
    entered = _path_nodes(d, path)
    if entered[-1] != v:
        raise PathNotIncident(f"path does not end at {v}")
    vnode = d.nodes[v]
    if vnode.is_crossing():
        raise PathNotIncident(f"{v} is not a vertex")
    if vnode.degree % 2 == 0:
        raise EvenTerminalVertex(v)
    seen_vertices = set()
    for i in range(len(path) - 1):
        n = d.nodes[entered[i]]
        j_in = d.he_node[d.mate(path[i])][1]
        j_out = d.he_node[path[i + 1]][1]
        if n.is_crossing():
            if j_out != (j_in + 2) % 4:
                raise PathNotIncident(f"walk must pass straight through {n.id}")
        else:
            if n.degree % 2:
                raise OddInteriorVertex(n.id)
            if n.id == v or n.id in seen_vertices:
                raise PathNotIncident(f"walk revisits vertex {n.id}")
            seen_vertices.add(n.id)
            if j_out == j_in:
                raise PathNotIncident(f"walk reverses at {n.id}")
    s_p = d.he_node[path[0]][1]
    cnode = d.nodes[c]
    path_arcs = {d.he_arc[h] for h in path}
    candidates = []
    for s_alpha in ((s_p + 1) % 4, (s_p + 3) % 4):
        he = cnode.slots[s_alpha]
        if d.he_arc[he] not in path_arcs:
            candidates.append((d.he_arc[he], s_alpha, he))
    if not candidates:
        raise PathNotIncident("no admissible arc at the crossing")
    candidates.sort()
    _, s_alpha, alpha_he = candidates[0]
    sigma = 1 if s_alpha == (s_p + 1) % 4 else -1
    alpha_parity = s_alpha % 2
    level = cnode.over if alpha_parity == 0 else not cnode.over

    plan = []  # (germ half-edge, kind, pair key)
    # forward rail on side sigma
    for i in range(len(path) - 1):
        n = d.nodes[entered[i]]
        j_in = d.he_node[d.mate(path[i])][1]
        j_out = d.he_node[path[i + 1]][1]
        kind = "gate" if n.is_crossing() else "side"
        for idx in _side_germs(n, j_in, j_out, sigma):
            pair = ("g", i, idx, (j_in + j_out)) if kind == "gate" else None
            pair = ("g", i) if kind == "gate" else None
            plan.append((n.slots[idx], kind, pair))
    # tip around v
    j_in = d.he_node[d.mate(path[-1])][1]
    deg = vnode.degree
    for k in range(1, deg):
        idx = (j_in - sigma * k) % deg
        plan.append((vnode.slots[idx], "tip", None))
    # return rail on side -sigma, walked backward
    for i in range(len(path) - 2, -1, -1):
        n = d.nodes[entered[i]]
        j_in = d.he_node[d.mate(path[i])][1]
        j_out = d.he_node[path[i + 1]][1]
        kind = "gate" if n.is_crossing() else "side"
        for idx in reversed(_side_germs(n, j_in, j_out, -sigma)):
            pair = ("g", i) if kind == "gate" else None
            plan.append((n.slots[idx], kind, pair))
    # mouth wrap behind c
    plan.append((cnode.slots[(s_p - sigma) % 4], "anchor0", None))
    plan.append((cnode.slots[(s_p + 2) % 4], "anchor1", None))
    return alpha_he, sigma, level, plan


def _thread(state: _State, start_he, end_he, plan, sigma, level, prefix):
    """Thread the corridor strand from ``start_he`` to ``end_he`` performing
    every hop in order.  Returns (hops, segments)."""
    g_is_right = sigma == 1
    dangling = start_he
    hops = []
    segments = []
    deferred = None  # (gn, fn) germ ends waiting for the final wiring
    counter = iter(range(10 ** 6))

    def fresh_arc():
        return f"{prefix}a{next(counter)}"

    for k, (germ, kind, pair) in enumerate(plan):
        xid = f"{prefix}w{k}"
        si, gn, so, fn = f"{xid}i", f"{xid}n", f"{xid}o", f"{xid}f"
        slots = (si, gn, so, fn) if g_is_right else (si, fn, so, gn)
        state.add_crossing(xid, slots, over=level)
        if germ in state.he_arc:
            old = state.remove_arc(state.he_arc[germ])
            far = old.other(germ)
            state.add_arc(fresh_arc(), germ, gn)
            state.add_arc(fresh_arc(), fn, far)
        else:
            if deferred is not None or germ != end_he:
                raise PathNotIncident(f"germ {germ} has no arc to cross")
            deferred = (xid, gn, fn)
        aid = fresh_arc()
        state.add_arc(aid, dangling, si)
        segments.append((aid, dangling))
        dangling = so
        hops.append(Hop(xid, germ, kind, pair))
    aid = fresh_arc()
    if deferred is None:
        state.add_arc(aid, dangling, end_he)
        segments.append((aid, dangling))
    else:
        _, gn, fn = deferred
        state.add_arc(aid, dangling, fn)
        segments.append((aid, dangling))
        state.add_arc(fresh_arc(), gn, end_he)
    return tuple(hops), tuple(segments)


def _ancestors(old: Diagram, new: Diagram, segments, stub_arcs):
    """Map every face of ``new`` to the face of ``old`` it subdivides.

    Faces holding surviving corners inherit from those; corner-free pieces
    are joined to their ancestor across corridor-strand arcs (both sides of
    a corridor segment lie in the face the segment passes through).
    """
    old_face_of_corner = {}
    for f in old.faces():
        for corner in f.corners:
            old_face_of_corner[corner] = f.id
    anc = {}
    for f in new.faces():
        hits = {old_face_of_corner[c] for c in f.corners if c in old_face_of_corner}
        if hits:
            anc[f.id] = min(hits)
    corridor = {aid for aid, _ in segments}
    changed = True
    while changed:
        changed = False
        for aid in corridor:
            if aid not in new.arcs:
                continue
            h1, h2 = new.arcs[aid].ends
            f1 = new.face_of_dart(h1)
            f2 = new.face_of_dart(h2)
            for a, b in ((f1, f2), (f2, f1)):
                if a in anc and b not in anc:
                    anc[b] = anc[a]
                    changed = True
    for f in new.faces():
        if f.id not in anc:
            raise SgdError(f"face {f.id} has no ancestor")
    return anc


def _chambers(new: Diagram, segments, sigma):
    """Pocket-side face per corridor segment, in walk order."""
    out = []
    for aid, dart in segments:
        h = dart if sigma == 1 else new.mate(dart)
        out.append(new.face_of_dart(h))
    return out


def _q_groups(hops, chambers):
    """Chamber groups between consecutive separator hops (cyclic walk).

    Group i (1-based) collects the chambers strictly between separators i
    and i+1; group l wraps through the walk start and holds the mouth.  A
    chamber met twice inside a group cancels (symmetric difference).
    """
    seps = [i for i, h in enumerate(hops) if h.kind in ("side", "tip")]
    l = len(seps)
    if l == 0:
        return (), frozenset()
    assert l % 2 == 0, "vertex-germ crossings must come in even count"
    groups = [frozenset() for _ in range(l)]
    # segment k lies after hop k-1 and before hop k (segment 0 before hop 0)
    for k, fid in enumerate(chambers):
        passed = sum(1 for s in seps if s < k)
        gi = (passed - 1) % l  # 0-based: group between separator gi+1 and gi+2
        groups[gi] = groups[gi] ^ frozenset([fid])
    region = frozenset()
    for gi in range(0, l, 2):  # groups 1, 3, ..., l-1 in 1-based indexing
        region = region ^ groups[gi]
    return tuple(groups), region


def spur_insert(d: Diagram, c: str, path, v: str, prefix: Optional[str] = None):
    """Stretch an arc of the crossing's transversal strand along ``path``
    around the odd vertex ``v``; returns (diagram, SpurRecord).

    The record carries the chamber groups Q_1..Q_l and their alternating
    symmetric difference R(cPv) on the transformed diagram.
    """
    alpha_he, sigma, level, plan = _analyze_spur(d, c, path, v)
    if prefix is None:
        prefix = _fresh_prefix(d)
    state = _State(d)
    alpha = state.remove_arc(d.he_arc[alpha_he])
    h_w = alpha.other(alpha_he)
    hops, segments = _thread(state, alpha_he, h_w, plan, sigma, level, prefix)
    out = state.build()
    chambers = _chambers(out, segments, sigma)
    q_groups, region = _q_groups(hops, chambers)
    destroyed = tuple(a for a in state.destroyed if a.id not in set(state.created_arcs))
    record = SpurRecord(
        crossing=c,
        path=tuple(path),
        vertex=v,
        alpha_he=alpha_he,
        sigma=sigma,
        level=level,
        original_over=d.nodes[c].over,
        hops=hops,
        segments=segments,
        q_groups=q_groups,
        region_set=region,
        new_nodes=frozenset(state.created_nodes),
        new_arcs=frozenset(a for a in state.created_arcs if a in out.arcs),
        destroyed_arcs=destroyed,
        ancestor_map=_ancestors(d, out, segments, None),
    )
    return out, record


def _fresh_prefix(d: Diagram) -> str:
    k = 0
    while True:
        p = f"sp{k}."
        if not any(n.startswith(p) for n in d.nodes):
            return p
        k += 1


# ---------------------------------------------------------------------------
# Retraction
# ---------------------------------------------------------------------------


def _flip_state(d: Diagram, record) -> dict:
    """hop xid -> whether its over flag differs from the inserted state."""
    out = {}
    for h in record.hops:
        if h.xid not in d.nodes:
            raise NotRetractable(f"missing spur crossing {h.xid}")
        out[h.xid] = d.nodes[h.xid].over != record.level
    return out


def spur_retract(d: Diagram, record) -> Diagram:
    """Remove a spur (or gadget) and restore the pre-insertion arcs.

    Requires the spur's crossings to sit uniformly: all vertex-germ
    crossings share one flip state s, gate pairs agree, and the rear anchor
    is compatible with the crossing's current flag.  The surviving flag at
    the crossing toggles exactly when s = 1, which is how a region crossing
    change at R(cPv) realizes the crossing change after shrinking back.
    """
    if isinstance(record, GadgetRecord):
        return _gadget_retract(d, record)
    flips = _flip_state(d, record)
    sep = [h for h in record.hops if h.kind in ("side", "tip")]
    anchors = {h.kind: h for h in record.hops if h.kind.startswith("anchor")}
    f_c = d.nodes[record.crossing].over != record.original_over
    if sep:
        states = {flips[h.xid] for h in sep}
        if len(states) > 1:
            raise NotRetractable("mixed flip states along the spur")
        s = states.pop()
    else:
        s = f_c
    pairs = {}
    for h in record.hops:
        if h.pair is not None:
            pairs.setdefault(h.pair, []).append(flips[h.xid])
    for key, vals in pairs.items():
        if len(set(vals)) > 1:
            raise NotRetractable(f"gate pair {key} has mixed flip states")
    f_a1 = flips[anchors["anchor1"].xid]
    if f_c == f_a1:
        final_over = record.original_over ^ s
    elif f_c == s:
        final_over = record.original_over ^ f_a1
    else:
        raise NotRetractable("anchor incompatible with the crossing flag")
    return _remove_insertion(d, record, {record.crossing: final_over})


def _remove_insertion(d: Diagram, record, flag_overrides) -> Diagram:
    nodes = {}
    for nid, n in d.nodes.items():
        if nid in record.new_nodes:
            continue
        if nid in flag_overrides:
            nodes[nid] = Node(nid, CROSSING, n.slots, over=flag_overrides[nid])
        else:
            nodes[nid] = n
    arcs = {aid: a for aid, a in d.arcs.items() if aid not in record.new_arcs}
    for a in record.destroyed_arcs:
        arcs[a.id] = a
    return build_diagram(nodes.values(), arcs.values())


# ---------------------------------------------------------------------------
# Far-crossing gadget
# ---------------------------------------------------------------------------


def _dual_route(d: Diagram, start_faces, goal_faces, blocked_arcs):
    """Shortest face path from any start face to any goal face; steps cross
    one shared arc each.  Returns (face list, arc list) or None."""
    from collections import deque

    adjacency = {}
    for aid, arc in sorted(d.arcs.items()):
        if aid in blocked_arcs:
            continue
        f1 = d.face_of_dart(arc.ends[0])
        f2 = d.face_of_dart(arc.ends[1])
        adjacency.setdefault(f1, []).append((f2, aid))
        adjacency.setdefault(f2, []).append((f1, aid))
    prev = {}
    queue = deque()
    for f in sorted(start_faces):
        prev[f] = None
        queue.append(f)
    while queue:
        f = queue.popleft()
        if f in goal_faces:
            faces = [f]
            arcs = []
            while prev[faces[-1]] is not None:
                pf, pa = prev[faces[-1]]
                faces.append(pf)
                arcs.append(pa)
            return list(reversed(faces)), list(reversed(arcs))
        for nf, aid in sorted(adjacency.get(f, [])):
            if nf not in prev:
                prev[nf] = (f, aid)
                queue.append(nf)
    return None


def far_gadget(d: Diagram, c: str, v1: str, v2: str, base_path, prefix: Optional[str] = None):
    """Stretch an arc of the v1..v2 path over to the far crossing ``c``,
    encircling it (four wall crossings), then spur the two end crossings to
    v1 and v2.  Returns (diagram, GadgetRecord) whose region set realizes,
    with retraction, the crossing change at ``c``.
    """
    if c not in d.nodes or not d.nodes[c].is_crossing():
        raise UnknownCrossing(c)
    comp_of = d.strand_component()
    g = d.abstract_graph()
    entered = _path_nodes(d, base_path)
    if d.he_node[base_path[0]][0] != v1 or entered[-1] != v2:
        raise PathNotIncident("base path must run from v1 to v2")
    if v1 == v2:
        raise PathNotIncident("v1 and v2 must differ")
    for v in (v1, v2):
        if d.nodes[v].is_crossing() or d.nodes[v].degree % 2 == 0:
            raise EvenTerminalVertex(v)
    gcomp = {g.component_of[v1], g.component_of[v2]}
    passes = d.crossing_passes()[c]
    for parity in (0, 1):
        if comp_of[passes[parity][0]] in gcomp:
            raise CrossingOnSameComponent(c)
    for i, nid in enumerate(entered[:-1]):
        n = d.nodes[nid]
        if not n.is_crossing() and n.degree % 2:
            raise OddInteriorVertex(nid)
    if prefix is None:
        prefix = _fresh_prefix(d)

    # route the bight from a face beside a base-path arc to a face at c
    path_arcs = [d.he_arc[h] for h in base_path]
    goal = {f.id for f in d.faces() if c in {n for n, _ in f.corners}}
    best = None
    for aid in sorted(set(path_arcs)):
        arc = d.arcs[aid]
        starts = {d.face_of_dart(arc.ends[0]), d.face_of_dart(arc.ends[1])}
        route = _dual_route(d, starts, goal, {aid})
        if route and (best is None or len(route[1]) < len(best[2])):
            best = (aid, route[0], route[1])
    if best is None:
        raise PathNotIncident("no dual route from the base path to the crossing")
    alpha_aid, route_faces, route_arcs = best
    k = path_arcs.index(alpha_aid)
    d_alpha = base_path[k]  # dart traversing alpha from the v1 side
    if d.he_arc[d_alpha] != alpha_aid:
        raise PathNotIncident("alpha dart lookup failed")
    f0 = route_faces[0]
    # The out rail must leave from the alpha end the boundary walk of the
    # route face meets second, or the two rails would cross at the mouth.
    if d.face_of_dart(d_alpha) == f0:
        h_out, h_ret = d.mate(d_alpha), d_alpha
        out_is_v1_side = False
    elif d.face_of_dart(d.mate(d_alpha)) == f0:
        h_out, h_ret = d_alpha, d.mate(d_alpha)
        out_is_v1_side = True
    else:
        raise PathNotIncident("route does not start beside alpha")

    # entry corner of c inside the route's final face
    fk = d.face_by_id(route_faces[-1])
    entry_gap = min(gap for (n, gap) in fk.corners if n == c)
    cnode = d.nodes[c]

    # hop plan: out along the route, clockwise grab around c, back again
    plan = []
    for i, aid in enumerate(route_arcs):
        arc = d.arcs[aid]
        h1, h2 = arc.ends
        dart = h1 if d.face_of_dart(h1) == route_faces[i] else h2
        if d.face_of_dart(dart) != route_faces[i]:
            raise PathNotIncident("route arc orientation failed")
        plan.append((dart, "gate", ("r", i), False))
    for j in range(4):
        idx = (entry_gap - j) % 4
        kind = "tip"
        plan.append((cnode.slots[idx], kind, None, True))
    for i in range(len(route_arcs) - 1, -1, -1):
        aid = route_arcs[i]
        arc = d.arcs[aid]
        h1, h2 = arc.ends
        dart = h1 if d.face_of_dart(h1) == route_faces[i] else h2
        plan.append((d.mate(dart), "gate", ("r", i), False))

    state = _State(d)
    state.remove_arc(alpha_aid)
    hops, segments = _thread_gadget(state, h_out, h_ret, plan, prefix)
    out = state.build()
    grab = [h for h in hops if h.kind == "tip"]
    ends = (grab[0].xid, grab[-1].xid)
    mids = (grab[1].xid, grab[2].xid)
    destroyed = tuple(a for a in state.destroyed if a.id not in set(state.created_arcs))
    anc0 = _ancestors(d, out, segments, None)
    bight = SpurRecord(
        crossing=c,
        path=tuple(base_path),
        vertex=v1,
        alpha_he=h_out,
        sigma=1,
        level=True,
        original_over=d.nodes[c].over,
        hops=hops,
        segments=segments,
        q_groups=(),
        region_set=frozenset(),
        new_nodes=frozenset(state.created_nodes),
        new_arcs=frozenset(a for a in state.created_arcs if a in out.arcs),
        destroyed_arcs=destroyed,
        ancestor_map=anc0,
    )
    # the three corner chambers of c away from the entry corner are closed
    # triangles; their symmetric difference flips exactly c and the two end
    # crossings of the grab
    region_adjacent = frozenset()
    for gap in range(4):
        if gap == entry_gap:
            continue
        fid = next(f.id for f in out.faces() if (c, gap) in f.corners)
        region_adjacent = region_adjacent ^ frozenset([fid])

    back_turns = _reverse_turns(d, base_path, k)
    fwd_turns = _suffix_turns(d, base_path, k)
    # one end spur runs back along the out rail, the other along the return
    # rail; which odd vertex each reaches depends on the mouth orientation
    p1 = _walk_from(out, out.nodes[ends[0]].slots[0], back_turns if out_is_v1_side else fwd_turns)
    t1 = out.he_node[out.mate(p1[-1])][0]
    out2, rec1 = spur_insert(out, ends[0], p1, t1, prefix=prefix + "s1.")
    p2 = _walk_from(out2, out2.nodes[ends[1]].slots[2], fwd_turns if out_is_v1_side else back_turns)
    t2 = out2.he_node[out2.mate(p2[-1])][0]
    out3, rec2 = spur_insert(out2, ends[1], p2, t2, prefix=prefix + "s2.")
    if {t1, t2} != {v1, v2}:
        raise PathNotIncident(f"gadget spurs reached {t1},{t2}, expected {v1},{v2}")

    track_adjacent = _track(region_adjacent, rec1.ancestor_map)
    track_adjacent = _track(track_adjacent, rec2.ancestor_map)
    ancestor = _compose(anc0, rec1.ancestor_map, rec2.ancestor_map)
    record = GadgetRecord(
        crossing=c,
        v1=v1,
        v2=v2,
        base_path=tuple(base_path),
        ends=ends,
        mids=mids,
        region_adjacent=frozenset(track_adjacent),
        bight=bight,
        spur1=rec1,
        spur2=rec2,
        region_set=frozenset(),
        ancestor_map=ancestor,
    )
    composite = solve_unit_regions(out3, [record], d.crossing_ids())
    record = GadgetRecord(
        crossing=c,
        v1=v1,
        v2=v2,
        base_path=tuple(base_path),
        ends=ends,
        mids=mids,
        region_adjacent=frozenset(track_adjacent),
        bight=bight,
        spur1=rec1,
        spur2=rec2,
        region_set=composite,
        ancestor_map=ancestor,
    )
    return out3, record


def solve_unit_regions(e: Diagram, records, original_crossings) -> frozenset:
    """Region set on the final diagram realizing every unit's flip pattern."""
    from .gf2 import incidence_matrix, solve_constraints

    ones = set()
    zeros = set()
    pairs = []

    def add_pairs(hops):
        groups = {}
        for h in hops:
            if h.pair is not None:
                groups.setdefault(h.pair, []).append(h.xid)
        for group in groups.values():
            for a, b in zip(group, group[1:]):
                pairs.append((a, b))

    def add_spur(rec, flip_crossing):
        for h in rec.hops:
            if h.kind in ("side", "tip"):
                ones.add(h.xid)
            elif h.kind.startswith("anchor"):
                zeros.add(h.xid)
        add_pairs(rec.hops)
        (ones if flip_crossing else zeros).add(rec.crossing)

    for rec in records:
        if isinstance(rec, GadgetRecord):
            add_pairs(rec.bight.hops)
            ones.add(rec.crossing)
            zeros.update(rec.mids)
            # grab ends flip under the region set; the sub-spur retractions
            # then put them back so the bight stays uniform
            add_spur(rec.spur1, flip_crossing=True)
            add_spur(rec.spur2, flip_crossing=True)
        else:
            add_spur(rec, flip_crossing=False)
    for c in original_crossings:
        if c not in ones and c not in zeros:
            zeros.add(c)
    m = incidence_matrix(e)
    constrained = ones | zeros | {c for p in pairs for c in p}
    for c in m.rows:
        if c not in constrained:
            raise SgdError(f"crossing {c} not covered by unit constraints")
    out = solve_constraints(m, ones, zeros, pairs)
    if not out.sat:
        raise SgdError(
            f"composite region solve unsatisfiable; certificate {sorted(out.certificate or ())}"
        )
    return out.regions


def _thread_gadget(state, start_he, end_he, plan, prefix):
    dangling = start_he
    hops = []
    segments = []
    counter = iter(range(10 ** 6))

    def fresh_arc():
        return f"{prefix}a{next(counter)}"

    for kk, (germ, kind, pair, g_is_right) in enumerate(plan):
        xid = f"{prefix}w{kk}"
        si, gn, so, fn = f"{xid}i", f"{xid}n", f"{xid}o", f"{xid}f"
        slots = (si, gn, so, fn) if g_is_right else (si, fn, so, gn)
        state.add_crossing(xid, slots, over=True)  # over the rest en route
        old = state.remove_arc(state.he_arc[germ])
        far = old.other(germ)
        state.add_arc(fresh_arc(), germ, gn)
        state.add_arc(fresh_arc(), fn, far)
        aid = fresh_arc()
        state.add_arc(aid, dangling, si)
        segments.append((aid, dangling))
        dangling = so
        hops.append(Hop(xid, germ, kind, pair))
    aid = fresh_arc()
    state.add_arc(aid, dangling, end_he)
    segments.append((aid, dangling))
    return tuple(hops), tuple(segments)


def _vertex_turns(d: Diagram, path):
    """(vertex, exit half-edge) turn list of a dart walk."""
    turns = []
    for i in range(len(path) - 1):
        nid = d.he_node[path[i + 1]][0]
        if not d.nodes[nid].is_crossing():
            turns.append((nid, path[i + 1]))
    return turns


def _reverse_turns(d: Diagram, path, k):
    """Turns for walking the path prefix [0..k] backwards from arc k."""
    turns = []
    for i in range(k, 0, -1):
        nid = d.he_node[path[i]][0]
        if not d.nodes[nid].is_crossing():
            turns.append((nid, d.mate(path[i - 1])))
    return turns


def _suffix_turns(d: Diagram, path, k):
    """Turns for walking the path tail [k+1..] forwards from arc k."""
    turns = []
    for i in range(k, len(path) - 1):
        nid = d.he_node[path[i + 1]][0]
        if not d.nodes[nid].is_crossing():
            turns.append((nid, path[i + 1]))
    return turns


def _walk_from(d: Diagram, start_dart, turns):
    """Follow a strand from ``start_dart``, taking the listed vertex turns,
    stopping at the first vertex once the turns are exhausted."""
    path = [start_dart]
    ti = 0
    guard = 0
    while True:
        guard += 1
        if guard > 100000:
            raise PathNotIncident("walk does not terminate")
        h = d.mate(path[-1])
        nid, j = d.he_node[h]
        node = d.nodes[nid]
        if node.is_crossing():
            path.append(node.slots[(j + 2) % 4])
            continue
        if ti < len(turns):
            tv, te = turns[ti]
            if tv != nid:
                raise PathNotIncident(f"expected turn at {tv}, reached {nid}")
            ti += 1
            path.append(te)
            continue
        return path


def _track(face_ids, ancestor_map):
    marked = set(face_ids)
    return {nf for nf, of in ancestor_map.items() if of in marked}


def _compose(*maps):
    out = dict(maps[0])
    for m in maps[1:]:
        out = {nf: out[of] for nf, of in m.items() if of in out}
    return out


def _gadget_retract(d: Diagram, record: GadgetRecord) -> Diagram:
    cur = spur_retract(d, record.spur2)
    cur = spur_retract(cur, record.spur1)
    flips = _flip_state(cur, record.bight)
    for pairkey in {h.pair for h in record.bight.hops if h.pair}:
        vals = {flips[h.xid] for h in record.bight.hops if h.pair == pairkey}
        if len(vals) > 1:
            raise NotRetractable(f"gadget gate pair {pairkey} mixed")
    # unhooking the grab slides one wall bit across the crossing; the two
    # wall crossings on each strand-pass of c must then sit at one level
    grab = [h.xid for h in record.bight.hops if h.kind == "tip"]
    if flips[grab[0]] != flips[grab[2]] or flips[grab[1]] != flips[grab[3]]:
        raise NotRetractable("gadget grab crossings mixed")
    return _remove_insertion(cur, record.bight, {})


# ---------------------------------------------------------------------------
# Mark tracking across insertions
# ---------------------------------------------------------------------------


class MarkTracker:
    """Keeps face-id mark sets current while insertions subdivide faces.

    A mark on a face propagates to every descendant piece, mirroring the
    rule that divided regions are retaken in full.
    """

    def __init__(self):
        self.sets = []

    def push(self, face_ids):
        self.sets.append(frozenset(face_ids))

    def update(self, ancestor_map):
        self.sets = [frozenset(_track(s, ancestor_map)) for s in self.sets]

    def symmetric_difference(self) -> frozenset:
        acc = frozenset()
        for s in self.sets:
            acc = acc ^ s
        return acc
