"""SGD text format: parse, serialize, and the machine-readable report shape.

Grammar, one statement per line:

    vertex <id> : <halfedge>+
    crossing <id> : <h0> <h1> <h2> <h3>
    arc <id> : <h> <h>
    # comment

Crossing slots are counterclockwise; the strand through h0,h2 passes OVER
the strand through h1,h3.  Components, faces and orders are always derived,
never stored.
"""

from __future__ import annotations

import json
from importlib import resources

from .core import CROSSING, VERTEX, Arc, Diagram, Node, build_diagram
from .errors import SgdSyntaxError

TOOL = "sgd"
VERSION = "0.1.0"

CORPUS_NAMES = (
    "UNKNOT0",
    "HOPF",
    "UNLINK2X",
    "TREFOIL",
    "T24",
    "THETA0",
    "HANDCUFF0",
    "LINKED_TRIANGLES",
    "REDUC1",
    "NONPLANAR-K5",
)


def parse(text: str) -> Diagram:
    """Parse SGD source into a validated Diagram."""
    nodes = []
    arcs = []
    seen_ids = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) < 3 or tokens[2] != ":":
            raise SgdSyntaxError(lineno, f"expected '<kind> <id> : ...', got {raw!r}")
        kind, name = tokens[0], tokens[1]
        body = tokens[3:]
        if name in seen_ids:
            raise SgdSyntaxError(lineno, f"duplicate id {name}")
        seen_ids.add(name)
        if kind == "vertex":
            if not body:
                raise SgdSyntaxError(lineno, "vertex needs at least one half-edge")
            nodes.append(Node(name, VERTEX, tuple(body)))
        elif kind == "crossing":
            # slot count is a semantic property; build_diagram rejects it
            nodes.append(Node(name, CROSSING, tuple(body), over=True))
        elif kind == "arc":
            if len(body) != 2:
                raise SgdSyntaxError(lineno, f"arc needs 2 half-edges, got {len(body)}")
            arcs.append(Arc(name, tuple(body)))
        else:
            raise SgdSyntaxError(lineno, f"unknown statement {kind!r}")
    return build_diagram(nodes, arcs)


def serialize(d: Diagram) -> str:
    """Canonical SGD text: nodes then arcs, each sorted by id, LF endings.

    Crossings are normalized so the over-strand occupies slots 0,2 (a cyclic
    rotation by one when the stored flag is False).
    """
    lines = []
    for nid in sorted(d.nodes):
        n = d.nodes[nid]
        if n.is_crossing():
            slots = n.slots if n.over else n.slots[1:] + n.slots[:1]
            lines.append(f"crossing {nid} : " + " ".join(slots))
        else:
            lines.append(f"vertex {nid} : " + " ".join(n.slots))
    for aid in sorted(d.arcs):
        a = d.arcs[aid]
        lines.append(f"arc {aid} : " + " ".join(sorted(a.ends)))
    return "\n".join(lines) + "\n"


def report_json(command: str, input_name: str, result) -> str:
    """Wrap a result record in the stable top-level report shape."""
    doc = {
        "tool": TOOL,
        "version": VERSION,
        "command": command,
        "input": input_name,
        "result": result,
    }
    return json.dumps(doc, indent=2)


def load_corpus(name: str) -> Diagram:
    """Load one of the bundled fixture diagrams by name."""
    data = resources.files("sgd").joinpath("corpus", f"{name}.sgd").read_text()
    return parse(data)


def corpus_text(name: str) -> str:
    return resources.files("sgd").joinpath("corpus", f"{name}.sgd").read_text()


def diagrams_equal(d1: Diagram, d2: Diagram) -> bool:
    """Labeled equality: same ids, same rotations up to cyclic normalization,
    same over/under relation, same arc pairings."""
    return _canonical(d1) == _canonical(d2)


def _canonical(d: Diagram):
    nodes = {}
    for nid, n in d.nodes.items():
        if n.is_crossing():
            slots = n.slots if n.over else n.slots[1:] + n.slots[:1]
            if slots[2] < slots[0]:
                slots = slots[2:] + slots[:2]
            nodes[nid] = (CROSSING, slots)
        else:
            k = len(n.slots)
            best = min(n.slots[i:] + n.slots[:i] for i in range(k))
            nodes[nid] = (VERTEX, best)
    arcs = {aid: tuple(sorted(a.ends)) for aid, a in d.arcs.items()}
    return (nodes, arcs)
