"""Command-line entry point: file in, JSON report out.

Exit codes: 0 success or true verdict, 1 false verdict / unsat / impossible,
2 input or usage error, 3 internal assertion (a theorem-violation tripwire).
"""

from __future__ import annotations

import argparse
import sys

from . import codec, decide, invariants as inv, oracle
from .core import component_order, is_planar_abstract
from .errors import NonPlanarGraph, SgdError, TheoremViolation
from .gf2 import TargetSet, incidence_matrix, kernel_basis, minimum_weight_witness, solve, solve_with_dont_care
from .transform import apply_region_set, knotify, spur_insert
from .decide import _dart_bfs


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _emit(args, result) -> None:
    print(codec.report_json(args.command, args.input, result))


def _human(lines) -> None:
    for line in lines:
        print(line)


def _ids(text):
    return frozenset(x for x in text.split(",") if x)


def cmd_validate(args, d):
    g = d.abstract_graph()
    result = {
        "valid": True,
        "nodes": len(d.nodes),
        "arcs": len(d.arcs),
        "faces": len(d.faces()),
        "crossings": len(d.crossing_ids()),
        "components": list(component_order(g)),
        "planar": is_planar_abstract(g),
    }
    if args.human:
        _human([f"{k}: {v}" for k, v in result.items()])
    else:
        _emit(args, result)
    return 0


def cmd_faces(args, d):
    result = [
        {
            "id": f.id,
            "corners": [[n, g] for n, g in f.corners],
            "crossings": sorted(f.crossings_on_boundary),
        }
        for f in d.faces()
    ]
    if args.human:
        _human(
            f"{f['id']}: crossings {','.join(f['crossings']) or '-'}" for f in result
        )
    else:
        _emit(args, result)
    return 0


def cmd_invariants(args, d):
    g = d.abstract_graph()
    order = component_order(g)
    check = inv.eulerian_check(g)
    result = {
        "components": list(order),
        "eulerian": check.eulerian,
        "eulerian_per_component": {k: v for k, v in sorted(check.per_component.items())},
        "v_odd": {k: list(v) for k, v in sorted(check.v_odd.items())},
    }
    if check.eulerian:
        o = inv.eulerian_orientation(g)
        lk = inv.linking_matrix(d, o, order)
        proper, offending = inv.is_proper(lk)
        result["linking_matrix"] = lk.as_rows()
        result["proper"] = proper
        result["improper_components"] = list(offending)
    w = inv.warping_matrix(d, order)
    result["warping"] = [
        {"pair": [order[i], order[j]], "w": w.entry(i, j)}
        for i in range(len(order))
        for j in range(i + 1, len(order))
    ]
    if args.human:
        _human([f"eulerian: {check.eulerian}"])
        if check.eulerian:
            _human([f"lk: {result['linking_matrix']}", f"proper: {result['proper']}"])
        _human([f"w{e['pair']}: {e['w']}" for e in result["warping"]])
    else:
        _emit(args, result)
    return 0


def cmd_solve(args, d):
    m = incidence_matrix(d)
    change = _ids(args.change)
    care = _ids(args.care) if args.care else None
    t = TargetSet(change, care)
    out = solve_with_dont_care(m, t) if care is not None else solve(m, t)
    if out.sat:
        regions = out.regions
        if args.minimal:
            regions = minimum_weight_witness(m, out)
        result = {
            "status": "sat",
            "regions": sorted(regions),
            "induced": sorted(m.flips(regions)),
        }
        code = 0
    else:
        result = {"status": "unsat", "certificate": sorted(out.certificate)}
        code = 1
    if args.human:
        _human([result["status"], ",".join(result.get("regions", result.get("certificate", [])))])
    else:
        _emit(args, result)
    return code


def cmd_apply(args, d):
    out = apply_region_set(d, _ids(args.regions))
    result = {
        "changed": sorted(
            c for c in d.crossing_ids() if d.nodes[c].over != out.nodes[c].over
        ),
        "diagram": codec.serialize(out),
    }
    if args.human:
        print(result["diagram"], end="")
    else:
        _emit(args, result)
    return 0


def cmd_split_vertices(args, d):
    out, corr = knotify(d, args.component)
    result = {
        "diagram": codec.serialize(out),
        "face_correspondence": {k: v for k, v in sorted(corr.items())},
    }
    if args.human:
        print(result["diagram"], end="")
    else:
        _emit(args, result)
    return 0


def cmd_spur(args, d):
    odd = {args.to}
    path = _dart_bfs(
        d,
        sorted(d.nodes[args.crossing].slots),
        lambda far: far in odd,
        lambda far: not d.nodes[far].is_crossing()
        and d.abstract_graph().degree[far] % 2 == 0,
    )
    if path is None:
        print(f"no admissible path from {args.crossing} to {args.to}", file=sys.stderr)
        return 2
    out, rec = spur_insert(d, args.crossing, path, args.to)
    result = {
        "diagram": codec.serialize(out),
        "record": {
            "crossing": rec.crossing,
            "path": list(rec.path),
            "vertex": rec.vertex,
            "q_groups": [sorted(q) for q in rec.q_groups],
            "region_set": sorted(rec.region_set),
        },
    }
    if args.human:
        print(result["diagram"], end="")
        _human([f"R(cPv): {','.join(result['record']['region_set'])}"])
    else:
        _emit(args, result)
    return 0


def cmd_decide(args, d):
    fn = decide.decide_unknottable if args.question == "unknottable" else decide.decide_splittable
    verdict = fn(d)
    if args.human:
        _human([f"{verdict.question}: {verdict.answer} ({verdict.reason})"])
    else:
        _emit(args, verdict.as_record())
    return 0 if verdict.answer else 1


def cmd_witness(args, d):
    fn = (
        decide.witness_unknottable
        if args.question == "unknottable"
        else decide.witness_splittable
    )
    plan = fn(d)
    record = plan.as_record()
    if args.human:
        _human([str(record)])
    else:
        _emit(args, record)
    return 0 if isinstance(plan, decide.WitnessPlan) else 1


def cmd_oracle(args, d):
    diagrams = {}
    if d is not None:
        diagrams["input"] = d
    if args.count:
        profile = args.profile or "knot"
        for k in range(args.count):
            diagrams[f"{profile}-{args.seed + k}"] = oracle.random_diagram(
                args.seed + k, profile
            )
    if not diagrams:
        for name in codec.CORPUS_NAMES:
            diagrams[name] = codec.load_corpus(name)
    small = {
        name: dg for name, dg in diagrams.items() if len(dg.faces()) <= args.max_faces
    }
    report = oracle.check_theorems(small, seed=args.seed)
    if args.human:
        _human(
            f"{'ok ' if ok else 'FAIL'} {name} {detail}" for name, ok, detail in report.checks
        )
    else:
        _emit(args, report.as_record())
    return 0 if report.ok() else 1


COMMANDS = {
    "validate": cmd_validate,
    "faces": cmd_faces,
    "invariants": cmd_invariants,
    "solve": cmd_solve,
    "apply": cmd_apply,
    "split-vertices": cmd_split_vertices,
    "spur": cmd_spur,
    "decide": cmd_decide,
    "witness": cmd_witness,
    "oracle": cmd_oracle,
}


def build_parser():
    p = argparse.ArgumentParser(prog="sgd", description="spatial-graph diagram toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, needs_input=True):
        sp = sub.add_parser(name)
        if needs_input:
            sp.add_argument("input", help="SGD file path, or - for stdin")
        sp.add_argument("--human", action="store_true", help="tables instead of JSON")
        return sp

    add("validate")
    add("faces")
    add("invariants")
    sp = add("solve")
    sp.add_argument("--change", required=True, help="comma-separated crossing ids")
    sp.add_argument("--care", help="comma-separated constrained crossing ids")
    sp.add_argument("--minimal", action="store_true", help="minimum-weight witness")
    sp = add("apply")
    sp.add_argument("--regions", required=True, help="comma-separated face ids")
    sp = add("split-vertices")
    sp.add_argument("--component", required=True)
    sp = add("spur")
    sp.add_argument("--crossing", required=True)
    sp.add_argument("--to", required=True, help="odd-degree terminal vertex")
    sp = add("decide")
    sp.add_argument("--question", choices=("unknottable", "splittable"), required=True)
    sp = add("witness")
    sp.add_argument("--question", choices=("unknottable", "splittable"), required=True)
    sp = sub.add_parser("oracle")
    sp.add_argument("input", nargs="?", help="optional SGD file")
    sp.add_argument("--human", action="store_true")
    sp.add_argument("--max-faces", type=int, default=oracle.MAX_FACES)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--profile")
    sp.add_argument("--count", type=int, default=0)
    return p


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    d = None
    needs_input = args.command != "oracle" or args.input
    try:
        if needs_input and args.input:
            d = codec.parse(_read(args.input))
    except (OSError, SgdError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args, d)
    except TheoremViolation as e:
        print(f"theorem violation: {e}", file=sys.stderr)
        return 3
    except NonPlanarGraph as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except SgdError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
