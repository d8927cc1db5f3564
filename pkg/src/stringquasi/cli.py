"""Command line: generate instances, build planar outputs, verify results.

Exit status is 0 exactly when every certificate checks out.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys

from . import constants as C
from .harness import Instance, generate, oracle_distortion
from .metricgraph import MetricPlanarGraph, all_distances, metric_pipeline
from .plane import INF, MapError, PlaneMap, auditing
from .rig import CertificateError, DistanceOracle, FamilyError, build_rig

log = logging.getLogger("stringquasi")


def _write(path: str, data: dict) -> None:
    text = json.dumps(data, sort_keys=True)
    if path == "-":
        sys.stdout.write(text + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _read(path: str) -> dict:
    if path == "-":
        return json.load(sys.stdin)
    with open(path) as fh:
        return json.load(fh)


def _parse_params(items) -> dict:
    out = {}
    for item in items or ():
        key, _, value = item.partition("=")
        try:
            out[key] = int(value)
        except ValueError:
            out[key] = float(value)
    return out


def cmd_gen(args) -> int:
    params = _parse_params(args.param)
    obj = generate(args.kind, args.seed, **params)
    if isinstance(obj, MetricPlanarGraph):
        data = obj.to_json() | {"kind": args.kind, "params": params | {"seed": args.seed}}
    else:
        data = obj.to_json()
    _write(args.out, data)
    return 0


def cmd_build(args) -> int:
    inst = Instance.from_json(_read(args.input))
    from .planarize import planarize_full

    trace = open(args.trace, "w") if args.trace else None
    try:
        with _audit_scope(args) as counter:
            report = planarize_full(inst.g, inst.sets, trace=trace)
    finally:
        if trace is not None:
            trace.close()
    if counter is not None:
        log.info("audited %d intermediate maps", counter["count"])
    data = report.to_json()
    data["input"] = inst.to_json()
    _write(args.out, data)
    log.info("built planar output with %d vertices", len(report.output))
    return 0


def _audit_scope(args):
    return auditing() if getattr(args, "audit", False) else contextlib.nullcontext()


def cmd_metric(args) -> int:
    h = MetricPlanarGraph.from_json(_read(args.input))
    with _audit_scope(args):
        report = metric_pipeline(h)
    data = report.to_json()
    data["input_metric"] = h.to_json()
    _write(args.out, data)
    return 0


def verify_result(data: dict) -> dict:
    """Independent check of a build or metric result from its input and output map alone."""
    out = PlaneMap.from_json(data["output_map"])
    out.audit()
    bijection = {int(a): int(b) for a, b in data["bijection"]}
    if len(set(bijection.values())) != len(bijection) or set(bijection.values()) != set(out.vertices):
        raise CertificateError("bijection is not onto the output vertices")
    if "input_metric" in data:
        h = MetricPlanarGraph.from_json(data["input_metric"])
        dist = all_distances(h)
        oracle = DistanceOracle(out.adjacency())
        nodes = sorted(h.g.vertices)
        if set(nodes) != set(bijection):
            raise CertificateError("bijection domain differs from the metric graph")
        for i, u in enumerate(nodes):
            for v in nodes[i + 1:]:
                dh = dist[u].get(v)
                do = oracle.dist(bijection[u], bijection[v])
                if dh is None or do == INF:
                    if not (dh is None and do == INF):
                        raise CertificateError(f"pair {u},{v}: reachability differs")
                    continue
                if dh > C.METRIC_CONTRACTION * int(do) or int(do) > C.FINAL_EXPANSION * (dh + 1):
                    raise CertificateError(f"pair {u},{v}: distortion out of bounds ({dh}, {do})")
        return {"pairs": len(nodes) * (len(nodes) - 1) // 2, "kind": "metric"}
    inst = Instance.from_json(data["input"])
    src = build_rig(inst.g, inst.sets)
    if set(src) != set(bijection):
        raise CertificateError("bijection domain differs from the string graph")
    rep = oracle_distortion(src, out.adjacency(), bijection, C.FINAL_CONTRACTION, C.FINAL_EXPANSION)
    if rep.violation is not None:
        raise CertificateError(f"distortion violated at {rep.violation}")
    return rep.to_json()


def cmd_verify(args) -> int:
    data = _read(args.input)
    summary = verify_result(data)
    log.info("verified: %s", summary)
    print(json.dumps({"verified": True} | summary, sort_keys=True, default=str))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stringquasi", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a seeded instance")
    g.add_argument("--kind", required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--param", action="append", metavar="KEY=VALUE", help="generator parameter (repeatable)")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("build", help="planarize a region representation")
    b.add_argument("--in", dest="input", required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--trace", help="write one JSON line per recursion level")
    b.add_argument("--audit", action="store_true", help="audit every intermediate map")
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", help="re-check a result file from scratch")
    v.add_argument("--in", dest="input", required=True)
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("metric", help="planarize a metric planar graph")
    m.add_argument("--in", dest="input", required=True)
    m.add_argument("--out", required=True)
    m.add_argument("--audit", action="store_true", help="audit every intermediate map")
    m.set_defaults(func=cmd_metric)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (CertificateError, FamilyError, MapError, KeyError, ValueError, IndexError, TypeError) as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        print(json.dumps({"verified": False, "error": str(exc)}, sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
