"""From a region representation to a planar graph on the same vertex set.

One level of the recursion:

1. find a final encasing ``B`` of ``(g, H)``;
2. for every facial set ``F`` and region ``H`` meeting both ``F`` and the
   parts, collect ``R_{F,H}`` (the vertices of ``F`` encroached by ``H``
   plus ``F & H``) and draw the edges that make it connected, each on the
   side that holds the walled-in boundary walk;
3. delete ``U = union(B)`` and recurse on what is left, with the regions
   that avoid ``U`` plus the new ``R_{F,H}`` sets.

The parts of all levels form an impression of the fortified host; the
impression is transferred back to the original family, turned into a
quasi-isometry onto the contracted parts, and finally into a bijection.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import constants as C
from .encase import Encasing, encase_final, encroached, strata
from .plane import INF, PlaneMap, TopologyError, _orbit, audited, connected_components, induced_submap, insert_edge_in_face
from .rig import (
    CertificateError,
    DistanceOracle,
    FamilyError,
    Impression,
    QuasiIsometryReport,
    build_rig,
    check_disjoint,
    contract_parts,
    impression_map,
    intersecting,
    max_value,
    measure_impression,
    membership,
    min_z_span,
    quasibi,
    transfer_impression,
)


def _enc(v):
    if v == INF:
        return None
    if isinstance(v, Fraction):
        return str(v)
    return v


# --------------------------------------------------------------------------
# added edges and their sides


@dataclass(frozen=True)
class AddedEdge:
    """An edge drawn into a face.

    The chosen side is the face containing the dart ``(v, u)`` once the edge
    is drawn.
    """

    u: int
    v: int
    depth: int

    @property
    def key(self) -> tuple[int, int]:
        return (min(self.u, self.v), max(self.u, self.v))

    def to_json(self) -> list:
        return [self.u, self.v, self.depth]


def project_side(base: PlaneMap, final: PlaneMap, e: AddedEdge) -> tuple[tuple, frozenset[int]]:
    """The side of ``e`` in ``base + e``: its boundary darts of ``base`` and its vertices.

    The edge is drawn in ``base`` where it sits in ``final``: just before the
    next ``base`` neighbour in the final rotation at each end.
    """
    rot = {w: list(base.rotation(w)) for w in base.vertices}
    for a, b in ((e.u, e.v), (e.v, e.u)):
        order = final.rotation(a)
        if not rot[a]:
            rot[a].append(b)
            continue
        i = order.index(b)
        nxt = next(order[(i + k) % len(order)] for k in range(1, len(order) + 1) if base.has_edge(a, order[(i + k) % len(order)]))
        rot[a].insert(rot[a].index(nxt), b)
    m = PlaneMap(rot, check=False)
    side = _orbit(m, (e.v, e.u))
    arc = tuple(d for d in side if d != (e.v, e.u))
    return arc, frozenset(d[0] for d in side)


@dataclass
class FortificationAudit:
    k_new: float
    k_face: float
    edges: int
    sides: list

    @property
    def k(self) -> float:
        return max(self.k_new, self.k_face)

    def to_json(self) -> dict:
        return {"k_new": _enc(self.k_new), "k_face": _enc(self.k_face), "edges": self.edges}


def inner_oracle(regions, level) -> tuple[DistanceOracle, dict]:
    rig = build_rig({}, regions, check=False)
    keep = {i for i in rig if level[i] != 0}
    return DistanceOracle({i: tuple(j for j in rig[i] if j in keep) for i in sorted(keep)}), keep


def _inner_weak_diameter(oracle: DistanceOracle, keep: set, members: Sequence[int]):
    members = sorted(set(members))
    if any(m not in keep for m in members):
        return INF
    return oracle.weak_diameter(members)


def audit_fortification(
    g: PlaneMap,
    g_prime: PlaneMap,
    regions: Sequence[frozenset[int]],
    new_regions: Sequence[frozenset[int]],
    added: Sequence[AddedEdge],
    k: int = C.FORTIFY_K,
    *,
    level=None,
) -> FortificationAudit:
    """Check that ``(g_prime, regions + new_regions)`` is a ``k``-fortification of ``(g, regions)``."""
    g_prime.audit()
    base_edges = set(g.edges())
    extra = set(g_prime.edges()) - base_edges
    if extra != {e.key for e in added}:
        raise CertificateError("added edge list does not match the fortified map")
    if set(g_prime.vertices) != set(g.vertices):
        raise CertificateError("fortification changed the vertex set")
    if level is None:
        level = strata(g, regions)
    oracle, keep = inner_oracle(regions, level)
    index = membership(regions)
    outer = g.outer_vertices()
    used: dict = {}
    sides = []
    k_face = 0
    for e in sorted(added, key=lambda e: e.key):
        arc, verts = project_side(g, g_prime, e)
        if verts & outer:
            raise CertificateError(f"side of {e.key} touches the outer face at {min(verts & outer)}")
        for d in arc:
            if d in used:
                raise CertificateError(f"sides of {e.key} and {used[d]} overlap along dart {d}")
            used[d] = e.key
        k_face = max(k_face, _inner_weak_diameter(oracle, keep, intersecting(regions, verts, index)))
        sides.append((e.key, sorted(verts)))
    k_new = 0
    for r in new_regions:
        k_new = max(k_new, _inner_weak_diameter(oracle, keep, intersecting(regions, r, index)))
    family = list(regions) + list(new_regions)
    if min_z_span(g_prime, family) != 0:
        raise CertificateError("enlarged family does not span the fortified map")
    report = FortificationAudit(k_new, k_face, len(added), sides)
    if report.k > k:
        raise CertificateError(f"fortification measured k = {report.k} > {k}")
    return report


# --------------------------------------------------------------------------
# encroachment closures


@dataclass
class ClosureSet:
    facial: int
    region: int
    vertices: frozenset[int]
    edges: list[AddedEdge]


@dataclass
class EncroachClosure:
    g_star: PlaneMap
    sets: list[ClosureSet]
    added: list[AddedEdge]
    flags: list[str] = field(default_factory=list)
    width: float = 0

    def regions(self) -> list[frozenset[int]]:
        out = []
        seen = set()
        for s in self.sets:
            if s.vertices not in seen:
                seen.add(s.vertices)
                out.append(s.vertices)
        return out


def encroach_closure(g: PlaneMap, regions, enc: Encasing, *, level=None, depth: int = 0) -> EncroachClosure:
    """Build every ``R_{F,H}`` and draw the edges that connect it."""
    regions = [frozenset(r) for r in regions]
    if level is None:
        level = strata(g, regions)
    topo = enc.notes.get("_topology")
    if topo is None:
        from .encase import Topology

        topo = Topology(g, enc.parts)
    aux = topo.aux
    cached = enc.notes.get("_runs", {})
    pairs = defaultdict(set)
    for hi, h in enumerate(regions):
        if not h & aux.union:
            continue
        for v in h:
            j = aux.facial_of.get(v)
            if j is not None:
                pairs[j].add(hi)
    cur = g
    sets = []
    added = []
    flags = []
    for j in sorted(pairs):
        facial = aux.facial[j]
        for hi in sorted(pairs[j]):
            h = regions[hi]
            runs = cached.get((j, hi))
            if runs is None:
                runs = encroached(topo, j, h, hi)
            verts = set(facial & h)
            edges = []
            for run in runs:
                verts.update(run.encroached)
                n = len(run.edges)
                steps = range(n) if run.cyclic else range(n - 1)
                for i in steps:
                    (ua, va), (ub, vb) = run.edges[i], run.edges[(i + 1) % n]
                    if va == vb or cur.has_edge(va, vb):
                        continue
                    u_slot = (va, ua)
                    v_slot = cur.succ((vb, ub))
                    if cur.face_of(u_slot) != cur.face_of(v_slot):
                        raise CertificateError(
                            f"closure edge {(va, vb)} for facial set {j}, region {hi}: ends not on a common face"
                        )
                    nxt, rec = insert_edge_in_face(cur, u_slot, v_slot)
                    walk = {ua, ub} | {d[0] for d in run.gaps[i]}
                    if rec.side_vertices != walk | {va, vb}:
                        raise CertificateError(f"closure edge {(va, vb)}: side is not the walled-in walk")
                    cur = nxt
                    e = AddedEdge(va, vb, depth)
                    edges.append(e)
                    added.append(e)
            sets.append(ClosureSet(j, hi, frozenset(verts), edges))
    # connectivity in the closed map; split and flag otherwise
    adj = cur.adjacency()
    final_sets = []
    for s in sets:
        comps = connected_components(adj, sorted(s.vertices))
        if len(comps) > 1:
            flags.append(f"closure set of facial {s.facial} and region {s.region} split into {len(comps)} pieces")
            for c in comps:
                final_sets.append(ClosureSet(s.facial, s.region, c, s.edges))
        else:
            final_sets.append(s)
    oracle, keep = inner_oracle(regions, level)
    index = membership(regions)
    width = 0
    for s in final_sets:
        w = _inner_weak_diameter(oracle, keep, intersecting(regions, s.vertices, index))
        if w > C.FORTIFY_K:
            raise CertificateError(
                f"closure set of facial {s.facial}, region {s.region} has inner weak diameter {w} > {C.FORTIFY_K}"
            )
        width = max(width, w)
    return EncroachClosure(cur, final_sets, added, flags, width)


# --------------------------------------------------------------------------
# the recursion


def merge_added(base: PlaneMap, sub: PlaneMap) -> PlaneMap:
    """``base`` plus the edges of ``sub`` it lacks, drawn where ``sub`` draws them.

    Each new neighbour goes just before the next neighbour (in ``sub``'s
    rotation) that ``base`` already has.
    """
    rot = {v: list(base.rotation(v)) for v in base.vertices}
    for v in sub.vertices:
        order = list(sub.rotation(v))
        new = [w for w in order if not base.has_edge(v, w)]
        if not new:
            continue
        anchors = [i for i, w in enumerate(order) if base.has_edge(v, w)]
        if not anchors:
            if rot[v]:
                raise TopologyError(f"vertex {v}: no shared neighbour to place new edges against")
            rot[v] = order
            continue
        start = anchors[0]
        pending = []
        for k in range(1, len(order) + 1):
            w = order[(start + k) % len(order)]
            if base.has_edge(v, w):
                at = rot[v].index(w)
                rot[v][at:at] = pending
                pending = []
            else:
                pending.append(w)
    return audited(PlaneMap(rot, base.outer_ref, check=False, outer_refs=base.outer_refs))


def _dedupe(sets: Iterable[frozenset[int]]) -> list[frozenset[int]]:
    seen = set()
    out = []
    for s in sets:
        if s not in seen:
            seen.add(s)
            out.append(s)
    return out


@dataclass
class InductResult:
    """Output of the recursion on ``(g, regions)``.

    ``regions`` starts with the input family in order; new sets follow.
    """

    g: PlaneMap
    regions: list[frozenset[int]]
    parts: list[frozenset[int]]
    added: list[AddedEdge]
    certificates: list[dict]
    flags: list[str]


def _check_spanning(g: PlaneMap, regions) -> None:
    index = membership(regions)
    for v in g.vertices:
        if v not in index:
            raise FamilyError(f"vertex {v} is in no region")
    for u, v in g.edges():
        if not set(index[u]) & set(index[v]):
            raise FamilyError(f"edge {(u, v)} lies in no region")


def string_induct(g: PlaneMap, regions, *, depth: int = 0, trace=None, verify: bool = True) -> InductResult:
    """Fortify ``(g, regions)`` and build a certified (9242, 80)-impression of it."""
    regions = [frozenset(r) for r in regions]
    if not len(g):
        return InductResult(g, regions, [], [], [], [])
    if depth > 4 * len(g) + 4:
        raise CertificateError("recursion depth guard exceeded")
    _check_spanning(g, regions)
    rig = build_rig(g, regions, check=False)
    level = strata(g, regions, rig)
    enc = encase_final(g, regions, rig=rig, level=level)
    closure = encroach_closure(g, regions, enc, level=level, depth=depth)
    union = frozenset(v for p in enc.parts for v in p)
    inside = [i for i, r in enumerate(regions) if r <= union]
    crossing = [i for i, r in enumerate(regions) if r & union and not r <= union]
    touched = set(inside) | set(crossing)
    rest = [r for i, r in enumerate(regions) if i not in touched]
    flags = list(enc.notes.get("enforced_flags", [])) + closure.flags
    remaining = frozenset(g.vertices) - union
    if len(remaining) >= len(g):
        raise CertificateError("encasing removed no vertex")
    if not remaining and closure.added:
        raise CertificateError("closure edges with nothing left to recurse on")
    g0 = induced_submap(closure.g_star, remaining) if remaining else PlaneMap({})
    adj0 = g0.adjacency()
    r_star = []
    for r in _dedupe(rest + closure.regions()):
        comps = connected_components(adj0, sorted(r))
        if len(comps) > 1:
            flags.append(f"recursive region split into {len(comps)} pieces")
        r_star.extend(comps)
    r_star = _dedupe(r_star)
    outer0 = g0.outer_vertices()
    for r in closure.regions():
        if r and not r & outer0:
            raise CertificateError(f"closure set {sorted(r)[:5]} has no outer vertex after deleting the parts")
    sub = string_induct(g0, r_star, depth=depth + 1, trace=trace, verify=verify)
    g_prime = merge_added(closure.g_star, sub.g) if sub.added else closure.g_star
    added = closure.added + sub.added
    known = set(regions)
    new_regions = _dedupe(r for r in sub.regions if r not in known)
    h_prime = regions + new_regions
    parts = sorted(list(enc.parts) + list(sub.parts), key=min)
    cert = {
        "depth": depth,
        "vertices": len(g),
        "regions": len(regions),
        "encasing": {k: _enc(v) for k, v in sorted(enc.measured.items())},
        "encasing_parts": len(enc.parts),
        "closure_sets": len(closure.sets),
        "closure_edges": len(closure.added),
        "closure_width": _enc(closure.width),
        "crossing_regions": len(crossing),
    }
    if verify:
        cert.update(verify_level(g, regions, g_prime, new_regions, parts, added, level))
    if trace is not None:
        trace.write(json.dumps(cert, sort_keys=True) + "\n")
    return InductResult(g_prime, h_prime, parts, added, [cert] + sub.certificates, flags + sub.flags)


def verify_level(g, regions, g_prime, new_regions, parts, added, level) -> dict:
    """All conclusion bullets of one recursion level, measured exhaustively."""
    check_disjoint(parts)
    if set().union(*parts) != set(g.vertices):
        raise CertificateError("parts do not cover the host")
    fort = audit_fortification(g, g_prime, regions, new_regions, added, level=level)
    h_prime = list(regions) + list(new_regions)
    m = measure_impression(g_prime, h_prime, parts)
    if m.x > C.INDUCT_X or m.y > C.INDUCT_Y:
        raise CertificateError(f"level impression ({m.x}, {m.y}) exceeds ({C.INDUCT_X}, {C.INDUCT_Y})")
    outer = g.outer_vertices()
    outer_x = max_value(x for p, x in zip(parts, m.part_x) if p & outer)
    outer_y = max_value(y for r, y in zip(regions, m.region_y) if r & outer)
    if outer_x > C.FINAL_A:
        raise CertificateError(f"outer part sees region weak diameter {outer_x} > {C.FINAL_A}")
    if outer_y > C.FINAL_B:
        raise CertificateError(f"outer region sees part weak diameter {outer_y} > {C.FINAL_B}")
    return {
        "impression": [_enc(m.x), _enc(m.y)],
        "outer_bounds": [_enc(outer_x), _enc(outer_y)],
        "fortification": fort.to_json(),
    }


# --------------------------------------------------------------------------
# end-to-end


@dataclass
class StringImpression:
    g: PlaneMap
    regions: list[frozenset[int]]
    parts: list[frozenset[int]]
    impression: Impression
    span: float
    induct: InductResult


def string_impression(g: PlaneMap, regions, *, trace=None) -> StringImpression:
    """A (73936, 80)-impression of the original family on a fortification of ``g``."""
    regions = [frozenset(r) for r in regions]
    res = string_induct(g, regions, trace=trace)
    h_prime = res.regions
    if not len(g):
        imp = Impression(regions, [], C.IMPRESSION_X, C.IMPRESSION_Y, 0, 0)
        return StringImpression(g, regions, [], imp, 0, res)
    # positions of the original family inside the enlarged one
    keep = list(range(len(regions)))
    if h_prime[: len(regions)] != regions:
        raise CertificateError("enlarged family does not extend the input family")
    imp = transfer_impression(res.g, h_prime, keep, res.parts, C.INDUCT_X, C.INDUCT_Y, C.FORTIFY_K)
    span = min_z_span(res.g, regions)
    if span > C.SPAN_Z:
        raise CertificateError(f"original family {span}-spans the fortified map, above {C.SPAN_Z}")
    imp.notes["span"] = span
    return StringImpression(res.g, regions, res.parts, imp, span, res)


@dataclass
class StringQuasi:
    si: StringImpression
    report: QuasiIsometryReport
    minor: PlaneMap
    part_label: dict[int, int]
    f: dict[int, int]


def string_quasi(g: PlaneMap, regions, *, trace=None) -> StringQuasi:
    """Quasi-isometry from the string graph onto the contracted parts (a planar minor)."""
    si = string_impression(g, regions, trace=trace)
    if not si.regions:
        return StringQuasi(si, QuasiIsometryReport({}, Fraction(1), Fraction(0), Fraction(0), 0), si.g, {}, {})
    report = impression_map(si.g, si.regions, si.parts, C.IMPRESSION_X, C.IMPRESSION_Y, C.SPAN_Z)
    minor, label = contract_parts(si.g, si.parts)
    minor.audit()
    f = {i: label[p] for i, p in report.f.items()}
    return StringQuasi(si, report, minor, label, f)


@dataclass
class PipelineReport:
    output: PlaneMap
    bijection: dict[int, int]
    measured: dict
    certificates: dict

    def to_json(self) -> dict:
        return {
            "output_map": self.output.to_json(),
            "bijection": [[k, v] for k, v in sorted(self.bijection.items())],
            "constants": {
                **C.chain(),
                "lower": f"1/{C.FINAL_CONTRACTION}",
                "upper": C.FINAL_EXPANSION,
            },
            "measured": self.measured,
            "certificates": self.certificates,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def planarize_full(g: PlaneMap, regions, *, trace=None) -> PipelineReport:
    """Planar graph on the regions (the string graph's vertices) with bounded distortion."""
    regions = [frozenset(r) for r in regions]
    src = build_rig(g, regions)
    sq = string_quasi(g, regions, trace=trace)
    if not regions:
        empty = PlaneMap({})
        return PipelineReport(empty, {}, {"max_expansion": "0", "max_contraction": "0"}, {})
    bij = quasibi(src, sq.minor, sq.f, C.QUASI_X1, C.QUASI_X2, C.QUASI_X3, C.QUASI_X4)
    out = bij.graph
    out.audit()
    if sorted(out.vertices) != sorted(src):
        raise CertificateError("output vertex set differs from the string graph")
    imp = sq.si.impression
    certificates = {
        "levels": sq.si.induct.certificates,
        "flags": sq.si.induct.flags,
        "impression": imp.to_json() | {"transfer_k": imp.notes.get("transfer_k_measured"), "span": sq.si.span},
        "quasi": sq.report.to_json() | {"f": None},
        "bijection": {k: _enc(v) for k, v in sorted(bij.measured.items())},
        "added_edges": len(sq.si.induct.added),
    }
    measured = {
        "max_expansion": bij.measured["max_expansion"],
        "max_contraction": bij.measured["max_contraction"],
    }
    return PipelineReport(out, dict(bij.f), measured, certificates)
