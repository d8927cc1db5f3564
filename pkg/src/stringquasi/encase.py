"""Encasings: disjoint outer-anchored parts that wall in a region family.

The pipeline here builds, in order,

* an encircling family from the layered outerstring parts of the regions
  touching (or meeting a region touching) the outer face,
* an *enforced* encasing obtained by absorbing regions one step further in,
  organised by clean separations of the auxiliary graph ``G(B)``,
* the final encasing, coarsened by the outerplanar layering of its touching
  graph.

Every bullet of the ``(a, b, c, d)`` definition is re-measured on the result;
constants are never inherited silently.

Geometry is reduced to the combinatorial map.  Deleting everything outside
``U = union(B)`` merges host faces into region classes (one per face of
``G[U]``); facial vertex sets are the deleted vertices grouped by class.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from .constants import BASE_A as A_BASE
from .constants import CAGE_D as D_CAGE
from .constants import ENFORCED_A as A_ENFORCED
from .constants import FINAL_A as A_FINAL
from .constants import FINAL_B as B_FINAL
from .constants import SURROUND_C as C_SURROUND
from .outerstring import is_outerplanar, outerplanar_impression, outerstring_refine
from .plane import INF, PlaneMap, RegionPartition, connected_components, edge_submap, induced_submap, region_partition
from .rig import (
    CertificateError,
    DistanceOracle,
    FamilyError,
    build_im,
    build_rig,
    check_connected_family,
    check_disjoint,
    intersecting,
    max_value,
    membership,
    part_index,
)



# --------------------------------------------------------------------------
# strata of the region family


def strata(g: PlaneMap, regions: Sequence[Iterable[int]], rig=None) -> list:
    """Per region: 0 if it holds an outer vertex, else its RIG distance to such a region."""
    outer = g.outer_vertices()
    regions = [frozenset(r) for r in regions]
    if rig is None:
        rig = build_rig(g, regions, check=False)
    level = {}
    queue = deque()
    for i, r in enumerate(regions):
        if r & outer:
            level[i] = 0
            queue.append(i)
    while queue:
        i = queue.popleft()
        for j in rig[i]:
            if j not in level:
                level[j] = level[i] + 1
                queue.append(j)
    return [level.get(i, INF) for i in range(len(regions))]


def _union(sets: Iterable[Iterable[int]]) -> frozenset[int]:
    out: set[int] = set()
    for s in sets:
        out.update(s)
    return frozenset(out)


# --------------------------------------------------------------------------
# the encasing record


@dataclass
class Encasing:
    """Disjoint parts with certified ``params = (a, b, c, d)`` and measured values."""

    parts: list[frozenset[int]]
    params: tuple
    measured: dict
    cage_certs: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def certified(self) -> bool:
        for key, bound in zip("abcd", self.params):
            if key in self.measured and self.measured[key] > bound:
                return False
        return True

    def to_json(self) -> dict:
        def enc(v):
            return None if v == INF else v

        return {
            "B": [sorted(p) for p in self.parts],
            "params": [enc(p) for p in self.params],
            "measured": {k: enc(v) for k, v in sorted(self.measured.items())},
            "cage_certs": {str(k): c.to_json() for k, c in sorted(self.cage_certs.items())},
        }


def check_encircles(g: PlaneMap, regions, parts) -> None:
    """Raise CertificateError unless ``parts`` encircles ``(g, regions)``."""
    check_connected_family(g, parts)
    check_disjoint(parts)
    outer = g.outer_vertices()
    for i, p in enumerate(parts):
        if not p & outer:
            raise CertificateError(f"part {i} has no outer vertex")
    u = _union(parts)
    for i, r in enumerate(regions):
        if r & outer and not set(r) <= u:
            raise CertificateError(f"outer region {i} is not inside the encircling")


def measure_a(regions, parts, rig_oracle: DistanceOracle, index=None) -> list:
    """Weak diameter of I_H(B) in RIG(g, H) per part."""
    if index is None:
        index = membership(regions)
    return rig_oracle.weak_diameters([intersecting(regions, p, index) for p in parts])


def linked_components(adj, region: Iterable[int], union: frozenset[int]) -> list[frozenset[int]]:
    """Components of ``G[region & union]``: the maximal connected pieces of a region inside the parts."""
    inside = [v for v in region if v in union]
    return connected_components(adj, sorted(inside)) if inside else []


def measure_b(adj, regions, parts) -> list:
    """Per region: the worst IM weak diameter of the parts met by one of its inside pieces."""
    owner = part_index(parts)
    union = frozenset(owner)
    im = DistanceOracle(build_im(adj, parts, check=False))
    out = []
    for r in regions:
        pieces = [sorted({owner[v] for v in c}) for c in linked_components(adj, r, union)]
        out.append(max_value(im.weak_diameters(pieces)) if pieces else 0)
    return out


# --------------------------------------------------------------------------
# the auxiliary graph G(B)


@dataclass
class AuxGraph:
    """``IM(g, B)`` plus one node per facial vertex set.

    Nodes ``0 .. len(parts)-1`` are parts; the remaining nodes are facial
    sets in order of their least vertex.
    """

    parts: list[frozenset[int]]
    facial: list[frozenset[int]]
    facial_class: list[int]
    adj: dict[int, tuple[int, ...]]
    partition: RegionPartition
    union: frozenset[int]
    owner: dict[int, int]
    facial_of: dict[int, int]
    incident: dict[int, frozenset[int]]

    @property
    def n_parts(self) -> int:
        return len(self.parts)

    def is_facial(self, node: int) -> bool:
        return node >= len(self.parts)

    def node_set(self, node: int) -> frozenset[int]:
        return self.facial[node - len(self.parts)] if self.is_facial(node) else self.parts[node]


def build_aux(g: PlaneMap, parts: Sequence[Iterable[int]]) -> AuxGraph:
    parts = [frozenset(p) for p in parts]
    owner = part_index(parts)
    union = frozenset(owner)
    part = region_partition(g, union)
    adj = g.adjacency()
    by_class: dict[int, set[int]] = defaultdict(set)
    for v, cls in part.vertex_region.items():
        by_class[cls].add(v)
    if part.outer is not None and part.outer in by_class:
        raise CertificateError(
            f"vertex {min(by_class[part.outer])} outside the parts lies in their outer face"
        )
    facial = sorted((frozenset(s) for s in by_class.values()), key=min)
    facial_class = [part.vertex_region[min(f)] for f in facial]
    facial_of = {v: j for j, f in enumerate(facial) for v in f}
    # parts incident to each face class of G[U]
    incident: dict[int, set[int]] = defaultdict(set)
    for v in union:
        for fid in g.corner_faces(v):
            incident[part.face_region[fid]].add(owner[v])
    nb = len(parts)
    nbrs: dict[int, set[int]] = {i: set() for i in range(nb + len(facial))}
    for i, ws in build_im(adj, parts, check=False).items():
        nbrs[i].update(ws)
    for j, cls in enumerate(facial_class):
        for b in incident.get(cls, ()):
            nbrs[nb + j].add(b)
            nbrs[b].add(nb + j)
    return AuxGraph(
        parts,
        facial,
        facial_class,
        {i: tuple(sorted(s)) for i, s in nbrs.items()},
        part,
        union,
        owner,
        facial_of,
        {k: frozenset(s) for k, s in incident.items()},
    )


# --------------------------------------------------------------------------
# bounded-by and encroachment


class Topology:
    """Face structure of ``G[U]`` inside the host, shared by per-region queries."""

    def __init__(self, g: PlaneMap, parts: Sequence[Iterable[int]], aux: AuxGraph | None = None):
        self.g = g
        self.aux = aux if aux is not None else build_aux(g, parts)
        self.union = self.aux.union
        part = self.aux.partition
        outer = part.outer
        # isolated vertices have no corners and sit in the unbounded region
        self.outer_touching = frozenset(
            v for v in self.union
            if not g.corner_faces(v) or any(part.face_region[f] == outer for f in g.corner_faces(v))
        )
        self.sub = induced_submap(g, self.union)
        self._walks: dict[int, list[list]] | None = None

    def bounded(self, region: Iterable[int]) -> frozenset[int]:
        """Vertices of ``U`` bounded by the region.

        A vertex escapes when it reaches a vertex on the outer face of
        ``G[U]`` through ``G[U]`` while avoiding the region; region vertices
        themselves count as bounded.
        """
        h = set(region)
        free = [v for v in self.outer_touching if v not in h]
        seen = set(free)
        queue = deque(free)
        while queue:
            x = queue.popleft()
            for y in self.sub.rotation(x):
                if y not in seen and y not in h:
                    seen.add(y)
                    queue.append(y)
        return frozenset(v for v in self.union if v not in seen)

    def is_bounded(self, region, u: int) -> bool:
        if u not in self.union:
            raise FamilyError(f"vertex {u} is not inside the parts")
        return u in self.bounded(region)

    def walks(self) -> dict[int, list[list]]:
        """Per internal face class: boundary walks as lists of corners.

        A corner is ``(w, arriving_dart, edges)`` where ``edges`` lists the
        host neighbours of ``w`` drawn into the face, in rotation order.
        """
        if self._walks is not None:
            return self._walks
        part = self.aux.partition
        out: dict[int, list[list]] = defaultdict(list)
        seen: set = set()
        for f in self.sub.faces():
            cls = part.face_region[self.g.face_of(f.darts[0])]
            if cls == part.outer:
                continue
            corners = []
            for d in f.darts:
                seen.add(d)
                a, w = d
                nxt = self.sub.face_next(d)
                b = nxt[1]
                edges = []
                x = self.g.succ((w, a))
                while x[1] != b:
                    edges.append(x[1])
                    x = self.g.succ(x)
                corners.append((w, d, tuple(edges)))
            out[cls].append(corners)
        self._walks = dict(out)
        return self._walks

    def facial_class(self, facial_index: int) -> int:
        return self.aux.facial_class[facial_index]


@dataclass
class EncroachRun:
    """A run of host edges from ``U`` into a face, walled in by a region.

    ``edges`` are ``(u_i, v_i)`` with ``u_i`` in ``U``; ``gaps[i]`` is the
    list of walk darts between edge ``i`` and edge ``i + 1`` (wrapping when
    ``cyclic``).
    """

    face_class: int
    region: int
    edges: list[tuple[int, int]]
    gaps: list[list[tuple[int, int]]]
    cyclic: bool
    encroached: frozenset[int]


def _walk_edges(corners) -> list[tuple[int, int, int]]:
    seq = []
    for ci, (w, _d, edges) in enumerate(corners):
        for x in edges:
            seq.append((w, x, ci))
    return seq


def _gap(corners, a: tuple, b: tuple, wrap: bool) -> tuple[list[int], list[tuple[int, int]]]:
    """Walk vertices and darts from edge ``a`` to edge ``b`` along the boundary."""
    n = len(corners)
    ca, cb = a[2], b[2]
    if ca == cb and not wrap:
        return [a[0]], []
    verts = [corners[ca][0]]
    darts = []
    i = ca
    while True:
        i = (i + 1) % n
        darts.append(corners[i][1])
        verts.append(corners[i][0])
        if i == cb:
            break
    return verts, darts


def encroached(topo: Topology, facial_index: int, region: Iterable[int], region_id: int = -1,
               bounded: frozenset[int] | None = None) -> list[EncroachRun]:
    """Runs along the face of facial set ``facial_index`` that the region encroaches."""
    h = frozenset(region)
    if bounded is None:
        bounded = topo.bounded(h)
    cls = topo.facial_class(facial_index)
    runs = []
    for corners in topo.walks().get(cls, []):
        seq = _walk_edges(corners)
        n = len(seq)
        if n < 2:
            continue
        good = []
        gap_darts = []
        for k in range(n):
            a, b = seq[k], seq[(k + 1) % n]
            wrap = n == 1 or (k + 1 == n and a[2] == b[2]) or (a[2] == b[2] and (k + 1) % n < k)
            verts, darts = _gap(corners, a, b, wrap)
            good.append(all(v in bounded for v in verts))
            gap_darts.append(darts)
        both = [k for k in range(n) if seq[k][0] in h and seq[k][1] in h]
        if all(good):
            if len(both) >= 2:
                edges = [(w, x) for w, x, _ in seq]
                enc = frozenset(x for _, x in edges if x not in h)
                runs.append(EncroachRun(cls, region_id, edges, gap_darts, True, enc))
            continue
        # linear runs: start after a bad gap
        start = next(k for k in range(n) if not good[k]) + 1
        run: list[int] = []
        for step in range(n):
            k = (start + step) % n
            run.append(k)
            if not good[k] or step == n - 1:
                sel = [i for i in run if i in both]
                if len(sel) >= 2:
                    lo, hi = run.index(sel[0]), run.index(sel[-1])
                    span = run[lo:hi + 1]
                    edges = [(seq[i][0], seq[i][1]) for i in span]
                    gaps = [gap_darts[i] for i in span[:-1]]
                    enc = frozenset(x for _, x in edges if x not in h)
                    runs.append(EncroachRun(cls, region_id, edges, gaps, False, enc))
                run = []
    return runs


# --------------------------------------------------------------------------
# surrounds


@dataclass
class SurroundReport:
    c: float
    bounded_worst: float
    encroach_worst: float
    witness: tuple | None
    encroached: dict

    def to_json(self) -> dict:
        return {
            "c": None if self.c == INF else self.c,
            "bounded_worst": None if self.bounded_worst == INF else self.bounded_worst,
            "encroach_worst": None if self.encroach_worst == INF else self.encroach_worst,
            "witness": list(self.witness) if self.witness else None,
        }


def inner_rig(rig, level) -> dict[int, tuple[int, ...]]:
    """RIG restricted to regions without an outer vertex."""
    keep = {i for i in rig if level[i] != 0}
    return {i: tuple(j for j in rig[i] if j in keep) for i in sorted(keep)}


def surround_check(g: PlaneMap, regions, parts, c: int = C_SURROUND, *, topo: Topology | None = None,
                   rig=None, level=None) -> SurroundReport:
    """Smallest ``c`` for which the parts form a ``c``-surround, with the worst witness.

    ``encroached`` maps ``(facial index, region)`` to its runs, for reuse.
    """
    regions = [frozenset(r) for r in regions]
    adj = g.adjacency()
    if rig is None:
        rig = build_rig(adj, regions, check=False)
    if level is None:
        level = strata(g, regions, rig)
    if topo is None:
        topo = Topology(g, parts)
    aux = topo.aux
    union = aux.union
    inner = inner_rig(rig, level)
    oracle = DistanceOracle(inner) if inner else None
    index = membership(regions)

    def dist(a, b):
        if a == b:
            return 0
        if level[a] == 0 or level[b] == 0:
            return INF
        return oracle.dist(a, b)

    worst1, worst2 = 0, 0
    witness = None
    runs_by_pair: dict[tuple[int, int], list[EncroachRun]] = {}
    for hi, h in enumerate(regions):
        meets = h & union
        if not meets:
            continue
        inside = h <= union
        faces = sorted({aux.facial_of[v] for v in h if v in aux.facial_of})
        if inside and not faces:
            continue
        bd = topo.bounded(h)
        if not inside:
            for other in intersecting(regions, bd, index):
                d = dist(other, hi) + 1
                # bullet one allows c - 1; store as c-equivalent
                if d > worst1:
                    worst1 = d
                    if d > c:
                        witness = ("bounded", other, hi)
        for j in faces:
            runs = encroached(topo, j, h, hi, bd)
            if not runs:
                continue
            runs_by_pair[(j, hi)] = runs
            enc = _union(r.encroached for r in runs)
            for other in intersecting(regions, enc, index):
                d = dist(other, hi)
                if d > worst2:
                    worst2 = d
                    if d > c:
                        witness = ("encroach", other, hi)
    return SurroundReport(max(worst1, worst2), worst1, worst2, witness, runs_by_pair)


# --------------------------------------------------------------------------
# cages


@dataclass
class CageCertificate:
    """Worst pair of a region and a shortest admissible chain between them."""

    region: int
    u: int
    v: int
    t: float
    chain: list[tuple[str, tuple[int, ...]]]

    def to_json(self) -> dict:
        return {
            "u": self.u,
            "v": self.v,
            "t": None if self.t == INF else self.t,
            "chain": [[kind, list(members)] for kind, members in self.chain],
        }


@dataclass
class CageReport:
    d: float
    per_region: list
    certs: dict[int, CageCertificate]


def _cage_region(aux: AuxGraph, im_adj, adj, h: frozenset[int], unions: list[frozenset[int]]):
    """Admissible-chain BFS for one region over the given part unions.

    Nodes: ('B', i), ('F', j), ('U', k).  Consecutive sets must touch or
    share a part; a part-side set and a facial set are consecutive when a
    host edge joins them at a region vertex of the facial set.
    """
    owner = aux.owner
    # parts adjacent to each facial set through region vertices
    f_parts: dict[int, set[int]] = defaultdict(set)
    for v in h:
        j = aux.facial_of.get(v)
        if j is None:
            continue
        for w in adj[v]:
            b = owner.get(w)
            if b is not None:
                f_parts[j].add(b)
    closure = [set(s) | {w for b in s for w in im_adj[b]} for s in unions]

    def neighbours(node):
        kind, i = node
        if kind == "B":
            for w in im_adj[i]:
                yield ("B", w)
            for k, s in enumerate(unions):
                if i in closure[k]:
                    yield ("U", k)
            for j, ps in f_parts.items():
                if i in ps:
                    yield ("F", j)
        elif kind == "U":
            s = unions[i]
            for b in closure[i]:
                yield ("B", b)
            for k, t in enumerate(unions):
                if k != i and closure[k] & s:
                    yield ("U", k)
            for j, ps in f_parts.items():
                if ps & s:
                    yield ("F", j)
        else:
            ps = f_parts.get(i, ())
            for b in ps:
                yield ("B", b)
            for k, s in enumerate(unions):
                if s & ps:
                    yield ("U", k)

    # candidate sets containing each vertex
    def containing(v):
        if v in owner:
            return [("B", owner[v])] + [("U", k) for k, s in enumerate(unions) if owner[v] in s]
        return [("F", aux.facial_of[v])]

    signature: dict[tuple, list[int]] = defaultdict(list)
    for v in sorted(h):
        signature[tuple(sorted(containing(v)))].append(v)
    sigs = sorted(signature)
    worst = (0, min(h), min(h), [])
    for sig in sigs:
        dist = {n: 0 for n in sig}
        parent = {n: None for n in sig}
        queue = deque(sig)
        while queue:
            x = queue.popleft()
            for y in neighbours(x):
                if y not in dist:
                    dist[y] = dist[x] + 1
                    parent[y] = x
                    queue.append(y)
        for sig2 in sigs:
            best = min((dist.get(n, INF) for n in sig2), default=INF)
            if best > worst[0] or (best == worst[0] == INF and not worst[3]):
                end = min((n for n in sig2 if dist.get(n, INF) == best), default=None)
                chain = []
                while end is not None and best != INF:
                    chain.append(end)
                    end = parent[end]
                worst = (best, signature[sig][0], signature[sig2][0], chain[::-1])
    return worst


def _node_members(aux: AuxGraph, unions, node) -> tuple[int, ...]:
    kind, i = node
    if kind == "B":
        return (i,)
    if kind == "U":
        return tuple(sorted(unions[i]))
    return (aux.n_parts + i,)


def cage_check(g: PlaneMap, regions, parts, d: int = D_CAGE, *, aux: AuxGraph | None = None,
               exhaustive: bool = False) -> CageReport:
    """Least ``d`` such that every region is ``d``-caged, with per-region certificates.

    Candidate unions are the part sets met by each component of
    ``G[H & U]``; any admissible union lies inside one of them and the
    chain conditions only get easier for larger sets.  With ``exhaustive``
    every part subset linked by the region is tried instead (small inputs).
    """
    regions = [frozenset(r) for r in regions]
    if aux is None:
        aux = build_aux(g, parts)
    adj = g.adjacency()
    im_adj = {i: tuple(w for w in aux.adj[i] if w < aux.n_parts) for i in range(aux.n_parts)}
    per_region = []
    certs = {}
    for hi, h in enumerate(regions):
        comps = linked_components(adj, h, aux.union)
        if exhaustive:
            met = sorted({aux.owner[v] for v in h if v in aux.owner})
            unions = []
            for size in range(2, len(met) + 1):
                for sub in combinations(met, size):
                    inside = _union(aux.parts[b] for b in sub)
                    for c in linked_components(adj, h, inside):
                        if {aux.owner[v] for v in c} == set(sub):
                            unions.append(frozenset(sub))
                            break
        else:
            unions = sorted({frozenset(aux.owner[v] for v in c) for c in comps if len({aux.owner[v] for v in c}) > 1},
                            key=lambda s: sorted(s))
        t, u, v, chain = _cage_region(aux, im_adj, adj, h, unions)
        per_region.append(t)
        if t > 0:
            certs[hi] = CageCertificate(
                hi, u, v, t, [(kind, _node_members(aux, unions, (kind, i))) for kind, i in chain]
            )
    return CageReport(max_value(per_region), per_region, certs)


# --------------------------------------------------------------------------
# the base encircling


def encircle_base(g: PlaneMap, regions, *, rig=None, level=None) -> Encasing:
    """Outerstring parts of the regions within one step of the outer face."""
    regions = [frozenset(r) for r in regions]
    adj = g.adjacency()
    if rig is None:
        rig = build_rig(adj, regions, check=False)
    if level is None:
        level = strata(g, regions, rig)
    near = [i for i in range(len(regions)) if level[i] <= 1]
    union = _union(regions[i] for i in near)
    edges = set()
    for i in near:
        r = regions[i]
        for v in r:
            for w in adj[v]:
                if w in r and v < w:
                    edges.add((v, w))
    gstar = edge_submap(g, edges, union)
    outer0 = [i for i in near if level[i] == 0]
    lifted = []
    for i in near:
        if level[i] == 0:
            lifted.append(regions[i])
        else:
            partner = min(j for j in rig[i] if level[j] == 0)
            lifted.append(regions[i] | regions[partner])
    if not near:
        raise FamilyError("no region reaches the outer face")
    merged, partial = outerstring_refine(gstar, lifted)
    if _union(merged) != union:
        raise CertificateError("encircling parts do not cover the near regions")
    check_encircles(g, regions, merged)
    oracle = DistanceOracle(rig)
    a = max_value(measure_a(regions, merged, oracle))
    enc = Encasing(merged, (A_BASE, INF, INF, INF), {"a": a})
    enc.notes.update({"near_regions": len(near), "outer_regions": len(outer0), "induct_steps": len(partial.trace)})
    if a > A_BASE:
        raise CertificateError(f"base encircling has a = {a} > {A_BASE}")
    return enc


# --------------------------------------------------------------------------
# clean separations


@dataclass
class CleanSeparation:
    cut: tuple[int, ...]
    y: frozenset[int]
    kind: str
    reach: frozenset[int] = frozenset()
    facial_take: frozenset[int] = frozenset()
    v_sets: tuple[frozenset[int], ...] = ()
    children: list[int] = field(default_factory=list)


@dataclass
class SeparationTree:
    nodes: list[CleanSeparation]
    root: int
    flags: list[str] = field(default_factory=list)


def _side_away(adj, removed: set[int], root: int, nodes: Iterable[int]) -> frozenset[int]:
    """Nodes not connected to ``root`` once ``removed`` is deleted."""
    seen = {root}
    queue = deque([root])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if y not in seen and y not in removed:
                seen.add(y)
                queue.append(y)
    return frozenset(n for n in nodes if n not in seen and n not in removed)


def clean_separations(aux: AuxGraph, root: int, nodes: Iterable[int] | None = None) -> list[CleanSeparation]:
    """Every 1-clean and 2-clean separation with ``root`` on the X side.

    Cuts are parts only.  ``Y`` is the cut plus everything the cut separates
    from the root, which is the unique maximal choice for that cut.
    """
    adj = aux.adj
    nodes = sorted(adj if nodes is None else nodes)
    node_set = set(nodes)
    parts = [n for n in nodes if not aux.is_facial(n) and n != root]
    one: dict[int, frozenset[int]] = {}
    out = []
    for c in parts:
        away = _side_away(adj, {c}, root, nodes)
        if away:
            one[c] = away | {c}
            out.append(CleanSeparation((c,), one[c], "one_clean"))
    for a in parts:
        for b in adj[a]:
            if b <= a or b not in node_set or aux.is_facial(b) or b == root:
                continue
            away = _side_away(adj, {a, b}, root, nodes)
            if not away:
                continue
            y = away | {a, b}
            if any(c in one and one[c] <= y for c in (a, b)):
                continue
            out.append(CleanSeparation((a, b), y, "two_clean"))
    return out


def separation_tree(aux: AuxGraph, regions, root: int, nodes: Iterable[int], level) -> SeparationTree:
    """Root ``({root}, nodes)`` and all descendants under the child rule."""
    nodes = frozenset(nodes)
    index = membership(regions)
    candidates = clean_separations(aux, root, nodes)

    def reach(cut) -> frozenset[int]:
        touched = intersecting(regions, _union(aux.parts[c] for c in cut), index)
        met = set()
        for r in touched:
            met.update(aux.owner[v] for v in regions[r] if v in aux.owner)
        return frozenset(met)

    tree_nodes = [CleanSeparation((root,), nodes, "root")]
    tree_nodes[0].reach = reach((root,)) & nodes
    seen = {((root,), nodes): 0}
    queue = deque([0])
    while queue:
        ni = queue.popleft()
        node = tree_nodes[ni]
        fits = [s for s in candidates if s.y <= node.y and not (s.y & node.reach) and s.y != node.y]
        maximal = [s for s in fits if not any(s.y < t.y for t in fits)]
        for s in sorted(maximal, key=lambda s: (s.cut, sorted(s.y))):
            key = (s.cut, s.y)
            if key not in seen:
                child = CleanSeparation(s.cut, s.y, s.kind)
                child.reach = reach(s.cut) & s.y
                seen[key] = len(tree_nodes)
                tree_nodes.append(child)
                queue.append(seen[key])
            node.children.append(seen[key])
    return SeparationTree(tree_nodes, 0)


def _facial_take(aux: AuxGraph, regions, level, node: CleanSeparation, index) -> frozenset[int]:
    """Facial vertices on the Y side lying in a second-ring region that meets the cut."""
    cut_union = _union(aux.parts[c] for c in node.cut)
    y_facial = _union(aux.node_set(n) for n in node.y if aux.is_facial(n))
    out = set()
    for r in intersecting(regions, cut_union, index):
        if level[r] == 2:
            out.update(v for v in regions[r] if v in y_facial)
    return frozenset(out)


def _voronoi(adj, allowed: set[int], first: Iterable[int], second: Iterable[int]) -> tuple[set[int], set[int]]:
    """Split ``allowed`` by BFS from two seed sets; ties go to the first."""
    label = {}
    queue = deque()
    for v in sorted(first):
        label[v] = 0
        queue.append(v)
    for v in sorted(second):
        if v not in label:
            label[v] = 1
            queue.append(v)
    while queue:
        x = queue.popleft()
        for y in sorted(adj[x]):
            if y in allowed and y not in label:
                label[y] = label[x]
                queue.append(y)
    if len(label) != len(allowed):
        missing = min(set(allowed) - label.keys())
        raise CertificateError(f"separation set is disconnected at vertex {missing}")
    return {v for v, l in label.items() if l == 0}, {v for v, l in label.items() if l == 1}


def enforced_encase(g: PlaneMap, regions, *, rig=None, level=None) -> Encasing:
    """Base encircling enlarged along clean separations; certified (840, inf, inf, 7)."""
    regions = [frozenset(r) for r in regions]
    adj = g.adjacency()
    if rig is None:
        rig = build_rig(adj, regions, check=False)
    if level is None:
        level = strata(g, regions, rig)
    base = encircle_base(g, regions, rig=rig, level=level)
    aux = build_aux(g, base.parts)
    index = membership(regions)
    flags = []
    v_sets: list[frozenset[int]] = []
    trees = []
    for comp in connected_components(aux.adj):
        b_nodes = sorted(n for n in comp if not aux.is_facial(n))
        if not b_nodes:
            raise CertificateError("auxiliary component without a part")
        tree = separation_tree(aux, regions, b_nodes[0], comp, level)
        trees.append(tree)
        for node in tree.nodes:
            node.facial_take = _facial_take(aux, regions, level, node, index)
            total = set(node.facial_take) | _union(aux.parts[r] for r in node.reach)
            if node.kind == "two_clean":
                b1, b2 = node.cut
                v1, v2 = _voronoi(adj, total, aux.parts[b1], aux.parts[b2])
                node.v_sets = (frozenset(v1), frozenset(v2))
            else:
                if not _connected(adj, total):
                    raise CertificateError(f"separation set at cut {node.cut} is disconnected")
                node.v_sets = (frozenset(total),)
            v_sets.extend(node.v_sets)
    # overlapping sets from different tree nodes are merged
    merged = _merge_overlapping(v_sets)
    if len(merged) != len(v_sets):
        flags.append(f"merged {len(v_sets) - len(merged)} overlapping separation sets")
    covered = _union(merged)
    parts = [p for p in base.parts if not p & covered] + merged
    parts = sorted(parts, key=min)
    near = _union(regions[i] for i in range(len(regions)) if level[i] <= 1)
    ring2 = _union(regions[i] for i in range(len(regions)) if level[i] <= 2)
    union = _union(parts)
    if not (near <= union <= ring2):
        raise CertificateError("enforced sandwich fails")
    check_enforced(adj, regions, parts, level)
    check_encircles(g, regions, parts)
    oracle = DistanceOracle(rig)
    a = max_value(measure_a(regions, parts, oracle))
    cage = cage_check(g, regions, parts)
    enc = Encasing(parts, (A_ENFORCED, INF, INF, D_CAGE), {"a": a, "d": cage.d}, cage.certs)
    enc.notes.update(
        {
            "tree_nodes": sum(len(t.nodes) for t in trees),
            "flags": flags,
            "base_a": base.measured["a"],
        }
    )
    if not enc.certified():
        raise CertificateError(f"enforced encasing measured {enc.measured} exceeds {enc.params}")
    return enc


def _connected(adj, s) -> bool:
    s = set(s)
    return len(s) <= 1 or len(connected_components(adj, sorted(s))) == 1


def _merge_overlapping(sets: list[frozenset[int]]) -> list[frozenset[int]]:
    owner: dict[int, int] = {}
    parent = list(range(len(sets)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, s in enumerate(sets):
        for v in s:
            if v in owner:
                a, b = find(owner[v]), find(i)
                if a != b:
                    parent[max(a, b)] = min(a, b)
            else:
                owner[v] = i
    groups: dict[int, set[int]] = defaultdict(set)
    for i, s in enumerate(sets):
        groups[find(i)].update(s)
    return sorted((frozenset(s) for s in groups.values()), key=min)


def check_enforced(adj, regions, parts, level) -> None:
    """Every added vertex lies in a second-ring piece linked to the near regions."""
    union = _union(parts)
    near = _union(regions[i] for i in range(len(regions)) if level[i] <= 1)
    extra = set(union - near)
    for i, r in enumerate(regions):
        if level[i] != 2 or not extra:
            continue
        for c in linked_components(adj, r, union):
            if c & near:
                extra -= c
    if extra:
        raise CertificateError(f"vertex {min(extra)} is not linked to the near regions")


# --------------------------------------------------------------------------
# the final encasing


def encase_final(g: PlaneMap, regions, *, rig=None, level=None, verify_outerplanar: bool = True) -> Encasing:
    """The enforced encasing coarsened by the layering of its touching graph."""
    regions = [frozenset(r) for r in regions]
    adj = g.adjacency()
    if rig is None:
        rig = build_rig(adj, regions, check=False)
    if level is None:
        level = strata(g, regions, rig)
    enforced = enforced_encase(g, regions, rig=rig, level=level)
    mid = enforced.parts
    owner = part_index(mid)
    union = frozenset(owner)
    quotient = build_im(adj, mid, check=False)
    if verify_outerplanar and not is_outerplanar(quotient):
        raise CertificateError("touching graph of the encircling is not outerplanar")
    lifted = []
    for r in regions:
        for c in linked_components(adj, r, union):
            lifted.append(frozenset(owner[v] for v in c))
    inner = outerplanar_impression(quotient, lifted, check_outerplanar=False)
    parts = sorted((_union(mid[i] for i in p) for p in inner.parts), key=min)
    return certify_encasing(g, regions, parts, rig=rig, level=level, notes={
        "enforced": enforced.measured,
        "enforced_flags": enforced.notes.get("flags", []),
        "quotient_impression": (inner.measured_x, inner.measured_y),
    })


def certify_encasing(g: PlaneMap, regions, parts, *, rig=None, level=None, notes=None,
                     params=(A_FINAL, B_FINAL, C_SURROUND, D_CAGE), strict: bool = True) -> Encasing:
    """Measure all four bullets of an encasing candidate."""
    regions = [frozenset(r) for r in regions]
    adj = g.adjacency()
    if rig is None:
        rig = build_rig(adj, regions, check=False)
    if level is None:
        level = strata(g, regions, rig)
    check_encircles(g, regions, parts)
    aux = build_aux(g, parts)
    topo = Topology(g, parts, aux)
    oracle = DistanceOracle(rig)
    a = max_value(measure_a(regions, parts, oracle))
    b = max_value(measure_b(adj, regions, parts))
    surround = surround_check(g, regions, parts, params[2], topo=topo, rig=rig, level=level)
    cage = cage_check(g, regions, parts, params[3], aux=aux)
    enc = Encasing(list(parts), tuple(params), {"a": a, "b": b, "c": surround.c, "d": cage.d}, cage.certs)
    enc.notes.update(notes or {})
    enc.notes["surround"] = surround.to_json()
    enc.notes["_topology"] = topo
    enc.notes["_runs"] = surround.encroached
    if strict and not enc.certified():
        raise CertificateError(f"encasing measured {enc.measured} exceeds {enc.params}")
    return enc
