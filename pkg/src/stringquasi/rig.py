"""Region intersection graphs, induced-minor quotients and impressions.

Abstract graphs are plain adjacency mappings ``{node: tuple(neighbours)}``.
A *family* is a list of vertex sets over a host graph; its index is the
node id in the derived graph.  Distances are exact integers, with
``INF`` for unreachable pairs.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .plane import (
    INF,
    PlaneMap,
    add_pendant,
    bfs_distances,
    connected_components,
    contract_forest,
    is_connected_set,
)

Adjacency = Mapping[int, Sequence[int]]


class FamilyError(ValueError):
    """A family violates its structural preconditions."""


class CertificateError(AssertionError):
    """A claimed inequality failed on a concrete witness."""


def _adj_of(g) -> dict:
    return g.adjacency() if isinstance(g, PlaneMap) else g


def check_connected_family(g, sets: Sequence[Iterable[int]]) -> None:
    adj = _adj_of(g)
    for i, s in enumerate(sets):
        s = set(s)
        if not s:
            raise FamilyError(f"set {i} is empty")
        if not s <= adj.keys():
            raise FamilyError(f"set {i} has vertices outside the host")
        if not is_connected_set(adj, s):
            raise FamilyError(f"set {i} is not connected in the host")


def check_disjoint(sets: Sequence[Iterable[int]]) -> None:
    owner = {}
    for i, s in enumerate(sets):
        for v in s:
            if v in owner:
                raise FamilyError(f"sets {owner[v]} and {i} overlap at vertex {v}")
            owner[v] = i


def membership(sets: Sequence[Iterable[int]]) -> dict[int, list[int]]:
    """Vertex -> sorted indices of the sets containing it."""
    out: dict[int, list[int]] = defaultdict(list)
    for i, s in enumerate(sets):
        for v in s:
            out[v].append(i)
    return out


def build_rig(g, sets: Sequence[Iterable[int]], *, check: bool = True) -> dict[int, tuple[int, ...]]:
    """Intersection graph of the family: members adjacent iff they share a vertex."""
    if check:
        check_connected_family(g, sets)
    nbrs: dict[int, set[int]] = {i: set() for i in range(len(sets))}
    for members in membership(sets).values():
        for a, b in combinations(members, 2):
            nbrs[a].add(b)
            nbrs[b].add(a)
    return {i: tuple(sorted(n)) for i, n in nbrs.items()}


def part_index(parts: Sequence[Iterable[int]]) -> dict[int, int]:
    check_disjoint(parts)
    return {v: i for i, p in enumerate(parts) for v in p}


def build_im(g, parts: Sequence[Iterable[int]], *, check: bool = True) -> dict[int, tuple[int, ...]]:
    """Touching graph of disjoint connected parts."""
    adj = _adj_of(g)
    if check:
        check_connected_family(adj, parts)
    owner = part_index(parts)
    nbrs: dict[int, set[int]] = {i: set() for i in range(len(parts))}
    for u, i in owner.items():
        for w in adj[u]:
            j = owner.get(w)
            if j is not None and j != i:
                nbrs[i].add(j)
    return {i: tuple(sorted(n)) for i, n in nbrs.items()}


def intersecting(sets: Sequence[Iterable[int]], target: Iterable[int], index=None) -> list[int]:
    """I_sets(target): indices of members meeting ``target``."""
    if index is None:
        index = membership(sets)
    out = set()
    for v in target:
        out.update(index.get(v, ()))
    return sorted(out)


# --------------------------------------------------------------------------
# distances


class DistanceOracle:
    """Exact unweighted distances on an abstract graph.

    Rows are computed on demand with a compiled BFS and cached, so weak
    diameters of many small subsets stay cheap on graphs with thousands of
    nodes.
    """

    def __init__(self, adj: Adjacency):
        self.nodes = sorted(adj)
        self.pos = {v: i for i, v in enumerate(self.nodes)}
        rows, cols = [], []
        for v, ws in adj.items():
            for w in ws:
                rows.append(self.pos[v])
                cols.append(self.pos[w])
        n = len(self.nodes)
        self.csr = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        self._rows: dict[int, np.ndarray] = {}

    def prefetch(self, sources: Iterable[int], chunk: int = 512) -> None:
        todo = sorted({self.pos[s] for s in sources} - self._rows.keys())
        for k in range(0, len(todo), chunk):
            idx = todo[k:k + chunk]
            block = shortest_path(self.csr, method="D", unweighted=True, directed=False, indices=idx)
            block = np.atleast_2d(block)
            for i, r in zip(idx, block):
                self._rows[i] = r

    def row(self, s: int) -> np.ndarray:
        i = self.pos[s]
        if i not in self._rows:
            self.prefetch([s])
        return self._rows[i]

    def dist(self, s: int, t: int):
        d = self.row(s)[self.pos[t]]
        return INF if np.isinf(d) else int(d)

    def weak_diameter(self, subset: Iterable[int]):
        members = sorted(set(subset))
        if len(members) <= 1:
            return 0
        cols = [self.pos[m] for m in members]
        best = 0.0
        for s in members[:-1]:
            best = max(best, float(self.row(s)[cols].max()))
            if np.isinf(best):
                return INF
        return int(best)

    def weak_diameters(self, subsets: Sequence[Iterable[int]]) -> list:
        subsets = [sorted(set(s)) for s in subsets]
        self.prefetch({v for s in subsets for v in s[:-1]})
        return [self.weak_diameter(s) for s in subsets]

    def drop_cache(self) -> None:
        self._rows.clear()


def weak_diameter(adj: Adjacency, subset: Iterable[int]):
    """Largest distance in ``adj`` between two members of ``subset``."""
    members = sorted(set(subset))
    if len(members) <= 1:
        return 0
    best = 0
    for s in members[:-1]:
        dist = bfs_distances(adj, s)
        for t in members:
            d = dist.get(t, INF)
            if d > best:
                best = d
    return best


def all_pairs(adj: Adjacency) -> dict[int, dict[int, int]]:
    return {s: bfs_distances(adj, s) for s in adj}


def max_value(values: Iterable) -> int | float:
    return max(values, default=0)


# --------------------------------------------------------------------------
# spanning


def min_z_span(g, sets: Sequence[Iterable[int]], rig: Adjacency | None = None):
    """Least z such that every host edge has endpoint regions within RIG distance z."""
    adj = _adj_of(g)
    index = membership(sets)
    for v in adj:
        if v not in index:
            return INF
    if rig is None:
        rig = build_rig(adj, sets, check=False)
    oracle = DistanceOracle(rig)
    worst = 0
    for u in sorted(adj):
        for v in adj[u]:
            if v < u:
                continue
            hu, hv = index[u], index[v]
            if set(hu) & set(hv):
                continue
            oracle.prefetch(hu)
            best = min(oracle.dist(a, b) for a in hu for b in hv)
            worst = max(worst, best)
    return worst


# --------------------------------------------------------------------------
# impressions


@dataclass
class Impression:
    """Disjoint cover ``parts`` of the host, measured against ``regions``.

    ``x``/``y`` are the certified constants (what a theorem guarantees);
    ``measured_x``/``measured_y`` come from exhaustive computation.
    """

    regions: list[frozenset[int]]
    parts: list[frozenset[int]]
    x: float
    y: float
    measured_x: float
    measured_y: float
    notes: dict = field(default_factory=dict)

    def certified(self) -> bool:
        return self.measured_x <= self.x and self.measured_y <= self.y

    def to_json(self) -> dict:
        def enc(v):
            return None if v == INF else v

        return {
            "parts": [sorted(p) for p in self.parts],
            "x": enc(self.x),
            "y": enc(self.y),
            "measured_x": enc(self.measured_x),
            "measured_y": enc(self.measured_y),
        }


@dataclass
class ImpressionMeasure:
    x: float
    y: float
    part_x: list
    region_y: list


def measure_impression(
    g,
    regions: Sequence[Iterable[int]],
    parts: Sequence[Iterable[int]],
    *,
    rig: Adjacency | None = None,
    im: Adjacency | None = None,
) -> ImpressionMeasure:
    """Exact (x, y) of a candidate impression, with per-part and per-region values."""
    adj = _adj_of(g)
    parts = [frozenset(p) for p in parts]
    owner = part_index(parts)
    for v in sorted(adj):
        if v not in owner:
            raise CertificateError(f"vertex {v} is covered by no part")
    if rig is None:
        rig = build_rig(adj, regions, check=False)
    if im is None:
        im = build_im(adj, parts, check=False)
    index = membership(regions)
    part_sets = [intersecting(regions, p, index) for p in parts]
    region_sets = [sorted({owner[v] for v in r}) for r in regions]
    part_x = DistanceOracle(rig).weak_diameters(part_sets)
    region_y = DistanceOracle(im).weak_diameters(region_sets)
    return ImpressionMeasure(max_value(part_x), max_value(region_y), part_x, region_y)


def verify_impression(g, regions, parts) -> tuple:
    """Measured (x, y); raises CertificateError if ``parts`` is not a cover."""
    adj = _adj_of(g)
    check_connected_family(adj, parts)
    m = measure_impression(adj, regions, parts)
    return m.x, m.y


def brute_force_impression(g, regions, parts) -> tuple:
    """Double loop over pairs with plain BFS; slow oracle for tests."""
    adj = _adj_of(g)
    rig = build_rig(adj, regions, check=False)
    im = build_im(adj, parts, check=False)
    d_rig = all_pairs(rig)
    d_im = all_pairs(im)
    x = 0
    for p in parts:
        meet = [i for i, r in enumerate(regions) if set(r) & set(p)]
        for a in meet:
            for b in meet:
                x = max(x, d_rig[a].get(b, INF))
    y = 0
    for r in regions:
        meet = [i for i, p in enumerate(parts) if set(r) & set(p)]
        for a in meet:
            for b in meet:
                y = max(y, d_im[a].get(b, INF))
    return x, y


def make_impression(g, regions, parts, x, y, *, strict: bool = True, notes=None) -> Impression:
    m = measure_impression(g, regions, parts)
    imp = Impression(
        [frozenset(r) for r in regions],
        [frozenset(p) for p in parts],
        x,
        y,
        m.x,
        m.y,
        dict(notes or {}),
    )
    if strict and not imp.certified():
        raise CertificateError(
            f"measured ({m.x}, {m.y}) exceeds certified ({x}, {y})"
        )
    return imp


def transfer_impression(
    g,
    big_regions: Sequence[Iterable[int]],
    keep: Sequence[int],
    parts: Sequence[Iterable[int]],
    x,
    y,
    k: int,
) -> Impression:
    """Re-certify an impression of a larger family for the subfamily ``keep``.

    Every dropped region must meet subfamily members of weak diameter at most
    ``k``; the result carries certified ``(k * x, y)``.
    """
    adj = _adj_of(g)
    keep = sorted(set(keep))
    small = [frozenset(big_regions[i]) for i in keep]
    covered = set().union(*small) if small else set()
    missing = set(adj) - covered
    if missing:
        raise FamilyError(f"subfamily misses vertex {min(missing)}")
    rig = build_rig(adj, small, check=False)
    oracle = DistanceOracle(rig)
    index = membership(small)
    kept = set(keep)
    dropped = [i for i in range(len(big_regions)) if i not in kept]
    widths = oracle.weak_diameters([intersecting(small, big_regions[i], index) for i in dropped])
    for i, w in zip(dropped, widths):
        if w > k:
            raise CertificateError(f"dropped region {i} meets subfamily with weak diameter {w} > {k}")
    cert_x = k * x
    imp = make_impression(adj, small, parts, cert_x, y)
    imp.notes["transfer_k_measured"] = max_value(widths)
    return imp


# --------------------------------------------------------------------------
# Quasi-isometries


@dataclass
class QuasiIsometryReport:
    f: dict[int, int]
    lower_slope: Fraction
    lower_offset: Fraction
    upper_slope: Fraction
    cobounded_radius: int
    pairs_checked: int = 0
    measured: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "f": [[k, v] for k, v in sorted(self.f.items())],
            "lower_slope": str(self.lower_slope),
            "lower_offset": str(self.lower_offset),
            "upper_slope": str(self.upper_slope),
            "cobounded_radius": self.cobounded_radius,
            "pairs_checked": self.pairs_checked,
            "measured": self.measured,
        }


def least_part_map(regions, parts) -> dict[int, int]:
    """f(H) = least index of a part meeting H."""
    owner = part_index(parts)
    return {i: min(owner[v] for v in r) for i, r in enumerate(regions)}


def impression_map(g, regions, parts, x, y, z) -> QuasiIsometryReport:
    """Quasi-isometry RIG(g, regions) -> IM(g, parts) from an (x, y)-impression.

    Checks, for every pair of regions, the integer form of
    ``d_R/(x+z) - x/(x+z) <= d_IM(f H1, f H2) <= 2y d_R`` and the cobounded
    radius ``y``.  Unreachable pairs must be unreachable on both sides.
    """
    adj = _adj_of(g)
    rig = build_rig(adj, regions, check=False)
    im = build_im(adj, parts, check=False)
    f = least_part_map(regions, parts)
    n = len(regions)
    d_rig = DistanceOracle(rig)
    d_im = DistanceOracle(im)
    d_rig.prefetch(range(n))
    d_im.prefetch(set(f.values()))
    max_ratio = Fraction(0)
    checked = 0
    for a in range(n):
        ra = d_rig.row(a)
        ia = d_im.row(f[a])
        for b in range(a + 1, n):
            dr = ra[b]
            di = ia[d_im.pos[f[b]]]
            checked += 1
            if np.isinf(dr) or np.isinf(di):
                if not (np.isinf(dr) and np.isinf(di)):
                    raise CertificateError(f"regions {a},{b}: reachability differs (d_R={dr}, d_IM={di})")
                continue
            dr, di = int(dr), int(di)
            if dr - x > (x + z) * di:
                raise CertificateError(f"lower bound fails at regions {a},{b}: d_R={dr}, d_IM={di}")
            if di > 2 * y * dr:
                raise CertificateError(f"upper bound fails at regions {a},{b}: d_R={dr}, d_IM={di}")
            if dr:
                max_ratio = max(max_ratio, Fraction(di, dr))
    # cobounded: every part within y of the image
    images = sorted(set(f.values()))
    reach = _multi_source(im, images)
    radius = max((reach.get(p, INF) for p in im), default=0)
    if radius > y:
        raise CertificateError(f"part at distance {radius} > {y} from the image of f")
    return QuasiIsometryReport(
        f,
        Fraction(1, x + z) if x + z else Fraction(1),
        Fraction(x, x + z) if x + z else Fraction(0),
        Fraction(2 * y),
        y,
        checked,
        {"max_expansion": str(max_ratio), "cobounded_radius": radius},
    )


def _multi_source(adj: Adjacency, sources: Iterable[int]) -> dict:
    from collections import deque

    dist = {s: 0 for s in sources}
    queue = deque(sorted(dist))
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


# --------------------------------------------------------------------------
# making the map bijective


@dataclass
class BijectionResult:
    graph: PlaneMap
    f: dict[int, int]
    forest: list[tuple[int, int]]
    depth: int
    label_map: dict[int, int]
    measured: dict


def bfs_forest(adj: Adjacency, roots: Iterable[int]) -> tuple[list[tuple[int, int]], dict[int, int]]:
    """Layered forest from ``roots``; each vertex's parent is its least-label
    neighbour in the previous layer.  Returns edges and depths."""
    depth = {r: 0 for r in roots}
    layer = sorted(depth)
    edges = []
    while layer:
        nxt = set()
        for u in layer:
            for w in adj[u]:
                if w not in depth:
                    nxt.add(w)
        d = depth[layer[0]] + 1 if layer else 0
        for w in sorted(nxt):
            parent = min(u for u in adj[w] if depth.get(u) == d - 1)
            depth[w] = d
            edges.append((parent, w))
        layer = sorted(nxt)
    return edges, depth


def check_quasi_hypothesis(src: Adjacency, h_adj: Adjacency, f, x1, x2, x3, x4) -> dict:
    """Exhaustively check the hypotheses of the bijection step."""
    nodes = sorted(src)
    d_src = DistanceOracle(src)
    d_h = DistanceOracle(h_adj)
    d_src.prefetch(nodes)
    d_h.prefetch({f[u] for u in nodes})
    for i, u in enumerate(nodes):
        for v in nodes[i + 1:]:
            ds = d_src.dist(u, v)
            dh = d_h.dist(f[u], f[v])
            if ds == INF or dh == INF:
                if ds != dh:
                    raise CertificateError(f"pair {u},{v}: reachability differs")
                continue
            if ds - x2 > x1 * dh:
                raise CertificateError(f"pair {u},{v}: lower hypothesis fails ({ds}, {dh})")
            if dh > x3 * ds:
                raise CertificateError(f"pair {u},{v}: upper hypothesis fails ({ds}, {dh})")
    reach = _multi_source(h_adj, {f[u] for u in nodes})
    radius = max((reach.get(v, INF) for v in h_adj), default=0)
    if radius > x4:
        raise CertificateError(f"vertex at distance {radius} > {x4} from the image")
    return {"cobounded_radius": radius}


def quasibi(src: Adjacency, h: PlaneMap, f: Mapping[int, int], x1, x2, x3, x4) -> BijectionResult:
    """Turn ``f: V(src) -> V(h)`` into a bijection onto a minor of ``h`` plus pendants.

    The output map's vertex labels are the source vertices.
    """
    f = dict(f)
    hyp = check_quasi_hypothesis(src, h.adjacency(), f, x1, x2, x3, x4)
    roots = sorted(set(f.values()))
    forest, depth = bfs_forest(h.adjacency(), roots)
    max_depth = max(depth.values(), default=0)
    if len(depth) != len(h) or max_depth > x4:
        raise CertificateError("forest does not reach every vertex within the radius")
    preimages: dict[int, list[int]] = defaultdict(list)
    for u in sorted(f):
        preimages[f[u]].append(u)
    g = h
    next_label = max(max(h.vertices, default=0), max(src, default=0)) + 1
    pendant_of: dict[int, int] = {}
    for a in roots:
        for u in preimages[a][1:]:
            g = add_pendant(g, a, next_label)
            pendant_of[next_label] = u
            next_label += 1
    contracted, label_map = contract_forest(g, forest, roots)
    rename = {}
    for a in roots:
        rename[a] = preimages[a][0]
    rename.update(pendant_of)
    out = contracted.relabel(rename)
    out.audit()
    f_prime = {u: u for u in src}
    if sorted(out.vertices) != sorted(src):
        raise CertificateError("output vertex set differs from the source")
    measured = verify_bijection_bounds(src, out.adjacency(), x1, x2, x3, x4)
    measured.update(hyp)
    measured["forest_depth"] = max_depth
    return BijectionResult(out, f_prime, forest, max_depth, label_map, measured)


def verify_bijection_bounds(src: Adjacency, out: Adjacency, x1, x2, x3, x4) -> dict:
    """Check ``d/(2 x4 (x1+x2)) <= d' <= (x3+2) d`` on every pair (identity labels)."""
    scale = 2 * max(x4, 1) * (x1 + x2)
    nodes = sorted(src)
    d_src = DistanceOracle(src)
    d_out = DistanceOracle(out)
    d_src.prefetch(nodes)
    d_out.prefetch(nodes)
    worst_up = Fraction(0)
    worst_down = Fraction(0)
    for i, u in enumerate(nodes):
        for v in nodes[i + 1:]:
            ds = d_src.dist(u, v)
            do = d_out.dist(u, v)
            if ds == INF or do == INF:
                if ds != do:
                    raise CertificateError(f"pair {u},{v}: reachability differs")
                continue
            if ds > scale * do:
                raise CertificateError(f"pair {u},{v}: contraction bound fails ({ds}, {do})")
            if do > (x3 + 2) * ds:
                raise CertificateError(f"pair {u},{v}: expansion bound fails ({ds}, {do})")
            worst_up = max(worst_up, Fraction(do, ds))
            worst_down = max(worst_down, Fraction(ds, do))
    return {"max_expansion": str(worst_up), "max_contraction": str(worst_down)}


def contract_parts(g: PlaneMap, parts: Sequence[Iterable[int]]) -> tuple[PlaneMap, dict[int, int]]:
    """IM(g, parts) as a plane map: contract a BFS tree of each part onto its least vertex.

    Returns the map and part index -> vertex label.
    """
    adj = g.adjacency()
    forest = []
    roots = []
    for p in parts:
        p = set(p)
        r = min(p)
        roots.append(r)
        sub = {v: [w for w in adj[v] if w in p] for v in p}
        edges, depth = bfs_forest(sub, [r])
        if len(depth) != len(p):
            raise FamilyError(f"part rooted at {r} is not connected")
        forest.extend(edges)
    h, _ = contract_forest(g, forest, roots)
    return h, {i: r for i, r in enumerate(roots)}


def components_of(adj: Adjacency) -> list[frozenset]:
    return connected_components(adj)
