"""Instance generators, hand fixtures and brute-force distance oracles."""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import networkx as nx
import numpy as np
from scipy.spatial import Delaunay

from .plane import INF, PlaneMap, edge_submap, with_outer_candidates
from .rig import DistanceOracle, FamilyError, build_rig, check_connected_family

KINDS = (
    "grid_polylines",
    "random_triangulation_family",
    "F_ell",
    "metric_random",
    "outerstring_family",
    "outerplanar",
    "ring_family",
)


@dataclass
class Instance:
    """A host map with a spanning family of connected vertex sets."""

    g: PlaneMap
    sets: list[frozenset[int]]
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "params": self.params,
            "map": self.g.to_json(),
            "sets": [sorted(s) for s in self.sets],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Instance":
        g = PlaneMap.from_json(data["map"])
        sets = [frozenset(s) for s in data["sets"]]
        return cls(g, sets, data.get("kind", "custom"), data.get("params", {}))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def string_graph(self) -> dict[int, tuple[int, ...]]:
        return build_rig(self.g, self.sets, check=False)


# --------------------------------------------------------------------------
# embeddings from coordinates or from a planarity test


def map_from_coordinates(coords: dict[int, tuple], edges: Iterable[tuple[int, int]]) -> PlaneMap:
    """Straight-line embedding: neighbours sorted by angle, outer face at the lowest vertex."""
    nbrs: dict[int, list[int]] = {v: [] for v in coords}
    for a, b in edges:
        if a == b or b in nbrs[a]:
            continue
        nbrs[a].append(b)
        nbrs[b].append(a)

    def angle(v, w):
        return math.atan2(coords[w][1] - coords[v][1], coords[w][0] - coords[v][0])

    rot = {v: sorted(ws, key=lambda w: angle(v, w)) for v, ws in nbrs.items()}
    # the corner below the lowest vertex of each component is unbounded
    bare = PlaneMap(rot)
    refs = []
    for comp in bare.components():
        with_edges = [v for v in comp if rot[v]]
        if with_edges:
            low = min(with_edges, key=lambda v: (coords[v][1], coords[v][0], v))
            refs.append((low, rot[low][0]))
    return with_outer_candidates(rot, refs)


def map_from_networkx(graph: nx.Graph, outerplanar: bool = False) -> PlaneMap:
    """Embed an abstract planar graph; with ``outerplanar`` the outer face sees every vertex."""
    work = nx.Graph(graph)
    apex = ("apex",)
    if outerplanar:
        work.add_edges_from((apex, v) for v in graph.nodes)
    ok, emb = nx.check_planarity(work)
    if not ok:
        raise FamilyError("graph is not planar" + (" with an apex" if outerplanar else ""))
    rot = {}
    outer = None
    for v in sorted(graph.nodes):
        order = list(emb.neighbors_cw_order(v))[::-1] if emb.degree(v) else []
        if outerplanar and apex in order:
            i = order.index(apex)
            order = order[i + 1:] + order[:i]
            if order and outer is None:
                outer = (v, order[0])
        rot[v] = order
    g = PlaneMap(rot, outer)
    return g


def outer_is_everything(g: PlaneMap) -> bool:
    return set(g.outer_vertices()) == set(g.vertices)


# --------------------------------------------------------------------------
# families


def prune_to_span(g: PlaneMap, sets: Sequence[Iterable[int]]) -> PlaneMap:
    """Drop host edges not inside any member."""
    covered = set()
    for s in sets:
        s = set(s)
        for v in s:
            for w in g.rotation(v):
                if w in s and v < w:
                    covered.add((v, w))
    if len(covered) == g.edge_count:
        return g
    return edge_submap(g, covered, g.vertices)


def grow_region(adj, seed, size: int, rng: random.Random, allowed=None) -> set[int]:
    """Random connected set of up to ``size`` vertices grown from ``seed`` (a vertex or connected set)."""
    region = set(seed) if isinstance(seed, (set, frozenset, tuple, list)) else {seed}
    frontier = [w for u in sorted(region) for w in adj[u] if w not in region and (allowed is None or w in allowed)]
    while frontier and len(region) < size:
        w = frontier.pop(rng.randrange(len(frontier)))
        if w in region:
            continue
        region.add(w)
        frontier.extend(x for x in adj[w] if x not in region and (allowed is None or x in allowed))
    return region


def _finish(g: PlaneMap, sets, kind, params) -> Instance:
    sets = [frozenset(s) for s in sets]
    # dedupe while keeping first occurrence order
    seen = set()
    uniq = []
    for s in sets:
        if s not in seen:
            seen.add(s)
            uniq.append(s)
    g = prune_to_span(g, uniq)
    check_connected_family(g, uniq)
    covered = set().union(*uniq)
    if covered != set(g.vertices):
        raise FamilyError("family does not cover the host")
    return Instance(g, uniq, kind, params)


def gen_grid_polylines(n_strings: int, grid_size: int, seed: int, length: int | None = None) -> Instance:
    """Random lattice walks; strings meet exactly where walks share lattice points."""
    if n_strings <= 0 or grid_size <= 0:
        raise FamilyError("parameters must be positive")
    rng = random.Random(seed)
    if length is None:
        length = max(2, grid_size // 2)
    walks = []
    steps = ((1, 0), (-1, 0), (0, 1), (0, -1))
    for _ in range(n_strings):
        x, y = rng.randrange(grid_size), rng.randrange(grid_size)
        walk = [(x, y)]
        for _ in range(rng.randint(1, length)):
            options = [(x + dx, y + dy) for dx, dy in steps if 0 <= x + dx < grid_size and 0 <= y + dy < grid_size]
            x, y = rng.choice(options)
            walk.append((x, y))
        walks.append(walk)
    points = sorted({p for w in walks for p in w})
    label = {p: i for i, p in enumerate(points)}
    edges = set()
    for w in walks:
        for a, b in zip(w, w[1:]):
            if a != b:
                edges.add((min(label[a], label[b]), max(label[a], label[b])))
    g = map_from_coordinates({label[p]: p for p in points}, sorted(edges))
    sets = [{label[p] for p in w} for w in walks]
    # repeated walks collapse; keep every string as its own region anyway
    inst = _finish(g, sets, "grid_polylines", {"n_strings": n_strings, "grid_size": grid_size, "seed": seed})
    return inst


def _delaunay_map(n_points: int, rng: random.Random) -> tuple[PlaneMap, dict]:
    pts = []
    seen = set()
    while len(pts) < n_points:
        p = (rng.randrange(10 * n_points), rng.randrange(10 * n_points))
        if p not in seen:
            seen.add(p)
            pts.append(p)
    arr = np.array(pts, dtype=float)
    tri = Delaunay(arr)
    edges = set()
    for simplex in tri.simplices:
        a, b, c = (int(t) for t in simplex)
        for u, v in ((a, b), (b, c), (a, c)):
            edges.add((min(u, v), max(u, v)))
    coords = {i: pts[i] for i in range(len(pts))}
    return map_from_coordinates(coords, sorted(edges)), coords


def gen_random_triangulation_family(n_points: int, n_regions: int, seed: int, max_size: int = 6) -> Instance:
    """Delaunay host with randomly grown connected regions covering every vertex.

    Each region is grown from a host edge no earlier region contains, so the
    host keeps most of its edges (and its depth) after pruning.
    """
    rng = random.Random(seed)
    g, _ = _delaunay_map(max(n_points, 3), rng)
    adj = g.adjacency()
    verts = list(g.vertices)
    uncovered = set(g.edges())
    sets = []
    for _ in range(n_regions):
        if uncovered:
            start = set(rng.choice(sorted(uncovered)))
        else:
            start = {rng.choice(verts)}
        s = grow_region(adj, start, rng.randint(2, max(2, max_size)), rng)
        sets.append(s)
        uncovered = {(u, v) for u, v in uncovered if not (u in s and v in s)}
    covered = set().union(*sets) if sets else set()
    for v in verts:
        if v not in covered:
            s = grow_region(adj, v, rng.randint(1, 3), rng)
            sets.append(s)
            covered |= s
    return _finish(g, sets, "random_triangulation_family", {"n_points": n_points, "n_regions": n_regions, "seed": seed})


def gen_outerstring_family(n_points: int, n_regions: int, seed: int, max_size: int = 8) -> Instance:
    """Delaunay host where every region grows from a vertex of the outer face."""
    rng = random.Random(seed)
    g, _ = _delaunay_map(max(n_points, 3), rng)
    adj = g.adjacency()
    outer = sorted(g.outer_vertices())
    sets = [grow_region(adj, rng.choice(outer), rng.randint(1, max_size), rng) for _ in range(n_regions)]
    covered = set().union(*sets) if sets else set()
    # reach the rest by regions grown from the outer face towards uncovered vertices
    for v in sorted(set(g.vertices) - covered):
        path = _path_to(adj, v, set(outer))
        sets.append(set(path))
    inst = _finish(g, sets, "outerstring_family", {"n_points": n_points, "n_regions": n_regions, "seed": seed})
    outer_now = inst.g.outer_vertices()
    for s in inst.sets:
        if not s & outer_now:
            raise FamilyError("region lost contact with the outer face")
    return inst


def _path_to(adj, source, targets: set[int]) -> list[int]:
    from collections import deque

    parent = {source: None}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        if u in targets:
            path = [u]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return path
        for w in sorted(adj[u]):
            if w not in parent:
                parent[w] = u
                queue.append(w)
    raise FamilyError("no path to the target set")


def gen_F_ell(ell: int) -> Instance:
    """Cycle of length ell with another ell-cycle glued along each of its edges; family = edges."""
    if ell < 3:
        raise FamilyError("ell must be at least 3")
    graph = nx.cycle_graph(ell)
    nxt = ell
    for i in range(ell):
        a, b = i, (i + 1) % ell
        chain = [a] + list(range(nxt, nxt + ell - 2)) + [b]
        nxt += ell - 2
        nx.add_path(graph, chain)
    g = map_from_networkx(graph, outerplanar=True)
    sets = [frozenset(e) for e in g.edges()]
    return Instance(g, sets, "F_ell", {"ell": ell})


def gen_random_outerplanar(n: int, seed: int, keep: float = 0.6, regions: int | None = None) -> Instance:
    """Triangulated polygon with random chords removed and a random spanning family."""
    rng = random.Random(seed)
    n = max(n, 3)
    chords = []

    def triangulate(lo, hi):
        if hi - lo < 2:
            return
        mid = rng.randint(lo + 1, hi - 1)
        for a, b in ((lo, mid), (mid, hi)):
            if b - a > 1:
                chords.append((a, b))
        triangulate(lo, mid)
        triangulate(mid, hi)

    triangulate(0, n - 1)
    graph = nx.cycle_graph(n)
    graph.add_edges_from(c for c in chords if rng.random() < keep)
    g = map_from_networkx(graph, outerplanar=True)
    adj = g.adjacency()
    sets = []
    for _ in range(regions if regions is not None else max(1, n // 3)):
        sets.append(grow_region(adj, rng.randrange(n), rng.randint(1, 5), rng))
    for u, v in g.edges():
        if not any(u in s and v in s for s in sets):
            sets.append({u, v})
    return _finish(g, sets, "outerplanar", {"n": n, "seed": seed})


def gen_ring_family(rings: int, width: int, seed: int, arc: int = 3, spoke_rate: float = 0.5) -> Instance:
    """Concentric cycles joined by spokes; regions are short arcs and single spokes.

    Thin regions keep the outer stratum small, so deeper strata, several
    encasing parts and facial sets all appear.
    """
    if rings < 1 or width < 3:
        raise FamilyError("need at least one ring of length three")
    rng = random.Random(seed)
    label = {}
    coords = {}
    for r in range(rings):
        for i in range(width):
            v = len(label)
            label[r, i] = v
            ang = 2 * math.pi * i / width
            coords[v] = ((r + 1) * math.cos(ang), (r + 1) * math.sin(ang))
    edges = []
    sets = []
    for r in range(rings):
        for i in range(width):
            edges.append((label[r, i], label[r, (i + 1) % width]))
        start = rng.randrange(width)
        step = max(1, arc - 1)
        for k in range(0, width, step):
            sets.append({label[r, (start + k + j) % width] for j in range(min(arc, width - k + 1))})
    for r in range(rings - 1):
        spokes = [i for i in range(width) if rng.random() < spoke_rate] or [rng.randrange(width)]
        for i in spokes:
            edges.append((label[r, i], label[r + 1, i]))
            sets.append({label[r, i], label[r + 1, i]})
    g = map_from_coordinates(coords, edges)
    params = {"rings": rings, "width": width, "seed": seed, "arc": arc}
    return _finish(g, sets, "ring_family", params)


def gen_metric_random(n_points: int, seed: int, max_denominator: int = 6):
    """Delaunay triangulation with random rational lengths in (0, 1]."""
    from .metricgraph import MetricPlanarGraph

    rng = random.Random(seed)
    g, _ = _delaunay_map(max(n_points, 3), rng)
    lengths = {}
    for e in g.edges():
        q = rng.randint(1, max_denominator)
        lengths[e] = Fraction(rng.randint(1, q), q)
    return MetricPlanarGraph(g, lengths)


def gen_metric_path(lengths: Sequence) -> "object":
    """Path ``0 - 1 - ... - n`` with the given edge lengths."""
    from .metricgraph import MetricPlanarGraph

    n = len(lengths) + 1
    coords = {i: (i, 0) for i in range(n)}
    g = map_from_coordinates(coords, [(i, i + 1) for i in range(n - 1)])
    return MetricPlanarGraph(g, {(i, i + 1): Fraction(l) for i, l in enumerate(lengths)})


def generate(kind: str, seed: int, **params):
    if kind == "grid_polylines":
        return gen_grid_polylines(params.get("n_strings", 40), params.get("grid_size", 14), seed)
    if kind == "random_triangulation_family":
        return gen_random_triangulation_family(params.get("n_points", 60), params.get("n_regions", 60), seed)
    if kind == "outerstring_family":
        return gen_outerstring_family(params.get("n_points", 40), params.get("n_regions", 20), seed)
    if kind == "F_ell":
        return gen_F_ell(params.get("ell", 6))
    if kind == "outerplanar":
        return gen_random_outerplanar(params.get("n", 20), seed)
    if kind == "metric_random":
        return gen_metric_random(params.get("n_points", 20), seed, params.get("max_denominator", 6))
    if kind == "ring_family":
        return gen_ring_family(params.get("rings", 4), params.get("width", 12), seed)
    raise ValueError(f"unknown instance kind {kind!r}")


# --------------------------------------------------------------------------
# oracles


@dataclass
class DistortionReport:
    max_expansion: Fraction
    max_contraction: Fraction
    violation: tuple | None
    pairs: int

    def to_json(self) -> dict:
        return {
            "max_expansion": str(self.max_expansion),
            "max_contraction": str(self.max_contraction),
            "violation": list(self.violation) if self.violation else None,
            "pairs": self.pairs,
        }


def oracle_distortion(s_adj, out_adj, bijection: dict | None = None, lower=23660800, upper=162) -> DistortionReport:
    """All-pairs check of ``d_S/lower <= d_out <= upper d_S`` with exact integers."""
    if bijection is None:
        bijection = {v: v for v in s_adj}
    nodes = sorted(s_adj)
    ds_oracle = DistanceOracle(s_adj)
    do_oracle = DistanceOracle(out_adj)
    ds_oracle.prefetch(nodes)
    do_oracle.prefetch(bijection[v] for v in nodes)
    exp = Fraction(0)
    con = Fraction(0)
    pairs = 0
    for i, u in enumerate(nodes):
        for v in nodes[i + 1:]:
            ds = ds_oracle.dist(u, v)
            do = do_oracle.dist(bijection[u], bijection[v])
            pairs += 1
            if ds == INF or do == INF:
                if ds != do:
                    return DistortionReport(exp, con, (u, v, ds, do), pairs)
                continue
            if ds > lower * do or do > upper * ds:
                return DistortionReport(exp, con, (u, v, ds, do), pairs)
            exp = max(exp, Fraction(do, ds))
            con = max(con, Fraction(ds, do))
    return DistortionReport(exp, con, None, pairs)


def brute_distances(adj) -> dict:
    """Plain-Python all-pairs BFS (independent of the compiled oracle)."""
    from .plane import bfs_distances

    return {s: bfs_distances(adj, s) for s in adj}
