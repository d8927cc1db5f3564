"""Planar graphs with edge lengths in (0, 1], turned into string graphs.

Each vertex ``u`` is represented by its closed radius-one ball.  Two balls
meet exactly when their centres are within distance two, so the string
graph is known analytically; the representation is still built (every edge
subdivided at the ball frontiers) so the main pipeline consumes a genuine
region family, and the two are compared on every instance.

All arithmetic is exact (``fractions.Fraction``).
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from . import constants as C
from .plane import INF, MapError, PlaneMap
from .rig import CertificateError, DistanceOracle, build_rig

Edge = tuple[int, int]


def _key(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass
class MetricPlanarGraph:
    """A plane map with an exact length in (0, 1] on every edge."""

    g: PlaneMap
    lengths: dict[Edge, Fraction]

    def __post_init__(self):
        self.lengths = {_key(*e): Fraction(l) for e, l in self.lengths.items()}
        edges = set(self.g.edges())
        if set(self.lengths) != edges:
            missing = sorted(edges ^ set(self.lengths))
            raise MapError(f"lengths and edges disagree at {missing[0]}")
        for e, l in self.lengths.items():
            if not 0 < l <= 1:
                raise MapError(f"edge {e} has length {l} outside (0, 1]")

    def length(self, u: int, v: int) -> Fraction:
        return self.lengths[_key(u, v)]

    def to_json(self) -> dict:
        data = self.g.to_json()
        data["lengths"] = [str(self.lengths[e]) for e in self.g.edges()]
        return data

    @classmethod
    def from_json(cls, data: dict) -> "MetricPlanarGraph":
        g = PlaneMap.from_json(data)
        lengths = data.get("lengths")
        if lengths is None or len(lengths) != g.edge_count:
            raise MapError("metric map needs one length per edge")
        return cls(g, {e: Fraction(l) for e, l in zip(g.edges(), lengths)})

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def dijkstra(h: MetricPlanarGraph, source: int) -> dict[int, Fraction]:
    """Exact distances from ``source``; unreachable vertices are absent."""
    dist = {source: Fraction(0)}
    heap = [(Fraction(0), source)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for w in h.g.rotation(u):
            nd = d + h.length(u, w)
            if w not in dist or nd < dist[w]:
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return dist


def all_distances(h: MetricPlanarGraph) -> dict[int, dict[int, Fraction]]:
    return {u: dijkstra(h, u) for u in sorted(h.g.vertices)}


def metric_string_graph(h: MetricPlanarGraph, dist=None) -> dict[int, tuple[int, ...]]:
    """``u ~ v`` iff ``0 < d_h(u, v) <= 2``."""
    if dist is None:
        dist = all_distances(h)
    two = Fraction(2)
    return {u: tuple(sorted(v for v, d in dist[u].items() if v != u and d <= two)) for u in sorted(dist)}


@dataclass
class BallRepresentation:
    """Subdivided host and the radius-one ball of every original vertex.

    ``sets[i]`` is the ball of ``centres[i]``; ``breakpoints[e]`` lists the
    positions (measured from the smaller endpoint) where ``e`` was cut.
    """

    g: PlaneMap
    centres: list[int]
    sets: list[frozenset[int]]
    breakpoints: dict[Edge, list[Fraction]]
    position: dict[int, tuple[Edge, Fraction]] = field(default_factory=dict)


def ball_representation(h: MetricPlanarGraph, dist=None) -> BallRepresentation:
    if dist is None:
        dist = all_distances(h)
    one = Fraction(1)
    centres = sorted(h.g.vertices)
    breakpoints: dict[Edge, list[Fraction]] = {}
    for a, b in h.g.edges():
        ell = h.length(a, b)
        cuts = set()
        for w in centres:
            da, db = dist[w].get(a), dist[w].get(b)
            if da is None:
                continue
            for t in (one - da, ell - one + db):
                if 0 < t < ell:
                    cuts.add(t)
        breakpoints[(a, b)] = sorted(cuts)
    # subdivide: new labels after the original ones, in edge order
    label = max(centres, default=-1) + 1
    chain: dict[Edge, list[int]] = {}
    position: dict[int, tuple[Edge, Fraction]] = {}
    for e in h.g.edges():
        ids = []
        for t in breakpoints[e]:
            ids.append(label)
            position[label] = (e, t)
            label += 1
        chain[e] = ids
    rot: dict[int, list[int]] = {}
    for v in centres:
        out = []
        for w in h.g.rotation(v):
            ids = chain[_key(v, w)]
            if not ids:
                out.append(w)
            else:
                out.append(ids[0] if v < w else ids[-1])
        rot[v] = out
    for (a, b), ids in chain.items():
        path = [a] + ids + [b]
        for i in range(1, len(path) - 1):
            rot[path[i]] = [path[i - 1], path[i + 1]]
    outer = None
    if h.g.outer_ref is not None:
        a, b = h.g.outer_ref
        ids = chain[_key(a, b)]
        outer = (a, (ids[0] if a < b else ids[-1]) if ids else b)
    refs = []
    for a, b in h.g.outer_refs:
        ids = chain[_key(a, b)]
        refs.append((a, (ids[0] if a < b else ids[-1]) if ids else b))
    g = PlaneMap(rot, outer, outer_refs=refs)
    sets = []
    for w in centres:
        ball = {v for v in centres if dist[w].get(v, INF) <= one}
        for s, ((a, b), t) in position.items():
            da, db = dist[w].get(a), dist[w].get(b)
            if da is None:
                continue
            if min(da + t, db + h.length(a, b) - t) <= one:
                ball.add(s)
        sets.append(frozenset(ball))
    return BallRepresentation(g, centres, sets, breakpoints, position)


def metric_to_string(h: MetricPlanarGraph, dist=None):
    """The string graph on ``V(h)`` and a region representation of it.

    The representation's intersection graph is checked to equal the
    distance-two rule.
    """
    if dist is None:
        dist = all_distances(h)
    s = metric_string_graph(h, dist)
    rep = ball_representation(h, dist)
    rig = build_rig(rep.g, rep.sets)
    relabelled = {rep.centres[i]: tuple(sorted(rep.centres[j] for j in ws)) for i, ws in rig.items()}
    if relabelled != s:
        bad = next(u for u in s if relabelled.get(u) != s[u])
        raise CertificateError(f"ball representation disagrees with the distance rule at vertex {bad}")
    return s, rep


@dataclass
class MetricDistortion:
    """Worst ratios over pairs, as exact fractions."""

    pairs: int
    max_ratio_up: Fraction
    max_ratio_down: Fraction
    violations: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "pairs": self.pairs,
            "max_ratio_up": str(self.max_ratio_up),
            "max_ratio_down": str(self.max_ratio_down),
            "violations": [[u, v, str(a), str(b)] for u, v, a, b in self.violations],
        }


def metric_distortion_check(h: MetricPlanarGraph, s: Mapping[int, tuple[int, ...]], dist=None) -> MetricDistortion:
    """Check ``d_h / 2 <= d_S <= d_h + 1`` on every pair."""
    if dist is None:
        dist = all_distances(h)
    oracle = DistanceOracle(s)
    nodes = sorted(s)
    oracle.prefetch(nodes)
    up = Fraction(0)
    down = Fraction(0)
    count = 0
    for i, u in enumerate(nodes):
        for v in nodes[i + 1:]:
            dh = dist[u].get(v)
            ds = oracle.dist(u, v)
            count += 1
            if dh is None or ds == INF:
                if not (dh is None and ds == INF):
                    raise CertificateError(f"pair {u},{v}: reachability differs")
                continue
            ds = int(ds)
            if dh > 2 * ds or ds > dh + 1:
                raise CertificateError(f"pair {u},{v}: d_h = {dh}, d_S = {ds} outside [d_h/2, d_h+1]")
            up = max(up, Fraction(ds) / dh)
            down = max(down, dh / ds)
    return MetricDistortion(count, up, down)


@dataclass
class MetricReport:
    output: PlaneMap
    measured: dict
    pipeline: object

    def to_json(self) -> dict:
        data = self.pipeline.to_json()
        data["output_map"] = self.output.to_json()
        data["bijection"] = [[v, v] for v in sorted(self.output.vertices)]
        data["constants"] = dict(data["constants"]) | {
            "metric_lower": f"1/{C.METRIC_CONTRACTION}",
            "metric_upper": f"{C.FINAL_EXPANSION}*(d+1)",
        }
        data["metric"] = self.measured
        return data

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def metric_pipeline(h: MetricPlanarGraph) -> MetricReport:
    """Planar graph on ``V(h)`` within a bounded distortion of the metric.

    Enforced: ``d_h <= 47321600 d_out`` and ``d_out <= 162 (d_h + 1)``.
    The tighter ``d_out <= 162 d_h + 1`` is measured and reported.
    """
    from .planarize import planarize_full

    dist = all_distances(h)
    s, rep = metric_to_string(h, dist)
    lemma = metric_distortion_check(h, s, dist)
    result = planarize_full(rep.g, rep.sets)
    out = result.output.relabel({i: c for i, c in enumerate(rep.centres)})
    out.audit()
    if sorted(out.vertices) != sorted(h.g.vertices):
        raise CertificateError("output vertex set differs from the metric graph")
    oracle = DistanceOracle(out.adjacency())
    nodes = sorted(h.g.vertices)
    oracle.prefetch(nodes)
    worst_up = Fraction(0)
    worst_down = Fraction(0)
    stated_misses = 0
    for i, u in enumerate(nodes):
        for v in nodes[i + 1:]:
            dh = dist[u].get(v)
            do = oracle.dist(u, v)
            if dh is None or do == INF:
                if not (dh is None and do == INF):
                    raise CertificateError(f"pair {u},{v}: reachability differs")
                continue
            do = int(do)
            if dh > C.METRIC_CONTRACTION * do:
                raise CertificateError(f"pair {u},{v}: contraction bound fails ({dh}, {do})")
            if do > C.FINAL_EXPANSION * (dh + 1):
                raise CertificateError(f"pair {u},{v}: expansion bound fails ({dh}, {do})")
            if do > C.FINAL_EXPANSION * dh + 1:
                stated_misses += 1
            worst_up = max(worst_up, do / dh)
            worst_down = max(worst_down, dh / do)
    measured = {
        "string_lemma": lemma.to_json(),
        "max_expansion": str(worst_up),
        "max_contraction": str(worst_down),
        "stated_upper_misses": stated_misses,
        "subdivided_vertices": len(rep.g),
    }
    return MetricReport(out, measured, result)
