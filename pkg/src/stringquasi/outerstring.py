"""Impressions for outerplanar hosts and for families anchored on the outer face.

Three constructions live here:

* BFS layering of the intersection graph, giving an (11, 9)-impression
  whenever the host is outerplanar;
* the component-by-component induction building a partial impression in
  which every part either reaches the outer face with a small region
  footprint, or touches such a part;
* the merge of satellite parts into anchored neighbours and its
  composition with the layering.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import networkx as nx

from .plane import INF, PlaneMap, bfs_distances, connected_components
from .rig import (
    DistanceOracle,
    FamilyError,
    Impression,
    build_im,
    build_rig,
    intersecting,
    make_impression,
    membership,
    part_index,
)


class InvariantError(AssertionError):
    """An induction step found a state its hypothesis rules out."""


# --------------------------------------------------------------------------
# outerplanar layering


def is_outerplanar(adj) -> bool:
    """Planar after adding an apex adjacent to everything."""
    g = nx.Graph()
    g.add_nodes_from(adj)
    g.add_edges_from((u, v) for u in adj for v in adj[u])
    apex = ("apex",)
    g.add_edges_from((apex, v) for v in adj)
    planar, _ = nx.check_planarity(g)
    return planar


@dataclass
class LayeredDecomposition:
    base_region: int
    layers: list[list[int]]
    annuli: list[frozenset[int]]
    parts_per_layer: list[list[frozenset[int]]]


def layered_decomposition(adj, regions: Sequence[Iterable[int]], rig=None) -> list[LayeredDecomposition]:
    """BFS layering of the intersection graph, one per host component."""
    regions = [frozenset(r) for r in regions]
    if rig is None:
        rig = build_rig(adj, regions, check=False)
    index = membership(regions)
    out = []
    seen_regions: set[int] = set()
    for comp in connected_components(adj):
        here = sorted(intersecting(regions, comp, index))
        if not here:
            raise FamilyError(f"host component containing {min(comp)} meets no region")
        base = here[0]
        if base in seen_regions:
            continue
        dist = bfs_distances(rig, base)
        seen_regions.update(dist)
        depth = max(dist.values())
        layers = [[] for _ in range(depth + 1)]
        for r, d in sorted(dist.items()):
            layers[d].append(r)
        annuli = []
        parts_per_layer = []
        covered: set[int] = set()
        for layer in layers:
            d_i = set().union(*(regions[r] for r in layer))
            a_i = frozenset(d_i - covered)
            covered |= d_i
            annuli.append(a_i)
            comps = connected_components(adj, sorted(a_i)) if a_i else []
            parts_per_layer.append(sorted(comps, key=min))
        if covered != set(comp):
            raise FamilyError("regions do not cover their host component")
        out.append(LayeredDecomposition(base, layers, annuli, parts_per_layer))
    return out


def outerplanar_impression(adj, regions, *, check_outerplanar: bool = True, strict: bool = True) -> Impression:
    """Parts = components of each BFS annulus; certified (11, 9)."""
    if isinstance(adj, PlaneMap):
        adj = adj.adjacency()
    if check_outerplanar and not is_outerplanar(adj):
        raise FamilyError("host is not outerplanar")
    layers = layered_decomposition(adj, regions)
    parts = sorted((p for ld in layers for ps in ld.parts_per_layer for p in ps), key=min)
    imp = make_impression(adj, regions, parts, 11, 9, strict=strict)
    imp.notes["layers"] = [len(ld.layers) for ld in layers]
    return imp


# --------------------------------------------------------------------------
# the induction on uncovered components


@dataclass
class ComponentCase:
    component: frozenset[int]
    tag: str
    witnesses: dict = field(default_factory=dict)


@dataclass
class CaseFourState:
    walk: list[int]
    ell: int
    r: int
    left_path: list[int]
    right_path: list[int]
    left_regions: tuple[int, int]
    right_regions: tuple[int, int]
    left_grown: frozenset[int]
    right_grown: frozenset[int]


@dataclass
class PartialImpression:
    parts: list[frozenset[int]]
    anchored: list[bool]
    widths: list
    trace: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "parts": [sorted(p) for p in self.parts],
            "anchored": self.anchored,
            "widths": [None if w == INF else w for w in self.widths],
        }


class _Context:
    """Shared lookups for one run of the induction."""

    def __init__(self, g: PlaneMap, regions: Sequence[Iterable[int]]):
        self.g = g
        self.adj = g.adjacency()
        self.regions = [frozenset(r) for r in regions]
        self.index = membership(self.regions)
        self.rig = build_rig(self.adj, self.regions, check=False)
        self.oracle = DistanceOracle(self.rig)
        self.outer = g.outer_vertices()
        self.outer_fids = set(g.outer_faces().values())
        self.vertex_faces: dict[int, set[int]] = {v: set() for v in g.vertices}
        for f in g.faces():
            if f.id in self.outer_fids:
                continue
            for v in f.vertices:
                self.vertex_faces[v].add(f.id)

    def width(self, vertex_set) -> float:
        return self.oracle.weak_diameter(intersecting(self.regions, vertex_set, self.index))

    def touches(self, a: Iterable[int], b: set[int]) -> bool:
        return any(w in b for v in a for w in self.adj[v])

    def neighbourhood(self, s: set[int]) -> set[int]:
        return {w for v in s for w in self.adj[v] if w not in s}

    def common_inner_face(self, b1, b2) -> int | None:
        f1 = set().union(*(self.vertex_faces[v] for v in b1))
        f2 = set().union(*(self.vertex_faces[v] for v in b2))
        both = f1 & f2
        return min(both) if both else None

    def region_pairs(self, within: set[int]):
        """Intersecting (possibly equal) region pairs meeting ``within``: singles first."""
        here = intersecting(self.regions, within, self.index)
        for h in here:
            yield (h, h)
        hs = set(here)
        for h in here:
            for h2 in self.rig[h]:
                if h < h2 and h2 in hs:
                    yield (h, h2)


def _bfs_path(adj, allowed: set[int], sources: Iterable[int], is_target) -> list[int] | None:
    """Shortest path inside ``allowed`` from a source to a target vertex (ties by label)."""
    parent = {}
    queue = deque()
    for s in sorted(set(sources)):
        if s in allowed:
            parent[s] = None
            queue.append(s)
    while queue:
        u = queue.popleft()
        if is_target(u):
            path = [u]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return path
        for w in sorted(adj[u]):
            if w in allowed and w not in parent:
                parent[w] = u
                queue.append(w)
    return None


def _touched(ctx: _Context, k: frozenset[int], owner: dict[int, int]) -> list[int]:
    return sorted({owner[w] for v in k for w in ctx.adj[v] if w in owner})


def _anchored(ctx, part) -> bool:
    return bool(part & ctx.outer)


def item_conditions(ctx: _Context, state: PartialImpression, owner, k: frozenset[int]) -> list[str]:
    """All items whose stated conditions hold for component ``k``."""
    items = []
    touched = _touched(ctx, k, owner)
    outer = bool(k & ctx.outer)
    w = None
    if outer:
        w = ctx.width(k)
        if w <= 10:
            items.append("ITEM1a")
    if any(state.anchored[b] for b in touched):
        if w is None:
            w = ctx.width(k)
        if w <= 30:
            items.append("ITEM1b")
    if outer and not touched:
        items.append("ITEM2")
    if outer and len(touched) == 1:
        items.append("ITEM3")
    if outer and len(touched) == 2:
        b1, b2 = (state.parts[i] for i in touched)
        if _anchored(ctx, b1) and _anchored(ctx, b2) and ctx.common_inner_face(b1, b2) is not None:
            items.append("ITEM4")
    return items


def classify_component(ctx: _Context, state: PartialImpression, owner, k: frozenset[int]) -> ComponentCase:
    """Pick the case used to extend the partial impression at ``k``.

    Components reaching the outer face prefer items 1a, 2, 3, 4 and fall back
    on 1b only when none applies; that keeps every anchored part within the
    tighter footprint of 10.
    """
    items = item_conditions(ctx, state, owner, k)
    touched = _touched(ctx, k, owner)
    order = ["ITEM1a", "ITEM2", "ITEM3", "ITEM4", "ITEM1b"] if k & ctx.outer else ["ITEM1b"]
    for tag in order:
        if tag in items:
            wit = {"touched": touched}
            if tag == "ITEM4":
                b1, b2 = touched
                wit["face"] = ctx.common_inner_face(state.parts[b1], state.parts[b2])
            return ComponentCase(k, tag, wit)
    raise InvariantError(f"component with least vertex {min(k)} satisfies no item (touches {touched})")


def _outer_stretch(ctx: _Context, k: frozenset[int], b1: set[int], b2: set[int]) -> list[int]:
    """Vertices of ``k`` along the outer face, oriented from ``b1``'s side to ``b2``'s."""
    g = ctx.g
    comp = g.component_of(min(k))
    fid = g.outer_faces().get(comp)
    if fid is None:
        return sorted(k & ctx.outer)[:1]
    cyc = [d[0] for d in g.face(fid).darts]
    n = len(cyc)
    inside = [v in k for v in cyc]
    if all(inside):
        stretches = [cyc]
    else:
        start = next(i for i in range(n) if not inside[i])
        stretches = []
        cur: list[int] = []
        for j in range(1, n + 1):
            v = cyc[(start + j) % n]
            if v in k:
                cur.append(v)
            elif cur:
                stretches.append(cur)
                cur = []
        if cur:
            stretches.append(cur)
    nb1 = ctx.neighbourhood(b1)
    nb2 = ctx.neighbourhood(b2)
    for s in stretches:
        if s[0] in nb1 and s[-1] in nb2:
            return s
        if s[-1] in nb1 and s[0] in nb2:
            return s[::-1]
    best = max(stretches, key=len)
    return best if best[0] in nb1 or best[-1] not in nb1 else best[::-1]


def _reach_search(ctx: _Context, k: frozenset[int], walk: list[int], target_nbhd: set[int], pick_max: bool):
    """Best walk index with a path to ``target_nbhd`` inside K ∩ (H ∪ H')."""
    best = None
    positions: dict[int, list[int]] = {}
    for i, v in enumerate(walk):
        positions.setdefault(v, []).append(i)
    for h1, h2 in ctx.region_pairs(set(k)):
        w = (ctx.regions[h1] | ctx.regions[h2]) & k
        for comp in connected_components(ctx.adj, sorted(w)):
            if not comp & target_nbhd:
                continue
            idx = [i for v in comp if v in positions for i in positions[v]]
            if not idx:
                continue
            cand = max(idx) if pick_max else min(idx)
            if best is None or (cand > best[0] if pick_max else cand < best[0]):
                best = (cand, (h1, h2), comp)
    if best is None:
        return None
    i, pair, comp = best
    path = _bfs_path(ctx.adj, set(comp), [walk[i]], lambda u: u in target_nbhd)
    return i, pair, path


def _grow(ctx: _Context, k: frozenset[int], path: list[int]) -> frozenset[int]:
    hs = intersecting(ctx.regions, path, ctx.index)
    union = set().union(*(ctx.regions[h] for h in hs)) & k
    for comp in connected_components(ctx.adj, sorted(union)):
        if path[0] in comp:
            return comp
    raise InvariantError("grown set lost its seed path")


def extend_partial(ctx: _Context, state: PartialImpression, case: ComponentCase) -> list[frozenset[int]]:
    """New parts for the component in ``case`` (not yet appended)."""
    k = case.component
    tag = case.tag
    if tag in ("ITEM1a", "ITEM1b"):
        return [k]
    if tag == "ITEM2":
        return [frozenset([min(k & ctx.outer)])]
    if tag == "ITEM3":
        (b,) = case.witnesses["touched"]
        nb = ctx.neighbourhood(set(state.parts[b])) & k
        for h1, h2 in ctx.region_pairs(set(k)):
            w = (ctx.regions[h1] | ctx.regions[h2]) & k
            path = _bfs_path(ctx.adj, w, nb, lambda u: u in ctx.outer)
            if path is not None:
                case.witnesses["regions"] = (h1, h2)
                return [frozenset(path)]
        raise InvariantError(f"no region pair links the outer face to the touched part (K min {min(k)})")
    if tag == "ITEM4":
        b1, b2 = case.witnesses["touched"]
        p1, p2 = set(state.parts[b1]), set(state.parts[b2])
        walk = _outer_stretch(ctx, k, p1, p2)
        nb1 = ctx.neighbourhood(p1) & k
        nb2 = ctx.neighbourhood(p2) & k
        left = _reach_search(ctx, k, walk, nb1, pick_max=True)
        right = _reach_search(ctx, k, walk, nb2, pick_max=False)
        if left is None or right is None:
            raise InvariantError(f"item 4 search found no linking region pair (K min {min(k)})")
        l_star = _grow(ctx, k, left[2])
        r_star = _grow(ctx, k, right[2])
        case.witnesses["state"] = CaseFourState(
            walk, left[0], right[0], left[2], right[2], left[1], right[1], l_star, r_star
        )
        if l_star & r_star:
            return [l_star | r_star]
        return [l_star, r_star]
    raise InvariantError(f"unknown case {tag}")


def _check_part(ctx, state: PartialImpression, i: int, owner) -> None:
    part = state.parts[i]
    if state.widths[i] > 30:
        raise InvariantError(f"part {i} has region footprint {state.widths[i]} > 30")
    if state.anchored[i]:
        if state.widths[i] > 10:
            raise InvariantError(f"anchored part {i} has footprint {state.widths[i]} > 10")
        return
    for j in _touched(ctx, part, owner):
        if state.anchored[j]:
            return
    raise InvariantError(f"part {i} neither anchored nor touching an anchored part")


def outerstring_induct(g: PlaneMap, regions, *, verify_steps: bool = True, trace=None) -> PartialImpression:
    """Cover the host part by part, always treating the uncovered component
    with the least vertex next."""
    ctx = _Context(g, regions)
    for i, r in enumerate(ctx.regions):
        if not r & ctx.outer:
            raise FamilyError(f"region {i} has no vertex on the outer face")
    state = PartialImpression([], [], [])
    owner: dict[int, int] = {}
    uncovered = set(g.vertices)
    steps = 0
    while uncovered:
        comps = connected_components(ctx.adj, sorted(uncovered))
        k = min(comps, key=min)
        case = classify_component(ctx, state, owner, k)
        new_parts = extend_partial(ctx, state, case)
        before = len(uncovered)
        for p in new_parts:
            idx = len(state.parts)
            state.parts.append(frozenset(p))
            state.anchored.append(bool(p & ctx.outer))
            state.widths.append(ctx.width(p))
            for v in p:
                owner[v] = idx
            uncovered -= p
        if len(uncovered) >= before:
            raise InvariantError("induction step covered nothing")
        record = {"step": steps, "case": case.tag, "component_min": min(k), "added": [sorted(p) for p in new_parts]}
        state.trace.append(record)
        if trace is not None:
            trace.write(json.dumps(record, sort_keys=True) + "\n")
        if verify_steps:
            for idx in range(len(state.parts) - len(new_parts), len(state.parts)):
                _check_part(ctx, state, idx, owner)
            rest = uncovered & k
            for sub in connected_components(ctx.adj, sorted(rest)) if rest else []:
                if not item_conditions(ctx, state, owner, sub):
                    raise InvariantError(f"after step {steps} component {min(sub)} satisfies no item")
        steps += 1
        if steps > len(ctx.adj) + 1:
            raise InvariantError("induction did not terminate")
    return state


def outerstring_refine(g: PlaneMap, regions, *, partial: PartialImpression | None = None, verify_steps=True):
    """Merge every satellite part into its least-index anchored neighbour.

    Returns the merged parts (each containing an outer-face vertex) and the
    partial impression they came from.
    """
    if partial is None:
        partial = outerstring_induct(g, regions, verify_steps=verify_steps)
    adj = g.adjacency()
    owner = part_index(partial.parts)
    groups: dict[int, set[int]] = {i: set(p) for i, p in enumerate(partial.parts) if partial.anchored[i]}
    for i, p in enumerate(partial.parts):
        if partial.anchored[i]:
            continue
        targets = sorted({owner[w] for v in p for w in adj[v] if w in owner and partial.anchored[owner[w]]})
        if not targets:
            raise InvariantError(f"satellite part {i} touches no anchored part")
        groups[targets[0]] |= p
    merged = sorted((frozenset(s) for s in groups.values()), key=min)
    return merged, partial


def outerstring_impression(g: PlaneMap, regions, *, strict: bool = True) -> Impression:
    """Anchored parts composed with the layering of their touching graph; certified (770, 9)."""
    regions = [frozenset(r) for r in regions]
    merged, partial = outerstring_refine(g, regions)
    adj = g.adjacency()
    owner = part_index(merged)
    quotient = build_im(adj, merged, check=False)
    lifted_regions = [frozenset(owner[v] for v in r) for r in regions]
    inner = outerplanar_impression(quotient, lifted_regions, check_outerplanar=False, strict=strict)
    parts = sorted((frozenset().union(*(merged[i] for i in p)) for p in inner.parts), key=min)
    imp = make_impression(adj, regions, parts, 770, 9, strict=strict)
    m_ref = make_impression(adj, regions, merged, 70, INF, strict=strict)
    imp.notes.update(
        {
            "induct_x": max(partial.widths, default=0),
            "steps": len(partial.trace),
            "refined_x": m_ref.measured_x,
            "quotient_outerplanar": is_outerplanar(quotient),
        }
    )
    return imp
