"""Embedded planar graphs as combinatorial maps.

A map is a rotation system: every vertex carries the counterclockwise cyclic
order of its neighbours.  Graphs are simple, so a dart is just the ordered
pair ``(u, v)``; this keeps dart identities stable across submaps, edge
insertions and relabel-free operations, which the fortification bookkeeping
relies on.

Face traversal uses ``next(d) = succ(rev(d))`` where ``succ`` is the
rotation successor at the dart's origin.  The corner of a vertex that
precedes dart ``d`` in its rotation belongs to the face of ``d``.

Every map designates an outer face by a reference dart.  For a component that
does not contain the reference dart a canonical face is used instead (the
longest boundary, ties broken by the smallest dart); any face of a connected
plane graph can be made unbounded, so this is always a valid embedding.
"""

from __future__ import annotations

import json
from collections import deque
from contextlib import contextmanager
from dataclasses import dataclass
from math import inf
from typing import Iterable, Mapping, Sequence

INF = inf

Dart = tuple[int, int]

# audit mode: every map produced by a mutation helper is audited on creation
_AUDIT = {"on": False, "count": 0}


@contextmanager
def auditing():
    """Audit every map built by a mutation helper; yields the live counter dict."""
    prev = _AUDIT["on"]
    _AUDIT["on"] = True
    try:
        yield _AUDIT
    finally:
        _AUDIT["on"] = prev


def audited(g: "PlaneMap") -> "PlaneMap":
    if _AUDIT["on"]:
        g.audit()
        _AUDIT["count"] += 1
    return g


class MapError(ValueError):
    """Malformed rotation system."""


class TopologyError(MapError):
    """An operation was asked to act on a face it does not touch."""


@dataclass(frozen=True)
class Face:
    id: int
    darts: tuple[Dart, ...]

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(d[0] for d in self.darts)

    def __len__(self) -> int:
        return len(self.darts)


class UnionFind:
    def __init__(self, items: Iterable = ()):
        self.parent = {x: x for x in items}

    def add(self, x) -> None:
        self.parent.setdefault(x, x)

    def find(self, x):
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # smaller representative wins so classes are canonical
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


class PlaneMap:
    """Immutable rotation-system map with a designated outer face."""

    def __init__(
        self,
        rotations: Mapping[int, Sequence[int]],
        outer: Dart | None = None,
        *,
        check: bool = True,
        outer_refs: Iterable[Dart] = (),
    ):
        self._rot: dict[int, tuple[int, ...]] = {
            int(v): tuple(int(w) for w in nbrs) for v, nbrs in sorted(rotations.items())
        }
        self._pos: dict[int, dict[int, int]] = {
            v: {w: i for i, w in enumerate(nbrs)} for v, nbrs in self._rot.items()
        }
        if check:
            self._check_darts()
        if outer is not None:
            outer = (int(outer[0]), int(outer[1]))
            if not self.has_dart(outer):
                raise MapError(f"outer reference {outer} is not a dart")
        extra = []
        for d in outer_refs:
            d = (int(d[0]), int(d[1]))
            if not self.has_dart(d):
                raise MapError(f"outer reference {d} is not a dart")
            if d != outer:
                extra.append(d)
        self._outer_ref = outer
        self._extra_refs: tuple[Dart, ...] = tuple(extra)
        self._faces: list[Face] | None = None
        self._face_of: dict[Dart, int] | None = None
        self._components: list[frozenset[int]] | None = None
        self._comp_of: dict[int, int] | None = None
        self._outer_faces: dict[int, int] | None = None

    # -- construction helpers ------------------------------------------------

    def _check_darts(self) -> None:
        for v, nbrs in self._rot.items():
            if len(set(nbrs)) != len(nbrs):
                raise MapError(f"vertex {v} repeats a neighbour (multi-edge)")
            for w in nbrs:
                if w == v:
                    raise MapError(f"loop at {v}")
                if w not in self._pos:
                    raise MapError(f"dart ({v}, {w}) points to unknown vertex")
                if v not in self._pos[w]:
                    raise MapError(f"dart ({v}, {w}) has no reversal")

    @classmethod
    def from_edges_and_rotation(cls, rotations, outer=None) -> "PlaneMap":
        return cls(rotations, outer)

    # -- basic accessors -----------------------------------------------------

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(self._rot)

    def __contains__(self, v) -> bool:
        return v in self._rot

    def __len__(self) -> int:
        return len(self._rot)

    @property
    def vertex_count(self) -> int:
        return len(self._rot)

    def rotation(self, v: int) -> tuple[int, ...]:
        return self._rot[v]

    def rotations(self) -> dict[int, tuple[int, ...]]:
        return dict(self._rot)

    def degree(self, v: int) -> int:
        return len(self._rot[v])

    def has_edge(self, u: int, v: int) -> bool:
        return u in self._pos and v in self._pos[u]

    def has_dart(self, d: Dart) -> bool:
        return self.has_edge(d[0], d[1])

    def edges(self) -> list[tuple[int, int]]:
        return sorted((u, v) for u, nbrs in self._rot.items() for v in nbrs if u < v)

    @property
    def edge_count(self) -> int:
        return sum(len(n) for n in self._rot.values()) // 2

    def darts(self) -> list[Dart]:
        return sorted((u, v) for u, nbrs in self._rot.items() for v in nbrs)

    def adjacency(self) -> dict[int, tuple[int, ...]]:
        return dict(self._rot)

    def succ(self, d: Dart) -> Dart:
        u, v = d
        nbrs = self._rot[u]
        return (u, nbrs[(self._pos[u][v] + 1) % len(nbrs)])

    def pred(self, d: Dart) -> Dart:
        u, v = d
        nbrs = self._rot[u]
        return (u, nbrs[(self._pos[u][v] - 1) % len(nbrs)])

    def face_next(self, d: Dart) -> Dart:
        return self.succ((d[1], d[0]))

    def face_prev(self, d: Dart) -> Dart:
        p = self.pred(d)
        return (p[1], p[0])

    # -- faces ---------------------------------------------------------------

    def _build_faces(self) -> None:
        seen: dict[Dart, int] = {}
        orbits: list[list[Dart]] = []
        for d in self.darts():
            if d in seen:
                continue
            orbit = []
            x = d
            while x not in seen:
                seen[x] = -1
                orbit.append(x)
                x = self.face_next(x)
            if x != d:
                raise MapError(f"face orbit through {d} is not a cycle")
            orbits.append(orbit)
        # darts() is sorted, so orbits come out ordered by minimum dart
        faces = []
        face_of = {}
        for fid, orbit in enumerate(orbits):
            faces.append(Face(fid, tuple(orbit)))
            for x in orbit:
                face_of[x] = fid
        self._faces = faces
        self._face_of = face_of

    def faces(self) -> list[Face]:
        if self._faces is None:
            self._build_faces()
        return self._faces

    def face_of(self, d: Dart) -> int:
        if self._face_of is None:
            self._build_faces()
        return self._face_of[d]

    def face(self, fid: int) -> Face:
        return self.faces()[fid]

    def face_count(self) -> int:
        return len(self.faces())

    def corner_faces(self, v: int) -> list[int]:
        """Faces around ``v`` in rotation order (one per corner)."""
        return [self.face_of((v, w)) for w in self._rot[v]]

    # -- components and outer face --------------------------------------------

    def _build_components(self) -> None:
        comp_of: dict[int, int] = {}
        comps: list[frozenset[int]] = []
        for s in self._rot:
            if s in comp_of:
                continue
            cid = len(comps)
            comp_of[s] = cid
            members = [s]
            queue = deque([s])
            while queue:
                x = queue.popleft()
                for y in self._rot[x]:
                    if y not in comp_of:
                        comp_of[y] = cid
                        members.append(y)
                        queue.append(y)
            comps.append(frozenset(members))
        self._components = comps
        self._comp_of = comp_of

    def components(self) -> list[frozenset[int]]:
        if self._components is None:
            self._build_components()
        return self._components

    def component_of(self, v: int) -> int:
        if self._comp_of is None:
            self._build_components()
        return self._comp_of[v]

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def _build_outer(self) -> None:
        outer: dict[int, int] = {}
        faces = self.faces()
        for ref in self.outer_refs:
            outer.setdefault(self.component_of(ref[0]), self.face_of(ref))
        best: dict[int, tuple] = {}
        for f in faces:
            cid = self.component_of(f.darts[0][0])
            key = (-len(f), f.darts[0])
            if cid not in best or key < best[cid][0]:
                best[cid] = (key, f.id)
        for cid, (_, fid) in best.items():
            outer.setdefault(cid, fid)
        self._outer_faces = outer

    @property
    def outer_ref(self) -> Dart | None:
        return self._outer_ref

    @property
    def outer_refs(self) -> tuple[Dart, ...]:
        """Every reference dart: the primary one first, then per-component extras."""
        head = () if self._outer_ref is None else (self._outer_ref,)
        return head + self._extra_refs

    def outer_darts(self) -> set[Dart]:
        """All darts on the outer faces of all components."""
        return {d for fid in self.outer_faces().values() for d in self.face(fid).darts}

    def outer_face(self) -> int | None:
        """Outer face id of the component holding the reference dart."""
        if self._outer_ref is not None:
            return self.face_of(self._outer_ref)
        if not self.faces():
            return None
        return self.outer_faces().get(0)

    def outer_faces(self) -> dict[int, int]:
        """Outer face id per component index (components with edges only)."""
        if self._outer_faces is None:
            self._build_outer()
        return self._outer_faces

    def is_outer_face(self, fid: int) -> bool:
        f = self.face(fid)
        return self.outer_faces().get(self.component_of(f.darts[0][0])) == fid

    def outer_vertices(self) -> frozenset[int]:
        """Vertices incident to the outer face (of their component)."""
        out = set()
        for fid in self.outer_faces().values():
            out.update(self.face(fid).vertices)
        out.update(v for v, nbrs in self._rot.items() if not nbrs)
        return frozenset(out)

    def face_vertex_sets(self) -> dict[int, frozenset[int]]:
        return {f.id: f.vertices for f in self.faces()}

    # -- audits --------------------------------------------------------------

    def euler_defects(self) -> list[tuple[frozenset[int], int]]:
        """Components violating V - E + F = 2, with their actual value."""
        counts = {i: [len(c), 0, 0] for i, c in enumerate(self.components())}
        for u, v in self.edges():
            counts[self.component_of(u)][1] += 1
        for f in self.faces():
            counts[self.component_of(f.darts[0][0])][2] += 1
        bad = []
        for i, (nv, ne, nf) in counts.items():
            nf = max(nf, 1)  # an isolated vertex bounds the single face of the plane
            if nv - ne + nf != 2:
                bad.append((self.components()[i], nv - ne + nf))
        return bad

    def audit(self) -> None:
        """Raise MapError unless darts, rotations and Euler's formula check out."""
        self._check_darts()
        seen = set()
        for f in self.faces():
            for d in f.darts:
                if d in seen:
                    raise MapError(f"dart {d} in two faces")
                seen.add(d)
        if len(seen) != 2 * self.edge_count:
            raise MapError("face orbits do not partition the darts")
        bad = self.euler_defects()
        if bad:
            comp, chi = bad[0]
            raise MapError(f"Euler characteristic {chi} != 2 on component of size {len(comp)}")
        if self._outer_ref is not None and not self.has_dart(self._outer_ref):
            raise MapError("outer reference dart missing")

    def is_planar(self) -> bool:
        try:
            self.audit()
        except MapError:
            return False
        return True

    # -- value semantics -------------------------------------------------------

    def canonical(self) -> tuple:
        outer_key = tuple(sorted(self.face(f).darts[0] for f in self.outer_faces().values()))
        return (tuple((v, self._rot[v]) for v in self._rot), outer_key)

    def __eq__(self, other) -> bool:
        return isinstance(other, PlaneMap) and self.canonical() == other.canonical()

    def __hash__(self) -> int:
        return hash(self.canonical())

    def __repr__(self) -> str:
        return f"PlaneMap(n={self.vertex_count}, m={self.edge_count}, f={self.face_count()})"

    def relabel(self, mapping: Mapping[int, int]) -> "PlaneMap":
        rot = {mapping[v]: [mapping[w] for w in nbrs] for v, nbrs in self._rot.items()}
        refs = [(mapping[a], mapping[b]) for a, b in self.outer_refs]
        return audited(PlaneMap(rot, refs[0] if refs else None, outer_refs=refs[1:]))

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> dict:
        """Map file: edges array, per-vertex dart rotations, outer dart.

        Edge ``e`` listed as ``[a, b]`` with ``a < b`` yields darts ``2e``
        (from ``a``) and ``2e + 1`` (from ``b``).
        """
        edges = self.edges()
        index = {e: i for i, e in enumerate(edges)}

        def dart_id(u, v):
            return 2 * index[(u, v)] if u < v else 2 * index[(v, u)] + 1

        labels = list(self._rot)
        rot = [[dart_id(v, w) for w in self._rot[v]] for v in labels]
        outer = None
        if self._outer_ref is not None:
            outer = dart_id(*self._outer_ref)
        out = {
            "n": len(labels),
            "labels": labels,
            "edges": [list(e) for e in edges],
            "rot": rot,
            "outer": outer,
        }
        if self._extra_refs:
            out["outer_extra"] = [dart_id(*d) for d in self._extra_refs]
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "PlaneMap":
        labels = data.get("labels") or list(range(data["n"]))
        if len(labels) != data["n"]:
            raise MapError("label count does not match n")
        edges = [tuple(e) for e in data["edges"]]

        def dart(did):
            a, b = edges[did // 2]
            return (a, b) if did % 2 == 0 else (b, a)

        rot = {}
        for v, darts in zip(labels, data["rot"]):
            nbrs = []
            for did in darts:
                a, b = dart(did)
                if a != v:
                    raise MapError(f"dart {did} listed at {v} but originates at {a}")
                nbrs.append(b)
            rot[v] = nbrs
        outer = dart(data["outer"]) if data.get("outer") is not None else None
        extra = [dart(d) for d in data.get("outer_extra", ())]
        g = cls(rot, outer, outer_refs=extra)
        listed = sum(len(r) for r in data["rot"])
        if listed != 2 * len(edges):
            raise MapError("rotation does not list every dart exactly once")
        return g

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


# --------------------------------------------------------------------------
# regions of the plane left after deleting part of a map


@dataclass
class RegionPartition:
    """Regions of the plane minus a kept subgraph, as classes of host faces.

    Two host faces lie in the same region when they share a deleted edge or a
    deleted vertex.  ``outer`` is the region holding the host's outer faces
    (one per component, all part of the same unbounded region).
    """

    face_region: dict[int, int]
    vertex_region: dict[int, int]
    outer: int | None

    def regions(self) -> list[int]:
        return sorted(set(self.face_region.values()))


def region_partition(
    g: PlaneMap,
    keep_vertices: Iterable[int],
    keep_edges: Iterable[tuple[int, int]] | None = None,
) -> RegionPartition:
    """Regions of the plane minus the subgraph on ``keep_vertices``.

    With ``keep_edges`` omitted the kept subgraph is induced.  Deleted
    vertices are reported with the region that contains them.
    """
    keep = set(keep_vertices)
    if keep_edges is None:
        def kept(u, v):
            return u in keep and v in keep
    else:
        ke = {(min(a, b), max(a, b)) for a, b in keep_edges}

        def kept(u, v):
            return (min(u, v), max(u, v)) in ke and u in keep and v in keep

    uf = UnionFind(range(g.face_count()))
    # components are drawn side by side, so their outer faces share one region
    outer_faces = sorted(g.outer_faces().values())
    for f in outer_faces[1:]:
        uf.union(outer_faces[0], f)
    for u, v in g.edges():
        if not kept(u, v):
            uf.union(g.face_of((u, v)), g.face_of((v, u)))
    for v in g.vertices:
        if v not in keep:
            corners = g.corner_faces(v)
            for f in corners[1:]:
                uf.union(corners[0], f)
    face_region = {f.id: uf.find(f.id) for f in g.faces()}
    vertex_region = {}
    for v in g.vertices:
        if v not in keep:
            corners = g.corner_faces(v)
            vertex_region[v] = face_region[corners[0]] if corners else -1 - v
    outer = g.outer_face()
    return RegionPartition(
        face_region, vertex_region, None if outer is None else face_region[outer]
    )


def _restricted_map(g: PlaneMap, keep: set[int], kept_edge) -> PlaneMap:
    part = region_partition(g, keep, None if kept_edge is None else kept_edge)
    rot = {v: [w for w in g.rotation(v) if w in keep and _edge_ok(kept_edge, v, w)] for v in g.vertices if v in keep}
    # a face of the submap is outer if it contains an outer face of the host
    outer_regions = {part.face_region[f] for f in g.outer_faces().values()}
    candidates = [d for d in sorted((v, w) for v in rot for w in rot[v])
                  if part.face_region[g.face_of(d)] in outer_regions]
    return audited(with_outer_candidates(rot, candidates, check=False))


def with_outer_candidates(rot, candidates: Iterable[Dart], *, check: bool = True) -> PlaneMap:
    """Map on ``rot`` whose outer face per component holds its least candidate dart.

    The first reference is taken from the component of the least candidate
    overall; components without a candidate fall back to the canonical face.
    """
    bare = PlaneMap(rot, None, check=check)
    chosen: dict[int, Dart] = {}
    for d in sorted(candidates):
        if bare.has_dart(d):
            chosen.setdefault(bare.component_of(d[0]), d)
    refs = sorted(chosen.values())
    return PlaneMap(rot, refs[0] if refs else None, check=False, outer_refs=refs[1:])


def _edge_ok(kept_edge, v, w) -> bool:
    if kept_edge is None:
        return True
    return (min(v, w), max(v, w)) in kept_edge


def induced_submap(g: PlaneMap, s: Iterable[int]) -> PlaneMap:
    """Submap induced by ``s`` with the outer face tracked through deletions.

    Deleting a vertex merges its incident faces; the merged face is outer if
    any constituent was.  For a connected result this picks the unbounded
    face of the subgraph's own drawing.
    """
    keep = set(s)
    if not keep:
        raise MapError("induced submap of an empty vertex set")
    missing = keep - set(g.vertices)
    if missing:
        raise MapError(f"vertices {sorted(missing)[:5]} not in map")
    return _restricted_map(g, keep, None)


def edge_submap(g: PlaneMap, edges: Iterable[tuple[int, int]], vertices: Iterable[int] = ()) -> PlaneMap:
    """Submap on the given edges (plus listed isolated vertices)."""
    ke = {(min(a, b), max(a, b)) for a, b in edges}
    keep = set(vertices)
    for a, b in ke:
        if not g.has_edge(a, b):
            raise MapError(f"edge {(a, b)} not in map")
        keep.add(a)
        keep.add(b)
    return _restricted_map(g, keep, ke)


# --------------------------------------------------------------------------
# mutations returning new maps


@dataclass(frozen=True)
class SideRecord:
    """Outcome of inserting an edge into a face.

    ``side`` is the face (as a dart orbit of the new map) on the chosen side;
    ``other`` is the opposite face.
    """

    edge: tuple[int, int]
    side: tuple[Dart, ...]
    other: tuple[Dart, ...]

    @property
    def side_vertices(self) -> frozenset[int]:
        return frozenset(d[0] for d in self.side)


def _orbit(g: PlaneMap, d: Dart) -> tuple[Dart, ...]:
    out = [d]
    x = g.face_next(d)
    while x != d:
        out.append(x)
        x = g.face_next(x)
    return tuple(out)


def insert_edge_in_face(g: PlaneMap, u_slot: Dart, v_slot: Dart) -> tuple[PlaneMap, SideRecord]:
    """Insert edge ``uv`` into the face holding both slot darts.

    ``u_slot = (u, x)`` places the new dart ``(u, v)`` just before ``(u, x)``
    in the rotation of ``u``; likewise for ``v_slot``.  The face is split in
    two.  The returned record's ``side`` is the face containing the new dart
    ``(v, u)``, i.e. the part of the old face walked from ``u_slot`` until the
    walk arrives at ``v``.
    """
    u, v = u_slot[0], v_slot[0]
    if u == v:
        raise TopologyError("cannot insert a loop")
    if g.has_edge(u, v):
        raise TopologyError(f"edge {(u, v)} already present")
    if not g.has_dart(u_slot) or not g.has_dart(v_slot):
        raise TopologyError("slot is not a dart of the map")
    if g.face_of(u_slot) != g.face_of(v_slot):
        raise TopologyError(f"{u} and {v} slots are not on a common face")
    rot = {w: list(n) for w, n in g.rotations().items()}
    rot[u].insert(rot[u].index(u_slot[1]), v)
    rot[v].insert(rot[v].index(v_slot[1]), u)
    h = audited(PlaneMap(rot, g.outer_ref, check=False, outer_refs=g.outer_refs))
    side = _orbit(h, (v, u))
    other = _orbit(h, (u, v))
    return h, SideRecord((min(u, v), max(u, v)), side, other)


def insert_edge_isolated(g: PlaneMap, u: int, v: int) -> PlaneMap:
    """Insert ``uv`` where ``u`` or ``v`` has no neighbours yet."""
    rot = {w: list(n) for w, n in g.rotations().items()}
    if rot[u] and rot[v]:
        raise TopologyError("use insert_edge_in_face for two non-isolated endpoints")
    rot[u].append(v)
    rot[v].append(u)
    return audited(with_outer_candidates(rot, list(g.outer_darts()) + [(u, v)], check=False))


def delete_edge(g: PlaneMap, u: int, v: int) -> PlaneMap:
    if not g.has_edge(u, v):
        raise TopologyError(f"no edge {(u, v)}")
    rot = {w: [y for y in n if not ((w == u and y == v) or (w == v and y == u))] for w, n in g.rotations().items()}
    # deleting an outer edge merges its other side into the outer face
    cands = [d for d in g.outer_darts() if set(d) != {u, v}]
    if g.face_of((u, v)) in g.outer_faces().values() or g.face_of((v, u)) in g.outer_faces().values():
        for d in ((u, v), (v, u)):
            cands.extend(x for x in _orbit(g, d) if set(x) != {u, v})
    return audited(with_outer_candidates(rot, cands, check=False))


def add_pendant(g: PlaneMap, root: int, label: int) -> PlaneMap:
    """Attach a new degree-one vertex at the end of ``root``'s rotation."""
    if label in g:
        raise MapError(f"label {label} already used")
    rot = {w: list(n) for w, n in g.rotations().items()}
    rot[root].append(label)
    rot[label] = [root]
    if g.outer_refs:
        return audited(PlaneMap(rot, g.outer_ref, check=False, outer_refs=g.outer_refs))
    return audited(PlaneMap(rot, (root, label), check=False))


def contract_forest(
    g: PlaneMap, forest_edges: Iterable[tuple[int, int]], roots: Iterable[int]
) -> tuple[PlaneMap, dict[int, int]]:
    """Contract every tree of ``forest_edges`` onto its unique root.

    Parallel edges created along the way are removed at once.  Returns the
    contracted map and the label map (old vertex -> surviving root label).
    """
    roots = set(roots)
    adj: dict[int, list[int]] = {}
    for a, b in forest_edges:
        if not g.has_edge(a, b):
            raise MapError(f"forest edge {(a, b)} not in map")
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    label = {v: v for v in g.vertices}
    order: list[tuple[int, int]] = []  # (parent, child) in BFS order
    seen: set[int] = set()
    for r in sorted(roots):
        if r in seen:
            raise MapError(f"two roots in one tree at {r}")
        seen.add(r)
        queue = deque([(r, None)])
        while queue:
            x, parent = queue.popleft()
            for y in sorted(adj.get(x, ())):
                if y == parent:
                    continue
                if y in seen:
                    raise MapError("forest edges contain a cycle or join two roots")
                seen.add(y)
                label[y] = r
                order.append((x, y))
                queue.append((y, x))
    for v in adj:
        if v not in seen:
            raise MapError(f"tree containing {v} has no root")

    rot = {w: list(n) for w, n in g.rotations().items()}
    outer_darts = g.outer_darts()
    rename = {v: v for v in rot}

    def cur(x):
        while rename[x] != x:
            x = rename[x]
        return x

    for parent, child in order:
        p = cur(parent)
        c = child
        rc = rot.pop(c)
        i = rot[p].index(c)
        j = rc.index(p)
        seq = rc[j + 1:] + rc[:j]
        existing = set(rot[p]) - {c}
        spliced = []
        for w in seq:
            if w in existing or w == p:
                # parallel edge: drop the copy coming from the child
                rot[w].remove(c)
            else:
                spliced.append(w)
                rw = rot[w]
                rw[rw.index(c)] = p
        rot[p][i:i + 1] = spliced
        rename[c] = p
        outer_darts = {(cur(a), cur(b)) for a, b in outer_darts}
    h = audited(with_outer_candidates(rot, outer_darts, check=True))
    return h, {v: label[v] for v in g.vertices}


# --------------------------------------------------------------------------
# distances


def bfs_distances(adj: Mapping[int, Iterable[int]], source) -> dict:
    """Unweighted single-source distances; unreachable vertices are absent."""
    dist = {source: 0}
    queue = deque([source])
    while queue:
        x = queue.popleft()
        dx = dist[x] + 1
        for y in adj[x]:
            if y not in dist:
                dist[y] = dx
                queue.append(y)
    return dist


def distance(adj: Mapping[int, Iterable[int]], s, t):
    return bfs_distances(adj, s).get(t, INF)


def connected_components(adj: Mapping[int, Iterable[int]], within: Iterable | None = None) -> list[frozenset]:
    """Components of the graph, or of the subgraph induced by ``within``."""
    nodes = list(adj) if within is None else list(within)
    allowed = None if within is None else set(nodes)
    seen = set()
    comps = []
    for s in nodes:
        if s in seen:
            continue
        seen.add(s)
        members = [s]
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y not in seen and (allowed is None or y in allowed):
                    seen.add(y)
                    members.append(y)
                    queue.append(y)
        comps.append(frozenset(members))
    return comps


def is_connected_set(adj: Mapping[int, Iterable[int]], s: Iterable) -> bool:
    s = set(s)
    if len(s) <= 1:
        return True
    return len(connected_components(adj, s)) == 1
