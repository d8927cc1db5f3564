from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stringquasi import constants as C
from stringquasi.harness import brute_distances, gen_F_ell
from stringquasi.outerstring import outerplanar_impression
from stringquasi.plane import INF
from stringquasi.rig import (
    CertificateError,
    DistanceOracle,
    FamilyError,
    brute_force_impression,
    build_im,
    build_rig,
    contract_parts,
    impression_map,
    make_impression,
    measure_impression,
    min_z_span,
    quasibi,
    transfer_impression,
    verify_impression,
    weak_diameter,
)

from conftest import grid_map, polyline_instances, triangulation_instances


def test_grid_edge_family_rig_is_edge_incidence(fix_grid):
    g, sets = fix_grid
    rig = build_rig(g, sets)
    assert len(rig) == 12
    for i, a in enumerate(sets):
        expected = tuple(j for j, b in enumerate(sets) if j != i and a & b)
        assert rig[i] == expected


def test_grid_rows_touching_graph_is_a_path():
    g = grid_map(3, 3)
    im = build_im(g, [{0, 1, 2}, {3, 4, 5}, {6, 7, 8}])
    assert im == {0: (1,), 1: (0, 2), 2: (1,)}


def test_build_im_rejects_overlap():
    with pytest.raises(FamilyError):
        build_im(grid_map(2, 2), [{0, 1}, {1, 3}])


def test_build_rig_rejects_disconnected_member():
    with pytest.raises(FamilyError):
        build_rig(grid_map(1, 3), [{0, 2}])


def test_weak_diameter_is_measured_in_the_ambient_graph():
    adj = grid_map(1, 6).adjacency()
    assert weak_diameter(adj, {0, 5}) == 5
    assert weak_diameter(adj, {3}) == 0
    adj2 = {0: (), 1: ()}
    assert weak_diameter(adj2, {0, 1}) == INF


def test_distance_oracle_matches_plain_bfs():
    g = nx.random_regular_graph(3, 20, seed=4)
    adj = {v: tuple(g[v]) for v in g}
    oracle = DistanceOracle(adj)
    brute = brute_distances(adj)
    for u in adj:
        for v in adj:
            assert oracle.dist(u, v) == brute[u].get(v, INF)


def test_min_z_span_examples():
    g = grid_map(3, 3)
    assert min_z_span(g, [frozenset(e) for e in g.edges()]) == 0
    rows_and_sides = [{0, 1, 2}, {3, 4, 5}, {6, 7, 8}, {0, 3, 6}, {2, 5, 8}]
    # edge 1-4 is covered only via row 0 and row 1, which meet through a side
    assert min_z_span(g, rows_and_sides) == 2
    assert min_z_span(g, [{0, 1, 2}]) == INF


def test_grid_layering_impression_and_quasi_map(fix_grid):
    g, sets = fix_grid
    imp = outerplanar_impression(g.adjacency(), sets, check_outerplanar=False)
    assert (imp.measured_x, imp.measured_y) == brute_force_impression(g, sets, imp.parts)
    rep = impression_map(g, sets, imp.parts, imp.measured_x, imp.measured_y, 0)
    assert rep.lower_slope == Fraction(1, imp.measured_x)
    assert rep.upper_slope == 2 * imp.measured_y
    assert rep.pairs_checked == 12 * 11 // 2


def test_impression_map_constants_from_the_string_stage(fix_grid):
    g, sets = fix_grid
    parts = [frozenset(g.vertices)]
    rep = impression_map(g, sets, parts, C.IMPRESSION_X, C.IMPRESSION_Y, C.SPAN_Z)
    assert rep.lower_slope == Fraction(1, 73944)
    assert rep.lower_offset == Fraction(73936, 73944)
    assert rep.upper_slope == 160
    assert rep.cobounded_radius == 80


def test_make_impression_rejects_bad_certificate(fix_grid):
    g, sets = fix_grid
    parts = [frozenset({v}) for v in g.vertices]
    with pytest.raises(CertificateError):
        make_impression(g, sets, parts, 0, 0)


def test_verify_impression_requires_a_cover(fix_grid):
    g, sets = fix_grid
    with pytest.raises(CertificateError):
        verify_impression(g, sets, [{0, 1, 2}])


def test_transfer_multiplies_by_k():
    inst = gen_F_ell(6)
    big = list(inst.sets) + [frozenset(inst.g.vertices)]
    imp = outerplanar_impression(inst.g, inst.sets)
    out = transfer_impression(inst.g, big, range(len(inst.sets)), imp.parts, C.INDUCT_X, C.INDUCT_Y, C.FORTIFY_K)
    assert out.x == 73936
    assert out.notes["transfer_k_measured"] <= 8
    out2 = transfer_impression(inst.g, inst.sets, range(len(inst.sets)), imp.parts, C.OUTER_REFINED_X, 9, 11)
    assert out2.x == 770


def test_transfer_rejects_wide_dropped_region():
    g = grid_map(1, 12)
    small = [frozenset(e) for e in g.edges()]
    big = small + [frozenset(g.vertices)]
    parts = [frozenset(g.vertices)]
    with pytest.raises(CertificateError):
        transfer_impression(g, big, range(len(small)), parts, 20, 1, 8)


def test_quasibi_on_k2_identity():
    from stringquasi.harness import map_from_coordinates

    h = map_from_coordinates({0: (0, 0), 1: (1, 0)}, [(0, 1)])
    res = quasibi({0: (1,), 1: (0,)}, h, {0: 0, 1: 1}, 1, 0, 1, 0)
    assert res.graph.edges() == [(0, 1)]
    assert res.measured["max_expansion"] == "1"


def test_quasibi_final_constants():
    x1, x2, x3, x4 = C.QUASI_X1, C.QUASI_X2, C.QUASI_X3, C.QUASI_X4
    assert 2 * x4 * (x1 + x2) == 23660800
    assert x3 + 2 == 162


def test_quasibi_collapsed_vertices_get_pendants():
    # three source vertices mapped onto one host vertex of a path
    g = grid_map(1, 3)
    src = {0: (1, 2, 3), 1: (0, 2), 2: (0, 1), 3: (0,)}
    f = {0: 0, 1: 0, 2: 0, 3: 1}
    res = quasibi(src, g, f, 2, 2, 2, 1)
    res.graph.audit()
    assert sorted(res.graph.vertices) == [0, 1, 2, 3]


def test_quasibi_rejects_far_vertex():
    g = grid_map(1, 5)
    with pytest.raises(CertificateError):
        quasibi({0: ()}, g, {0: 0}, 1, 0, 1, 1)


def test_contract_parts_gives_touching_graph():
    g = grid_map(3, 3)
    parts = [{0, 1, 2}, {3, 4, 5}, {6, 7, 8}]
    h, label = contract_parts(g, parts)
    h.audit()
    assert label == {0: 0, 1: 3, 2: 6}
    assert h.edges() == [(0, 3), (3, 6)]


@given(polyline_instances())
def test_rig_adjacency_is_symmetric_intersection(inst):
    rig = build_rig(inst.g, inst.sets)
    for i, a in enumerate(inst.sets):
        for j, b in enumerate(inst.sets):
            if i != j:
                assert (j in rig[i]) == bool(a & b)


@given(triangulation_instances(), st.integers(1, 4), st.integers(0, 10_000))
def test_measured_impression_matches_brute_force(inst, k, seed):
    import random

    rng = random.Random(seed)
    # random disjoint connected cover by growing from seeds
    adj = inst.g.adjacency()
    owner = {}
    seeds = rng.sample(sorted(adj), min(k, len(adj)))
    frontier = list(seeds)
    for i, s in enumerate(seeds):
        owner[s] = i
    while frontier:
        v = frontier.pop(rng.randrange(len(frontier)))
        for w in adj[v]:
            if w not in owner:
                owner[w] = owner[v]
                frontier.append(w)
    for v in adj:
        if v not in owner:
            owner[v] = len(seeds) + v
    parts = {}
    for v, i in owner.items():
        parts.setdefault(i, set()).add(v)
    parts = list(parts.values())
    m = measure_impression(inst.g, inst.sets, parts)
    assert (m.x, m.y) == brute_force_impression(inst.g, inst.sets, parts)
