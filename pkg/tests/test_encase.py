import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stringquasi import constants as C
from stringquasi.encase import (
    AuxGraph,
    Topology,
    build_aux,
    cage_check,
    certify_encasing,
    check_encircles,
    clean_separations,
    encase_final,
    encircle_base,
    encroached,
    enforced_encase,
    linked_components,
    measure_b,
    strata,
    surround_check,
)
from stringquasi.harness import gen_grid_polylines, gen_random_triangulation_family, gen_ring_family
from stringquasi.plane import INF
from stringquasi.rig import CertificateError

from conftest import grid_map


@pytest.fixture
def fix_enc():
    """Three rings, one closure edge: region {1,2,3} walls in its face run."""
    return gen_ring_family(3, 8, 11)


def test_strata_of_annulus(fix_ann):
    level = strata(fix_ann.g, fix_ann.sets)
    arcs = [level[i] for i in range(12)]
    assert arcs == [0] * 4 + [1] * 4 + [2] * 4
    assert level[12:16] == [0] * 4 and level[16:] == [1] * 4


def test_strata_unreachable_is_inf():
    g = grid_map(3, 3)
    assert strata(g, [{0, 1}, {4}]) == [0, INF]


def test_base_encircling_of_annulus_leaves_one_facial_set(fix_ann):
    g, sets = fix_ann.g, fix_ann.sets
    base = encircle_base(g, sets)
    assert base.measured["a"] <= C.BASE_A == 210
    check_encircles(g, sets, base.parts)
    outer = g.outer_vertices()
    union = set().union(*base.parts)
    for r in sets:
        if r & outer:
            assert r <= union
    aux = build_aux(g, base.parts)
    # internal faces of G[U] that hold uncovered vertices: only the innermost hole
    assert aux.facial == [frozenset({17, 19, 21, 23})]
    assert aux.adj[aux.n_parts] == (0,)


def test_enforced_sandwich_on_annulus(fix_ann):
    g, sets = fix_ann.g, fix_ann.sets
    level = strata(g, sets)
    enc = enforced_encase(g, sets)
    union = set().union(*enc.parts)
    near = set().union(*(r for r, l in zip(sets, level) if l <= 1))
    ring2 = set().union(*(r for r, l in zip(sets, level) if l <= 2))
    assert near <= union <= ring2
    assert enc.measured["a"] <= 840 and enc.measured["d"] <= 7


def test_final_encasing_of_annulus(fix_ann):
    enc = encase_final(fix_ann.g, fix_ann.sets)
    assert enc.params == (9240, 9, 4, 7)
    assert enc.certified()
    assert enc.measured == {"a": 4, "b": 0, "c": 0, "d": 0}


def test_bounded_by_on_ring_fixture(fix_enc):
    g, sets = fix_enc.g, fix_enc.sets
    enc = encase_final(g, sets)
    topo = enc.notes["_topology"]
    # vertex 7 hangs off 15 inside the parts; a region through 15 walls it in
    assert topo.bounded(sets[4]) - sets[4] == {7}
    assert topo.is_bounded(sets[4], 7)
    assert not topo.is_bounded(sets[8], 7)
    with pytest.raises(Exception):
        topo.is_bounded(sets[4], 0)


def test_encroached_run_on_ring_fixture(fix_enc):
    g, sets = fix_enc.g, fix_enc.sets
    enc = encase_final(g, sets)
    topo = enc.notes["_topology"]
    assert topo.aux.facial == [frozenset({0, 1, 3, 4, 5, 6})]
    runs = encroached(topo, 0, sets[1], 1)
    assert len(runs) == 1
    (run,) = runs
    assert sorted(run.edges) == [(2, 1), (2, 3)]
    assert not run.cyclic
    assert run.encroached == frozenset()
    assert runs[0].edges == enc.notes["_runs"][(0, 1)][0].edges


def test_surround_on_ring_fixture(fix_enc):
    rep = surround_check(fix_enc.g, fix_enc.sets, encase_final(fix_enc.g, fix_enc.sets).parts)
    assert rep.c <= 4
    assert rep.c == max(rep.bounded_worst, rep.encroach_worst)


def test_cage_zero_inside_parts(fix_ann):
    enc = encase_final(fix_ann.g, fix_ann.sets)
    rep = cage_check(fix_ann.g, fix_ann.sets, enc.parts)
    assert rep.per_region == [0] * len(fix_ann.sets)
    assert rep.certs == {}


def test_cage_facial_regions_are_three_caged(fix_enc):
    g, sets = fix_enc.g, fix_enc.sets
    enc = encase_final(g, sets)
    rep = cage_check(g, sets, enc.parts)
    aux = enc.notes["_topology"].aux
    for i, h in enumerate(sets):
        touching = {aux.owner[w] for v in h for w in g.rotation(v) if w in aux.owner} | {
            aux.owner[v] for v in h if v in aux.owner
        }
        if h & set(aux.facial_of) and len(touching) <= 2:
            assert rep.per_region[i] <= 3
    for i, cert in rep.certs.items():
        assert cert.t == rep.per_region[i]
        assert len(cert.chain) == cert.t + 1


def test_cage_exhaustive_agrees_on_ring_fixture(fix_enc):
    g, sets = fix_enc.g, fix_enc.sets
    for parts in (encircle_base(g, sets).parts, encase_final(g, sets).parts):
        fast = cage_check(g, sets, parts)
        slow = cage_check(g, sets, parts, exhaustive=True)
        assert fast.per_region == slow.per_region


def test_encircling_rejects_part_off_outer_face():
    g = grid_map(3, 3)
    sets = [frozenset(e) for e in g.edges()]
    with pytest.raises(CertificateError):
        check_encircles(g, sets, [{4}])


def test_measure_b_counts_linked_pieces():
    g = grid_map(1, 5)
    parts = [{0, 1}, {2}, {3, 4}]
    # one region runs through all three parts as one linked piece
    assert measure_b(g.adjacency(), [{0, 1, 2, 3, 4}], parts) == [2]
    assert linked_components(g.adjacency(), {0, 1, 3}, frozenset({0, 1, 3})) == [frozenset({0, 1}), frozenset({3})]


def _aux_from(adj, facial=()):
    n_parts = len(adj) - len(facial)
    parts = [frozenset({i}) for i in range(n_parts)]
    return AuxGraph(parts, [frozenset({100 + j}) for j in range(len(facial))], [], adj, None, frozenset(), {}, {}, {})


def test_clean_separations_by_hand():
    # root 0; parts 1 and 2 jointly cut off 5 and 6; 5 alone cuts off 6
    adj = {0: (1, 2), 1: (0, 2, 5), 2: (0, 1, 5), 5: (1, 2, 6), 6: (5,)}
    relabel = {0: 0, 1: 1, 2: 2, 5: 3, 6: 4}
    adj = {relabel[v]: tuple(relabel[w] for w in ws) for v, ws in adj.items()}
    seps = clean_separations(_aux_from(adj), 0)
    found = sorted((s.cut, sorted(s.y), s.kind) for s in seps)
    assert found == [((1, 2), [1, 2, 3, 4], "two_clean"), ((3,), [3, 4], "one_clean")]


@st.composite
def small_graphs(draw):
    n = draw(st.integers(2, 9))
    edges = draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=3 * n))
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from((a, b) for a, b in edges if a != b)
    return g


@given(small_graphs())
def test_one_clean_cuts_match_networkx(g):
    adj = {v: tuple(sorted(g[v])) for v in g}
    seps = clean_separations(_aux_from(adj), 0)
    ones = {s.cut[0]: s.y for s in seps if s.kind == "one_clean"}
    for c in g:
        if c == 0:
            continue
        h = g.copy()
        h.remove_node(c)
        away = set(g) - {c} - nx.node_connected_component(h, 0)
        if away:
            assert ones[c] == frozenset(away | {c})
        else:
            assert c not in ones


@given(st.integers(1, 25), st.integers(4, 8), st.integers(0, 10_000))
def test_final_encasing_bullets_on_polylines(n, size, seed):
    inst = gen_grid_polylines(n, size, seed)
    enc = encase_final(inst.g, inst.sets)
    for key, bound in zip("abcd", (9240, 9, 4, 7)):
        assert enc.measured[key] <= bound
    again = certify_encasing(inst.g, inst.sets, enc.parts)
    assert again.measured == enc.measured


@given(st.integers(2, 4), st.integers(5, 10), st.integers(0, 10_000))
def test_ring_encasings_and_cage_agreement(rings, width, seed):
    inst = gen_ring_family(rings, width, seed)
    enc = encase_final(inst.g, inst.sets)
    assert enc.certified()
    if len(enc.parts) <= 8:
        fast = cage_check(inst.g, inst.sets, enc.parts)
        slow = cage_check(inst.g, inst.sets, enc.parts, exhaustive=True)
        assert fast.per_region == slow.per_region


@given(st.integers(5, 30), st.integers(2, 25), st.integers(0, 10_000))
def test_triangulation_encasing_is_encircling(n, k, seed):
    inst = gen_random_triangulation_family(n, k, seed)
    enc = encase_final(inst.g, inst.sets)
    check_encircles(inst.g, inst.sets, enc.parts)
    topo = Topology(inst.g, enc.parts)
    for h in inst.sets:
        bd = topo.bounded(h)
        assert set(h) & topo.union <= bd <= topo.union
        # an escaping vertex reaches the outer face of G[U] avoiding h
        assert not (topo.outer_touching - set(h)) & bd
