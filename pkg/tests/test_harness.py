import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from stringquasi import cli
from stringquasi.harness import (
    KINDS,
    Instance,
    generate,
    gen_F_ell,
    gen_grid_polylines,
    map_from_coordinates,
    oracle_distortion,
)
from stringquasi.plane import INF
from stringquasi.rig import FamilyError, build_rig


def test_single_straight_polyline_is_k1():
    inst = gen_grid_polylines(1, 5, 0, length=3)
    assert len(inst.sets) == 1
    assert inst.string_graph() == {0: ()}
    assert set(inst.sets[0]) == set(inst.g.vertices)


def test_two_crossing_strings_make_k2():
    coords = {0: (1, 0), 1: (1, 1), 2: (1, 2), 3: (0, 1), 4: (2, 1)}
    g = map_from_coordinates(coords, [(0, 1), (1, 2), (3, 1), (1, 4)])
    inst = Instance(g, [frozenset({0, 1, 2}), frozenset({3, 1, 4})])
    assert inst.string_graph() == {0: (1,), 1: (0,)}


def test_corpus_instance_seven_is_stable():
    inst = gen_grid_polylines(40, 14, 7)
    s = inst.string_graph()
    assert len(s) == 40
    assert sum(len(w) for w in s.values()) // 2 == 31
    assert gen_grid_polylines(40, 14, 7).dumps() == inst.dumps()


def test_empty_polyline_request_is_an_error():
    with pytest.raises(FamilyError):
        gen_grid_polylines(0, 5, 0)


def test_oracle_distortion_identity_k2():
    adj = {0: (1,), 1: (0,)}
    rep = oracle_distortion(adj, adj)
    assert rep.violation is None
    assert rep.max_expansion == rep.max_contraction == Fraction(1)


def test_oracle_distortion_disconnected_pairs():
    s = {0: (1,), 1: (0,), 2: ()}
    rep = oracle_distortion(s, s)
    assert rep.violation is None and rep.pairs == 3
    bad = oracle_distortion(s, {0: (1,), 1: (0, 2), 2: (1,)})
    assert bad.violation is not None and bad.violation[2] == INF


def test_oracle_distortion_reports_failing_pair():
    s = {0: (1,), 1: (0,)}
    long_path = {i: tuple(j for j in (i - 1, i + 1) if 0 <= j < 200) for i in range(200)}
    rep = oracle_distortion(s, long_path, {0: 0, 1: 199})
    assert rep.violation == (0, 1, 1, 199)


@pytest.mark.parametrize("kind", KINDS)
def test_generators_are_deterministic(kind):
    a = generate(kind, 3)
    b = generate(kind, 3)
    assert a.dumps() == b.dumps()


@given(st.sampled_from([k for k in KINDS if k != "metric_random"]), st.integers(0, 500))
def test_generated_families_are_connected_and_spanning(kind, seed):
    inst = generate(kind, seed)
    build_rig(inst.g, inst.sets)  # checks connectivity of each member
    assert set().union(*inst.sets) == set(inst.g.vertices)
    for u, v in inst.g.edges():
        assert any(u in s and v in s for s in inst.sets)


@given(st.integers(0, 500))
def test_instance_round_trip_is_byte_identical(seed):
    inst = generate("random_triangulation_family", seed, n_points=15, n_regions=10)
    text = inst.dumps()
    assert Instance.from_json(json.loads(text)).dumps() == text


def test_F_ell_is_outerplanar_map():
    inst = gen_F_ell(4)
    inst.g.audit()
    assert inst.g.outer_vertices() == frozenset(inst.g.vertices)


# -- command line -----------------------------------------------------------


def run(argv):
    return cli.main([str(a) for a in argv])


def test_cli_gen_build_verify(tmp_path, capsys):
    inst = tmp_path / "inst.json"
    out = tmp_path / "out.json"
    trace = tmp_path / "trace.jsonl"
    assert run(["gen", "--kind", "grid_polylines", "--seed", 7, "--param", "n_strings=20", "--out", inst]) == 0
    assert run(["build", "--in", inst, "--out", out, "--trace", trace]) == 0
    assert trace.read_text().strip()
    capsys.readouterr()
    assert run(["verify", "--in", out]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["verified"] is True


def test_cli_build_is_byte_identical(tmp_path):
    inst = tmp_path / "inst.json"
    run(["gen", "--kind", "ring_family", "--seed", 2, "--out", inst])
    run(["build", "--in", inst, "--out", tmp_path / "a.json"])
    run(["build", "--in", inst, "--out", tmp_path / "b.json"])
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_cli_metric_and_verify(tmp_path, capsys):
    m = tmp_path / "m.json"
    out = tmp_path / "res.json"
    assert run(["gen", "--kind", "metric_random", "--seed", 1, "--param", "n_points=10", "--out", m]) == 0
    assert run(["metric", "--in", m, "--out", out]) == 0
    capsys.readouterr()
    assert run(["verify", "--in", out]) == 0
    assert json.loads(capsys.readouterr().out)["kind"] == "metric"


def test_cli_verify_rejects_tampered_output(tmp_path, capsys):
    inst = tmp_path / "inst.json"
    out = tmp_path / "out.json"
    run(["gen", "--kind", "grid_polylines", "--seed", 1, "--param", "n_strings=15", "--out", inst])
    run(["build", "--in", inst, "--out", out])
    data = json.loads(out.read_text())
    data["bijection"] = data["bijection"][:-1]
    out.write_text(json.dumps(data))
    assert run(["verify", "--in", out]) == 1
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])["verified"] is False


def test_cli_unknown_kind_exits_nonzero(tmp_path):
    assert run(["gen", "--kind", "nope", "--out", tmp_path / "x.json"]) == 1
