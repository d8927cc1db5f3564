import math

import pytest
from hypothesis import settings
from hypothesis import strategies as st

from stringquasi.harness import Instance, map_from_coordinates

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def grid_map(rows: int, cols: int):
    """``rows x cols`` lattice, vertex ``r * cols + c`` at ``(c, r)``."""
    coords = {r * cols + c: (c, r) for r in range(rows) for c in range(cols)}
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return map_from_coordinates(coords, edges)


def annulus(rings: int = 3, width: int = 8) -> Instance:
    """Concentric cycles (outermost first) joined by spokes at even positions.

    Regions are three-vertex arcs of every cycle and every spoke.
    """
    coords = {}
    edges = []
    regions = []
    for r in range(rings):
        for i in range(width):
            a = 2 * math.pi * i / width
            coords[r * width + i] = ((rings - r) * math.cos(a), (rings - r) * math.sin(a))
        edges += [(r * width + i, r * width + (i + 1) % width) for i in range(width)]
        regions += [
            frozenset({r * width + i, r * width + (i + 1) % width, r * width + (i + 2) % width})
            for i in range(0, width, 2)
        ]
    for r in range(rings - 1):
        for i in range(0, width, 2):
            edges.append((r * width + i, (r + 1) * width + i))
            regions.append(frozenset({r * width + i, (r + 1) * width + i}))
    return Instance(map_from_coordinates(coords, edges), regions, "annulus", {"rings": rings, "width": width})


@pytest.fixture
def fix_grid():
    """3x3 grid with the family of all twelve edges."""
    g = grid_map(3, 3)
    return g, [frozenset(e) for e in g.edges()]


@pytest.fixture
def fix_ann():
    return annulus()


@st.composite
def polyline_instances(draw, max_strings=25):
    from stringquasi.harness import gen_grid_polylines

    n = draw(st.integers(1, max_strings))
    size = draw(st.integers(3, 9))
    seed = draw(st.integers(0, 10_000))
    return gen_grid_polylines(n, size, seed)


@st.composite
def triangulation_instances(draw, max_points=25):
    from stringquasi.harness import gen_random_triangulation_family

    n = draw(st.integers(3, max_points))
    k = draw(st.integers(1, max_points))
    seed = draw(st.integers(0, 10_000))
    return gen_random_triangulation_family(n, k, seed)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
