import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tpns.mesh import (
    BoundaryTag,
    UnsupportedGeometryError,
    generate_sector_mesh,
    mesh_stats,
    read_mesh,
    write_mesh,
)

QUARTER = math.pi / 2
SECTOR_AREA = QUARTER * (3.0**2 - 2.0**2) / 2


def sorted_edges(edges):
    return {(min(a, b), max(a, b)) for a, b in edges.tolist()}


def test_counts_for_coarse_example():
    mesh = generate_sector_mesh(2, 3, 0, QUARTER, 0.5)
    stats = mesh_stats(mesh)
    n_r, n_t = 2, 10
    assert stats["n_vertices"] == (n_r + 1) * (n_t + 1) == 33
    assert stats["n_triangles"] == 2 * n_r * n_t == 40
    assert stats["n_Gamma1"] == 2 * n_t == 20
    assert stats["n_Gamma2ThetaMin"] + stats["n_Gamma2ThetaMax"] == 2 * n_r == 4
    assert stats["n_boundary_edges"] == 24


def test_triangles_positively_oriented():
    mesh = generate_sector_mesh(2, 3, 0, QUARTER, 0.1)
    assert np.all(mesh.signed_areas() > 0)


def test_boundary_edges_cover_topological_boundary():
    mesh = generate_sector_mesh(2, 3, 0, QUARTER, 0.2)
    assert sorted_edges(mesh.boundary_edges) == mesh.topological_boundary()
    assert len(mesh.boundary_tags) == len(mesh.boundary_edges)


def test_flat_segments_exactly_on_axes():
    mesh = generate_sector_mesh(2, 3, 0, QUARTER, 0.1)
    lower = mesh.edges_with_tag(BoundaryTag.Gamma2ThetaMin).ravel()
    left = mesh.edges_with_tag(BoundaryTag.Gamma2ThetaMax).ravel()
    assert np.all(mesh.vertices[lower, 1] == 0.0)
    assert np.all(mesh.vertices[left, 0] == 0.0)


def test_wall_edges_on_circles():
    mesh = generate_sector_mesh(2, 3, 0, QUARTER, 0.1)
    r = np.hypot(*mesh.vertices[mesh.edges_with_tag(BoundaryTag.Gamma1).ravel()].T)
    assert np.all(np.isclose(r, 2.0, atol=1e-14) | np.isclose(r, 3.0, atol=1e-14))


@pytest.mark.parametrize("target", [0.5, 0.25, 2.0**-4])
def test_h_is_max_triangle_diameter_and_bounded(target):
    mesh = generate_sector_mesh(2, 3, 0, QUARTER, target)
    p = mesh.vertices[mesh.triangles]
    brute = max(
        np.linalg.norm(tri[i] - tri[j]) for tri in p for i in range(3) for j in range(i + 1, 3)
    )
    assert mesh.h == pytest.approx(brute, rel=1e-15)
    assert mesh.h <= 1.6 * target


def test_area_converges_from_below_at_second_order():
    deficits = []
    for target in (0.25, 0.125, 0.0625):
        area = mesh_stats(generate_sector_mesh(2, 3, 0, QUARTER, target))["total_area"]
        assert area < SECTOR_AREA
        deficits.append(SECTOR_AREA - area)
    ratios = np.array(deficits[:-1]) / np.array(deficits[1:])
    assert np.all((ratios > 3.5) & (ratios < 4.5))
    assert SECTOR_AREA == pytest.approx(5 * math.pi / 4)


def test_h_halves_under_refinement():
    hs = [generate_sector_mesh(2, 3, 0, QUARTER, 2.0**-k).h for k in range(2, 6)]
    for coarse, fine in zip(hs, hs[1:]):
        assert 0.45 <= fine / coarse <= 0.55


@pytest.mark.parametrize("theta1, theta2", [(0.1, QUARTER), (0.0, 1.0), (0.0, math.pi)])
def test_non_axis_segments_rejected(theta1, theta2):
    with pytest.raises(UnsupportedGeometryError):
        generate_sector_mesh(2, 3, theta1, theta2, 0.5)


@pytest.mark.parametrize("args", [(3, 2, 0, QUARTER, 0.5), (0, 3, 0, QUARTER, 0.5), (2, 3, 0, QUARTER, 0.0), (2, 3, 1, 0, 0.5)])
def test_invalid_arguments(args):
    with pytest.raises(ValueError):
        generate_sector_mesh(*args)


def test_file_round_trip_and_determinism(tmp_path):
    mesh = generate_sector_mesh(2, 3, 0, QUARTER, 0.25)
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    write_mesh(mesh, a)
    write_mesh(generate_sector_mesh(2, 3, 0, QUARTER, 0.25), b)
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text().splitlines()
    assert text[0] == "tpns-mesh 1"
    assert {ln.split()[-1] for ln in text[-len(mesh.boundary_edges):]} == {"G1", "G2A", "G2B"}
    back = read_mesh(a)
    assert np.array_equal(back.vertices, mesh.vertices)
    assert np.array_equal(back.triangles, mesh.triangles)
    assert np.array_equal(back.boundary_edges, mesh.boundary_edges)
    assert back.boundary_tags == mesh.boundary_tags


def test_read_rejects_bad_header(tmp_path):
    path = tmp_path / "m.txt"
    path.write_text("something else\n")
    with pytest.raises(ValueError):
        read_mesh(path)


@given(
    r1=st.floats(0.5, 5.0),
    width=st.floats(0.2, 3.0),
    target=st.floats(0.08, 1.0),
)
def test_mesh_invariants_hold_for_random_sectors(r1, width, target):
    mesh = generate_sector_mesh(r1, r1 + width, 0.0, QUARTER, target)
    assert np.all(mesh.signed_areas() > 0)
    assert sorted_edges(mesh.boundary_edges) == mesh.topological_boundary()
    n_r = math.ceil(width / target - 1e-12)
    assert len(mesh.edges_with_tag(BoundaryTag.Gamma2ThetaMin)) == n_r
    assert mesh.h <= 1.6 * target
