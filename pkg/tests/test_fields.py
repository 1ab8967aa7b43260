import numpy as np
import pytest

from oracles import hertzian_fields, hertzian_fields_with_image, magnetic_dipole_h
from wirescan.errors import DataFormatError, SolverError
from wirescan.fields import (
    FieldMap, ProbeGrid, compute_both_field_maps, compute_field_map,
    element_fields, field_magnitude_db, fields_at_points, read_field_map,
    write_field_map,
)
from wirescan.geometry import LibraryConfig, SegmentMesh, WireGeometry, generate_wire_library, mesh_wire
from wirescan.mom import CurrentSolution, SolveConfig, solve_geometry

FREQ = 1.0e9
LAMBDA = 299792458.0 / FREQ
K = 2.0 * np.pi / LAMBDA


def impressed_segment_solution(center, direction, total_len, peak=1.0 + 0.0j,
                               radius=1e-5):
    """Two tiny segments carrying a triangular impressed current."""
    direction = np.asarray(direction, float) / np.linalg.norm(direction)
    a = center - direction * total_len / 2
    m = np.asarray(center, float)
    b = center + direction * total_len / 2
    start = np.array([a, m])
    end = np.array([m, b])
    length = np.linalg.norm(end - start, axis=1)
    mesh = SegmentMesh(geometry_id="probe-dipole", start=start, end=end,
                       tangent=(end - start) / length[:, None], length=length,
                       closed=False, radius=radius, source_segment=0)
    return CurrentSolution(geometry_id="probe-dipole",
                           coefficients=np.array([peak], dtype=complex),
                           mesh=mesh, input_impedance=1.0 + 0j,
                           condition_estimate=1.0)


def test_element_fields_match_spherical_oracle():
    rng = np.random.default_rng(11)
    src = np.array([[0.12, 0.07, 0.04]])
    tangent = rng.normal(size=(1, 3))
    tangent /= np.linalg.norm(tangent)
    moment = np.array([0.7 - 0.3j])
    for _ in range(20):
        obs = src[0] + rng.uniform(-0.2, 0.2, 3)
        if np.linalg.norm(obs - src[0]) < 0.02:
            continue
        e, h = element_fields(obs[None, :], src, tangent, moment, K)
        e_ref, h_ref = hertzian_fields(obs, src[0], tangent[0], moment[0], K)
        assert np.allclose(e[0], e_ref, rtol=1e-10, atol=0)
        assert np.allclose(h[0], h_ref, rtol=1e-10, atol=0)


def test_impressed_dipole_with_image_matches_closed_form():
    # short horizontal filament over the ground plane vs the exact
    # two-dipole (source + image) formulas at 20 probe points
    center = np.array([0.15, 0.15, 0.01])
    direction = np.array([1.0, 0.0, 0.0])
    total_len = 0.001
    sol = impressed_segment_solution(center, direction, total_len)
    cfg = SolveConfig(frequency=FREQ, ground_plane=True)

    rng = np.random.default_rng(5)
    pts = []
    while len(pts) < 20:
        p = center + rng.uniform(-0.06, 0.06, 3)
        p[2] = abs(p[2]) + 0.01
        if np.linalg.norm(p - center) > 0.02:
            pts.append(p)
    pts = np.array(pts)

    e, h = fields_at_points(sol, pts, cfg)
    moment = 0.5 * total_len  # triangle of peak 1 A integrates to I*dl/2
    for i, p in enumerate(pts):
        e_ref, h_ref = hertzian_fields_with_image(p, center, direction, moment, K)
        assert np.linalg.norm(e[i] - e_ref) / np.linalg.norm(e_ref) < 0.01
        assert np.linalg.norm(h[i] - h_ref) / np.linalg.norm(h_ref) < 0.01


def test_small_loop_matches_magnetic_dipole_pattern():
    f = 29.9792458e6
    lam = 299792458.0 / f
    k = 2.0 * np.pi / lam
    side = 0.10
    verts = np.array([
        [0.1, 0.1, 0.01], [0.1 + side, 0.1, 0.01], [0.1 + side, 0.1 + side, 0.01],
        [0.1, 0.1 + side, 0.01], [0.1, 0.1, 0.01],
    ])
    g = WireGeometry(id="loop", vertices=verts, closed=True, radius=0.001,
                     height=0.01, source_segment=0, source_kind="middle")
    mesh = mesh_wire(g, f, max_segment_length=0.015)
    sol = CurrentSolution(geometry_id="loop",
                          coefficients=np.ones(mesh.basis_count, dtype=complex),
                          mesh=mesh, input_impedance=1.0 + 0j, condition_estimate=1.0)
    cfg = SolveConfig(frequency=f, ground_plane=False)

    center = np.array([0.15, 0.15, 0.01])
    moment = np.array([0.0, 0.0, side * side])  # I * area, +z by traversal order
    r = 2.0 * lam
    thetas = np.linspace(0.08 * np.pi, 0.92 * np.pi, 10)
    for phi in (0.0, 0.25 * np.pi):
        pts = center + r * np.stack([
            np.sin(thetas) * np.cos(phi), np.sin(thetas) * np.sin(phi), np.cos(thetas),
        ], axis=1)
        _, h = fields_at_points(sol, pts, cfg)
        h_ref = np.array([magnetic_dipole_h(p - center, moment, k) for p in pts])
        scale = np.linalg.norm(h_ref, axis=1).max()
        assert np.max(np.linalg.norm(h - h_ref, axis=1)) / scale < 0.03


@pytest.mark.property
def test_tangential_e_vanishes_on_ground_plane():
    shapes = generate_wire_library(LibraryConfig(), seed=7)
    grid = ProbeGrid()
    cfg = SolveConfig()
    for g in shapes[::13]:  # sample; all 64 shapes run in the acceptance gate
        sol = solve_geometry(g, cfg)
        emap = compute_field_map(sol, grid, "E", cfg)
        ref = np.sqrt(np.sum(np.abs(emap.samples) ** 2, axis=-1)).max()
        plane_pts = grid.positions().reshape(-1, 3).copy()
        plane_pts[:, 2] = 0.0
        e0, _ = fields_at_points(sol, plane_pts, cfg)
        tangential = np.sqrt(np.abs(e0[:, 0]) ** 2 + np.abs(e0[:, 1]) ** 2)
        assert tangential.max() / ref < 1e-3, g.id


def test_field_linearity_and_db_invariance():
    g = generate_wire_library(LibraryConfig(), seed=7)[0]
    cfg = SolveConfig()
    sol = solve_geometry(g, cfg)
    grid = ProbeGrid(nx=8, ny=8)
    base = compute_field_map(sol, grid, "H", cfg)

    alpha = 1.7 - 0.4j
    scaled_sol = CurrentSolution(geometry_id=g.id,
                                 coefficients=alpha * sol.coefficients,
                                 mesh=sol.mesh, input_impedance=sol.input_impedance,
                                 condition_estimate=sol.condition_estimate)
    scaled = compute_field_map(scaled_sol, grid, "H", cfg)
    assert np.allclose(scaled.samples, alpha * base.samples, rtol=1e-12)
    assert np.allclose(field_magnitude_db(scaled), field_magnitude_db(base), atol=1e-10)


def test_reciprocity_of_point_couplings():
    a = np.array([[0.05, 0.02, 0.04]])
    b = np.array([[0.21, 0.17, 0.09]])
    la = np.array([[0.0, 0.6, 0.8]])
    lb = np.array([[1.0, 0.0, 0.0]])
    one = np.array([1.0 + 0.0j])
    e_ab, _ = element_fields(b, a, la, one, K)
    e_ba, _ = element_fields(a, b, lb, one, K)
    c_ab = np.dot(e_ab[0], lb[0])
    c_ba = np.dot(e_ba[0], la[0])
    assert abs(c_ab - c_ba) / abs(c_ab) < 0.01


def test_grid_ordering_is_frozen():
    grid = ProbeGrid()
    pos = grid.positions()
    dx = 0.3 / 29
    assert pos.shape == (30, 30, 3)
    assert np.allclose(pos[0, 0], [0.0, 0.0, 0.02], atol=0)
    assert pos[5, 7][0] == pytest.approx(5 * dx, abs=1e-15)
    assert pos[5, 7][1] == pytest.approx(7 * dx, abs=1e-15)
    assert pos[29, 29][0] == pytest.approx(0.3, abs=1e-15)


def test_db_map_definitions():
    grid = ProbeGrid(nx=4, ny=4)
    rng = np.random.default_rng(0)
    samples = rng.normal(size=(4, 4, 3)) + 1j * rng.normal(size=(4, 4, 3))
    fmap = FieldMap("toy", "E", samples, grid)
    db = field_magnitude_db(fmap)
    assert db.max() == 0.0
    assert db.min() >= -60.0

    uniform = FieldMap("toy", "E", np.ones((4, 4, 3), dtype=complex), grid)
    assert np.array_equal(field_magnitude_db(uniform), np.zeros((4, 4)))

    zero = FieldMap("toy", "E", np.zeros((4, 4, 3), dtype=complex), grid)
    with pytest.raises(ValueError, match="all-zero"):
        field_magnitude_db(zero)


@pytest.mark.property
def test_total_magnitude_dominates_components():
    g = generate_wire_library(LibraryConfig(), seed=7)[3]
    cfg = SolveConfig()
    sol = solve_geometry(g, cfg)
    emap, hmap = compute_both_field_maps(sol, ProbeGrid(), cfg)
    for fmap in (emap, hmap):
        total = field_magnitude_db(fmap, "total")
        mag_total = np.sqrt(np.sum(np.abs(fmap.samples) ** 2, axis=-1))
        for mode in ("x", "y", "z"):
            comp = np.abs(fmap.samples[..., "xyz".index(mode)])
            assert np.all(comp <= mag_total + 1e-15)


def test_probe_inside_wire_is_rejected():
    g = generate_wire_library(LibraryConfig(), seed=7)[0]
    cfg = SolveConfig()
    sol = solve_geometry(g, cfg)
    inside = sol.mesh.start[0][None, :]
    with pytest.raises(SolverError, match="inside the wire"):
        fields_at_points(sol, inside, cfg)


def test_field_map_text_round_trip(tmp_path):
    grid = ProbeGrid(nx=6, ny=5, extent=(0.3, 0.25), plane_height=0.02)
    rng = np.random.default_rng(2)
    db = np.maximum(rng.uniform(-80, 0, size=(6, 5)), -60.0)
    db.flat[0] = 0.0
    path = tmp_path / "map.txt"
    write_field_map(path, "closed-00", "H", "total", grid, db)
    meta, grid2, values = read_field_map(path)
    assert meta["id"] == "closed-00"
    assert meta["kind"] == "H"
    assert grid2 == grid
    assert np.array_equal(values, db)

    bad = tmp_path / "bad.txt"
    bad.write_text("junk\n")
    with pytest.raises(DataFormatError):
        read_field_map(bad)
