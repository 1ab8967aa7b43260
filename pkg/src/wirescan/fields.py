"""Radiated near-field evaluation on the scan probe grid.

Superposes the exact fields of linear current filaments (the solved
rooftop bases sampled with the same 8-point Gauss rule as the matrix
assembly) plus their ground-plane images, at arbitrary observation
points or on the rectangular probe grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SolverError
from .geometry import SegmentMesh
from .mom import ETA0, GL_POINTS, GL_WEIGHTS, MIRROR, CurrentSolution, SolveConfig

FIELD_KINDS = ("E", "H")
COMBINE_MODES = ("total", "x", "y", "z")

_PROBE_CHUNK = 128  # observation points per vectorized block


@dataclass(frozen=True)
class ProbeGrid:
    """Rectangular scan grid parallel to the table.

    ``positions()[i, j]`` is (x_min + i*dx, y_min + j*dy, plane_height)
    with dx = extent_x / (nx - 1); this row-major convention is fixed.
    """

    nx: int = 30
    ny: int = 30
    extent: tuple[float, float] = (0.3, 0.3)
    plane_height: float = 0.02

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise SolverError("probe grid needs at least 2 x 2 points")
        if self.plane_height <= 0:
            raise SolverError("probe plane height must be positive")

    def positions(self) -> np.ndarray:
        x = np.linspace(0.0, self.extent[0], self.nx)
        y = np.linspace(0.0, self.extent[1], self.ny)
        gx, gy = np.meshgrid(x, y, indexing="ij")
        gz = np.full_like(gx, self.plane_height)
        return np.stack([gx, gy, gz], axis=-1)


@dataclass(frozen=True, eq=False)
class FieldMap:
    """Complex 3-component field samples on a probe grid."""

    geometry_id: str
    kind: str
    samples: np.ndarray  # (nx, ny, 3) complex
    grid: ProbeGrid

    def __post_init__(self):
        if self.kind not in FIELD_KINDS:
            raise SolverError(f"unknown field kind {self.kind!r}")
        if not np.all(np.isfinite(self.samples)):
            raise SolverError(f"{self.geometry_id}: non-finite field samples")


def filament_sources(solution: CurrentSolution, ground_plane: bool):
    """Quadrature representation of the solved current (plus images).

    Returns (points, tangents, moments): per source point, the complex
    current-moment I*dl already carries the quadrature weight, so
    fields are plain sums over sources.
    """
    mesh = solution.mesh
    s = mesh.n_segments
    coeffs = solution.coefficients

    start_node = np.zeros(s, dtype=complex)
    end_node = np.zeros(s, dtype=complex)
    if mesh.closed:
        start_node[:] = coeffs
        end_node[:] = np.roll(coeffs, -1)
    else:
        start_node[1:] = coeffs
        end_node[:-1] = coeffs

    # linear current profile sampled at the Gauss nodes of each segment
    cur = start_node[:, None] * (1.0 - GL_POINTS)[None, :] \
        + end_node[:, None] * GL_POINTS[None, :]
    weights = GL_WEIGHTS[None, :] * mesh.length[:, None]
    moments = (cur * weights).ravel()

    points = mesh.start[:, None, :] + GL_POINTS[None, :, None] \
        * mesh.length[:, None, None] * mesh.tangent[:, None, :]
    points = points.reshape(-1, 3)
    tangents = np.repeat(mesh.tangent, len(GL_POINTS), axis=0)

    if ground_plane:
        points = np.vstack([points, points * MIRROR])
        tangents = np.vstack([tangents, tangents * MIRROR])
        moments = np.concatenate([moments, -moments])
    return points, tangents, moments


def element_fields(obs: np.ndarray, src: np.ndarray, tangent: np.ndarray,
                   moment: np.ndarray, k: float):
    """Exact (E, H) of point current elements, summed over sources.

    ``obs`` is (P, 3); sources are (M, 3)/(M,) arrays.  Returns two
    (P, 3) complex arrays.
    """
    e_out = np.zeros((len(obs), 3), dtype=complex)
    h_out = np.zeros((len(obs), 3), dtype=complex)
    for lo in range(0, len(obs), _PROBE_CHUNK):
        sl = slice(lo, lo + _PROBE_CHUNK)
        rvec = obs[sl, None, :] - src[None, :, :]
        r = np.sqrt(np.einsum("pmc,pmc->pm", rvec, rvec))
        if np.any(r == 0.0):
            raise SolverError("observation point coincides with a source filament")
        rhat = rvec / r[..., None]
        kr = k * r
        common = moment[None, :] * np.exp(-1j * kr) / (4.0 * math.pi)

        inv_r = 1.0 / r
        inv_r2 = inv_r * inv_r
        near = 1.0 / (1j * k * r ** 3)
        radial = 1j * k * inv_r + 3.0 * inv_r2 + 3.0 * near
        trans = 1j * k * inv_r + inv_r2 + near

        cos_t = np.einsum("mc,pmc->pm", tangent, rhat)
        e_chunk = ETA0 * common[..., None] * (
            rhat * (cos_t * radial)[..., None] - tangent[None, :, :] * trans[..., None])
        l_cross_r = np.cross(np.broadcast_to(tangent[None, :, :], rvec.shape), rhat)
        h_chunk = common[..., None] * (1j * k * inv_r + inv_r2)[..., None] * l_cross_r

        e_out[sl] = e_chunk.sum(axis=1)
        h_out[sl] = h_chunk.sum(axis=1)
    return e_out, h_out


def fields_at_points(solution: CurrentSolution, points: np.ndarray,
                     config: SolveConfig):
    """(E, H) of the solved current at arbitrary points, clearance-checked."""
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    _check_clearance(points, solution.mesh)
    src, tan, mom = filament_sources(solution, config.ground_plane)
    return element_fields(points, src, tan, mom, config.wavenumber)


def compute_field_map(solution: CurrentSolution, grid: ProbeGrid, kind: str,
                      config: SolveConfig) -> FieldMap:
    """Evaluate E or H on the probe grid."""
    if kind not in FIELD_KINDS:
        raise SolverError(f"unknown field kind {kind!r}")
    e, h = _grid_fields(solution, grid, config)
    samples = e if kind == "E" else h
    return FieldMap(geometry_id=solution.geometry_id, kind=kind,
                    samples=samples, grid=grid)


def compute_both_field_maps(solution: CurrentSolution, grid: ProbeGrid,
                            config: SolveConfig):
    """One pass over sources yielding both the E and the H map."""
    e, h = _grid_fields(solution, grid, config)
    return (FieldMap(solution.geometry_id, "E", e, grid),
            FieldMap(solution.geometry_id, "H", h, grid))


def _grid_fields(solution, grid, config):
    pts = grid.positions().reshape(-1, 3)
    _check_clearance(pts, solution.mesh, grid)
    src, tan, mom = filament_sources(solution, config.ground_plane)
    e, h = element_fields(pts, src, tan, mom, config.wavenumber)
    shape = (grid.nx, grid.ny, 3)
    return e.reshape(shape), h.reshape(shape)


def _check_clearance(points, mesh: SegmentMesh, grid=None):
    """Reject observation points inside the wire surface tube."""
    a = mesh.start[None, :, :]
    d = (mesh.end - mesh.start)[None, :, :]
    t = np.einsum("psc,psc->ps", points[:, None, :] - a, d) / np.einsum("sc,sc->s", d[0], d[0])
    t = np.clip(t, 0.0, 1.0)
    nearest = a + t[..., None] * d
    dist = np.linalg.norm(points[:, None, :] - nearest, axis=2).min(axis=1)
    bad = np.nonzero(dist <= mesh.radius)[0]
    if len(bad):
        idx = int(bad[0])
        where = f"({idx // grid.ny}, {idx % grid.ny})" if grid is not None else str(idx)
        raise SolverError(
            f"{mesh.geometry_id}: probe {where} lies inside the wire surface "
            f"(clearance {dist[idx]:.2e} m <= radius {mesh.radius:.2e} m)"
        )


# ---------------------------------------------------------------------------
# magnitude maps

DB_FLOOR = -60.0


def field_magnitude_db(fmap: FieldMap, combine: str = "total") -> np.ndarray:
    """Per-probe magnitude in dB relative to the grid maximum.

    ``total`` combines the three complex components as a Euclidean
    norm; ``x``/``y``/``z`` select one component.  The grid maximum
    maps to 0 dB and everything is floored at -60 dB.
    """
    if combine not in COMBINE_MODES:
        raise ValueError(f"unknown combine mode {combine!r}")
    if combine == "total":
        mag = np.sqrt(np.sum(np.abs(fmap.samples) ** 2, axis=-1))
    else:
        mag = np.abs(fmap.samples[..., COMBINE_MODES.index(combine) - 1])
    ref = mag.max()
    if ref == 0.0:
        raise ValueError(f"{fmap.geometry_id}: all-zero field map, dB reference undefined")
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag / ref)
    return np.maximum(db, DB_FLOOR)


# ---------------------------------------------------------------------------
# text export

MAP_HEADER = "# wirescan field map v1"


def write_field_map(path, shape_id: str, kind: str, combine: str,
                    grid: ProbeGrid, db_values: np.ndarray):
    """Text-grid export of a dB magnitude map."""
    with open(path, "w") as fh:
        fh.write(MAP_HEADER + "\n")
        fh.write(f"id {shape_id}\nkind {kind}\ncombine {combine}\n")
        fh.write(f"nx {grid.nx}\nny {grid.ny}\n")
        fh.write(f"extent {float(grid.extent[0])!r} {float(grid.extent[1])!r}\n")
        fh.write(f"height {float(grid.plane_height)!r}\n")
        for row in db_values:
            fh.write(" ".join(f"{float(v)!r}" for v in row) + "\n")


def read_field_map(path):
    """Parse a map written by :func:`write_field_map`.

    Returns (meta dict, grid, values).
    """
    from .errors import DataFormatError

    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != MAP_HEADER:
        raise DataFormatError(f"{path}: not a wirescan field map")
    meta = {}
    body = 1
    for ln in lines[1:]:
        key = ln.split(" ", 1)[0]
        if key in ("id", "kind", "combine", "nx", "ny", "extent", "height"):
            meta[key] = ln.split(" ", 1)[1]
            body += 1
        else:
            break
    grid = ProbeGrid(
        nx=int(meta["nx"]), ny=int(meta["ny"]),
        extent=tuple(float(x) for x in meta["extent"].split()),
        plane_height=float(meta["height"]),
    )
    values = np.array([[float(x) for x in ln.split()] for ln in lines[body:body + grid.nx]])
    if values.shape != (grid.nx, grid.ny):
        raise DataFormatError(f"{path}: body does not match the declared grid")
    return meta, grid, values
