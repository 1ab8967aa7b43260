"""Thin-wire method-of-moments solver over a perfect ground plane.

Solves the electric-field integral equation in mixed-potential form on
a segment mesh: triangular (rooftop) current bases on adjacent-segment
pairs, Galerkin testing, thin-wire reduced kernel exp(-jkR)/(4 pi R)
with R = sqrt(d^2 + a^2), and a delta-gap voltage source.  The ground
plane at z=0 enters through image currents (horizontal components
reversed).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import SolverError
from .geometry import C0, SegmentMesh

log = logging.getLogger("wirescan.mom")

MU0 = 4.0e-7 * math.pi
EPS0 = 1.0 / (MU0 * C0 * C0)
ETA0 = math.sqrt(MU0 / EPS0)

# 8-point Gauss-Legendre rule on [0, 1]; shared by matrix assembly and
# the radiation integrals in field_scan.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
GL_POINTS = 0.5 * (_GL_X + 1.0)
GL_WEIGHTS = 0.5 * _GL_W

MIRROR = np.array([1.0, 1.0, -1.0])


@dataclass(frozen=True)
class SolveConfig:
    """Excitation and environment for one solve."""

    frequency: float = 1.0e9
    source_voltage: complex = 1.0 + 0.0j
    ground_plane: bool = True

    def validate(self):
        if self.frequency <= 0:
            raise SolverError("frequency must be positive")
        if self.source_voltage == 0:
            raise SolverError("source voltage must be nonzero")

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.frequency

    @property
    def wavelength(self) -> float:
        return C0 / self.frequency

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength


@dataclass(frozen=True, eq=False)
class CurrentSolution:
    """Fitted basis currents for one shape.

    ``coefficients[i]`` is the complex current (amperes) at the
    junction carrying basis ``i``; open wire ends carry no basis, so
    the reconstructed current vanishes there identically.
    """

    geometry_id: str
    coefficients: np.ndarray
    mesh: SegmentMesh
    input_impedance: complex
    condition_estimate: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.coefficients)):
            raise SolverError(f"{self.geometry_id}: non-finite current solution")


def basis_tables(mesh: SegmentMesh):
    """Per-basis segment/orientation bookkeeping.

    Returns (seg, sigma) with shape (2, basis_count): row 0 is the
    rising-half segment (hat goes 0 -> 1 along it), row 1 the falling
    half; sigma holds the line-charge signs +-1/length.
    """
    b = mesh.basis_count
    seg = np.empty((2, b), dtype=int)
    for i in range(b):
        seg[0, i], seg[1, i] = mesh.basis_segments(i)
    sigma = np.vstack([1.0 / mesh.length[seg[0]], -1.0 / mesh.length[seg[1]]])
    return seg, sigma


def assemble_impedance_matrix(mesh: SegmentMesh, config: SolveConfig) -> np.ndarray:
    """Galerkin impedance matrix, complex symmetric by construction."""
    config.validate()
    if mesh.length.max() > config.wavelength / 20.0 + 1e-12:
        raise SolverError(
            f"{mesh.geometry_id}: mesh too coarse for {config.frequency:.3g} Hz "
            f"(max segment {mesh.length.max():.4f} m > lambda/20)"
        )
    z = _basis_interactions(mesh, config, mirror=False)
    if config.ground_plane:
        z = z - _basis_interactions(mesh, config, mirror=True)
    return 0.5 * (z + z.T)


def solve_currents(z: np.ndarray, mesh: SegmentMesh, config: SolveConfig) -> CurrentSolution:
    """Dense LU solve of the delta-gap excited system."""
    config.validate()
    b = mesh.basis_count
    if z.shape != (b, b):
        raise SolverError(f"{mesh.geometry_id}: matrix shape {z.shape} does not match {b} bases")
    cond = float(np.linalg.cond(z))
    if not np.isfinite(cond) or cond > 0.1 / np.finfo(float).eps:
        raise SolverError(
            f"{mesh.geometry_id}: impedance matrix numerically singular "
            f"(condition estimate {cond:.3g})"
        )
    if cond > 1e12:
        log.warning("%s: poorly conditioned impedance matrix (cond %.3g)",
                    mesh.geometry_id, cond)
    excitation = np.zeros(b, dtype=complex)
    src = mesh.source_basis()
    excitation[src] = config.source_voltage
    coefficients = np.linalg.solve(z, excitation)
    gap_current = coefficients[src]
    if gap_current == 0:
        raise SolverError(f"{mesh.geometry_id}: zero current at the source gap")
    return CurrentSolution(
        geometry_id=mesh.geometry_id,
        coefficients=coefficients,
        mesh=mesh,
        input_impedance=complex(config.source_voltage / gap_current),
        condition_estimate=cond,
    )


def solve_geometry(geometry, config: SolveConfig,
                   max_segment_length: float | None = None) -> CurrentSolution:
    """Mesh, assemble, and solve one wire shape."""
    from .geometry import mesh_wire

    mesh = mesh_wire(geometry, config.frequency, max_segment_length)
    z = assemble_impedance_matrix(mesh, config)
    return solve_currents(z, mesh, config)


def dump_solution_debug(path, z: np.ndarray, solution: CurrentSolution,
                        config: SolveConfig):
    """Text dump of the system (matrix, excitation, coefficients)."""
    b = solution.mesh.basis_count
    excitation = np.zeros(b, dtype=complex)
    excitation[solution.mesh.source_basis()] = config.source_voltage
    with open(path, "w") as fh:
        fh.write(f"# wirescan mom debug {solution.geometry_id}\n")
        fh.write(f"# bases {b} frequency {config.frequency!r} "
                 f"ground {int(config.ground_plane)}\n")
        for name, arr in (("Z", z), ("V", excitation[None, :]),
                          ("I", solution.coefficients[None, :])):
            fh.write(f"[{name}]\n")
            for row in arr:
                fh.write(" ".join(f"{c.real!r}{c.imag:+}j" for c in row) + "\n")


# ---------------------------------------------------------------------------
# assembly internals

def _segment_quadrature(mesh, mirror):
    """Quadrature points/weights and geometry arrays for all segments."""
    start, tangent, length = mesh.start, mesh.tangent, mesh.length
    if mirror:
        start = start * MIRROR
        tangent = tangent * MIRROR
    # points[p, i] = start_p + x_i * L_p * tangent_p
    points = start[:, None, :] + GL_POINTS[None, :, None] * length[:, None, None] * tangent[:, None, :]
    weights = GL_WEIGHTS[None, :] * length[:, None]
    return points, weights, start, tangent, length


def _basis_interactions(mesh, config, mirror):
    """Basis-pair impedance contributions for direct or image sources.

    The kernel is split as g = (exp(-jkR) - 1)/R + 1/R: the smooth part
    integrates with an 8x8 Gauss product rule, the 1/R part uses the
    exact inner integral of a linear current profile over each straight
    source segment (singularity extraction on overlapping supports).
    """
    k = config.wavenumber
    radius2 = mesh.radius ** 2

    tp, tw, _, ttan, _ = _segment_quadrature(mesh, mirror=False)
    sp, sw, sstart, stan, slen = _segment_quadrature(mesh, mirror=mirror)

    diff = tp[:, :, None, None, :] - sp[None, None, :, :, :]
    dist = np.sqrt(np.einsum("piqjc,piqjc->piqj", diff, diff) + radius2)
    smooth = (np.exp(-1j * k * dist) - 1.0) / dist

    # triangle profile values at the quadrature nodes, rising and falling
    lam = np.vstack([GL_POINTS, 1.0 - GL_POINTS])  # (2, 8)

    # exact inner integrals of 1/R (constant and rising-linear profiles)
    rel = tp[:, :, None, :] - sstart[None, None, :, :]
    u0 = np.einsum("piqc,qc->piq", rel, stan)
    rho2 = np.maximum(np.einsum("piqc,piqc->piq", rel, rel) - u0 ** 2, 0.0) + radius2
    rho = np.sqrt(rho2)
    lq = slen[None, None, :]
    i_const = np.arcsinh((lq - u0) / rho) + np.arcsinh(u0 / rho)
    i_linear = (np.sqrt((lq - u0) ** 2 + rho2) - np.sqrt(u0 ** 2 + rho2)
                + u0 * i_const) / lq
    i_lam = np.stack([i_linear, i_const - i_linear])  # (2, S, 8, S)

    # weighted double integrals per segment pair and profile combo
    tprof = tw[None, :, :] * lam[:, None, :]          # (2, S, 8)
    sprof = sw[None, :, :] * lam[:, None, :]
    vector = np.einsum("api,bqj,piqj->abpq", tprof, sprof, smooth)
    vector += np.einsum("api,bpiq->abpq", tprof.astype(complex), i_lam)
    scalar = np.einsum("pi,qj,piqj->pq", tw, sw, smooth)
    scalar = scalar + np.einsum("pi,piq->pq", tw, i_const)

    dots = ttan @ (stan.T)

    seg, sigma = basis_tables(mesh)
    b = mesh.basis_count
    z = np.zeros((b, b), dtype=complex)
    c_vec = 1j * config.omega * MU0 / (4.0 * math.pi)
    c_sca = 1j / (4.0 * math.pi * config.omega * EPS0)
    for r in range(2):
        for s in range(2):
            block = np.ix_(seg[r], seg[s])
            z += c_vec * dots[block] * vector[r, s][block]
            z -= c_sca * np.outer(sigma[r], sigma[s]) * scalar[block]
    return z
