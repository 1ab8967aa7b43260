"""Wire-strap library generation and segment meshing.

Builds a seeded library of radiating wire shapes over a square scan
footprint: closed polygonal loops (label 0) and open bent dipoles
(label 1), with half-size / corner-rounding / rotation diversity, and
refines each shape into a straight-segment mesh for the thin-wire
solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SolverError

C0 = 299792458.0  # speed of light, m/s

SOURCE_KINDS = ("middle", "corner", "ending")

# Hard floor on any path edge or mesh segment, meters.  Keeps the
# reduced-kernel validity margin (segment >= 4 * radius for a 1 mm wire).
MIN_SEGMENT = 0.004

# Fillet arcs are polygonalized with chords near this length so that
# half-size shapes still respect MIN_SEGMENT.
ARC_CHORD_TARGET = 0.009

# A junction counts as a corner when the path direction changes at
# least this much (radians).  Fillet chords turn ~15-30 degrees, so
# rounded corners remain eligible for "corner" source placement.
CORNER_MIN_TURN = math.radians(10.0)


@dataclass(frozen=True)
class LibraryConfig:
    """Knobs for the shape library generator."""

    extent: tuple[float, float] = (0.3, 0.3)  # scan footprint, meters
    height: float = 0.01                      # wire plane above ground, meters
    radius: float = 0.001                     # wire radius, meters
    side_length: float = 0.10                 # nominal edge/arm length, meters
    side_jitter: float = 0.20                 # relative jitter on side length
    n_closed: int = 32
    n_open: int = 32

    def validate(self):
        ex, ey = self.extent
        if min(ex, ey) < 1.5 * self.side_length:
            raise ConfigError(
                f"scan extent {ex} x {ey} m is too small to contain "
                f"~{self.side_length * 100:.0f} cm shapes; need at least "
                f"{1.5 * self.side_length:.2f} m per side"
            )
        if self.height <= 0:
            raise ConfigError("wire height must be positive")
        if self.radius <= 0:
            raise ConfigError("wire radius must be positive")
        if not 0 <= self.side_jitter < 1:
            raise ConfigError("side_jitter must be in [0, 1)")
        if self.n_closed < 1 or self.n_open < 1:
            raise ConfigError("need at least one shape per class")


@dataclass(frozen=True, eq=False)
class WireGeometry:
    """A polyline wire path elevated above the ground plane.

    ``vertices`` is (n, 3) in meters; closed shapes repeat the first
    vertex at the end.  ``source_segment`` indexes the polyline edge
    carrying the delta-gap source and ``source_kind`` records whether
    that edge was chosen as a middle, corner, or ending placement.
    """

    id: str
    vertices: np.ndarray
    closed: bool
    radius: float
    height: float
    source_segment: int
    source_kind: str

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        object.__setattr__(self, "vertices", v)
        if v.ndim != 2 or v.shape[1] != 3 or v.shape[0] < 2:
            raise ConfigError(f"shape {self.id}: vertices must be (n>=2, 3)")
        if self.height <= 0:
            raise ConfigError(f"shape {self.id}: height must be positive")
        if not np.allclose(v[:, 2], self.height, atol=1e-12):
            raise ConfigError(f"shape {self.id}: all vertices must lie at z=height")
        endpoint_gap = np.linalg.norm(v[0] - v[-1])
        if self.closed and endpoint_gap > 1e-9:
            raise ConfigError(f"shape {self.id}: closed path does not close (gap {endpoint_gap:g} m)")
        if not self.closed and endpoint_gap <= 1e-9:
            raise ConfigError(f"shape {self.id}: open path has coincident endpoints")
        lengths = self.edge_lengths()
        if self.radius <= 0 or self.radius >= lengths.min():
            raise ConfigError(
                f"shape {self.id}: radius {self.radius} m violates thin-wire "
                f"validity (shortest edge {lengths.min():.4f} m)"
            )
        if not 0 <= self.source_segment < self.n_edges:
            raise ConfigError(f"shape {self.id}: source_segment out of range")
        if self.source_kind not in SOURCE_KINDS:
            raise ConfigError(f"shape {self.id}: unknown source kind {self.source_kind!r}")

    @property
    def label(self) -> int:
        return 0 if self.closed else 1

    @property
    def n_edges(self) -> int:
        return len(self.vertices) - 1

    def edge_lengths(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.vertices, axis=0), axis=1)


@dataclass(frozen=True, eq=False)
class SegmentMesh:
    """Straight-segment refinement of a wire path.

    Rooftop current bases sit on interior junctions: a closed mesh has
    one basis per segment (periodic), an open mesh has one fewer
    (current pinned to zero at both free ends).
    """

    geometry_id: str
    start: np.ndarray    # (S, 3)
    end: np.ndarray      # (S, 3)
    tangent: np.ndarray  # (S, 3), unit vectors
    length: np.ndarray   # (S,)
    closed: bool
    radius: float
    source_segment: int

    @property
    def n_segments(self) -> int:
        return len(self.length)

    @property
    def basis_count(self) -> int:
        return self.n_segments if self.closed else self.n_segments - 1

    @property
    def endpoint_condition(self) -> str:
        return "periodic" if self.closed else "vanishing"

    @property
    def segments(self):
        """Sequence of (start, end, tangent, length) tuples."""
        return list(zip(self.start, self.end, self.tangent, self.length))

    def basis_segments(self, i: int) -> tuple[int, int]:
        """Segment pair (rising, falling) spanned by basis ``i``."""
        if self.closed:
            return (i - 1) % self.n_segments, i
        return i, i + 1

    def source_basis(self) -> int:
        """Basis excited by the delta gap at ``source_segment``.

        The gap sits at the start junction of the source segment; open
        wires clamp to the nearest interior junction.
        """
        s = self.source_segment
        if self.closed:
            return s
        return min(max(s - 1, 0), self.basis_count - 1)


def generate_wire_library(config: LibraryConfig, seed: int) -> list[WireGeometry]:
    """Generate the seeded shape library (closed loops then open bends).

    The first half of each class are base shapes; the second half get
    the diversity modifiers (half-size scaling, partial corner
    rounding, in-plane rotation).  Same seed, same library.
    """
    config.validate()
    rng = np.random.default_rng(seed)
    shapes = []
    for i in range(config.n_closed):
        modified = i >= config.n_closed // 2
        shapes.append(_draw_shape(rng, config, f"closed-{i:02d}", True, modified))
    for i in range(config.n_open):
        modified = i >= config.n_open // 2
        shapes.append(_draw_shape(rng, config, f"open-{i:02d}", False, modified))
    return shapes


def mesh_wire(geometry: WireGeometry, frequency: float,
              max_segment_length: float | None = None) -> SegmentMesh:
    """Refine a wire path into solver segments.

    Segment lengths are kept within [max(4 mm, 4*radius), lambda/20];
    an optional ``max_segment_length`` tightens the upper bound (useful
    for electrically small shapes).  Path vertices always coincide with
    segment boundaries.
    """
    if frequency <= 0:
        raise SolverError("frequency must be positive")
    wavelength = C0 / frequency
    upper = wavelength / 20.0
    if max_segment_length is not None:
        upper = min(upper, max_segment_length)
    lower = max(MIN_SEGMENT, 4.0 * geometry.radius)
    if lower > upper:
        raise SolverError(
            f"shape {geometry.id}: no valid segment length exists; need "
            f">= {lower:.4f} m (4 x radius / 4 mm floor) but <= {upper:.4f} m "
            f"(lambda/20 at {frequency:.3g} Hz)"
        )

    verts = geometry.vertices
    starts, ends = [], []
    edge_first_seg = []
    edge_seg_count = []
    for e in range(geometry.n_edges):
        a, b = verts[e], verts[e + 1]
        span = np.linalg.norm(b - a)
        n = max(1, math.ceil(span / upper))
        if span / n < lower:
            n = math.floor(span / lower)
        if n < 1:
            raise SolverError(
                f"shape {geometry.id}: edge {e} is {span * 1000:.2f} mm, shorter "
                f"than the {lower * 1000:.1f} mm segment floor"
            )
        edge_first_seg.append(len(starts))
        edge_seg_count.append(n)
        pts = a + (b - a) * np.linspace(0.0, 1.0, n + 1)[:, None]
        starts.extend(pts[:-1])
        ends.extend(pts[1:])

    start = np.array(starts)
    end = np.array(ends)
    delta = end - start
    length = np.linalg.norm(delta, axis=1)
    tangent = delta / length[:, None]
    if length.min() < lower - 1e-12 or length.max() > upper + 1e-12:
        raise SolverError(f"shape {geometry.id}: meshing produced out-of-window segments")

    e = geometry.source_segment
    first, count = edge_first_seg[e], edge_seg_count[e]
    if geometry.source_kind == "corner":
        src = first
    elif geometry.source_kind == "ending":
        src = first if e == 0 else first + count - 1
    else:  # middle: junction nearest the edge midpoint
        src = first + min(round(count / 2), count - 1)

    return SegmentMesh(
        geometry_id=geometry.id,
        start=start, end=end, tangent=tangent, length=length,
        closed=geometry.closed, radius=geometry.radius, source_segment=src,
    )


# ---------------------------------------------------------------------------
# shape construction (2-D ring/polyline ops; z added at the end)

def _draw_shape(rng, config, shape_id, closed, modified, max_attempts=500):
    for _ in range(max_attempts):
        if closed:
            ring = _draw_polygon(rng, config)
        else:
            ring = _draw_bend(rng, config)
        scale = 1.0
        rotation = 0.0
        rounded = False
        if modified:
            scale = 0.5 if rng.random() < 0.5 else 1.0
            rounded = rng.random() < 0.5
            rotation = rng.uniform(0.0, 2.0 * math.pi)
        ring = ring * scale
        if rounded:
            ring = _round_corners(rng, ring, closed, scale)
        placed = _place(ring, config.extent, rotation)
        if placed is None:
            continue
        seg, kind = _draw_source(rng, placed, closed)
        verts2d = np.vstack([placed, placed[:1]]) if closed else placed
        vertices = np.column_stack([verts2d, np.full(len(verts2d), config.height)])
        return WireGeometry(
            id=shape_id, vertices=vertices, closed=closed,
            radius=config.radius, height=config.height,
            source_segment=seg, source_kind=kind,
        )
    raise ConfigError(
        f"could not place shape {shape_id} inside the {config.extent[0]} x "
        f"{config.extent[1]} m footprint after {max_attempts} attempts"
    )


def _draw_polygon(rng, config):
    """Regular or irregular polygon ring (unique vertices, no closure point)."""
    n = int(rng.integers(3, 9))
    side = config.side_length * (1.0 + rng.uniform(-config.side_jitter, config.side_jitter))
    irregular = rng.random() < 0.5
    phase = rng.uniform(0.0, 2.0 * math.pi)
    circumradius = side / (2.0 * math.sin(math.pi / n))
    angles = phase + 2.0 * math.pi * np.arange(n) / n
    radii = np.full(n, circumradius)
    if irregular:
        angles = angles + rng.uniform(-0.3, 0.3, n) * (math.pi / n)
        radii = radii * (1.0 + rng.uniform(-0.15, 0.15, n))
    return np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])


_BEND_ARMS = {"L": 2, "U": 3, "Z": 3, "S": 4}


def _draw_bend(rng, config):
    """Open polyline of 2-4 straight arms (L/U/Z/S families)."""
    family = str(rng.choice(list(_BEND_ARMS)))
    n_arms = _BEND_ARMS[family]
    irregular = rng.random() < 0.5
    arm_lengths = config.side_length * (
        1.0 + rng.uniform(-config.side_jitter, config.side_jitter, n_arms))
    chirality = 1.0 if rng.random() < 0.5 else -1.0
    turns = []
    for t in range(n_arms - 1):
        angle = math.pi / 2.0
        if family != "U" and irregular:
            angle += rng.uniform(-math.pi / 6.0, math.pi / 6.0)
        if family == "U":
            sign = chirality                      # same-direction turns
        else:
            sign = chirality * (1.0 if t % 2 == 0 else -1.0)  # alternating
        turns.append(sign * angle)
    pts = [np.zeros(2)]
    heading = 0.0
    for arm in range(n_arms):
        direction = np.array([math.cos(heading), math.sin(heading)])
        pts.append(pts[-1] + arm_lengths[arm] * direction)
        if arm < n_arms - 1:
            heading += turns[arm]
    return np.array(pts)


def _round_corners(rng, ring, closed, scale):
    """Replace a random subset of corners with circular-arc fillets."""
    n = len(ring)
    corner_ids = range(n) if closed else range(1, n - 1)
    # draw all per-corner randomness up front so skips never shift the stream
    flags = {c: rng.random() < 0.5 for c in corner_ids}
    radii = {c: rng.uniform(0.01, 0.03) * scale for c in corner_ids}
    out = []
    for c in range(n):
        point = ring[c]
        if c not in flags or not flags[c]:
            out.append(point[None, :])
            continue
        prev_pt = ring[(c - 1) % n] if closed else ring[c - 1]
        next_pt = ring[(c + 1) % n] if closed else ring[c + 1]
        arc = _fillet(point, prev_pt, next_pt, radii[c], scale)
        out.append(arc if arc is not None else point[None, :])
    return np.vstack(out)


def _fillet(corner, prev_pt, next_pt, radius, scale):
    """Polygonalized tangent arc replacing ``corner``, or None if it won't fit."""
    u = corner - prev_pt
    v = next_pt - corner
    lu, lv = np.linalg.norm(u), np.linalg.norm(v)
    u, v = u / lu, v / lv
    cross = u[0] * v[1] - u[1] * v[0]
    turn = math.atan2(abs(cross), float(np.dot(u, v)))
    if turn < CORNER_MIN_TURN or abs(math.pi - turn) < 1e-6:
        return None
    tan_half = math.tan(turn / 2.0)
    # keep the straight remainder of each adjacent edge above the segment
    # floor even when both of its corners get rounded
    max_offset = (min(lu, lv) - 1.15 * MIN_SEGMENT) / 2.0
    if max_offset <= 0:
        return None
    r = min(radius, max_offset / tan_half)
    arc_len = r * turn
    if arc_len < 0.005:  # too short to polygonalize above the segment floor
        return None
    offset = r * tan_half
    p1 = corner - u * offset
    p2 = corner + v * offset
    sign = 1.0 if cross > 0 else -1.0
    normal = sign * np.array([-u[1], u[0]])
    center = p1 + r * normal
    a0 = math.atan2(p1[1] - center[1], p1[0] - center[0])
    chords = max(2, math.ceil(arc_len / ARC_CHORD_TARGET))
    while chords > 1 and 2.0 * r * math.sin(turn / (2.0 * chords)) < 1.1 * MIN_SEGMENT:
        chords -= 1
    if 2.0 * r * math.sin(turn / (2.0 * chords)) < 1.1 * MIN_SEGMENT:
        return None
    theta = a0 + sign * turn * np.arange(chords + 1) / chords
    pts = center + r * np.column_stack([np.cos(theta), np.sin(theta)])
    pts[0], pts[-1] = p1, p2  # pin endpoints against roundoff
    return pts


def _place(ring, extent, rotation):
    """Center the ring in the footprint, rotate, and bounds-check."""
    ex, ey = extent
    footprint_center = np.array([ex / 2.0, ey / 2.0])
    bbox_center = (ring.min(axis=0) + ring.max(axis=0)) / 2.0
    pts = ring - bbox_center + footprint_center
    if rotation != 0.0:
        c, s = math.cos(rotation), math.sin(rotation)
        rot = np.array([[c, -s], [s, c]])
        pts = (pts - footprint_center) @ rot.T + footprint_center
    margin = 0.002
    if (pts[:, 0].min() < margin or pts[:, 0].max() > ex - margin
            or pts[:, 1].min() < margin or pts[:, 1].max() > ey - margin):
        return None
    return pts


def _turn_angles(pts, closed):
    """Turn angle at each junction vertex (index into the unique ring)."""
    n = len(pts)
    angles = {}
    ids = range(n) if closed else range(1, n - 1)
    for c in ids:
        u = pts[c] - pts[(c - 1) % n]
        v = pts[(c + 1) % n] - pts[c]
        u = u / np.linalg.norm(u)
        v = v / np.linalg.norm(v)
        angles[c] = math.atan2(abs(u[0] * v[1] - u[1] * v[0]), float(np.dot(u, v)))
    return angles


def _draw_source(rng, pts, closed):
    """Pick the excited path edge: uniform over {middle, corner, ending}."""
    kind = str(rng.choice(SOURCE_KINDS))
    if closed and kind == "ending":
        kind = str(rng.choice(SOURCE_KINDS[:2]))
    n_edges = len(pts) if closed else len(pts) - 1
    if kind == "ending":
        return (0 if rng.random() < 0.5 else n_edges - 1), kind
    if kind == "corner":
        turns = _turn_angles(pts, closed)
        corners = [c for c, a in turns.items() if a >= CORNER_MIN_TURN]
        if not corners:
            corners = [max(turns, key=turns.get)]
        vertex = int(corners[int(rng.integers(len(corners)))])
        # edge starting at the corner vertex (closed rings wrap, so the
        # vertex index is the edge index in both cases)
        edge = vertex if closed else min(vertex, n_edges - 1)
        return edge, kind
    # middle: edge whose midpoint is nearest half the total arclength
    ring = np.vstack([pts, pts[:1]]) if closed else pts
    seg_len = np.linalg.norm(np.diff(ring, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    midpoints = (cum[:-1] + cum[1:]) / 2.0
    edge = int(np.argmin(np.abs(midpoints - cum[-1] / 2.0)))
    return edge, kind


# ---------------------------------------------------------------------------
# manifest export

MANIFEST_HEADER = "# wirescan wire library v1"


def write_library_manifest(shapes, path):
    """Write the line-oriented library manifest (one record per shape)."""
    lines = [MANIFEST_HEADER]
    for g in shapes:
        lines.append(
            f"shape {g.id} label {g.label} closed {int(g.closed)} "
            f"radius {g.radius!r} height {g.height!r} "
            f"source {g.source_segment} kind {g.source_kind} "
            f"vertices {len(g.vertices)}"
        )
        for v in g.vertices:
            lines.append(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_library_manifest(path) -> list[WireGeometry]:
    """Parse a manifest written by :func:`write_library_manifest`."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != MANIFEST_HEADER:
        raise ConfigError(f"{path}: not a wirescan library manifest")
    shapes = []
    i = 1
    while i < len(lines):
        tok = lines[i].split()
        if tok[0] != "shape":
            raise ConfigError(f"{path}: expected shape record at line {i + 1}")
        rec = dict(zip(tok[2::2], tok[3::2]))
        rec["id"] = tok[1]
        n = int(rec["vertices"])
        verts = np.array([[float(x) for x in lines[i + 1 + j].split()[1:4]]
                          for j in range(n)])
        shapes.append(WireGeometry(
            id=rec["id"], vertices=verts, closed=bool(int(rec["closed"])),
            radius=float(rec["radius"]), height=float(rec["height"]),
            source_segment=int(rec["source"]), source_kind=rec["kind"],
        ))
        i += 1 + n
    return shapes
