"""Grayscale scan-image pipeline and labeled dataset handling.

Turns 30x30 dB field maps into the 100x100 training images (bilinear
upsample to a figure-sized raster, Gaussian anti-aliasing blur, 3x
decimation), assembles labeled datasets, persists them in a compact
binary format, and ingests externally measured scans through the same
resampling path.
"""

from __future__ import annotations

import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .errors import DataFormatError, SolverError
from .fields import DB_FLOOR, ProbeGrid, compute_field_map, field_magnitude_db
from .mom import SolveConfig, solve_geometry

PIPELINE_VERSION = "1"
UPSAMPLE_FACTOR = 10     # 30x30 probe grid -> 300x300 raster
DECIMATION = 3           # 300x300 raster -> 100x100 image
BLUR_SIGMA_PER_FACTOR = 0.4
IMAGE_SIZE = 100

PROVENANCES = ("synthetic", "ingested")


@dataclass(frozen=True, eq=False)
class ScanImage:
    """One 100x100 grayscale training sample with its class label."""

    shape_id: str
    pixels: np.ndarray
    label: int
    provenance: str = "synthetic"

    def __post_init__(self):
        p = np.asarray(self.pixels, dtype=float)
        object.__setattr__(self, "pixels", p)
        if p.shape != (IMAGE_SIZE, IMAGE_SIZE):
            raise DataFormatError(f"{self.shape_id}: image must be "
                                  f"{IMAGE_SIZE}x{IMAGE_SIZE}, got {p.shape}")
        if not np.all(np.isfinite(p)):
            raise DataFormatError(f"{self.shape_id}: non-finite pixels")
        if p.min() < 0.0 or p.max() > 1.0:
            raise DataFormatError(f"{self.shape_id}: pixels outside [0, 1]")
        if self.label not in (0, 1):
            raise DataFormatError(f"{self.shape_id}: label must be 0 or 1")
        if self.provenance not in PROVENANCES:
            raise DataFormatError(f"{self.shape_id}: unknown provenance")

    @property
    def features(self) -> np.ndarray:
        """Flat 10 000-pixel feature vector."""
        return self.pixels.ravel()


@dataclass(eq=False)
class Dataset:
    """Labeled scan images plus the manifest that regenerates them."""

    probe_kind: str
    images: list
    manifest: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.probe_kind not in ("E", "H"):
            raise DataFormatError(f"unknown probe kind {self.probe_kind!r}")
        ids = [im.shape_id for im in self.images]
        if len(set(ids)) != len(ids):
            raise DataFormatError("duplicate shape ids in dataset")

    def __len__(self):
        return len(self.images)

    @property
    def class_counts(self) -> tuple[int, int]:
        labels = [im.label for im in self.images]
        return labels.count(0), labels.count(1)

    def feature_matrix(self):
        """(n, 10000) features and (n,) labels for the classifiers."""
        x = np.stack([im.features for im in self.images])
        y = np.array([im.label for im in self.images], dtype=int)
        return x, y


# ---------------------------------------------------------------------------
# raster operations

def render_grayscale(db_map: np.ndarray) -> np.ndarray:
    """Map a dB grid affinely to [0, 1] and upsample bilinearly 10x.

    -60 dB maps to 0.0 and 0 dB to 1.0; probe (i, j) lands exactly on
    raster pixel (10i + 5, 10j + 5).
    """
    db = np.asarray(db_map, dtype=float)
    if db.min() < DB_FLOOR - 1e-9 or db.max() > 1e-9:
        raise DataFormatError(
            f"dB map out of range [{DB_FLOOR}, 0]: "
            f"[{db.min():.2f}, {db.max():.2f}]"
        )
    unit = (db - DB_FLOOR) / -DB_FLOOR
    up = _bilinear_upsample_axis(unit, UPSAMPLE_FACTOR, axis=0)
    return _bilinear_upsample_axis(up, UPSAMPLE_FACTOR, axis=1)


def downsample_antialiased(image: np.ndarray) -> np.ndarray:
    """Gaussian blur (sigma = 1.2 source pixels) then 3x block-center decimation."""
    img = np.asarray(image, dtype=float)
    if img.min() < 0.0 or img.max() > 1.0:
        raise DataFormatError("downsample input must lie in [0, 1]")
    sigma = BLUR_SIGMA_PER_FACTOR * DECIMATION
    blurred = gaussian_blur(img, sigma)
    out = blurred[DECIMATION // 2::DECIMATION, DECIMATION // 2::DECIMATION]
    return np.clip(out, 0.0, 1.0)


def image_from_db(db_map: np.ndarray) -> np.ndarray:
    """Full raster chain: dB grid -> 100x100 pixels in [0, 1]."""
    return downsample_antialiased(render_grayscale(db_map))


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Separable truncated-Gaussian blur, kernel renormalized at borders."""
    radius = int(round(4.0 * sigma))
    offsets = np.arange(-radius, radius + 1)
    taps = np.exp(-0.5 * (offsets / sigma) ** 2)
    out = _convolve_axis(img, taps, axis=0)
    return _convolve_axis(out, taps, axis=1)


def _convolve_axis(arr, taps, axis):
    work = np.moveaxis(arr, axis, 0)
    n = work.shape[0]
    radius = (len(taps) - 1) // 2
    acc = np.zeros_like(work)
    norm = np.zeros(n)
    for off, w in zip(range(-radius, radius + 1), taps):
        if off >= 0:
            acc[:n - off] += w * work[off:]
            norm[:n - off] += w
        else:
            acc[-off:] += w * work[:n + off]
            norm[-off:] += w
    acc = acc / norm.reshape(-1, *([1] * (work.ndim - 1)))
    return np.moveaxis(acc, 0, axis)


def _bilinear_upsample_axis(arr, factor, axis):
    n = arr.shape[axis]
    u = np.clip((np.arange(n * factor) - factor / 2.0) / factor, 0.0, n - 1.0)
    return _gather_linear(arr, u, axis)


def _resample_axis(arr, out_n, axis):
    """Bilinear resample to ``out_n`` samples at output-pixel centers."""
    n = arr.shape[axis]
    f = n / out_n
    u = np.clip((np.arange(out_n) + 0.5) * f - 0.5, 0.0, n - 1.0)
    return _gather_linear(arr, u, axis)


def _gather_linear(arr, u, axis):
    i0 = np.floor(u).astype(int)
    i1 = np.minimum(i0 + 1, arr.shape[axis] - 1)
    frac = u - i0
    a0 = np.take(arr, i0, axis=axis)
    a1 = np.take(arr, i1, axis=axis)
    shape = [1] * arr.ndim
    shape[axis] = len(u)
    frac = frac.reshape(shape)
    return a0 * (1.0 - frac) + a1 * frac


def resize_grayscale(raster: np.ndarray, out_shape=(IMAGE_SIZE, IMAGE_SIZE)) -> np.ndarray:
    """Resize through the anti-aliased path (blur sigma = 0.4 * factor).

    Identity when the size already matches; pure bilinear when
    upscaling; Gaussian blur plus center resampling when downscaling.
    """
    img = np.asarray(raster, dtype=float)
    for axis in (0, 1):
        n, out_n = img.shape[axis], out_shape[axis]
        if n == out_n:
            continue
        if n > out_n:
            sigma = BLUR_SIGMA_PER_FACTOR * (n / out_n)
            img = _convolve_axis(
                img, np.exp(-0.5 * (np.arange(-int(round(4 * sigma)),
                                              int(round(4 * sigma)) + 1) / sigma) ** 2),
                axis)
        img = _resample_axis(img, out_n, axis)
    return np.clip(img, 0.0, 1.0)


# ---------------------------------------------------------------------------
# dataset assembly

def build_dataset(library, probe_kind: str, config: SolveConfig | None = None,
                  grid: ProbeGrid | None = None, combine: str = "total",
                  manifest: dict | None = None, jobs: int = 1) -> Dataset:
    """Run the full synthesis pipeline over a shape library.

    Each shape goes mesh -> solve -> field map -> dB -> render ->
    downsample; any per-shape failure aborts the build naming the
    shape.  ``jobs > 1`` distributes shapes over processes without
    changing results.
    """
    config = config or SolveConfig()
    grid = grid or ProbeGrid()
    args = [(g, probe_kind, config, grid, combine) for g in library]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            images = list(pool.map(_build_one_image, args, chunksize=4))
    else:
        images = [_build_one_image(a) for a in args]
    info = {
        "pipeline_version": PIPELINE_VERSION,
        "probe_kind": probe_kind,
        "combine": combine,
        "frequency_hz": repr(config.frequency),
        "source_voltage": repr(config.source_voltage),
        "ground_plane": str(int(config.ground_plane)),
        "grid_nx": str(grid.nx), "grid_ny": str(grid.ny),
        "grid_extent_m": f"{grid.extent[0]!r} {grid.extent[1]!r}",
        "grid_height_m": repr(grid.plane_height),
        "shape_count": str(len(images)),
        "closed_count": str(sum(1 for im in images if im.label == 0)),
        "open_count": str(sum(1 for im in images if im.label == 1)),
    }
    info.update(manifest or {})
    return Dataset(probe_kind=probe_kind, images=images, manifest=info)


def _build_one_image(task):
    geometry, probe_kind, config, grid, combine = task
    try:
        solution = solve_geometry(geometry, config)
        fmap = compute_field_map(solution, grid, probe_kind, config)
        db = field_magnitude_db(fmap, combine)
        pixels = image_from_db(db)
    except Exception as exc:
        raise SolverError(f"pipeline failed for shape {geometry.id}: {exc}") from exc
    return ScanImage(shape_id=geometry.id, pixels=pixels, label=geometry.label)


# ---------------------------------------------------------------------------
# binary dataset persistence

DATASET_MAGIC = b"WIRESCAN-DATASET"
DATASET_VERSION = 1


def save_dataset(dataset: Dataset, path, manifest_path=None):
    """Write the binary dataset plus a human-readable manifest."""
    with open(path, "wb") as fh:
        fh.write(DATASET_MAGIC)
        fh.write(struct.pack("<IcI", DATASET_VERSION,
                             dataset.probe_kind.encode(), len(dataset.images)))
        for im in dataset.images:
            ident = im.shape_id.encode()
            fh.write(struct.pack("<H", len(ident)))
            fh.write(ident)
            fh.write(struct.pack("<BB", im.label, PROVENANCES.index(im.provenance)))
            fh.write(im.pixels.astype("<f4").tobytes())
    if manifest_path is None:
        manifest_path = str(path) + ".manifest"
    with open(manifest_path, "w") as fh:
        for key in sorted(dataset.manifest):
            fh.write(f"{key} = {dataset.manifest[key]}\n")


def load_dataset(path) -> Dataset:
    """Read a dataset written by :func:`save_dataset`."""
    import os

    with open(path, "rb") as fh:
        magic = fh.read(len(DATASET_MAGIC))
        if magic != DATASET_MAGIC:
            raise DataFormatError(f"{path}: bad magic, not a wirescan dataset")
        version, kind, count = struct.unpack("<IcI", fh.read(9))
        if version != DATASET_VERSION:
            raise DataFormatError(f"{path}: unsupported dataset version {version}")
        images = []
        for _ in range(count):
            raw = fh.read(2)
            if len(raw) < 2:
                raise DataFormatError(f"{path}: truncated dataset")
            (id_len,) = struct.unpack("<H", raw)
            ident = fh.read(id_len).decode()
            label, prov = struct.unpack("<BB", fh.read(2))
            buf = fh.read(4 * IMAGE_SIZE * IMAGE_SIZE)
            if len(buf) < 4 * IMAGE_SIZE * IMAGE_SIZE:
                raise DataFormatError(f"{path}: truncated image payload for {ident}")
            pixels = np.frombuffer(buf, dtype="<f4").reshape(IMAGE_SIZE, IMAGE_SIZE)
            images.append(ScanImage(shape_id=ident, pixels=pixels.astype(float),
                                    label=int(label), provenance=PROVENANCES[prov]))
    manifest = {}
    mpath = str(path) + ".manifest"
    if os.path.exists(mpath):
        with open(mpath) as fh:
            for line in fh:
                if "=" in line:
                    key, val = line.split("=", 1)
                    manifest[key.strip()] = val.strip()
    return Dataset(probe_kind=kind.decode(), images=images, manifest=manifest)


# ---------------------------------------------------------------------------
# PNG import/export and ingestion

def save_grayscale_png(array01: np.ndarray, path, bits: int = 8):
    """Write a [0, 1] array as an 8- or 16-bit grayscale PNG."""
    arr = np.asarray(array01, dtype=float)
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise DataFormatError("PNG export expects values in [0, 1]")
    if bits == 8:
        img = Image.fromarray(np.round(arr * 255).astype(np.uint8), mode="L")
    elif bits == 16:
        img = Image.fromarray(np.round(arr * 65535).astype(np.uint16))
    else:
        raise DataFormatError("PNG export supports 8 or 16 bits")
    img.save(path, format="PNG")


def load_grayscale_png(path) -> np.ndarray:
    """Read an 8/16-bit grayscale PNG into a [0, 1] array."""
    with Image.open(path) as img:
        if img.mode == "L":
            scale = 255.0
        elif img.mode in ("I;16", "I;16B", "I"):
            scale = 65535.0
        else:
            raise DataFormatError(f"{path}: unsupported PNG mode {img.mode!r}, "
                                  "expected 8/16-bit grayscale")
        arr = np.asarray(img, dtype=float)
    if arr.ndim != 2:
        raise DataFormatError(f"{path}: raster is not rectangular grayscale")
    return arr / scale


def read_label_manifest(path) -> dict:
    """Parse ``filename,label`` lines into a dict."""
    labels = {}
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 2 or parts[1].strip() not in ("0", "1"):
                raise DataFormatError(f"{path}:{ln}: expected 'filename,label' "
                                      "with label 0 or 1")
            labels[parts[0].strip()] = int(parts[1])
    return labels


def ingest_external(image_paths, labels_path, probe_kind: str = "H") -> Dataset:
    """Build a dataset from measured scan images plus a label manifest.

    Rasters are rescaled to [0, 1], resized to 100x100 through the
    anti-aliased path, and tagged provenance=ingested.  All per-file
    problems are collected into one failure report.
    """
    import os

    labels = read_label_manifest(labels_path)
    failures = []
    images = []
    for path in image_paths:
        name = os.path.basename(str(path))
        if name not in labels:
            failures.append(f"{name}: missing from label manifest")
            continue
        try:
            raster = load_grayscale_png(path)
            pixels = resize_grayscale(raster)
        except Exception as exc:
            failures.append(f"{name}: {exc}")
            continue
        images.append(ScanImage(shape_id=os.path.splitext(name)[0], pixels=pixels,
                                label=labels[name], provenance="ingested"))
    known = {os.path.basename(str(p)) for p in image_paths}
    for name in sorted(set(labels) - known):
        failures.append(f"{name}: listed in manifest but no such image file")
    if failures:
        raise DataFormatError("ingestion failed:\n  " + "\n  ".join(failures))
    manifest = {"pipeline_version": PIPELINE_VERSION, "provenance": "ingested",
                "probe_kind": probe_kind, "shape_count": str(len(images))}
    return Dataset(probe_kind=probe_kind, images=images, manifest=manifest)


def tile_gallery(arrays, cols: int = 8, pad: int = 2) -> np.ndarray:
    """Compose equal-sized [0, 1] tiles into one padded gallery array."""
    arrays = list(arrays)
    h, w = arrays[0].shape
    rows = (len(arrays) + cols - 1) // cols
    out = np.ones((rows * h + (rows + 1) * pad, cols * w + (cols + 1) * pad))
    for idx, tile in enumerate(arrays):
        r, c = divmod(idx, cols)
        top = pad + r * (h + pad)
        left = pad + c * (w + pad)
        out[top:top + h, left:left + w] = tile
    return out
