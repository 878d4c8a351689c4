"""Core domain types: trajectories, polygonal regions, deterministic RNG
streams, and CSV ingestion/serialization.

Conventions used throughout the package: planar coordinates are kilometers
(or abstract units), timestamps are plain reals in hours (or abstract
units). Calendar parsing and geodesy are out of scope.

The trajectory CSV format is ``t,x[,y][,lc]`` with a header line, decimal
point, comma separator, UTF-8 text; lines starting with ``#`` are comments.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DataError, ParseError

_MASK64 = (1 << 64) - 1


def _finite_array(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True)
class Trajectory:
    """Time-stamped positions r(t_i) with strictly increasing times.

    ``positions`` has shape (n, p) with p in {1, 2}. ``quality`` optionally
    holds per-point location-class labels aligned with ``times``.
    """

    times: np.ndarray
    positions: np.ndarray
    quality: tuple[str, ...] | None = None

    def __post_init__(self):
        times = _finite_array(self.times, "times")
        pos = _finite_array(self.positions, "positions")
        if pos.ndim == 1:
            pos = pos[:, None]
        if pos.ndim != 2 or pos.shape[1] not in (1, 2):
            raise DataError("positions must be an (n, p) array with p in {1, 2}")
        if times.ndim != 1 or len(times) != len(pos):
            raise DataError("times and positions must have equal length")
        if len(times) < 2:
            raise DataError("a trajectory needs at least 2 points")
        if not np.all(np.diff(times) > 0):
            raise DataError("times must be strictly increasing")
        if self.quality is not None:
            quality = tuple(str(q) for q in self.quality)
            if len(quality) != len(times):
                raise DataError("quality labels must align with times")
            object.__setattr__(self, "quality", quality)
        times.flags.writeable = False
        pos.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "positions", pos)

    @property
    def dimension(self) -> int:
        return self.positions.shape[1]

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class Region:
    """Closed planar polygon; the last vertex connects back to the first.

    Membership uses even-odd ray casting. Boundary points count as inside,
    so simulated points landing exactly on the boundary are not rejected.
    """

    vertices: np.ndarray
    _area2: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        v = _finite_array(self.vertices, "vertices")
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise DataError("a region needs at least 3 planar vertices")
        area2 = float(
            np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1])
        )
        if area2 == 0.0:
            raise DataError("degenerate polygon: zero signed area")
        v.flags.writeable = False
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "_area2", area2)

    @property
    def counterclockwise(self) -> bool:
        return self._area2 > 0

    @property
    def area(self) -> float:
        return abs(self._area2) / 2.0

    def _edge_projections(self, pts: np.ndarray):
        """Per-edge nearest points for a batch of query points.

        Returns (proj, dist) with shapes (n, k, 2) and (n, k) for n query
        points and k edges.
        """
        a = self.vertices
        b = np.roll(a, -1, axis=0)
        ab = b - a
        denom = np.einsum("ij,ij->i", ab, ab)
        safe = np.where(denom > 0.0, denom, 1.0)
        ap = pts[:, None, :] - a[None, :, :]
        t = np.einsum("nij,ij->ni", ap, ab) / safe[None, :]
        t = np.where(denom[None, :] > 0.0, np.clip(t, 0.0, 1.0), 0.0)
        proj = a[None, :, :] + t[:, :, None] * ab[None, :, :]
        diff = pts[:, None, :] - proj
        dist = np.hypot(diff[:, :, 0], diff[:, :, 1])
        return proj, dist

    def distance(self, q) -> float:
        """Shortest Euclidean distance from q to the polygon boundary."""
        pts = np.asarray(q, dtype=float).reshape(1, 2)
        _, dist = self._edge_projections(pts)
        return float(dist.min())

    def distances(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        _, dist = self._edge_projections(pts)
        return dist.min(axis=1)

    def nearest_boundary_point(self, q) -> np.ndarray:
        """Nearest point on the boundary; ties go to the first edge in
        vertex order."""
        pts = np.asarray(q, dtype=float).reshape(1, 2)
        proj, dist = self._edge_projections(pts)
        return proj[0, int(np.argmin(dist[0]))]

    def nearest_boundary_points(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        proj, dist = self._edge_projections(pts)
        idx = np.argmin(dist, axis=1)
        return proj[np.arange(len(pts)), idx]

    def contains(self, q) -> bool:
        """Even-odd membership test; boundary points count as inside."""
        x = float(q[0])
        y = float(q[1])
        v = self.vertices
        ax, ay = v[:, 0], v[:, 1]
        bx, by = np.roll(ax, -1), np.roll(ay, -1)
        if self.distance((x, y)) <= 1e-12 * (1.0 + abs(x) + abs(y)):
            return True
        crosses = (ay > y) != (by > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_at_y = (bx - ax) * (y - ay) / (by - ay) + ax
        hits = crosses & (x < x_at_y)
        return bool(np.count_nonzero(hits) % 2)


def point_in_region(region: Region, q) -> bool:
    """True when q lies inside the region or on its boundary."""
    return region.contains(q)


def region_distance(region: Region, q) -> float:
    """Minimum Euclidean distance from q to any polygon edge; 0 on the
    boundary."""
    return region.distance(q)


class RngStream:
    """Deterministic random stream keyed by (seed, stream_id).

    The same key reproduces the same draw sequence on every platform.
    Distinct stream ids give independent streams, so replicate k of any
    randomized operation can own ``derive_rng(seed, k)`` and run in any
    order. A stream must not be shared between concurrent tasks; spawn one
    child per task instead.
    """

    def __init__(self, seed: int, stream_id: int = 0, _lineage: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._lineage = tuple(int(k) for k in _lineage)
        key = [self.seed & _MASK64, self.stream_id & _MASK64]
        key.extend(k & _MASK64 for k in self._lineage)
        self._gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))

    def __repr__(self):
        tail = f", lineage={self._lineage}" if self._lineage else ""
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}{tail})"

    def spawn(self, k: int) -> "RngStream":
        """Independent child stream k of this stream."""
        return RngStream(self.seed, self.stream_id, self._lineage + (int(k),))

    def standard_normal(self, size=None):
        return self._gen.standard_normal(size)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self._gen.normal(loc, scale, size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size)

    def poisson(self, lam, size=None):
        return self._gen.poisson(lam, size)

    def binomial(self, n, p, size=None):
        return self._gen.binomial(n, p, size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size)


def derive_rng(seed: int, stream_id: int = 0) -> RngStream:
    """Deterministic stream for (seed, stream_id)."""
    return RngStream(seed, stream_id)


def iter_csv_rows(path) -> Iterator[tuple[int, list[str]]]:
    """Yield (lineno, fields) for data lines of a CSV file.

    Blank lines and lines starting with ``#`` are skipped.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield lineno, [f.strip() for f in line.split(",")]


def _parse_float(text: str, lineno: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"line {lineno}: {column} is not a number: {text!r}") from None
    if not np.isfinite(value):
        raise ParseError(f"line {lineno}: {column} is non-finite: {text!r}")
    return value


_HEADERS = {
    ("t", "x"): (1, False),
    ("t", "x", "y"): (2, False),
    ("t", "x", "lc"): (1, True),
    ("t", "x", "y", "lc"): (2, True),
}


def load_trajectory(path, quality_filter: Iterable | None = None) -> Trajectory:
    """Read a trajectory CSV with header ``t,x[,y][,lc]``.

    When ``quality_filter`` is given, only rows whose lc label is in the
    set are kept. Satellite location classes 1, 2 and 3 predict a position
    error of 1 km or less, so pass {"1", "2", "3"} to keep those. Rows are
    sorted by time; duplicate timestamps are rejected.
    """
    rows = iter_csv_rows(path)
    try:
        lineno, header = next(rows)
    except StopIteration:
        raise DataError(f"{path}: empty file") from None
    key = tuple(h.lower() for h in header)
    if key not in _HEADERS:
        raise ParseError(f"line {lineno}: unrecognized header {header!r}")
    dim, has_lc = _HEADERS[key]
    n_fields = len(key)

    times: list[float] = []
    coords: list[list[float]] = []
    labels: list[str] = []
    for lineno, fields in rows:
        if len(fields) != n_fields:
            raise ParseError(
                f"line {lineno}: expected {n_fields} fields, got {len(fields)}"
            )
        t = _parse_float(fields[0], lineno, "t")
        xy = [_parse_float(fields[1 + j], lineno, "xy"[j]) for j in range(dim)]
        times.append(t)
        coords.append(xy)
        if has_lc:
            labels.append(fields[-1])

    if quality_filter is not None:
        if not has_lc:
            raise DataError(f"{path}: quality filter requested but no lc column")
        wanted = {str(v) for v in quality_filter}
        keep = [i for i, lab in enumerate(labels) if lab in wanted]
        times = [times[i] for i in keep]
        coords = [coords[i] for i in keep]
        labels = [labels[i] for i in keep]

    if len(times) < 2:
        raise DataError(f"{path}: fewer than 2 rows survive ingestion")

    order = np.argsort(np.asarray(times), kind="stable")
    t_arr = np.asarray(times)[order]
    p_arr = np.asarray(coords)[order]
    dup = np.flatnonzero(np.diff(t_arr) == 0)
    if dup.size:
        raise DataError(f"{path}: duplicate timestamp t={t_arr[dup[0]]!r}")
    quality = tuple(labels[i] for i in order) if has_lc else None
    return Trajectory(times=t_arr, positions=p_arr, quality=quality)


def write_trajectory(traj: Trajectory, path) -> None:
    """Serialize a trajectory in the core CSV format (round-trips exactly)."""
    dim = traj.dimension
    header = ["t", "x"] + (["y"] if dim == 2 else [])
    if traj.quality is not None:
        header.append("lc")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(len(traj)):
            fields = [repr(float(traj.times[i]))]
            fields += [repr(float(c)) for c in traj.positions[i]]
            if traj.quality is not None:
                fields.append(traj.quality[i])
            fh.write(",".join(fields) + "\n")


def load_region(path) -> Region:
    """Read a polygon CSV with header ``x,y`` (one vertex per row)."""
    rows = iter_csv_rows(path)
    try:
        lineno, header = next(rows)
    except StopIteration:
        raise DataError(f"{path}: empty file") from None
    if [h.lower() for h in header] != ["x", "y"]:
        raise ParseError(f"line {lineno}: expected header x,y, got {header!r}")
    verts = []
    for lineno, fields in rows:
        if len(fields) != 2:
            raise ParseError(f"line {lineno}: expected 2 fields, got {len(fields)}")
        verts.append(
            [_parse_float(fields[0], lineno, "x"), _parse_float(fields[1], lineno, "y")]
        )
    if len(verts) < 3:
        raise DataError(f"{path}: fewer than 3 vertices")
    return Region(vertices=np.asarray(verts))


def write_region(region: Region, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("x,y\n")
        for vx, vy in region.vertices:
            fh.write(f"{vx!r},{vy!r}\n")


def write_points(points, path, header: Sequence[str] = ("x", "y")) -> None:
    """Write a numeric array as CSV with the given header."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in arr:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
