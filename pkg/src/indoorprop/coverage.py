"""Receiver-grid coverage maps, hole detection and transmitter placement."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from .scene import EPS_HIT, Point3, Scene, as_point
from .tracer import ImageEngine, TraceConfig, TraceError, check_link

DEFAULT_THRESHOLD_DB = -90.0


class CoverageError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Square cells over the scene footprint, sampled at their centers.

    ``region`` optionally limits cells to a union of axis-aligned
    ``((x0, y0), (x1, y1))`` rectangles.
    """

    cell_size: float = 1.0
    height: float = 2.0
    region: Optional[tuple] = None

    def in_region(self, x: float, y: float) -> bool:
        if self.region is None:
            return True
        return any(x0 <= x <= x1 and y0 <= y <= y1 for (x0, y0), (x1, y1) in self.region)


@dataclass(frozen=True)
class Grid:
    origin: Point3
    cell_size: float
    nx: int
    ny: int
    height: float
    interior: np.ndarray  # (nx, ny) bool

    def center(self, i: int, j: int) -> Point3:
        return Point3(
            self.origin.x + (i + 0.5) * self.cell_size, self.origin.y + (j + 0.5) * self.cell_size, self.height
        )

    def interior_points(self) -> np.ndarray:
        ii, jj = np.nonzero(self.interior)
        return np.array([self.center(i, j) for i, j in zip(ii, jj)], dtype=float).reshape(-1, 3)


def make_grid(scene: Scene, spec: GridSpec) -> Grid:
    if not spec.cell_size > 0:
        raise CoverageError("cell_size must be positive")
    if not scene.is_bounded:
        raise CoverageError("coverage needs a bounded scene")
    lo, hi = scene.bounds
    if not lo.z < spec.height < hi.z:
        raise CoverageError(f"height {spec.height} m is outside the floor-to-ceiling range")
    nx = max(1, math.ceil((hi.x - lo.x) / spec.cell_size - 1e-9))
    ny = max(1, math.ceil((hi.y - lo.y) / spec.cell_size - 1e-9))
    origin = Point3(lo.x, lo.y, lo.z)
    interior = np.zeros((nx, ny), dtype=bool)
    grid = Grid(origin, spec.cell_size, nx, ny, spec.height, interior)
    for i in range(nx):
        for j in range(ny):
            c = grid.center(i, j)
            interior[i, j] = (
                scene.contains(c)
                and not scene.inside_solid(c)
                and not scene.on_surface(c)
                and spec.in_region(c.x, c.y)
            )
    if not interior.any():
        raise CoverageError("grid has no interior cells")
    return grid


@dataclass(frozen=True)
class CoverageMap:
    """Total received power per cell, dB relative to transmit power.

    Cells with no path (or outside the usable area) hold ``-inf``; a cell whose
    center coincides with the transmitter holds ``+inf``.
    """

    origin: Point3
    cell_size: float
    nx: int
    ny: int
    height: float
    power_db: np.ndarray
    interior: np.ndarray
    threshold_db: float
    tx: Point3

    @property
    def hole_mask(self) -> np.ndarray:
        return self.interior & (self.power_db < self.threshold_db)

    @property
    def covered_fraction(self) -> float:
        return float((self.interior & ~self.hole_mask).sum() / self.interior.sum())

    def center(self, i: int, j: int) -> Point3:
        return Point3(
            self.origin.x + (i + 0.5) * self.cell_size, self.origin.y + (j + 0.5) * self.cell_size, self.height
        )

    def with_threshold(self, threshold_db: float) -> "CoverageMap":
        return CoverageMap(
            self.origin, self.cell_size, self.nx, self.ny, self.height, self.power_db, self.interior, threshold_db, self.tx
        )


def _cell_powers(scene: Scene, tx: Point3, points: np.ndarray, config: TraceConfig) -> np.ndarray:
    engine = ImageEngine(scene, tx, config)
    batch = engine.evaluate(points)
    total = batch.total_power(len(points), config)
    with np.errstate(divide="ignore"):
        power_db = 10.0 * np.log10(total)
    at_tx = np.linalg.norm(points - np.asarray(tx), axis=1) <= EPS_HIT
    power_db[at_tx] = math.inf
    return power_db


def sweep(
    scene: Scene,
    tx,
    grid: GridSpec = GridSpec(),
    config: TraceConfig = TraceConfig(),
    threshold_db: float = DEFAULT_THRESHOLD_DB,
) -> CoverageMap:
    """Trace from ``tx`` to every interior cell center of the grid.

    A cell's power is the total power of its impulse response, i.e. the sum
    of |gain|^2 over the kept paths. The result is independent of evaluation
    order: cells are written back by index.
    """
    tx = as_point(tx)
    check_link(scene, tx)
    g = make_grid(scene, grid)
    power = np.full((g.nx, g.ny), -math.inf)
    ii, jj = np.nonzero(g.interior)
    power[ii, jj] = _cell_powers(scene, tx, g.interior_points(), config)
    return CoverageMap(g.origin, g.cell_size, g.nx, g.ny, g.height, power, g.interior.copy(), threshold_db, tx)


@dataclass(frozen=True)
class HoleRegion:
    cells: tuple[tuple[int, int], ...]
    area: float


def detect_holes(cmap: CoverageMap) -> list[HoleRegion]:
    """4-connected hole regions, largest first (ties by lowest first cell)."""
    labels, n = ndimage.label(cmap.hole_mask)
    regions = []
    for k in range(1, n + 1):
        ii, jj = np.nonzero(labels == k)
        cells = tuple(sorted(zip(ii.tolist(), jj.tolist())))
        regions.append(HoleRegion(cells, len(cells) * cmap.cell_size**2))
    regions.sort(key=lambda r: (-len(r.cells), r.cells[0]))
    return regions


@dataclass(frozen=True)
class Candidate:
    position: Point3
    covered_fraction: float
    min_power_db: float


@dataclass(frozen=True)
class PlacementResult:
    best_tx: Point3
    covered_fraction: float
    table: tuple[Candidate, ...]


def _rank_key(c: Candidate):
    return (-c.covered_fraction, -c.min_power_db, c.position.x, c.position.y)


def optimize_tx(
    scene: Scene,
    candidates: GridSpec,
    receivers: GridSpec = GridSpec(),
    config: TraceConfig = TraceConfig(),
    threshold_db: float = DEFAULT_THRESHOLD_DB,
) -> PlacementResult:
    """Exhaustive search over candidate transmitter cells.

    Candidates are ranked by covered fraction, then by the weakest covered
    cell's power (favoring the most central of equally covering spots), then
    by lowest x and y.
    """
    cand_grid = make_grid(scene, candidates)
    rx_grid = make_grid(scene, receivers)
    rx_points = rx_grid.interior_points()
    rows = []
    for i, j in zip(*np.nonzero(cand_grid.interior)):
        pos = cand_grid.center(i, j)
        power = _cell_powers(scene, pos, rx_points, config)
        covered = power >= threshold_db
        rows.append(Candidate(pos, float(covered.mean()), float(power.min())))
    best = min(rows, key=_rank_key)
    return PlacementResult(best.position, best.covered_fraction, tuple(rows))


def coverage_at(scene: Scene, tx, rx, config: TraceConfig = TraceConfig()) -> float:
    """Total received power in dB at a single point, as a sweep computes it."""
    tx, rx = as_point(tx), as_point(rx)
    check_link(scene, tx, rx)
    return float(_cell_powers(scene, tx, np.array([rx], dtype=float), config)[0])


__all__ = [
    "CoverageError",
    "CoverageMap",
    "DEFAULT_THRESHOLD_DB",
    "GridSpec",
    "HoleRegion",
    "PlacementResult",
    "TraceError",
    "coverage_at",
    "detect_holes",
    "make_grid",
    "optimize_tx",
    "sweep",
]
