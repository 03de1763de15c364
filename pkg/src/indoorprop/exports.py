"""Text and image writers for paths, profiles, taps and coverage maps.

All numbers are written with fixed decimals through ``format`` so output is
locale independent and byte stable. Non-finite values print as ``inf`` or
``-inf``. Column precision:

=================  ==========
column             decimals
=================  ==========
length_m, x/y/z    6
delay_ns           6
gain_db, power_db  6
phase_rad          9
re, im             12 (e-notation, 12 significant)
covered_fraction   6
=================  ==========

PGM heatmap
-----------
Binary ``P5`` with header ``P5\\n<nx> <ny>\\n255\\n`` and one byte per cell,
row-major, first row = northernmost (largest y) cells, first column =
westernmost. Let ``lo = threshold_db - 40`` and ``hi`` the largest finite
power among interior cells (if ``hi <= lo`` every finite cell maps as if at
``hi``). An interior cell with power ``p`` gets ``1 + floor(254 * f + 0.5)``
where ``f = clip((p - lo) / (hi - lo), 0, 1)``; ``-inf`` maps to 1 and
``+inf`` (the transmitter cell) to 255. Cells outside the usable area are 0.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .channel import PowerDelayProfile, TappedDelayLine
from .coverage import CoverageMap, HoleRegion, PlacementResult


def fixed(x: float, decimals: int = 6) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = format(x, f".{decimals}f")
    if s.startswith("-") and float(s) == 0.0:
        s = s[1:]
    return s


def sci(x: float) -> str:
    x = float(x)
    if x == 0.0:
        return "0.00000000000e+00"
    return format(x, ".11e")


def paths_csv(paths) -> str:
    lines = ["index,n_reflections,n_transmissions,length_m,delay_ns,gain_db,phase_rad,interactions"]
    for k, p in enumerate(paths):
        lines.append(
            ",".join(
                [
                    str(k),
                    str(p.n_reflections),
                    str(p.n_transmissions),
                    fixed(p.length),
                    fixed(p.delay * 1e9),
                    fixed(p.gain_db),
                    fixed(cmath.phase(p.gain), 9),
                    p.summary,
                ]
            )
        )
    return "\n".join(lines) + "\n"


def pdp_csv(pdp: PowerDelayProfile) -> str:
    lines = [
        f"# first_arrival_ns={fixed(pdp.first_arrival * 1e9)}",
        f"# mean_toa_ns={fixed(pdp.mean_toa * 1e9)}",
        f"# rms_ds_ns={fixed(pdp.rms_delay_spread * 1e9)}",
        f"# total_power_db={fixed(pdp.total_power_db)}",
        "delay_ns,power_db",
    ]
    lines += [f"{fixed(t * 1e9)},{fixed(p)}" for t, p in zip(pdp.delays, pdp.power_db)]
    return "\n".join(lines) + "\n"


def read_pdp_header(text: str) -> dict[str, float]:
    out = {}
    for line in text.splitlines():
        if not line.startswith("#"):
            break
        key, _, value = line[1:].strip().partition("=")
        out[key] = float(value)
    return out


def tdl_csv(tdl: TappedDelayLine) -> str:
    lines = ["tap_index,delay_ns,re,im"]
    for k, (t, a) in enumerate(zip(tdl.delays, tdl.taps)):
        lines.append(f"{k},{fixed(t * 1e9)},{sci(a.real)},{sci(a.imag)}")
    return "\n".join(lines) + "\n"


def map_csv(cmap: CoverageMap) -> str:
    """Interior cells only, ordered by (i, j)."""
    holes = cmap.hole_mask
    lines = ["x_m,y_m,power_db,is_hole"]
    for i, j in zip(*np.nonzero(cmap.interior)):
        c = cmap.center(i, j)
        lines.append(f"{fixed(c.x)},{fixed(c.y)},{fixed(cmap.power_db[i, j])},{int(holes[i, j])}")
    return "\n".join(lines) + "\n"


def pgm_levels(cmap: CoverageMap) -> np.ndarray:
    """(ny, nx) uint8 image, north row first; see the module docstring."""
    p = cmap.power_db
    lo = cmap.threshold_db - 40.0
    finite = cmap.interior & np.isfinite(p)
    hi = float(p[finite].max()) if finite.any() else lo
    with np.errstate(invalid="ignore"):
        if hi > lo:
            frac = (p - lo) / (hi - lo)
        else:
            frac = np.where(p >= hi, 1.0, 0.0)
    frac = np.where(p == math.inf, 1.0, np.where(p == -math.inf, 0.0, frac))
    frac = np.clip(frac, 0.0, 1.0)
    levels = 1 + np.floor(254.0 * frac + 0.5).astype(np.int64)
    levels = np.where(cmap.interior, levels, 0).astype(np.uint8)
    return levels.T[::-1]


def pgm_bytes(cmap: CoverageMap) -> bytes:
    img = pgm_levels(cmap)
    header = f"P5\n{cmap.nx} {cmap.ny}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(img).tobytes()


def read_pgm(data: bytes) -> np.ndarray:
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5" or parts[2] != b"255":
        raise ValueError("not an 8-bit P5 image")
    w, h = (int(v) for v in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w)


def holes_csv(cmap: CoverageMap, holes: list[HoleRegion]) -> str:
    lines = ["region,cell_i,cell_j,x_m,y_m,region_area_m2"]
    for k, region in enumerate(holes, start=1):
        for i, j in region.cells:
            c = cmap.center(i, j)
            lines.append(f"{k},{i},{j},{fixed(c.x)},{fixed(c.y)},{fixed(region.area)}")
    return "\n".join(lines) + "\n"


def candidates_csv(result: PlacementResult) -> str:
    lines = ["x_m,y_m,z_m,covered_fraction,min_power_db,best"]
    for c in result.table:
        best = int(c.position == result.best_tx)
        x, y, z = c.position
        lines.append(f"{fixed(x)},{fixed(y)},{fixed(z)},{fixed(c.covered_fraction)},{fixed(c.min_power_db)},{best}")
    return "\n".join(lines) + "\n"
