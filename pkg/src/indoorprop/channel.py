"""From traced paths to CIR, power delay profile, ToA checks and TDL taps."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .materials import SPEED_OF_LIGHT
from .scene import Scene, as_point
from .tracer import PropagationPath, TraceConfig, TraceError, trace


class ChannelError(ValueError):
    pass


@dataclass(frozen=True)
class ChannelImpulseResponse:
    delays: np.ndarray  # seconds, ascending
    amplitudes: np.ndarray  # complex, dimensionless
    frequency: float = 1e9
    tx_id: str = "tx"
    rx_id: str = "rx"

    def __len__(self):
        return len(self.delays)

    @property
    def taps(self) -> list[tuple[float, complex]]:
        return list(zip(self.delays.tolist(), self.amplitudes.tolist()))

    @property
    def total_power(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


@dataclass(frozen=True)
class PowerDelayProfile:
    delays: np.ndarray
    power_db: np.ndarray
    first_arrival: float
    mean_toa: float
    rms_delay_spread: float
    total_power_db: float

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.delays.tolist(), self.power_db.tolist()))


@dataclass(frozen=True)
class TappedDelayLine:
    tap_spacing: float
    taps: np.ndarray

    @property
    def delays(self) -> np.ndarray:
        return np.arange(len(self.taps)) * self.tap_spacing

    @property
    def total_power(self) -> float:
        return float(np.sum(np.abs(self.taps) ** 2))


def build_cir(paths: list[PropagationPath], frequency: float = 1e9, tx_id: str = "tx", rx_id: str = "rx"):
    """One tap per path, ordered by delay (stable for equal delays)."""
    order = sorted(range(len(paths)), key=lambda i: paths[i].delay)
    delays = np.array([paths[i].delay for i in order], dtype=float)
    amps = np.array([paths[i].gain for i in order], dtype=complex)
    return ChannelImpulseResponse(delays, amps, frequency, tx_id, rx_id)


def build_pdp(cir: ChannelImpulseResponse) -> PowerDelayProfile:
    """Per-tap power and the power-weighted delay moments.

    The mean time of arrival is the power-weighted mean delay referenced to
    zero (not to the first arrival).
    """
    if len(cir) == 0:
        raise ChannelError("empty impulse response: no coverage")
    power = np.abs(cir.amplitudes) ** 2
    total = power.sum()
    if not total > 0:
        raise ChannelError("impulse response carries no power")
    tau = cir.delays
    with np.errstate(divide="ignore"):
        power_db = 10.0 * np.log10(power)
    first = float(tau.min())
    # moments about the first arrival; the second is taken about the mean,
    # since E[t^2] - E[t]^2 cancels badly when one path dominates
    excess = tau - first
    mean_excess = float(np.sum(power * excess) / total)
    rms = math.sqrt(float(np.sum(power * (excess - mean_excess) ** 2) / total))
    mean = first + mean_excess
    return PowerDelayProfile(tau.copy(), power_db, first, max(mean, first), rms, 10.0 * math.log10(total))


@dataclass(frozen=True)
class ToAReport:
    geometric_distance_m: float
    first_arrival_ns: float
    estimated_distance_m: float
    relative_error: float
    mean_toa_ns: float
    los: bool


def verify_toa(scene: Scene, tx, rx, config: TraceConfig = TraceConfig()) -> ToAReport:
    """Check the first-arrival delay against the straight-line distance.

    ``los`` is true when an unobstructed direct path (no reflections, no
    transmissions) is among the traced paths.
    """
    tx, rx = as_point(tx), as_point(rx)
    paths = trace(scene, tx, rx, config)
    if not paths:
        raise TraceError("no propagation paths between tx and rx")
    pdp = build_pdp(build_cir(paths, config.frequency))
    geometric = float(np.linalg.norm(np.subtract(rx, tx)))
    estimated = pdp.first_arrival * SPEED_OF_LIGHT
    los = any(p.n_reflections == 0 and p.n_transmissions == 0 for p in paths)
    return ToAReport(
        geometric_distance_m=geometric,
        first_arrival_ns=pdp.first_arrival * 1e9,
        estimated_distance_m=estimated,
        relative_error=abs(estimated - geometric) / geometric,
        mean_toa_ns=pdp.mean_toa * 1e9,
        los=los,
    )


@dataclass(frozen=True)
class ComparisonRow:
    reflections: tuple[str, ...]
    length_m: float
    power_db_before: float
    power_db_after: float

    @property
    def delta_db(self) -> float:
        return self.power_db_after - self.power_db_before


def compare_materials(scene: Scene, tx, rx, config: TraceConfig, material_swap: dict) -> list[ComparisonRow]:
    """Trace before and after rebinding materials and pair the paths.

    Paths are matched by their reflection-surface sequence, which fixes the
    geometry; a path present on one side only reports ``-inf`` on the other.
    Rows keep the order of the original trace, followed by paths that only
    appear after the swap.
    """
    swapped = scene.swap_materials(material_swap)
    before = trace(scene, tx, rx, config)
    after = trace(swapped, tx, rx, config)
    after_by_key = {p.reflection_sequence: p for p in after}
    rows = []
    for p in before:
        q = after_by_key.pop(p.reflection_sequence, None)
        rows.append(
            ComparisonRow(p.reflection_sequence, p.length, p.gain_db, q.gain_db if q else -math.inf)
        )
    for q in after:
        if q.reflection_sequence in after_by_key:
            rows.append(ComparisonRow(q.reflection_sequence, q.length, -math.inf, q.gain_db))
    return rows


def tap_index(delay: float, tap_spacing: float) -> int:
    """Bin index ``floor(delay / spacing)``; delays within 1e-9 relative of a
    bin edge are placed in the upper bin so exact multiples are not lost to
    rounding."""
    x = delay / tap_spacing
    k = math.floor(x)
    if (k + 1) - x <= 1e-9 * max(x, 1.0):
        k += 1
    return k


def build_tdl(cir: ChannelImpulseResponse, tap_spacing: float) -> TappedDelayLine:
    """Coherently bin the CIR onto a uniform delay grid starting at zero."""
    if not tap_spacing > 0:
        raise ChannelError("tap_spacing must be positive")
    if len(cir) == 0:
        raise ChannelError("empty impulse response")
    idx = np.array([tap_index(t, tap_spacing) for t in cir.delays], dtype=int)
    taps = np.zeros(idx.max() + 1, dtype=complex)
    np.add.at(taps, idx, cir.amplitudes)
    return TappedDelayLine(tap_spacing, taps)
