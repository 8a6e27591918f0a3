"""
Spiral cam slot profile and its polar kinematics.

The slot is a piecewise cubic in Cartesian millimetres. Sampling it densely
and converting to polar form gives the table that maps the cam-wheel angular
offset to grouser height and back.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.optimize import minimize_scalar

from grouserlab.errors import ConfigurationError, DomainError, OffsetRangeError, RangeError

logger = logging.getLogger(__name__)

FULL_DEPLOYMENT_OFFSET_DEG = -64.5
MAX_GROUSER_HEIGHT_MM = 17.5
MIN_POLAR_SAMPLES = 64
INTERPOLATION_BUDGET_MM = 0.01
_OFFSET_EPS = 1e-12


class ProfileMode(str, Enum):
    """How the printed segment coefficients are combined."""

    AS_PRINTED = "as-printed"
    CONTINUITY_ENFORCED = "continuity-enforced"


@dataclass(frozen=True)
class SplineSegment:
    """One cubic piece ``y = a3 u^3 + a2 u^2 + a1 u + a0`` with ``u = x - b``."""

    a3: float
    a2: float
    a1: float
    a0: float
    b: float
    x_lo: float
    x_hi: float

    def __post_init__(self):
        if not math.isclose(self.x_lo, self.b, abs_tol=1e-12):
            raise ConfigurationError(f"segment left break {self.b} must equal interval start {self.x_lo}")
        if not self.x_hi > self.x_lo:
            raise ConfigurationError(f"empty segment interval [{self.x_lo}, {self.x_hi}]")

    def contains(self, x: float) -> bool:
        return self.x_lo <= x <= self.x_hi

    def evaluate(self, x: float) -> float:
        if not self.contains(x):
            raise RangeError(f"x={x} mm outside segment [{self.x_lo}, {self.x_hi}]")
        u = x - self.b
        return ((self.a3 * u + self.a2) * u + self.a1) * u + self.a0

    def evaluate_many(self, x: np.ndarray) -> np.ndarray:
        u = np.asarray(x, dtype=float) - self.b
        return ((self.a3 * u + self.a2) * u + self.a1) * u + self.a0

    def slope(self, x: float) -> float:
        u = x - self.b
        return (3.0 * self.a3 * u + 2.0 * self.a2) * u + self.a1


# Cam slot coefficients as printed (two pieces through three interpolation points).
PRINTED_SEGMENTS: Tuple[SplineSegment, ...] = (
    SplineSegment(a3=-1.49455e-4, a2=5.10785e-3, a1=-1.63208e-2, a0=19.0, b=0.0, x_lo=0.0, x_hi=17.1),
    SplineSegment(a3=1.42438e-4, a2=-9.69534e-3, a1=-1.16216e-1, a0=23.5, b=17.1, x_lo=17.1, x_hi=32.94),
)


@dataclass(frozen=True)
class JunctionMismatch:
    """C0 gap between two neighbouring segments at their shared break."""

    x_mm: float
    left_mm: float
    right_mm: float

    @property
    def gap_mm(self) -> float:
        return self.right_mm - self.left_mm


@dataclass(frozen=True)
class CamProfile:
    """Ordered, contiguous spline segments describing the cam slot."""

    segments: Tuple[SplineSegment, ...]
    junction_tolerance_mm: float = 1e-6
    mode: ProfileMode = ProfileMode.AS_PRINTED

    def __post_init__(self):
        if not self.segments:
            raise ConfigurationError("a cam profile needs at least one segment")
        for left, right in zip(self.segments, self.segments[1:]):
            if not math.isclose(left.x_hi, right.x_lo, abs_tol=1e-12):
                raise ConfigurationError(
                    f"segments not contiguous: {left.x_hi} mm followed by {right.x_lo} mm"
                )

    @property
    def x_min(self) -> float:
        return self.segments[0].x_lo

    @property
    def x_max(self) -> float:
        return self.segments[-1].x_hi

    def segment_for(self, x: float) -> SplineSegment:
        """Segment owning ``x``; a shared break belongs to the later segment."""
        if not self.x_min <= x <= self.x_max:
            raise RangeError(f"x={x} mm outside cam profile [{self.x_min}, {self.x_max}]")
        for segment in reversed(self.segments):
            if x >= segment.x_lo:
                return segment
        return self.segments[0]

    def evaluate(self, x: float) -> float:
        return self.segment_for(x).evaluate(x)

    def junction_mismatches(self) -> List[JunctionMismatch]:
        """Breaks where the left and right pieces disagree beyond tolerance."""
        mismatches = []
        for left, right in zip(self.segments, self.segments[1:]):
            x = right.x_lo
            mismatch = JunctionMismatch(x_mm=x, left_mm=left.evaluate(x), right_mm=right.evaluate(x))
            if abs(mismatch.gap_mm) > self.junction_tolerance_mm:
                mismatches.append(mismatch)
        return mismatches


def build_profile(
    segments: Sequence[SplineSegment] = PRINTED_SEGMENTS,
    mode: Union[ProfileMode, str] = ProfileMode.AS_PRINTED,
    junction_tolerance_mm: float = 1e-6,
) -> CamProfile:
    """
    Assemble a cam profile and surface junction mismatches.

    Args:
        segments: Ordered spline pieces
        mode: ``as-printed`` evaluates each piece independently;
            ``continuity-enforced`` shifts each later ``a0`` onto the previous
            piece's value at the shared break
        junction_tolerance_mm: Gap below which a junction counts as continuous

    Returns:
        The assembled CamProfile
    """
    mode = ProfileMode(mode)
    pieces = list(segments)

    printed = CamProfile(tuple(pieces), junction_tolerance_mm, ProfileMode.AS_PRINTED)
    for mismatch in printed.junction_mismatches():
        logger.warning(
            "cam slot junction at x=%.3f mm is discontinuous: left piece %.4f mm, right piece %.4f mm (gap %.4f mm)",
            mismatch.x_mm,
            mismatch.left_mm,
            mismatch.right_mm,
            mismatch.gap_mm,
        )

    if mode is ProfileMode.CONTINUITY_ENFORCED:
        for i in range(1, len(pieces)):
            junction = pieces[i - 1].evaluate(pieces[i].x_lo)
            pieces[i] = replace(pieces[i], a0=junction)

    return CamProfile(tuple(pieces), junction_tolerance_mm, mode)


def eval_spline(profile: CamProfile, x: float) -> float:
    """Slot ordinate ``y(x)`` in millimetres."""
    return profile.evaluate(x)


@dataclass(frozen=True, eq=False)
class PolarTable:
    """
    Dense polar samples of the cam slot.

    ``offset_rad`` runs from 0 to ``-span_rad`` (strictly decreasing) while
    ``h_mm`` runs from 0 to ``max_height_mm`` (strictly increasing).
    ``theta_rad`` and ``r_mm`` keep the raw polar coordinates of each sample.
    ``junction_offsets_rad`` holds the offset where each later profile piece
    begins, after any bridge across a discontinuous junction.
    """

    offset_rad: np.ndarray
    h_mm: np.ndarray
    theta_rad: np.ndarray
    r_mm: np.ndarray
    x_mm: np.ndarray
    span_rad: float
    max_height_mm: float
    mode: ProfileMode
    dwell_end_mm: float
    junction_offsets_rad: Tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        for name in ("offset_rad", "h_mm", "theta_rad", "r_mm", "x_mm"):
            getattr(self, name).flags.writeable = False

    def __len__(self) -> int:
        return len(self.offset_rad)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "theta_rad": self.theta_rad,
                "r_mm": self.r_mm,
                "h_mm": self.h_mm,
                "offset_rad": self.offset_rad,
            }
        )

    def to_csv(self, path: Union[str, Path]) -> Path:
        """Write ``theta_rad, r_mm, h_mm, offset_rad`` rows for plotting."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.9g")
        return path


def _dwell_end(segment: SplineSegment) -> float:
    """Abscissa of minimum slot radius on the first piece."""
    result = minimize_scalar(
        lambda x: math.hypot(x, segment.evaluate(x)),
        bounds=(segment.x_lo, segment.x_hi),
        method="bounded",
        options={"xatol": 1e-9},
    )
    x_start = float(result.x)
    r_start = math.hypot(x_start, segment.evaluate(x_start))
    r_lo = math.hypot(segment.x_lo, segment.evaluate(segment.x_lo))
    if r_lo <= r_start:
        return segment.x_lo
    return x_start


def _allocate(n: int, lengths: Sequence[float]) -> List[int]:
    total = sum(lengths)
    counts = [max(2, int(round(n * length / total))) for length in lengths]
    counts[-1] = max(2, n - sum(counts[:-1]))
    return counts


def sample_polar(
    profile: CamProfile,
    n: int = 4096,
    span_deg: float = FULL_DEPLOYMENT_OFFSET_DEG,
    max_height_mm: float = MAX_GROUSER_HEIGHT_MM,
) -> PolarTable:
    """
    Sample the slot densely and convert each point to polar coordinates.

    Height is anchored at the endpoints: 0 mm at zero offset and
    ``max_height_mm`` at ``span_deg`` offset. The offset axis is the polar
    angle swept along the slot. A discontinuous junction is bridged by the
    size of its polar-angle jump, and height is linear across the bridge.

    Args:
        profile: Cam profile to sample
        n: Total number of samples
        span_deg: Offset at full deployment (negative, degrees)
        max_height_mm: Height at full deployment

    Returns:
        PolarTable ordered from zero offset to full deployment
    """
    if n < MIN_POLAR_SAMPLES:
        raise ConfigurationError(f"polar table needs at least {MIN_POLAR_SAMPLES} samples, got {n}")
    span_rad = abs(math.radians(span_deg))
    if span_rad == 0.0 or max_height_mm <= 0.0:
        raise ConfigurationError("offset span and maximum height must be non-zero")

    first = profile.segments[0]
    x_start = _dwell_end(first)
    if x_start > first.x_lo:
        logger.warning(
            "slot radius decreases over x in [%.3f, %.4f] mm; polar table starts at the radius minimum",
            first.x_lo,
            x_start,
        )

    bounds = [(x_start, first.x_hi)] + [(s.x_lo, s.x_hi) for s in profile.segments[1:]]
    counts = _allocate(n, [hi - lo for lo, hi in bounds])

    layout, total = _sweep_layout(profile, bounds)

    xs, thetas, radii, sweeps = [], [], [], []
    for i, (segment, (lo, hi), m, (start, bridged)) in enumerate(zip(profile.segments, bounds, counts, layout)):
        if i == 0 or bridged:
            x = np.linspace(lo, hi, m)
        else:
            x = np.linspace(lo, hi, m + 1)[1:]
        y = segment.evaluate_many(x)
        theta = np.arctan2(y, x)
        theta_lo = math.atan2(segment.evaluate(lo), lo)
        xs.append(x)
        thetas.append(theta)
        radii.append(np.hypot(x, y))
        sweeps.append(start + (theta_lo - theta))

    x_all = np.concatenate(xs)
    theta_all = np.concatenate(thetas)
    r_all = np.concatenate(radii)
    sweep = np.concatenate(sweeps)

    scale = span_rad / total
    offset = -sweep * scale
    offset[0] = 0.0
    offset[-1] = -span_rad
    h = max_height_mm * (r_all - r_all[0]) / (r_all[-1] - r_all[0])
    h[0] = 0.0
    h[-1] = max_height_mm

    if not (np.all(np.diff(offset) < 0.0) and np.all(np.diff(h) > 0.0)):
        raise ConfigurationError("cam profile does not give a monotone offset-to-height map")

    table = PolarTable(
        offset_rad=offset,
        h_mm=h,
        theta_rad=theta_all,
        r_mm=r_all,
        x_mm=x_all,
        span_rad=span_rad,
        max_height_mm=max_height_mm,
        mode=profile.mode,
        dwell_end_mm=x_start,
        junction_offsets_rad=tuple(-start * scale for start, _ in layout[1:]),
    )

    error = _interpolation_error(profile, table, bounds, counts, layout, scale)
    if error > INTERPOLATION_BUDGET_MM:
        raise ConfigurationError(
            f"{n} samples give {error:.4f} mm interpolation error, budget is {INTERPOLATION_BUDGET_MM} mm"
        )
    logger.debug("polar table: %d samples, max interpolation error %.2e mm", n, error)
    return table


def _sweep_layout(profile: CamProfile, bounds) -> Tuple[List[Tuple[float, bool]], float]:
    """
    Sweep at the start of each piece, whether that piece opens with a bridge,
    and the total sweep.
    """
    layout = []
    base = 0.0
    theta_prev = 0.0
    for i, (segment, (lo, hi)) in enumerate(zip(profile.segments, bounds)):
        theta_lo = math.atan2(segment.evaluate(lo), lo)
        bridged = False
        if i > 0:
            gap = segment.evaluate(lo) - profile.segments[i - 1].evaluate(lo)
            bridged = abs(gap) > profile.junction_tolerance_mm
            if bridged:
                base += abs(theta_lo - theta_prev)
        layout.append((base, bridged))
        theta_prev = math.atan2(segment.evaluate(hi), hi)
        base += theta_lo - theta_prev
    return layout, base


def _interpolation_error(profile, table, bounds, counts, layout, scale) -> float:
    """Largest gap between the table and exact midpoints of its own intervals."""
    worst = 0.0
    start = 0
    r0, r1 = table.r_mm[0], table.r_mm[-1]
    for segment, (lo, hi), m, (base, _) in zip(profile.segments, bounds, counts, layout):
        x = table.x_mm[start : start + m]
        start += m
        mid = 0.5 * (x[1:] + x[:-1])
        y = segment.evaluate_many(mid)
        theta_lo = math.atan2(segment.evaluate(lo), lo)
        offset = -(base + theta_lo - np.arctan2(y, mid)) * scale
        exact = table.max_height_mm * (np.hypot(mid, y) - r0) / (r1 - r0)
        approx = np.interp(-offset, -table.offset_rad, table.h_mm)
        if len(mid):
            worst = max(worst, float(np.max(np.abs(approx - exact))))
    return worst


def height_from_offset(table: PolarTable, delta_theta: float) -> float:
    """
    Grouser height for a cam-wheel offset.

    Args:
        table: Polar table of the cam
        delta_theta: Offset in radians, within ``[-span, 0]``

    Returns:
        Height in millimetres, clamped to ``[0, max_height]``
    """
    if not math.isfinite(delta_theta):
        raise DomainError(f"offset must be finite, got {delta_theta}")
    if delta_theta > _OFFSET_EPS or delta_theta < -table.span_rad - _OFFSET_EPS:
        raise OffsetRangeError(
            f"offset {math.degrees(delta_theta):.4f} deg outside [{-math.degrees(table.span_rad):.1f}, 0] deg"
        )
    h = float(np.interp(-delta_theta, -table.offset_rad, table.h_mm))
    return min(max(h, 0.0), table.max_height_mm)


def offset_from_height(table: PolarTable, h: float) -> float:
    """Cam-wheel offset (radians, non-positive) that deploys grousers to ``h`` mm."""
    if not math.isfinite(h) or not 0.0 <= h <= table.max_height_mm:
        raise RangeError(f"height {h} mm outside [0, {table.max_height_mm}] mm")
    return -float(np.interp(h, table.h_mm, -table.offset_rad))


def local_slope(table: PolarTable, delta_theta: float) -> float:
    """|dh/d(offset)| in mm per radian around ``delta_theta``."""
    index = int(np.clip(np.searchsorted(-table.offset_rad, -delta_theta), 1, len(table) - 1))
    dh = table.h_mm[index] - table.h_mm[index - 1]
    doff = table.offset_rad[index - 1] - table.offset_rad[index]
    return float(dh / doff)
