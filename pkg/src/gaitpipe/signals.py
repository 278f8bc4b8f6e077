"""Cleaned track -> analysis-ready signal.

Coordinates are normalized by the patient's hip-neck distance so that the
camera distance drops out, optionally referenced to the hip midpoint so that
walking translation drops out too. Detection gaps are interpolated when
short, and a least-squares line is removed before any spectral analysis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cleaning import Track
from .errors import NoScaleError, TooShortError
from .pose import JOINT_L_HIP, JOINT_NECK, JOINT_R_HIP, Skeleton

REF_NONE = "none"
REF_HIP = "hip-midpoint"


@dataclass(frozen=True)
class PreprocessConfig:
    max_gap: int = 15       # longest gap (frames) bridged by interpolation
    min_len: int = 64       # shortest usable contiguous segment
    per_frame_scale: bool = False  # normalize each frame by its own hip-neck distance


@dataclass(frozen=True)
class ScaleEstimate:
    """Hip-neck pixel distance per frame plus the robust per-video scalar."""

    per_frame: np.ndarray       # NaN where undefined
    video_scale: float


@dataclass(frozen=True)
class Signal:
    """Finite, evenly sampled channel values in hip-neck units."""

    values: np.ndarray
    fps: float
    channel: str
    source_gaps: tuple[tuple[int, int], ...] = ()


def _hip_point(s: Skeleton) -> tuple[float, float] | None:
    r, l = s.joints[JOINT_R_HIP], s.joints[JOINT_L_HIP]
    if r.detected and l.detected:
        return (r.x + l.x) / 2.0, (r.y + l.y) / 2.0
    if r.detected:
        return r.x, r.y
    if l.detected:
        return l.x, l.y
    return None


def hip_neck_scale(track: Track) -> ScaleEstimate:
    """Per-frame neck-to-hip-midpoint distance; video scale is the median."""
    if not track.samples:
        raise NoScaleError("track has no samples")
    first, last = min(track.samples), max(track.samples)
    per_frame = np.full(last - first + 1, np.nan)
    for ordinal, skel in track.samples.items():
        neck = skel.joints[JOINT_NECK]
        hip = _hip_point(skel)
        if neck.detected and hip is not None:
            d = float(np.hypot(neck.x - hip[0], neck.y - hip[1]))
            if d > 0:
                per_frame[ordinal - first] = d
    defined = per_frame[np.isfinite(per_frame)]
    if defined.size == 0:
        raise NoScaleError("no frame has both neck and hip detected")
    return ScaleEstimate(per_frame=per_frame, video_scale=float(np.median(defined)))


def extract_channel(
    track: Track,
    joint: int,
    axis: str = "x",
    reference: str = REF_HIP,
    fps: float = 30.0,
    cfg: PreprocessConfig | None = None,
) -> Signal:
    """Raw normalized channel for one joint; gaps appear as NaN.

    Value per frame: joint coordinate, minus the hip-midpoint coordinate when
    reference is hip-midpoint, divided by the video scale. Multiplying every
    track coordinate by a constant leaves the output unchanged.
    """
    cfg = cfg or PreprocessConfig()
    if not 0 <= joint < 18:
        raise ValueError(f"joint index {joint} outside 0..17")
    if axis not in ("x", "y"):
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    scale = hip_neck_scale(track)
    first, last = min(track.samples), max(track.samples)
    values = np.full(last - first + 1, np.nan)
    for ordinal, skel in track.samples.items():
        p = skel.joints[joint]
        if not p.detected:
            continue
        v = p.x if axis == "x" else p.y
        if reference == REF_HIP:
            hip = _hip_point(skel)
            if hip is None:
                continue
            v -= hip[0] if axis == "x" else hip[1]
        elif reference != REF_NONE:
            raise ValueError(f"unknown reference {reference!r}")
        s = scale.per_frame[ordinal - first] if cfg.per_frame_scale else scale.video_scale
        if not np.isfinite(s) or s <= 0:
            continue
        values[ordinal - first] = v / s
    gaps = _nan_runs(values)
    return Signal(values=values, fps=fps, channel=f"j{joint:02d}-{axis}-{reference}", source_gaps=gaps)


def _nan_runs(values: np.ndarray) -> tuple[tuple[int, int], ...]:
    runs = []
    start = None
    for i, v in enumerate(values):
        if np.isnan(v):
            if start is None:
                start = i
        elif start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(values) - 1))
    return tuple(runs)


def signal_dump_csv(s: Signal) -> str:
    """Audit CSV for one processed signal: frame, value, interpolated flag."""
    from .textio import fmt_float

    filled = set()
    for a, b in s.source_gaps:
        filled.update(range(a, b + 1))
    lines = ["frame,value,interpolated"]
    lines += [
        f"{i},{fmt_float(v)},{int(i in filled)}" for i, v in enumerate(s.values)
    ]
    return "\n".join(lines) + "\n"


def fill_and_detrend(s: Signal, cfg: PreprocessConfig | None = None) -> Signal:
    """Interpolate short gaps, keep the longest clean segment, remove trend.

    Gaps longer than cfg.max_gap split the signal; only the longest surviving
    contiguous piece is analyzed. The best-fit line is subtracted, leaving a
    zero-mean signal.
    """
    cfg = cfg or PreprocessConfig()
    values = np.asarray(s.values, dtype=float).copy()
    n = values.size

    filled: list[tuple[int, int]] = []
    hard_breaks: list[tuple[int, int]] = []
    for start, end in _nan_runs(values):
        if start == 0 or end == n - 1 or end - start + 1 > cfg.max_gap:
            hard_breaks.append((start, end))
        else:
            left, right = start - 1, end + 1
            t = np.arange(start, end + 1)
            values[start : end + 1] = np.interp(t, [left, right], [values[left], values[right]])
            filled.append((start, end))

    # longest contiguous finite segment
    best_seg = (0, -1)
    pos = 0
    for start, end in hard_breaks + [(n, n)]:
        if start - pos > best_seg[1] - best_seg[0] + 1:
            best_seg = (pos, start - 1)
        pos = end + 1
    seg = values[best_seg[0] : best_seg[1] + 1]
    if seg.size < cfg.min_len:
        raise TooShortError(
            f"longest clean segment has {seg.size} samples, need {cfg.min_len}"
        )

    t = np.arange(seg.size, dtype=float)
    slope, intercept = np.polyfit(t, seg, 1)
    detrended = seg - (slope * t + intercept)
    offset = best_seg[0]
    kept = tuple(
        (a - offset, b - offset) for a, b in filled if best_seg[0] <= a and b <= best_seg[1]
    )
    return Signal(values=detrended, fps=s.fps, channel=s.channel, source_gaps=kept)
