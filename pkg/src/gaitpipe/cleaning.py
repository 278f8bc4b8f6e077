"""Assignment of per-frame skeleton entries to two persistent tracks.

Patient recordings show the same person from two camera positions composited
side by side, so a well-behaved frame holds exactly two entries: one in the
left half of the image, one in the right. Real frames also contain
companions, wall shadows detected as people, and frames where one view is
missing. The cleaner keeps a center-of-gravity (CoG) position per track and
assigns each frame's entries to tracks by minimum total CoG distance,
rejecting anything farther than a gating radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import NoInitFrameError
from .pose import Frame, FrameSequence, Skeleton

# Joints that move least relative to the body center: nose, neck, shoulders,
# hips, eyes, ears. Ankles/knees/wrists swing too much to anchor a track.
COG_JOINTS = (0, 1, 2, 5, 8, 11, 14, 15, 16, 17)

LEFT_VIEW = "left"
RIGHT_VIEW = "right"


@dataclass(frozen=True)
class CleanerConfig:
    """Tuning knobs for track association.

    gate_fraction: max CoG jump per frame, as a fraction of image width.
    cog_conf_min: joints below this confidence do not contribute to the CoG.
    ema_alpha: optional smoothing of the track position memory; None keeps
        the last assigned CoG verbatim.
    """

    gate_fraction: float = 0.15
    cog_conf_min: float = 0.1
    ema_alpha: float | None = None


@dataclass(frozen=True)
class CenterOfGravity:
    x: float
    y: float
    support: int

    def distance_to(self, other: "CenterOfGravity") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass
class Track:
    """One view's time series: frame ordinal -> assigned skeleton."""

    label: str
    samples: dict[int, Skeleton] = field(default_factory=dict)
    last_cog: CenterOfGravity | None = None
    gaps: list[tuple[int, int]] = field(default_factory=list)


@dataclass
class TrackPair:
    left: Track
    right: Track
    init_frame: int
    # per-frame count of entries rejected as companions/shadows
    rejected: dict[int, int] = field(default_factory=dict)

    @property
    def total_rejected(self) -> int:
        return sum(self.rejected.values())


@dataclass(frozen=True)
class FrameAssignment:
    """Outcome of associating one frame's entries with the two tracks."""

    frame_index: int
    left_entry: int | None
    right_entry: int | None
    rejected_entries: tuple[int, ...]


def center_of_gravity(s: Skeleton, c_min: float) -> CenterOfGravity | None:
    """Unweighted mean of the stable-joint subset; None if none qualify."""
    xs = ys = 0.0
    n = 0
    for j in COG_JOINTS:
        p = s.joints[j]
        if p.detected and p.c >= c_min:
            xs += p.x
            ys += p.y
            n += 1
    if n == 0:
        return None
    return CenterOfGravity(xs / n, ys / n, n)


def _mean_confidence(s: Skeleton, c_min: float) -> float:
    cs = [s.joints[j].c for j in COG_JOINTS if s.joints[j].detected and s.joints[j].c >= c_min]
    return sum(cs) / len(cs) if cs else 0.0


def initialize_tracks(seq: FrameSequence, cfg: CleanerConfig) -> TrackPair:
    """Seed the two tracks from the first frame with >= 2 resolvable entries.

    Seeds are the two entries with the largest CoG support (ties broken by
    higher mean confidence, then smaller entry index); the leftmost CoG
    becomes the left-view track.
    """
    for frame in seq.frames:
        cogs = [(i, center_of_gravity(e, cfg.cog_conf_min)) for i, e in enumerate(frame.entries)]
        cogs = [(i, c) for i, c in cogs if c is not None]
        if len(cogs) < 2:
            continue
        ranked = sorted(
            cogs,
            key=lambda ic: (-ic[1].support, -_mean_confidence(frame.entries[ic[0]], cfg.cog_conf_min), ic[0]),
        )
        (ia, ca), (ib, cb) = ranked[0], ranked[1]
        if ca.x > cb.x:
            (ia, ca), (ib, cb) = (ib, cb), (ia, ca)
        left = Track(LEFT_VIEW, {frame.index: frame.entries[ia]}, ca)
        right = Track(RIGHT_VIEW, {frame.index: frame.entries[ib]}, cb)
        pair = TrackPair(left, right, init_frame=frame.index)
        n_rej = len(frame.entries) - 2
        if n_rej:
            pair.rejected[frame.index] = n_rej
        return pair
    raise NoInitFrameError(
        "no frame with two resolvable entries; cannot separate the two views"
    )


def assign_frame(tracks: TrackPair, f: Frame, cfg: CleanerConfig, image_width: int) -> FrameAssignment:
    """Associate one frame's entries with the track pair, in place.

    All (entry -> track) pairings are scored by total Euclidean CoG distance;
    the feasible pairing assigning the most entries at minimum total distance
    wins. Pairings farther than gate_fraction * image_width are refused, so a
    too-distant frame leaves the track unassigned (a gap) rather than teleport
    it. Entries left over are counted as rejected (companions/shadows).
    """
    gate = cfg.gate_fraction * image_width
    cogs = [center_of_gravity(e, cfg.cog_conf_min) for e in f.entries]
    candidates = [i for i, c in enumerate(cogs) if c is not None]

    def dist(track: Track, i: int) -> float:
        return track.last_cog.distance_to(cogs[i])

    # Enumerate assignments (left_entry, right_entry) allowing None; small
    # entry counts make brute force exact and obviously optimal. Strict
    # comparison keeps the first minimal option, so ties resolve to the
    # smaller entry index (None sorts first in the option order).
    best: tuple[float, float, tuple[int | None, int | None]] | None = None
    options: list[int | None] = [None, *candidates]
    for li in options:
        for ri in options:
            if li is not None and li == ri:
                continue
            cost = 0.0
            n_assigned = 0
            feasible = True
            for track, idx in ((tracks.left, li), (tracks.right, ri)):
                if idx is None:
                    continue
                d = dist(track, idx)
                if d > gate:
                    feasible = False
                    break
                cost += d
                n_assigned += 1
            if not feasible:
                continue
            if best is None or (-n_assigned, cost) < (best[0], best[1]):
                best = (-n_assigned, cost, (li, ri))
    assert best is not None  # (None, None) is always feasible
    li, ri = best[2]

    for track, idx in ((tracks.left, li), (tracks.right, ri)):
        if idx is None:
            continue
        track.samples[f.index] = f.entries[idx]
        cog = cogs[idx]
        if cfg.ema_alpha is not None:
            a = cfg.ema_alpha
            cog = CenterOfGravity(
                a * cog.x + (1 - a) * track.last_cog.x,
                a * cog.y + (1 - a) * track.last_cog.y,
                cog.support,
            )
        track.last_cog = cog

    rejected = tuple(i for i in range(len(f.entries)) if i != li and i != ri)
    if rejected:
        tracks.rejected[f.index] = len(rejected)
    return FrameAssignment(f.index, li, ri, rejected)


def _coalesce_gaps(track: Track, start: int, end: int) -> None:
    gaps: list[tuple[int, int]] = []
    run_start: int | None = None
    for ordinal in range(start, end + 1):
        if ordinal in track.samples:
            if run_start is not None:
                gaps.append((run_start, ordinal - 1))
                run_start = None
        elif run_start is None:
            run_start = ordinal
    if run_start is not None:
        gaps.append((run_start, end))
    track.gaps = gaps


def clean_sequence(seq: FrameSequence, cfg: CleanerConfig | None = None) -> TrackPair:
    """Run initialization plus per-frame assignment over a whole sequence."""
    cfg = cfg or CleanerConfig()
    pair = initialize_tracks(seq, cfg)
    for frame in seq.frames:
        if frame.index <= pair.init_frame:
            continue
        assign_frame(pair, frame, cfg, seq.image_width)
    last = seq.frames[-1].index
    _coalesce_gaps(pair.left, pair.init_frame, last)
    _coalesce_gaps(pair.right, pair.init_frame, last)
    return pair


def cleaning_report_rows(pair: TrackPair, seq: FrameSequence) -> list[dict[str, int]]:
    """Per-frame audit rows: assignment and rejection flags for CSV export."""
    rows = []
    for frame in seq.frames:
        if frame.index < pair.init_frame:
            continue
        rows.append(
            {
                "frame": frame.index,
                "entries": len(frame.entries),
                "left_assigned": int(frame.index in pair.left.samples),
                "right_assigned": int(frame.index in pair.right.samples),
                "rejected": pair.rejected.get(frame.index, 0),
            }
        )
    return rows
