"""Synthetic gait scenes and datasets with known ground truth.

The clinical recordings behind this pipeline are private, so every
quantitative test runs against this generator instead: a kinematic stick
body whose ankles swing as a two-harmonic sinusoid (stride-frequency
fundamental plus a weaker step-frequency harmonic), translated across the
image and corrupted with seeded Gaussian pixel noise. The generator reports
the exact spectral band its construction must dominate, which is what the
feature extractor is tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cleaning import RIGHT_VIEW, Track, TrackPair
from .errors import NyquistViolationError
from .pose import Frame, FrameSequence, JointPoint, Skeleton
from .spectral import FeatureVector, SpectralConfig, band_index_of, track_features

# joint layout offsets in hip-neck units: (dx, dy) from the neck, y down
_BODY_OFFSETS = {
    0: (0.0, -0.25),    # nose
    1: (0.0, 0.0),      # neck
    2: (-0.20, 0.05),   # shoulders
    5: (0.20, 0.05),
    3: (-0.25, 0.45),   # elbows
    6: (0.25, 0.45),
    4: (-0.27, 0.80),   # wrists
    7: (0.27, 0.80),
    8: (-0.15, 1.0),    # hips
    11: (0.15, 1.0),
    9: (-0.15, 1.5),    # knees
    12: (0.15, 1.5),
    14: (-0.05, -0.30),  # eyes
    15: (0.05, -0.30),
    16: (-0.10, -0.28),  # ears
    17: (0.10, -0.28),
}
_ANKLE_Y = 2.0
_R_ANKLE, _L_ANKLE = 10, 13

STEP_HARMONIC_RATIO = 0.3  # step-frequency amplitude relative to the stride fundamental


@dataclass(frozen=True)
class GaitParams:
    """Walking parameters; step_length and speed are in hip-neck units."""

    cadence: float = 110.0          # steps per minute
    step_length: float = 0.7
    speed: float | None = None      # derived as step_length * cadence / 60 when None
    phase: float = 0.0
    noise_sigma: float = 0.0        # pixels
    duration_s: float = 16.0
    fps: float = 32.0

    @property
    def step_hz(self) -> float:
        return self.cadence / 60.0

    @property
    def stride_hz(self) -> float:
        return self.step_hz / 2.0

    @property
    def speed_value(self) -> float:
        return self.speed if self.speed is not None else self.step_length * self.step_hz

    def validate(self) -> None:
        if self.cadence <= 0 or self.fps <= 0 or self.duration_s <= 0:
            raise ValueError("cadence, fps, and duration must be positive")
        if self.fps <= 2.0 * self.step_hz * 3.0:
            raise NyquistViolationError(
                f"fps {self.fps} cannot carry 3 harmonics of the {self.step_hz:.3g} Hz step rate"
            )


@dataclass(frozen=True)
class GaitTruth:
    """What the generator knows exactly about the track it emitted."""

    cadence: float
    step_length: float
    speed: float
    stride_hz: float
    step_hz: float
    scale_px: float
    dominant_band: int


def _ankle_offsets(p: GaitParams, t: float, scale_px: float) -> tuple[float, float]:
    """Fore-aft ankle excursion in pixels for (right, left) at time t."""
    a1 = 0.5 * p.step_length * scale_px
    a2 = STEP_HARMONIC_RATIO * a1
    w = 2.0 * math.pi * p.stride_hz
    common = a2 * math.sin(2.0 * w * t + 2.0 * p.phase)
    right = a1 * math.sin(w * t + p.phase) + common
    left = a1 * math.sin(w * t + p.phase + math.pi) + common
    return right, left


def make_skeleton(
    neck_x: float,
    neck_y: float,
    scale_px: float,
    ankle_dx: tuple[float, float],
    confidence: float = 0.9,
    mirror: bool = False,
    noise: np.ndarray | None = None,
) -> Skeleton:
    """Stick body with a guaranteed neck-to-hip-midpoint distance of scale_px."""
    sign = -1.0 if mirror else 1.0
    joints: list[JointPoint] = [JointPoint(0.0, 0.0, 0.0)] * 18
    for j, (dx, dy) in _BODY_OFFSETS.items():
        joints[j] = JointPoint(neck_x + sign * dx * scale_px, neck_y + dy * scale_px, confidence)
    hip_r_x, hip_l_x = joints[8].x, joints[11].x
    joints[_R_ANKLE] = JointPoint(hip_r_x + sign * ankle_dx[0], neck_y + _ANKLE_Y * scale_px, confidence)
    joints[_L_ANKLE] = JointPoint(hip_l_x + sign * ankle_dx[1], neck_y + _ANKLE_Y * scale_px, confidence)
    if noise is not None:
        joints = [
            JointPoint(pt.x + noise[j, 0], pt.y + noise[j, 1], pt.c)
            for j, pt in enumerate(joints)
        ]
    return Skeleton(tuple(joints))


def generate_gait_track(
    p: GaitParams,
    seed: int = 0,
    edges: tuple[float, ...] | None = None,
    scale_px: float = 100.0,
    start_x: float = 150.0,
    start_y: float = 120.0,
) -> tuple[Track, GaitTruth]:
    """One clean single-view walking track plus its exact ground truth."""
    p.validate()
    edges = edges or SpectralConfig().band_edges
    rng = np.random.default_rng(seed)
    n_frames = int(round(p.duration_s * p.fps))
    speed_px = p.speed_value * scale_px
    samples = {}
    for i in range(n_frames):
        t = i / p.fps
        noise = rng.normal(0.0, p.noise_sigma, size=(18, 2)) if p.noise_sigma > 0 else None
        samples[i] = make_skeleton(
            neck_x=start_x + speed_px * t,
            neck_y=start_y,
            scale_px=scale_px,
            ankle_dx=_ankle_offsets(p, t, scale_px),
            noise=noise,
        )
    truth = GaitTruth(
        cadence=p.cadence,
        step_length=p.step_length,
        speed=p.speed_value,
        stride_hz=p.stride_hz,
        step_hz=p.step_hz,
        scale_px=scale_px,
        dominant_band=band_index_of(p.stride_hz, tuple(edges)),
    )
    return Track(label=RIGHT_VIEW, samples=samples), truth


def scale_track(track: Track, factor: float) -> Track:
    """Multiply every coordinate, as if the camera moved closer or farther."""
    scaled = {
        ordinal: Skeleton(
            tuple(JointPoint(pt.x * factor, pt.y * factor, pt.c) for pt in skel.joints)
        )
        for ordinal, skel in track.samples.items()
    }
    return Track(label=track.label, samples=scaled, last_cog=track.last_cog, gaps=list(track.gaps))


# --- multi-actor scenes for the cleaner -----------------------------------

@dataclass(frozen=True)
class ActorSpec:
    """One person-shaped thing in the scene.

    Trajectories are linear in image fractions; gait parameters add ankle
    oscillation for the walking actors. Shadows are not specified directly:
    a shadow actor mirrors the first patient-lateral actor at an offset.
    """

    kind: str                       # patient-lateral | patient-frontal | companion | shadow
    x_path: tuple[float, float] = (0.2, 0.2)   # start/end, fraction of width
    y_frac: float = 0.3
    scale_px: float = 95.0
    confidence: float = 0.9
    gait: GaitParams | None = None
    enter: int = 0
    exit: int | None = None
    occlusions: tuple[tuple[int, int], ...] = ()
    shadow_offset: tuple[float, float] = (0.22, 0.02)  # fractions of (W, H)


@dataclass(frozen=True)
class SceneSpec:
    actors: tuple[ActorSpec, ...]
    n_frames: int = 600
    fps: float = 30.0
    image_width: int = 640
    image_height: int = 480
    seed: int = 0

    def __post_init__(self) -> None:
        if not any(a.kind.startswith("patient") for a in self.actors):
            raise ValueError("scene needs at least one patient actor")


def default_scene(seed: int = 0, n_frames: int = 600) -> SceneSpec:
    """The standard hard scene: both patient views, a wall shadow of the
    lateral view, and a companion that crosses the lateral patient once;
    the frontal view drops out for 100 frames mid-video."""
    walk = GaitParams(cadence=112.0, step_length=0.65, noise_sigma=1.0,
                      duration_s=n_frames / 30.0, fps=30.0)
    sway = GaitParams(cadence=100.0, step_length=0.12, speed=0.0, noise_sigma=1.0,
                      duration_s=n_frames / 30.0, fps=30.0)
    return SceneSpec(
        actors=(
            ActorSpec("patient-lateral", x_path=(0.10, 0.28), y_frac=0.25, gait=walk),
            ActorSpec("patient-frontal", x_path=(0.78, 0.82), y_frac=0.28, gait=sway,
                      occlusions=((100, 200),)),
            ActorSpec("shadow", confidence=0.6),
            ActorSpec("companion", x_path=(0.42, 0.02), y_frac=0.40, confidence=0.85,
                      gait=GaitParams(cadence=95.0, step_length=0.5, noise_sigma=1.0,
                                      duration_s=n_frames / 30.0, fps=30.0),
                      enter=150, exit=480),
        ),
        n_frames=n_frames,
        seed=seed,
    )


def _occluded(actor: ActorSpec, frame: int) -> bool:
    if frame < actor.enter or (actor.exit is not None and frame >= actor.exit):
        return True
    return any(a <= frame <= b for a, b in actor.occlusions)


def generate_scene(spec: SceneSpec) -> tuple[FrameSequence, dict[int, tuple[str, ...]]]:
    """Frames with shuffled entries plus the actor label behind each entry."""
    rng = np.random.default_rng(spec.seed)
    w, h = spec.image_width, spec.image_height
    lateral = next((a for a in spec.actors if a.kind == "patient-lateral"), None)

    frames: list[Frame] = []
    labels: dict[int, tuple[str, ...]] = {}
    for i in range(spec.n_frames):
        t = i / spec.fps
        entries: list[tuple[str, Skeleton]] = []
        lateral_skel: Skeleton | None = None
        for actor in spec.actors:
            if actor.kind == "shadow":
                continue
            if _occluded(actor, i):
                continue
            frac = i / max(spec.n_frames - 1, 1)
            x = (actor.x_path[0] + (actor.x_path[1] - actor.x_path[0]) * frac) * w
            y = actor.y_frac * h
            if actor.gait is not None:
                ankle = _ankle_offsets(actor.gait, t, actor.scale_px)
                sigma = actor.gait.noise_sigma
            else:
                ankle = (0.0, 0.0)
                sigma = 0.0
            noise = rng.normal(0.0, sigma, size=(18, 2)) if sigma > 0 else None
            skel = make_skeleton(x, y, actor.scale_px, ankle,
                                 confidence=actor.confidence, noise=noise)
            entries.append((actor.kind, skel))
            if actor.kind == "patient-lateral":
                lateral_skel = skel
        for actor in spec.actors:
            if actor.kind != "shadow" or lateral_skel is None or _occluded(actor, i):
                continue
            dx, dy = actor.shadow_offset[0] * w, actor.shadow_offset[1] * h
            center_x = (lateral_skel.joints[8].x + lateral_skel.joints[11].x) / 2.0
            mirrored = tuple(
                JointPoint(2.0 * center_x - pt.x + dx, pt.y + dy,
                           pt.c * actor.confidence if pt.c > 0 else 0.0)
                for pt in lateral_skel.joints
            )
            entries.append((actor.kind, Skeleton(mirrored)))

        order = rng.permutation(len(entries)) if entries else []
        shuffled = [entries[k] for k in order]
        frames.append(Frame(index=i, entries=tuple(s for _, s in shuffled),
                            timestamp_s=i / spec.fps))
        labels[i] = tuple(kind for kind, _ in shuffled)
    seq = FrameSequence(frames=tuple(frames), fps=spec.fps,
                        image_width=w, image_height=h)
    return seq, labels


def score_assignment(
    pair: TrackPair,
    seq: FrameSequence,
    labels: dict[int, tuple[str, ...]],
    left_actor: str = "patient-lateral",
    right_actor: str = "patient-frontal",
) -> dict[str, int]:
    """Compare cleaned tracks against scene ground truth.

    Counts patient entries present after lock-on, how many landed on their
    own track, and how many non-patient entries any track picked up.
    """
    stats = {"patient_entries": 0, "correct": 0, "intruders": 0}
    by_frame = {f.index: f for f in seq.frames}
    for ordinal in range(pair.init_frame, max(by_frame) + 1):
        frame = by_frame.get(ordinal)
        if frame is None:
            continue
        frame_labels = labels.get(ordinal, ())
        assigned = {}
        for side, track in (("left", pair.left), ("right", pair.right)):
            skel = track.samples.get(ordinal)
            if skel is None:
                continue
            entry_idx = next(i for i, e in enumerate(frame.entries) if e is skel)
            assigned[side] = frame_labels[entry_idx]
        for kind in frame_labels:
            if kind == left_actor:
                stats["patient_entries"] += 1
                stats["correct"] += int(assigned.get("left") == kind)
            elif kind == right_actor:
                stats["patient_entries"] += 1
                stats["correct"] += int(assigned.get("right") == kind)
        for side_label in assigned.values():
            if side_label not in (left_actor, right_actor):
                stats["intruders"] += 1
    return stats


# --- feature-table generation ----------------------------------------------

@dataclass(frozen=True)
class DatasetRanges:
    """Uniform sampling ranges for the synthetic regression dataset."""

    cadence: tuple[float, float] = (78.0, 150.0)
    step_length: tuple[float, float] = (0.45, 0.95)
    noise_sigma: tuple[float, float] = (0.5, 2.0)
    duration_s: float = 16.0
    fps: float = 32.0


def synthetic_gmfcs_level(cadence: float) -> int:
    """Arbitrary severity labeling for synthetic walks: slower cadence maps to
    a higher (worse) level, giving an imbalanced 5-level target to exercise
    the classifiers. Not a clinical model."""
    for level, threshold in enumerate((120.0, 105.0, 95.0, 85.0), start=1):
        if cadence >= threshold:
            return level
    return 5


def generate_dataset(
    n: int,
    ranges: DatasetRanges | None = None,
    seed: int = 0,
    cfg: SpectralConfig | None = None,
) -> list[FeatureVector]:
    """Run the real extraction pipeline over n sampled synthetic walks."""
    if n < 1:
        raise ValueError("n must be >= 1")
    ranges = ranges or DatasetRanges()
    cfg = cfg or SpectralConfig()
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n):
        params = GaitParams(
            cadence=float(rng.uniform(*ranges.cadence)),
            step_length=float(rng.uniform(*ranges.step_length)),
            noise_sigma=float(rng.uniform(*ranges.noise_sigma)),
            phase=float(rng.uniform(0.0, 2.0 * math.pi)),
            duration_s=ranges.duration_s,
            fps=ranges.fps,
        )
        track, truth = generate_gait_track(
            params, seed=int(rng.integers(0, 2**31 - 1)), edges=cfg.band_edges
        )
        rows.append(
            track_features(
                track,
                fps=params.fps,
                cfg=cfg,
                sample_id=f"synth{i:05d}",
                targets={
                    "cadence": truth.cadence,
                    "step_length": truth.step_length,
                    "speed": truth.speed,
                    "gmfcs": float(synthetic_gmfcs_level(truth.cadence)),
                },
            )
        )
    return rows
