"""Parsing of per-frame pose keypoint JSON into typed frame sequences.

Wire format: one JSON file per video frame with a top-level "people" list;
each person carries "pose_keypoints_2d", a flat array of 54 numbers laid out
as [x0, y0, c0, ..., x17, y17, c17] over the 18-joint body layout
(0 nose, 1 neck, 2/5 shoulders, 8/11 hips, 10/13 ankles, 14-17 eyes/ears).
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    BadConfidenceError,
    BadKeypointArityError,
    EmptyDirectoryError,
    MalformedJsonError,
)

log = logging.getLogger(__name__)

N_JOINTS = 18

JOINT_NOSE = 0
JOINT_NECK = 1
JOINT_R_SHOULDER = 2
JOINT_L_SHOULDER = 5
JOINT_R_HIP = 8
JOINT_R_ANKLE = 10
JOINT_L_HIP = 11
JOINT_L_ANKLE = 13

# Confidence may exceed [0, 1] by at most this much before the file is
# considered corrupt; smaller excursions are clamped.
CONF_TOL = 1e-6

_ORDINAL_RE = re.compile(r"(\d+)_keypoints\.json$")


@dataclass(frozen=True)
class JointPoint:
    """One joint detection: image coordinates plus detector confidence.

    (0, 0) with confidence 0 is the detector's "not found" marker.
    """

    x: float
    y: float
    c: float

    @property
    def detected(self) -> bool:
        return self.c > 0.0


@dataclass(frozen=True)
class Skeleton:
    """One detected person in one frame: exactly 18 joints."""

    joints: tuple[JointPoint, ...]

    def __post_init__(self) -> None:
        if len(self.joints) != N_JOINTS:
            raise BadKeypointArityError(
                f"skeleton has {len(self.joints)} joints, expected {N_JOINTS}"
            )

    def joint(self, index: int) -> JointPoint:
        return self.joints[index]


@dataclass(frozen=True)
class Frame:
    """All person entries detected in one video frame.

    entries may be empty (person out of view) or hold more than two
    skeletons (companions, shadows mis-detected as people).
    """

    index: int
    entries: tuple[Skeleton, ...] = ()
    timestamp_s: float | None = None


@dataclass(frozen=True)
class FrameSequence:
    """Ordered frames of one video plus the capture geometry."""

    frames: tuple[Frame, ...]
    fps: float
    image_width: int
    image_height: int

    def __post_init__(self) -> None:
        if self.fps <= 0:
            raise ValueError(f"fps must be positive, got {self.fps}")
        if self.image_width <= 0 or self.image_height <= 0:
            raise ValueError("image dimensions must be positive")
        indices = [f.index for f in self.frames]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ValueError("frame indices must be strictly increasing")

    def __len__(self) -> int:
        return len(self.frames)


def parse_frame(raw_bytes: bytes | str, index: int) -> Frame:
    """Parse one keypoint JSON file into a Frame.

    Person entries whose joints all have zero confidence are dropped; they
    carry no information. Entry order is otherwise preserved.
    """
    try:
        doc = json.loads(raw_bytes)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedJsonError(f"frame {index}: {exc}") from exc
    if not isinstance(doc, dict) or "people" not in doc:
        raise MalformedJsonError(f"frame {index}: missing top-level 'people' key")
    people = doc["people"]
    if not isinstance(people, list):
        raise MalformedJsonError(f"frame {index}: 'people' is not a list")

    entries = []
    for person_i, person in enumerate(people):
        if not isinstance(person, dict) or "pose_keypoints_2d" not in person:
            raise MalformedJsonError(
                f"frame {index}: entry {person_i} missing 'pose_keypoints_2d'"
            )
        flat = person["pose_keypoints_2d"]
        if not isinstance(flat, list) or len(flat) != 3 * N_JOINTS:
            got = len(flat) if isinstance(flat, list) else "non-array"
            raise BadKeypointArityError(
                f"frame {index}: entry {person_i} has {got} values, expected {3 * N_JOINTS}"
            )
        joints = []
        for j in range(N_JOINTS):
            x, y, c = flat[3 * j], flat[3 * j + 1], flat[3 * j + 2]
            try:
                x, y, c = float(x), float(y), float(c)
            except (TypeError, ValueError) as exc:
                raise MalformedJsonError(
                    f"frame {index}: entry {person_i} joint {j} is not numeric"
                ) from exc
            if c < -CONF_TOL or c > 1.0 + CONF_TOL:
                raise BadConfidenceError(
                    f"frame {index}: entry {person_i} joint {j} confidence {c} outside [0, 1]"
                )
            c = min(max(c, 0.0), 1.0)
            joints.append(JointPoint(x, y, c))
        skeleton = Skeleton(tuple(joints))
        if any(j.detected for j in skeleton.joints):
            entries.append(skeleton)
    return Frame(index=index, entries=tuple(entries))


def frame_to_json(frame: Frame) -> str:
    """Serialize a Frame back to the wire format (bit-exact round trip)."""
    people = []
    for skel in frame.entries:
        flat: list[float] = []
        for j in skel.joints:
            flat.extend((j.x, j.y, j.c))
        people.append({"pose_keypoints_2d": flat})
    return json.dumps({"people": people})


def frame_filename(stem: str, ordinal: int) -> str:
    """Canonical per-frame file name with a 12-digit zero-padded ordinal."""
    return f"{stem}_{ordinal:012d}_keypoints.json"


def load_sequence(
    directory: str | Path,
    fps: float,
    dims: tuple[int, int],
) -> FrameSequence:
    """Load every keypoint file in a directory into a FrameSequence.

    Files are matched by the trailing ``<ordinal>_keypoints.json`` pattern
    and sorted by parsed ordinal. Missing ordinals inside the covered range
    become empty frames (a warning is logged); a malformed file aborts the
    load, naming the file.
    """
    directory = Path(directory)
    found: dict[int, Path] = {}
    for path in sorted(directory.iterdir()) if directory.is_dir() else []:
        m = _ORDINAL_RE.search(path.name)
        if m:
            found[int(m.group(1))] = path
    if not found:
        raise EmptyDirectoryError(f"no keypoint files in {directory}")

    first, last = min(found), max(found)
    if len(found) != last - first + 1:
        log.warning(
            "non-contiguous frame files in %s: %d files over range [%d, %d]; "
            "gaps become empty frames",
            directory, len(found), first, last,
        )

    frames = []
    for ordinal in range(first, last + 1):
        path = found.get(ordinal)
        if path is None:
            frame = Frame(index=ordinal)
        else:
            try:
                frame = parse_frame(path.read_bytes(), ordinal)
            except MalformedJsonError as exc:
                raise MalformedJsonError(f"{path.name}: {exc}") from exc
        frames.append(
            Frame(frame.index, frame.entries, timestamp_s=ordinal / fps)
        )
    return FrameSequence(
        frames=tuple(frames), fps=fps, image_width=dims[0], image_height=dims[1]
    )
