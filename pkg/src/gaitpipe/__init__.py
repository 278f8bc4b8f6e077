"""gaitpipe: pose-keypoint cleaning, spectral gait features, model training.

The pipeline in one breath: per-frame pose JSON -> typed frames ->
two view tracks by center-of-gravity association -> hip-neck normalized
ankle signals -> FFT band-power features -> regression/classification
models trained and evaluated with seeded, reproducible splits.
"""

from .bundle import ModelBundle, fit_bundle, make_estimator
from .cleaning import CleanerConfig, Track, TrackPair, clean_sequence
from .evaluation import (
    EvalReport,
    classification_metrics,
    cross_validate,
    grid_search,
    make_split,
    regression_metrics,
)
from .pose import Frame, FrameSequence, JointPoint, Skeleton, load_sequence, parse_frame
from .signals import Signal, extract_channel, fill_and_detrend, hip_neck_scale
from .spectral import (
    FeatureVector,
    SpectralConfig,
    band_power,
    fft_spectrum,
    track_features,
    video_features,
)
from .synth import GaitParams, SceneSpec, generate_dataset, generate_gait_track, generate_scene

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ModelBundle", "fit_bundle", "make_estimator",
    "CleanerConfig", "Track", "TrackPair", "clean_sequence",
    "EvalReport", "classification_metrics", "cross_validate", "grid_search",
    "make_split", "regression_metrics",
    "Frame", "FrameSequence", "JointPoint", "Skeleton", "load_sequence", "parse_frame",
    "Signal", "extract_channel", "fill_and_detrend", "hip_neck_scale",
    "FeatureVector", "SpectralConfig", "band_power", "fft_spectrum",
    "track_features", "video_features",
    "GaitParams", "SceneSpec", "generate_dataset", "generate_gait_track", "generate_scene",
]
