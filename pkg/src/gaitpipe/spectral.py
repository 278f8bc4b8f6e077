"""Frequency-domain gait features.

Each ankle channel is turned into a one-sided amplitude spectrum, then
reduced to twelve frequency-weighted band powers: for band [f_i, f_{i+1}),
the feature is the discrete integral of (amplitude^2 * frequency) over the
bins in the band. Band location encodes the walking rhythm; band magnitude
encodes the excursion driving it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cleaning import Track, TrackPair
from .errors import BadEdgesError, TooShortError
from .pose import JOINT_L_ANKLE, JOINT_R_ANKLE
from .signals import PreprocessConfig, Signal, extract_channel, fill_and_detrend, hip_neck_scale

N_BANDS = 12
TARGET_NAMES = ("cadence", "step_length", "speed", "gmfcs")


def default_band_edges(n_bands: int = N_BANDS, f_max: float = 6.0) -> tuple[float, ...]:
    """Equal-width band edges over (0, f_max]; gait energy sits well below 6 Hz."""
    return tuple(f_max * i / n_bands for i in range(n_bands + 1))


@dataclass(frozen=True)
class SpectralConfig:
    band_edges: tuple[float, ...] = default_band_edges()
    window: str = "rect"            # "rect" keeps on-bin sinusoids exact; "hann" for leaky data
    ankle_axis: str = "x"           # fore-aft oscillation dominates in a lateral walk view
    include_extras: bool = False    # append scale_px / duration_s beyond the 24 band powers
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)


@dataclass(frozen=True)
class Spectrum:
    """One-sided amplitude spectrum: a pure sine of amplitude a peaks at ~a."""

    freqs: np.ndarray
    amps: np.ndarray
    df: float
    n_samples: int
    n_padded: int


@dataclass(frozen=True)
class BandPowerFeatures:
    edges: tuple[float, ...]
    values: np.ndarray   # one nonnegative power per band
    channel: str


@dataclass(frozen=True)
class FeatureVector:
    """Named features for one video, with optional regression/class targets."""

    id: str
    names: tuple[str, ...]
    values: np.ndarray
    targets: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.names) != len(self.values):
            raise ValueError("names and values length mismatch")
        if len(set(self.names)) != len(self.names):
            raise ValueError("feature names must be unique")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature values must be finite")


def band_feature_names(prefix: str, n_bands: int = N_BANDS) -> tuple[str, ...]:
    return tuple(f"{prefix}_b{i + 1:02d}" for i in range(n_bands))


FEATURE_NAMES_24 = band_feature_names("rank") + band_feature_names("lank")


def fft_spectrum(s: Signal, window: str = "rect") -> Spectrum:
    """One-sided amplitude spectrum, zero-padded to the next power of two."""
    x = np.asarray(s.values, dtype=float)
    n = x.size
    if n < 64:
        raise TooShortError(f"need >= 64 samples for a spectrum, got {n}")
    if not np.all(np.isfinite(x)):
        raise ValueError("signal contains non-finite values")
    if window == "hann":
        w = np.hanning(n)
        # rescale so a full-scale sine still reads its own amplitude
        x = x * w * (n / w.sum())
    elif window != "rect":
        raise ValueError(f"unknown window {window!r}")
    n_padded = 1 << (n - 1).bit_length()
    spec = np.fft.rfft(x, n=n_padded)
    amps = np.abs(spec) * (2.0 / n)
    amps[0] /= 2.0
    if n_padded % 2 == 0:
        amps[-1] /= 2.0
    freqs = np.fft.rfftfreq(n_padded, d=1.0 / s.fps)
    return Spectrum(freqs=freqs, amps=amps, df=s.fps / n_padded, n_samples=n, n_padded=n_padded)


def band_power(spec: Spectrum, edges: tuple[float, ...] | list[float]) -> BandPowerFeatures:
    """Frequency-weighted power per band: sum of amp^2 * f * df over bins.

    Bin membership is left-closed/right-open except the last band, which is
    right-closed; the DC bin never contributes (its frequency weight is zero,
    and it is excluded outright).
    """
    edges = tuple(float(e) for e in edges)
    nyquist = spec.freqs[-1]
    if len(edges) < 2 or any(b <= a for a, b in zip(edges, edges[1:])):
        raise BadEdgesError("band edges must be strictly ascending")
    if edges[0] < 0 or edges[-1] > nyquist * (1 + 1e-12):
        raise BadEdgesError(f"band edges must lie within [0, {nyquist}]")
    f, a = spec.freqs, spec.amps
    weighted = a * a * f * spec.df
    weighted[0] = 0.0
    values = np.zeros(len(edges) - 1)
    for i in range(len(edges) - 1):
        lo, hi = edges[i], edges[i + 1]
        if i == len(edges) - 2:
            mask = (f >= lo) & (f <= hi)
        else:
            mask = (f >= lo) & (f < hi)
        mask[0] = False
        values[i] = weighted[mask].sum()
    return BandPowerFeatures(edges=edges, values=values, channel="")


def band_index_of(freq_hz: float, edges: tuple[float, ...]) -> int:
    """Index of the band containing a frequency (last band right-closed)."""
    if freq_hz == edges[-1]:
        return len(edges) - 2
    idx = int(np.searchsorted(np.asarray(edges), freq_hz, side="right")) - 1
    if idx < 0 or idx > len(edges) - 2:
        raise BadEdgesError(f"{freq_hz} Hz outside the banded range")
    return idx


def ankle_signal(track: Track, joint: int, fps: float, cfg: SpectralConfig) -> Signal:
    """The processed (filled, detrended) channel one ankle's features come from."""
    raw = extract_channel(track, joint, axis=cfg.ankle_axis, fps=fps, cfg=cfg.preprocess)
    return fill_and_detrend(raw, cfg.preprocess)


def ankle_band_powers(
    track: Track, joint: int, fps: float, cfg: SpectralConfig
) -> BandPowerFeatures:
    """Full channel pipeline for one ankle: extract, fill, detrend, FFT, bands."""
    sig = ankle_signal(track, joint, fps, cfg)
    spec = fft_spectrum(sig, window=cfg.window)
    bands = band_power(spec, cfg.band_edges)
    return BandPowerFeatures(edges=bands.edges, values=bands.values, channel=sig.channel)


def track_features(
    track: Track,
    fps: float,
    cfg: SpectralConfig | None = None,
    sample_id: str = "",
    targets: dict[str, float] | None = None,
) -> FeatureVector:
    """24 band-power features (12 per ankle) from one cleaned view track."""
    cfg = cfg or SpectralConfig()
    if len(cfg.band_edges) != N_BANDS + 1:
        raise BadEdgesError(f"expected {N_BANDS + 1} band edges, got {len(cfg.band_edges)}")
    r_ank = ankle_band_powers(track, JOINT_R_ANKLE, fps, cfg)
    l_ank = ankle_band_powers(track, JOINT_L_ANKLE, fps, cfg)
    names = list(FEATURE_NAMES_24)
    values = np.concatenate([r_ank.values, l_ank.values])
    if cfg.include_extras:
        scale = hip_neck_scale(track)
        duration = (max(track.samples) - min(track.samples) + 1) / fps
        names += ["scale_px", "duration_s"]
        values = np.concatenate([values, [scale.video_scale, duration]])
    return FeatureVector(
        id=sample_id, names=tuple(names), values=values, targets=dict(targets or {})
    )


def video_features(
    pair: TrackPair,
    fps: float,
    cfg: SpectralConfig | None = None,
    sample_id: str = "",
    targets: dict[str, float] | None = None,
) -> FeatureVector:
    """Features for a cleaned video; only the right-position view is used,
    the left view carrying the same patient's information redundantly."""
    return track_features(pair.right, fps, cfg, sample_id=sample_id, targets=targets)


def feature_matrix(
    rows: list[FeatureVector], target: str | None = None
) -> tuple[np.ndarray, np.ndarray | None, tuple[str, ...]]:
    """Stack feature vectors into (X, y, names); y is None without a target."""
    if not rows:
        raise ValueError("no feature rows")
    names = rows[0].names
    for r in rows:
        if r.names != names:
            raise ValueError(f"inconsistent feature names at id={r.id!r}")
    X = np.vstack([r.values for r in rows])
    y = None
    if target is not None:
        missing = [r.id for r in rows if target not in r.targets]
        if missing:
            raise ValueError(f"target {target!r} missing for ids {missing[:3]}")
        y = np.array([r.targets[target] for r in rows], dtype=float)
    return X, y, names
