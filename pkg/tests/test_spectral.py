import numpy as np
import pytest

from gaitpipe.errors import BadEdgesError, TooShortError
from gaitpipe.signals import Signal
from gaitpipe.spectral import (
    FEATURE_NAMES_24,
    FeatureVector,
    SpectralConfig,
    band_index_of,
    band_power,
    default_band_edges,
    fft_spectrum,
    track_features,
)
from gaitpipe.synth import GaitParams, generate_gait_track, scale_track


def sine_signal(freq, amp=1.0, n=256, fps=32.0, phase=0.0):
    t = np.arange(n) / fps
    return Signal(values=amp * np.sin(2 * np.pi * freq * t + phase), fps=fps, channel="s")


class TestFftSpectrum:
    def test_zero_signal(self):
        spec = fft_spectrum(Signal(values=np.zeros(128), fps=32.0, channel="z"))
        assert np.all(spec.amps == 0.0)
        assert spec.freqs[0] == 0.0 and spec.freqs[-1] == 16.0

    def test_on_bin_sine_amplitude(self):
        # 2.0 Hz on bin 16 of a 256-sample / 32 fps window
        spec = fft_spectrum(sine_signal(2.0))
        k = int(round(2.0 / spec.df))
        assert spec.amps[k] == pytest.approx(1.0, abs=1e-9)
        others = np.delete(spec.amps, k)
        assert np.max(others) <= 1e-9

    def test_two_sines_linearity(self):
        sig = sine_signal(1.0, amp=1.0)
        sig2 = sine_signal(3.0, amp=0.5)
        combined = Signal(values=sig.values + sig2.values, fps=32.0, channel="c")
        spec = fft_spectrum(combined)
        k1, k3 = int(round(1.0 / spec.df)), int(round(3.0 / spec.df))
        assert spec.amps[k1] == pytest.approx(1.0, abs=1e-9)
        assert spec.amps[k3] == pytest.approx(0.5, abs=1e-9)

    def test_brute_force_dft_oracle(self):
        # independent O(n^2) DFT agree with the fft path
        rng = np.random.default_rng(6)
        x = rng.normal(size=128)
        spec = fft_spectrum(Signal(values=x, fps=32.0, channel="r"))
        n = x.size
        for k in (0, 5, 33, 64):
            ref = sum(x[m] * np.exp(-2j * np.pi * k * m / n) for m in range(n))
            expected = abs(ref) * (2.0 / n if 0 < k < n // 2 else 1.0 / n)
            assert spec.amps[k] == pytest.approx(expected, abs=1e-9)

    def test_zero_padding_recorded(self):
        spec = fft_spectrum(Signal(values=np.zeros(100), fps=25.0, channel="p"))
        assert spec.n_samples == 100 and spec.n_padded == 128
        assert spec.df == pytest.approx(25.0 / 128)

    def test_too_short(self):
        with pytest.raises(TooShortError):
            fft_spectrum(Signal(values=np.zeros(63), fps=32.0, channel="x"))


class TestBandPower:
    def test_zero_spectrum(self):
        spec = fft_spectrum(Signal(values=np.zeros(256), fps=32.0, channel="z"))
        bands = band_power(spec, default_band_edges())
        assert bands.values.shape == (12,)
        assert np.all(bands.values == 0.0)

    def test_single_sine_band_value(self):
        # amp 1 at 2.0 Hz, df = 32/256 = 0.125 -> band gets 1^2 * 2.0 * 0.125
        spec = fft_spectrum(sine_signal(2.0))
        bands = band_power(spec, default_band_edges())
        idx = band_index_of(2.0, default_band_edges())
        assert bands.values[idx] == pytest.approx(0.25, abs=1e-9)
        others = np.delete(bands.values, idx)
        assert np.max(others) <= 1e-9

    def test_band_sum_completeness(self):
        rng = np.random.default_rng(8)
        spec = fft_spectrum(Signal(values=rng.normal(size=256), fps=32.0, channel="n"))
        nyquist = spec.freqs[-1]
        edges = tuple(np.linspace(0.0, nyquist, 13))
        total_banded = band_power(spec, edges).values.sum()
        brute = float(np.sum(spec.amps[1:] ** 2 * spec.freqs[1:] * spec.df))
        assert total_banded == pytest.approx(brute, rel=1e-9)

    def test_bad_edges(self):
        spec = fft_spectrum(sine_signal(2.0))
        with pytest.raises(BadEdgesError):
            band_power(spec, (0.0, 2.0, 1.0))
        with pytest.raises(BadEdgesError):
            band_power(spec, (0.0, 100.0))

    def test_left_closed_right_open(self):
        spec = fft_spectrum(sine_signal(2.0))  # on-bin peak exactly at 2.0
        edges = (0.0, 2.0, 4.0)
        bands = band_power(spec, edges)
        assert bands.values[0] <= 1e-9        # 2.0 belongs to [2.0, 4.0)
        assert bands.values[1] == pytest.approx(0.25, abs=1e-9)


class TestTrackFeatures:
    def test_names_fixed_order(self):
        assert FEATURE_NAMES_24[0] == "rank_b01"
        assert FEATURE_NAMES_24[11] == "rank_b12"
        assert FEATURE_NAMES_24[12] == "lank_b01"
        assert FEATURE_NAMES_24[23] == "lank_b12"

    def test_synthetic_gait_dominant_band(self):
        p = GaitParams(cadence=120, step_length=0.7, noise_sigma=0.0)
        track, truth = generate_gait_track(p, seed=1)
        fv = track_features(track, fps=p.fps)
        assert fv.names == FEATURE_NAMES_24
        assert int(np.argmax(fv.values[:12])) == truth.dominant_band
        assert int(np.argmax(fv.values[12:])) == truth.dominant_band

    def test_static_skeleton_all_zero(self):
        p = GaitParams(cadence=100, step_length=0.0, speed=0.0, noise_sigma=0.0)
        track, _ = generate_gait_track(p, seed=0)
        fv = track_features(track, fps=p.fps)
        assert np.max(np.abs(fv.values)) <= 1e-18

    def test_scale_invariance_pipeline(self):
        p = GaitParams(cadence=110, step_length=0.8, noise_sigma=1.5)
        track, _ = generate_gait_track(p, seed=3)
        base = track_features(track, fps=p.fps)
        doubled = track_features(scale_track(track, 2.0), fps=p.fps)
        rel = np.abs(doubled.values - base.values) / np.maximum(np.abs(base.values), 1e-300)
        assert np.max(rel) <= 1e-9

    def test_features_nonnegative(self):
        p = GaitParams(cadence=95, step_length=0.5, noise_sigma=2.0)
        track, _ = generate_gait_track(p, seed=7)
        fv = track_features(track, fps=p.fps)
        assert np.all(fv.values >= 0.0)

    def test_extras_appended(self):
        p = GaitParams(cadence=95, step_length=0.5)
        track, truth = generate_gait_track(p, seed=7)
        fv = track_features(track, fps=p.fps, cfg=SpectralConfig(include_extras=True))
        assert fv.names[-2:] == ("scale_px", "duration_s")
        assert fv.values[-2] == pytest.approx(truth.scale_px)
        assert len(fv.names) == 26

    def test_feature_vector_validation(self):
        with pytest.raises(ValueError):
            FeatureVector(id="a", names=("x", "x"), values=np.zeros(2))
        with pytest.raises(ValueError):
            FeatureVector(id="a", names=("x",), values=np.array([np.nan]))

    def test_stateless_across_videos(self):
        # a video's features cannot depend on what was processed before it
        a, _ = generate_gait_track(GaitParams(cadence=100, step_length=0.6), seed=1)
        b, _ = generate_gait_track(GaitParams(cadence=140, step_length=0.9), seed=2)
        fresh = track_features(a, fps=32)
        track_features(b, fps=32)
        after_other = track_features(a, fps=32)
        assert np.array_equal(fresh.values, after_other.values)
