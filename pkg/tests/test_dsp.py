import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steerbeam import MultichannelAudio, Spectrogram, StftConfig, istft, stft
from steerbeam.dsp import bin_frequencies, bin_frequency
from steerbeam.errors import SteerbeamError


def direct_dft_frame(frame, window, nfft):
    """Independent oracle: plain summation DFT of one windowed frame."""
    x = frame * window
    n = np.arange(len(x))
    return np.array([
        np.sum(x * np.exp(-2j * np.pi * k * n / nfft)) for k in range(nfft // 2 + 1)
    ])


def interior_error_db(original, reconstructed, window_len):
    sl = slice(window_len, reconstructed.shape[-1] - window_len)
    err = np.sum((original[..., : reconstructed.shape[-1]][..., sl] - reconstructed[..., sl]) ** 2)
    ref = np.sum(original[..., sl] ** 2)
    return 10 * np.log10(err / ref)


class TestStftConfig:
    def test_defaults(self, cfg):
        assert cfg.num_bins == 161
        assert cfg.window_len == 320 and cfg.hop == 160 and cfg.nfft == 320

    def test_invalid_overlap(self):
        with pytest.raises(ValueError, match="hop"):
            StftConfig(hop=100)

    def test_invalid_nfft(self):
        with pytest.raises(ValueError, match="nfft"):
            StftConfig(nfft=256)

    def test_invalid_window(self):
        with pytest.raises(ValueError, match="window"):
            StftConfig(window_kind="hamming")

    def test_cola_window_identity(self, cfg):
        # sqrt-Hann pairs must overlap-add to exactly one at 50% overlap
        w2 = cfg.window() ** 2
        assert np.allclose(w2[: cfg.hop] + w2[cfg.hop :], 1.0, atol=1e-12)


class TestBinFrequency:
    @pytest.mark.parametrize("k,expected", [(0, 0.0), (160, 8000.0), (20, 1000.0)])
    def test_values(self, cfg, k, expected):
        assert bin_frequency(k, cfg) == expected

    def test_out_of_range(self, cfg):
        with pytest.raises(SteerbeamError):
            bin_frequency(161, cfg)
        with pytest.raises(SteerbeamError):
            bin_frequency(-1, cfg)

    def test_all_bins(self, cfg):
        f = bin_frequencies(cfg)
        assert len(f) == 161 and f[0] == 0.0 and f[-1] == 8000.0


class TestStft:
    def test_zero_signal(self, cfg):
        audio = MultichannelAudio(np.zeros((2, 3200)), 16000)
        spec = stft(audio, cfg)
        assert spec.num_frames == (3200 - 320) // 160 + 1
        assert np.all(spec.data == 0)

    def test_tone_at_bin_frequency(self, cfg, rng):
        k = 25  # 1250 Hz
        t = np.arange(16000) / cfg.sample_rate
        x = np.sin(2 * np.pi * bin_frequency(k, cfg) * t)
        spec = stft(MultichannelAudio.from_mono(x, 16000), cfg)
        mags = np.abs(spec.channel(0)[5:-5])
        assert np.all(np.argmax(mags, axis=1) == k)

    def test_frame_against_direct_dft(self, cfg, rng):
        x = rng.standard_normal(1000)
        spec = stft(MultichannelAudio.from_mono(x, 16000), cfg)
        frame_idx = 2
        oracle = direct_dft_frame(x[frame_idx * 160 : frame_idx * 160 + 320],
                                  cfg.window(), cfg.nfft)
        np.testing.assert_allclose(spec.channel(0)[frame_idx], oracle, rtol=0, atol=1e-9)

    def test_parseval_on_white_noise(self, cfg, rng):
        x = rng.standard_normal(3200)
        spec = stft(MultichannelAudio.from_mono(x, 16000), cfg)
        frame = x[160 : 160 + 320] * cfg.window()
        time_energy = np.sum(frame**2)
        one_sided = np.abs(spec.channel(0)[1]) ** 2
        spectral = (one_sided[0] + one_sided[-1] + 2 * np.sum(one_sided[1:-1])) / cfg.nfft
        assert abs(spectral - time_energy) / time_energy < 1e-6

    def test_frame_count(self, cfg):
        for n in (320, 480, 500, 3200, 16001):
            audio = MultichannelAudio(np.zeros((1, n)), 16000)
            assert stft(audio, cfg).num_frames == (n - 320) // 160 + 1

    def test_sample_rate_mismatch(self, cfg):
        audio = MultichannelAudio(np.zeros((1, 3200)), 48000)
        with pytest.raises(SteerbeamError, match="sample rate"):
            stft(audio, cfg)

    def test_too_short(self, cfg):
        with pytest.raises(SteerbeamError):
            stft(MultichannelAudio(np.zeros((1, 100)), 16000), cfg)

    @given(a=st.floats(-3, 3), b=st.floats(-3, 3))
    @settings(max_examples=20, deadline=None)
    def test_linearity(self, a, b):
        cfg = StftConfig()
        gen = np.random.default_rng(7)
        x = gen.standard_normal(1600)
        y = gen.standard_normal(1600)
        lhs = stft(MultichannelAudio.from_mono(a * x + b * y, 16000), cfg).data
        rhs = (a * stft(MultichannelAudio.from_mono(x, 16000), cfg).data
               + b * stft(MultichannelAudio.from_mono(y, 16000), cfg).data)
        scale = np.max(np.abs(rhs)) or 1.0
        assert np.max(np.abs(lhs - rhs)) / scale < 1e-6

    def test_float32_dtype_flows_through(self, cfg, rng):
        x = rng.standard_normal((2, 3200)).astype(np.float32)
        spec = stft(MultichannelAudio(x, 16000), cfg)
        assert spec.data.dtype == np.complex64
        assert istft(spec, cfg).data.dtype == np.float32


class TestIstft:
    def test_zero_spectrogram(self, cfg):
        spec = Spectrogram(np.zeros((1, 5, 161), dtype=complex), cfg)
        assert np.all(istft(spec, cfg).data == 0)

    def test_single_frame_hand_computed(self, cfg, rng):
        x = rng.standard_normal(320)
        spec = stft(MultichannelAudio.from_mono(x, 16000), cfg)
        assert spec.num_frames == 1
        out = istft(spec, cfg).channel(0)
        # one frame overlap-adds to analysis window * synthesis window
        np.testing.assert_allclose(out, x * cfg.window() ** 2, atol=1e-12)

    def test_roundtrip_interior(self, cfg, rng):
        x = rng.standard_normal((2, 10 * 320))
        back = istft(stft(MultichannelAudio(x, 16000), cfg), cfg)
        assert interior_error_db(x, back.data, cfg.window_len) < -60.0

    @pytest.mark.parametrize("seed", range(10))
    def test_roundtrip_many_seeds(self, cfg, seed):
        x = np.random.default_rng(seed).standard_normal(6400)
        back = istft(stft(MultichannelAudio.from_mono(x, 16000), cfg), cfg)
        assert interior_error_db(x, back.data[0], cfg.window_len) < -60.0

    def test_dimension_mismatch(self, cfg):
        with pytest.raises(SteerbeamError, match="bin count"):
            Spectrogram(np.zeros((1, 5, 100), dtype=complex), cfg)


class TestImmutability:
    def test_audio_frozen(self, rng):
        audio = MultichannelAudio(rng.standard_normal((2, 100)), 16000)
        with pytest.raises(ValueError):
            audio.data[0, 0] = 1.0

    def test_spectrogram_frozen(self, cfg):
        spec = Spectrogram(np.zeros((1, 2, 161), dtype=complex), cfg)
        with pytest.raises(ValueError):
            spec.data[0, 0, 0] = 1.0
