"""STFT analysis/synthesis and time-frequency bookkeeping.

The whole package runs on a single short-time Fourier transform layout:
16 kHz audio, 20 ms square-root Hann windows with 50% overlap and a
320-point FFT (161 one-sided bins). Analysis and synthesis both apply the
sqrt-Hann window, which satisfies the constant-overlap-add condition at
50% overlap, so interior samples reconstruct exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SteerbeamError


@dataclass(frozen=True)
class StftConfig:
    """Parameters of the analysis/synthesis filterbank.

    ``hop * 2 == window_len`` is required: the sqrt-Hann window pair only
    overlap-adds to unity at exactly 50% overlap.
    """

    sample_rate: int = 16000
    window_len: int = 320
    hop: int = 160
    nfft: int = 320
    window_kind: str = "sqrt-hann"

    def __post_init__(self):
        if self.window_kind != "sqrt-hann":
            raise ValueError(f"unsupported window kind: {self.window_kind!r}")
        if self.hop * 2 != self.window_len:
            raise ValueError(
                f"hop must be window_len/2 (got hop={self.hop}, window_len={self.window_len})"
            )
        if self.nfft < self.window_len:
            raise ValueError(f"nfft ({self.nfft}) must be >= window_len ({self.window_len})")

    @property
    def num_bins(self) -> int:
        """One-sided bin count K."""
        return self.nfft // 2 + 1

    @property
    def frame_duration(self) -> float:
        return self.window_len / self.sample_rate

    def window(self) -> np.ndarray:
        """The periodic sqrt-Hann window, sin(pi*n/L) for n in [0, L)."""
        n = np.arange(self.window_len)
        return np.sin(np.pi * n / self.window_len)

    def num_frames(self, num_samples: int) -> int:
        """Frame count for a signal of the given length (no padding)."""
        if num_samples < self.window_len:
            raise SteerbeamError(
                f"signal too short for one frame: {num_samples} < {self.window_len} samples"
            )
        return (num_samples - self.window_len) // self.hop + 1


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class MultichannelAudio:
    """Immutable multichannel signal, shape (channels, samples).

    Channel 0 is the left microphone and the reference for separation.
    """

    data: np.ndarray
    sample_rate: int

    def __post_init__(self):
        data = np.atleast_2d(np.asarray(self.data))
        if data.ndim != 2:
            raise ValueError(f"expected (channels, samples) array, got shape {data.shape}")
        object.__setattr__(self, "data", _freeze(data))

    @classmethod
    def from_mono(cls, samples: np.ndarray, sample_rate: int) -> "MultichannelAudio":
        return cls(np.asarray(samples)[np.newaxis, :], sample_rate)

    @property
    def num_channels(self) -> int:
        return self.data.shape[0]

    @property
    def num_samples(self) -> int:
        return self.data.shape[1]

    @property
    def duration(self) -> float:
        return self.num_samples / self.sample_rate

    def channel(self, index: int) -> np.ndarray:
        return self.data[index]


@dataclass(frozen=True)
class Spectrogram:
    """Immutable complex STFT data, shape (channels, frames, bins)."""

    data: np.ndarray
    cfg: StftConfig = field(default_factory=StftConfig)

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim == 2:
            data = data[np.newaxis]
        if data.ndim != 3:
            raise ValueError(f"expected (channels, frames, bins), got shape {data.shape}")
        if data.shape[2] != self.cfg.num_bins:
            raise SteerbeamError(
                f"bin count {data.shape[2]} does not match config ({self.cfg.num_bins})"
            )
        object.__setattr__(self, "data", _freeze(data))

    @property
    def num_channels(self) -> int:
        return self.data.shape[0]

    @property
    def num_frames(self) -> int:
        return self.data.shape[1]

    @property
    def num_bins(self) -> int:
        return self.data.shape[2]

    def channel(self, index: int) -> np.ndarray:
        """Complex (frames, bins) view of one channel."""
        return self.data[index]

    def with_channel(self, index: int, channel_data: np.ndarray) -> "Spectrogram":
        """Copy of this spectrogram with one channel replaced."""
        if channel_data.shape != self.data.shape[1:]:
            raise SteerbeamError(
                f"channel shape {channel_data.shape} does not match {self.data.shape[1:]}"
            )
        out = self.data.copy()
        out[index] = channel_data
        return Spectrogram(out, self.cfg)


def bin_frequency(k, cfg: StftConfig):
    """Center frequency in Hz of one-sided bin ``k`` (vectorized over k)."""
    k_arr = np.asarray(k)
    if np.any(k_arr < 0) or np.any(k_arr >= cfg.num_bins):
        raise SteerbeamError(f"bin index out of range [0, {cfg.num_bins}): {k}")
    f = k_arr * cfg.sample_rate / cfg.nfft
    return float(f) if np.isscalar(k) else f


def bin_frequencies(cfg: StftConfig) -> np.ndarray:
    """All one-sided bin center frequencies, shape (K,)."""
    return np.arange(cfg.num_bins) * cfg.sample_rate / cfg.nfft


def _frame_signal(x: np.ndarray, cfg: StftConfig) -> np.ndarray:
    n_frames = cfg.num_frames(len(x))
    view = np.lib.stride_tricks.sliding_window_view(x, cfg.window_len)
    return view[:: cfg.hop][:n_frames]


def stft(audio: MultichannelAudio, cfg: StftConfig | None = None) -> Spectrogram:
    """Analysis transform: sqrt-Hann windowed frames, one-sided FFT.

    Frame ``i`` covers samples ``[i*hop, i*hop + window_len)``; trailing
    samples that do not fill a whole frame are dropped. Output dtype
    follows the input (float32 in, complex64 out).
    """
    cfg = cfg or StftConfig()
    if audio.sample_rate != cfg.sample_rate:
        raise SteerbeamError(
            f"sample rate mismatch: audio {audio.sample_rate} Hz, config {cfg.sample_rate} Hz"
        )
    if audio.num_samples == 0:
        raise SteerbeamError("empty input")
    window = cfg.window().astype(audio.data.dtype, copy=False)
    spec = np.stack(
        [np.fft.rfft(_frame_signal(ch, cfg) * window, n=cfg.nfft) for ch in audio.data]
    )
    if audio.data.dtype == np.float32:
        spec = spec.astype(np.complex64)
    return Spectrogram(spec, cfg)


def istft(spec: Spectrogram, cfg: StftConfig | None = None) -> MultichannelAudio:
    """Synthesis transform: inverse FFT, sqrt-Hann window, overlap-add.

    The analysis/synthesis window pair sums to one wherever two frames
    overlap, so no extra normalization is applied. The first and last
    ``window_len - hop`` samples see only a single frame and come out
    attenuated by the squared window; round-trip identity holds in the
    interior only.
    """
    cfg = cfg or spec.cfg
    if spec.num_bins != cfg.num_bins:
        raise SteerbeamError(
            f"bin count {spec.num_bins} does not match config ({cfg.num_bins})"
        )
    window = cfg.window()
    out_len = (spec.num_frames - 1) * cfg.hop + cfg.window_len
    real_dtype = np.float32 if spec.data.dtype == np.complex64 else np.float64
    out = np.zeros((spec.num_channels, out_len), dtype=real_dtype)
    win = window.astype(real_dtype)
    for ch in range(spec.num_channels):
        frames = np.fft.irfft(spec.data[ch], n=cfg.nfft)[:, : cfg.window_len]
        frames = (frames * win).astype(real_dtype)
        for i in range(spec.num_frames):
            out[ch, i * cfg.hop : i * cfg.hop + cfg.window_len] += frames[i]
    return MultichannelAudio(out, cfg.sample_rate)
