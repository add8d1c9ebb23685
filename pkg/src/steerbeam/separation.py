"""Mask-based separation with inference-time ROI steering.

The pipeline applies the steering vector to channel 2, asks a mask
estimator for a per-bin gain, and multiplies the mask onto the reference
channel. The estimator contract is the plug-in point for learned models;
the built-in ``PhaseDifferenceMask`` is deterministic and works from the
same inter-microphone phase cue the steering vector manipulates: after
steering, in-region sources present the phase signature of the original
ROI, so the estimator never needs to know the steering angle.
"""

from __future__ import annotations

import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .dsp import MultichannelAudio, Spectrogram, StftConfig, bin_frequencies, istft, stft
from .errors import PipelineError
from .geometry import ArrayGeometry, Roi, SteeringState, apply_steering

Q_MAX = 2.0
SILENCE_FLOOR_DBFS = -80.0


@dataclass(frozen=True)
class ComplexMask:
    """Per-bin separation mask, shape (frames, bins), |Q| <= q_max."""

    data: np.ndarray
    q_max: float = Q_MAX

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2:
            raise PipelineError(f"mask must be (frames, bins), got shape {data.shape}")
        peak = float(np.max(np.abs(data))) if data.size else 0.0
        if peak > self.q_max * (1.0 + 1e-6):
            raise PipelineError(f"mask magnitude {peak:.3f} exceeds q_max {self.q_max}")
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @classmethod
    def clamped(cls, data: np.ndarray, q_max: float = Q_MAX) -> "ComplexMask":
        """Clamp magnitudes above q_max while preserving phase."""
        data = np.asarray(data)
        mag = np.abs(data)
        over = mag > q_max
        if np.any(over):
            data = np.where(over, data * (q_max / np.maximum(mag, 1e-30)), data)
        return cls(data, q_max)


class MaskEstimator(ABC):
    """Contract for mask estimators.

    Estimators must be causal: the mask for frame n may depend only on
    frames <= n, so the streaming pipeline can call ``estimate`` one frame
    at a time and get the same masks as an offline pass.
    """

    latency_frames = 0
    required_channels = 2

    @abstractmethod
    def estimate(self, y_ref: np.ndarray, y_steered: np.ndarray) -> np.ndarray:
        """Mask of shape (frames, bins) for aligned (frames, bins) channels."""


@dataclass(frozen=True)
class PhaseMaskConfig:
    """Tuning of the built-in phase-difference mask.

    ``concentration`` sets how fast the gain falls once the observed phase
    difference leaves the admissible window (distance measured in units of
    the window half-width); ``mask_floor`` is the minimum gain, i.e. the
    suppression ceiling. Bins below ``low_bin_cutoff`` pass through
    unmasked since phase carries no usable direction near DC. Above the
    spatial aliasing limit ``wrapped-distance`` scores the wrapped phase
    (grating lobes stay audible, as physics dictates), while
    ``passthrough-above-alias`` leaves those bins untouched.
    """

    concentration: float = 1.0
    mask_floor: float = 0.05
    low_bin_cutoff: int = 2
    aliasing_mode: str = "wrapped-distance"

    def __post_init__(self):
        if self.concentration <= 0:
            raise ValueError("concentration must be positive")
        if not 0.0 <= self.mask_floor < 1.0:
            raise ValueError("mask_floor must be in [0, 1)")
        if self.aliasing_mode not in ("wrapped-distance", "passthrough-above-alias"):
            raise ValueError(f"unknown aliasing_mode {self.aliasing_mode!r}")


class PhaseDifferenceMask(MaskEstimator):
    """The built-in deterministic estimator.

    Per bin, the observed inter-channel phase difference is compared
    against the window of phase differences a source inside the unsteered
    ROI would produce, [-w, w] with w = 2*pi*f*d*sin(half_width)/c. The
    gain is 1 inside the window and decays as
    exp(-concentration * ((|phase| - w)/w)^2) outside, floored at
    mask_floor. Channel 2 must already be steered; steering maps
    in-region sources into exactly this window, so the estimator is
    steering-agnostic. Bins whose reference magnitude is below -80 dBFS
    get gain 1 (nothing to suppress). Stateless, hence trivially causal.
    """

    def __init__(self, roi: Roi = Roi(), geom: ArrayGeometry = ArrayGeometry(),
                 cfg: PhaseMaskConfig = PhaseMaskConfig(),
                 stft_cfg: StftConfig = StftConfig()):
        self.roi = roi
        self.geom = geom
        self.cfg = cfg
        self.stft_cfg = stft_cfg
        f = bin_frequencies(stft_cfg)
        half_width = np.minimum(
            2.0 * np.pi * f * geom.mic_spacing
            * np.sin(np.radians(roi.half_width_deg)) / geom.speed_of_sound,
            np.pi,
        )
        self._half_width = half_width
        self._inv_half_width = np.where(half_width > 0, 1.0 / np.maximum(half_width, 1e-30), 0.0)
        self._passthrough = np.zeros(stft_cfg.num_bins, dtype=bool)
        self._passthrough[: cfg.low_bin_cutoff] = True
        if cfg.aliasing_mode == "passthrough-above-alias":
            self._passthrough[f > geom.aliasing_frequency] = True
        # full scale per bin: peak magnitude of a 0 dBFS sine after windowing
        self._silence_threshold = (
            np.sum(stft_cfg.window()) / 2.0 * 10.0 ** (SILENCE_FLOOR_DBFS / 20.0)
        )

    def estimate(self, y_ref: np.ndarray, y_steered: np.ndarray) -> np.ndarray:
        y_ref = np.atleast_2d(np.asarray(y_ref))
        y_steered = np.atleast_2d(np.asarray(y_steered))
        if y_ref.shape != y_steered.shape:
            raise PipelineError(f"channel shapes differ: {y_ref.shape} vs {y_steered.shape}")
        if y_ref.shape[1] != self.stft_cfg.num_bins:
            raise PipelineError(
                f"bin count {y_ref.shape[1]} does not match config ({self.stft_cfg.num_bins})"
            )
        phase = np.abs(np.angle(y_steered * np.conj(y_ref)))
        excess = np.maximum(phase - self._half_width, 0.0) * self._inv_half_width
        mask = np.maximum(np.exp(-self.cfg.concentration * excess**2), self.cfg.mask_floor)
        mask[:, self._passthrough] = 1.0
        mask[np.abs(y_ref) <= self._silence_threshold] = 1.0
        return mask


def estimate_phase_mask(y_ref: np.ndarray, y_steered: np.ndarray, roi: Roi,
                        geom: ArrayGeometry = ArrayGeometry(),
                        cfg: PhaseMaskConfig = PhaseMaskConfig(),
                        stft_cfg: StftConfig = StftConfig()) -> np.ndarray:
    """Functional form of PhaseDifferenceMask for offline use."""
    return PhaseDifferenceMask(roi, geom, cfg, stft_cfg).estimate(y_ref, y_steered)


class UnitMask(MaskEstimator):
    """All-pass estimator: output equals the reference channel."""

    def estimate(self, y_ref, y_steered):
        return np.ones_like(np.asarray(y_ref), dtype=float)


def separate(mixture: Spectrogram, estimator: MaskEstimator,
             steering: SteeringState) -> tuple[Spectrogram, ComplexMask]:
    """Offline separation: steer channel 2, estimate, mask channel 1.

    The reference channel is never phase-shifted; the returned spectrogram
    has a single channel Q * Y_ref.
    """
    if mixture.num_channels != 2:
        raise PipelineError(f"expected a 2-channel mixture, got {mixture.num_channels}")
    y_ref = mixture.channel(0)
    y_steered = apply_steering(mixture.channel(1), steering.vector)
    try:
        raw = estimator.estimate(y_ref, y_steered)
    except Exception as e:
        raise PipelineError(f"mask estimator failed: {e}") from e
    mask = ComplexMask.clamped(raw)
    return Spectrogram((mask.data * y_ref)[np.newaxis], mixture.cfg), mask


def separate_audio(audio: MultichannelAudio, estimator: MaskEstimator,
                   steering: SteeringState,
                   stft_cfg: StftConfig | None = None) -> tuple[MultichannelAudio, ComplexMask]:
    """Convenience wrapper: audio in, separated audio out."""
    cfg = stft_cfg or steering.cfg
    spec, mask = separate(stft(audio, cfg), estimator, steering)
    return istft(spec, cfg), mask


class StreamingPipeline:
    """Causal frame-by-frame separation with swappable steering.

    Feed hop-sized two-channel frames; each call returns one hop of
    separated audio with an algorithmic latency of window_len - hop
    samples (the first call primes the analysis buffer and emits silence).
    ``set_steering`` may be called from any thread; the new vector takes
    effect at the next frame boundary, never mid-frame, and a rejected
    angle leaves the running state untouched.
    """

    def __init__(self, roi: Roi = Roi(), geom: ArrayGeometry = ArrayGeometry(),
                 stft_cfg: StftConfig = StftConfig(),
                 estimator: MaskEstimator | None = None, gamma_deg: float = 0.0):
        self.roi = roi
        self.geom = geom
        self.cfg = stft_cfg
        self.estimator = estimator or PhaseDifferenceMask(roi, geom, stft_cfg=stft_cfg)
        self._window = stft_cfg.window().astype(np.float32)
        self._in_buf = np.zeros((2, stft_cfg.window_len), dtype=np.float32)
        self._out_buf = np.zeros(stft_cfg.window_len, dtype=np.float32)
        self._frames_in = 0
        self._lock = threading.Lock()
        self._steering = SteeringState(gamma_deg, roi.center_deg, geom, stft_cfg)
        self._pending: SteeringState | None = None
        self.last_mask: np.ndarray | None = None

    @property
    def latency_samples(self) -> int:
        return self.cfg.window_len - self.cfg.hop

    @property
    def gamma_deg(self) -> float:
        """The last acknowledged steering angle."""
        with self._lock:
            return (self._pending or self._steering).gamma_deg

    def set_steering(self, gamma_deg: float) -> float:
        """Swap in a new steering vector at the next frame boundary.

        Validates first and raises SteeringError without touching the
        running state if theta2 would leave (0, 180). Returns the
        acknowledged angle.
        """
        state = SteeringState(gamma_deg, self.roi.center_deg, self.geom, self.cfg)
        with self._lock:
            self._pending = state
        return gamma_deg

    def process_frame(self, frame: np.ndarray) -> np.ndarray:
        """Process one hop of 2-channel input, return one hop of output."""
        frame = np.asarray(frame)
        hop = self.cfg.hop
        if frame.shape != (2, hop):
            raise PipelineError(f"expected frame shape (2, {hop}), got {frame.shape}")

        self._in_buf[:, :-hop] = self._in_buf[:, hop:]
        self._in_buf[:, -hop:] = frame
        self._frames_in += 1
        if self._frames_in < 2:
            return np.zeros(hop, dtype=np.float32)

        with self._lock:
            if self._pending is not None:
                self._steering = self._pending
                self._pending = None
            vector = self._steering.vector

        spectra = np.fft.rfft(self._in_buf * self._window, n=self.cfg.nfft)
        y_ref = spectra[0]
        y_steered = spectra[1] * vector
        mask = self.estimator.estimate(y_ref[np.newaxis], y_steered[np.newaxis])[0]
        mag = np.abs(mask)
        if np.any(mag > Q_MAX):
            mask = np.where(mag > Q_MAX, mask * (Q_MAX / mag), mask)
        self.last_mask = mask

        synth = np.fft.irfft(mask * y_ref, n=self.cfg.nfft)[: self.cfg.window_len]
        self._out_buf += (synth * self._window).astype(np.float32)
        out = self._out_buf[:hop].copy()
        self._out_buf[:-hop] = self._out_buf[hop:]
        self._out_buf[-hop:] = 0.0
        return out

    def process(self, audio: MultichannelAudio) -> np.ndarray:
        """Stream a whole signal through, returning the separated samples.

        Output is re-aligned with the input start: the priming hop of
        silence is dropped and the pending overlap tail is drained, so the
        result matches the offline path sample for sample in the interior.
        One-shot convenience; construct a fresh pipeline per signal.
        """
        hop = self.cfg.hop
        data = audio.data.astype(np.float32)
        n_hops = data.shape[1] // hop
        out = []
        for i in range(n_hops):
            out.append(self.process_frame(data[:, i * hop : (i + 1) * hop]))
        out.append(self._out_buf[:hop].copy())
        return np.concatenate(out[1:])
