"""Deterministic built-in test signals.

The repository ships no speech corpus, so scene synthesis and evaluation
run on seeded noise. Speech-shaped noise approximates a long-term speech
spectrum: flat through the low mids, first-order rolloff (6 dB/octave)
above 500 Hz, and a second-order high-pass at 120 Hz so the energy does
not pile up in the lowest STFT bins where phase carries no direction.
"""

from __future__ import annotations

import numpy as np

SSN_HIGHPASS_HZ = 120.0
SSN_ROLLOFF_HZ = 500.0


def white_noise(duration_s: float, sample_rate: int, seed: int, rms: float = 0.1) -> np.ndarray:
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(int(round(duration_s * sample_rate)))
    return x * (rms / np.sqrt(np.mean(x**2)))


def tone(freq_hz: float, duration_s: float, sample_rate: int,
         amplitude: float = 0.5, phase: float = 0.0) -> np.ndarray:
    t = np.arange(int(round(duration_s * sample_rate))) / sample_rate
    return amplitude * np.sin(2.0 * np.pi * freq_hz * t + phase)


def speech_shaped_noise(duration_s: float, sample_rate: int, seed: int,
                        rms: float = 0.1) -> np.ndarray:
    """Seeded noise with a speech-like magnitude spectrum (see module doc)."""
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * sample_rate))
    x = rng.standard_normal(n)
    spectrum = np.fft.rfft(x)
    f = np.fft.rfftfreq(n, 1.0 / sample_rate)
    hp = (f / SSN_HIGHPASS_HZ) ** 2 / (1.0 + (f / SSN_HIGHPASS_HZ) ** 2)
    lp = 1.0 / np.sqrt(1.0 + (f / SSN_ROLLOFF_HZ) ** 2)
    shaped = np.fft.irfft(spectrum * hp * lp, n=n)
    return shaped * (rms / np.sqrt(np.mean(shaped**2)))


def speech_like(duration_s: float, sample_rate: int, seed: int, rms: float = 0.1,
                activity: float = 0.5, ramp_s: float = 0.02) -> np.ndarray:
    """Speech-shaped noise gated by a random syllable-rate envelope.

    Real speech is sparse in time; two talkers rarely overlap in every
    frame. The envelope draws on/off segment lengths (100..400 ms on,
    scaled pauses for the requested activity) with raised-cosine ramps,
    all from the seed. Useful wherever a separable speech stand-in is
    needed; the long-term spectrum matches ``speech_shaped_noise``.
    """
    rng = np.random.default_rng(seed)
    carrier = speech_shaped_noise(duration_s, sample_rate, rng.integers(2**32))
    n = len(carrier)
    envelope = np.zeros(n)
    pause_scale = (1.0 - activity) / max(activity, 1e-6)
    pos = int(rng.uniform(0.0, 0.2) * sample_rate)
    while pos < n:
        on = int(rng.uniform(0.1, 0.4) * sample_rate)
        envelope[pos : pos + on] = 1.0
        pos += on + int(rng.uniform(0.1, 0.4) * pause_scale * sample_rate)
    ramp = int(ramp_s * sample_rate)
    if ramp > 1:
        kernel = np.hanning(2 * ramp + 1)
        envelope = np.convolve(envelope, kernel / kernel.sum(), mode="same")
    gated = carrier * envelope
    power = np.mean(gated**2)
    if power == 0.0:
        return gated
    return gated * (rms / np.sqrt(power))
