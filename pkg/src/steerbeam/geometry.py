"""Steering geometry for a two-microphone uniform linear array.

A far-field source at incident angle theta (measured from the array axis)
reaches the reference microphone d*cos(theta)/c seconds after the second
microphone, giving the inter-microphone phase difference (IPD)

    ipd(theta, f) = 2*pi*f*d*cos(theta)/c.

Throughout the package the IPD of a signal pair is measured as the phase
of channel 2 relative to the reference channel, arg(Y2 * conj(Y1)), which
makes the measured value equal ipd(theta, f) under the delay convention
above. Multiplying channel 2 by the unit-modulus steering vector

    a(k) = exp(j * 2*pi*f_k*(d/c) * (cos(theta1) - cos(theta2)))

adds cos(theta1) - cos(theta2) to the cosine of the apparent arrival
angle, so a source at theta2 = theta1 - gamma presents the IPD of a
source at theta1. A mask estimator tuned for a region of interest (ROI)
around theta1 therefore serves the rotated region around theta2 without
any change, at the O(K) cost of rebuilding a(k).

Because the remapping is a shift in cos-angle space, the steered ROI
boundaries follow an arccos law and the steered region is wider than the
original except at gamma = 0. ``steered_boundaries`` computes the closed
form; ``sweep_membership_oracle`` answers the same question from the raw
IPD relations and is kept deliberately independent of the arccos formula
so the two can check each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dsp import Spectrogram, StftConfig, bin_frequencies
from .errors import SteeringError


@dataclass(frozen=True)
class ArrayGeometry:
    """Two-microphone uniform linear array. Channel 0 is the reference."""

    mic_spacing: float = 0.05
    speed_of_sound: float = 343.0

    num_mics = 2
    reference_channel = 0

    def __post_init__(self):
        if self.mic_spacing <= 0:
            raise ValueError("mic_spacing must be positive")
        if self.speed_of_sound <= 0:
            raise ValueError("speed_of_sound must be positive")

    @property
    def aliasing_frequency(self) -> float:
        """Frequency above which the angle-to-IPD map wraps past +-pi."""
        return self.speed_of_sound / (2.0 * self.mic_spacing)


@dataclass(frozen=True)
class Roi:
    """Angular region of interest: center +- half_width, in degrees.

    Boundaries must stay inside (0, 180); the mirror image across the
    array axis is implied by front-back ambiguity and handled separately.
    """

    center_deg: float = 90.0
    half_width_deg: float = 10.0

    def __post_init__(self):
        if not 0.0 < self.half_width_deg < 90.0:
            raise ValueError(f"half_width_deg must be in (0, 90), got {self.half_width_deg}")
        if not (0.0 < self.center_deg - self.half_width_deg
                and self.center_deg + self.half_width_deg < 180.0):
            raise ValueError(
                f"ROI [{self.center_deg - self.half_width_deg}, "
                f"{self.center_deg + self.half_width_deg}] leaves (0, 180)"
            )

    @property
    def span_deg(self) -> float:
        """Full angular span (twice the half width)."""
        return 2.0 * self.half_width_deg

    @property
    def left_deg(self) -> float:
        return self.center_deg + self.half_width_deg

    @property
    def right_deg(self) -> float:
        return self.center_deg - self.half_width_deg


def ipd_of_angle(theta_deg, f_hz, geom: ArrayGeometry = ArrayGeometry()):
    """Unwrapped inter-microphone phase difference 2*pi*f*d*cos(theta)/c.

    Vectorized over ``theta_deg`` and/or ``f_hz``. May exceed +-pi above
    the aliasing frequency; callers that compare against measured phases
    must wrap it themselves.
    """
    theta = np.radians(np.asarray(theta_deg, dtype=float))
    f = np.asarray(f_hz, dtype=float)
    out = 2.0 * np.pi * f * geom.mic_spacing * np.cos(theta) / geom.speed_of_sound
    return float(out) if out.ndim == 0 else out


def steering_phase(gamma_deg, f_hz, geom: ArrayGeometry = ArrayGeometry(),
                   theta1_deg: float = 90.0):
    """Phase shift applied to channel 2 to steer by ``gamma_deg``.

    Equals ipd(theta1) - ipd(theta2) at the given frequency, with
    theta2 = theta1 - gamma. Adding it to a source's IPD moves the
    apparent arrival from theta2 to theta1.
    """
    theta2_deg = theta1_deg - gamma_deg
    f = np.asarray(f_hz, dtype=float)
    t1, t2 = np.radians(theta1_deg), np.radians(theta2_deg)
    out = (2.0 * np.pi * f * geom.mic_spacing / geom.speed_of_sound) * (np.cos(t1) - np.cos(t2))
    return float(out) if out.ndim == 0 else out


def steering_vector(gamma_deg: float, geom: ArrayGeometry = ArrayGeometry(),
                    cfg: StftConfig | None = None, theta1_deg: float = 90.0) -> np.ndarray:
    """Per-bin unit-modulus steering factors a(k), shape (K,).

    a(0) is exactly 1 (DC carries no phase information) and a(k) reduces
    to exp(-j*2*pi*f_k*(d/c)*cos(theta2)) for the default broadside ROI
    center theta1 = 90 degrees.
    """
    cfg = cfg or StftConfig()
    theta2 = theta1_deg - gamma_deg
    if not 0.0 < theta2 < 180.0:
        raise SteeringError(
            f"steering gamma={gamma_deg} deg puts the target direction at "
            f"{theta2} deg, outside (0, 180)"
        )
    phase = steering_phase(gamma_deg, bin_frequencies(cfg), geom, theta1_deg)
    return np.exp(1j * phase)


@dataclass(frozen=True)
class SteeringState:
    """A validated steering setting plus its precomputed per-bin vector."""

    gamma_deg: float
    theta1_deg: float
    geom: ArrayGeometry
    cfg: StftConfig
    vector: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        vec = steering_vector(self.gamma_deg, self.geom, self.cfg, self.theta1_deg)
        vec.flags.writeable = False
        object.__setattr__(self, "vector", vec)

    @property
    def theta2_deg(self) -> float:
        return self.theta1_deg - self.gamma_deg


def apply_steering(channel2: np.ndarray, vector: np.ndarray) -> np.ndarray:
    """Multiply a (frames, bins) channel by the per-bin steering factors.

    Phase-only: magnitudes are preserved bin by bin.
    """
    channel2 = np.asarray(channel2)
    if channel2.shape[-1] != vector.shape[-1]:
        raise SteeringError(
            f"bin count mismatch: channel has {channel2.shape[-1]}, "
            f"steering vector has {vector.shape[-1]}"
        )
    return channel2 * vector


def measured_ipd(spec: Spectrogram, ref_channel: int = 0, other_channel: int = 1) -> np.ndarray:
    """Frame-averaged per-bin IPD of a two-channel spectrogram, shape (K,).

    Averages the cross-spectrum over frames before taking the angle, which
    weights frames by energy and suppresses estimation noise. Positive
    values mean channel 2 leads the reference.
    """
    cross = np.sum(spec.channel(other_channel) * np.conj(spec.channel(ref_channel)), axis=0)
    return np.angle(cross)


@dataclass(frozen=True)
class SteeredBoundaries:
    """Steered ROI boundary angles in degrees, with saturation flags.

    ``phi_left_deg >= phi_right_deg``; a saturated flag means the arccos
    argument left [-1, 1] and the boundary collapsed to 0 or 180 degrees.
    ``mirrored`` is the reflection of the pair across the array axis.
    """

    phi_left_deg: float
    phi_right_deg: float
    saturated_left: bool
    saturated_right: bool

    @property
    def mirrored(self) -> tuple[float, float]:
        """(left, right) of the mirror-image region, in [180, 360)."""
        return (360.0 - self.phi_right_deg, 360.0 - self.phi_left_deg)

    @property
    def width_deg(self) -> float:
        return self.phi_left_deg - self.phi_right_deg

    def contains(self, angle_deg, include_mirrored: bool = True):
        """Membership of incident angles (degrees, any range) in the region."""
        a = np.asarray(angle_deg, dtype=float) % 360.0
        inside = (self.phi_right_deg <= a) & (a <= self.phi_left_deg)
        if include_mirrored:
            m = 360.0 - a
            inside |= (self.phi_right_deg <= m) & (m <= self.phi_left_deg)
        return bool(inside) if inside.ndim == 0 else inside


def steered_boundaries(roi: Roi, gamma_deg: float) -> SteeredBoundaries:
    """Boundary angles of the ROI after steering by ``gamma_deg``.

    Solves ipd(boundary) + steering_phase == ipd(theta1 +- half_width)
    for the boundary angle: arccos of a shifted cosine. Arguments outside
    [-1, 1] are clamped and flagged; the formula is frequency independent.
    """
    t1 = np.radians(roi.center_deg)
    shift = np.cos(np.radians(roi.center_deg - gamma_deg)) - np.cos(t1)
    arg_left = np.cos(np.radians(roi.left_deg)) + shift
    arg_right = np.cos(np.radians(roi.right_deg)) + shift
    sat_left = not -1.0 <= arg_left <= 1.0
    sat_right = not -1.0 <= arg_right <= 1.0
    phi_left = float(np.degrees(np.arccos(np.clip(arg_left, -1.0, 1.0))))
    phi_right = float(np.degrees(np.arccos(np.clip(arg_right, -1.0, 1.0))))
    return SteeredBoundaries(phi_left, phi_right, sat_left, sat_right)


def linear_boundaries(roi: Roi, gamma_deg: float) -> tuple[float, float]:
    """Naively shifted boundaries (theta1 +- half_width - gamma), clipped.

    The comparison overlay for the arccos-correct boundaries: correct only
    at gamma = 0.
    """
    left = min(max(roi.left_deg - gamma_deg, 0.0), 180.0)
    right = min(max(roi.right_deg - gamma_deg, 0.0), 180.0)
    return (left, right)


def sweep_membership_oracle(phi_deg, roi: Roi, gamma_deg: float,
                            geom: ArrayGeometry = ArrayGeometry(),
                            probe_freq_hz: float = 1000.0):
    """True iff a far-field source at ``phi_deg`` lands in the steered ROI.

    Answers from the additive IPD relation alone: the source's IPD plus
    the steering phase must equal the IPD of some angle inside the
    original ROI. Independent of the arccos boundary formula, so it serves
    as its verification oracle. Only valid below the aliasing frequency,
    where angle and IPD are in bijection. Vectorized over ``phi_deg``.
    """
    if probe_freq_hz >= geom.aliasing_frequency:
        raise SteeringError(
            f"probe frequency {probe_freq_hz} Hz is above the aliasing limit "
            f"{geom.aliasing_frequency:.1f} Hz; membership is ambiguous there"
        )
    ipd_post = ipd_of_angle(phi_deg, probe_freq_hz, geom) + steering_phase(
        gamma_deg, probe_freq_hz, geom, roi.center_deg
    )
    lo = ipd_of_angle(roi.left_deg, probe_freq_hz, geom)
    hi = ipd_of_angle(roi.right_deg, probe_freq_hz, geom)
    inside = (lo <= ipd_post) & (ipd_post <= hi)
    return bool(inside) if np.isscalar(phi_deg) else inside
