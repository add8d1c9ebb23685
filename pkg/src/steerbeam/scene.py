"""Seedable two-microphone scene synthesis.

Sources are placed on a horizontal plane around the array and rendered to
two channels either as far-field plane waves, as free-field point sources
(exact per-microphone delays and 1/r gains), or through a shoebox-room
image-source model with uniform Sabine absorption derived from T60.
Mixtures are assembled at exact signal-to-interference and
signal-to-noise ratios measured on the reference channel, then level
normalized; everything is deterministic given the scene seed.
"""

from __future__ import annotations

import json
from functools import lru_cache
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import signals
from .dsp import MultichannelAudio
from .errors import SceneError
from .geometry import ArrayGeometry, Roi
from .wavio import read_wav

SINC_TAPS = 64
SOURCE_ROLES = ("target", "interferer", "noise")
SIGNAL_KINDS = ("white", "ssn", "speech", "tone", "wav")

# paper-style sampler bounds
ROOM_DIMS_MIN = (4.0, 4.0, 2.0)
ROOM_DIMS_MAX = (8.0, 8.0, 4.0)
T60_RANGE = (0.25, 0.7)
ARRAY_WALL_CLEARANCE = 2.0
SOURCE_WALL_MARGIN = 0.2
MIN_SOURCE_DISTANCE = 0.3


@dataclass(frozen=True)
class SignalSpec:
    """What a source emits: a built-in generator or a mono WAV file."""

    kind: str = "ssn"
    path: str | None = None
    freq_hz: float = 440.0
    rms: float = 0.1

    def __post_init__(self):
        if self.kind not in SIGNAL_KINDS:
            raise SceneError(f"unknown signal kind {self.kind!r}, expected one of {SIGNAL_KINDS}")
        if self.kind == "wav" and not self.path:
            raise SceneError("signal kind 'wav' requires a path")


@dataclass(frozen=True)
class SourceSpec:
    """A source with a role and either polar or absolute placement.

    ``angle_deg`` is the incident angle relative to the array axis
    (90 = broadside); polar placement needs ``distance_m`` too.
    """

    role: str
    signal: SignalSpec = field(default_factory=SignalSpec)
    angle_deg: float | None = None
    distance_m: float | None = None
    x_m: float | None = None
    y_m: float | None = None

    def __post_init__(self):
        if self.role not in SOURCE_ROLES:
            raise SceneError(f"unknown source role {self.role!r}, expected one of {SOURCE_ROLES}")
        polar = self.angle_deg is not None and self.distance_m is not None
        absolute = self.x_m is not None and self.y_m is not None
        if not polar and not absolute:
            raise SceneError(
                f"{self.role} source needs either angle_deg+distance_m or x_m+y_m"
            )


@dataclass(frozen=True)
class RoomSpec:
    kind: str = "anechoic"
    dims_m: tuple[float, float, float] = (6.0, 6.0, 3.0)
    t60_s: float = 0.5

    def __post_init__(self):
        if self.kind not in ("anechoic", "shoebox"):
            raise SceneError(f"unknown room kind {self.kind!r}")
        if self.kind == "shoebox":
            if min(self.dims_m) <= 0:
                raise SceneError("room dimensions must be positive")
            if self.t60_s <= 0:
                raise SceneError("t60_s must be positive")


@dataclass(frozen=True)
class ArrayPose:
    x_m: float = 3.0
    y_m: float = 3.0
    orientation_deg: float = 0.0


@dataclass(frozen=True)
class Scene:
    room: RoomSpec = field(default_factory=RoomSpec)
    array: ArrayPose = field(default_factory=ArrayPose)
    sources: tuple[SourceSpec, ...] = ()
    sir_db: float = 5.0
    snr_db: float = 7.0
    level_dbfs: float = -28.0
    seed: int = 0
    duration_s: float = 4.0
    base_dir: str = "."

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))

    def sources_with_role(self, role: str) -> list[SourceSpec]:
        return [s for s in self.sources if s.role == role]


# ---------------------------------------------------------------------------
# placement geometry
# ---------------------------------------------------------------------------

def mic_positions(array: ArrayPose, geom: ArrayGeometry, height_m: float = 0.0) -> np.ndarray:
    """(2, 3) microphone coordinates; row 0 is the reference microphone.

    The reference sits on the negative half of the array axis, so a source
    near the axis direction (incident angle 0) reaches it last.
    """
    o = math.radians(array.orientation_deg)
    axis = np.array([math.cos(o), math.sin(o), 0.0])
    center = np.array([array.x_m, array.y_m, height_m])
    half = 0.5 * geom.mic_spacing
    return np.stack([center - half * axis, center + half * axis])


def source_position(src: SourceSpec, array: ArrayPose, height_m: float = 0.0) -> np.ndarray:
    """Absolute (x, y, z) of a source, resolving polar placement."""
    if src.x_m is not None and src.y_m is not None:
        return np.array([src.x_m, src.y_m, height_m])
    bearing = math.radians(array.orientation_deg + src.angle_deg)
    return np.array([
        array.x_m + src.distance_m * math.cos(bearing),
        array.y_m + src.distance_m * math.sin(bearing),
        height_m,
    ])


def incident_angle_deg(position, array: ArrayPose) -> float:
    """Incident angle of a point relative to the array axis, in [0, 360)."""
    dx = position[0] - array.x_m
    dy = position[1] - array.y_m
    bearing = math.degrees(math.atan2(dy, dx))
    return (bearing - array.orientation_deg) % 360.0


# ---------------------------------------------------------------------------
# rendering primitives
# ---------------------------------------------------------------------------

def fractional_delay(x: np.ndarray, delay_samples: float, pad: int = SINC_TAPS) -> np.ndarray:
    """Exact bandlimited delay via a frequency-domain phase ramp.

    The signal is zero-padded before the transform so the shift is linear,
    not circular; |delay| must stay below ``pad`` samples.
    """
    if abs(delay_samples) >= pad:
        raise SceneError(f"delay {delay_samples:.1f} samples exceeds padding {pad}")
    n = len(x) + 2 * pad
    spectrum = np.fft.rfft(np.concatenate([np.zeros(pad), x, np.zeros(pad)]))
    ramp = np.exp(-2j * np.pi * np.fft.rfftfreq(n) * delay_samples)
    return np.fft.irfft(spectrum * ramp, n=n)[pad : pad + len(x)]


def fft_convolve(x: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Full linear convolution via FFT, length len(x) + len(h) - 1."""
    n = len(x) + len(h) - 1
    nfft = 1 << (n - 1).bit_length()
    return np.fft.irfft(np.fft.rfft(x, nfft) * np.fft.rfft(h, nfft), nfft)[:n]


def _place_taps(rir: np.ndarray, delays: np.ndarray, gains: np.ndarray) -> None:
    """Accumulate Hann-windowed sinc taps at fractional delays (in place)."""
    half = SINC_TAPS // 2
    centers = np.floor(delays).astype(np.int64)
    frac = delays - centers
    for off in range(-half + 1, half + 1):
        t = off - frac
        kernel = np.sinc(t) * 0.5 * (1.0 + np.cos(np.pi * t / half))
        idx = centers + off
        ok = (idx >= 0) & (idx < len(rir))
        if np.any(ok):
            rir += np.bincount(idx[ok], weights=gains[ok] * kernel[ok], minlength=len(rir))


def plane_wave(signal: np.ndarray, theta_deg: float,
               geom: ArrayGeometry = ArrayGeometry(), fs: int = 16000) -> MultichannelAudio:
    """Far-field rendering: equal amplitudes, reference delayed by d*cos(theta)/c."""
    delay = geom.mic_spacing * math.cos(math.radians(theta_deg)) / geom.speed_of_sound * fs
    ref = fractional_delay(np.asarray(signal, dtype=np.float64), delay)
    return MultichannelAudio(np.stack([ref, np.asarray(signal, dtype=np.float64)]), fs)


def sabine_absorption(dims_m, t60_s: float) -> float:
    """Uniform wall energy absorption for the requested decay time."""
    lx, ly, lz = dims_m
    volume = lx * ly * lz
    surface = 2.0 * (lx * ly + lx * lz + ly * lz)
    a = 0.161 * volume / (surface * t60_s)
    if a > 1.0:
        raise SceneError(
            f"T60 = {t60_s} s is unachievable for a {lx} x {ly} x {lz} m room "
            f"(Sabine absorption {a:.2f} > 1)"
        )
    return a


def _direction_sphere(n: int = 4096) -> np.ndarray:
    i = np.arange(n) + 0.5
    polar = np.arccos(1.0 - 2.0 * i / n)
    azimuth = np.pi * (1.0 + 5.0**0.5) * i
    return np.abs(np.stack([np.sin(polar) * np.cos(azimuth),
                            np.sin(polar) * np.sin(azimuth), np.cos(polar)], axis=1))


_SPHERE = _direction_sphere()


@lru_cache(maxsize=256)
def _calibrated_reflection(dims_m: tuple, t60_s: float, c: float) -> float:
    """Wall reflection coefficient whose image-source decay hits T60.

    Sabine's diffuse-field formula underestimates the decay time an image
    lattice actually produces: rays near a wall axis cross few walls and
    dominate the late tail, so a box room rings longer than the formula
    says. This solves the directional remaining-energy model
    EDC(t) ~ integral over directions of beta^(2 N(dir, t)) / rate(dir)
    for the beta whose -60 dB crossing equals T60. Sabine still defines
    achievability (absorption cannot exceed 1).
    """
    sabine_absorption(dims_m, t60_s)  # raises when unachievable
    crossings_per_m = _SPHERE @ (1.0 / np.asarray(dims_m, dtype=float))
    target = 1e-6

    def crossing_time(beta: float) -> float:
        rate = 2.0 * np.log(beta) * c * crossings_per_m
        weight = -1.0 / rate
        goal = target * np.sum(weight)
        lo, hi = 1e-4, 2000.0 * t60_s
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if np.sum(weight * np.exp(rate * mid)) > goal:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    lo, hi = 0.02, 0.9995
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        if crossing_time(mid) < t60_s:
            lo = mid
        else:
            hi = mid
    if lo <= 0.021:
        raise SceneError(f"T60 = {t60_s} s is unachievable for this geometry")
    return 0.5 * (lo + hi)


def image_source_rir(dims_m, src_pos, mic_pos, t60_s: float, fs: int,
                     c: float = 343.0, max_order: int | None = None,
                     rir_seconds: float | None = None) -> np.ndarray:
    """Shoebox impulse response by the image-source method.

    Uniform reflection coefficient sqrt(1 - a) with Sabine absorption a;
    tap gain 1/r so the direct path matches a free-field point source.
    ``max_order`` caps the total reflection count (0 = direct path only).
    """
    lx, ly, lz = dims_m
    src = np.asarray(src_pos, dtype=float)
    mic = np.asarray(mic_pos, dtype=float)
    for p, name in ((src, "source"), (mic, "microphone")):
        if not (0 < p[0] < lx and 0 < p[1] < ly and 0 < p[2] < lz):
            raise SceneError(f"{name} at {tuple(np.round(p, 3))} is outside the room")

    if max_order == 0:
        refl = 0.0
        rir_seconds = rir_seconds or 0.0
    else:
        refl = _calibrated_reflection(tuple(float(v) for v in dims_m), float(t60_s), c)
        rir_seconds = rir_seconds or 1.5 * t60_s
    direct = float(np.linalg.norm(src - mic))
    max_dist = max(c * rir_seconds, direct + 1.0)
    rir_len = int(max_dist / c * fs) + SINC_TAPS

    axes = []
    for s, m, length in zip(src, mic, dims_m):
        count = int(max_dist / (2.0 * length)) + 1
        ms = np.arange(-count, count + 1)
        coords, refl_counts = [], []
        for p in (0, 1):
            coords.append((1 - 2 * p) * s + 2 * ms * length)
            refl_counts.append(np.abs(ms - p) + np.abs(ms))
        axes.append((np.concatenate(coords) - m, np.concatenate(refl_counts)))

    (cx, rx), (cy, ry), (cz, rz) = axes
    dist = np.sqrt(
        cx[:, None, None] ** 2 + cy[None, :, None] ** 2 + cz[None, None, :] ** 2
    ).ravel()
    orders = (rx[:, None, None] + ry[None, :, None] + rz[None, None, :]).ravel()

    keep = dist <= max_dist
    if max_order is not None:
        keep &= orders <= max_order
    dist, orders = dist[keep], orders[keep]
    dist = np.maximum(dist, 1e-3)
    gains = refl**orders / dist if refl > 0 else np.where(orders == 0, 1.0 / dist, 0.0)

    rir = np.zeros(rir_len)
    _place_taps(rir, dist / c * fs, gains)
    return rir


def render_from_position(signal: np.ndarray, src_pos, room: RoomSpec, array: ArrayPose,
                         geom: ArrayGeometry = ArrayGeometry(), fs: int = 16000,
                         max_order: int | None = None) -> MultichannelAudio:
    """Render a mono signal from a point through the room to both mics."""
    height = room.dims_m[2] / 2.0 if room.kind == "shoebox" else 0.0
    mics = mic_positions(array, geom, height)
    src = np.asarray(src_pos, dtype=float)
    if room.kind == "shoebox":
        src = src.copy()
        src[2] = height
        rirs = [
            image_source_rir(room.dims_m, src, m, room.t60_s, fs,
                             geom.speed_of_sound, max_order)
            for m in mics
        ]
    else:
        rirs = []
        for m in mics:
            r = max(float(np.linalg.norm(src - m)), 1e-3)
            rir = np.zeros(int(r / geom.speed_of_sound * fs) + SINC_TAPS)
            _place_taps(rir, np.array([r / geom.speed_of_sound * fs]), np.array([1.0 / r]))
            rirs.append(rir)
    length = len(signal) + max(len(r) for r in rirs) - 1
    out = np.zeros((2, length))
    for ch, rir in enumerate(rirs):
        y = fft_convolve(signal, rir)
        out[ch, : len(y)] = y
    return MultichannelAudio(out, fs)


def resolve_signal(spec: SignalSpec, duration_s: float, fs: int, seed: int,
                   base_dir: str = ".") -> np.ndarray:
    """Materialize a signal spec as a mono float64 array."""
    if spec.kind == "white":
        return signals.white_noise(duration_s, fs, seed, spec.rms)
    if spec.kind == "ssn":
        return signals.speech_shaped_noise(duration_s, fs, seed, spec.rms)
    if spec.kind == "speech":
        return signals.speech_like(duration_s, fs, seed, spec.rms)
    if spec.kind == "tone":
        return signals.tone(spec.freq_hz, duration_s, fs)
    audio = read_wav(Path(base_dir) / spec.path)
    if audio.sample_rate != fs:
        raise SceneError(
            f"{spec.path}: sample rate {audio.sample_rate} Hz does not match scene rate {fs} Hz"
        )
    mono = audio.data[0] if audio.num_channels >= 1 else audio.data
    return np.asarray(mono, dtype=np.float64)


def _source_seed(scene: Scene, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([scene.seed & 0xFFFFFFFF, index])


def render_source(scene: Scene, index: int, geom: ArrayGeometry = ArrayGeometry(),
                  fs: int = 16000, max_order: int | None = None) -> MultichannelAudio:
    """Render one source of a scene to both microphones at unit mix gain."""
    src = scene.sources[index]
    seed = int(_source_seed(scene, index).generate_state(1)[0])
    signal = resolve_signal(src.signal, scene.duration_s, fs, seed, scene.base_dir)
    height = scene.room.dims_m[2] / 2.0 if scene.room.kind == "shoebox" else 0.0
    pos = source_position(src, scene.array, height)
    return render_from_position(signal, pos, scene.room, scene.array, geom, fs, max_order)


def simulate_shoebox(scene: Scene, geom: ArrayGeometry = ArrayGeometry(),
                     fs: int = 16000, max_order: int | None = None) -> list[MultichannelAudio]:
    """Per-source two-channel renderings through the scene's room."""
    return [render_source(scene, i, geom, fs, max_order) for i in range(len(scene.sources))]


def simulate_far_field(src: SourceSpec, geom: ArrayGeometry = ArrayGeometry(),
                       fs: int = 16000, duration_s: float = 4.0,
                       seed: int = 0) -> MultichannelAudio:
    """Anechoic plane-wave rendering of a single source (distance ignored)."""
    if src.angle_deg is None:
        raise SceneError("far-field rendering needs angle placement")
    signal = resolve_signal(src.signal, duration_s, fs, seed)
    return plane_wave(signal, src.angle_deg, geom, fs)


# ---------------------------------------------------------------------------
# mixing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RenderedScene:
    """A mixed scene with everything needed for ground-truth metrics."""

    mixture: MultichannelAudio
    role_stems: dict
    source_stems: tuple
    source_angles_deg: tuple
    scene: Scene


def _energy(x: np.ndarray) -> float:
    return float(np.sum(np.asarray(x, dtype=np.float64) ** 2))


def render_scene(scene: Scene, geom: ArrayGeometry = ArrayGeometry(), fs: int = 16000,
                 max_order: int | None = None) -> RenderedScene:
    """Render, scale, and mix a scene; see ``mix_scene`` for the contract."""
    targets = scene.sources_with_role("target")
    if not targets:
        raise SceneError("scene has no target source")

    renders = [render_source(scene, i, geom, fs, max_order) for i in range(len(scene.sources))]
    length = max(r.num_samples for r in renders)
    per_source = np.zeros((len(renders), 2, length))
    for i, r in enumerate(renders):
        per_source[i, :, : r.num_samples] = r.data

    role_sum = {}
    for role in SOURCE_ROLES:
        idx = [i for i, s in enumerate(scene.sources) if s.role == role]
        if idx:
            role_sum[role] = per_source[idx].sum(axis=0)

    target_energy = _energy(role_sum["target"][0])
    if target_energy == 0.0:
        raise SceneError("target stem is silent, SIR is undefined")

    gains = {"target": 1.0}
    if "interferer" in role_sum:
        e = _energy(role_sum["interferer"][0])
        if e == 0.0:
            raise SceneError("interferer stem is silent, SIR is undefined")
        gains["interferer"] = math.sqrt(target_energy / (e * 10.0 ** (scene.sir_db / 10.0)))
    if "noise" in role_sum:
        e = _energy(role_sum["noise"][0])
        if e == 0.0:
            raise SceneError("noise stem is silent, SNR is undefined")
        gains["noise"] = math.sqrt(target_energy / (e * 10.0 ** (scene.snr_db / 10.0)))

    mixture = sum(gains[role] * stem for role, stem in role_sum.items())
    rms = math.sqrt(np.mean(mixture[0] ** 2))
    level = 10.0 ** (scene.level_dbfs / 20.0) / rms if rms > 0 else 1.0

    source_gain = [level * gains[s.role] for s in scene.sources]
    role_stems = {
        role: MultichannelAudio(level * gains[role] * stem, fs)
        for role, stem in role_sum.items()
    }
    source_stems = tuple(
        MultichannelAudio(source_gain[i] * per_source[i], fs) for i in range(len(renders))
    )
    angles = tuple(
        incident_angle_deg(source_position(s, scene.array), scene.array)
        for s in scene.sources
    )
    return RenderedScene(MultichannelAudio(level * mixture, fs), role_stems,
                         source_stems, angles, scene)


def mix_scene(scene: Scene, geom: ArrayGeometry = ArrayGeometry(), fs: int = 16000,
              max_order: int | None = None):
    """Mix a scene at its requested SIR/SNR and level.

    Interferer and noise role sums are scaled so the reference-channel
    ratios against the target sum hit ``sir_db``/``snr_db`` exactly; the
    final mixture is normalized to ``level_dbfs`` RMS on the reference
    channel and the returned stems carry the same gains, so they sum to
    the mixture and serve as metric ground truth.

    Returns ``(mixture, stems)`` with one stem per present role.
    """
    rendered = render_scene(scene, geom, fs, max_order)
    return rendered.mixture, rendered.role_stems


# ---------------------------------------------------------------------------
# paper-style random scene sampling
# ---------------------------------------------------------------------------

def _in_sector(angle_deg: float, lo: float, hi: float) -> bool:
    return lo <= angle_deg % 360.0 <= hi


def _max_range_to_walls(x: float, y: float, bearing_deg: float, dims_m, margin: float) -> float:
    """Distance from (x, y) along a bearing to the inset room boundary."""
    dx = math.cos(math.radians(bearing_deg))
    dy = math.sin(math.radians(bearing_deg))
    best = math.inf
    if dx > 1e-12:
        best = min(best, (dims_m[0] - margin - x) / dx)
    elif dx < -1e-12:
        best = min(best, (margin - x) / dx)
    if dy > 1e-12:
        best = min(best, (dims_m[1] - margin - y) / dy)
    elif dy < -1e-12:
        best = min(best, (margin - y) / dy)
    return best


def sample_training_scene(seed: int, roi: Roi = Roi(), *, include_noise: bool = True,
                          mirrored_exclusion: bool = True, duration_s: float = 10.0,
                          max_attempts: int = 1000) -> Scene:
    """Draw a random office-like scene: one target in the ROI, one
    interferer outside it, optional noise anywhere.

    Room dimensions are uniform in [4 x 4 x 2, 8 x 8 x 4] m with T60 in
    [0.25, 0.7] s; the array keeps 2 m clearance from every wall. SIR is
    uniform in [0, 10] dB, SNR is N(7, 3) dB, and the mix level is
    N(-28, 10) dBFS. With ``mirrored_exclusion`` no source lands in the
    ROI's mirror image across the array axis.
    """
    rng = np.random.default_rng(seed)
    dims = tuple(rng.uniform(ROOM_DIMS_MIN[i], ROOM_DIMS_MAX[i]) for i in range(3))
    t60 = float(rng.uniform(*T60_RANGE))
    array = ArrayPose(
        x_m=float(rng.uniform(ARRAY_WALL_CLEARANCE, dims[0] - ARRAY_WALL_CLEARANCE)),
        y_m=float(rng.uniform(ARRAY_WALL_CLEARANCE, dims[1] - ARRAY_WALL_CLEARANCE)),
        orientation_deg=float(rng.uniform(0.0, 360.0)),
    )

    roi_lo, roi_hi = roi.right_deg, roi.left_deg
    mirror_lo, mirror_hi = 360.0 - roi.left_deg, 360.0 - roi.right_deg

    def place(rel_angle: float) -> tuple[float, float] | None:
        bearing = array.orientation_deg + rel_angle
        reach = _max_range_to_walls(array.x_m, array.y_m, bearing, dims, SOURCE_WALL_MARGIN)
        if reach <= MIN_SOURCE_DISTANCE:
            return None
        return rel_angle, float(rng.uniform(MIN_SOURCE_DISTANCE, reach))

    def sample_angle(accept) -> tuple[float, float]:
        for _ in range(max_attempts):
            rel = float(rng.uniform(0.0, 360.0))
            if not accept(rel):
                continue
            placed = place(rel)
            if placed:
                return placed
        raise SceneError(f"could not place a source after {max_attempts} attempts")

    # target: inside the ROI proper
    for _ in range(max_attempts):
        rel = float(rng.uniform(roi_lo, roi_hi))
        placed = place(rel)
        if placed:
            target_angle, target_dist = placed
            break
    else:
        raise SceneError(f"could not place the target after {max_attempts} attempts")

    def outside_roi(rel: float) -> bool:
        if _in_sector(rel, roi_lo, roi_hi):
            return False
        if mirrored_exclusion and _in_sector(rel, mirror_lo, mirror_hi):
            return False
        return True

    interferer_angle, interferer_dist = sample_angle(outside_roi)

    sources = [
        SourceSpec("target", SignalSpec("speech"), angle_deg=target_angle,
                   distance_m=target_dist),
        SourceSpec("interferer", SignalSpec("speech"), angle_deg=interferer_angle,
                   distance_m=interferer_dist),
    ]
    if include_noise:
        for _ in range(max_attempts):
            pos = (float(rng.uniform(SOURCE_WALL_MARGIN, dims[0] - SOURCE_WALL_MARGIN)),
                   float(rng.uniform(SOURCE_WALL_MARGIN, dims[1] - SOURCE_WALL_MARGIN)))
            rel = incident_angle_deg(pos, array)
            if math.hypot(pos[0] - array.x_m, pos[1] - array.y_m) <= MIN_SOURCE_DISTANCE:
                continue
            if mirrored_exclusion and _in_sector(rel, mirror_lo, mirror_hi):
                continue
            sources.append(SourceSpec("noise", SignalSpec("white"), x_m=pos[0], y_m=pos[1]))
            break
        else:
            raise SceneError(f"could not place noise after {max_attempts} attempts")

    return Scene(
        room=RoomSpec("shoebox", dims, t60),
        array=array,
        sources=tuple(sources),
        sir_db=float(rng.uniform(0.0, 10.0)),
        snr_db=float(rng.normal(7.0, 3.0)),
        level_dbfs=float(rng.normal(-28.0, 10.0)),
        seed=seed,
        duration_s=duration_s,
    )


def validate_mirrored_exclusion(scene: Scene, roi: Roi) -> None:
    """Raise SceneError naming any source inside the mirrored ROI."""
    lo, hi = 360.0 - roi.left_deg, 360.0 - roi.right_deg
    for i, src in enumerate(scene.sources):
        rel = incident_angle_deg(source_position(src, scene.array), scene.array)
        if _in_sector(rel, lo, hi):
            raise SceneError(
                f"sources[{i}] ({src.role}) at relative angle {rel:.1f} deg "
                f"lies in the mirrored ROI [{lo:.1f}, {hi:.1f}]"
            )


# ---------------------------------------------------------------------------
# JSON scene files
# ---------------------------------------------------------------------------

def _require(d: dict, key: str, ctx: str):
    if key not in d:
        raise SceneError(f"{ctx}: missing required field {key!r}")
    return d[key]


def scene_from_dict(data: dict, base_dir: str = ".") -> Scene:
    """Build a Scene from parsed JSON, with field-level diagnostics."""
    if not isinstance(data, dict):
        raise SceneError("scene file must contain a JSON object")
    room_d = data.get("room", {})
    kind = room_d.get("kind", "anechoic")
    room = RoomSpec(
        kind=kind,
        dims_m=tuple(room_d.get("dims_m", (6.0, 6.0, 3.0))),
        t60_s=float(room_d.get("t60_s", 0.5)),
    )
    array_d = data.get("array", {})
    array = ArrayPose(
        x_m=float(array_d.get("x_m", 3.0)),
        y_m=float(array_d.get("y_m", 3.0)),
        orientation_deg=float(array_d.get("orientation_deg", 0.0)),
    )
    sources = []
    for i, s in enumerate(_require(data, "sources", "scene")):
        ctx = f"sources[{i}]"
        if not isinstance(s, dict):
            raise SceneError(f"{ctx}: expected an object")
        sig_d = s.get("signal", {})
        try:
            sig = SignalSpec(
                kind=sig_d.get("kind", "ssn"),
                path=sig_d.get("path"),
                freq_hz=float(sig_d.get("freq_hz", 440.0)),
                rms=float(sig_d.get("rms", 0.1)),
            )
            sources.append(SourceSpec(
                role=_require(s, "role", ctx),
                signal=sig,
                angle_deg=None if s.get("angle_deg") is None else float(s["angle_deg"]),
                distance_m=None if s.get("distance_m") is None else float(s["distance_m"]),
                x_m=None if s.get("x_m") is None else float(s["x_m"]),
                y_m=None if s.get("y_m") is None else float(s["y_m"]),
            ))
        except SceneError as e:
            raise SceneError(f"{ctx}: {e}") from None
    return Scene(
        room=room,
        array=array,
        sources=tuple(sources),
        sir_db=float(data.get("sir_db", 5.0)),
        snr_db=float(data.get("snr_db", 7.0)),
        level_dbfs=float(data.get("level_dbfs", -28.0)),
        seed=int(data.get("seed", 0)),
        duration_s=float(data.get("duration_s", 4.0)),
        base_dir=base_dir,
    )


def scene_to_dict(scene: Scene) -> dict:
    sources = []
    for s in scene.sources:
        d = {"role": s.role, "signal": {"kind": s.signal.kind}}
        if s.signal.path:
            d["signal"]["path"] = s.signal.path
        if s.signal.kind == "tone":
            d["signal"]["freq_hz"] = s.signal.freq_hz
        if s.angle_deg is not None:
            d["angle_deg"] = s.angle_deg
            d["distance_m"] = s.distance_m
        else:
            d["x_m"] = s.x_m
            d["y_m"] = s.y_m
        sources.append(d)
    room = {"kind": scene.room.kind}
    if scene.room.kind == "shoebox":
        room["dims_m"] = list(scene.room.dims_m)
        room["t60_s"] = scene.room.t60_s
    return {
        "room": room,
        "array": {"x_m": scene.array.x_m, "y_m": scene.array.y_m,
                  "orientation_deg": scene.array.orientation_deg},
        "sources": sources,
        "sir_db": scene.sir_db,
        "snr_db": scene.snr_db,
        "level_dbfs": scene.level_dbfs,
        "seed": scene.seed,
        "duration_s": scene.duration_s,
    }


def load_scene(path) -> Scene:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise SceneError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}")
    return scene_from_dict(data, base_dir=str(path.parent))
