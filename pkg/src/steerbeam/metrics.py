"""Separation quality and runtime metrics.

Power reduction (PR) is the energy ratio between the unprocessed
reference channel and the separated output, in dB: large outside the
target region and near zero inside is the ideal. SI-SDR is the standard
scale-invariant signal-to-distortion ratio. The real-time factor (RTF) is
processing time over audio duration for the streaming pipeline.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from .dsp import MultichannelAudio
from .errors import SteerbeamError

DB_CAP = 100.0


def power_reduction(y_ref: np.ndarray, t_hat: np.ndarray) -> float:
    """10*log10(||y_ref||^2 / ||t_hat||^2); positive means suppression.

    Capped at +100 dB for an all-zero estimate; an all-zero reference is
    an error (the ratio is meaningless).
    """
    y_ref = np.asarray(y_ref, dtype=np.float64)
    t_hat = np.asarray(t_hat, dtype=np.float64)
    if y_ref.shape != t_hat.shape:
        raise SteerbeamError(f"length mismatch: {y_ref.shape} vs {t_hat.shape}")
    ref_energy = float(np.sum(y_ref**2))
    if ref_energy == 0.0:
        raise SteerbeamError("power reduction undefined for a zero-energy reference")
    out_energy = float(np.sum(t_hat**2))
    if out_energy == 0.0:
        return DB_CAP
    return min(10.0 * np.log10(ref_energy / out_energy), DB_CAP)


def si_sdr(estimate: np.ndarray, reference: np.ndarray) -> float:
    """Scale-invariant signal-to-distortion ratio in dB, capped at +-100.

    Projects the estimate onto the reference; the ratio of projected
    energy to residual energy is invariant to any nonzero rescaling of
    the estimate.
    """
    estimate = np.asarray(estimate, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    if estimate.shape != reference.shape:
        raise SteerbeamError(f"length mismatch: {estimate.shape} vs {reference.shape}")
    ref_energy = float(np.dot(reference, reference))
    if ref_energy == 0.0:
        raise SteerbeamError("SI-SDR undefined for a zero-energy reference")
    alpha = float(np.dot(estimate, reference)) / ref_energy
    target = alpha * reference
    distortion = float(np.sum((target - estimate) ** 2))
    signal = float(np.sum(target**2))
    if distortion == 0.0:
        return DB_CAP
    if signal == 0.0:
        return -DB_CAP
    return float(np.clip(10.0 * np.log10(signal / distortion), -DB_CAP, DB_CAP))


@dataclass
class RtfResult:
    mean: float
    std: float
    clips: int
    clip_len_s: float


def measure_rtf(make_pipeline, clips: int = 100, clip_len_s: float = 10.0,
                seed: int = 0) -> RtfResult:
    """Mean and std of wall-clock processing time over audio duration.

    ``make_pipeline`` is a zero-argument factory (fresh state per clip).
    Input material is seeded white noise, so timing is the only
    nondeterministic output.
    """
    rng = np.random.default_rng(seed)
    rtfs = []
    for _ in range(clips):
        pipeline = make_pipeline()
        fs = pipeline.cfg.sample_rate
        hop = pipeline.cfg.hop
        n_frames = int(clip_len_s * fs) // hop
        frames = (0.1 * rng.standard_normal((n_frames, 2, hop))).astype(np.float32)
        start = time.perf_counter()
        for i in range(n_frames):
            pipeline.process_frame(frames[i])
        elapsed = time.perf_counter() - start
        rtfs.append(elapsed / (n_frames * hop / fs))
    arr = np.asarray(rtfs)
    return RtfResult(float(arr.mean()), float(arr.std()), clips, clip_len_s)


@dataclass
class MetricsReport:
    """Bundle of evaluation results; fields are None until computed.

    DNSMOS-style perceptual scores are reserved for externally supplied
    values and never computed here. Improvement fields are always
    processed minus unprocessed.
    """

    pr_db: float | None = None
    delta_pr_db: float | None = None
    si_sdr_db: float | None = None
    si_sdr_improvement_db: float | None = None
    rtf_mean: float | None = None
    rtf_std: float | None = None
    external_sig: float | None = None
    external_bak: float | None = None
    external_ovrl: float | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        extra = d.pop("extra")
        d.update(extra)
        return d

    def to_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)


def aggregate_reports(reports: list[MetricsReport]) -> dict:
    """Per-field mean and std over a batch of reports (None-safe)."""
    out = {}
    for name in ("pr_db", "delta_pr_db", "si_sdr_db", "si_sdr_improvement_db"):
        values = [getattr(r, name) for r in reports if getattr(r, name) is not None]
        if values:
            out[name] = {"mean": float(np.mean(values)), "std": float(np.std(values))}
    return out


def separation_report(mixture: MultichannelAudio, separated: np.ndarray,
                      target_stem: np.ndarray | None = None) -> MetricsReport:
    """PR of the run, plus SI-SDR against a target stem when available."""
    n = min(mixture.num_samples, len(separated))
    y_ref = mixture.channel(0)[:n]
    report = MetricsReport(pr_db=power_reduction(y_ref, separated[:n]))
    if target_stem is not None:
        m = min(n, len(target_stem))
        report.si_sdr_db = si_sdr(separated[:m], target_stem[:m])
        report.si_sdr_improvement_db = report.si_sdr_db - si_sdr(y_ref[:m], target_stem[:m])
    return report
