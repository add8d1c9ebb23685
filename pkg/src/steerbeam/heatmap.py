"""Power-reduction heatmaps and steering sweeps.

A probe signal is placed at every grid cell of a room, run through the
separation pipeline at a fixed steering angle, and scored with the PR
metric. The resulting map shows where the pipeline keeps energy (the
steered region) and where it suppresses. ``delta_pr`` collapses a map to
one number, mean PR outside the steered region minus mean PR inside, and
``sweep_delta_pr`` traces that number across steering angles.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dsp import StftConfig, istft, stft
from .errors import SteerbeamError
from .geometry import (ArrayGeometry, Roi, SteeredBoundaries, SteeringState,
                       linear_boundaries, steered_boundaries)
from .metrics import power_reduction
from .scene import (ArrayPose, RoomSpec, _max_range_to_walls, incident_angle_deg,
                    render_from_position)
from .separation import MaskEstimator, PhaseDifferenceMask, separate
from .signals import speech_shaped_noise

MIN_ARRAY_DISTANCE = 0.3
THREADS_ENV = "STEERBEAM_THREADS"

# default measurement pose: room center with the axis rotated off the grid
# (an axis-aligned centered array makes many cell angles coincide, which
# quantizes the grid statistics)
DEFAULT_ARRAY_POSE = ArrayPose(3.0, 3.0, 15.0)


def _worker_count(threads: int | None) -> int:
    if threads is not None:
        return max(1, threads)
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


@dataclass
class HeatmapGrid:
    """PR values on a spatial grid, plus the ROI overlay geometry."""

    xs: np.ndarray
    ys: np.ndarray
    pr_db: np.ndarray
    valid: np.ndarray
    angle_deg: np.ndarray
    inside: np.ndarray
    room_dims: tuple
    cell_size: float
    array: ArrayPose
    boundaries: SteeredBoundaries
    overlays: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def cell_index_nearest(self, angle_deg: float, min_dist: float = 1.0,
                           max_dist: float = 3.0) -> tuple[int, int]:
        """(iy, ix) of the valid cell closest in angle within a distance band."""
        dx = self.xs[None, :] - self.array.x_m
        dy = self.ys[:, None] - self.array.y_m
        dist = np.hypot(dx, dy)
        diff = np.abs((self.angle_deg - angle_deg + 180.0) % 360.0 - 180.0)
        diff = np.where(self.valid & (dist >= min_dist) & (dist <= max_dist), diff, np.inf)
        if not np.isfinite(diff).any():
            raise SteerbeamError("no valid cell in the requested distance band")
        return tuple(np.unravel_index(int(np.argmin(diff)), diff.shape))

    def mean_pr(self, inside: bool) -> float:
        sel = self.valid & (self.inside if inside else ~self.inside)
        if not sel.any():
            raise SteerbeamError("no valid cells on the requested side of the boundary")
        return float(np.mean(self.pr_db[sel]))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["x_m", "y_m", "angle_deg", "pr_db", "inside_roi", "valid"])
            for iy, y in enumerate(self.ys):
                for ix, x in enumerate(self.xs):
                    writer.writerow([
                        f"{x:.3f}", f"{y:.3f}", f"{self.angle_deg[iy, ix]:.2f}",
                        f"{self.pr_db[iy, ix]:.3f}" if self.valid[iy, ix] else "",
                        int(self.inside[iy, ix]), int(self.valid[iy, ix]),
                    ])

    def sidecar(self) -> dict:
        return {"overlays": self.overlays, "meta": self.meta}

    def to_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.sidecar(), f, indent=2)


def _boundary_segments(array: ArrayPose, room_dims, angles_deg) -> list:
    """Rays from the array to the room walls, one per boundary angle
    (plus the mirror ray), as [x0, y0, x1, y1]."""
    segments = []
    for rel in angles_deg:
        for signed in (rel, -rel):
            bearing = array.orientation_deg + signed
            reach = _max_range_to_walls(array.x_m, array.y_m, bearing, room_dims, 0.0)
            if not math.isfinite(reach) or reach <= 0:
                continue
            segments.append([
                array.x_m, array.y_m,
                array.x_m + reach * math.cos(math.radians(bearing)),
                array.y_m + reach * math.sin(math.radians(bearing)),
            ])
    return segments


def roi_overlays(roi: Roi, gamma_deg: float, array: ArrayPose, room_dims) -> dict:
    """Initial, naive-linear, and arccos-correct boundary overlays."""
    eq = steered_boundaries(roi, gamma_deg)
    lin = linear_boundaries(roi, gamma_deg)
    initial = (roi.left_deg, roi.right_deg)
    sat = [side for side, flag in (("left", eq.saturated_left), ("right", eq.saturated_right))
           if flag]
    return {
        "initial": {"angles_deg": list(initial),
                    "segments": _boundary_segments(array, room_dims, initial)},
        "linear": {"angles_deg": list(lin),
                   "segments": _boundary_segments(array, room_dims, lin)},
        "steered": {"angles_deg": [eq.phi_left_deg, eq.phi_right_deg], "saturated": sat,
                    "segments": _boundary_segments(array, room_dims,
                                                   (eq.phi_left_deg, eq.phi_right_deg))},
    }


def _cell_pr(probe: np.ndarray, pos, room: RoomSpec, array: ArrayPose,
             geom: ArrayGeometry, fs: int, estimator: MaskEstimator,
             steering: SteeringState, cfg: StftConfig, max_order: int | None) -> float:
    audio = render_from_position(probe, pos, room, array, geom, fs, max_order)
    spec = stft(audio, cfg)
    separated, _ = separate(spec, estimator, steering)
    t_hat = istft(separated, cfg).channel(0)
    # score the fully overlapped interior so an all-pass mask gives exactly 0 dB
    interior = slice(cfg.window_len, len(t_hat) - cfg.window_len)
    return power_reduction(audio.channel(0)[: len(t_hat)][interior], t_hat[interior])


def pr_heatmap(room_dims=(6.0, 6.0, 3.0), array: ArrayPose | None = None,
               probe: np.ndarray | None = None, estimator: MaskEstimator | None = None,
               gamma_deg: float = 0.0, *, roi: Roi = Roi(),
               geom: ArrayGeometry = ArrayGeometry(), stft_cfg: StftConfig = StftConfig(),
               cell_size: float = 0.5, t60: float | None = None,
               max_order: int | None = None, probe_duration_s: float = 2.0,
               seed: int = 0, threads: int | None = None) -> HeatmapGrid:
    """PR at every grid cell for one steering angle.

    ``t60=None`` means free field; otherwise a shoebox with that decay
    time (``max_order`` caps reflections, None means the full RIR, which
    is slow). The probe defaults to 2 s of seeded speech-shaped noise,
    reused at every cell. Cells closer than 0.3 m to the array are marked
    invalid. Estimators must be stateless across calls, cells run in
    parallel (capped by ``threads`` or the STEERBEAM_THREADS variable).
    Failed cells are marked invalid and the run continues.
    """
    fs = stft_cfg.sample_rate
    if array is None:
        array = (DEFAULT_ARRAY_POSE if tuple(room_dims[:2]) == (6.0, 6.0)
                 else ArrayPose(room_dims[0] / 2, room_dims[1] / 2,
                                DEFAULT_ARRAY_POSE.orientation_deg))
    if probe is None:
        probe = speech_shaped_noise(probe_duration_s, fs, seed)
    estimator = estimator or PhaseDifferenceMask(roi, geom, stft_cfg=stft_cfg)
    steering = SteeringState(gamma_deg, roi.center_deg, geom, stft_cfg)
    room = (RoomSpec("anechoic") if t60 is None
            else RoomSpec("shoebox", tuple(room_dims), t60))
    height = room_dims[2] / 2.0 if t60 is not None else 0.0

    xs = np.arange(cell_size / 2.0, room_dims[0], cell_size)
    ys = np.arange(cell_size / 2.0, room_dims[1], cell_size)
    pr = np.full((len(ys), len(xs)), np.nan)
    valid = np.zeros_like(pr, dtype=bool)
    angles = np.zeros_like(pr)
    errors = []

    def run_cell(iy_ix):
        iy, ix = iy_ix
        pos = (xs[ix], ys[iy], height)
        angles[iy, ix] = incident_angle_deg(pos, array)
        if math.hypot(pos[0] - array.x_m, pos[1] - array.y_m) < MIN_ARRAY_DISTANCE:
            return
        try:
            pr[iy, ix] = _cell_pr(probe, pos, room, array, geom, fs, estimator,
                                  steering, stft_cfg, max_order)
            valid[iy, ix] = True
        except SteerbeamError as e:
            errors.append((iy, ix, str(e)))

    cells = [(iy, ix) for iy in range(len(ys)) for ix in range(len(xs))]
    workers = _worker_count(threads)
    if workers == 1:
        for c in cells:
            run_cell(c)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_cell, cells))

    boundaries = steered_boundaries(roi, gamma_deg)
    inside = boundaries.contains(angles).reshape(angles.shape)
    meta = {
        "gamma_deg": gamma_deg, "roi_center_deg": roi.center_deg,
        "roi_half_width_deg": roi.half_width_deg, "mic_spacing_m": geom.mic_spacing,
        "cell_size_m": cell_size, "t60_s": t60, "seed": seed,
        "probe_duration_s": len(probe) / fs, "cell_errors": errors,
    }
    return HeatmapGrid(xs, ys, pr, valid, angles, inside, tuple(room_dims), cell_size,
                       array, boundaries, roi_overlays(roi, gamma_deg, array, room_dims),
                       meta)


def delta_pr(grid: HeatmapGrid, boundaries: SteeredBoundaries,
             exclude_mirrored: bool = False) -> float:
    """Mean PR outside the boundary region minus mean PR inside.

    Larger is better separation. Cells in the mirrored region count as
    inside by default (a linear pair cannot tell front from back);
    ``exclude_mirrored`` drops them from both sides instead.
    """
    inside = boundaries.contains(grid.angle_deg, include_mirrored=not exclude_mirrored)
    keep = grid.valid.copy()
    if exclude_mirrored:
        front = boundaries.contains(grid.angle_deg, include_mirrored=False)
        mirrored_only = boundaries.contains(grid.angle_deg) & ~front
        keep &= ~mirrored_only
        inside = front
    inside_sel = keep & inside
    outside_sel = keep & ~inside
    if not inside_sel.any() or not outside_sel.any():
        raise SteerbeamError("degenerate grid: need at least one cell on each side")
    return float(np.mean(grid.pr_db[outside_sel]) - np.mean(grid.pr_db[inside_sel]))


def sweep_delta_pr(gammas_deg, **heatmap_kwargs) -> list[tuple[float, float]]:
    """(gamma, delta PR) pairs over a steering sweep with shared settings."""
    results = []
    for gamma in gammas_deg:
        grid = pr_heatmap(gamma_deg=float(gamma), **heatmap_kwargs)
        results.append((float(gamma), delta_pr(grid, grid.boundaries)))
    return results
