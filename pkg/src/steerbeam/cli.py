"""Command-line interface.

Angles are degrees on the command line; everything is deterministic given
--seed except RTF timing. Domain errors print one JSON object to stderr
and exit nonzero, so scripts can parse failures.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .dsp import StftConfig, istft, stft
from .errors import SteerbeamError
from .geometry import ArrayGeometry, Roi, SteeringState, steered_boundaries
from .heatmap import DEFAULT_ARRAY_POSE, delta_pr, pr_heatmap
from .metrics import MetricsReport, measure_rtf, separation_report
from .scene import ArrayPose, load_scene, render_scene, validate_mirrored_exclusion
from .separation import (PhaseDifferenceMask, PhaseMaskConfig, StreamingPipeline,
                         UnitMask, separate)
from .wavio import read_wav, write_wav

def _gamma_range(text: str) -> list[float]:
    """Parse '30' or 'start:stop:step' (stop inclusive)."""
    if ":" not in text:
        return [float(text)]
    parts = [float(p) for p in text.split(":")]
    if len(parts) != 3 or parts[2] <= 0:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}")
    start, stop, step = parts
    return list(np.arange(start, stop + step / 2, step))


def _add_geometry_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gamma", type=float, default=0.0, help="steering angle, degrees clockwise")
    p.add_argument("--beta", type=float, default=10.0, help="ROI half width, degrees")
    p.add_argument("--theta1", type=float, default=90.0, help="ROI center, degrees")
    p.add_argument("--d", type=float, default=0.05, help="microphone spacing, meters")


def _geometry(args) -> tuple[Roi, ArrayGeometry]:
    return Roi(args.theta1, args.beta), ArrayGeometry(args.d)


def _estimator(name: str, roi: Roi, geom: ArrayGeometry, cfg: StftConfig,
               kappa: float | None = None):
    if name == "unit":
        return UnitMask()
    mask_cfg = PhaseMaskConfig(concentration=kappa) if kappa else PhaseMaskConfig()
    return PhaseDifferenceMask(roi, geom, mask_cfg, cfg)


def cmd_simulate(args) -> int:
    scene = load_scene(args.scene)
    if args.seed is not None:
        scene = dataclasses.replace(scene, seed=args.seed)
    roi = Roi(args.theta1, args.beta)
    if args.check_mirrored:
        validate_mirrored_exclusion(scene, roi)
    rendered = render_scene(scene, ArrayGeometry(args.d), max_order=args.max_order)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_wav(rendered.mixture, out_dir / "mixture.wav")
    files = {"mixture": "mixture.wav"}
    for role, stem in rendered.role_stems.items():
        write_wav(stem, out_dir / f"{role}.wav")
        files[role] = f"{role}.wav"
    manifest = {
        "seed": scene.seed,
        "sir_db": scene.sir_db,
        "snr_db": scene.snr_db,
        "level_dbfs": scene.level_dbfs,
        "duration_s": rendered.mixture.duration,
        "source_angles_deg": [round(a, 3) for a in rendered.source_angles_deg],
        "files": files,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2))
    print(json.dumps({"out_dir": str(out_dir), **manifest}, indent=2))
    return 0


def cmd_separate(args) -> int:
    audio = read_wav(args.input)
    cfg = StftConfig()
    if audio.sample_rate != cfg.sample_rate:
        raise SteerbeamError(
            f"{args.input}: sample rate {audio.sample_rate} Hz not supported, "
            f"expected {cfg.sample_rate} Hz (no resampler)"
        )
    if audio.num_channels != 2:
        raise SteerbeamError(
            f"{args.input}: expected 2 channels, got {audio.num_channels}"
        )
    roi, geom = _geometry(args)
    estimator = _estimator(args.estimator, roi, geom, cfg, args.kappa)
    steering = SteeringState(args.gamma, roi.center_deg, geom, cfg)
    spec, _ = separate(stft(audio, cfg), estimator, steering)
    separated = istft(spec, cfg).channel(0)
    write_wav(type(audio)(separated[np.newaxis], cfg.sample_rate), args.out)

    target = None
    if args.target_stem:
        stem = read_wav(args.target_stem)
        target = stem.channel(0)
    report = separation_report(audio, separated, target)
    report.extra["gamma_deg"] = args.gamma
    if args.metrics:
        report.to_json(args.metrics)
    print(json.dumps(report.to_dict(), indent=2))
    return 0


def cmd_boundary(args) -> int:
    roi = Roi(args.theta1, args.beta)
    writer = csv.writer(sys.stdout)
    writer.writerow(["gamma_deg", "phi_l_deg", "phi_r_deg", "saturated"])
    for gamma in args.gamma:
        b = steered_boundaries(roi, gamma)
        flags = "+".join(s for s, f in (("left", b.saturated_left),
                                        ("right", b.saturated_right)) if f) or "none"
        writer.writerow([f"{gamma:g}", f"{b.phi_left_deg:.2f}",
                         f"{b.phi_right_deg:.2f}", flags])
    return 0


def _heatmap_from_args(args, gamma: float):
    roi, geom = _geometry(args)
    cfg = StftConfig()
    dims = tuple(float(v) for v in args.room.split("x"))
    if len(dims) != 3:
        raise SteerbeamError(f"--room expects LxWxH, got {args.room!r}")
    array = ArrayPose(args.array_x if args.array_x is not None else dims[0] / 2,
                      args.array_y if args.array_y is not None else dims[1] / 2,
                      args.orientation)
    estimator = _estimator(args.estimator, roi, geom, cfg, args.kappa)
    return pr_heatmap(dims, array, None, estimator, gamma, roi=roi, geom=geom,
                      stft_cfg=cfg, cell_size=args.cell, t60=args.t60,
                      max_order=args.max_order, probe_duration_s=args.probe_len,
                      seed=args.seed or 0, threads=args.threads)


def cmd_heatmap(args) -> int:
    grid = _heatmap_from_args(args, args.gamma)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid.to_csv(out_dir / "heatmap.csv")
    grid.to_json(out_dir / "heatmap.json")
    dpr = delta_pr(grid, grid.boundaries)
    print(json.dumps({"out_dir": str(out_dir), "gamma_deg": args.gamma,
                      "delta_pr_db": round(dpr, 3)}, indent=2))
    return 0


def cmd_sweep(args) -> int:
    rows = []
    for gamma in args.gammas:
        grid = _heatmap_from_args(args, gamma)
        rows.append((gamma, delta_pr(grid, grid.boundaries)))
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = csv.writer(out)
    writer.writerow(["gamma_deg", "delta_pr_db"])
    for gamma, dpr in rows:
        writer.writerow([f"{gamma:g}", f"{dpr:.3f}"])
    if args.out:
        out.close()
        print(json.dumps({"out": args.out, "rows": len(rows)}))
    return 0


def cmd_rtf(args) -> int:
    roi, geom = _geometry(args)
    cfg = StftConfig()

    def make():
        return StreamingPipeline(roi, geom, cfg, gamma_deg=args.gamma)

    result = measure_rtf(make, clips=args.clips, clip_len_s=args.clip_len,
                         seed=args.seed or 0)
    report = MetricsReport(rtf_mean=result.mean, rtf_std=result.std,
                           extra={"clips": result.clips, "clip_len_s": result.clip_len_s,
                                  "gamma_deg": args.gamma})
    if args.metrics:
        report.to_json(args.metrics)
    print(json.dumps(report.to_dict(), indent=2))
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    roi, geom = _geometry(args)
    serve(host=args.host, port=args.port, scene_path=args.scene, pace=args.pace,
          static_dir=args.static, roi=roi, geom=geom)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="steerbeam",
        description="Two-microphone area-based source separation with a steerable ROI",
    )
    parser.add_argument("--seed", type=int, default=None, help="global random seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="render a scene file to mixture + stems")
    p.add_argument("scene", help="scene JSON file")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--max-order", type=int, default=None, help="cap image-source order")
    p.add_argument("--check-mirrored", action="store_true",
                   help="reject sources inside the mirrored ROI")
    _add_geometry_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("separate", help="separate a 2-channel 16 kHz WAV")
    p.add_argument("input")
    p.add_argument("--out", required=True, help="output WAV (separated channel)")
    p.add_argument("--target-stem", default=None, help="reference stem for SI-SDR")
    p.add_argument("--metrics", default=None, help="write metrics JSON here")
    p.add_argument("--estimator", choices=("phase", "unit"), default="phase")
    p.add_argument("--kappa", type=float, default=None, help="mask concentration override")
    _add_geometry_args(p)
    p.set_defaults(func=cmd_separate)

    p = sub.add_parser("boundary", help="print steered ROI boundaries as CSV")
    p.add_argument("--gamma", type=_gamma_range, default=[0.0],
                   help="angle or start:stop:step range")
    p.add_argument("--beta", type=float, default=10.0)
    p.add_argument("--theta1", type=float, default=90.0)
    p.set_defaults(func=cmd_boundary)

    for name, help_text in (("heatmap", "PR heatmap at one steering angle"),
                            ("sweep", "delta-PR vs steering angle sweep")):
        p = sub.add_parser(name, help=help_text)
        if name == "heatmap":
            p.add_argument("--out-dir", required=True)
        else:
            p.add_argument("--gammas", type=_gamma_range, default=_gamma_range("0:45:5"))
            p.add_argument("--out", default=None, help="CSV output path (default stdout)")
        p.add_argument("--room", default="6x6x3")
        p.add_argument("--t60", type=float, default=None,
                       help="reverberation time; omit for free field")
        p.add_argument("--max-order", type=int, default=None)
        p.add_argument("--cell", type=float, default=0.5, help="grid cell size, meters")
        p.add_argument("--probe-len", type=float, default=2.0, help="probe duration, seconds")
        p.add_argument("--array-x", type=float, default=None)
        p.add_argument("--array-y", type=float, default=None)
        p.add_argument("--orientation", type=float,
                       default=DEFAULT_ARRAY_POSE.orientation_deg,
                       help="array axis orientation in the room, degrees")
        p.add_argument("--estimator", choices=("phase", "unit"), default="phase")
        p.add_argument("--kappa", type=float, default=None)
        p.add_argument("--threads", type=int, default=None)
        _add_geometry_args(p)
        p.set_defaults(func=cmd_heatmap if name == "heatmap" else cmd_sweep)

    p = sub.add_parser("rtf", help="measure the streaming real-time factor")
    p.add_argument("--clips", type=int, default=100)
    p.add_argument("--clip-len", type=float, default=10.0)
    p.add_argument("--metrics", default=None)
    _add_geometry_args(p)
    p.set_defaults(func=cmd_rtf)

    p = sub.add_parser("serve", help="run the live steering control service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--scene", default=None, help="scene JSON to preload")
    p.add_argument("--pace", type=float, default=1.0,
                   help="playback speed factor (1 = real time)")
    p.add_argument("--static", default=None, help="static console assets to serve")
    _add_geometry_args(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SteerbeamError as e:
        json.dump({"error": type(e).__name__, "msg": str(e)}, sys.stderr)
        sys.stderr.write("\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
