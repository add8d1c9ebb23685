"""WebSocket control service for live steering.

One server hosts one session: load a scene, start clocked playback of the
pre-rendered mixture through the streaming pipeline, steer the region of
interest while it runs, and watch per-source power reduction arrive at
10 Hz. Boundary updates are computed server-side so every client renders
the same geometry.

Threading: the driver thread owns the pipeline and is never blocked by
clients; a metrics thread reads the energy ring and publishes summaries;
command handling is serialized by one lock. Each client has a bounded
queue whose overflow drops metrics messages only, never state messages,
and never reorders. A steer acknowledgment is enqueued before the new
steering vector is armed, so it always precedes metrics computed under
the new angle.
"""

from __future__ import annotations

import asyncio
import json
import queue
import threading
import time
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from starlette.concurrency import run_in_threadpool

from .dsp import StftConfig, stft
from .errors import SceneError, SteerbeamError, SteeringError
from .geometry import ArrayGeometry, Roi, linear_boundaries, steered_boundaries
from .metrics import si_sdr
from .scene import RenderedScene, Scene, load_scene, render_scene, scene_from_dict
from .separation import StreamingPipeline

PROTOCOL_VERSION = 1
METRICS_INTERVAL_S = 0.1
PR_WINDOW_S = 0.5
CLIENT_QUEUE_LIMIT = 64


@dataclass
class _Subscriber:
    q: queue.Queue

    def send(self, msg: dict, droppable: bool = False) -> None:
        if droppable and self.q.qsize() >= CLIENT_QUEUE_LIMIT:
            return
        self.q.put(msg)


class SteeringSession:
    """State machine behind the /session endpoint (usable headless too)."""

    def __init__(self, roi: Roi = Roi(), geom: ArrayGeometry = ArrayGeometry(),
                 stft_cfg: StftConfig = StftConfig(), pace: float = 1.0,
                 scene_dir: str = "."):
        self.roi = roi
        self.geom = geom
        self.cfg = stft_cfg
        self.pace = pace
        self.scene_dir = Path(scene_dir)
        self.status = "idle"
        self.gamma_deg = 0.0
        self.rendered: RenderedScene | None = None
        self.summary: dict | None = None
        self._cmd_lock = threading.Lock()
        self._subscribers: list[_Subscriber] = []
        self._sub_lock = threading.Lock()
        self._pipeline: StreamingPipeline | None = None
        self._stop_event = threading.Event()
        self._finish_lock = threading.Lock()
        self._driver: threading.Thread | None = None
        self._metrics_thread: threading.Thread | None = None
        window_frames = int(PR_WINDOW_S * stft_cfg.sample_rate / stft_cfg.hop)
        self._energy_ring: deque = deque(maxlen=window_frames)
        self._stem_spectra: np.ndarray | None = None
        self._segments: list[tuple[int, float]] = []
        self._out_chunks: list[np.ndarray] = []

    # ------------------------------------------------------------------
    # pub/sub
    # ------------------------------------------------------------------

    def subscribe(self) -> queue.Queue:
        """Register a client; it immediately receives a full snapshot."""
        sub = _Subscriber(queue.Queue())
        with self._sub_lock:
            self._subscribers.append(sub)
        sub.send(self._state_message())
        sub.send(self._boundaries_message())
        return sub.q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._sub_lock:
            self._subscribers = [s for s in self._subscribers if s.q is not q]

    def _broadcast(self, msg: dict, droppable: bool = False) -> None:
        with self._sub_lock:
            subs = list(self._subscribers)
        for sub in subs:
            sub.send(msg, droppable)

    # ------------------------------------------------------------------
    # message construction
    # ------------------------------------------------------------------

    def _state_message(self) -> dict:
        scene_info = None
        if self.rendered is not None:
            scene = self.rendered.scene
            scene_info = {
                "duration_s": self.rendered.mixture.duration,
                "room": {"kind": scene.room.kind},
                "sources": [
                    {"angle_deg": round(a, 2), "role": s.role}
                    for s, a in zip(scene.sources, self.rendered.source_angles_deg)
                ],
            }
        msg = {"v": PROTOCOL_VERSION, "type": "state", "status": self.status,
               "gamma_deg": self.gamma_deg, "scene": scene_info}
        if self.summary is not None:
            msg["summary"] = self.summary
        return msg

    def _boundaries_message(self) -> dict:
        eq = steered_boundaries(self.roi, self.gamma_deg)
        lin = linear_boundaries(self.roi, self.gamma_deg)
        saturated = [s for s, flag in (("left", eq.saturated_left),
                                       ("right", eq.saturated_right)) if flag]
        return {
            "v": PROTOCOL_VERSION, "type": "boundaries", "gamma_deg": self.gamma_deg,
            "eq12": {"phi_l": round(eq.phi_left_deg, 3), "phi_r": round(eq.phi_right_deg, 3),
                     "saturated": saturated,
                     "mirrored": [round(v, 3) for v in eq.mirrored]},
            "linear": {"phi_l": round(lin[0], 3), "phi_r": round(lin[1], 3)},
        }

    @staticmethod
    def _error(msg: str) -> dict:
        return {"v": PROTOCOL_VERSION, "type": "error", "msg": msg}

    # ------------------------------------------------------------------
    # command handling (serialized)
    # ------------------------------------------------------------------

    def handle(self, msg: dict) -> None:
        """Dispatch one client message; replies go to all subscribers."""
        if not isinstance(msg, dict) or "type" not in msg:
            self._broadcast(self._error("message must be an object with a 'type'"))
            return
        with self._cmd_lock:
            kind = msg["type"]
            try:
                if kind == "steer":
                    self._handle_steer(msg)
                elif kind == "load_scene":
                    self._handle_load(msg)
                elif kind == "start":
                    self._handle_start()
                elif kind == "stop":
                    self._handle_stop()
                else:
                    self._broadcast(self._error(f"unknown message type {kind!r}"))
            except SteerbeamError as e:
                self._broadcast(self._error(str(e)))
                self._broadcast(self._state_message())
                self._broadcast(self._boundaries_message())

    def _handle_steer(self, msg: dict) -> None:
        gamma = float(msg.get("gamma_deg", 0.0))
        theta2 = self.roi.center_deg - gamma
        if not 0.0 < theta2 < 180.0:
            raise SteeringError(
                f"gamma {gamma} deg puts the steered center at {theta2} deg, outside (0, 180)"
            )
        # acknowledge before arming: no metrics under the new angle can
        # enter any queue ahead of this message
        self.gamma_deg = gamma
        self._broadcast(self._boundaries_message())
        if self._pipeline is not None:
            self._pipeline.set_steering(gamma)
            if self.status == "running":
                self._segments.append((len(self._out_chunks), gamma))

    def _handle_load(self, msg: dict) -> None:
        if self.status == "running":
            raise SceneError("cannot load a scene while running; stop first")
        spec = msg.get("scene")
        if isinstance(spec, str):
            scene = load_scene(self.scene_dir / spec)
        elif isinstance(spec, dict):
            scene = scene_from_dict(spec, base_dir=str(self.scene_dir))
        else:
            raise SceneError("load_scene needs a 'scene' object or path string")
        self.rendered, self._stem_spectra = _prepare(scene, self.geom, self.cfg)
        self.summary = None
        self.status = "idle"
        self._broadcast(self._state_message())
        self._broadcast(self._boundaries_message())

    def _handle_start(self) -> None:
        if self.status == "running":
            raise SceneError("already running")
        if self.rendered is None:
            raise SceneError("no scene loaded")
        self._pipeline = StreamingPipeline(self.roi, self.geom, self.cfg,
                                           gamma_deg=self.gamma_deg)
        self._energy_ring.clear()
        self._out_chunks = []
        self._segments = [(0, self.gamma_deg)]
        self.summary = None
        self._stop_event.clear()
        self.status = "running"
        self._driver = threading.Thread(target=self._drive, daemon=True)
        self._metrics_thread = threading.Thread(target=self._publish_metrics, daemon=True)
        self._broadcast(self._state_message())
        self._driver.start()
        self._metrics_thread.start()

    def _handle_stop(self) -> None:
        if self.status != "running":
            raise SceneError(f"cannot stop in state {self.status!r}")
        self._stop_event.set()
        self._driver.join()
        self._finish_once()

    # ------------------------------------------------------------------
    # driver / metrics threads
    # ------------------------------------------------------------------

    def _drive(self) -> None:
        hop = self.cfg.hop
        fs = self.cfg.sample_rate
        mix = self.rendered.mixture.data.astype(np.float32)
        stem_specs = self._stem_spectra
        n_frames = min(mix.shape[1] // hop, stem_specs.shape[1] + 1)
        start = time.perf_counter()
        for i in range(n_frames):
            if self._stop_event.is_set():
                break
            target = start + (i + 1) * hop / fs / self.pace
            delay = target - time.perf_counter()
            if delay > 0:
                time.sleep(delay)
            out = self._pipeline.process_frame(mix[:, i * hop : (i + 1) * hop])
            if i >= 1:
                self._out_chunks.append(out)
                mask = self._pipeline.last_mask
                frames = stem_specs[:, i - 1]
                e_in = np.sum(np.abs(frames) ** 2, axis=1)
                e_out = np.sum(np.abs(mask[np.newaxis] * frames) ** 2, axis=1)
                self._energy_ring.append((e_in, e_out))
        if not self._stop_event.is_set():
            # natural end of the pre-rendered audio
            self._stop_event.set()
            self._finish_once()

    def _finish_once(self) -> None:
        with self._finish_lock:
            if self.status != "running":
                return
            self.status = "stopped"
            self.summary = self._segment_summary()
            self._broadcast(self._state_message())

    def _segment_summary(self) -> dict:
        hop = self.cfg.hop
        out = (np.concatenate(self._out_chunks)
               if self._out_chunks else np.zeros(0, dtype=np.float32))
        target = self.rendered.role_stems["target"].channel(0)
        segments = []
        bounds = self._segments + [(len(self._out_chunks), None)]
        for (f0, gamma), (f1, _) in zip(bounds[:-1], bounds[1:]):
            s0, s1 = f0 * hop, min(f1 * hop, len(out), len(target))
            entry = {"gamma_deg": gamma, "t_start_s": s0 / self.cfg.sample_rate,
                     "t_end_s": s1 / self.cfg.sample_rate, "si_sdr_db": None}
            if s1 - s0 >= self.cfg.window_len and np.any(target[s0:s1]):
                entry["si_sdr_db"] = round(si_sdr(out[s0:s1], target[s0:s1]), 3)
            segments.append(entry)
        return {"segments": segments}

    def _publish_metrics(self) -> None:
        fs = self.cfg.sample_rate
        hop = self.cfg.hop
        angles = self.rendered.source_angles_deg
        roles = [s.role for s in self.rendered.scene.sources]
        while not self._stop_event.is_set():
            time.sleep(METRICS_INTERVAL_S / self.pace)
            ring = list(self._energy_ring)
            if not ring:
                continue
            e_in = np.sum([r[0] for r in ring], axis=0)
            e_out = np.sum([r[1] for r in ring], axis=0)
            pr = 10.0 * np.log10(np.maximum(e_in, 1e-30) / np.maximum(e_out, 1e-30))
            pr = np.where(e_in > 1e-12, pr, np.nan)
            boundaries = steered_boundaries(self.roi, self.gamma_deg)
            inside = [boundaries.contains(a) for a in angles]
            in_pr = [p for p, i in zip(pr, inside) if i and np.isfinite(p)]
            out_pr = [p for p, i in zip(pr, inside) if not i and np.isfinite(p)]
            delta = (float(np.mean(out_pr) - np.mean(in_pr))
                     if in_pr and out_pr else None)
            t_s = len(self._out_chunks) * hop / fs
            msg = {
                "v": PROTOCOL_VERSION, "type": "metrics", "t_s": round(t_s, 3),
                "per_source": [
                    {"angle_deg": round(a, 2), "role": role,
                     "pr_db": None if not np.isfinite(p) else round(float(p), 2)}
                    for a, role, p in zip(angles, roles, pr)
                ],
                "delta_pr_db": None if delta is None else round(delta, 2),
            }
            self._broadcast(msg, droppable=True)


def _prepare(scene: Scene, geom: ArrayGeometry,
             cfg: StftConfig) -> tuple[RenderedScene, np.ndarray]:
    """Render the scene and precompute per-source reference spectra."""
    rendered = render_scene(scene, geom, cfg.sample_rate)
    spectra = np.stack([
        stft(stem, cfg).channel(0) for stem in rendered.source_stems
    ])
    return rendered, spectra


def build_app(session: SteeringSession, static_dir: str | None = None) -> FastAPI:
    """FastAPI app exposing the session at /session (WebSocket)."""
    app = FastAPI(title="steerbeam control service")
    app.state.session = session

    @app.websocket("/session")
    async def session_endpoint(ws: WebSocket):
        await ws.accept()
        q = session.subscribe()

        async def sender():
            # poll with a timeout so the worker thread winds down promptly
            # when the task is cancelled on disconnect
            while True:
                try:
                    msg = await run_in_threadpool(q.get, True, 0.5)
                except queue.Empty:
                    continue
                await ws.send_text(json.dumps(msg))

        task = asyncio.ensure_future(sender())
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError as e:
                    q.put(session._error(f"invalid JSON: {e.msg}"))
                    continue
                await run_in_threadpool(session.handle, msg)
        except WebSocketDisconnect:
            pass
        finally:
            task.cancel()
            session.unsubscribe(q)

    if static_dir and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="console")
    return app


def serve(host: str = "127.0.0.1", port: int = 8765, scene_path: str | None = None,
          pace: float = 1.0, static_dir: str | None = None,
          roi: Roi = Roi(), geom: ArrayGeometry = ArrayGeometry()) -> None:
    """Run the control service with uvicorn (blocking)."""
    import uvicorn

    session = SteeringSession(roi, geom, pace=pace,
                              scene_dir=str(Path(scene_path).parent) if scene_path else ".")
    if scene_path:
        session.handle({"type": "load_scene", "scene": Path(scene_path).name})
    uvicorn.run(build_app(session, static_dir), host=host, port=port, log_level="warning")
