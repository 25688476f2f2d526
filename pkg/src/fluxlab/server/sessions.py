"""Per-session design and training state behind the HTTP facade.

A session walks Idle -> MeshLoaded -> Configured -> Streaming ->
Collecting -> Trained -> Deployed; requests that jump the machine get a
409.  All mutation happens under the session lock; the stream producer
and training thread run off-thread and publish progress into the session.
"""

from __future__ import annotations

import itertools
import queue
import threading
import uuid
from dataclasses import dataclass, field

from ..classify import (StablePredictor, TrainConfig, WindowConfig,
                        baseline_normalize, train)
from ..classify.windows import Scaler, trace_features
from ..config import ProjectConfig
from ..signal.frames import GESTURE_LABELS, GestureTrace, SignalFrame
from ..signal.stream import SyntheticSource
from ..structuregen import SegmentSelection


class SessionError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


STATES = ("Idle", "MeshLoaded", "Configured", "Streaming", "Collecting",
          "Trained", "Deployed")


@dataclass
class Session:
    id: str
    config: ProjectConfig
    state: str = "Idle"
    mesh = None
    selection: SegmentSelection | None = None
    elasticity: float = 0.5
    behavior: str = "compression"
    bend_azimuth: float = 0.0
    anchor_width: float = 8.0
    source: SyntheticSource | None = None
    scaler: Scaler | None = None
    collected: dict = field(default_factory=dict)  # label -> [GestureTrace]
    repetitions: dict = field(default_factory=dict)  # label -> rep count
    model = None
    model_scaler: Scaler | None = None
    window_cfg: WindowConfig = field(default_factory=WindowConfig)
    train_progress: dict = field(default_factory=dict)
    train_thread: threading.Thread | None = None
    predictor: StablePredictor | None = None
    latest_prediction: dict | None = None
    lock: threading.RLock = field(default_factory=threading.RLock)
    subscribers: list = field(default_factory=list)  # ws fan-out queues
    feature_tail: list = field(default_factory=list)

    # -- websocket fan-out -------------------------------------------------

    def push(self, message: dict) -> None:
        with self.lock:
            for q in list(self.subscribers):
                q.put_nowait(message)

    def subscribe(self) -> queue.SimpleQueue:
        q: queue.SimpleQueue = queue.SimpleQueue()
        with self.lock:
            self.subscribers.append(q)
        return q

    def unsubscribe(self, q) -> None:
        with self.lock:
            if q in self.subscribers:
                self.subscribers.remove(q)

    # -- state machine -----------------------------------------------------

    def require(self, *allowed: str) -> None:
        if self.state not in allowed:
            raise SessionError(
                409, f"operation needs state in {sorted(allowed)}, "
                     f"session is {self.state}")

    def advance(self, new_state: str) -> None:
        self.state = new_state


class SessionStore:
    def __init__(self, config: ProjectConfig):
        self.config = config
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self) -> Session:
        sid = uuid.uuid4().hex[:12]
        session = Session(id=sid, config=self.config)
        with self._lock:
            self._sessions[sid] = session
        return session

    def get(self, sid: str) -> Session:
        with self._lock:
            session = self._sessions.get(sid)
        if session is None:
            raise SessionError(404, f"no session {sid}")
        return session


# -- operations the app routes call -----------------------------------------


def attach_stream(session: Session, solidity: float, seed: int,
                  realtime: bool) -> dict:
    with session.lock:
        session.require("Configured", "MeshLoaded", "Streaming", "Trained",
                        "Deployed")
        if session.source is not None:
            session.source.stop()
        session.source = SyntheticSource(solidity=solidity, seed=seed,
                                         realtime=realtime)
        # the five-second normalization phase precedes any collection
        frames = [session.source.next_frame() for _ in range(500)]
        session.scaler = baseline_normalize(frames, span_s=5.0)
        if session.state in ("Configured", "MeshLoaded"):
            session.advance("Streaming")
        for f in frames[-50:]:
            session.push(_frame_message(f))
    return {"state": session.state, "scaler": session.scaler.to_json()}


def _frame_message(frame: SignalFrame) -> dict:
    return {"type": "frame", "tick": frame.tick,
            "raw": frame.raw_code, "inductance": frame.inductance()}


def collect(session: Session, label: str) -> dict:
    if label not in GESTURE_LABELS:
        raise SessionError(400, f"unknown gesture label {label!r}")
    with session.lock:
        session.require("Streaming", "Collecting", "Trained", "Deployed")
        source = session.source
        if source is None:
            raise SessionError(409, "no stream attached")
        session.advance("Collecting")
        rep = session.repetitions.get(label, 0)
    session.push({"type": "collect_state", "label": label,
                  "phase": "countdown", "repetition": rep + 1})
    source.inject_gesture(label, duration_ms=5000)
    frames = []
    start_tick = None
    for _ in range(500):  # 5 s at 100 Hz, simulated tick time
        frame = source.next_frame()
        if start_tick is None:
            start_tick = frame.tick
        frames.append(frame)
        session.push({**_frame_message(frame), "recording": True})
    session.push({"type": "collect_state", "label": label, "phase": "done",
                  "span_ms": frames[-1].tick - start_tick + 10,
                  "repetition": rep + 1})
    trace = GestureTrace(label=label, frames=tuple(frames),
                         solidity=source.solidity)
    with session.lock:
        session.collected.setdefault(label, []).append(trace)
        session.repetitions[label] = rep + 1
        counts = {k: len(v) for k, v in session.collected.items()}
    return {"label": label, "repetition": rep + 1, "collected": counts}


def clear_data(session: Session) -> dict:
    with session.lock:
        session.collected.clear()
        session.repetitions.clear()
        if session.state in ("Collecting",):
            session.advance("Streaming")
    return {"collected": {}}


def start_training(session: Session, overrides: dict) -> dict:
    with session.lock:
        session.require("Collecting", "Trained", "Deployed")
        if session.train_thread is not None and \
                session.train_thread.is_alive():
            raise SessionError(409, "training already running")
        labels = [lbl for lbl, traces in session.collected.items() if traces]
        if not labels:
            raise SessionError(409, "no collected data to train on")
        traces = list(itertools.chain.from_iterable(
            session.collected.values()))
        cfg = TrainConfig(
            epochs=int(overrides.get("epochs", session.config.train.epochs)),
            learning_rate=session.config.train.learning_rate,
            dropout=session.config.train.dropout,
            l2=session.config.train.l2,
            batch_size=session.config.train.batch_size,
            seed=int(overrides.get("seed", session.config.train.seed)),
            windows_per_trace=session.config.train.windows_per_trace)
        session.train_progress = {"status": "running", "epoch": 0,
                                  "epochs": cfg.epochs}

    def progress(epoch, total, report):
        msg = {"type": "train_progress", "epoch": epoch, "epochs": total,
               "train_acc": report.train_acc[-1],
               "test_acc": report.test_acc[-1]}
        with session.lock:
            session.train_progress.update(
                {"epoch": epoch, "train_acc": report.train_acc[-1],
                 "test_acc": report.test_acc[-1]})
        session.push(msg)

    def run():
        try:
            model, scaler, report, _ = train(
                traces, cfg, scaler=session.scaler, progress=progress)
            with session.lock:
                session.model = model
                session.model_scaler = scaler
                session.predictor = StablePredictor(model)
                session.train_progress["status"] = "done"
                session.advance("Trained")
            session.push({"type": "train_progress", "epoch": cfg.epochs,
                          "epochs": cfg.epochs, "status": "done"})
        except Exception as exc:  # surfaced through /train/progress
            with session.lock:
                session.train_progress = {"status": "failed",
                                          "error": str(exc)}

    thread = threading.Thread(target=run, daemon=True)
    with session.lock:
        session.train_thread = thread
    thread.start()
    return {"status": "started", "epochs": cfg.epochs,
            "n_traces": len(traces)}


def live_predict(session: Session) -> dict:
    with session.lock:
        session.require("Trained", "Deployed")
        if session.model is None:
            raise SessionError(409, "no trained model")
        session.advance("Deployed")
        source = session.source
        scaler = session.model_scaler or session.scaler
        wcfg = session.window_cfg
        predictor = session.predictor
    frames = [source.next_frame() for _ in range(wcfg.window_len)]
    trace = GestureTrace(label="Resting", frames=tuple(frames),
                         solidity=source.solidity)
    feats = trace_features(trace, scaler)
    result = predictor.update(feats)
    with session.lock:
        session.latest_prediction = result
    session.push({"type": "prediction", **result})
    return result
