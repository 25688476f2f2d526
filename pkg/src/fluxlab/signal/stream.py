"""Frame streams: synthetic source, file replay, socket client, fan-out.

One producer feeds any number of read-only subscribers; every subscriber
sees the same frames in tick order.  Streams end with a typed StreamEnded
event carrying the reason, never by silently stopping.
"""

from __future__ import annotations

import queue
import socket
import socketserver
import threading
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .coil import coil_inductance
from .frames import (GestureTrace, SignalConfig, SignalFrame, decode_frame,
                     encode_frame, raw_code_for_inductance, trace_from_jsonl)
from .gestures import GestureParams, synthesize_gesture


@dataclass(frozen=True)
class StreamEnded:
    reason: str


class Stream:
    """Fan-out buffer between one producer and many subscribers."""

    def __init__(self):
        self._subscribers: list[queue.SimpleQueue] = []
        self._lock = threading.Lock()
        self._ended: StreamEnded | None = None

    def subscribe(self) -> queue.SimpleQueue:
        q: queue.SimpleQueue = queue.SimpleQueue()
        with self._lock:
            if self._ended is not None:
                q.put(self._ended)
            else:
                self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.SimpleQueue) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def publish(self, frame: SignalFrame) -> None:
        with self._lock:
            for q in self._subscribers:
                q.put(frame)

    def end(self, reason: str) -> None:
        with self._lock:
            self._ended = StreamEnded(reason)
            for q in self._subscribers:
                q.put(self._ended)
            self._subscribers.clear()


class SyntheticSource:
    """Resting baseline with injectable gestures, paced or as-fast-as-possible.

    The live studio runs it paced in real time; tests and the service's
    recording path step it frame by frame in simulated tick time.
    """

    def __init__(self, solidity: float = 0.13, seed: int = 0,
                 cfg: SignalConfig = SignalConfig(),
                 params: GestureParams = GestureParams(),
                 realtime: bool = False):
        self.cfg = cfg
        self.params = params
        self.solidity = solidity
        self.realtime = realtime
        self.stream = Stream()
        self._rng = np.random.default_rng(seed)
        self._seed = seed
        self._tick = 0
        self._baseline = coil_inductance(params.base_coil, params.couplings)
        self._gesture_frames: list[SignalFrame] = []
        self._lock = threading.Lock()
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    def inject_gesture(self, label: str, duration_ms: int = 5000) -> None:
        """Queue a deformation gesture to play from the next frame."""
        with self._lock:
            seed = int(self._rng.integers(0, 2 ** 31))
            trace = synthesize_gesture(label, self.solidity,
                                       duration_ms=duration_ms, seed=seed,
                                       params=self.params, cfg=self.cfg)
            self._gesture_frames = list(trace.frames)

    def next_frame(self) -> SignalFrame:
        """Produce one frame at the stream cadence (simulated time)."""
        with self._lock:
            if self._gesture_frames:
                src = self._gesture_frames.pop(0)
                raw = src.raw_code
            else:
                noise = self.cfg.noise_rel * self._baseline \
                    * float(self._rng.standard_normal())
                raw = raw_code_for_inductance(self._baseline + noise,
                                              self.cfg)
            frame = SignalFrame(tick=self._tick, channel=0, raw_code=raw)
            self._tick += int(round(self.cfg.frame_interval_ms))
        self.stream.publish(frame)
        return frame

    def run(self, n_frames: int | None = None) -> None:
        interval = self.cfg.frame_interval_ms / 1000.0
        produced = 0
        while not self._stop.is_set():
            if n_frames is not None and produced >= n_frames:
                break
            self.next_frame()
            produced += 1
            if self.realtime:
                time.sleep(interval)
        self.stream.end("source stopped")

    def start(self, n_frames: int | None = None) -> None:
        self._thread = threading.Thread(target=self.run, args=(n_frames,),
                                        daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=5)


class ReplaySource:
    """Replays a recorded trace file, preserving original tick spacing."""

    def __init__(self, path: str | Path, realtime: bool = False):
        self.trace = trace_from_jsonl(path)
        self.realtime = realtime
        self.stream = Stream()

    def run(self) -> None:
        prev_tick = None
        for frame in self.trace.frames:
            if self.realtime and prev_tick is not None:
                time.sleep(max(0.0, (frame.tick - prev_tick) / 1000.0))
            prev_tick = frame.tick
            self.stream.publish(frame)
        self.stream.end("end of file")


class SocketSource:
    """Reads the line protocol from a TCP endpoint (serial-link emulation)."""

    def __init__(self, host: str, port: int):
        self.host = host
        self.port = port
        self.stream = Stream()

    def run(self) -> None:
        try:
            with socket.create_connection((self.host, self.port)) as sock:
                buf = b""
                while True:
                    chunk = sock.recv(4096)
                    if not chunk:
                        self.stream.end("remote closed")
                        return
                    buf += chunk
                    while b"\n" in buf:
                        line, buf = buf.split(b"\n", 1)
                        if line.strip():
                            self.stream.publish(decode_frame(line))
        except OSError as exc:
            self.stream.end(f"socket error: {exc}")


def stream_source(config: dict):
    """Build a source from a config mapping: {kind: synthetic|replay|socket}."""
    kind = config.get("kind", "synthetic")
    if kind == "synthetic":
        return SyntheticSource(
            solidity=config.get("solidity", 0.13),
            seed=config.get("seed", 0),
            realtime=config.get("realtime", False))
    if kind == "replay":
        return ReplaySource(config["path"],
                            realtime=config.get("realtime", False))
    if kind == "socket":
        return SocketSource(config.get("host", "127.0.0.1"), config["port"])
    raise ValueError(f"unknown stream source kind {kind!r}")


def serve_frames(trace: GestureTrace, host: str = "127.0.0.1",
                 port: int = 0) -> tuple[socketserver.TCPServer, int]:
    """One-shot TCP server speaking the frame protocol (for demos/tests)."""

    class Handler(socketserver.BaseRequestHandler):
        def handle(self):
            for frame in trace.frames:
                self.request.sendall(encode_frame(frame))

    server = socketserver.TCPServer((host, port), Handler)
    server.allow_reuse_address = True
    thread = threading.Thread(target=server.handle_request, daemon=True)
    thread.start()
    return server, server.server_address[1]
