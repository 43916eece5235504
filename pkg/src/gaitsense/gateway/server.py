"""Streaming gateway: node ingestion, sliding-window inference, event fan-out.

One thread per node connection, one per terminal, one inference worker.
All hand-offs go through bounded structures: per-node ring buffers keep
only the newest window (drop-oldest), and a slow terminal whose queue
fills up is disconnected so the others never stall.
"""

from __future__ import annotations

import collections
import json
import logging
import os
import queue
import socket
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from ..errors import GaitsenseError, ProtocolError
from ..nn.model import load_model
from ..pipeline import classify, heart_rate, identify
from ..signal import MultiChannelRecord, Signal
from .framing import FrameReader, GpsLine, HeartSample, SensorPacket
from .nmea import parse_nmea

log = logging.getLogger("gaitsense.gateway")

__all__ = ["GatewayConfig", "Gateway"]


@dataclass
class GatewayConfig:
    """Gateway ports, model locations, and streaming geometry.

    Ports may be 0 to bind ephemerally (the bound values are exposed on
    the running Gateway). Environment variables GAITSENSE_NODE_PORT and
    GAITSENSE_TERMINAL_PORT override the configured ports.
    """

    node_port: int = 7701
    terminal_port: int = 7702
    model_path: str = "model.bin"
    identity_model_path: str | None = None
    host: str = "127.0.0.1"
    sample_rate_hz: float = 100.0
    window_s: float = 5.0
    stride_s: float = 1.0
    queue_bound: int = 1024
    status_interval_s: float = 10.0
    denoise: bool = True

    @classmethod
    def from_json(cls, path) -> "GatewayConfig":
        with open(path) as fh:
            data = json.load(fh)
        cfg = cls(**data)
        return cfg

    def apply_env(self) -> "GatewayConfig":
        if "GAITSENSE_NODE_PORT" in os.environ:
            self.node_port = int(os.environ["GAITSENSE_NODE_PORT"])
        if "GAITSENSE_TERMINAL_PORT" in os.environ:
            self.terminal_port = int(os.environ["GAITSENSE_TERMINAL_PORT"])
        return self


class _SensorState:
    def __init__(self, window_samples: int):
        self.buffer = collections.deque(maxlen=2 * window_samples)
        self.last_seq = -1


class Gateway:
    """The running service; use start()/stop() or as a context manager."""

    def __init__(self, config: GatewayConfig):
        self.config = config
        if not os.path.exists(config.model_path):
            raise GaitsenseError(f"model file missing: {config.model_path}")
        self.model = load_model(config.model_path)
        self.identity_model = (
            load_model(config.identity_model_path)
            if config.identity_model_path and os.path.exists(config.identity_model_path)
            else None
        )
        self.window_samples = int(round(config.window_s * config.sample_rate_hz))
        self._sensors: dict[int, _SensorState] = {}
        self._heart = collections.deque(maxlen=4 * self.window_samples)
        self._terminals: dict[int, queue.Queue] = {}
        self._lock = threading.Lock()
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []
        self._next_conn_id = 0
        self._event_seq = 0
        self._last_publish = 0.0
        self.node_port = None
        self.terminal_port = None
        self.events_published = 0

    # -- lifecycle ---------------------------------------------------------

    def start(self):
        self._node_sock = self._listen(self.config.node_port)
        self._term_sock = self._listen(self.config.terminal_port)
        self.node_port = self._node_sock.getsockname()[1]
        self.terminal_port = self._term_sock.getsockname()[1]
        self._last_publish = time.monotonic()
        for target, args in (
            (self._accept_loop, (self._node_sock, self._handle_node)),
            (self._accept_loop, (self._term_sock, self._handle_terminal)),
            (self._inference_loop, ()),
        ):
            t = threading.Thread(target=target, args=args, daemon=True)
            t.start()
            self._threads.append(t)
        log.info("gateway up: nodes on %d, terminals on %d",
                 self.node_port, self.terminal_port)
        return self

    def stop(self):
        self._stop.set()
        for sock in (self._node_sock, self._term_sock):
            try:
                sock.close()
            except OSError:
                pass
        for t in self._threads:
            t.join(timeout=2.0)

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()

    def _listen(self, port: int) -> socket.socket:
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        sock.bind((self.config.host, port))
        sock.listen(16)
        sock.settimeout(0.25)
        return sock

    def _accept_loop(self, sock: socket.socket, handler):
        while not self._stop.is_set():
            try:
                conn, _ = sock.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            with self._lock:
                conn_id = self._next_conn_id
                self._next_conn_id += 1
            t = threading.Thread(target=handler, args=(conn, conn_id), daemon=True)
            t.start()
            self._threads.append(t)

    # -- node ingestion ----------------------------------------------------

    def _handle_node(self, conn: socket.socket, conn_id: int):
        reader = FrameReader()
        state = _SensorState(self.window_samples)
        with self._lock:
            self._sensors[conn_id] = state
        conn.settimeout(0.5)
        try:
            while not self._stop.is_set():
                try:
                    data = conn.recv(4096)
                except socket.timeout:
                    continue
                except OSError:
                    break
                if not data:
                    break
                for msg in reader.feed(data):
                    self._ingest(conn_id, state, msg)
        except ProtocolError as exc:
            log.warning("node %d dropped: %s", conn_id, exc)
        finally:
            with self._lock:
                self._sensors.pop(conn_id, None)
            conn.close()

    def _ingest(self, conn_id: int, state: _SensorState, msg):
        now = time.monotonic()
        if isinstance(msg, SensorPacket):
            if msg.seq <= state.last_seq:
                log.warning("node %d: stale seq %d (last %d), dropped",
                            conn_id, msg.seq, state.last_seq)
                return
            state.last_seq = msg.seq
            state.buffer.append((now, msg.values))
        elif isinstance(msg, HeartSample):
            self._heart.append((now, msg.value))
        elif isinstance(msg, GpsLine):
            try:
                fix = parse_nmea(msg.line)
            except ProtocolError as exc:
                log.warning("node %d: bad NMEA (%s)", conn_id, exc)
                return
            self._publish({
                "kind": "gps", "lat": fix.latitude, "lon": fix.longitude,
                "quality": fix.quality, "satellites": fix.satellites,
                "fix_valid": fix.valid,
            })

    # -- inference and fan-out ---------------------------------------------

    def _inference_loop(self):
        fs = self.config.sample_rate_hz
        while not self._stop.is_set():
            start = time.monotonic()
            with self._lock:
                sensors = list(self._sensors.items())
            for conn_id, state in sensors:
                snapshot = list(state.buffer)
                if len(snapshot) < self.window_samples:
                    continue
                snapshot = snapshot[-self.window_samples:]
                window_closed_at = snapshot[-1][0]
                values = np.array([v for _, v in snapshot])
                try:
                    record = MultiChannelRecord(
                        tuple(Signal(values[:, c], fs) for c in range(4))
                    )
                    cls, conf, _ = classify(self.model, record,
                                            denoise=self.config.denoise)
                    subject = None
                    if self.identity_model is not None:
                        subject, _ = identify(self.identity_model, record,
                                              denoise=self.config.denoise)
                except GaitsenseError as exc:
                    log.warning("inference failed for node %d: %s", conn_id, exc)
                    continue
                latency_ms = (time.monotonic() - window_closed_at) * 1000.0
                self._publish({
                    "kind": "posture", "node": conn_id, "class": cls.name,
                    "confidence": round(conf, 6),
                    "alert": cls.name == "FALLING_DOWN",
                    "subject": subject,
                    "latency_ms": round(latency_ms, 3),
                })
            heart = list(self._heart)
            if len(heart) >= self.window_samples:
                try:
                    reading = heart_rate(
                        Signal(np.array([v for _, v in heart]), fs)
                    )
                    self._publish({
                        "kind": "heart", "bpm": round(reading.bpm, 2),
                        "confidence": round(reading.confidence, 4),
                        "valid": reading.valid,
                    })
                except GaitsenseError:
                    pass
            if time.monotonic() - self._last_publish > self.config.status_interval_s:
                with self._lock:
                    n_nodes = len(self._sensors)
                    n_terms = len(self._terminals)
                self._publish({"kind": "status", "nodes": n_nodes,
                               "terminals": n_terms})
            elapsed = time.monotonic() - start
            self._stop.wait(max(0.01, self.config.stride_s - elapsed))

    def _publish(self, payload: dict):
        with self._lock:
            payload = dict(payload)
            payload["seq"] = self._event_seq
            payload["ts"] = datetime.now(timezone.utc).isoformat()
            self._event_seq += 1
            line = (json.dumps(payload) + "\n").encode()
            dead = []
            for term_id, q in self._terminals.items():
                try:
                    q.put_nowait(line)
                except queue.Full:
                    log.warning("terminal %d too slow, disconnecting", term_id)
                    dead.append(term_id)
            for term_id in dead:
                del self._terminals[term_id]  # writer notices and closes
            self._last_publish = time.monotonic()
            self.events_published += 1

    def _handle_terminal(self, conn: socket.socket, conn_id: int):
        q: queue.Queue = queue.Queue(maxsize=self.config.queue_bound)
        conn.settimeout(5.0)
        with self._lock:
            self._terminals[conn_id] = q
        try:
            while not self._stop.is_set():
                with self._lock:
                    if self._terminals.get(conn_id) is not q:
                        break  # evicted for being too slow
                try:
                    line = q.get(timeout=0.25)
                except queue.Empty:
                    continue
                conn.sendall(line)
        except OSError:
            pass
        finally:
            with self._lock:
                if self._terminals.get(conn_id) is q:
                    del self._terminals[conn_id]
            conn.close()
