"""Simulated sensor, GPS, and heart nodes streaming to the gateway.

Each node paces its stream in real time, reconnects with capped
exponential backoff, and can be stopped via a threading.Event.
"""

from __future__ import annotations

import logging
import socket
import time

import numpy as np

from ..pipeline import pulse_waveform
from ..synth import GaitClass, NEUTRAL_SUBJECT, synth_record
from .framing import GpsLine, HeartSample, SensorPacket, encode_frame
from .nmea import make_gga

log = logging.getLogger("gaitsense.nodes")

__all__ = ["run_sensor_node", "run_gps_node", "run_heart_node", "connect_with_backoff"]

_CHUNK_S = 0.05  # send in 50 ms bursts


def connect_with_backoff(endpoint, stop=None, max_backoff_s: float = 5.0,
                         attempts: int = 8) -> socket.socket | None:
    """TCP connect with capped exponential backoff; None if stopped/exhausted."""
    backoff = 0.1
    for _ in range(attempts):
        if stop is not None and stop.is_set():
            return None
        try:
            return socket.create_connection(endpoint, timeout=5.0)
        except OSError as exc:
            log.warning("connect to %s failed (%s), retrying in %.1fs",
                        endpoint, exc, backoff)
            time.sleep(backoff)
            backoff = min(backoff * 2.0, max_backoff_s)
    return None


def _paced_send(sock, frames_with_times, stop=None) -> int:
    """Send (send_at_s, frame) pairs on schedule; returns frames sent."""
    start = time.monotonic()
    sent = 0
    pending = b""
    last_flush = 0.0
    for due, frame in frames_with_times:
        if stop is not None and stop.is_set():
            break
        now = time.monotonic() - start
        if due - now > 0:
            if pending:
                sock.sendall(pending)
                pending = b""
            time.sleep(due - now)
        pending += frame
        sent += 1
        now = time.monotonic() - start
        if now - last_flush >= _CHUNK_S:
            sock.sendall(pending)
            pending = b""
            last_flush = now
    if pending:
        sock.sendall(pending)
    return sent


def run_sensor_node(endpoint, cls: GaitClass = GaitClass.NORMAL_WALKING,
                    subject=None, fs: float = 100.0, duration_s: float = 10.0,
                    seed: int = 0, stop=None) -> int:
    """Stream one synthesized record as real-time SensorPackets; returns count."""
    subject = subject or NEUTRAL_SUBJECT
    record = synth_record(cls, subject, duration_s=max(duration_s, 2.56),
                          fs=fs, seed=seed)
    data = record.as_array()
    n = min(data.shape[1], int(round(duration_s * fs)))
    frames = (
        (i / fs, encode_frame(SensorPacket(int(i / fs * 1e6), i,
                                           tuple(float(v) for v in data[:, i]))))
        for i in range(n)
    )
    sock = connect_with_backoff(endpoint, stop)
    if sock is None:
        return 0
    try:
        return _paced_send(sock, frames, stop)
    finally:
        sock.close()


def run_gps_node(endpoint, path=((48.1173, 11.5167),), rate_hz: float = 1.0,
                 duration_s: float = 10.0, stop=None) -> int:
    """Emit one GGA sentence per interval, looping over the path points."""
    n = int(round(duration_s * rate_hz))
    frames = (
        (i / rate_hz, encode_frame(GpsLine(make_gga(*path[i % len(path)]))))
        for i in range(n)
    )
    sock = connect_with_backoff(endpoint, stop)
    if sock is None:
        return 0
    try:
        return _paced_send(sock, frames, stop)
    finally:
        sock.close()


def run_heart_node(endpoint, bpm: float = 60.0, fs: float = 100.0,
                   duration_s: float = 10.0, seed: int = 0, stop=None) -> int:
    """Stream a synthetic heartbeat waveform as HeartSample frames."""
    wave = pulse_waveform(bpm, duration_s, fs, seed=seed)
    frames = (
        (i / fs, encode_frame(HeartSample(int(i / fs * 1e6), i, float(v))))
        for i, v in enumerate(wave.samples)
    )
    sock = connect_with_backoff(endpoint, stop)
    if sock is None:
        return 0
    try:
        return _paced_send(sock, frames, stop)
    finally:
        sock.close()
