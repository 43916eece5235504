"""Terminal client: subscribes to the NDJSON event stream and validates it."""

from __future__ import annotations

import json
import logging
import socket
import time

from .nodes import connect_with_backoff

log = logging.getLogger("gaitsense.terminal")

__all__ = ["validate_event", "stream_events", "collect_events"]

_REQUIRED = {"ts", "seq", "kind"}
_KIND_FIELDS = {
    "posture": {"class", "confidence", "alert", "latency_ms"},
    "gps": {"lat", "lon"},
    "heart": {"bpm"},
    "status": set(),
}


def validate_event(event: dict) -> list[str]:
    """Return a list of schema problems (empty when the event is well formed)."""
    problems = [f"missing field {f!r}" for f in _REQUIRED if f not in event]
    kind = event.get("kind")
    if kind not in _KIND_FIELDS:
        problems.append(f"unknown kind {kind!r}")
        return problems
    problems += [f"missing field {f!r} for kind {kind}"
                 for f in _KIND_FIELDS[kind] if f not in event]
    if kind == "posture" and not (0.0 <= event.get("confidence", -1) <= 1.0):
        problems.append("confidence outside [0, 1]")
    return problems


def stream_events(endpoint, stop=None, reconnect: bool = False):
    """Yield parsed events from the gateway; schema violations are logged
    and the stream continues."""
    while True:
        sock = connect_with_backoff(endpoint, stop)
        if sock is None:
            return
        sock.settimeout(0.5)
        buf = b""
        try:
            while stop is None or not stop.is_set():
                try:
                    data = sock.recv(4096)
                except socket.timeout:
                    continue
                except OSError:
                    break
                if not data:
                    break
                buf += data
                while b"\n" in buf:
                    line, _, buf = buf.partition(b"\n")
                    try:
                        event = json.loads(line.decode())
                    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                        log.warning("unparseable event line: %s", exc)
                        continue
                    problems = validate_event(event)
                    if problems:
                        log.warning("schema violation: %s", "; ".join(problems))
                    yield event
        finally:
            sock.close()
        if not reconnect or (stop is not None and stop.is_set()):
            return


def collect_events(endpoint, duration_s: float) -> list[dict]:
    """Gather events for a fixed wall-clock span."""
    import threading

    stop = threading.Event()
    timer = threading.Timer(duration_s, stop.set)
    timer.start()
    try:
        return list(stream_events(endpoint, stop=stop))
    finally:
        timer.cancel()
