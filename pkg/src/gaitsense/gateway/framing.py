"""Length-prefixed binary frames for the node uplink.

Frame layout: 1 type byte, 4-byte little-endian unsigned payload length,
payload. Types: 0x01 sensor packet, 0x02 heart sample, 0x03 ASCII NMEA
line, 0x10 JSON event. Everything else is rejected.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

from ..errors import ProtocolError

__all__ = [
    "SensorPacket",
    "HeartSample",
    "GpsLine",
    "EventMessage",
    "encode_frame",
    "decode_frame",
    "FrameReader",
    "MAX_PAYLOAD",
]

TYPE_SENSOR = 0x01
TYPE_HEART = 0x02
TYPE_GPS = 0x03
TYPE_EVENT = 0x10

HEADER = struct.Struct("<BI")
MAX_PAYLOAD = 1 << 20  # sanity cap; real payloads are tiny


@dataclass(frozen=True)
class SensorPacket:
    """One 4-channel sample: t (us since stream start), seq, 4 volts floats."""

    timestamp_us: int
    seq: int
    values: tuple

    _FMT = struct.Struct("<QI4f")

    def payload(self) -> bytes:
        return self._FMT.pack(self.timestamp_us, self.seq, *self.values)

    @classmethod
    def from_payload(cls, payload: bytes) -> "SensorPacket":
        if len(payload) != cls._FMT.size:
            raise ProtocolError(
                f"sensor payload must be {cls._FMT.size} bytes, got {len(payload)}"
            )
        t, seq, *vals = cls._FMT.unpack(payload)
        if not all(v == v and abs(v) != float("inf") for v in vals):
            raise ProtocolError("non-finite sensor value")
        return cls(t, seq, tuple(vals))


@dataclass(frozen=True)
class HeartSample:
    """One heart-waveform sample: t (us), seq, value."""

    timestamp_us: int
    seq: int
    value: float

    _FMT = struct.Struct("<QIf")

    def payload(self) -> bytes:
        return self._FMT.pack(self.timestamp_us, self.seq, self.value)

    @classmethod
    def from_payload(cls, payload: bytes) -> "HeartSample":
        if len(payload) != cls._FMT.size:
            raise ProtocolError(
                f"heart payload must be {cls._FMT.size} bytes, got {len(payload)}"
            )
        t, seq, v = cls._FMT.unpack(payload)
        if v != v or abs(v) == float("inf"):
            raise ProtocolError("non-finite heart value")
        return cls(t, seq, v)


@dataclass(frozen=True)
class GpsLine:
    """One raw ASCII NMEA sentence."""

    line: str

    def payload(self) -> bytes:
        return self.line.encode("ascii")

    @classmethod
    def from_payload(cls, payload: bytes) -> "GpsLine":
        try:
            return cls(payload.decode("ascii"))
        except UnicodeDecodeError as exc:
            raise ProtocolError("GPS payload is not ASCII") from exc


@dataclass(frozen=True)
class EventMessage:
    """JSON event, used when events travel over the binary protocol."""

    data: dict

    def payload(self) -> bytes:
        return json.dumps(self.data).encode()

    @classmethod
    def from_payload(cls, payload: bytes) -> "EventMessage":
        try:
            return cls(json.loads(payload.decode()))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ProtocolError("event payload is not valid JSON") from exc


_TYPES = {
    TYPE_SENSOR: SensorPacket,
    TYPE_HEART: HeartSample,
    TYPE_GPS: GpsLine,
    TYPE_EVENT: EventMessage,
}
_TYPE_OF = {cls: code for code, cls in _TYPES.items()}


def encode_frame(msg) -> bytes:
    code = _TYPE_OF.get(type(msg))
    if code is None:
        raise ProtocolError(f"cannot encode {type(msg).__name__}")
    payload = msg.payload()
    return HEADER.pack(code, len(payload)) + payload


def decode_frame(buf: bytes):
    """Decode exactly one frame; returns (message, bytes consumed).

    Never reads past the declared length; truncated, oversized, or
    unknown-type frames raise ProtocolError.
    """
    if len(buf) < HEADER.size:
        raise ProtocolError("truncated header")
    code, length = HEADER.unpack_from(buf)
    if code not in _TYPES:
        raise ProtocolError(f"unknown frame type 0x{code:02x}")
    if length > MAX_PAYLOAD:
        raise ProtocolError(f"payload length {length} exceeds cap")
    end = HEADER.size + length
    if len(buf) < end:
        raise ProtocolError("truncated payload")
    return _TYPES[code].from_payload(buf[HEADER.size : end]), end


class FrameReader:
    """Incremental decoder for a byte stream of frames."""

    def __init__(self):
        self._buf = bytearray()

    def feed(self, data: bytes):
        """Append bytes; yield every complete message now available."""
        self._buf.extend(data)
        while True:
            if len(self._buf) < HEADER.size:
                return
            code, length = HEADER.unpack_from(self._buf)
            if code not in _TYPES or length > MAX_PAYLOAD:
                raise ProtocolError(f"bad frame (type 0x{code:02x}, len {length})")
            end = HEADER.size + length
            if len(self._buf) < end:
                return
            msg, _ = decode_frame(bytes(self._buf[:end]))
            del self._buf[:end]
            yield msg
