"""Streaming telemetry: wire protocol, simulated nodes, gateway, terminals."""

from .framing import (
    EventMessage,
    FrameReader,
    GpsLine,
    HeartSample,
    SensorPacket,
    decode_frame,
    encode_frame,
)
from .nmea import GpsFix, make_gga, nmea_checksum, parse_nmea
from .nodes import run_gps_node, run_heart_node, run_sensor_node
from .server import Gateway, GatewayConfig
from .terminal import collect_events, stream_events, validate_event

__all__ = [
    "EventMessage", "FrameReader", "GpsLine", "HeartSample", "SensorPacket",
    "decode_frame", "encode_frame",
    "GpsFix", "make_gga", "nmea_checksum", "parse_nmea",
    "run_gps_node", "run_heart_node", "run_sensor_node",
    "Gateway", "GatewayConfig",
    "collect_events", "stream_events", "validate_event",
]
