"""NMEA 0183 sentence parsing (GGA/RMC) and generation.

Only sentences whose XOR checksum verifies are accepted; coordinates in
ddmm.mmm form convert to signed decimal degrees (south/west negative).
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ChecksumError, NmeaParseError, UnsupportedSentence

__all__ = ["GpsFix", "parse_nmea", "nmea_checksum", "make_gga"]


@dataclass(frozen=True)
class GpsFix:
    latitude: float
    longitude: float
    quality: int = 0
    satellites: int = 0
    speed_knots: float | None = None
    course_deg: float | None = None
    valid: bool = True

    def __post_init__(self):
        if abs(self.latitude) > 90 or abs(self.longitude) > 180:
            raise NmeaParseError("coordinates out of range")


def nmea_checksum(body: str) -> int:
    """XOR of all characters between '$' and '*'."""
    cs = 0
    for ch in body:
        cs ^= ord(ch)
    return cs


def _to_degrees(field: str, hemi: str, width: int) -> float:
    if not field:
        raise NmeaParseError("empty coordinate field")
    try:
        degrees = int(field[:width])
        minutes = float(field[width:])
    except ValueError as exc:
        raise NmeaParseError(f"bad coordinate {field!r}") from exc
    value = degrees + minutes / 60.0
    if hemi in ("S", "W"):
        value = -value
    elif hemi not in ("N", "E"):
        raise NmeaParseError(f"bad hemisphere {hemi!r}")
    return value


def parse_nmea(line: str) -> GpsFix:
    """Parse one GGA or RMC sentence into a GpsFix."""
    line = line.strip()
    if not line.startswith("$") or "*" not in line:
        raise NmeaParseError("sentence must be $...*HH")
    body, _, tail = line[1:].partition("*")
    if len(tail) < 2:
        raise NmeaParseError("missing checksum digits")
    try:
        declared = int(tail[:2], 16)
    except ValueError as exc:
        raise NmeaParseError("non-hex checksum") from exc
    if nmea_checksum(body) != declared:
        raise ChecksumError(
            f"checksum mismatch: computed {nmea_checksum(body):02X}, got {tail[:2]}"
        )
    fields = body.split(",")
    talker = fields[0]
    if talker.endswith("GGA"):
        if len(fields) < 8:
            raise NmeaParseError("GGA needs at least 8 fields")
        lat = _to_degrees(fields[2], fields[3], 2)
        lon = _to_degrees(fields[4], fields[5], 3)
        try:
            quality = int(fields[6] or 0)
            sats = int(fields[7] or 0)
        except ValueError as exc:
            raise NmeaParseError("bad quality/satellite field") from exc
        return GpsFix(lat, lon, quality=quality, satellites=sats,
                      valid=quality > 0)
    if talker.endswith("RMC"):
        if len(fields) < 9:
            raise NmeaParseError("RMC needs at least 9 fields")
        status = fields[2]
        lat = _to_degrees(fields[3], fields[4], 2)
        lon = _to_degrees(fields[5], fields[6], 3)
        try:
            speed = float(fields[7]) if fields[7] else None
            course = float(fields[8]) if fields[8] else None
        except ValueError as exc:
            raise NmeaParseError("bad speed/course field") from exc
        return GpsFix(lat, lon, quality=1 if status == "A" else 0,
                      speed_knots=speed, course_deg=course,
                      valid=status == "A")
    raise UnsupportedSentence(f"unsupported sentence {talker!r}")


def make_gga(lat: float, lon: float, satellites: int = 8,
             time_str: str = "123519") -> str:
    """Build a valid GGA sentence for the simulated GPS node."""
    ns = "N" if lat >= 0 else "S"
    ew = "E" if lon >= 0 else "W"
    alat, alon = abs(lat), abs(lon)
    lat_f = f"{int(alat):02d}{(alat - int(alat)) * 60:07.4f}"
    lon_f = f"{int(alon):03d}{(alon - int(alon)) * 60:07.4f}"
    body = (f"GPGGA,{time_str},{lat_f},{ns},{lon_f},{ew},1,"
            f"{satellites:02d},0.9,10.0,M,0.0,M,,")
    return f"${body}*{nmea_checksum(body):02X}"
