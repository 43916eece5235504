import pytest

from gaitsense.errors import ChecksumError, NmeaParseError, UnsupportedSentence
from gaitsense.gateway.nmea import GpsFix, make_gga, nmea_checksum, parse_nmea

CANONICAL_GGA = (
    "$GPGGA,123519,4807.038,N,01131.000,E,1,08,0.9,545.4,M,46.9,M,,*47"
)


class TestChecksum:
    def test_known_sentence(self):
        body = CANONICAL_GGA[1:].split("*")[0]
        assert nmea_checksum(body) == 0x47

    def test_single_char_mutation_always_detected(self):
        body = CANONICAL_GGA[1:].split("*")[0]
        base = nmea_checksum(body)
        for i in range(len(body)):
            for flip in (1, 2, 4):
                mutated = body[:i] + chr(ord(body[i]) ^ flip) + body[i + 1:]
                assert nmea_checksum(mutated) != base


class TestParseGga:
    def test_canonical(self):
        fix = parse_nmea(CANONICAL_GGA)
        assert fix.latitude == pytest.approx(48.1173, abs=1e-4)
        assert fix.longitude == pytest.approx(11.5167, abs=1e-4)
        assert fix.quality == 1
        assert fix.satellites == 8
        assert fix.valid

    def test_zero_quality_invalid(self):
        body = "GPGGA,123519,4807.038,N,01131.000,E,0,00,0.9,545.4,M,46.9,M,,"
        fix = parse_nmea(f"${body}*{nmea_checksum(body):02X}")
        assert not fix.valid

    def test_southern_western_negative(self):
        body = "GPGGA,123519,4807.038,S,01131.000,W,1,08,0.9,545.4,M,46.9,M,,"
        fix = parse_nmea(f"${body}*{nmea_checksum(body):02X}")
        assert fix.latitude < 0 and fix.longitude < 0


class TestParseRmc:
    def test_active(self):
        body = "GPRMC,123519,A,4807.038,N,01131.000,E,022.4,084.4,230394,003.1,W"
        fix = parse_nmea(f"${body}*{nmea_checksum(body):02X}")
        assert fix.valid
        assert fix.speed_knots == pytest.approx(22.4)
        assert fix.course_deg == pytest.approx(84.4)

    def test_void_status(self):
        body = "GPRMC,123519,V,4807.038,N,01131.000,E,,,230394,,"
        fix = parse_nmea(f"${body}*{nmea_checksum(body):02X}")
        assert not fix.valid


class TestParseRejects:
    def test_bad_checksum(self):
        with pytest.raises(ChecksumError):
            parse_nmea(CANONICAL_GGA[:-2] + "00")

    def test_corrupted_body(self):
        line = CANONICAL_GGA.replace("4807", "4907")
        with pytest.raises(ChecksumError):
            parse_nmea(line)

    def test_missing_dollar(self):
        with pytest.raises(NmeaParseError):
            parse_nmea(CANONICAL_GGA[1:])

    def test_missing_checksum(self):
        with pytest.raises(NmeaParseError):
            parse_nmea("$GPGGA,123519,4807.038,N")

    def test_unsupported_talker(self):
        body = "GPGSV,3,1,11,03,03,111,00"
        with pytest.raises(UnsupportedSentence):
            parse_nmea(f"${body}*{nmea_checksum(body):02X}")

    def test_bad_hemisphere(self):
        body = "GPGGA,123519,4807.038,X,01131.000,E,1,08,0.9,545.4,M,46.9,M,,"
        with pytest.raises(NmeaParseError):
            parse_nmea(f"${body}*{nmea_checksum(body):02X}")

    def test_out_of_range_coordinates(self):
        with pytest.raises(NmeaParseError):
            GpsFix(latitude=91.0, longitude=0.0)


class TestMakeGga:
    @pytest.mark.parametrize("lat,lon", [
        (48.1173, 11.5167),
        (-33.8688, 151.2093),
        (35.6762, -139.6503),
        (0.0, 0.0),
    ])
    def test_roundtrip(self, lat, lon):
        fix = parse_nmea(make_gga(lat, lon))
        assert fix.latitude == pytest.approx(lat, abs=1e-4)
        assert fix.longitude == pytest.approx(lon, abs=1e-4)
        assert fix.valid

    def test_fuzz_corruption_never_accepted(self):
        import random

        rnd = random.Random(2)
        line = make_gga(48.1173, 11.5167)
        star = line.index("*")
        for _ in range(500):
            i = rnd.randrange(1, star)
            ch = chr(ord(line[i]) ^ (1 << rnd.randrange(7)))
            mutated = line[:i] + ch + line[i + 1:]
            if mutated == line:
                continue
            with pytest.raises((ChecksumError, NmeaParseError)):
                parse_nmea(mutated)
