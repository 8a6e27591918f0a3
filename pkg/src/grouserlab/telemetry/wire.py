"""
Fixed-size sensor frame wire format.

Layout (little-endian, 26 bytes)::

    offset  size  field
    0       2     sync          A5 5A
    2       1     version       1
    3       8     timestamp_us  uint64
    11      4     motor_counts  int32
    15      2     cam_counts    uint16 (12 bits used)
    17      4     linear_counts int32
    21      2     current_mA    uint16
    23      1     flags         uint8
    24      2     crc16         CRC-16/CCITT-FALSE over bytes 0..23

The CRC is checked before any field, so a corrupted version byte reads as a
corrupt frame rather than an unknown version.
"""

import binascii
import logging
import struct
from typing import Iterable, List, Tuple, Union

from grouserlab.errors import (
    CorruptFrameError,
    EncodeError,
    FrameRangeError,
    FrameVersionError,
    TelemetryError,
)
from grouserlab.sim.records import SensorFrame

logger = logging.getLogger(__name__)

SYNC = b"\xa5\x5a"
VERSION = 1
CAM_COUNTS_MAX = 4095

_BODY = struct.Struct("<2sBQiHiHB")
_CRC = struct.Struct("<H")
PAYLOAD_SIZE = _BODY.size - len(SYNC)
FRAME_SIZE = _BODY.size + _CRC.size

_LIMITS = (
    ("t_us", 0, 2**64 - 1),
    ("motor_counts", -(2**31), 2**31 - 1),
    ("cam_counts", 0, CAM_COUNTS_MAX),
    ("linear_counts", -(2**31), 2**31 - 1),
    ("current_mA", 0, 2**16 - 1),
    ("flags", 0, 2**8 - 1),
)


def crc16_ccitt_false(data: bytes) -> int:
    """CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no final xor."""
    return binascii.crc_hqx(data, 0xFFFF)


def encode_frame(frame: SensorFrame) -> bytes:
    """Serialize one frame; any field outside its wire range raises EncodeError."""
    for name, lo, hi in _LIMITS:
        value = getattr(frame, name)
        if not isinstance(value, int) or isinstance(value, bool) or not lo <= value <= hi:
            raise EncodeError(f"{name}={value!r} does not fit [{lo}, {hi}]", context={"field": name})
    body = _BODY.pack(
        SYNC,
        VERSION,
        frame.t_us,
        frame.motor_counts,
        frame.cam_counts,
        frame.linear_counts,
        frame.current_mA,
        frame.flags,
    )
    return body + _CRC.pack(crc16_ccitt_false(body))


def decode_frame(data: bytes) -> SensorFrame:
    """
    Decode exactly one frame from the start of ``data``.

    Raises:
        CorruptFrameError: truncated frame, missing sync or CRC mismatch
        FrameVersionError: unknown protocol version
        FrameRangeError: cam counts above 12 bits
    """
    data = bytes(data)
    if len(data) < FRAME_SIZE:
        raise CorruptFrameError(f"truncated frame: {len(data)} of {FRAME_SIZE} bytes")
    if data[:2] != SYNC:
        raise CorruptFrameError(f"bad sync bytes {data[:2].hex()}")

    body, (crc,) = data[: _BODY.size], _CRC.unpack_from(data, _BODY.size)
    expected = crc16_ccitt_false(body)
    if crc != expected:
        raise CorruptFrameError(f"CRC mismatch: frame {crc:#06x}, computed {expected:#06x}")

    _, version, t_us, motor, cam, linear, current, flags = _BODY.unpack(body)
    if version != VERSION:
        raise FrameVersionError(f"unknown frame version {version}")
    if cam > CAM_COUNTS_MAX:
        raise FrameRangeError(f"cam counts {cam} exceed {CAM_COUNTS_MAX}")
    return SensorFrame(t_us, motor, cam, linear, current, flags)


ParseResult = Union[SensorFrame, TelemetryError]


class FrameParser:
    """
    Incremental parser for a byte stream of frames.

    Bytes before a sync pattern are skipped. A CRC failure costs one byte, so
    a sync inside a damaged frame is still tried; an intact frame with a bad
    version or range is skipped whole. One damaged run is reported once: CRC
    failures while resynchronizing are counted as skipped bytes until the
    next intact frame.
    """

    def __init__(self):
        self._buffer = bytearray()
        self._resyncing = False
        self.frames_ok = 0
        self.errors = 0
        self.bytes_skipped = 0

    def feed(self, data: bytes) -> List[ParseResult]:
        """Add bytes and return every frame or error they complete, in stream order."""
        self._buffer.extend(data)
        results: List[ParseResult] = []
        while True:
            start = self._buffer.find(SYNC)
            if start < 0:
                keep = 1 if self._buffer[-1:] == SYNC[:1] else 0
                self._skip(len(self._buffer) - keep)
                return results
            self._skip(start)
            if len(self._buffer) < FRAME_SIZE:
                return results
            try:
                frame = decode_frame(bytes(self._buffer[:FRAME_SIZE]))
            except CorruptFrameError as exc:
                if not self._resyncing:
                    results.append(exc)
                    self.errors += 1
                    self._resyncing = True
                self._skip(1)
                continue
            except TelemetryError as exc:
                results.append(exc)
                self.errors += 1
                self._resyncing = False
                del self._buffer[:FRAME_SIZE]
                continue
            results.append(frame)
            self.frames_ok += 1
            self._resyncing = False
            del self._buffer[:FRAME_SIZE]

    def flush(self) -> List[ParseResult]:
        """End of stream: a pending partial frame is reported as truncated."""
        results: List[ParseResult] = []
        if self._buffer.startswith(SYNC) and not self._resyncing:
            results.append(CorruptFrameError(f"truncated frame: {len(self._buffer)} of {FRAME_SIZE} bytes"))
            self.errors += 1
        self._buffer.clear()
        self._resyncing = False
        return results

    def _skip(self, n: int) -> None:
        if n > 0:
            self.bytes_skipped += n
            del self._buffer[:n]


def encode_stream(frames: Iterable[SensorFrame]) -> bytes:
    return b"".join(encode_frame(f) for f in frames)


def parse_stream(data: bytes) -> Tuple[List[SensorFrame], List[TelemetryError]]:
    """Split a complete byte stream into good frames and errors."""
    parser = FrameParser()
    results = parser.feed(data) + parser.flush()
    frames = [r for r in results if isinstance(r, SensorFrame)]
    errors = [r for r in results if isinstance(r, TelemetryError)]
    if errors:
        logger.warning("stream parse: %d frames, %d errors, %d bytes skipped", len(frames), len(errors), parser.bytes_skipped)
    return frames, errors
