"""
Telemetry package for grouserlab.

Contains the sensor frame wire format and the line-delimited trial logs.
"""

from .trial_log import read_campaign_logs, read_trial_log, trial_log_path, write_trial_log
from .wire import FrameParser, crc16_ccitt_false, decode_frame, encode_frame, parse_stream

__all__ = [
    "FrameParser",
    "crc16_ccitt_false",
    "decode_frame",
    "encode_frame",
    "parse_stream",
    "read_campaign_logs",
    "read_trial_log",
    "trial_log_path",
    "write_trial_log",
]
