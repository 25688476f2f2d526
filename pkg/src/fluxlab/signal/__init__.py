from .coil import CoilState, CoilCouplings, coil_inductance
from .frames import (SignalFrame, SignalConfig, encode_frame, decode_frame,
                     frames_to_jsonl, trace_from_jsonl, trace_to_jsonl,
                     FrameDecodeError, GestureTrace, GESTURE_LABELS)
from .gestures import synthesize_gesture, GestureParams
from .stream import (stream_source, SyntheticSource, ReplaySource,
                     SocketSource, Stream, StreamEnded, serve_frames)

__all__ = [
    "CoilState", "CoilCouplings", "coil_inductance",
    "SignalFrame", "SignalConfig", "encode_frame", "decode_frame",
    "frames_to_jsonl", "trace_from_jsonl", "trace_to_jsonl",
    "FrameDecodeError", "GestureTrace", "GESTURE_LABELS",
    "synthesize_gesture", "GestureParams",
    "stream_source", "SyntheticSource", "ReplaySource", "SocketSource",
    "Stream", "StreamEnded", "serve_frames",
]
