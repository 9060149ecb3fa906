"""RandSolomon: Byzantine fault-tolerant random number generation from Reed-Solomon codes."""

from .codec import CodeParams, decode, derive_params, encode
from .consensus import Policy
from .netsim import LivenessViolation, RunTrace, Schedule, run
from .protocol import Process, ProtocolConfig, compress

__all__ = [
    "CodeParams", "LivenessViolation", "Policy", "Process", "ProtocolConfig", "RunTrace", "Schedule",
    "compress", "decode", "derive_params", "encode", "run",
]
