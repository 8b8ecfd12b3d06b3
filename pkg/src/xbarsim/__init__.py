"""Cycle-accurate simulator of an elastic N-port WISHBONE-style crossbar fabric.

The fabric connects a host bridge (port 0) and computation modules (ports
1..N-1) through an NxN crossbar whose slave ports run weighted round-robin
arbiters.  A register file drives isolation masks, package quotas, destination
routing, and per-port resets; an elastic resource manager places application
module chains onto ports and rewires them at runtime.  Every handshake, grant,
transfer, and error is recorded in a deterministic trace.
"""

from .regfile import ErrorCode, OutOfRange, RegisterFile, StatusWriteDenied
from .hamming import hamming_decode, hamming_encode

__version__ = "0.1.0"

__all__ = [
    "ErrorCode",
    "OutOfRange",
    "RegisterFile",
    "StatusWriteDenied",
    "hamming_decode",
    "hamming_encode",
]
