"""Model inputs derived from one trace.

Three views feed the classifiers: the +-1 direction sequence and the
inter-packet timing sequence (both padded/truncated to SEQ_LEN), and a
7-value vector of whole-trace statistics.
"""
from __future__ import annotations

import numpy as np

from .traces import RawTrace

SEQ_LEN = 5000

METADATA_FIELDS = (
    "total_packets",
    "incoming_packets",
    "outgoing_packets",
    "incoming_ratio",
    "outgoing_ratio",
    "total_time",
    "avg_time_per_packet",
)


def extract_direction(trace: RawTrace, seq_len: int = SEQ_LEN) -> np.ndarray:
    """First min(len, seq_len) packet directions, zero-padded on the right."""
    out = np.zeros(seq_len, dtype=np.int8)
    n = min(len(trace), seq_len)
    out[:n] = trace.directions[:n]
    return out


def extract_timing(trace: RawTrace, seq_len: int = SEQ_LEN) -> np.ndarray:
    """Inter-packet delays over the first min(len, seq_len) packets.

    Entry 0 is 0.0 by definition; entries past the trace length stay 0.
    """
    out = np.zeros(seq_len, dtype=np.float64)
    n = min(len(trace), seq_len)
    if n > 1:
        out[1:n] = np.diff(trace.timestamps[:n])
    return out


def extract_metadata(trace: RawTrace) -> np.ndarray:
    """Whole-trace statistics, computed over the full (untruncated) trace.

    Order matches METADATA_FIELDS. total_time is last minus first
    timestamp, so traces that do not start at zero are handled.
    """
    total = len(trace)
    outgoing = int(np.count_nonzero(trace.directions == 1))
    incoming = total - outgoing
    total_time = float(trace.timestamps[-1] - trace.timestamps[0])
    return np.array(
        [
            total,
            incoming,
            outgoing,
            incoming / total,
            outgoing / total,
            total_time,
            total_time / total,
        ],
        dtype=np.float64,
    )
