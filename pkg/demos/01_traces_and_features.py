"""Traces on disk and the three model inputs derived from them.

Walks through the canonical trace file format, round-trips a trace
through the parser, and shows what the classifier actually sees: the
+-1 direction sequence, the inter-packet delays, and the 7 whole-trace
statistics.
"""
import numpy as np

from wfbench import (
    extract_direction,
    extract_metadata,
    extract_timing,
    parse_trace_file,
    serialize_trace,
)
from wfbench.features import METADATA_FIELDS

# A trace is one page load: (timestamp, direction) per packet, +1 toward
# the server, -1 toward the client.
text = "0.000000\t+1\n0.031000\t+1\n0.047000\t-1\n0.047000\t-1\n0.112000\t-1\n"
trace = parse_trace_file(text)
print(f"parsed {len(trace)} packets")

# Serialization is the exact inverse of parsing at 1e-6 s precision.
assert serialize_trace(trace) == text
print("round-trip through the file format is exact\n")

direction = extract_direction(trace)
timing = extract_timing(trace)
print("direction sequence head:", direction[:8], f"... ({len(direction)} entries, zero padded)")
print("timing sequence head:   ", np.round(timing[:8], 3), "  (delta[0] is 0 by definition)")

print("\nwhole-trace statistics (computed on the full trace, not the 5000-truncation):")
for name, value in zip(METADATA_FIELDS, extract_metadata(trace)):
    print(f"  {name:>22} = {value:.6g}")
