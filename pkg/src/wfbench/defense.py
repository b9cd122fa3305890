"""Constant-rate traffic defense simulator.

Each direction gets its own fixed-rate slot schedule (0, rho, 2*rho, ...).
A real packet is delayed to the earliest unused slot of its direction at
or after its original time, preserving per-direction order; every other
slot up to the end of the flow emits an indistinguishable dummy packet,
and flows are extended so per-direction counts are multiples of the pad
multiple L. The defended trace therefore ticks at exactly rho per
direction, which is the whole point: timing and count structure no longer
depend on the page.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .traces import Corpus, RawTrace

DEFAULT_RHO_OUT = 0.04
DEFAULT_RHO_IN = 0.012
DEFAULT_PAD_MULTIPLE = 100


class OverheadError(Exception):
    """Overhead is undefined for this trace pair."""


@dataclass(frozen=True)
class DefenseConfig:
    rho_out: float = DEFAULT_RHO_OUT
    rho_in: float = DEFAULT_RHO_IN
    pad_multiple: int = DEFAULT_PAD_MULTIPLE

    def __post_init__(self):
        if self.rho_out <= 0 or self.rho_in <= 0:
            raise ValueError("slot periods must be positive")
        if self.pad_multiple < 1:
            raise ValueError("pad multiple must be at least 1")


def _assign_slots(times: np.ndarray, rho: float) -> list[int]:
    # earliest unused slot at or after each packet, order preserving
    slots: list[int] = []
    prev = -1
    for t in times:
        k = max(math.ceil(t / rho), prev + 1)
        if k * rho < t:  # guard against quotient rounding down across a slot edge
            k += 1
        slots.append(k)
        prev = k
    return slots


def _direction_schedule(times: np.ndarray, rho: float, pad_multiple: int) -> np.ndarray:
    slots = _assign_slots(times, rho)
    last = slots[-1] if slots else -1
    count = max(1, math.ceil((last + 1) / pad_multiple)) * pad_multiple
    return np.arange(count, dtype=np.float64) * rho


def simulate_constant_rate(trace: RawTrace, config: DefenseConfig = DefenseConfig()) -> RawTrace:
    """Defended view of one trace (real packets delayed, dummies added).

    Dummies are indistinguishable from real packets in the output. Merged
    in timestamp order; ties put outgoing before incoming.
    """
    out_times = _direction_schedule(
        trace.timestamps[trace.directions == 1], config.rho_out, config.pad_multiple
    )
    in_times = _direction_schedule(
        trace.timestamps[trace.directions == -1], config.rho_in, config.pad_multiple
    )
    times = np.concatenate([out_times, in_times])
    dirs = np.concatenate(
        [np.ones(len(out_times), dtype=np.int8), -np.ones(len(in_times), dtype=np.int8)]
    )
    # stable sort on time keeps outgoing (listed first) ahead on ties
    order = np.argsort(times, kind="stable")
    return RawTrace(times[order], dirs[order])


def overhead(original: RawTrace, defended: RawTrace) -> tuple[float, float]:
    """(bandwidth, latency) overhead in percent of the original trace.

    Bandwidth compares packet counts, latency compares trace spans (last
    minus first timestamp).
    """
    n_orig = len(original)
    span_orig = float(original.timestamps[-1] - original.timestamps[0])
    if n_orig == 0:
        raise OverheadError("original trace has no packets")
    if span_orig <= 0:
        raise OverheadError("original trace has zero time span")
    bandwidth = 100.0 * (len(defended) - n_orig) / n_orig
    span_def = float(defended.timestamps[-1] - defended.timestamps[0])
    latency = 100.0 * (span_def - span_orig) / span_orig
    return bandwidth, latency


def defend_corpus(
    corpus: Corpus, config: DefenseConfig = DefenseConfig()
) -> tuple[Corpus, dict]:
    """Defend every trace; returns the new corpus and an overhead summary."""
    entries = []
    bandwidths = []
    latencies = []
    for trace, label in corpus.entries:
        defended = simulate_constant_rate(trace, config)
        entries.append((defended, label))
        bw, lat = overhead(trace, defended)
        bandwidths.append(bw)
        latencies.append(lat)
    summary = {
        "n_traces": len(entries),
        "rho_out": config.rho_out,
        "rho_in": config.rho_in,
        "pad_multiple": config.pad_multiple,
        "mean_bandwidth_overhead_pct": float(np.mean(bandwidths)),
        "mean_latency_overhead_pct": float(np.mean(latencies)),
    }
    return Corpus(entries, n_mon=corpus.n_mon), summary
