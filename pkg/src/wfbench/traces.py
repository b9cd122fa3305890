"""Trace files and labeled corpora.

A trace records one page load as an ordered list of (timestamp, direction)
packets. On disk a trace is UTF-8 text, one packet per line formatted
``%.6f<TAB>%+d`` with LF endings; direction +1 is outgoing (toward the
server), -1 incoming (toward the client). A corpus directory holds
``monitored/<site>-<instance>.txt`` plus optional ``unmonitored/<id>.txt``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

OUTGOING = 1
INCOMING = -1

_MONITORED_NAME = re.compile(r"^(\d+)-(\d+)$")
_UNMONITORED_NAME = re.compile(r"^(\d+)$")


class TraceError(Exception):
    """Base class for trace and corpus failures."""

    def __init__(self, message: str, line: int | None = None, path: str | Path | None = None):
        self.message = message
        self.line = line
        self.path = str(path) if path is not None else None
        super().__init__(str(self))

    def __str__(self) -> str:
        prefix = ""
        if self.path is not None:
            prefix += f"{self.path}:"
        if self.line is not None:
            prefix += f"line {self.line}:"
        return f"{prefix} {self.message}" if prefix else self.message


class EmptyTrace(TraceError):
    """Trace source contained no packets."""


class ParseError(TraceError):
    """A line (or file) could not be parsed."""


class OrderError(TraceError):
    """Timestamps decreased between consecutive packets."""


class LayoutError(TraceError):
    """Corpus directory does not match the expected layout."""


@dataclass(frozen=True, eq=False)
class RawTrace:
    """Ordered packets of one page load.

    timestamps are absolute seconds from trace start (non-decreasing,
    non-negative); directions are +1/-1. Instances are immutable and safe
    to share across threads.
    """

    timestamps: np.ndarray
    directions: np.ndarray

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.float64)
        dirs = np.asarray(self.directions, dtype=np.int8)
        if ts.ndim != 1 or dirs.ndim != 1 or len(ts) != len(dirs):
            raise ValueError("timestamps and directions must be 1-D and equal length")
        if len(ts) == 0:
            raise ValueError("trace must contain at least one packet")
        if not np.all(np.isfinite(ts)) or ts[0] < 0:
            raise ValueError("timestamps must be finite and non-negative")
        if np.any(np.diff(ts) < 0):
            raise ValueError("timestamps must be non-decreasing")
        if not np.all(np.abs(dirs) == 1):
            raise ValueError("directions must be +1 or -1")
        ts.setflags(write=False)
        dirs.setflags(write=False)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "directions", dirs)

    def __len__(self) -> int:
        return len(self.timestamps)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RawTrace):
            return NotImplemented
        return np.array_equal(self.timestamps, other.timestamps) and np.array_equal(
            self.directions, other.directions
        )

    def packets(self) -> Iterator[tuple[float, int]]:
        return zip(self.timestamps.tolist(), self.directions.tolist())

    @classmethod
    def from_packets(cls, packets) -> "RawTrace":
        ts, dirs = zip(*packets)
        return cls(np.array(ts, dtype=np.float64), np.array(dirs, dtype=np.int8))


@dataclass(frozen=True)
class TraceLabel:
    """Monitored site index in [0, n_mon), or the unmonitored sentinel n_mon."""

    class_id: int
    instance_id: int


@dataclass
class Corpus:
    """Labeled traces plus the monitored class count.

    The unmonitored sentinel class id equals n_mon exactly.
    """

    entries: list[tuple[RawTrace, TraceLabel]]
    n_mon: int

    def __post_init__(self):
        for _, label in self.entries:
            if not (0 <= label.class_id <= self.n_mon):
                raise ValueError(
                    f"label {label.class_id} outside [0, n_mon={self.n_mon}] sentinel range"
                )

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def labels(self) -> list[TraceLabel]:
        return [label for _, label in self.entries]

    @property
    def sentinel(self) -> int:
        return self.n_mon


def parse_trace_file(text) -> RawTrace:
    """Parse trace text (string or file-like) into a RawTrace.

    Raises EmptyTrace for no packets, ParseError with the offending line
    number for malformed lines, OrderError for decreasing timestamps.
    """
    if hasattr(text, "read"):
        text = text.read()
    timestamps: list[float] = []
    directions: list[int] = []
    prev = -math.inf
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(f"expected '<timestamp>\\t<direction>', got {line!r}", line=lineno)
        try:
            stamp = float(parts[0])
        except ValueError:
            raise ParseError(f"bad timestamp {parts[0]!r}", line=lineno) from None
        if not math.isfinite(stamp) or stamp < 0:
            raise ParseError(f"timestamp must be finite and non-negative, got {parts[0]!r}", line=lineno)
        try:
            direction = int(parts[1])
        except ValueError:
            raise ParseError(f"bad direction {parts[1]!r}", line=lineno) from None
        if direction not in (OUTGOING, INCOMING):
            raise ParseError(f"direction must be +1 or -1, got {direction}", line=lineno)
        if stamp < prev:
            raise OrderError(f"timestamp {stamp!r} decreases from {prev!r}", line=lineno)
        prev = stamp
        timestamps.append(stamp)
        directions.append(direction)
    if not timestamps:
        raise EmptyTrace("no packets found")
    return RawTrace(np.array(timestamps, dtype=np.float64), np.array(directions, dtype=np.int8))


def serialize_trace(trace: RawTrace) -> str:
    """Render a trace in the canonical on-disk format."""
    return "".join(
        f"{t:.6f}\t{d:+d}\n" for t, d in zip(trace.timestamps, trace.directions)
    )


def load_trace(path) -> RawTrace:
    path = Path(path)
    try:
        return parse_trace_file(path.read_text(encoding="utf-8"))
    except TraceError as err:
        raise type(err)(err.message, line=err.line, path=path) from None


def save_trace(trace: RawTrace, path) -> None:
    Path(path).write_text(serialize_trace(trace), encoding="utf-8", newline="\n")


def load_corpus(root, n_mon: int) -> Corpus:
    """Load every trace under root into a labeled corpus.

    Monitored labels come from filenames; unmonitored entries carry the
    sentinel class n_mon. Site indices must be dense in [0, n_mon).
    Per-file parse failures are aggregated into one ParseError.
    """
    root = Path(root)
    if n_mon < 0:
        raise ValueError("n_mon must be non-negative")
    mon_dir = root / "monitored"
    unmon_dir = root / "unmonitored"
    if not mon_dir.is_dir() and not unmon_dir.is_dir():
        raise LayoutError("expected monitored/ or unmonitored/ subdirectory", path=root)

    monitored: list[tuple[int, int, Path]] = []
    if mon_dir.is_dir():
        for path in sorted(mon_dir.glob("*.txt")):
            match = _MONITORED_NAME.match(path.stem)
            if match is None:
                raise LayoutError("monitored filename must be <site>-<instance>.txt", path=path)
            site, instance = int(match.group(1)), int(match.group(2))
            if site >= n_mon:
                raise LayoutError(f"site index {site} >= n_mon={n_mon}", path=path)
            monitored.append((site, instance, path))
    seen = {site for site, _, _ in monitored}
    missing = sorted(set(range(n_mon)) - seen)
    if missing:
        raise LayoutError(f"missing monitored site indices {missing}", path=mon_dir)

    unmonitored: list[tuple[int, Path]] = []
    if unmon_dir.is_dir():
        for path in sorted(unmon_dir.glob("*.txt")):
            match = _UNMONITORED_NAME.match(path.stem)
            if match is None:
                raise LayoutError("unmonitored filename must be <id>.txt", path=path)
            unmonitored.append((int(match.group(1)), path))

    entries: list[tuple[RawTrace, TraceLabel]] = []
    failures: list[str] = []
    for site, instance, path in sorted(monitored):
        try:
            entries.append((load_trace(path), TraceLabel(site, instance)))
        except TraceError as err:
            failures.append(str(err))
    for uid, path in sorted(unmonitored):
        try:
            entries.append((load_trace(path), TraceLabel(n_mon, uid)))
        except TraceError as err:
            failures.append(str(err))
    if failures:
        raise ParseError(
            f"{len(failures)} file(s) failed to parse:\n" + "\n".join(failures), path=root
        )
    return Corpus(entries, n_mon=n_mon)


def save_corpus(corpus: Corpus, root) -> None:
    """Write a corpus in the canonical directory layout."""
    root = Path(root)
    (root / "monitored").mkdir(parents=True, exist_ok=True)
    for trace, label in corpus.entries:
        if label.class_id < corpus.n_mon:
            path = root / "monitored" / f"{label.class_id}-{label.instance_id}.txt"
        else:
            (root / "unmonitored").mkdir(parents=True, exist_ok=True)
            path = root / "unmonitored" / f"{label.instance_id}.txt"
        save_trace(trace, path)


def infer_n_mon(root) -> int:
    """Count monitored sites in a corpus directory (max site index + 1)."""
    mon_dir = Path(root) / "monitored"
    if not mon_dir.is_dir():
        return 0
    sites = set()
    for path in mon_dir.glob("*.txt"):
        match = _MONITORED_NAME.match(path.stem)
        if match is None:
            raise LayoutError("monitored filename must be <site>-<instance>.txt", path=path)
        sites.add(int(match.group(1)))
    return max(sites) + 1 if sites else 0
