"""Feature tensors, train/validation/test splits, and dataset persistence.

The split draws, per monitored site, floor(10%) of traces for testing,
then 5% of the remaining monitored pool (regardless of site) for
validation. Unmonitored entries are assigned to caller-designated train
and test pools, with 5% of the train pool moved to validation. Timing and
metadata are z-scored with statistics fitted on training rows only;
direction sequences stay raw.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import features
from .traces import Corpus, TraceLabel

STD_FLOOR = 1e-8


class SplitError(Exception):
    """Corpus cannot satisfy the requested split."""


class DatasetError(Exception):
    """Processed dataset is malformed or cannot be built."""


@dataclass(frozen=True)
class DatasetSplit:
    """Disjoint index lists into the corpus. Indices are sorted ascending."""

    train_idx: tuple[int, ...]
    val_idx: tuple[int, ...]
    test_idx: tuple[int, ...]
    seed: int

    def __post_init__(self):
        parts = (set(self.train_idx), set(self.val_idx), set(self.test_idx))
        total = len(self.train_idx) + len(self.val_idx) + len(self.test_idx)
        if len(parts[0] | parts[1] | parts[2]) != total:
            raise SplitError("split partitions overlap")


@dataclass(frozen=True)
class Standardization:
    """Affine scaling fitted on training rows; stds floored at 1e-8."""

    timing_mean: float
    timing_std: float
    metadata_mean: np.ndarray
    metadata_std: np.ndarray


@dataclass
class ProcessedDataset:
    """Feature tensors plus the manifest describing how they were built."""

    direction: np.ndarray  # [N, seq_len] int8, raw +-1 with zero pad
    timing: np.ndarray  # [N, seq_len] float32, standardized
    metadata: np.ndarray  # [N, 7] float32, standardized
    labels: np.ndarray  # [N] int64
    manifest: dict

    def __post_init__(self):
        n = len(self.labels)
        if not (len(self.direction) == len(self.timing) == len(self.metadata) == n):
            raise DatasetError("tensor row counts disagree")
        if n and int(self.labels.max()) > self.n_mon:
            raise DatasetError("label exceeds unmonitored sentinel")

    @property
    def n_mon(self) -> int:
        return int(self.manifest["n_mon"])

    @property
    def seq_len(self) -> int:
        return int(self.manifest["seq_len"])

    @property
    def classes(self) -> list[str]:
        return list(self.manifest["classes"])

    @property
    def n_classes(self) -> int:
        return len(self.manifest["classes"])

    def split_indices(self, part: str) -> np.ndarray:
        return np.asarray(self.manifest["splits"][part], dtype=np.int64)

    @property
    def standardization(self) -> Standardization:
        s = self.manifest["standardization"]
        return Standardization(
            timing_mean=float(s["timing_mean"]),
            timing_std=float(s["timing_std"]),
            metadata_mean=np.asarray(s["metadata_mean"], dtype=np.float64),
            metadata_std=np.asarray(s["metadata_std"], dtype=np.float64),
        )


def split_corpus(
    labels: list[TraceLabel],
    n_mon: int,
    seed: int,
    unmon_train: int = 0,
    unmon_test: int = 0,
) -> DatasetSplit:
    """Deterministic split of corpus indices given a seed.

    Raises SplitError when a monitored site has fewer than 10 traces or
    the unmonitored pool cannot cover the designated counts.
    """
    rng = np.random.default_rng(seed)
    by_site: dict[int, list[int]] = {}
    unmon: list[int] = []
    for idx, label in enumerate(labels):
        if label.class_id < n_mon:
            by_site.setdefault(label.class_id, []).append(idx)
        else:
            unmon.append(idx)

    test: list[int] = []
    remaining: list[int] = []
    for site in sorted(by_site):
        site_idx = np.array(by_site[site])
        if len(site_idx) < 10:
            raise SplitError(f"site {site} has {len(site_idx)} traces; need at least 10")
        perm = rng.permutation(site_idx)
        n_test = len(site_idx) // 10
        test.extend(perm[:n_test].tolist())
        remaining.extend(perm[n_test:].tolist())

    # validation is drawn from the pooled remainder, not per site
    remaining_arr = rng.permutation(np.array(remaining, dtype=np.int64)) if remaining else np.array([], dtype=np.int64)
    n_val = int(len(remaining_arr) * 5) // 100
    val = remaining_arr[:n_val].tolist()
    train = remaining_arr[n_val:].tolist()

    if unmon_train + unmon_test > len(unmon):
        raise SplitError(
            f"need {unmon_train + unmon_test} unmonitored traces, corpus has {len(unmon)}"
        )
    if unmon_train or unmon_test:
        perm = rng.permutation(np.array(unmon, dtype=np.int64))
        train_pool = perm[:unmon_train]
        test.extend(perm[unmon_train : unmon_train + unmon_test].tolist())
        n_uval = (unmon_train * 5) // 100
        val.extend(train_pool[:n_uval].tolist())
        train.extend(train_pool[n_uval:].tolist())

    return DatasetSplit(
        train_idx=tuple(sorted(train)),
        val_idx=tuple(sorted(val)),
        test_idx=tuple(sorted(test)),
        seed=int(seed),
    )


def extract_feature_arrays(corpus: Corpus, seq_len: int = features.SEQ_LEN):
    """Per-entry feature rows in corpus order (raw, float64 precision)."""
    n = len(corpus)
    direction = np.zeros((n, seq_len), dtype=np.int8)
    timing = np.zeros((n, seq_len), dtype=np.float64)
    metadata = np.zeros((n, len(features.METADATA_FIELDS)), dtype=np.float64)
    labels = np.zeros(n, dtype=np.int64)
    for i, (trace, label) in enumerate(corpus.entries):
        try:
            direction[i] = features.extract_direction(trace, seq_len)
            timing[i] = features.extract_timing(trace, seq_len)
            metadata[i] = features.extract_metadata(trace)
        except Exception as err:
            raise DatasetError(f"feature extraction failed for entry {i} "
                               f"(class {label.class_id}, instance {label.instance_id}): {err}") from err
        labels[i] = label.class_id
    return direction, timing, metadata, labels


def fit_standardization(
    timing: np.ndarray,
    metadata: np.ndarray,
    direction: np.ndarray,
    train_idx,
) -> Standardization:
    """Scaling statistics from training rows only.

    Timing statistics pool the entries covering real packets (the nonzero
    prefix of each direction row); metadata statistics are per feature.
    Population (ddof=0) standard deviations, floored at 1e-8.
    """
    train_idx = np.asarray(train_idx, dtype=np.int64)
    if len(train_idx) == 0:
        raise DatasetError("cannot fit standardization on an empty training set")
    lengths = np.count_nonzero(direction[train_idx], axis=1)
    mask = np.arange(timing.shape[1])[None, :] < lengths[:, None]
    pooled = timing[train_idx][mask]
    t_mean = float(pooled.mean()) if pooled.size else 0.0
    t_std = float(pooled.std()) if pooled.size else 0.0
    m_mean = metadata[train_idx].mean(axis=0)
    m_std = metadata[train_idx].std(axis=0)
    return Standardization(
        timing_mean=t_mean,
        timing_std=max(t_std, STD_FLOOR),
        metadata_mean=m_mean,
        metadata_std=np.maximum(m_std, STD_FLOOR),
    )


def build_dataset(
    corpus: Corpus,
    split: DatasetSplit,
    standardization: Standardization | None = None,
    seq_len: int = features.SEQ_LEN,
) -> ProcessedDataset:
    """Extract, standardize, and assemble the processed dataset.

    Pad positions are standardized with the same affine map as real
    entries, so the trailing pad stays a constant value.
    """
    direction, timing, metadata, labels = extract_feature_arrays(corpus, seq_len)
    n = len(labels)
    for part in (split.train_idx, split.val_idx, split.test_idx):
        for idx in part:
            if not 0 <= idx < n:
                raise DatasetError(f"split index {idx} outside corpus of {n} entries")
    if standardization is None:
        standardization = fit_standardization(timing, metadata, direction, split.train_idx)

    timing_std = ((timing - standardization.timing_mean) / standardization.timing_std).astype(np.float32)
    metadata_std = ((metadata - standardization.metadata_mean) / standardization.metadata_std).astype(np.float32)

    designated = np.concatenate([split.train_idx, split.val_idx, split.test_idx]).astype(np.int64)
    classes = [str(i) for i in range(corpus.n_mon)]
    if designated.size and np.any(labels[designated] == corpus.n_mon):
        classes.append("unmonitored")

    manifest = {
        "classes": classes,
        "n_mon": corpus.n_mon,
        "seq_len": seq_len,
        "splits": {
            "train": [int(i) for i in split.train_idx],
            "val": [int(i) for i in split.val_idx],
            "test": [int(i) for i in split.test_idx],
        },
        "standardization": {
            "timing_mean": standardization.timing_mean,
            "timing_std": standardization.timing_std,
            "metadata_mean": [float(v) for v in standardization.metadata_mean],
            "metadata_std": [float(v) for v in standardization.metadata_std],
        },
        "seed": split.seed,
    }
    return ProcessedDataset(direction, timing_std, metadata_std, labels, manifest)


def manifest_json(dataset: ProcessedDataset) -> str:
    """Canonical (byte-stable) manifest serialization."""
    return json.dumps(dataset.manifest, sort_keys=True, separators=(",", ":"))


def save_dataset(dataset: ProcessedDataset, path) -> None:
    """One archive of named arrays; the manifest rides along as JSON."""
    np.savez(
        path,
        direction=dataset.direction,
        timing=dataset.timing,
        metadata=dataset.metadata,
        labels=dataset.labels,
        manifest=np.str_(manifest_json(dataset)),
    )


def load_dataset(path) -> ProcessedDataset:
    with np.load(path, allow_pickle=False) as archive:
        manifest = json.loads(str(archive["manifest"]))
        return ProcessedDataset(
            direction=archive["direction"],
            timing=archive["timing"],
            metadata=archive["metadata"],
            labels=archive["labels"],
            manifest=manifest,
        )
