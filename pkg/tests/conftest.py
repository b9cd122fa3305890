import numpy as np
import pytest

from wfbench.dataset import ProcessedDataset
from wfbench.model import ModelConfig
from wfbench.traces import RawTrace


def make_random_trace(rng, n_packets, start=0.0):
    """Trace with arbitrary (valid) timestamps and directions."""
    gaps = rng.exponential(0.01, size=n_packets - 1) if n_packets > 1 else np.array([])
    timestamps = start + np.concatenate(([0.0], np.cumsum(gaps)))
    directions = rng.choice([-1, 1], size=n_packets).astype(np.int8)
    return RawTrace(timestamps, directions)


def miniature_config(n_classes=3, seq_len=32):
    """Tiny trunk used by gradient and causality unit tests."""
    return ModelConfig(
        n_classes=n_classes,
        seq_len=seq_len,
        stage_widths=(4, 4, 4, 4),
        metadata_units=8,
        combined_units=16,
    )


def make_toy_dataset(rng, n_classes=2, per_class=20, seq_len=64, separable=True):
    """Hand-assembled ProcessedDataset with class signal in the metadata."""
    n = n_classes * per_class
    labels = np.repeat(np.arange(n_classes), per_class).astype(np.int64)
    direction = rng.choice([-1, 1], size=(n, seq_len)).astype(np.int8)
    timing = rng.exponential(1.0, size=(n, seq_len)).astype(np.float32)
    metadata = rng.standard_normal((n, 7)).astype(np.float32)
    if separable:
        metadata += 6.0 * labels[:, None]
    order = rng.permutation(n)
    n_val = max(2, n // 10)
    n_test = max(2, n // 10)
    manifest = {
        "classes": [str(c) for c in range(n_classes)],
        "n_mon": n_classes,
        "seq_len": seq_len,
        "splits": {
            "train": sorted(int(i) for i in order[n_val + n_test :]),
            "val": sorted(int(i) for i in order[:n_val]),
            "test": sorted(int(i) for i in order[n_val : n_val + n_test]),
        },
        "standardization": {
            "timing_mean": 0.0,
            "timing_std": 1.0,
            "metadata_mean": [0.0] * 7,
            "metadata_std": [1.0] * 7,
        },
        "seed": 0,
    }
    return ProcessedDataset(direction, timing, metadata, labels, manifest)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
