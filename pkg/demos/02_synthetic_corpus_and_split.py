"""Synthetic corpora and the train/validation/test split.

Site profiles control burst structure (direction signal) and packet rate
(timing signal). The "easy" regime spaces sites far apart so a desk-scale
run can verify the whole pipeline; "hard" overlaps them. The split takes
10% of each site's traces for testing and 5% of the remaining monitored
pool for validation.
"""
import numpy as np

from wfbench import build_dataset, generate_corpus, generate_site_profiles, split_corpus
from wfbench.features import extract_metadata

profiles = generate_site_profiles(n_sites=4, seed=11, separability="easy")
for p in profiles:
    print(
        f"site {p.site_id}: rate {p.rate:7.1f} pkt/s, mean length {p.trace_length_mean:5d}, "
        f"bursts out/in {p.mean_burst_out:.1f}/{p.mean_burst_in:.1f}"
    )

corpus = generate_corpus(profiles, traces_per_site=20, n_unmonitored=30, seed=11)
print(f"\ncorpus: {len(corpus)} traces, {corpus.n_mon} monitored sites, sentinel class {corpus.sentinel}")

# class structure is visible in the metadata alone for the easy regime
meta = np.array([extract_metadata(t) for t, lab in corpus.entries if lab.class_id < 4])
labels = np.array([lab.class_id for _, lab in corpus.entries if lab.class_id < 4])
for site in range(4):
    rows = meta[labels == site]
    print(f"site {site}: mean packets {rows[:, 0].mean():7.1f}, mean total time {rows[:, 5].mean():6.2f}s")

split = split_corpus(corpus.labels, corpus.n_mon, seed=11, unmon_train=20, unmon_test=10)
print(
    f"\nsplit sizes: train {len(split.train_idx)}, val {len(split.val_idx)}, "
    f"test {len(split.test_idx)} (disjoint by construction)"
)

dataset = build_dataset(corpus, split)
print("dataset tensors:", dataset.direction.shape, dataset.timing.shape, dataset.metadata.shape)
print("manifest classes:", dataset.classes)
train = dataset.split_indices("train")
lengths = np.count_nonzero(dataset.direction[train], axis=1)
region = dataset.timing[train][np.arange(5000)[None, :] < lengths[:, None]]
print(f"standardized training timing: mean {region.mean():+.4f}, std {region.std():.4f}")
