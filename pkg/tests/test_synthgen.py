import numpy as np
import pytest

from wfbench.features import extract_metadata
from wfbench.synthgen import (
    SiteProfile,
    generate_corpus,
    generate_site_profiles,
    generate_trace,
    profiles_to_json,
)


def nearest_centroid_accuracy(corpus):
    """Oracle classifier: nearest class centroid on z-scored metadata."""
    meta = np.array([extract_metadata(t) for t, _ in corpus.entries])
    labels = np.array([lab.class_id for _, lab in corpus.entries])
    mean, std = meta.mean(axis=0), meta.std(axis=0) + 1e-12
    z = (meta - mean) / std
    train = np.arange(len(labels)) % 2 == 0
    centroids = {c: z[train & (labels == c)].mean(axis=0) for c in np.unique(labels)}
    classes = sorted(centroids)
    stack = np.stack([centroids[c] for c in classes])
    predicted = [classes[np.argmin(((row - stack) ** 2).sum(axis=1))] for row in z[~train]]
    return float(np.mean(np.array(predicted) == labels[~train]))


def test_profiles_deterministic():
    a = generate_site_profiles(8, seed=7)
    b = generate_site_profiles(8, seed=7)
    assert a == b
    assert a != generate_site_profiles(8, seed=8)


def test_easy_two_sites_rate_ratio():
    for seed in range(20):
        p0, p1 = generate_site_profiles(2, seed=seed, separability="easy")
        assert max(p0.rate, p1.rate) / min(p0.rate, p1.rate) >= 4


def test_bad_separability_rejected():
    with pytest.raises(ValueError):
        generate_site_profiles(2, seed=1, separability="medium")


def test_profile_validation():
    with pytest.raises(ValueError):
        SiteProfile(0, 1.0, 1.0, 1.0, 10.0, 100, 0.1)  # fraction not inside (0,1)
    with pytest.raises(ValueError):
        SiteProfile(0, -1.0, 1.0, 0.5, 10.0, 100, 0.1)


def test_trace_satisfies_invariants():
    profiles = generate_site_profiles(4, seed=3)
    for profile in profiles:
        trace = generate_trace(profile, seed=11)
        assert len(trace) >= 2
        assert trace.timestamps[0] == 0.0
        assert np.all(np.diff(trace.timestamps) >= 0)
        assert set(np.unique(trace.directions)) <= {-1, 1}


def test_minimum_length_two():
    profile = SiteProfile(0, 2.0, 2.0, 0.5, 100.0, 2, 0.0)
    for seed in range(5):
        assert len(generate_trace(profile, seed)) >= 2


def test_gap_mean_matches_rate():
    profile = SiteProfile(0, 3.0, 3.0, 0.5, 250.0, 10_001, 0.0)
    trace = generate_trace(profile, seed=5)
    gaps = np.diff(trace.timestamps)
    assert abs(gaps.mean() - 1.0 / 250.0) / (1.0 / 250.0) < 0.05


def test_corpus_reproducible_bit_exact():
    profiles = generate_site_profiles(3, seed=2)
    a = generate_corpus(profiles, traces_per_site=4, n_unmonitored=5, seed=9)
    b = generate_corpus(profiles, traces_per_site=4, n_unmonitored=5, seed=9)
    assert len(a) == len(b) == 3 * 4 + 5
    for (ta, la), (tb, lb) in zip(a.entries, b.entries):
        assert la == lb and ta == tb


def test_unmonitored_labels_and_diversity():
    corpus = generate_corpus(generate_site_profiles(2, seed=0), 3, n_unmonitored=6, seed=4)
    unmon = [t for t, lab in corpus.entries if lab.class_id == corpus.n_mon]
    assert len(unmon) == 6
    lengths = {len(t) for t in unmon}
    assert len(lengths) > 1  # one-off profiles, not clones


def test_easy_corpus_centroid_accuracy():
    profiles = generate_site_profiles(10, seed=21, separability="easy")
    corpus = generate_corpus(profiles, traces_per_site=20, n_unmonitored=0, seed=21)
    assert nearest_centroid_accuracy(corpus) >= 0.9


def test_hard_corpus_overlaps():
    profiles = generate_site_profiles(10, seed=21, separability="hard")
    corpus = generate_corpus(profiles, traces_per_site=20, n_unmonitored=0, seed=21)
    assert nearest_centroid_accuracy(corpus) < 0.9


def test_profiles_json_roundtrip():
    profiles = generate_site_profiles(3, seed=1)
    text = profiles_to_json(profiles)
    import json

    decoded = json.loads(text)
    assert len(decoded) == 3 and decoded[0]["site_id"] == 0
