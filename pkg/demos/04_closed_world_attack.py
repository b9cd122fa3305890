"""End-to-end closed-world attack at demo scale.

Trains the direction and time variants on a small easy corpus, then
shows the post-training ensemble: the arithmetic mean of the two softmax
outputs. Runs in a few minutes on a laptop CPU; shrink --sites/--traces
further if you are impatient.
"""
import numpy as np

from wfbench import (
    TrainingConfig,
    build_dataset,
    generate_corpus,
    generate_site_profiles,
    split_corpus,
    train_model,
)
from wfbench import ensemble, metrics, model
from wfbench.training import variant_sequences

SITES, TRACES, SEED = 5, 40, 3

profiles = generate_site_profiles(SITES, SEED, "easy")
corpus = generate_corpus(profiles, traces_per_site=TRACES, n_unmonitored=0, seed=SEED)
dataset = build_dataset(corpus, split_corpus(corpus.labels, SITES, SEED))
test_idx = dataset.split_indices("test")
labels = dataset.labels[test_idx]
print(f"{len(corpus)} traces; train/val/test "
      f"{len(dataset.split_indices('train'))}/{len(dataset.split_indices('val'))}/{len(test_idx)}")

config = TrainingConfig(max_epochs=4, batch_size=16, seed=1)
probs = {}
for variant in ("direction", "time"):
    print(f"\ntraining {variant} variant:")
    params, history = train_model(variant, dataset, training_config=config, progress=print)
    sequences = variant_sequences(dataset, variant)
    probs[variant] = model.forward(params, sequences[test_idx], dataset.metadata[test_idx])
    preds = ensemble.apply_threshold(probs[variant], 0.0, None)
    acc = metrics.closed_world_accuracy(preds, labels)
    print(f"{variant} test accuracy: {acc:.3f}")

combined = ensemble.average_softmax(probs["direction"], probs["time"])
preds = ensemble.apply_threshold(combined, 0.0, None)
print(f"\nensemble test accuracy: {metrics.closed_world_accuracy(preds, labels):.3f}")
