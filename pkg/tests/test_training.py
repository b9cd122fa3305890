import math

import numpy as np
import pytest

from wfbench.model import ModelConfig
from wfbench.training import (
    CONTINUE,
    DECAY,
    STOP,
    DivergenceError,
    ScheduleState,
    TrainingConfig,
    dataset_accuracy,
    history_to_json,
    schedule_step,
    train_model,
)

from conftest import make_toy_dataset, miniature_config


def run_schedule(val_accs, config=None):
    config = config or TrainingConfig()
    state = ScheduleState.initial(config)
    decisions = []
    for acc in val_accs:
        state, decision = schedule_step(state, acc, config)
        decisions.append(decision)
    return state, decisions


def test_schedule_improvements_keep_lr():
    state, decisions = run_schedule([0.5, 0.6, 0.7])
    assert decisions == [CONTINUE] * 3
    assert state.current_lr == 0.001
    assert state.best_val_acc == 0.7
    assert state.epochs_since_improvement == 0


def test_schedule_decay_after_five():
    state, decisions = run_schedule([0.7] + [0.6] * 5)
    assert decisions == [CONTINUE] * 5 + [DECAY]
    assert state.current_lr == pytest.approx(0.001 * math.sqrt(0.1))
    assert state.current_lr == pytest.approx(3.162e-4, rel=1e-3)
    assert state.epochs_since_decay_trigger == 0
    assert state.epochs_since_improvement == 5


def test_schedule_stop_after_ten():
    state, decisions = run_schedule([0.7] + [0.6] * 10)
    assert decisions[-1] == STOP
    assert decisions[5] == DECAY  # decay fired at the 5th non-improving epoch
    assert state.epochs_since_improvement == 10


def test_schedule_equal_accuracy_is_not_improvement():
    _, decisions = run_schedule([0.7, 0.7, 0.7, 0.7, 0.7, 0.7])
    assert decisions == [CONTINUE] * 5 + [DECAY]


def test_schedule_lr_floor():
    config = TrainingConfig()
    state = ScheduleState(2e-5, 0.9, 0, 0)
    for _ in range(2):
        for _ in range(5):
            state, decision = schedule_step(state, 0.1, config)
        state = ScheduleState(state.current_lr, state.best_val_acc, 0, 0)  # fake improvement reset
    assert state.current_lr == config.min_lr


def test_schedule_is_pure():
    config = TrainingConfig()
    state = ScheduleState(0.001, 0.5, 3, 3)
    assert schedule_step(state, 0.4, config) == schedule_step(state, 0.4, config)
    assert state.epochs_since_improvement == 3  # untouched


def test_schedule_lr_never_increases(rng):
    config = TrainingConfig()
    state = ScheduleState.initial(config)
    last_lr = config.initial_lr
    for acc in rng.uniform(0, 1, size=200):
        state, _ = schedule_step(state, float(acc), config)
        assert config.min_lr <= state.current_lr <= last_lr
        last_lr = state.current_lr


def test_training_config_invariants():
    with pytest.raises(ValueError):
        TrainingConfig(decay_patience=5, stop_patience=11)
    with pytest.raises(ValueError):
        TrainingConfig(min_lr=0.01, initial_lr=0.001)
    with pytest.raises(ValueError):
        TrainingConfig(decay_factor=1.5)


def test_zero_epochs_returns_initialized_params(rng):
    ds = make_toy_dataset(rng, seq_len=32)
    config = TrainingConfig(max_epochs=0, seed=3)
    params, history = train_model("direction", ds, miniature_config(2), config)
    assert history == []
    from wfbench.model import build_network

    fresh = build_network(miniature_config(2), seed=3)
    for key in fresh.state:
        np.testing.assert_array_equal(params.state[key], fresh.state[key])


def test_training_deterministic(rng):
    ds = make_toy_dataset(rng, seq_len=32, per_class=12)
    config = TrainingConfig(max_epochs=3, batch_size=8, seed=11)
    params_a, hist_a = train_model("time", ds, miniature_config(2), config)
    params_b, hist_b = train_model("time", ds, miniature_config(2), config)
    assert hist_a == hist_b
    for key in params_a.state:
        np.testing.assert_array_equal(params_a.state[key], params_b.state[key])


def test_separable_metadata_learned_quickly(rng):
    ds = make_toy_dataset(rng, n_classes=2, per_class=150, seq_len=32, separable=True)
    # dropout would depress the in-training accuracy reading on a 16-unit head
    model_config = ModelConfig(
        n_classes=2, seq_len=32, stage_widths=(4, 4, 4, 4),
        metadata_units=8, combined_units=16, dropout=0.0,
    )
    config = TrainingConfig(max_epochs=10, batch_size=8, seed=0)
    params, history = train_model("direction", ds, model_config, config)
    assert max(r.train_acc for r in history) >= 0.99
    assert len(history) <= 10


def test_best_checkpoint_fidelity(rng):
    ds = make_toy_dataset(rng, n_classes=2, per_class=20, seq_len=32)
    config = TrainingConfig(max_epochs=4, batch_size=16, seed=7)
    params, history = train_model("direction", ds, miniature_config(2), config)
    best = max(history, key=lambda r: (r.val_acc, -r.epoch))
    replayed = dataset_accuracy(params, ds, "direction", "val")
    assert abs(replayed - best.val_acc) <= 1e-6


def test_divergence_error(rng):
    ds = make_toy_dataset(rng, seq_len=32)
    ds.metadata[:, 0] = np.nan
    config = TrainingConfig(max_epochs=2, seed=0)
    with pytest.raises(DivergenceError) as err:
        train_model("direction", ds, miniature_config(2), config)
    assert err.value.epoch == 0 and err.value.batch == 0


def test_variant_validation(rng):
    ds = make_toy_dataset(rng, seq_len=32)
    with pytest.raises(ValueError):
        train_model("metadata", ds, miniature_config(2))


def test_history_json(rng):
    ds = make_toy_dataset(rng, seq_len=32, per_class=10)
    config = TrainingConfig(max_epochs=2, batch_size=8, seed=1)
    _, history = train_model("direction", ds, miniature_config(2), config)
    import json

    decoded = json.loads(history_to_json(history))
    assert [r["epoch"] for r in decoded] == [0, 1]
    assert set(decoded[0]) == {"epoch", "train_loss", "train_acc", "val_acc", "lr"}
    assert decoded[0]["lr"] == 0.001
