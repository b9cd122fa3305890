"""Single-variant training with plateau decay and early stopping.

Optimization is adaptive-moment gradient descent on categorical
cross-entropy. Validation accuracy drives the schedule: 5 epochs without
improvement decays the learning rate by sqrt(0.1) (floored at 1e-5), 10
epochs without improvement stops training. The parameters of the
best-validation epoch are returned, not the final ones.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
import torch
import torch.nn.functional as F

from .dataset import ProcessedDataset
from .model import ModelConfig, NetworkParameters, SequenceClassifier, _init_weights

CONTINUE = "continue"
DECAY = "decay"
STOP = "stop"

VARIANTS = ("direction", "time")


class DivergenceError(Exception):
    """Loss became non-finite."""

    def __init__(self, epoch: int, batch: int):
        self.epoch = epoch
        self.batch = batch
        super().__init__(f"non-finite loss at epoch {epoch}, batch {batch}")


@dataclass(frozen=True)
class TrainingConfig:
    initial_lr: float = 0.001
    decay_factor: float = math.sqrt(0.1)
    decay_patience: int = 5
    stop_patience: int = 10
    min_lr: float = 0.00001
    batch_size: int = 128
    max_epochs: int = 150
    seed: int = 0

    def __post_init__(self):
        if self.stop_patience != 2 * self.decay_patience:
            raise ValueError("stop_patience must be twice decay_patience")
        if not 0 < self.min_lr <= self.initial_lr:
            raise ValueError("need 0 < min_lr <= initial_lr")
        if not 0 < self.decay_factor < 1:
            raise ValueError("decay_factor must lie in (0, 1)")
        if self.decay_patience < 1 or self.batch_size < 1 or self.max_epochs < 0:
            raise ValueError("patience and batch_size must be positive, max_epochs non-negative")


@dataclass(frozen=True)
class ScheduleState:
    current_lr: float
    best_val_acc: float
    epochs_since_improvement: int
    epochs_since_decay_trigger: int

    @classmethod
    def initial(cls, config: TrainingConfig) -> "ScheduleState":
        return cls(config.initial_lr, -math.inf, 0, 0)


def schedule_step(
    state: ScheduleState, epoch_val_acc: float, config: TrainingConfig
) -> tuple[ScheduleState, str]:
    """Pure schedule transition for one epoch's validation accuracy.

    Improvement (strict) resets both counters. Hitting decay patience
    decays the rate and resets only the decay counter; hitting stop
    patience wins over a simultaneous decay trigger.
    """
    if epoch_val_acc > state.best_val_acc:
        return ScheduleState(state.current_lr, epoch_val_acc, 0, 0), CONTINUE
    since_improve = state.epochs_since_improvement + 1
    since_decay = state.epochs_since_decay_trigger + 1
    if since_improve >= config.stop_patience:
        return (
            ScheduleState(state.current_lr, state.best_val_acc, since_improve, since_decay),
            STOP,
        )
    if since_decay >= config.decay_patience:
        new_lr = max(state.current_lr * config.decay_factor, config.min_lr)
        return ScheduleState(new_lr, state.best_val_acc, since_improve, 0), DECAY
    return (
        ScheduleState(state.current_lr, state.best_val_acc, since_improve, since_decay),
        CONTINUE,
    )


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    train_acc: float
    val_acc: float
    lr: float


def history_to_json(history: list[EpochRecord]) -> str:
    return json.dumps([asdict(r) for r in history], indent=2) + "\n"


def variant_sequences(dataset: ProcessedDataset, variant: str) -> np.ndarray:
    if variant == "direction":
        return dataset.direction.astype(np.float32)
    if variant == "time":
        return dataset.timing.astype(np.float32)
    raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")


def _batched_accuracy(module, sequences, metadata, labels, idx, batch_size) -> float:
    module.eval()
    correct = 0
    with torch.no_grad():
        for start in range(0, len(idx), batch_size):
            rows = idx[start : start + batch_size]
            logits = module(
                torch.from_numpy(sequences[rows]), torch.from_numpy(metadata[rows])
            )
            correct += int((logits.argmax(dim=1).numpy() == labels[rows]).sum())
    return correct / len(idx)


def dataset_accuracy(
    params: NetworkParameters,
    dataset: ProcessedDataset,
    variant: str,
    part: str = "val",
    batch_size: int = 256,
) -> float:
    """Exact-match accuracy of params on one split partition."""
    sequences = variant_sequences(dataset, variant)
    idx = dataset.split_indices(part)
    module = params.to_module()
    return _batched_accuracy(
        module, sequences, dataset.metadata.astype(np.float32), dataset.labels, idx, batch_size
    )


def train_model(
    variant: str,
    dataset: ProcessedDataset,
    model_config: ModelConfig | None = None,
    training_config: TrainingConfig | None = None,
    progress=None,
) -> tuple[NetworkParameters, list[EpochRecord]]:
    """Train one variant; returns the best-validation parameters and history.

    Deterministic given the config seed: initialization, per-epoch
    shuffling, and dropout all derive from it. The final partial batch is
    kept. Raises DivergenceError if the loss stops being finite.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    config = training_config if training_config is not None else TrainingConfig()
    train_idx = dataset.split_indices("train")
    val_idx = dataset.split_indices("val")
    if len(train_idx) == 0 or len(val_idx) == 0:
        raise ValueError("dataset must have non-empty train and val partitions")
    if model_config is None:
        model_config = ModelConfig(n_classes=dataset.n_classes, seq_len=dataset.seq_len)

    torch.set_flush_denormal(True)
    torch.manual_seed(config.seed)
    module = SequenceClassifier(model_config)
    _init_weights(module)

    sequences = variant_sequences(dataset, variant)
    metadata = dataset.metadata.astype(np.float32)
    labels = dataset.labels

    optimizer = torch.optim.Adam(module.parameters(), lr=config.initial_lr)
    state = ScheduleState.initial(config)
    best_snapshot = {k: v.detach().clone() for k, v in module.state_dict().items()}
    history: list[EpochRecord] = []

    for epoch in range(config.max_epochs):
        order = np.random.default_rng(np.random.SeedSequence([config.seed, epoch])).permutation(
            len(train_idx)
        )
        module.train()
        loss_sum = 0.0
        correct = 0
        for batch_no, start in enumerate(range(0, len(order), config.batch_size)):
            rows = train_idx[order[start : start + config.batch_size]]
            seq = torch.from_numpy(sequences[rows])
            meta = torch.from_numpy(metadata[rows])
            target = torch.from_numpy(labels[rows])
            optimizer.zero_grad()
            logits = module(seq, meta)
            loss = F.cross_entropy(logits, target)
            if not torch.isfinite(loss):
                raise DivergenceError(epoch, batch_no)
            loss.backward()
            optimizer.step()
            loss_sum += loss.item() * len(rows)
            correct += int((logits.argmax(dim=1) == target).sum())

        train_loss = loss_sum / len(order)
        train_acc = correct / len(order)
        val_acc = _batched_accuracy(module, sequences, metadata, labels, val_idx, config.batch_size)
        history.append(EpochRecord(epoch, train_loss, train_acc, val_acc, state.current_lr))

        if val_acc > state.best_val_acc:
            best_snapshot = {k: v.detach().clone() for k, v in module.state_dict().items()}
        state, decision = schedule_step(state, val_acc, config)
        if progress is not None:
            progress(
                f"epoch {epoch}: loss {train_loss:.4f} acc {train_acc:.4f} "
                f"val {val_acc:.4f} lr {history[-1].lr:.2e} [{decision}]"
            )
        if decision == STOP:
            break
        if decision == DECAY:
            for group in optimizer.param_groups:
                group["lr"] = state.current_lr

    params = NetworkParameters(
        config=model_config, state={k: v.numpy().copy() for k, v in best_snapshot.items()}
    )
    return params, history
