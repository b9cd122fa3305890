"""Dilated causal 1-D residual classifier with metadata fusion.

The sequence trunk is an 18-layer residual network adapted to 1-D: a
kernel-7 stride-2 stem with a window-3 stride-2 max-pool, then 4 stages of
2 basic blocks (conv-BN-ReLU-conv-BN, add skip, ReLU). Every convolution
and the pool are causal (left zero padding), so an activation at time t
never sees inputs after t. The 16 stage convolutions take dilation rates
cycling 1,2,4,8 in network order, which grows the receptive field
exponentially over each cycle. A parallel branch embeds the 7 metadata
statistics; trunk and branch outputs are concatenated, passed through a
rectified combined layer with dropout, and projected to class logits.

Strided causal convolution is defined as the stride-1 causal output
sampled at every second index starting at 0; the downsampling blocks use a
width-matching stride-2 projection on the skip path.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

N_METADATA = 7
DILATION_CYCLE = (1, 2, 4, 8)


class ConfigError(Exception):
    """Model configuration violates an architecture invariant."""


class ShapeError(Exception):
    """Input tensors do not match the configured shapes."""


@dataclass(frozen=True)
class ModelConfig:
    """Architecture description of one classifier variant."""

    n_classes: int
    seq_len: int = 5000
    stage_widths: tuple[int, ...] = (64, 128, 256, 512)
    blocks_per_stage: int = 2
    kernel: int = 3
    stem_kernel: int = 7
    metadata_units: int = 32
    combined_units: int = 1024
    dropout: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "stage_widths", tuple(int(w) for w in self.stage_widths))
        if self.n_classes < 2:
            raise ConfigError("need at least two classes")
        if self.seq_len < 1:
            raise ConfigError("seq_len must be positive")
        if len(self.stage_widths) != 4 or self.blocks_per_stage != 2:
            raise ConfigError("trunk must have 4 stages of 2 blocks (16 stage convolutions)")
        if any(w < 1 for w in self.stage_widths):
            raise ConfigError("stage widths must be positive")
        if self.kernel < 1 or self.stem_kernel < 1:
            raise ConfigError("kernel sizes must be positive")
        if self.metadata_units < 1 or self.combined_units < 1:
            raise ConfigError("branch widths must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout must lie in [0, 1)")

    @property
    def n_stage_convs(self) -> int:
        return len(self.stage_widths) * self.blocks_per_stage * 2

    def dilation_schedule(self) -> tuple[int, ...]:
        """Dilations of the 16 stage convolutions in network order."""
        return tuple(DILATION_CYCLE[i % len(DILATION_CYCLE)] for i in range(self.n_stage_convs))

    def trunk_layers(self) -> list[tuple[int, int, int]]:
        """(kernel, dilation, stride) of every trunk window op in order.

        The stride-2 max-pool behaves like a kernel-3 window for receptive
        field purposes. Projection shortcuts (kernel 1) never widen a path.
        """
        layers = [(self.stem_kernel, 1, 2), (3, 1, 2)]
        dilations = self.dilation_schedule()
        i = 0
        for stage in range(len(self.stage_widths)):
            for block in range(self.blocks_per_stage):
                stride = 2 if stage > 0 and block == 0 else 1
                layers.append((self.kernel, dilations[i], stride))
                layers.append((self.kernel, dilations[i + 1], 1))
                i += 2
        return layers

    def to_dict(self) -> dict:
        data = asdict(self)
        data["stage_widths"] = list(self.stage_widths)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        data = dict(data)
        data["stage_widths"] = tuple(data["stage_widths"])
        return cls(**data)


def causal_conv(series, weights, dilation: int = 1) -> np.ndarray:
    """Causal dilated convolution of a scalar series.

    output[t] = sum_j weights[j] * series[t - j*dilation], with positions
    before the start treated as zero. Output length equals input length.
    """
    if dilation < 1:
        raise ValueError("dilation must be >= 1")
    x = np.asarray(series, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if x.ndim != 1 or w.ndim != 1 or len(w) < 1:
        raise ValueError("series and weights must be non-empty 1-D arrays")
    out = np.zeros(len(x), dtype=np.float64)
    for j in range(len(w)):
        shift = j * dilation
        if shift >= len(x):
            break
        if shift == 0:
            out += w[j] * x
        else:
            out[shift:] += w[j] * x[:-shift]
    return out


def path_receptive_field(layers) -> int:
    """Receptive field of a serial stack of (kernel, dilation, stride) ops."""
    rf = 1
    cumulative_stride = 1
    for kernel, dilation, stride in layers:
        rf += (kernel - 1) * dilation * cumulative_stride
        cumulative_stride *= stride
    return rf


def receptive_field(config: ModelConfig) -> int:
    """Input steps visible to one final trunk position."""
    return path_receptive_field(config.trunk_layers())


def trunk_stride(config: ModelConfig) -> int:
    """Input steps per final trunk position; position p's window ends at input p*stride."""
    stride = 1
    for _, _, s in config.trunk_layers():
        stride *= s
    return stride


class CausalConv1d(nn.Module):
    """Conv1d with left zero padding so output[t] depends on inputs <= t.

    With stride s the result equals the stride-1 causal output sampled at
    every s-th index starting at index 0.
    """

    def __init__(self, in_channels, out_channels, kernel, dilation=1, stride=1, bias=False):
        super().__init__()
        self.left_pad = (kernel - 1) * dilation
        self.conv = nn.Conv1d(
            in_channels, out_channels, kernel, stride=stride, dilation=dilation, bias=bias
        )

    def forward(self, x):
        return self.conv(F.pad(x, (self.left_pad, 0)))


def causal_max_pool(x, window: int = 3, stride: int = 2):
    # -inf padding keeps the window maximum over real positions only
    return F.max_pool1d(F.pad(x, (window - 1, 0), value=float("-inf")), window, stride=stride)


class ResidualBlock(nn.Module):
    """conv-BN-ReLU-conv-BN, add skip, ReLU; optional stride-2 projection."""

    def __init__(self, in_channels, out_channels, kernel, dilations, stride, activation=nn.ReLU):
        super().__init__()
        self.conv1 = CausalConv1d(in_channels, out_channels, kernel, dilations[0], stride)
        self.bn1 = nn.BatchNorm1d(out_channels)
        self.conv2 = CausalConv1d(out_channels, out_channels, kernel, dilations[1], 1)
        self.bn2 = nn.BatchNorm1d(out_channels)
        self.act = activation()
        if stride != 1 or in_channels != out_channels:
            self.proj_conv = CausalConv1d(in_channels, out_channels, 1, 1, stride)
            self.proj_bn = nn.BatchNorm1d(out_channels)
        else:
            self.proj_conv = None
            self.proj_bn = None

    def forward(self, x):
        skip = x if self.proj_conv is None else self.proj_bn(self.proj_conv(x))
        y = self.act(self.bn1(self.conv1(x)))
        y = self.bn2(self.conv2(y))
        return self.act(y + skip)


class SequenceClassifier(nn.Module):
    """Trunk + metadata branch + combined classifier head."""

    def __init__(self, config: ModelConfig, activation=nn.ReLU):
        super().__init__()
        self.config = config
        widths = config.stage_widths
        self.stem_conv = CausalConv1d(1, widths[0], config.stem_kernel, 1, 2)
        self.stem_bn = nn.BatchNorm1d(widths[0])
        self.act = activation()

        dilations = config.dilation_schedule()
        blocks = []
        in_channels = widths[0]
        i = 0
        for stage, width in enumerate(widths):
            for block in range(config.blocks_per_stage):
                stride = 2 if stage > 0 and block == 0 else 1
                blocks.append(
                    ResidualBlock(
                        in_channels, width, config.kernel,
                        dilations[i : i + 2], stride, activation,
                    )
                )
                in_channels = width
                i += 2
        self.blocks = nn.ModuleList(blocks)

        self.metadata_fc = nn.Linear(N_METADATA, config.metadata_units)
        self.combined_fc = nn.Linear(widths[-1] + config.metadata_units, config.combined_units)
        self.drop = nn.Dropout(config.dropout)
        self.output_fc = nn.Linear(config.combined_units, config.n_classes)

    def trunk(self, sequence):
        """Feature map [B, C, T'] before global pooling; sequence is [B, L]."""
        x = sequence.unsqueeze(1)
        x = self.act(self.stem_bn(self.stem_conv(x)))
        x = causal_max_pool(x)
        for block in self.blocks:
            x = block(x)
        return x

    def forward(self, sequence, metadata):
        pooled = self.trunk(sequence).mean(dim=2)
        branch = self.act(self.metadata_fc(metadata))
        combined = self.act(self.combined_fc(torch.cat([pooled, branch], dim=1)))
        return self.output_fc(self.drop(combined))


@dataclass
class NetworkParameters:
    """Weights and batch-norm running statistics keyed by layer name."""

    config: ModelConfig
    state: dict[str, np.ndarray]

    def to_module(self, activation=nn.ReLU) -> SequenceClassifier:
        module = SequenceClassifier(self.config, activation)
        module.load_state_dict({k: torch.from_numpy(v.copy()) for k, v in self.state.items()})
        return module

    @classmethod
    def from_module(cls, config: ModelConfig, module: nn.Module) -> "NetworkParameters":
        state = {k: v.detach().cpu().numpy().copy() for k, v in module.state_dict().items()}
        return cls(config=config, state=state)


def _init_weights(module: nn.Module) -> None:
    # variance-scaled fan-in init; batch norm starts as the identity map
    for m in module.modules():
        if isinstance(m, nn.Conv1d):
            nn.init.kaiming_normal_(m.weight, mode="fan_in", nonlinearity="relu")
            if m.bias is not None:
                nn.init.zeros_(m.bias)
        elif isinstance(m, nn.Linear):
            nn.init.kaiming_normal_(m.weight, mode="fan_in", nonlinearity="relu")
            nn.init.zeros_(m.bias)
        elif isinstance(m, nn.BatchNorm1d):
            nn.init.ones_(m.weight)
            nn.init.zeros_(m.bias)


def build_network(config: ModelConfig, seed: int = 0) -> NetworkParameters:
    """Freshly initialized parameters, deterministic given the seed."""
    torch.manual_seed(seed)
    module = SequenceClassifier(config)
    _init_weights(module)
    return NetworkParameters.from_module(config, module)


def forward(
    params: NetworkParameters,
    sequence_batch,
    metadata_batch,
    inference_mode: bool = True,
    batch_size: int = 256,
) -> np.ndarray:
    """Score a batch; rows of the result are softmax distributions.

    inference_mode fixes batch-norm statistics and disables dropout. The
    module is rebuilt from params per call, so training-mode batch-norm
    side effects never leak back into params.
    """
    torch.set_flush_denormal(True)
    seq = np.asarray(sequence_batch, dtype=np.float32)
    meta = np.asarray(metadata_batch, dtype=np.float32)
    if seq.ndim != 2 or seq.shape[1] != params.config.seq_len:
        raise ShapeError(f"sequence batch must be [B, {params.config.seq_len}], got {seq.shape}")
    if meta.ndim != 2 or meta.shape[1] != N_METADATA or meta.shape[0] != seq.shape[0]:
        raise ShapeError(f"metadata batch must be [{seq.shape[0]}, {N_METADATA}], got {meta.shape}")
    module = params.to_module()
    module.train(not inference_mode)
    if len(seq) == 0:
        return np.zeros((0, params.config.n_classes), dtype=np.float64)
    chunks = []
    with torch.no_grad():
        for start in range(0, len(seq), batch_size):
            logits = module(
                torch.from_numpy(seq[start : start + batch_size]),
                torch.from_numpy(meta[start : start + batch_size]),
            )
            chunks.append(F.softmax(logits, dim=1).numpy())
    return np.concatenate(chunks, axis=0).astype(np.float64)


def save_checkpoint(
    params: NetworkParameters, variant: str, val_accuracy: float, epoch: int, path
) -> None:
    """Archive of named weight arrays plus a JSON header."""
    if variant not in ("direction", "time"):
        raise ValueError(f"variant must be 'direction' or 'time', got {variant!r}")
    header = {
        "config": params.config.to_dict(),
        "variant": variant,
        "val_accuracy": float(val_accuracy),
        "epoch": int(epoch),
    }
    np.savez(
        path,
        header=np.str_(json.dumps(header, sort_keys=True, separators=(",", ":"))),
        **params.state,
    )


def load_checkpoint(path) -> tuple[NetworkParameters, dict]:
    with np.load(path, allow_pickle=False) as archive:
        header = json.loads(str(archive["header"]))
        state = {k: archive[k] for k in archive.files if k != "header"}
    config = ModelConfig.from_dict(header["config"])
    return NetworkParameters(config=config, state=state), header
