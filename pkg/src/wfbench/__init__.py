"""Website-fingerprinting attack workbench.

End-to-end pipeline for packet-sequence classification: trace ingestion,
direction/timing/metadata feature extraction, a dilated causal 1-D
residual classifier with metadata fusion, post-training two-model
ensembling with confidence thresholding, open/closed-world evaluation, a
constant-rate defense simulator, and a seeded synthetic-trace generator
for desk-scale verification.
"""

from .traces import (
    Corpus,
    EmptyTrace,
    LayoutError,
    OrderError,
    ParseError,
    RawTrace,
    TraceError,
    TraceLabel,
    load_corpus,
    load_trace,
    parse_trace_file,
    save_corpus,
    save_trace,
    serialize_trace,
)
from .features import SEQ_LEN, METADATA_FIELDS, extract_direction, extract_metadata, extract_timing
from .dataset import (
    DatasetSplit,
    ProcessedDataset,
    SplitError,
    Standardization,
    build_dataset,
    fit_standardization,
    load_dataset,
    save_dataset,
    split_corpus,
)
from .model import (
    ConfigError,
    ModelConfig,
    NetworkParameters,
    ShapeError,
    build_network,
    causal_conv,
    forward,
    load_checkpoint,
    receptive_field,
    save_checkpoint,
)
from .training import (
    DivergenceError,
    EpochRecord,
    ScheduleState,
    TrainingConfig,
    schedule_step,
    train_model,
)
from .ensemble import EnsembleError, RangeError, apply_threshold, average_softmax
from .metrics import (
    EvaluationReport,
    MetricError,
    closed_world_accuracy,
    open_world_metrics,
    tpr_fpr_curve,
)
from .defense import DefenseConfig, OverheadError, overhead, simulate_constant_rate
from .synthgen import SiteProfile, generate_corpus, generate_site_profiles, generate_trace

__version__ = "0.1.0"
