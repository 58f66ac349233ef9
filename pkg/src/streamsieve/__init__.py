"""Streaming group-anomaly detection for mixed categorical/numeric streams.

Per-record pipeline: locality-sensitive hashing of each feature and of the
whole record, decayed approximate counting in fixed memory, and a
chi-squared statistic contrasting this tick's activity against the stream
history. Scores are emitted one per record, in input order; choosing an
alert threshold is left to the consumer.
"""

from .dimred import (
    AffineLayer,
    BootstrapBuffer,
    Transform,
    apply,
    fit_pca,
    fit_pca_rows,
    load_transform,
    save_transform,
)
from .evaluate import roc_auc, streaming_auc
from .hashing import (
    GaussianProjection,
    HasherBank,
    LinearHasher,
    NumericHashState,
    hash_categorical,
    hash_numeric,
    hash_record,
    token_fingerprint,
)
from .pipeline import (
    ConfigError,
    DataError,
    DimredConfig,
    RunConfig,
    ScoreRow,
    StreamEngine,
    load_config,
    run,
    run_csv,
    save_config,
)
from .records import (
    Column,
    ColumnKind,
    Record,
    Schema,
    StreamParser,
    TickPolicy,
    parse_record,
    read_csv,
    validate_schema,
)
from .scoring import ScoreReport, chi2, score_record
from .sketch import CountMatrix, DecayPair, SketchBank
from .synth import AnomalyBlock, generate, synth_schema, toy_stream

__version__ = "0.1.0"

__all__ = [
    "AffineLayer",
    "AnomalyBlock",
    "BootstrapBuffer",
    "Column",
    "ColumnKind",
    "ConfigError",
    "CountMatrix",
    "DataError",
    "DecayPair",
    "DimredConfig",
    "GaussianProjection",
    "HasherBank",
    "LinearHasher",
    "NumericHashState",
    "Record",
    "RunConfig",
    "Schema",
    "ScoreReport",
    "ScoreRow",
    "SketchBank",
    "StreamEngine",
    "StreamParser",
    "TickPolicy",
    "Transform",
    "apply",
    "chi2",
    "fit_pca",
    "fit_pca_rows",
    "generate",
    "hash_categorical",
    "hash_numeric",
    "hash_record",
    "load_config",
    "load_transform",
    "parse_record",
    "read_csv",
    "roc_auc",
    "run",
    "run_csv",
    "save_config",
    "save_transform",
    "score_record",
    "streaming_auc",
    "synth_schema",
    "token_fingerprint",
    "toy_stream",
    "validate_schema",
]
