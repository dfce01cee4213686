"""Evaluation toolkit for text-to-audio sound-scene synthesis.

Objective scoring (Frechet Audio Distance over pluggable embeddings),
the structured prompt/dataset grammar, subjective-rating aggregation
with self-rating bias correction, the correlation statistics linking
the two, and a listening-test service for collecting ratings.
"""

from .audio import (
    AudioClip,
    AudioDecodeError,
    ContractReport,
    OutputContract,
    decode_wav,
    encode_wav,
    resample,
    select_max_energy_segment,
    validate_contract,
)
from .embeddings import (
    EmbeddingBackendId,
    EmbeddingSet,
    MockStatsBackend,
    embed_clips,
    external_runner_backend,
    load_embeddings,
    read_embeddings,
    save_embeddings,
    write_embeddings,
)
from .fad import (
    BiasPoint,
    FadScore,
    GaussianStats,
    fad,
    fad_bias_curve,
    fit_gaussian,
    frechet_distance,
)
from .prompts import (
    BackgroundCategory,
    DatasetManifest,
    ForegroundCategory,
    ManifestEntry,
    PromptSpec,
    ValidationTargets,
    category_grid,
    co_occurrence,
    load_manifest,
    render_prompt,
    save_manifest,
    validate_manifest,
)
from .ratings import (
    RatingRecord,
    SystemScores,
    aggregate,
    cronbach_alpha,
    final_rating,
    load_ratings_csv,
    replace_self_ratings,
    write_ratings_csv,
)
from .stats import CorrelationResult, pearson, rank, spearman, t_two_sided

__version__ = "0.1.0"
