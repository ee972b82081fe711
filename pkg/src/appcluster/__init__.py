"""Incremental affinity propagation clustering.

Core pieces: a damped message-passing AP engine, an incremental variant
that warm-starts messages from nearest neighbors, and an a-posteriori
variant that consolidates prior clusters into centroids, traces
creation/enrichment/merge/prune events, and prunes aged clusters.
"""

from ._kernels import BACKEND
from .ap import APConfig, ClusteringResult, MessageState, run_ap, run_message_passing
from .app import (
    AppState,
    Cluster,
    StratificationEvent,
    app_step,
    classify_stratification,
    load_snapshot,
    pack,
    prune,
    save_snapshot,
    split,
    unpack_and_update,
    write_events_jsonl,
)
from .data import (
    ArrivalSchedule,
    Dataset,
    ScheduleGenerationError,
    default_q,
    load_csv,
    load_schedule,
    normalize_cumulative,
    save_schedule,
    subset_top_categories,
    uniform_schedule,
    validate_schedule,
    variable_schedule,
)
from .geometry import (
    build_similarity_matrix,
    negative_euclidean,
    pairwise_similarities,
    preference_value,
)
from .harness import (
    ExperimentConfig,
    StepRecord,
    aggregate_median,
    export,
    matrix_footprint_mb,
    run_experiment,
)
from .iapna import IAPNAState, extend_messages, iapna_step, nearest_neighbor
from .metrics import cluster_count, nmi, purity

__version__ = "0.1.0"
