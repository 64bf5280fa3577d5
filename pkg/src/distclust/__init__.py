"""Distributed density-based clustering via quality-ranked local representatives."""

from .clustering import (
    NOISE,
    UNCLASSIFIED,
    GlobalLabeling,
    GlobalParams,
    ReferenceLabeling,
    enlarged_radius,
    global_dbscan,
    reference_dbscan,
    weighted_neighborhood_count,
)
from .datagen import CLUSTER_PARAMS, DatasetSpec, dataset_spec, generate
from .errors import ConsistencyError, DistClustError, InputError
from .evaluation import (
    CostModel,
    QualityReport,
    TransmissionCost,
    adjusted_rand,
    evaluate,
    matching_quality,
    transmission_cost,
)
from .geometry import (
    Dataset,
    Point,
    RangeIndex,
    build_index,
    distance,
    load_dataset_csv,
    range_query,
    save_dataset_csv,
)
from .pipeline import (
    ExperimentConfig,
    PipelineResult,
    SweepRow,
    merge_streams,
    partition,
    run_pipeline,
    sweep,
)
from .relabel import LocalLabeling, relabel_site
from .representatives import (
    RepresentativeRecord,
    RepresentativeStream,
    SelectionState,
    StopCriterion,
    covering_stats,
    dyn_rep_q,
    select_representatives,
    stat_rep_q,
)

__version__ = "0.1.0"
