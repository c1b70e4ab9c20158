"""somsurvey: self-organizing-map toolkit for categorical survey tables."""

from .analysis import (
    GridMap,
    component_plane,
    correlation_report,
    hit_map,
    plane_correlation,
    similar_groups,
    u_matrix,
)
from .impute import ImputeConfig, knn_impute
from .ingest import (
    ColumnSchema,
    EncodedMatrix,
    EncodingScheme,
    SurveyTable,
    default_scheme,
    encode,
    parse_survey,
    summarize,
)
from .som import (
    BmuAssignment,
    Codebook,
    PhaseSchedule,
    TrainingConfig,
    assign_bmus,
    find_bmu,
    init_codebook,
    neighborhood_weight,
    quantization_error,
    topographic_error,
    train,
    update_step,
)
from .synth import SynthSpec, generate_synthetic
from .viz import ColorScale, RenderOptions, default_likert_scale, render

__version__ = "0.1.0"
