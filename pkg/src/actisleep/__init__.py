"""actisleep: training-free sleep/wake onset detection from actigraphy.

A rigid sigmoidally-transformed cosine captures the subject's circadian
rhythm and splits the recording into coarse sleep-wake cycles; a bounded
gamma change-point search then pins each onset to the minute; a label-free
variance-ratio score R evaluates the result and screens likely failures.
No diaries, no training data.
"""

from .core import ChangePoint, CpKind, CpSet, CpSource, DnSplit, LabelVector
from .cpd import (
    CpSearchResult,
    GammaSegmentModel,
    PenaltySchedule,
    estimate_shape,
    floor_shift,
    gamma_segment_cost,
    pelt,
    single_cp_search,
)
from .detect import build_label_vector, refine_change_points, split_dn
from .ingest import (
    EpochSeries,
    WearPolicy,
    WearResult,
    max_zero_run,
    parse_actigraphy,
    validate_wear,
    write_actigraphy,
)
from .metrics import (
    CohortSummary,
    FlagReason,
    ScreenConfig,
    SubjectReport,
    TTestResult,
    cohort_summary,
    paired_one_sided_t,
    r_metric,
    screen,
)
from .stc import (
    DichotomizeConfig,
    SolverConfig,
    StcFit,
    StcParams,
    cosine_eval,
    default_start_grid,
    dichotomize,
    fit_stc,
    hill,
    stc_curve,
    stc_eval,
)
from .synth import GammaSpec, GroundTruth, NonwearRun, SynthConfig, generate_subject

__version__ = "0.1.0"
