"""Opportunistic downlink interference alignment: link-level simulator.

Multi-cell MIMO downlink with opportunistic user scheduling, cascaded
reference + zero-forcing precoding, interference-minimizing receive
filters, and optional codebook-quantized feedback, plus a seeded Monte
Carlo harness that sweeps SNR, user counts, feedback resolution, and
scheduler thresholds.
"""

__version__ = "0.1.0"

from .channel import NetworkConfig, NetworkRealization, db_to_linear, generate_realization, linear_to_db
from .codebook import Codebook, PackingQuality, grassmannian_codebook, load_codebook, random_codebook, save_codebook
from .errors import (
    CodebookFormatError,
    ConfigError,
    DegenerateInputError,
    NumericalFailure,
    SingularMatrixError,
    SvdConvergenceError,
)
from .harness import (
    ExperimentConfig,
    FeedbackConfig,
    GridSearchResult,
    SeOdiaSpec,
    SweepResult,
    emit_results,
    grid_search_se_odia,
    load_config,
    load_preset,
    parse_config,
    preset_names,
    run_point_samples,
    run_sweep,
    run_trial,
)
from .metrics import DofEstimate, TrialMetrics, dof_slope, per_user_rate, trial_metrics
from .numerics import Rng, SvdResult, invert, mix64, sample_gaussian_matrix, sample_orthonormal_columns, svd
from .precoder import PrecoderSet, quantized_precoder, zero_forcing_precoder
from .receiver import (
    CellReports,
    InterferenceProfile,
    QuantizedChannel,
    UserReport,
    build_report,
    cell_reports,
    effective_channel,
    interference_profile,
    optimal_beamformer,
    quantize_channel,
    stack_interference_matrix,
)
from .scheduler import (
    OrthogonalBasisState,
    ScheduleDecision,
    SeOdiaParams,
    orthogonal_projection,
    schedule_max_snr,
    schedule_min_inr,
    schedule_odia,
    schedule_se_odia,
)
from .validation import (
    EligibilityReport,
    TailExponentReport,
    chi_squared_gof,
    decay_regression,
    eligibility_probe,
    fit_tail_exponent,
)
