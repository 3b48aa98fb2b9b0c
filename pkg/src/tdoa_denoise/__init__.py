"""TDOA matrix algebra, denoising, robust estimation, completion, and benchmarks."""

from .completion import (
    Mask,
    RecoverabilityReport,
    complete,
    complete_gauge,
    recoverability,
    recovery_system,
    robust_complete,
)
from .denoise import denoise_closed_form, denoise_element_form
from .errors import (
    ConvergenceError,
    DegenerateMatrixError,
    InvalidMatrixError,
    LocalizationError,
    MatrixFormatError,
    NonRecoverableMaskError,
    TdoaError,
    UndefinedMetricError,
)
from .localize import chan_ho_locate
from .matrices import (
    ConsistencyReport,
    SvdPair,
    check_skew_symmetric,
    compose,
    decompose,
    from_toas,
    is_consistent,
    projection_residual,
    svd_params,
)
from .robust import OutlierMatrix, RobustResult, hard_threshold_pairs, robust_denoise
from .scenes import (
    SPEED_OF_SOUND,
    CorruptionSpec,
    Scene,
    Trial,
    corrupt,
    ground_truth_tdoa,
    nonredundant_column,
    random_scene,
    simulate_trial,
    snr_db,
    toa_vector,
)
from .sweep import PIPELINES, SweepConfig, SweepResult, run_sweep

__version__ = "0.1.0"

__all__ = [
    "ConsistencyReport",
    "ConvergenceError",
    "CorruptionSpec",
    "DegenerateMatrixError",
    "InvalidMatrixError",
    "LocalizationError",
    "Mask",
    "MatrixFormatError",
    "NonRecoverableMaskError",
    "OutlierMatrix",
    "PIPELINES",
    "RecoverabilityReport",
    "RobustResult",
    "SPEED_OF_SOUND",
    "Scene",
    "SvdPair",
    "SweepConfig",
    "SweepResult",
    "TdoaError",
    "Trial",
    "UndefinedMetricError",
    "chan_ho_locate",
    "check_skew_symmetric",
    "complete",
    "complete_gauge",
    "compose",
    "corrupt",
    "decompose",
    "denoise_closed_form",
    "denoise_element_form",
    "from_toas",
    "ground_truth_tdoa",
    "hard_threshold_pairs",
    "is_consistent",
    "nonredundant_column",
    "projection_residual",
    "random_scene",
    "recoverability",
    "recovery_system",
    "robust_complete",
    "robust_denoise",
    "run_sweep",
    "simulate_trial",
    "snr_db",
    "svd_params",
    "toa_vector",
]
