"""Identification of operators with bandlimited symbols from delta-train probes."""

from .experiments import (
    ConfigError,
    ExperimentConfig,
    Report,
    run as run_experiment,
    version_hash,
    write_report,
)
from .grid import GridAlignmentError, GridSpec, PlaneArray, SampledSignal
from .identify import (
    SamplingScheme,
    find_cover,
    full_spark_min_det,
    make_weights,
    realize_identifier,
)
from .operators import (
    BandlimitedOperator,
    SupportRegion,
    operator_norm_estimate,
    random_opw,
    sup_norm_on,
)
from .recover import (
    CoefficientTable,
    ZakSlices,
    coefficients_from_csv,
    discrete_coefficients,
    eta_from_slices,
    recover_kernel_general,
    recover_kernel_rect,
    symbol_from_coefficients,
    zak_system_solve,
)
from .transforms import (
    forward_ft,
    inverse_ft,
    stft,
    stft_lattice,
    symplectic_ft,
    zak_full,
    zak_inverse,
    zak_transform,
)
from .windows import (
    WindowPair,
    build_lowpass,
    build_mollifier,
    build_pou_pair,
    frame_bounds,
    gabor_synthesis,
    pou_defect,
)

__all__ = [
    "BandlimitedOperator",
    "CoefficientTable",
    "ConfigError",
    "ExperimentConfig",
    "GridAlignmentError",
    "GridSpec",
    "PlaneArray",
    "Report",
    "SampledSignal",
    "SamplingScheme",
    "SupportRegion",
    "WindowPair",
    "ZakSlices",
    "build_lowpass",
    "build_mollifier",
    "build_pou_pair",
    "coefficients_from_csv",
    "discrete_coefficients",
    "eta_from_slices",
    "find_cover",
    "forward_ft",
    "frame_bounds",
    "full_spark_min_det",
    "gabor_synthesis",
    "inverse_ft",
    "make_weights",
    "operator_norm_estimate",
    "pou_defect",
    "random_opw",
    "realize_identifier",
    "recover_kernel_general",
    "recover_kernel_rect",
    "run_experiment",
    "stft",
    "stft_lattice",
    "sup_norm_on",
    "symbol_from_coefficients",
    "symplectic_ft",
    "version_hash",
    "write_report",
    "zak_full",
    "zak_inverse",
    "zak_system_solve",
    "zak_transform",
]
