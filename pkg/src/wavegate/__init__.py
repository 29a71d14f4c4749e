"""wavegate: simulate and reconstruct gate-scanned direct measurements of
ultrafast temporal wavefunctions."""

__version__ = "0.1.0"

from .analysis import (
    FidelityReport,
    FitReport,
    classical_fidelity,
    dynamic_range,
    fidelity_between,
    fit_phase_gradient,
    fit_sinc_width,
    rebin_density,
)
from .apparatus import (
    CountRecord,
    ExperimentRun,
    FilterSpec,
    GateSpec,
    NoiseSpec,
    POLARIZATIONS,
    ProjectionDistribution,
    ReferenceEnvelope,
    filtered_reference,
    gate_convolve,
    projection_probabilities,
    projection_set,
    run_experiment,
    sample_counts,
    sample_on_grid,
)
from .errors import ConfigError, DataFormatError, GridError, WavegateError
from .grids import (
    FreqGrid,
    SpectralWavefunction,
    TemporalEnvelope,
    TimeGrid,
    spectrum_to_temporal,
    temporal_to_spectrum,
)
from .reconstruct import (
    CorrectionMask,
    RawReconstruction,
    ReconstructionResult,
    correction_mask,
    normalize_and_phase,
    raw_reconstruct,
    reconstruct_envelope,
    reconstruction_to_spectrum,
    sinc_correction,
)
from .states import (
    PhaseStepSpec,
    SlitSpec,
    StripeMaskSpec,
    apply_phase_step,
    slit_spectrum,
    stripe_mask_spectrum,
)

__all__ = [
    "__version__",
    "ConfigError",
    "CorrectionMask",
    "CountRecord",
    "DataFormatError",
    "ExperimentRun",
    "FidelityReport",
    "FilterSpec",
    "FitReport",
    "FreqGrid",
    "GateSpec",
    "GridError",
    "NoiseSpec",
    "POLARIZATIONS",
    "PhaseStepSpec",
    "ProjectionDistribution",
    "RawReconstruction",
    "ReconstructionResult",
    "ReferenceEnvelope",
    "SlitSpec",
    "SpectralWavefunction",
    "StripeMaskSpec",
    "TemporalEnvelope",
    "TimeGrid",
    "WavegateError",
    "apply_phase_step",
    "classical_fidelity",
    "correction_mask",
    "dynamic_range",
    "fidelity_between",
    "filtered_reference",
    "fit_phase_gradient",
    "fit_sinc_width",
    "gate_convolve",
    "normalize_and_phase",
    "projection_probabilities",
    "projection_set",
    "raw_reconstruct",
    "rebin_density",
    "reconstruct_envelope",
    "reconstruction_to_spectrum",
    "run_experiment",
    "sample_counts",
    "sample_on_grid",
    "sinc_correction",
    "slit_spectrum",
    "spectrum_to_temporal",
    "stripe_mask_spectrum",
    "temporal_to_spectrum",
]
