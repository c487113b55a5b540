"""Simulator and analysis toolkit for two-spin entanglement-enhanced
magnetometry with an optically read sensor spin and an environmental
ancilla spin."""

__version__ = "1.0.0"

from .spinsys import (  # noqa: F401
    CONSTANTS,
    DensityState,
    Operator,
    SpinLayout,
    bell_coherence,
    build_operator,
    layout,
    partial_trace,
    polarized_state,
    pure_state,
)
from .dynamics import (  # noqa: F401
    DecoherenceEnvelope,
    DriveTerm,
    DrivenDecayModel,
    FieldModel,
    HamiltonianSpec,
    OUNoiseModel,
    optical_pump,
    propagate,
)
from .protocols import (  # noqa: F401
    GateParams,
    NuclearFactor,
    PulseSequence,
    calibrate_gate_error,
    polarization_transfer,
    prepare_entangled,
    repetitive_readout,
)
from .readout import ReadoutModel, combined_snr, optimal_weights, snr_gain  # noqa: F401
from .analysis import (  # noqa: F401
    FitResult,
    MagnetometryCurve,
    SensitivityReport,
    SweepGrid,
    TimingBudget,
    fit_sinusoid,
    fit_stretched_exp,
    gain_performance,
    gain_sensitivity,
    min_field,
    overhead_factor,
    snr_bound_check,
    sweep_gain_map,
)
