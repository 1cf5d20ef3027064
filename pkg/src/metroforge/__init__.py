"""Noise-aware design of encoder/decoder circuits for quantum phase sensing.

Typical use::

    from metroforge import NoiseModel, build_baseline, cfi_phi, ExactBackend

    circuit = build_baseline("ghz-inv", 3)
    cfi_phi(ExactBackend(), circuit, phi=0.2, t=20e-6, noise=NoiseModel.ibm_average())
"""

from .ansatz import ProposalExhausted, default_hyper_schedule, is_degenerate, propose
from .baselines import BaselineKind, baseline_structure, baseline_t_sweep, build_baseline
from .circuit import (
    CNOT,
    H,
    Rz,
    U3,
    X,
    CircuitError,
    CircuitStructure,
    ConcreteCircuit,
    ConnectivityGraph,
    Gate,
    Hyperparams,
    LengthMismatch,
    ParameterAssignment,
    SignalSpec,
    Slot,
    UnboundSlot,
    bind_parameters,
    validate_structure,
)
from .metrics import (
    ObjectiveConfig,
    ObjectiveReport,
    cfi_omega,
    cfi_phi,
    classical_fisher,
    distribution_and_derivative,
    evaluate_report,
    expected_cfi,
    objective,
    qfi_phi,
    snr_bound,
    stage_qfi_decomposition,
)
from .noise import KrausChannel, NoiseError, NoiseModel, OutOfRange, Unphysical, readout_confusion
from .optimize import (
    CircuitObjective,
    OptimizerSettings,
    SearchResult,
    circuit_objective_factory,
    nelder_mead,
    optimize_continuous,
    outer_loop,
    powell,
)
from .simulator import ExactBackend, SampledBackend, measure, run_circuit

__version__ = "0.1.0"
