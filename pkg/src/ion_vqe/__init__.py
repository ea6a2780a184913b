"""ion-vqe: UCC ansatz compiler and VQE simulator for a trapped-ion gate set.

Builds qubit Hamiltonians from FCIDUMP integrals, ranks FCI excitations into
HF+N unitary coupled-cluster ansätze, compiles them to {CNOT, XX(θ), H, S, Rz}
circuits with template synthesis and rewrite passes, and evaluates energies
exactly or from simulated shots with SPAM correction and bootstrap errors.

Example usage::

    from ion_vqe import (
        Evaluator, Mode, build_ucc_ansatz, fci_ground_state,
        load_fcidump, minimize, rank_excitations,
    )

    ham = load_fcidump("h2o_sto3g.fcidump")
    fci = fci_ground_state(ham)
    ranked = rank_excitations(fci, ham.reference(), 3)
    spec = build_ucc_ansatz(ranked, 3, ham.reference(), ham.n_spatial)
    run = minimize(Evaluator.build(spec, ham, Mode.EXACT))
    print(run.best_energy - fci.energy)
"""

__version__ = "0.1.0"

from ion_vqe.ansatz import AnsatzSpec, ExcitationTerm, build_ucc_ansatz, map_qubits, order_terms, trotterize
from ion_vqe.circuit import Angle, Circuit, Gate, GateCounts, count_gates
from ion_vqe.compiler import assemble, raw_circuit
from ion_vqe.config import (
    Mode,
    OptimizerConfig,
    PassConfig,
    RunConfig,
    SamplingConfig,
    TrotterConfig,
)
from ion_vqe.errors import (
    ConfigError,
    ContractViolation,
    ConvergenceError,
    FcidumpParseError,
    FitError,
    InputError,
    MissingBasisError,
    NumericalError,
    ParameterCountError,
    SingularConfusionError,
    VqeError,
)
from ion_vqe.hamiltonian import (
    ExcitationKind,
    FciSolution,
    RankedExcitation,
    SpinOrbitalHamiltonian,
    dump_fcidump,
    fci_ground_state,
    hf_energy,
    jordan_wigner,
    load_fcidump,
    parse_fcidump,
    rank_excitations,
    select_orbitals,
)
from ion_vqe.measurement import (
    CalibrationFit,
    EnergyEstimate,
    MeasurementBasis,
    bootstrap,
    estimate_energy,
    group_terms,
    parity_calibration,
    spam_correct,
)
from ion_vqe.passes import cancel_pass, convert_cnot_to_xx, encode_filled_as_zero
from ion_vqe.pauli import PauliString, QubitHamiltonian
from ion_vqe.simulator import ShotHistogram, SpamModel, StateVector, expectation, run_exact, sample_shots
from ion_vqe.synthesis import chain_xx, synth_bosonic, synth_nonbosonic, synth_pauli_exponential
from ion_vqe.vqe import (
    ConvergenceReport,
    Evaluator,
    VqeRun,
    convergence_report,
    energy_at,
    minimize,
    scan_surface,
)

__all__ = [
    # Errors
    "VqeError",
    "InputError",
    "FcidumpParseError",
    "ContractViolation",
    "ParameterCountError",
    "MissingBasisError",
    "ConfigError",
    "NumericalError",
    "ConvergenceError",
    "SingularConfusionError",
    "FitError",
    # Config
    "Mode",
    "TrotterConfig",
    "PassConfig",
    "SamplingConfig",
    "OptimizerConfig",
    "RunConfig",
    # Hamiltonian
    "SpinOrbitalHamiltonian",
    "parse_fcidump",
    "load_fcidump",
    "dump_fcidump",
    "hf_energy",
    "jordan_wigner",
    "FciSolution",
    "fci_ground_state",
    "ExcitationKind",
    "RankedExcitation",
    "rank_excitations",
    "select_orbitals",
    # Qubit operators
    "PauliString",
    "QubitHamiltonian",
    # Ansatz
    "ExcitationTerm",
    "AnsatzSpec",
    "build_ucc_ansatz",
    "trotterize",
    "order_terms",
    "map_qubits",
    # Circuits
    "Angle",
    "Gate",
    "Circuit",
    "GateCounts",
    "count_gates",
    "synth_bosonic",
    "synth_pauli_exponential",
    "synth_nonbosonic",
    "chain_xx",
    "cancel_pass",
    "convert_cnot_to_xx",
    "encode_filled_as_zero",
    "raw_circuit",
    "assemble",
    # Simulation
    "StateVector",
    "run_exact",
    "expectation",
    "SpamModel",
    "ShotHistogram",
    "sample_shots",
    # Measurement
    "MeasurementBasis",
    "group_terms",
    "spam_correct",
    "estimate_energy",
    "EnergyEstimate",
    "bootstrap",
    "CalibrationFit",
    "parity_calibration",
    # VQE
    "Evaluator",
    "energy_at",
    "VqeRun",
    "minimize",
    "scan_surface",
    "ConvergenceReport",
    "convergence_report",
]
