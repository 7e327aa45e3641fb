"""Analog and digital quantum-trajectory simulation of noisy circuits."""

from .angles import AngleDistribution, make_distribution, second_moment_check, solve_scale
from .channels import (
    AmplitudeDampingChannel,
    CoherentChannel,
    DepolarizingChannel,
    NoiseChannel,
    PauliChannel,
    amplitude_damping,
    coherent,
    depolarizing,
    expand_to_pauli,
    kraus_operators,
    pauli_channel,
    validate,
)
from .circuits import (
    Graph,
    NoisyCircuit,
    Op,
    build_ising_2d,
    build_maxcut_floquet,
    build_tilted_ising,
    build_toy_model,
    build_xy_chain,
    random_3_regular_graph,
)
from .density import DensityMatrix, apply_channel_dm, apply_unitary_dm, evolve_circuit_dm
from .errors import (
    AnalogTrajError,
    CapacityError,
    ConfigurationError,
    ContractError,
    DimensionError,
    DomainError,
    NonPhysicalFactorizationError,
    SingularChannelError,
)
from .factorization import FactorizedChannel, factorize, pauli_fidelities, verify_factorization
from .harness import (
    TrajectoryReport,
    entropy_ensemble,
    estimate,
    kl_topk,
    run_ensemble,
    run_trajectory,
    toy_model_stats,
    variance_ratio,
)
from .pauli import PauliString, anticommutant, commutes, enumerate_strings
from .samplers import SamplerSpec, max_identity_deviation
from .statevector import Observable, StateVector

__version__ = "0.1.0"
