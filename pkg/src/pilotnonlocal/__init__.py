"""Deterministic hidden-variable models of the EPR singlet experiment.

The core model is the pilot-wave spin measurement with two square pointer
packets and ideal von Neumann couplings. On top of the exact trajectory
engine sit ensembles over hidden variables, transition sets, degrees of
nonlocality, nonequilibrium signals and lower bounds on nonlocality.
"""
from .circle import CircleReport, DiscDistribution, circle_model_run, wedge_fraction
from .ensemble import (
    EnsembleDistribution,
    Estimate,
    Exact,
    Grid,
    MonteCarlo,
    SampleStream,
    equilibrium_distribution,
    grid_weights,
    half_square,
    linear_tilt,
    make_distribution,
    point_mass,
    quadrant,
    read_grid_weights,
    region_fraction,
    sample,
    sub_rectangle,
    write_grid_weights,
)
from .nonlocality import (
    BoundCheck,
    ExperimentConfig,
    NonlocalityReport,
    SignalReport,
    TransitionReport,
    balanced_distribution_search,
    bound_check,
    bound_rhs,
    delta_sweep,
    detailed_balance_check,
    entanglement_sweep,
    evaluate_bound,
    nonlocal_bits,
    outcome_statistics,
    shift_at_B,
    signal,
    transition_fractions,
)
from .packets import (
    BranchState,
    CouplingProfile,
    PacketSpec,
    PhasePoint,
    UndefinedVelocityError,
    branch_density,
    equilibrium_density,
    single_spin_velocity,
    velocity,
    velocity_field,
)
from .spin_state import (
    STERN_GERLACH,
    VON_NEUMANN,
    MeasurementSettings,
    PerturbationParams,
    SpinAmplitudes,
    canonicalize_angle,
    perturbed_singlet,
    singlet_amplitudes,
)
from .trajectory import (
    HiddenVariable,
    OutcomePair,
    StallError,
    Trajectory,
    classify_outcome,
    evolve_exact,
    evolve_numeric,
    outcome_map,
    outcome_map_numeric,
    outcome_partition,
    single_spin_outcome,
    single_spin_position,
)

__version__ = "0.1.0"
