"""Discrete Lagrange-Dirac mechanics for interconnected systems.

Subsystems are composed on a product chart, discretized with a retraction and
stepped with a Newton/KKT solver. The structure-algebra module checks the
underlying direct-sum and tensor-product identities numerically.
"""

from .core_geometry import (
    Chart,
    ConstantOneForms,
    DiscreteLagrangian,
    ProductRetraction,
    Retraction,
    VectorRetraction,
    discretize_force,
    discretize_lagrangian,
    product_retraction,
)
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DiracError,
    DomainError,
    LayoutError,
    NumericalError,
    RankError,
    ShapeError,
    SimulationError,
    StepError,
    UnsupportedError,
)
from .integrator import (
    DiscreteDiracSystem,
    DiscreteState,
    SolverOptions,
    Trajectory,
    constraint_residuals,
    discretize,
    simulate,
    simulate_backward,
    step_minus_backward,
    step_momentum_matched,
    step_plus,
)
from .lab import (
    build_report,
    build_rlc,
    build_spring_chain,
    compare_trajectories,
    convergence_study,
    energy,
    reference_solution,
    structure_suite,
)
from .model import (
    InterconnectionSpec,
    LinearDamping,
    QuadraticLagrangian,
    Subsystem,
    compose,
    continuous_residual,
    discretize_then_interconnect,
)

__version__ = "0.1.0"
