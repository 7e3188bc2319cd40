"""Piecewise-constant weak solutions of scalar conservation laws on the
circle, with entropy-production cost functionals and near-optimal paths that
realize the quasi-potential of the associated stochastic dynamics."""

from .constructions import (
    ConnectorParams,
    FeasibilityItem,
    FeasibilityReport,
    PathPlan,
    PathStage,
    boundary_curves,
    check_feasibility,
    connector,
    kruzkhov_decay,
    quasipotential_path,
    reverse_plan,
    search_connector_params,
    split_evolution,
    two_shock_absorber,
)
from .errors import (
    DegenerateFlux,
    DomainError,
    EventBudgetExceeded,
    InfeasibleParams,
    MismatchedInterface,
    NonMonotoneSpeeds,
    NotReached,
    QuadratureFailure,
    ScenarioError,
    ShockCostError,
    StallError,
    WindowViolation,
)
from .flux_model import (
    ANTI_ENTROPIC,
    ENTROPIC,
    MIXED,
    ConvexityWindow,
    EinsteinEntropy,
    EntropyPair,
    FluxModel,
    FrontProps,
    convexity_window,
    einstein_entropy,
    front_kind,
    positive_kernel_integral,
    production_integral,
    production_kernel,
    rankine_hugoniot,
    shock_cost_rate,
)
from .front_tracker import (
    CostReport,
    EntropicPolicy,
    Front,
    HoldPolicy,
    SegmentCost,
    Slab,
    SpaceTimeSolution,
    SplitPolicy,
    WeakSolutionReport,
    check_weak_solution,
    concat,
    cost_report,
    evolve,
    reverse,
    track,
)
from .profile import (
    PiecewiseConstantProfile,
    distances,
    einstein_integral,
    mean,
    parity,
)
from .riemann import RiemannFan, entropic_riemann, split_riemann, tangency_point

__version__ = "0.1.0"

__all__ = [
    "ANTI_ENTROPIC",
    "ENTROPIC",
    "MIXED",
    "ConnectorParams",
    "ConvexityWindow",
    "CostReport",
    "DegenerateFlux",
    "DomainError",
    "EinsteinEntropy",
    "EntropicPolicy",
    "EntropyPair",
    "EventBudgetExceeded",
    "FeasibilityItem",
    "FeasibilityReport",
    "FluxModel",
    "Front",
    "FrontProps",
    "HoldPolicy",
    "InfeasibleParams",
    "MismatchedInterface",
    "NonMonotoneSpeeds",
    "NotReached",
    "PathPlan",
    "PathStage",
    "PiecewiseConstantProfile",
    "QuadratureFailure",
    "RiemannFan",
    "ScenarioError",
    "SegmentCost",
    "ShockCostError",
    "Slab",
    "SpaceTimeSolution",
    "SplitPolicy",
    "StallError",
    "WeakSolutionReport",
    "WindowViolation",
    "boundary_curves",
    "check_feasibility",
    "check_weak_solution",
    "concat",
    "connector",
    "convexity_window",
    "cost_report",
    "distances",
    "einstein_entropy",
    "einstein_integral",
    "entropic_riemann",
    "evolve",
    "front_kind",
    "kruzkhov_decay",
    "mean",
    "parity",
    "positive_kernel_integral",
    "production_integral",
    "production_kernel",
    "quasipotential_path",
    "rankine_hugoniot",
    "reverse",
    "reverse_plan",
    "search_connector_params",
    "shock_cost_rate",
    "split_evolution",
    "split_riemann",
    "tangency_point",
    "track",
    "two_shock_absorber",
    "__version__",
]
