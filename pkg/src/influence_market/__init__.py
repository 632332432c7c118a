"""Menus of persuasion experiments sold to privately informed senders.

Core objects: the persuasion Environment and its implementable-bundle
polytope (model), sender-type distributions with virtual types
(distributions), optimal menus and welfare (menus), and the discrete LP
oracle certifying the closed forms (oracle).
"""

from .distributions import (
    AssumptionReport,
    FunctionDistribution,
    PiecewiseLinearCDF,
    Thresholds,
    TypeDistribution,
    Uniform,
    check_assumptions,
    solve_thresholds,
    virtual_minus,
    virtual_plus,
)
from .errors import (
    AssumptionError,
    ConfigError,
    DistributionError,
    InfeasibleBundle,
    InternalError,
    InvalidEnvironment,
    InvalidExperiment,
    ScopeError,
)
from .menus import (
    AccessSolution,
    CoercionSolution,
    Menu,
    ModeWelfare,
    PriorShiftReport,
    Segment,
    WelfareReport,
    access_pricing,
    coercion_menu,
    comparative_statics,
    extended_menu,
    first_best,
    indirect_utility,
    optimal_menu,
    receiver_optimal_equalizing_test,
    receiver_welfare,
    revenue,
    welfare_report,
    willingness_to_pay,
)
from .model import (
    ACTION_L,
    ACTION_R,
    ACTION_S,
    Atom,
    Classification,
    Environment,
    Experiment,
    GarblingVerdict,
    InfluenceBundle,
    Membership,
    PolytopeGeometry,
    bundle_to_experiment,
    classify,
    constraint_rows,
    contains,
    equalizing_bundle,
    geometry,
    is_garbling,
    make_environment,
    mirror,
    mirror_bundle,
    mirror_environment,
    receiver_value,
    recommendation_kernel,
    sender_value,
)
from .oracle import (
    DiscreteInstance,
    OracleComparison,
    OracleSolution,
    ViolationReport,
    compare_to_oracle,
    discretize,
    discretize_instance,
    lp_oracle,
    verify_discrete,
    verify_menu,
)

__version__ = "0.1.0"
