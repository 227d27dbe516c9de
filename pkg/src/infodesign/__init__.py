"""Finite-state information design: concave envelopes, possibility sets,
constrained optimal signals and dynamic information acquisition."""

from .concavify import CavResult, caratheodory_reduce, concavify, concavify_grid, reduce_structure
from .core import (
    Belief,
    DecisionUtility,
    Entropy,
    Indicator,
    LinearCombination,
    PiecewiseLinear,
    SignalStructure,
    SimplexGrid,
    Tabulated,
    ValueFunction,
    barycenter,
    expected_values,
    mix,
    mix_many,
    value_function_from_dict,
)
from .dynamic import Cost, DynamicSpec, RIResult, ValueTable, bellman_operator, ri_solve, value_iterate
from .estimators import ConcaveEnvelope, DynamicValueIteration, InformationDesignSolver, PossibilitySet
from .exceptions import (
    Indeterminate,
    InfeasiblePrior,
    InfeasibleProblem,
    InfoDesignError,
    MaxIterations,
    NoRoot,
    NonConvergence,
    NotInSet,
    NumericalRankFailure,
    SchemaError,
    Unpersuadable,
)
from .objectives import (
    ExpressionObjective,
    LinearObjective,
    NonnegTail,
    QuadraticObjective,
    Sublevel,
    Unconstrained,
)
from .posset import SetApprox, approximate_set, continuity_probe, implement_point, membership, support_point
from .solver import (
    ProblemSpec,
    Solution,
    recover_multipliers,
    solve,
    solve_convex_constrained,
    solve_generic,
    solve_smooth,
    solve_with_slack,
    value_profile,
)

__version__ = "0.1.0"
