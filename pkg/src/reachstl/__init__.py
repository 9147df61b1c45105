"""reachstl: data-driven reachable sets tightened by STL side information.

Set algebra over zonotopes and constrained zonotopes, a data-driven
reachability recursion for Lipschitz nonlinear systems, and guaranteed
over-approximating intersections with strip predicates extracted from a
bounded signal temporal logic fragment.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DataError,
    DimensionError,
    ExprDomainError,
    ExprSyntaxError,
    FormulaError,
    KinkError,
    ReachStlError,
    ScheduleError,
    SolverError,
)
from .setalg import (
    ConstrainedZonotope,
    IntervalVector,
    MatrixZonotope,
    Zonotope,
    cartesian_product,
    contains_point,
    contains_points,
    from_interval,
    interval_hull,
    is_empty,
    linear_map,
    minkowski_sum,
    reduce_order,
    volume,
)
from .expr import (
    evaluate,
    eval_interval,
    gradient,
    hessian_interval,
    parse_expr,
    to_text,
)
from .stl import (
    Predicate,
    PredicateSchedule,
    compile_schedule,
    monitor,
    parse_formula,
    print_formula,
)
from .reach import (
    LeastSquaresModel,
    ReachConfig,
    TrajectoryDataset,
    build_noise_matrix_zonotope,
    estimate_lipschitz_and_radius,
    fit_model,
    lipschitz_zonotope,
    reach_sequence,
    reach_step,
    residual_zonotope,
)
from .constrain import (
    LagrangeRemainder,
    apply_schedule_cz,
    apply_schedule_zono,
    intersect_cz_linear,
    intersect_cz_nonlinear,
    intersect_zono_linear,
    intersect_zono_nonlinear,
    lagrange_remainder,
    stl_reach,
)
from .scenarios import (
    ScenarioConfig,
    SyntheticSystem,
    build_heading_region,
    build_parking_predicates,
    build_roundabout_predicates,
    generate_dataset,
    run_scenario,
)
