"""regulab: a numerical laboratory for regularity properties of set-valued
maps and parametric variational inequalities on compact boxes.

The package estimates Hölder moduli of metric regularity, subregularity
and pseudo-Hölder continuity from paired distance samples, tests openness
and extremum-freeness of maps, fits growth inequalities between scalar
functions, and solves parametric variational inequalities through the
normal-map reformulation, cross-checking the equivalent regularity
conditions against each other.
"""

from .core import (
    INF,
    AnalysisBox,
    FixtureError,
    InternalConsistencyError,
    PointSet,
)
from .expr import Expression, ExprError, ParseError, parse
from .fixtures import BUILTIN_FIXTURES, Fixture, load_fixture
from .lojasiewicz import (
    LojaFit,
    MuProfile,
    compute_mu,
    default_t_grid,
    fit_growth,
    fit_pair,
    verify_inequality,
)
from .map_model import (
    GraphSample,
    Inverse,
    MapModel,
    Polyhedral,
    SingleValued,
    forward_set,
    inverse_set,
    range_membership,
)
from .metrics import (
    Ball,
    Box,
    ConvexSet,
    Polyhedron,
    WholeSpace,
    dist_to_image,
    dist_to_preimage,
    project,
    project_many,
)
from .regularity import (
    EquivalenceAudit,
    ExtremumReport,
    HolderFit,
    OpennessReport,
    RegularitySample,
    equivalence_audit,
    estimate_metric_regularity,
    estimate_pseudo_holder,
    estimate_subregularity,
    fit_holder_envelope,
    test_extremum_free,
    test_openness,
)
from .vi import (
    SweepReport,
    VIEquivalenceAudit,
    VIProblem,
    brute_force_solutions,
    normal_map,
    normal_map_eval,
    solution_set,
    solve_normal_equation,
    sweep_solution_map,
    test_lower_semicontinuity,
    vi_equivalence_audit,
    vi_residual,
)

__version__ = "0.1.0"

__all__ = [
    "INF",
    "AnalysisBox",
    "FixtureError",
    "InternalConsistencyError",
    "PointSet",
    "Expression",
    "ExprError",
    "ParseError",
    "parse",
    "BUILTIN_FIXTURES",
    "Fixture",
    "load_fixture",
    "LojaFit",
    "MuProfile",
    "compute_mu",
    "default_t_grid",
    "fit_growth",
    "fit_pair",
    "verify_inequality",
    "GraphSample",
    "Inverse",
    "MapModel",
    "Polyhedral",
    "SingleValued",
    "forward_set",
    "inverse_set",
    "range_membership",
    "Ball",
    "Box",
    "ConvexSet",
    "Polyhedron",
    "WholeSpace",
    "dist_to_image",
    "dist_to_preimage",
    "project",
    "project_many",
    "EquivalenceAudit",
    "ExtremumReport",
    "HolderFit",
    "OpennessReport",
    "RegularitySample",
    "equivalence_audit",
    "estimate_metric_regularity",
    "estimate_pseudo_holder",
    "estimate_subregularity",
    "fit_holder_envelope",
    "test_extremum_free",
    "test_openness",
    "SweepReport",
    "VIEquivalenceAudit",
    "VIProblem",
    "brute_force_solutions",
    "normal_map",
    "normal_map_eval",
    "solution_set",
    "solve_normal_equation",
    "sweep_solution_map",
    "test_lower_semicontinuity",
    "vi_equivalence_audit",
    "vi_residual",
    "__version__",
]
