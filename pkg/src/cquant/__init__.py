"""Optimal constrained quantization of the uniform law on a triangle's base.

Code points are restricted to the two non-base sides.  The equilateral
configuration has closed forms; other triangles go through the numeric
solvers, with a brute-force grid oracle for small codebooks.
"""
__version__ = "0.1.0"

from .geometry import (  # noqa: E402
    ConstraintPoint,
    NoCut,
    ParamWindow,
    Side,
    TriangleConfig,
    bisector_cut,
    feasible_param_window,
    normal_foot,
    squared_distance,
)
from .quantizer_core import (  # noqa: E402
    Cell,
    Codebook,
    DegeneratePartition,
    FeasibilityReport,
    Partition,
    build_partition,
    cell_distortion,
    distortion,
    exact_distortion,
    validate_feasibility,
)
from .closed_form import (  # noqa: E402
    V_INFINITY,
    Allocation,
    InfeasibleProgression,
    ProgressionParams,
    best_allocation,
    build_codebook,
    single_side_vn,
    uv,
    vn,
    vn_gap,
)
from .numeric_solver import (  # noqa: E402
    NoConvergence,
    Provenance,
    SolveResult,
    coordinate_descent,
    newton_uv,
    solve,
)
from .asymptotics import (  # noqa: E402
    AsymptoticsReport,
    coefficient_sequence,
    dimension_estimate,
    distance_limit,
    v_infinity,
)
from .oracle import GridSpec, grid_search, restricted_grid_search  # noqa: E402
from .kernels import BACKEND  # noqa: E402
