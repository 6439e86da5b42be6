"""Volume products of low-dimensional polytopes.

Computes polar duals and Santalo points of V-polytopes, the volume product
P(K) = |K| |K^{s(K)}|, first-order maximality diagnostics for candidates,
closed-form extremal values, and a multistart vertex-gradient search for
maximal-volume-product polytopes with a fixed vertex count.
"""

from .errors import (
    BadArity,
    BadFacet,
    CenterNotInterior,
    DegenerateAlongPath,
    DegenerateInput,
    DimensionMismatch,
    EmptyInput,
    GeometryError,
    IndexOutOfRange,
    NoConvergence,
    SingularMatrix,
    StalledBelowTolerance,
    StartGenerationFailed,
    SubgradientWarning,
    TGridOutsideRegion,
    UnknownSuite,
)
from .geometry import (
    DEFAULT_TOL,
    FacetComplex,
    Tolerance,
    VPolytope,
    affine_map,
    centroid,
    cone_volumes,
    contains,
    facet_centroid,
    facet_measure,
    hausdorff_distance,
    hull,
    polar,
    polytope_from_json,
    polytope_to_json,
    read_polytope,
    volume,
    write_polytope,
)
from .santalo import (
    SantaloOptions,
    SantaloResult,
    StabilityProbe,
    polar_volume_at,
    recentered,
    santalo_point,
    stability_probe,
    volume_product,
)
from .criticality import (
    CriticalityReport,
    PolygonLambdaTable,
    first_order_terms,
    is_simplicial,
    minimizer_inequality_check,
    polygon_lambda_table,
    vertex_residuals,
)
from .constructions import (
    POLYGON_VP_LIMIT,
    ClosedFormValue,
    affine_regular_polygon,
    closed_form_Pm,
    closed_form_simplex_vp,
    closed_form_symmetric_vp,
    conv_two_simplices,
    cross_polytope,
    cube,
    f_n_k,
    g_of,
    oracle_rows,
    regular_polygon,
    remark_counterexample,
    simplex,
)
from .optimizer import (
    AscendOptions,
    OptimizeTrace,
    PerturbationProbe,
    ShadowProbe,
    ascend,
    optimize_multistart,
    probe_facet_bump,
    shadow_convexity_probe,
    sweep_M,
    vp_gradient,
)

__version__ = "0.1.0"
