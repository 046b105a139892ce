"""Exact and stochastic moments of random simplex volumes in convex bodies.

The package computes moments of the (n-1)-volume of the convex hull of n
random points in a convex body (optionally with one vertex pinned to a fixed
point), proves one-sided polynomial bounds on sqrt by exact Sturm
certificates, searches for certificate nodes with an exact rational simplex
method, and cross-checks everything by deterministic Monte Carlo. The
flagship use is the machine verification that pinning a vertex to the
centroid can strictly decrease the expected volume, so these expectations
are not monotone under the natural ordering.
"""

__version__ = "0.1.0"

from .errors import CapacityError, DomainError, UsageError, VerificationError
from .exact import (
    MVPoly,
    NonnegResult,
    SturmChain,
    UniPoly,
    format_rational,
    mv_mul,
    mv_pow,
    parse_rational,
    sturm_nonneg_on_interval,
    uni_eval,
)
from .geometry import (
    Body,
    ball,
    body_from_json,
    body_measures,
    body_to_json,
    boundary_residual,
    contains,
    cube,
    gram_volume,
    halfball,
    is_polytopal,
    monomial_integral_T3,
    polygon_edges,
    product,
    standard_simplex,
    tetrahedron_T3,
    triangle_T2,
)
from .chords import (
    EdgePointSpec,
    TriangleSpec,
    chord_moment,
    csc_power_antiderivative,
    edgepoint_moment,
    ratio_r,
    unit_right_isosceles,
    vertex_moment,
)
from .tetra import (
    FIXED_KMAX_LIMIT,
    FREE_KMAX_LIMIT,
    MomentTable,
    build_gram_poly,
    even_moment,
    even_moment_by_expansion,
    moment_table,
)
from .lp import (
    GREATER_EQUAL,
    LESS_EQUAL,
    LinearProgram,
    LPSolution,
    node_search,
    rationalize,
    solve_simplex,
)
from .certificates import (
    FIXED_B,
    FIXED_BPRIME,
    FREE_B,
    FREE_BPRIME,
    LOWER_DOUBLE_NODES,
    LOWER_SINGLE_NODES,
    PIVOT,
    UPPER_DOUBLE_NODES,
    UPPER_SINGLE_NODES,
    Certificate,
    bound_from_moments,
    build_certificate,
    certificate_from_json,
    certificate_to_json,
    error_polynomial,
    hermite_interpolate,
    lower_area_certificate,
    upper_area_certificate,
    upper_sqrt_rational,
    verify_bound_polynomial,
    verify_counterexample,
)
from .mc import (
    CHUNK_SIZE,
    RNG_ALGORITHM,
    EstimateWithError,
    RngStream,
    estimate_moment,
    estimate_surface_moment,
    sample_boundary_uniform,
    sample_uniform,
)
from .lifting import (
    boundary_convergence_sweep,
    find_epsilon0,
    interior_convergence_sweep,
    lift_body,
)
from .cli import RunManifest, main

__all__ = [
    "CapacityError",
    "DomainError",
    "UsageError",
    "VerificationError",
    "MVPoly",
    "NonnegResult",
    "SturmChain",
    "UniPoly",
    "format_rational",
    "mv_mul",
    "mv_pow",
    "parse_rational",
    "sturm_nonneg_on_interval",
    "uni_eval",
    "Body",
    "ball",
    "body_from_json",
    "body_measures",
    "body_to_json",
    "boundary_residual",
    "contains",
    "cube",
    "gram_volume",
    "halfball",
    "is_polytopal",
    "monomial_integral_T3",
    "polygon_edges",
    "product",
    "standard_simplex",
    "tetrahedron_T3",
    "triangle_T2",
    "EdgePointSpec",
    "TriangleSpec",
    "chord_moment",
    "csc_power_antiderivative",
    "edgepoint_moment",
    "ratio_r",
    "unit_right_isosceles",
    "vertex_moment",
    "FIXED_KMAX_LIMIT",
    "FREE_KMAX_LIMIT",
    "MomentTable",
    "build_gram_poly",
    "even_moment",
    "even_moment_by_expansion",
    "moment_table",
    "GREATER_EQUAL",
    "LESS_EQUAL",
    "LinearProgram",
    "LPSolution",
    "node_search",
    "rationalize",
    "solve_simplex",
    "FIXED_B",
    "FIXED_BPRIME",
    "FREE_B",
    "FREE_BPRIME",
    "LOWER_DOUBLE_NODES",
    "LOWER_SINGLE_NODES",
    "PIVOT",
    "UPPER_DOUBLE_NODES",
    "UPPER_SINGLE_NODES",
    "Certificate",
    "bound_from_moments",
    "build_certificate",
    "certificate_from_json",
    "certificate_to_json",
    "error_polynomial",
    "hermite_interpolate",
    "lower_area_certificate",
    "upper_area_certificate",
    "upper_sqrt_rational",
    "verify_bound_polynomial",
    "verify_counterexample",
    "CHUNK_SIZE",
    "RNG_ALGORITHM",
    "EstimateWithError",
    "RngStream",
    "estimate_moment",
    "estimate_surface_moment",
    "sample_boundary_uniform",
    "sample_uniform",
    "boundary_convergence_sweep",
    "find_epsilon0",
    "interior_convergence_sweep",
    "lift_body",
    "RunManifest",
    "main",
    "__version__",
]
