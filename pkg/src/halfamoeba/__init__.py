"""Amoebas and coamoebas of half-dimensional complete intersections.

A variety ``V`` of dimension ``n`` in the torus ``(C^x)^{2n}`` is given by
``n`` Laurent polynomials in ``2n`` variables.  This package computes its
conj-degrees from Newton polytopes, solves the fibers of the maps ``Log``
and ``Arg mod pi`` restricted to ``V``, estimates amoeba and coamoeba
volumes, and checks the known inequalities between these quantities.
"""

from .fibers import (
    FiberReport,
    FiberSolution,
    NonGenericQueryError,
    SingularPointError,
    SolverConfig,
    amoeba_fiber,
    coamoeba_fiber,
    critical_rank,
    curve_conj_intersections,
    curve_fiber_exact,
    diagnose,
    enclosing_residual,
    enclosing_system,
    fiber_counts,
    omega_form,
    omega_residual,
    orientation_sign,
    tangent_basis,
)
from .laurent import (
    DimensionError,
    EmptyPolynomialError,
    LaurentError,
    LaurentPolynomial,
    LogPolarPoint,
    ParseError,
    PolySystem,
    conj_poly,
    conj_prime_poly,
    evaluate,
    format_poly,
    format_system,
    jacobian_w,
    load_system,
    log_polar,
    make_system,
    newton_polytope,
    parse_poly,
    parse_system,
    translate,
)
from .measure import (
    HarnackReport,
    MeasureError,
    VolumeEstimate,
    amoeba_volume_box,
    multiharnack_check,
    multivol_amoeba_box,
    multivol_coamoeba,
)
from .polytope import (
    Degrees,
    LatticePolytope,
    PolytopeError,
    alpha_beta,
    convex_hull,
    minkowski_sum,
    mixed_volume,
    negate,
    normalized_volume,
)
from .verify import VerificationReport, VerifyConfig, verify_system
from .cli import RasterImage, render_raster

__version__ = "0.1.0"
