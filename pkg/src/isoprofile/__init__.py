"""Isoperimetric profiles of model surfaces and flat tori.

Candidate bubble families are mapped to (volume, boundary volume) curves and
the profile is their lower contour.  Stability of candidates is read off the
Jacobi operator, and on conformally flat tori small candidates are computed
as pseudo-balls, whose small-volume behaviour is compared against the
scalar-curvature expansion.
"""

from .geometry import (
    ConformalTorus,
    FlatTorus,
    ModelError,
    RoundSphere,
    conformal_data,
    geometry_constants,
    load_model,
    scalar_curvature,
    unit_ball_volume,
    validate_model,
)
from .families import ProfileCurve, complement_curve, enumerate_families
from .envelope import EnvelopeResult, envelope_eval, lower_contour, refine_breakpoint
from .jacobi import BoundaryDescriptor, JacobiSpectrum, jacobi_potential, jacobi_spectrum
from .cmc import (
    PseudoBall,
    continue_in_volume,
    geodesic_curvature,
    omega_map,
    riemannian_measures,
    solve_pseudo_ball,
)
from .asymptotics import (
    critical_point_track,
    euclidean_profile,
    expansion_predict,
    fit_expansion_coefficient,
    small_volume_profile,
)

__version__ = "0.1.0"
