"""Classification, construction and verification of embedded CMC tori in S^3."""
from .classify import (
    ClassificationReport,
    TorusSpec,
    admissible_m,
    classify,
    clifford_radius,
    solve_C_for_m,
    window,
)
from .config import Config, load_config
from .errors import (
    BracketFailure,
    ClosureFailure,
    CMCError,
    DegenerateImmersion,
    DegenerateMesh,
    DegenerateParams,
    NotAdmissible,
    PoleOnSurface,
    QuadratureFailure,
)
from .period import (
    PeriodEval,
    limit_K_at_infinity,
    limit_K_at_lower,
    lower_bound_C,
    monotonicity_witness,
    period_K,
)
from .profile import (
    ProfileSolution,
    TorusParams,
    coefficient_roots,
    first_integral_residuals,
    profile_eval,
    profile_period,
    solve_profile,
    theta,
)
from .s3geom import (
    SpherePoint,
    SurfaceMesh,
    interior_ball_curvature,
    principal_curvatures,
    stereographic_project,
    z_value,
)
from .surface_io import (
    VerificationReport,
    export_csv,
    export_mesh,
    export_obj,
    generate_clifford,
    generate_torus,
    import_csv,
    verify_mesh,
)

__version__ = "0.1.0"
