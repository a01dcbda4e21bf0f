"""matlasso: factored matrix LASSO solvers, certificates, and adversarial instances."""

from .certificates import (
    CertificationError,
    CriticalityCertificate,
    GlobalOptCertificate,
    SingularValueDiagnostics,
    certify_convex_global,
    certify_point,
    error_vs_truth,
    singular_value_inequality,
)
from .counterexamples import (
    CounterexampleInstance,
    SpurGenSpec,
    VerificationReport,
    build_example2,
    build_spur_gen,
    build_thm5,
    build_thm6,
    spurious_threshold_mu,
    verify_instance,
)
from .estimators import ConvexMatrixLasso, FactoredMatrixLasso
from .objective import (
    FactorPoint,
    ProblemInstance,
    convex_value,
    f_grad,
    f_hess_quadform,
    f_hvp,
    f_value,
    nuclear_norm,
    phi_grad,
    phi_value,
    svd_soft_threshold,
)
from .operators import (
    MeasurementOperator,
    RestrictedConstants,
    make_dense_ensemble,
    make_gaussian_ensemble,
    make_identity,
    make_rank_one_perturbed,
    restricted_constants_estimate,
    restricted_constants_exact,
    sym_unvectorize,
    sym_vectorize,
)
from .solvers import (
    MultistartResult,
    SolveResult,
    SolverConfig,
    SolverError,
    multistart,
    solve_convex_prox,
    solve_factored,
)
from .theory import (
    BoundResult,
    TheoryParams,
    critical_condition_number,
    critical_rip_constant,
    curvature_to_rip,
    effective_strong_convexity,
    effective_strong_convexity_minmax,
    recovery_error_bound,
    rip_recovery_error_bound,
    rip_to_curvature,
    shrinkage_error_identity,
)

__version__ = "0.1.0"
