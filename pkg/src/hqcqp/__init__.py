"""Certificates and solvers for homogeneous quadratic problems with one or two
quadratic-form constraints."""

from .pencil import (
    Inertia,
    congruence_diagonalize,
    find_definite_pencil2,
    find_definite_shift,
    inertia,
    nullspace_basis,
    sym_eig,
)
from .qq1 import QQ1Problem, QQ1Solution, classify_qq1_point, solve_qc1qp_ineq, solve_qq1, solve_rq, solve_tls
from .qq2_global import (
    Compactness,
    Mode,
    QQ2Problem,
    QQ2Result,
    QQ2Status,
    SolverError,
    check_assumptions,
    check_compactness,
    recover_primal,
    solve_dual,
    solve_qq2,
    verify_global_certificate,
)
from .qq2_local import (
    PointClassification,
    Verdict,
    classify_point,
    compute_kkt,
    find_local_nonglobal,
    find_nonstrict_direction,
)

__version__ = "0.1.0"
