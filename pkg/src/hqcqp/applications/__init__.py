from .etls import (
    ETLSProblem,
    ETLSSolution,
    ExistenceAssumptionError,
    classify_etls_point,
    etls_qq2,
    existence_assumption,
    solve_etls,
)
from .trs import (
    SOSCReport,
    TRSLocalNonGlobal,
    TRSProblem,
    TRSSolution,
    check_sosc_at_global,
    classify_trs_point,
    find_trs_local_nonglobal,
    generate_trs_hard_case,
    homogenize_trs,
    homogenize_trs_matrices,
    solve_trs_global,
    trs_local_certificate,
    trs_secular_roots,
)

__all__ = [
    "ETLSProblem", "ETLSSolution", "ExistenceAssumptionError", "classify_etls_point",
    "etls_qq2", "existence_assumption", "solve_etls", "SOSCReport", "TRSLocalNonGlobal",
    "TRSProblem", "TRSSolution", "check_sosc_at_global", "classify_trs_point",
    "find_trs_local_nonglobal", "generate_trs_hard_case", "homogenize_trs",
    "homogenize_trs_matrices", "solve_trs_global", "trs_local_certificate", "trs_secular_roots",
]
