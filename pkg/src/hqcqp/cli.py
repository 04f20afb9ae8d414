"""Command-line front end.

Exit codes: 0 success, 1 internal or input error, 2 assumption failure,
3 infeasible problem.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import oracle as _oracle
from .applications import etls as _etls
from .applications import trs as _trs
from .pencil import inertia
from .qq2_global import (
    Compactness,
    Mode,
    QQ2Problem,
    QQ2Status,
    SolverError,
    check_compactness,
    solve_qq2,
)
from .qq2_local import FinderConfig, classify_point, find_local_nonglobal

SCHEMA_VERSION = "1"
EXIT_OK, EXIT_INTERNAL, EXIT_ASSUMPTION, EXIT_INFEASIBLE = 0, 1, 2, 3


class InputError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # exit code 2 is reserved for assumption failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INTERNAL, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- input

def _matrix(data, name, n=None):
    try:
        M = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name}: not a numeric array") from exc
    if M.ndim != 2 or M.shape[0] != M.shape[1] or (n is not None and M.shape[0] != n):
        raise InputError(f"{name}: expected a square {n}x{n} array, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InputError(f"{name}: non-finite entries")
    asym = float(np.max(np.abs(M - M.T))) if M.size else 0.0
    if asym > 1e-12:
        warnings.warn(f"{name} is not symmetric (max |M - M'| = {asym:.3g}); symmetrized",
                      stacklevel=2)
    return 0.5 * (M + M.T)


def load_problem(path):
    """Parse a problem file into ``(kind, payload, point)``.

    ``kind`` is ``"qq2"``, ``"trs"`` or ``"etls"``.
    """
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise InputError("problem file must be a JSON object")
    version = str(doc.get("schema_version", ""))
    if version != SCHEMA_VERSION:
        raise InputError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION!r})")
    groups = [k for k in ("qq2", "trs", "etls")
              if (k == "qq2" and "A0" in doc) or (k != "qq2" and k in doc)]
    if len(groups) != 1:
        raise InputError("exactly one of {A0/A1/A2, trs, etls} must be present")
    kind = groups[0]
    point = None
    if doc.get("x") is not None:
        point = np.array(doc["x"], dtype=float).reshape(-1)
    if kind == "qq2":
        n = doc.get("n")
        A0 = _matrix(doc["A0"], "A0", n)
        n = A0.shape[0]
        try:
            mode = Mode(doc.get("mode", "inequality"))
        except ValueError as exc:
            raise InputError(f"mode must be 'inequality' or 'equality', got {doc.get('mode')!r}") from exc
        try:
            P = QQ2Problem(A0, _matrix(doc.get("A1"), "A1", n), _matrix(doc.get("A2"), "A2", n), mode)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        return kind, P, point
    if kind == "trs":
        t = doc["trs"]
        try:
            return kind, _trs.TRSProblem(_matrix(t["Q"], "Q"), t["b"]), point
        except (KeyError, ValueError) as exc:
            raise InputError(f"trs: {exc}") from exc
    e = doc["etls"]
    try:
        return kind, _etls.ETLSProblem(e["A"], e["b"], e["L"], e["rho"]), point
    except (KeyError, ValueError) as exc:
        raise InputError(f"etls: {exc}") from exc


# ---------------------------------------------------------------- output

def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isfinite(v):
            return v + 0.0  # drop negative zero
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _text_lines(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            key = f"{prefix}.{k}" if prefix else k
            if isinstance(v, dict) or (isinstance(v, list) and v and isinstance(v[0], dict)):
                yield from _text_lines(v, key)
            else:
                yield f"{key}: {_fmt(v)}"
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _text_lines(v, f"{prefix}[{i}]")
    else:
        yield f"{prefix}: {_fmt(obj)}"


def _fmt(v):
    if isinstance(v, list):
        return "[" + ", ".join(_fmt(u) for u in v) + "]"
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def emit(report: dict, fmt: str, stream=None):
    stream = stream or sys.stdout
    report = _clean(report)
    if fmt == "json":
        stream.write(json.dumps(report, indent=2, sort_keys=False) + "\n")
    else:
        stream.write("\n".join(_text_lines(report)) + "\n")


def _inertia_dict(M, tol):
    i = inertia(M, tol)
    return {"n_neg": i.n_neg, "n_zero": i.n_zero, "n_pos": i.n_pos}


def _assumption_dict(report, mode):
    return {
        "c1": list(report.c1.mu) if report.c1.found else None,
        "c1_search": report.c1.status,
        "c2_witness": report.c2,
        "c3_witness": report.c3,
        "q2_range_on_q1_sphere": list(report.q2_range),
        "a2_minus_a1_indefinite": report.a2_minus_a1_indefinite,
        "missing": report.missing(mode),
    }


def _classification_dict(c, tol):
    d = {"verdict": c.verdict.value, "value": c.value, "reason": c.reason}
    if c.global_value is not None:
        d["global_value"] = c.global_value
    if c.kkt is not None:
        d["alpha"] = c.kkt.alpha
        d["beta"] = c.kkt.beta
        d["oriented_beta"] = c.oriented_beta
        d["orientation"] = c.orientation
        d["stationarity_residual"] = c.kkt.stationarity_residual
        d["licq"] = c.kkt.licq_ok
        d["licq_gram_lambda_min"] = c.kkt.gram_lambda_min
    if c.inertia is not None:
        d["inertia_G"] = {"n_neg": c.inertia.n_neg, "n_zero": c.inertia.n_zero,
                          "n_pos": c.inertia.n_pos}
    if c.projected_spectrum is not None:
        d["projected_hessian_spectrum"] = c.projected_spectrum
    if c.nonstrict is not None:
        d["v_bar"] = c.nonstrict.v_bar
        d["v_bar_residuals"] = c.nonstrict.residuals
    return d


# ---------------------------------------------------------------- commands

def _require(kind, expected, cmd):
    if kind != expected:
        raise InputError(f"{cmd} needs a {expected} problem file, got {kind}")


def _oracle_block(P, resolution, tol_feas):
    r = _oracle.oracle_global(P, resolution, feas_tol=tol_feas)
    return {"value": r.value, "x": r.x, "resolution": r.resolution, "steps": r.steps,
            "n_feasible_samples": r.n_feasible_samples, "error_bound": r.error_bound,
            "feasibility_band": r.feasibility_band}


def cmd_solve(args, kind, P, point):
    _require(kind, "qq2", "solve")
    res = solve_qq2(P, tol=args.tol_rank, seed=args.seed, cert_tol=args.tol_psd)
    rep = {"status": res.status.value, "mode": P.mode.value,
           "assumptions": _assumption_dict(res.report, P.mode)}
    code = {QQ2Status.GLOBAL: EXIT_OK, QQ2Status.INFEASIBLE: EXIT_INFEASIBLE,
            QQ2Status.ASSUMPTION_FAILURE: EXIT_ASSUMPTION}[res.status]
    if res.status is QQ2Status.GLOBAL:
        cert = res.certificate
        G = P.lagrangian_hessian(cert.alpha, cert.beta)
        _, q1, q2 = P.q(cert.x_star)
        rep.update({
            "value": cert.value,
            "x": cert.x_star,
            "q1": q1,
            "q2": q2,
            "certificate": {
                "alpha": cert.alpha,
                "beta": cert.beta,
                "dual_value": -cert.alpha - cert.beta,
                "lambda_min_G": cert.lambda_min_G,
                "inertia_G": _inertia_dict(G, args.tol_rank),
                "checks": {k: bool(getattr(res.check, k)) for k in
                           ("stationarity", "feasibility", "complementarity", "multiplier_sign", "psd")},
                "residuals": res.check.residuals,
            },
        })
    if args.oracle and res.status is QQ2Status.GLOBAL:
        rep["oracle"] = _oracle_block(P, args.oracle, args.tol_feas)
    return rep, code


def cmd_classify(args, kind, P, point):
    if args.x is not None:
        point = np.array([float(v) for v in args.x.split(",")])
    if point is None:
        raise InputError("classify needs a point: add \"x\" to the file or pass --x")
    if kind == "trs":
        c = _trs.classify_trs_point(P, point, tol=args.tol_rank)
    elif kind == "etls":
        c = _etls.classify_etls_point(P, point, tol=args.tol_rank)
    else:
        if point.shape[0] != P.n:
            raise InputError(f"point has dimension {point.shape[0]}, problem has {P.n}")
        c = classify_point(P, point, tol=args.tol_rank)
    rep = {"x": point, "classification": _classification_dict(c, args.tol_rank)}
    if args.probe and kind == "qq2" and c.verdict.value != "Infeasible":
        pr = _oracle.oracle_local_probe(P, point, radius=args.probe, seed=args.seed)
        rep["oracle_probe"] = {"radius": args.probe, "is_local_min_at_resolution":
                               pr.is_local_min_at_resolution, "best_violation": pr.best_violation,
                               "n_accepted": pr.n_accepted}
    return rep, EXIT_OK


def cmd_compactness(args, kind, P, point):
    _require(kind, "qq2", "compactness")
    verdict, detail = check_compactness(P, tol=args.tol_rank)
    rep = {"mode": P.mode.value, "compactness": verdict.value,
           "witness": list(detail) if isinstance(detail, tuple) else detail}
    code = EXIT_INFEASIBLE if verdict is Compactness.EMPTY else EXIT_OK
    return rep, code


def cmd_find_local(args, kind, P, point):
    _require(kind, "qq2", "find-local")
    cfg = FinderConfig(n_starts=args.starts, seed=args.seed, jobs=args.jobs, tol=args.tol_rank)
    res = find_local_nonglobal(P, config=cfg)
    pts = [{"x": x, **_classification_dict(c, args.tol_rank)} for x, c in res.points]
    rep = {"mode": P.mode.value, "starts": args.starts, "seed": args.seed,
           "global_value": res.global_value, "converged_runs": res.n_converged,
           "distinct_pairs": res.n_distinct, "count": len(pts), "points": pts}
    return rep, EXIT_OK


def cmd_trs(args, kind, T, point):
    _require(kind, "trs", "trs")
    sol = _trs.solve_trs_global(T, tol=args.tol_rank, seed=args.seed)
    sosc = _trs.check_sosc_at_global(T, tol=args.tol_rank)
    rep = {"global_x": sol.global_x, "global_value": sol.global_value, "mu": sol.mu,
           "hard_case": sol.hard_case, "more_sorensen": sol.more_sorensen,
           "strict_global": sosc.strict_global, "sosc_holds": sosc.sosc_holds}
    if sol.local_nonglobal is not None:
        ln = sol.local_nonglobal
        c = ln.certificate
        rep["local_nonglobal"] = {"y": ln.y_star, "mu": ln.mu, "value": T.objective(ln.y_star),
                                  "stationarity": c.stationarity, "sphere": c.sphere,
                                  "projected_lambda_min": c.projected_lambda_min,
                                  "lambda_min_shifted": c.lambda_min_shifted}
    else:
        rep["local_nonglobal"] = None
    return rep, EXIT_OK


def cmd_etls(args, kind, E, point):
    _require(kind, "etls", "etls")
    ok, detail = _etls.existence_assumption(E)
    if not ok:
        return {"status": "assumption_failure", "existence_assumption": detail}, EXIT_ASSUMPTION
    sol = _etls.solve_etls(E, tol=args.tol_rank, seed=args.seed)
    rep = {"status": "global", "x": sol.x, "value": sol.value, "y": sol.y, "z": sol.z,
           "alpha": sol.alpha, "beta": sol.beta, "existence_assumption": detail,
           "norm_Lx_sq": float(np.sum((E.L @ sol.x) ** 2)), "rho": E.rho}
    return rep, EXIT_OK


def cmd_oracle(args, kind, P, point):
    _require(kind, "qq2", "oracle")
    try:
        block = _oracle_block(P, args.resolution, args.tol_feas)
    except _oracle.OracleInfeasibleError as exc:
        return {"status": "no_feasible_sample", "message": str(exc)}, EXIT_INFEASIBLE
    return {"mode": P.mode.value, "kernel": _oracle.default_kernel(), **block}, EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "classify": cmd_classify,
    "compactness": cmd_compactness,
    "find-local": cmd_find_local,
    "trs": cmd_trs,
    "etls": cmd_etls,
    "oracle": cmd_oracle,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="problem file (JSON)")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--tol-feas", type=float, default=1e-12,
                        help="oracle feasibility slack for q2 <= 1 (default 1e-12)")
    common.add_argument("--tol-psd", type=float, default=1e-7,
                        help="certificate verification tolerance (default 1e-7)")
    common.add_argument("--tol-rank", type=float, default=1e-8,
                        help="relative zero/rank threshold for eigenvalues (default 1e-8)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--timing", action="store_true", help="append wall time to the report")

    p = _Parser(prog="hqcqp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    s = sub.add_parser("solve", parents=[common], help="global minimizer with certificate")
    s.add_argument("--oracle", type=float, default=None, metavar="RES",
                   help="cross-check with the grid oracle at this resolution")
    s = sub.add_parser("classify", parents=[common], help="classify a point")
    s.add_argument("--x", default=None, help="comma-separated point (overrides the file)")
    s.add_argument("--probe", type=float, default=None, metavar="RADIUS",
                   help="add a random neighbourhood probe")
    sub.add_parser("compactness", parents=[common], help="compactness of the feasible set")
    s = sub.add_parser("find-local", parents=[common], help="multistart local non-global search")
    s.add_argument("--starts", type=int, default=200)
    s.add_argument("--jobs", type=int, default=1)
    sub.add_parser("trs", parents=[common], help="trust-region subproblem report")
    sub.add_parser("etls", parents=[common], help="ellipsoid-constrained total least squares")
    s = sub.add_parser("oracle", parents=[common], help="brute-force grid value")
    s.add_argument("--resolution", type=float, default=1e-2)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    head = {"command": args.command, "file": args.file,
            "tolerances": {"feas": args.tol_feas, "psd": args.tol_psd, "rank": args.tol_rank},
            "seed": args.seed}
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            kind, payload, point = load_problem(args.file)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        body, code = COMMANDS[args.command](args, kind, payload, point)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except _etls.ExistenceAssumptionError as exc:
        body, code = {"status": "assumption_failure", "message": str(exc)}, EXIT_ASSUMPTION
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    report = {**head, **body}
    if args.timing:
        report["wall_time_s"] = time.perf_counter() - t0
    emit(report, args.format)
    return code


if __name__ == "__main__":
    sys.exit(main())
