"""Command-line front end.

    structops <command> --config cfg.json [--out path] [--format csv|json]

Exit status: 0 when every check passes or is skipped for an unmet hypothesis,
1 when a check fails, 2 for invalid input.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import identity_lab as lab
from . import spectral_factor as sf
from .config import RunConfig, load_config
from .discretization import Variant, make_grid
from .errors import InvalidSpecError, NotPositiveError, PreconditionError, StructOpsError
from .matfun import make_family
from .operators import build_S
from .report import (
    COMPONENT_COLUMNS,
    KERNEL_COLUMNS,
    POSITIVITY_COLUMNS,
    RESIDUAL_COLUMNS,
    Check,
    SuiteVerdict,
    kernel_rows,
    to_csv,
    to_json,
)

log = logging.getLogger("structops")


def _fn(cfg: RunConfig):
    return make_family(cfg.function, cfg.l)


def _residual_rows(reports):
    return [{"variant": r.variant, "N": r.N, "residual": r.residual, "order": r.order_estimate}
            for r in reports]


def _order_check(name, reports, tol) -> Check:
    ok = lab.converged(reports, tol["min_order"], tol["exact_floor"])
    last = reports[-1]
    exact = all(r.residual <= tol["exact_floor"] for r in reports)
    return Check(name, last.order_estimate if not exact else last.residual,
                 f"order >= {tol['min_order']} or residual <= {tol['exact_floor']:g}", ok,
                 note="exact cancellation" if exact else "")


def cmd_verify_identity(cfg: RunConfig) -> SuiteVerdict:
    v = SuiteVerdict("verify-identity", columns=RESIDUAL_COLUMNS)
    reports = lab.convergence_study(_fn(cfg), cfg.variant, cfg.N_list)
    v.table = _residual_rows(reports)
    v.add(_order_check(f"identity[{cfg.variant.value}]", reports, cfg.tolerances))
    return v


def cmd_components(cfg: RunConfig) -> SuiteVerdict:
    v = SuiteVerdict("components", columns=COMPONENT_COLUMNS)
    fn = _fn(cfg)
    reports = lab.convergence_study(fn, Variant.SELFADJOINT, cfg.N_list, components=True)
    for k in range(4):
        sub = [lab.ResidualReport(f"S{k + 1}", r.N, r.component_residuals[k]) for r in reports]
        for prev, cur in zip(sub, sub[1:]):
            cur.order_estimate = lab._order(prev.residual, cur.residual, prev.N, cur.N)
        for r in sub:
            v.table.append({"variant": "selfadjoint", "component": r.variant, "N": r.N,
                            "residual": r.residual, "order": r.order_estimate})
        v.add(_order_check(f"component S{k + 1}", sub, cfg.tolerances))
    return v


def cmd_positivity(cfg: RunConfig) -> SuiteVerdict:
    v = SuiteVerdict("positivity", columns=POSITIVITY_COLUMNS)
    fn, tol = _fn(cfg), cfg.tolerances
    N = cfg.N_list[-1]
    grid = make_grid(cfg.l, N)
    if cfg.variant is Variant.SKEW:
        lam = sf.min_eigenvalue(build_S(fn, grid, Variant.SKEW))
        v.add(Check("S >= I", lam, f">= 1 - {tol['skew_slack']:g}", lam >= 1 - tol["skew_slack"]))
        v.table.append({"parameter": "N", "value": N, "min_eig": lam, "pass": lam >= 1 - tol["skew_slack"]})
        for eps, mu in sf.epsilon_family_check(fn, grid, cfg.epsilons):
            ok = mu >= eps - tol["skew_slack"]
            v.table.append({"parameter": "epsilon", "value": eps, "min_eig": mu, "pass": ok})
            v.add(Check(f"S_eps >= 0 (eps={eps:g})", mu, f">= {eps:g} - {tol['skew_slack']:g}", ok))
    else:
        rep = sf.positivity_family(fn, cfg.l, cfg.num_radii, N)
        if not rep.origin_condition_holds:
            v.add(Check("family positivity", sf.origin_margin(fn), "I - Phi1(0)Phi1(0)^H > 0", True,
                        status="skip", note="hypothesis I - Phi1(0)Phi1(0)^H > 0 unmet"))
        else:
            for r, lam in zip(rep.r_values, rep.min_eigs):
                v.table.append({"parameter": "r", "value": r, "min_eig": lam, "pass": lam > 0})
            v.add(Check("S_r > 0 on radius ladder", min(rep.min_eigs), "> 0", rep.strictly_positive))
        if cfg.expected_min_eig is not None:
            lam = sf.min_eigenvalue(build_S(fn, grid, Variant.SELFADJOINT))
            ok = abs(lam - cfg.expected_min_eig) <= tol["eig_oracle"]
            v.add(Check("min eigenvalue vs oracle", lam,
                        f"|. - {cfg.expected_min_eig:g}| <= {tol['eig_oracle']:g}", ok))
    return v


def cmd_factorize(cfg: RunConfig) -> SuiteVerdict:
    v = SuiteVerdict("factorize", columns=KERNEL_COLUMNS)
    fn, tol = _fn(cfg), cfg.tolerances
    N = cfg.N_list[-1]
    S = build_S(fn, make_grid(cfg.l, N), Variant.SELFADJOINT)
    try:
        fac = sf.factorize_inverse(S)
    except PreconditionError as exc:
        v.add(Check("factorization hypotheses", None, "Phi1(0) = 0", True, status="skip", note=str(exc)))
        return v
    except NotPositiveError as exc:
        # an indefinite S_l means some S_r, r <= l, is singular: the invertibility hypothesis fails
        v.add(Check("factorization hypotheses", sf.min_eigenvalue(S), "S_r invertible for all r", True,
                    status="skip", note=str(exc)))
        return v
    v.table = kernel_rows(fac)
    res = fac.reconstruction_residual
    v.add(Check("E*E = S^-1", res, f"<= {tol['reconstruction']:g}", res <= tol["reconstruction"]))
    v.add(Check("diagonal constant C in |E_ii - I| <= C h", fac.diag_constant, "reported", True))
    l_hat = cfg.l / 2 if cfg.l_hat is None else cfg.l_hat
    h = cfg.l / cfg.N_list[0] if cfg.h is None else cfg.h
    d1 = sf.nesting_defect(fn, cfg.l, l_hat, h)
    d2 = sf.nesting_defect(fn, cfg.l, l_hat, h / 2)
    lo, hi = tol["nesting_ratio_min"], tol["nesting_ratio_max"]
    if d1 <= tol["exact_floor"] and d2 <= tol["exact_floor"]:
        v.add(Check("nesting defect", d2, f"<= {tol['exact_floor']:g}", True, note="exact"))
    else:
        ratio = d1 / d2 if d2 > 0 else float("inf")
        v.add(Check("nesting defect ratio under h-halving", ratio, f"in [{lo:g}, {hi:g}]", lo <= ratio <= hi,
                    note=f"defect(h)={d1:.3e}, defect(h/2)={d2:.3e}"))
    return v


def cmd_crosscheck(cfg: RunConfig) -> SuiteVerdict:
    v = SuiteVerdict("crosscheck", columns=RESIDUAL_COLUMNS)
    fn, tol = _fn(cfg), cfg.tolerances
    devs = [lab.reconstruction_deviation(fn, make_grid(cfg.l, N)) for N in cfg.N_list]
    orders = [None] + [lab._order(a, b, n0, n1) for a, b, n0, n1 in
                       zip(devs, devs[1:], cfg.N_list, cfg.N_list[1:])]
    v.table = [{"variant": "crosscheck", "N": N, "residual": d, "order": o}
               for N, d, o in zip(cfg.N_list, devs, orders)]
    v.add(Check("reconstruction deviation", devs[-1], f"<= {tol['crosscheck_bound']:g}",
                devs[-1] <= tol["crosscheck_bound"]))
    if len(devs) > 1:
        floor = tol["crosscheck_floor"]
        exact = all(d <= floor for d in devs)
        dec = all(b < a for a, b in zip(devs, devs[1:]))
        v.add(Check("deviation decreasing", devs[-1], f"decreasing or all <= {floor:g}", dec or exact,
                    note="exact reproduction" if exact else ""))
    return v


def cmd_converge(cfg: RunConfig) -> SuiteVerdict:
    v = SuiteVerdict("converge", columns=COMPONENT_COLUMNS)
    fn, tol = _fn(cfg), cfg.tolerances
    reports = lab.convergence_study(fn, cfg.variant, cfg.N_list,
                                    components=cfg.variant is Variant.SELFADJOINT)
    for r in reports:
        v.table.append({"variant": r.variant, "component": "S", "N": r.N,
                        "residual": r.residual, "order": r.order_estimate})
    exact = all(r.residual <= tol["exact_floor"] for r in reports)
    dec = all(b.residual < a.residual for a, b in zip(reports, reports[1:]))
    v.add(Check("residual decreasing", reports[-1].residual,
                f"decreasing or all <= {tol['exact_floor']:g}", dec or exact))
    return v


COMMANDS = {
    "verify-identity": cmd_verify_identity,
    "components": cmd_components,
    "positivity": cmd_positivity,
    "factorize": cmd_factorize,
    "crosscheck": cmd_crosscheck,
    "converge": cmd_converge,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="structops", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=["csv", "json"], help="report format (default from config, else json)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        make_family(cfg.function, cfg.l)
        for N in cfg.N_list:
            make_grid(cfg.l, N)
    except (InvalidSpecError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    fmt = args.format or cfg.output_format
    out = args.out or cfg.output_path
    try:
        verdict = COMMANDS[args.command](cfg)
    except (InvalidSpecError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except StructOpsError as exc:
        verdict = SuiteVerdict(args.command)
        verdict.add(Check(type(exc).__name__, None, "", False, note=str(exc)))
    for c in verdict.checks:
        val = "-" if c.value is None else f"{c.value:.6g}"
        print(f"[{c.status.upper():4}] {c.name}: {val} ({c.threshold}) {c.note}".rstrip(), file=sys.stderr)
    text = to_csv(verdict.columns, verdict.table) if fmt == "csv" else to_json(verdict, cfg.raw)
    if out:
        Path(out).write_text(text, newline="") if fmt == "csv" else Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if verdict.overall else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
