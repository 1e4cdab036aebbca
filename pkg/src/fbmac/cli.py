"""Command-line entry point: ``fbmac <subcommand> ...``.

Exit codes: 0 success, 1 domain-level failure (infeasible parameters, failed
validation or self-check), 2 usage or schema error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from . import checks
from .baselines import (
    GaussianMacParams,
    cooperation_sum_bound,
    nofb_pentagon,
    ozarow_residual,
    ozarow_sum_capacity,
)
from .discrete import (
    assemble_two_block_joint,
    inner_feasible,
    theorem_terms,
    validate,
)
from .errors import FbMacError, InvalidParams, NoRealSolution, SizeGuardExceeded
from .gaussian import (
    closed_form_bounds,
    feedback_feasible,
    lambda_max,
    oracle_bounds,
    solve_xi,
    wyner_ziv_min_sigma12_sq,
)
from .geometry import (
    SweepConfig,
    optimize_decoupled_sum_rate,
    optimize_sum_rate,
    pareto_frontier,
    polygon_from_bounds,
    sweep_decoupled,
    sweep_regions,
)
from .schemas import ChannelFile, GaussParamsFile, KernelsFile, ScanFile, SweepFile
from .terms import bounds_from_terms

log = logging.getLogger("fbmac")

AGREEMENT_TOL = 1e-6


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o))


def _clean(obj):
    # JSON has no inf; encode it as null
    if isinstance(obj, float) and math.isinf(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def write_json(path, obj) -> None:
    text = json.dumps(_clean(obj), indent=2, default=_json_default) + "\n"
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def write_csv(path, header, rows) -> None:
    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) if isinstance(v, float) else v for v in r])

    if path is None or str(path) == "-":
        emit(sys.stdout)
    else:
        with open(path, "w", newline="") as fh:
            emit(fh)


def read_json(path):
    if path is None:
        raise UsageError("an input file is required")
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"not a comma-separated list of numbers: {text!r}") from None


def _sweep_cfg(args) -> SweepConfig:
    if getattr(args, "sweep", None):
        return SweepFile.model_validate(read_json(args.sweep)).to_config(args.seed)
    return SweepConfig(seed=args.seed)


def _channel_snr(args) -> tuple[float, float]:
    sigma2 = args.sigma2
    P = args.P if args.P is not None else args.snr * sigma2
    if not (P >= 0 and sigma2 > 0):
        raise UsageError("need P >= 0 and sigma2 > 0")
    return P, sigma2


# ---------------------------------------------------------------------------
# subcommands


def cmd_gauss_region(args) -> int:
    pf = GaussParamsFile.model_validate(read_json(args.input))
    p = pf.to_params()
    tol = args.tolerance if args.tolerance is not None else AGREEMENT_TOL
    lmax = lambda_max(p)
    report = {"params": pf.model_dump(by_alias=True), "lambda_max": lmax,
              "lambda_ok": p.lam <= lmax}
    if p.common_feedback and not math.isinf(p.Rfb) and p.Rfb > 0:
        report["wyner_ziv_sigma12_min_sq"] = wyner_ziv_min_sigma12_sq(p.P, p.sigma2, p.Rfb)
    try:
        xi = solve_xi(p)
    except NoRealSolution as exc:
        report.update(feedback_feasible=None, error=str(exc))
        write_json(args.output, report)
        return 1
    cf = closed_form_bounds(p)
    terms, ob = oracle_bounds(p)
    deltas = {k: abs(v - getattr(ob, k)) for k, v in cf.as_dict().items()}
    report.update(
        feedback_feasible=feedback_feasible(p, cf),
        xi={"xi1": xi.xi1, "xi2": xi.xi2},
        terms=terms.as_dict(),
        bounds={"closed_form": cf.as_dict(), "oracle": ob.as_dict()},
        deltas=deltas,
        max_abs_delta_bits=max(deltas.values()),
    )
    report["agreement_ok"] = report["max_abs_delta_bits"] <= tol
    front = pareto_frontier(polygon_from_bounds(cf))
    report["frontier"] = [list(v) for v in front]
    write_json(args.output, report)
    csv_path = args.csv
    if csv_path is None and args.output not in (None, "-"):
        csv_path = Path(args.output).with_suffix(".csv")
    if csv_path is not None:
        write_csv(csv_path, ["R1", "R2"], front)
    if not report["agreement_ok"]:
        log.warning("closed form and oracle differ by %.3e bits", report["max_abs_delta_bits"])
    return 0 if report["feedback_feasible"] else 1


def cmd_discrete_eval(args) -> int:
    channel = ChannelFile.model_validate(read_json(args.channel)).to_channel()
    kf = KernelsFile.model_validate(read_json(args.kernels))
    aux = kf.to_aux()
    tol = args.tolerance if args.tolerance is not None else 1e-9
    rep = validate(channel, aux)
    report = {"validation": rep.as_dict()}
    if not rep.ok:
        write_json(args.output, report)
        return 1
    joint = assemble_two_block_joint(channel, aux)
    t = theorem_terms(joint)
    b = bounds_from_terms(t)
    Rfb = args.rfb if args.rfb is not None else (kf.Rfb if kf.Rfb is not None else math.inf)
    probes = [tuple(p) for p in kf.probes] + [tuple(p) for p in (args.probe or [])]
    out = []
    for r1, r2 in probes:
        w = inner_feasible(t, r1, r2, Rfb, tol)
        out.append({
            "R1": r1, "R2": r2,
            "inside_bounds": b.contains(r1, r2, tol) and Rfb >= b.fbCost - tol,
            "feasible": w is not None,
            "witness": None if w is None else {"r1p": w.r1p, "r2p": w.r2p, "r0": w.r0},
        })
    report.update(terms=t.as_dict(), bounds=b.as_dict(), Rfb=Rfb, probes=out,
                  frontier=[list(v) for v in pareto_frontier(polygon_from_bounds(b))])
    write_json(args.output, report)
    return 0


def cmd_fig2(args) -> int:
    P, sigma2 = _channel_snr(args)
    Rfb = args.rfb
    if Rfb < 0:
        raise UsageError("Rfb must be nonnegative")
    g = GaussianMacParams(P, sigma2)
    cfg = _sweep_cfg(args)
    rows = []
    for v in pareto_frontier(polygon_from_bounds(nofb_pentagon(g))):
        rows.append(("nofb",) + v)
    _, oz = ozarow_sum_capacity(g)
    co = cooperation_sum_bound(g)
    rows += [("ozarow_sum", 0.0, oz), ("ozarow_sum", oz, 0.0)]
    rows += [("coop_sum", 0.0, co), ("coop_sum", co, 0.0)]
    prop = sweep_regions(cfg, Rfb, P, sigma2)
    if prop.fallback:
        log.warning("proposed: empty feasible set, falling back to the no-feedback pentagon")
    rows += [("proposed",) + v for v in pareto_frontier(prop.hull)]
    dec = sweep_decoupled(P, sigma2, Rfb)
    if dec.fallback:
        log.warning("decoupled: empty feasible set, falling back to the no-feedback pentagon")
    rows += [("decoupled",) + v for v in pareto_frontier(dec.hull)]
    write_csv(args.output, ["curve", "R1", "R2"], rows)
    return 0


SCAN_CFG = SweepConfig(
    alphas=tuple(np.round(np.linspace(0, 1, 11), 12)),
    betas=tuple(np.round(np.linspace(0, 1, 11), 12)),
    thetas=tuple(np.linspace(0, 1, 11)),
    refine_iters=200, restarts=1,
)


def cmd_conjecture_scan(args) -> int:
    if args.input:
        sf = ScanFile.model_validate(read_json(args.input))
        snrs, rfbs, sigma2 = sf.snr, sf.Rfb, sf.sigma2
    else:
        if not args.snr or not args.rfb:
            raise UsageError("give --snr and --rfb lists, or --input")
        snrs, rfbs, sigma2 = _float_list(args.snr), _float_list(args.rfb), args.sigma2
    if any(r <= 0 for r in rfbs):
        raise UsageError("Rfb entries must be positive (the threshold is singular at 0)")
    if any(s < 0 for s in snrs) or sigma2 <= 0:
        raise UsageError("need snr >= 0 and sigma2 > 0")
    cfg = replace(SCAN_CFG, seed=args.seed)
    header = ["snr", "Rfb", "sigma12_min_sq", "sigma2", "conjecture_side"]
    if not args.no_rates:
        header += ["proposed_sum", "decoupled_sum"]
    rows = []
    for snr in snrs:
        P = snr * sigma2
        for rfb in rfbs:
            smin = wyner_ziv_min_sigma12_sq(P, sigma2, rfb)
            side = int(np.sign(sigma2 - smin))
            row = [float(snr), float(rfb), smin, float(sigma2), side]
            if not args.no_rates:
                prop = optimize_sum_rate(P, sigma2, rfb, True, cfg, validate=False)
                dec, _ = optimize_decoupled_sum_rate(P, sigma2, rfb)
                row += [prop.best_value, dec]
            rows.append(row)
    write_csv(args.output, header, rows)
    return 0


def cmd_check(args) -> int:
    tol = args.tolerance if args.tolerance is not None else AGREEMENT_TOL
    ok = True
    ag = checks.agreement_suite(args.samples, args.seed)
    line = f"closed-form vs oracle: {ag.samples} draws, max |delta| = {ag.max_delta:.3e} bits"
    print(("PASS " if ag.ok(tol) else "FAIL ") + line)
    ok &= ag.ok(tol)
    eq = checks.equivalence_suite(args.instances, args.probes, args.seed)
    print(("PASS " if eq.ok else "FAIL ")
          + f"bounds vs rate split: {eq.instances} instances, {eq.samples} points, "
          f"{eq.boundary} in boundary band, {eq.disagreements} disagreements")
    ok &= eq.ok
    worst = 0.0
    for snr in np.geomspace(0.01, 1000, 50):
        rho, _ = ozarow_sum_capacity(GaussianMacParams(float(snr), 1.0))
        worst = max(worst, abs(ozarow_residual(float(snr), rho)))
    print(("PASS " if worst < 1e-10 else "FAIL ")
          + f"perfect-feedback fixed point: max residual {worst:.3e}")
    ok &= worst < 1e-10
    return 0 if ok else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", default=None, help="output path (default stdout)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tolerance", type=float, default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="fbmac", description="Rate regions for the two-user MAC with rate-limited feedback.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gauss-region", parents=[common],
                       help="bounds of one Gaussian parameter point")
    p.add_argument("--input", "-i", required=True, help="JSON parameter file")
    p.add_argument("--csv", default=None, help="write the region frontier here")
    p.set_defaults(func=cmd_gauss_region)

    p = sub.add_parser("discrete-eval", parents=[common],
                       help="evaluate the region for discrete kernels")
    p.add_argument("--channel", required=True)
    p.add_argument("--kernels", "--input", "-i", dest="kernels", required=True)
    p.add_argument("--probe", action="append", type=lambda s: tuple(_float_list(s)),
                   help="R1,R2 pair to test (repeatable)")
    p.add_argument("--rfb", type=float, default=None)
    p.set_defaults(func=cmd_discrete_eval)

    for name, func, helptext in (
        ("fig2", cmd_fig2, "region comparison curves as CSV"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--snr", type=float, default=5.0)
        p.add_argument("--P", type=float, default=None, help="overrides --snr")
        p.add_argument("--sigma2", type=float, default=1.0)
        p.add_argument("--rfb", type=float, default=2.0)
        p.add_argument("--sweep", "--input", "-i", dest="sweep", default=None,
                       help="JSON sweep configuration")
        p.set_defaults(func=func)

    p = sub.add_parser("conjecture-scan", parents=[common],
                       help="feedback-quantization threshold over an (snr, Rfb) grid")
    p.add_argument("--input", "-i", default=None, help='JSON {"snr": [...], "Rfb": [...]}')
    p.add_argument("--snr", default=None, help="comma-separated list")
    p.add_argument("--rfb", default=None, help="comma-separated list")
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--no-rates", action="store_true", help="skip the sum-rate optimizations")
    p.set_defaults(func=cmd_conjecture_scan)

    p = sub.add_parser("check", parents=[common], help="run the self-check suites")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--instances", type=int, default=10)
    p.add_argument("--probes", type=int, default=2000)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if args.tolerance is not None and not args.tolerance > 0:
        parser.error("--tolerance must be positive")
    try:
        return args.func(args)
    except (UsageError, ValidationError, SizeGuardExceeded) as exc:
        print(f"fbmac: error: {exc}", file=sys.stderr)
        return 2
    except InvalidParams as exc:
        print(f"fbmac: invalid parameters: {exc}", file=sys.stderr)
        return 2
    except FbMacError as exc:
        print(f"fbmac: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
