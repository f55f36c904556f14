"""Command-line front end.

Yields are percent at the CSV boundary and decimal inside the library.
Exit status: 0 success, 1 invalid input, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import datetime as dt
import io
import logging
import math
import os
import sys

import numpy as np

from . import airy_kernel as ak
from . import calibration as cal
from .drift import DriftCurve
from .errors import HoLeeError, NumericalError, ValidationError
from .fixtures import parse_date, year_fraction
from .oracle import McConfig, PdeGrid, mc_price, pde_price, pde_price_robin
from .pricing import ModelBundle, PricingConfig, bond_yield
from .spectral import ModelParams, build_interval_spectrum, build_robin_spectrum, build_semi_spectrum

LEVELS_ENV = "HOLEE_N_LEVELS"
log = logging.getLogger("holee_barriers")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _g6(x):
    return f"{x:.6g}"


def _g10(x):
    return f"{x:.10g}"


def _floats(text, name):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ValidationError(f"--{name}: expected comma-separated numbers, got {text!r}") from exc
    if not vals or not all(math.isfinite(v) for v in vals):
        raise ValidationError(f"--{name}: need at least one finite number")
    return vals


def _default_levels():
    raw = os.environ.get(LEVELS_ENV)
    if raw is None:
        return 300
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValidationError(f"{LEVELS_ENV}={raw!r} is not an integer") from exc
    if n < 1:
        raise ValidationError(f"{LEVELS_ENV} must be positive")
    return n


# -- CSV input -------------------------------------------------------------


def read_curve_csv(path, valuation_date=None):
    """Read ``maturity_years,yield_pct`` or ``maturity_date,yield_pct``.

    A ``# ... valuation_date=YYYY-MM-DD`` comment line supplies the
    valuation date when the flag is absent.  Errors carry the file line.
    """
    try:
        with open(path, newline="") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ValidationError(f"{path}: {exc.strerror}") from exc
    body = []
    for i, ln in enumerate(lines, start=1):
        if ln.startswith("#"):
            if valuation_date is None and "valuation_date=" in ln:
                valuation_date = parse_date(ln.split("valuation_date=", 1)[1].split()[0].rstrip(";,"))
            continue
        if ln.strip():
            body.append((i, ln))
    if not body:
        raise ValidationError(f"{path}: no header row")
    header = next(csv.reader([body[0][1]]))
    header = [h.strip() for h in header]
    if "yield_pct" not in header:
        raise ValidationError(f"{path}:{body[0][0]}: missing column 'yield_pct'")
    by_date = "maturity_date" in header
    if not by_date and "maturity_years" not in header:
        raise ValidationError(f"{path}:{body[0][0]}: need 'maturity_years' or 'maturity_date'")
    if by_date and valuation_date is None:
        raise ValidationError(f"{path}: dated maturities need --valuation-date")
    mats, ylds = [], []
    for lineno, ln in body[1:]:
        row = dict(zip(header, (c.strip() for c in next(csv.reader([ln])))))
        try:
            if by_date:
                m = year_fraction(valuation_date, dt.date.fromisoformat(row["maturity_date"]))
            else:
                m = float(row["maturity_years"])
            y = float(row["yield_pct"]) / 100.0
        except (KeyError, ValueError, TypeError) as exc:
            raise ValidationError(f"{path}:{lineno}: cannot parse row ({exc})") from exc
        if not (math.isfinite(m) and math.isfinite(y)):
            raise ValidationError(f"{path}:{lineno}: non-finite value")
        mats.append(m)
        ylds.append(y)
    try:
        return cal.EmpiricalCurve(np.array(mats), np.array(ylds), valuation_date, os.path.basename(path))
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def _maturities(text):
    if os.path.isfile(text):
        return list(read_curve_csv(text).maturities) if _has_yields(text) else _plain_column(text)
    vals = _floats(text, "maturities")
    if any(v <= 0 for v in vals):
        raise ValidationError("--maturities must be positive")
    return vals


def _has_yields(path):
    with open(path) as fh:
        return any("yield_pct" in ln for ln in fh if not ln.startswith("#"))


def _plain_column(path):
    vals = []
    with open(path) as fh:
        for i, ln in enumerate(fh, start=1):
            ln = ln.strip()
            if not ln or ln.startswith("#") or ln.startswith("maturity"):
                continue
            try:
                vals.append(float(ln.split(",")[0]))
            except ValueError as exc:
                raise ValidationError(f"{path}:{i}: non-numeric maturity {ln!r}") from exc
    return vals


# -- model assembly --------------------------------------------------------


def _params(args):
    if args.sigma is not None and args.beta is not None:
        raise ValidationError("give either --sigma or --beta, not both")
    if args.sigma is None and args.beta is None:
        raise ValidationError("one of --sigma or --beta is required")
    if args.sigma is not None:
        return ModelParams(args.sigma)
    return ModelParams.from_beta(args.beta)


def _cfg(args):
    n = args.n_levels if args.n_levels is not None else _default_levels()
    return PricingConfig(n_levels=n, max_levels=max(2000, n), model=args.model)


def _bundle(args):
    p = _params(args)
    cfg = _cfg(args)
    drift = DriftCurve.constant(args.r0)
    if args.model == "semi":
        sp = build_semi_spectrum(p, cfg.n_levels)
    elif args.model == "interval":
        if args.L is None:
            raise ValidationError("--L is required for the interval model")
        sp = build_interval_spectrum(p, args.L)
    else:
        r_star = args.r0 if args.r_star is None else args.r_star
        sp = build_robin_spectrum(p, args.nu, r_star, cfg.n_levels)
    log.info("resolved: model=%s sigma=%s beta=%s r0=%s z=%s L=%s nu=%s n_levels=%d",
             args.model, _g10(p.sigma), _g10(p.beta), args.r0, getattr(args, "z", None),
             args.L, args.nu, cfg.n_levels)
    return ModelBundle(sp, drift, cfg), p


def _model_flags(ap, need_z=True):
    ap.add_argument("--model", choices=("semi", "interval", "robin"), default="semi")
    ap.add_argument("--sigma", type=float)
    ap.add_argument("--beta", type=float)
    ap.add_argument("--r0", type=float, required=True, help="barrier level chi(t) (decimal)")
    if need_z:
        ap.add_argument("--z", type=float, required=True, help="current short rate (decimal)")
    ap.add_argument("--L", type=float, help="barrier separation in x units (interval model)")
    ap.add_argument("--nu", type=float, default=0.0, help="constant drift (robin model)")
    ap.add_argument("--r-star", type=float, dest="r_star", help="short-rate barrier (robin; default r0)")
    ap.add_argument("--n-levels", type=int, dest="n_levels")


# -- subcommands -----------------------------------------------------------


def cmd_airy(args, out):
    w = csv.writer(out, lineterminator="\n")
    if args.zeros:
        tab = ak.zero_table(args.zeros)
        w.writerow(["n", "xi", "zeta"])
        for k in range(tab.count):
            w.writerow([k + 1, _g10(tab.xi[k]), _g10(tab.zeta[k])])
        return
    ys = _floats(args.y, "y") if args.y else [0.0]
    w.writerow(["y", "ai", "ai_prime", "bi", "bi_prime"])
    for y in ys:
        v = ak.airy_eval(y)
        w.writerow([_g10(y), _g10(v.ai), _g10(v.ai_prime), _g10(v.bi), _g10(v.bi_prime)])


def cmd_spectrum(args, out):
    model, p = _bundle(args)
    sp = model.spectrum
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["n", "e_n", "E_n", "chi_n", "coef"])
    if args.model == "robin":
        levels, coef, e = sp.lambdas, sp.d, sp.e
        energies = levels
        chi = levels
    else:
        e, energies = sp.e, sp.energies
        chi = args.r0 + energies
        coef = sp.bond_coef if args.model == "semi" else sp.b
    count = min(len(e), args.count) if args.count else len(e)
    for k in range(count):
        w.writerow([k + 1, _g10(e[k]), _g10(energies[k]), _g10(chi[k]), _g10(coef[k])])


def cmd_price(args, out):
    model, _ = _bundle(args)
    mats = _maturities(args.maturities)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["maturity", "price", "yield_pct"])
    failed = None
    for m in mats:
        try:
            p = model.price(args.z, 0.0, m)
            w.writerow([_g10(m), _g10(p), _g6(100 * bond_yield(p, m))])
        except NumericalError as exc:
            failed = exc
            w.writerow([_g10(m), "nan", "nan"])
    if failed is not None:
        raise failed


def _curve(args):
    vd = parse_date(args.valuation_date) if args.valuation_date else None
    curve = read_curve_csv(args.input, vd)
    if args.min_maturity:
        curve = curve.subset(args.min_maturity)
    return curve


def cmd_calibrate(args, out):
    curve = _curve(args)
    n = args.n_levels if args.n_levels is not None else _default_levels()
    cfg = PricingConfig(n_levels=n, max_levels=max(2000, n))
    search = cal.SearchConfig(r_min=args.rmin)
    log.info("resolved: input=%s points=%d min_maturity=%s r_min=%s n_levels=%d",
             args.input, curve.maturities.size, args.min_maturity, args.rmin, n)
    res = cal.calibrate(curve, cfg, search)
    out.write(f"# z={_g10(res.z)} beta={_g10(res.beta)} r0={_g10(res.r0)} sigma={_g10(res.sigma)}\n")
    out.write(f"# rmse={_g10(res.rmse)} converged={res.converged} restarts={res.n_restarts_used}"
              f" chi_1={_g10(res.ground_level)}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["maturity", "empirical_pct", "model_pct", "residual_pct"])
    for m, y, r in zip(res.model_yields, curve.yields, res.residual_yields):
        w.writerow([_g10(m.maturity), _g6(100 * y), _g6(100 * m.yield_value), _g6(100 * r.yield_value)])
    if args.drift_output:
        drift = cal.reconstruct_drift(res.residual_yields, 0.0, res.r0)
        grid = np.linspace(0.0, curve.maturities[-1], args.drift_points)
        with open(args.drift_output, "w", newline="") as fh:
            dw = csv.writer(fh, lineterminator="\n")
            dw.writerow(["s", "chi", "nu"])
            for s, c, v in zip(grid, drift.chi(grid), drift.nu(grid)):
                dw.writerow([_g10(s), _g10(c), _g10(v)])


def cmd_residual(args, out):
    curve = _curve(args)
    n = args.n_levels if args.n_levels is not None else _default_levels()
    fitted = cal.model_yields((args.z, args.beta, args.r0), curve.maturities, PricingConfig(n_levels=n))
    log.info("resolved: z=%s beta=%s r0=%s n_levels=%d", args.z, args.beta, args.r0, n)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["maturity", "empirical_pct", "model_pct", "residual_pct"])
    for p, y in zip(fitted, curve.yields):
        w.writerow([_g10(p.maturity), _g6(100 * y), _g6(100 * p.yield_value), _g6(100 * (y - p.yield_value))])
    out.write(f"# rmse={_g10(cal.rmse(fitted, curve.points))}\n")


def cmd_baseline(args, out):
    curve = _curve(args)
    fit = cal.cubic_baseline(curve)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["maturity", "empirical_pct", "cubic_pct"])
    for p, y in zip(fit.model_yields, curve.yields):
        w.writerow([_g10(p.maturity), _g6(100 * y), _g6(100 * p.yield_value)])
    out.write(f"# rmse={_g10(fit.rmse)}\n")


def cmd_oracle(args, out):
    model, p = _bundle(args)
    mats = _maturities(args.maturities)
    drift = model.drift
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["maturity", "oracle", "spectral", "abs_gap", "rel_gap", "std_error"])
    for m in mats:
        spectral = model.price(args.z, 0.0, m)
        se = ""
        if args.method == "pde":
            if args.model == "robin":
                r_star = args.r0 if args.r_star is None else args.r_star
                val = pde_price_robin(args.z, m, p.sigma, args.nu, r_star, args.n_x, args.n_t)
            else:
                grid = PdeGrid(args.n_x, args.n_t)
                val = pde_price(args.z, 0.0, m, p.sigma, drift, grid, args.model, args.L)
        else:
            if args.model == "robin":
                raise ValidationError("Monte Carlo oracle covers the semi and interval models")
            mc = McConfig(n_paths=args.paths, steps_per_year=args.steps_per_year, seed=args.seed)
            res = mc_price(args.z, 0.0, m, p.sigma, drift, mc, args.model, args.L)
            val, se = res.price, _g10(res.std_error)
        gap = val - spectral
        w.writerow([_g10(m), _g10(val), _g10(spectral), _g10(gap), _g10(gap / spectral), se])


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--output", "-o", help="write CSV here instead of stdout")
    common.add_argument("--quiet", "-q", action="store_true", help="suppress parameter logging")
    ap = _Parser(prog="holee", description=__doc__.split("\n")[0] + " Yields in CSV are percent.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add = sub.add_parser
    sub.add_parser = lambda *a, **k: _add(*a, parents=[common], **k)

    a = sub.add_parser("airy", help="Airy values or zero table")
    a.add_argument("--y", help="comma-separated arguments")
    a.add_argument("--zeros", type=int, help="list the first N zeros of Ai' and Ai")
    a.set_defaults(func=cmd_airy)

    s = sub.add_parser("spectrum", help="levels and bond coefficients")
    _model_flags(s, need_z=False)
    s.add_argument("--count", type=int, default=10, help="rows to print (0 = all)")
    s.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("price", help="zero-coupon prices and yields")
    _model_flags(p)
    p.add_argument("--maturities", required=True, help="comma list in years, or a CSV file")
    p.set_defaults(func=cmd_price)

    for name, func, help_ in (("calibrate", cmd_calibrate, "fit (z, beta, r0) to a zero curve"),
                              ("residual", cmd_residual, "residual yields at given parameters"),
                              ("baseline", cmd_baseline, "cubic polynomial fit")):
        c = sub.add_parser(name, help=help_)
        c.add_argument("--input", required=True, help="CSV with maturity_years|maturity_date, yield_pct")
        c.add_argument("--valuation-date", dest="valuation_date", help="YYYY-MM-DD for dated maturities")
        c.add_argument("--min-maturity", dest="min_maturity", type=float, default=0.0)
        if name == "calibrate":
            c.add_argument("--rmin", type=float, default=0.0, help="floor on r0 + beta|xi_1|")
            c.add_argument("--n-levels", type=int, dest="n_levels")
            c.add_argument("--drift-output", dest="drift_output", help="CSV path for s, chi, nu")
            c.add_argument("--drift-points", dest="drift_points", type=int, default=121)
        if name == "residual":
            for flag in ("--z", "--beta", "--r0"):
                c.add_argument(flag, type=float, required=True)
            c.add_argument("--n-levels", type=int, dest="n_levels")
        c.set_defaults(func=func)

    o = sub.add_parser("oracle", help="compare spectral prices with PDE or Monte Carlo")
    _model_flags(o)
    o.add_argument("--maturities", required=True)
    o.add_argument("--method", choices=("pde", "mc"), default="pde")
    o.add_argument("--n-x", dest="n_x", type=int, default=2000)
    o.add_argument("--n-t", dest="n_t", type=int, default=2000)
    o.add_argument("--paths", type=int, default=100_000)
    o.add_argument("--steps-per-year", dest="steps_per_year", type=int, default=250)
    o.add_argument("--seed", type=int, default=12345)
    o.set_defaults(func=cmd_oracle)
    return ap


def run(argv=None):
    """Run one subcommand; returns the exit status."""
    try:
        args = build_parser().parse_args(argv)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(name)s: %(message)s", stream=sys.stderr, force=True)
    buf = io.StringIO()
    try:
        args.func(args, buf)
        status = 0
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        status = 1
    except (NumericalError, HoLeeError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        status = 2
    text = buf.getvalue() if status != 1 else ""
    if args.output and text:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    elif text:
        sys.stdout.write(text)
    return status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
