"""Command-line front end emitting CSV curve data.

Subcommands: pdf, cdf, mgf, asep, simulate, convert, figures.  Numeric CSV
cells use %.12e formatting, header rows are always present, and rows are
ordered by ascending x.  Average SNR is accepted in dB on every flag and
converted once (gamma0 = 10^(dB/10)).

Exit codes: 0 success, 2 usage error, 3 series convergence/cancellation
failure, 4 quadrature failure, 5 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import dist, mcsim, params
from .asep import ModulationSpec, asep_asymptotic, asep_exact, asep_quadrature
from .errors import (
    CancellationLossError,
    InvalidParameterError,
    QuadratureError,
    SeriesDivergenceError,
)
from .mgf import mgf_closed, mgf_series
from .params import TwdpParams
from .specfun import SeriesControl

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SERIES = 3
EXIT_QUADRATURE = 4
EXIT_IO = 5

# the four parameter sets used throughout the figure reproductions
FIGURE_SETS = (
    (0.0, 0.0, "k0_g0"),
    (8.0, 0.0, "k8_g0"),
    (8.0, 0.5, "k8_g05"),
    (14.0, 1.0, "k14_g1"),
)


class Axis(str, Enum):
    ENVELOPE_R = "envelope_r"
    SNR_DB = "snr_db"
    GAMMA = "gamma"
    DELTA = "delta"


@dataclass(frozen=True)
class SweepGrid:
    """Uniform sweep specification for one CSV x-axis."""

    axis: Axis
    start: float
    stop: float
    points: int
    scale: str = "linear"

    def __post_init__(self):
        if self.points < 2:
            raise InvalidParameterError(f"points must be >= 2, got {self.points}")
        if not self.start < self.stop:
            raise InvalidParameterError("grid start must be below stop")
        if self.scale not in ("linear", "log"):
            raise InvalidParameterError(f"scale must be linear or log, got {self.scale}")

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class CurvePoint:
    """One emitted row: x, y, plus auxiliary columns (terms, tags, ...)."""

    x: float
    y: float
    aux: dict | None = None


def _fmt_cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.12e" % float(v)


def _write_csv(header, rows, out) -> None:
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(_fmt_cell(v) for v in row) + "\n")


def _params_from_args(args) -> TwdpParams:
    gamma = args.gamma
    if args.delta is not None:
        gamma = params.gamma_from_delta(args.delta)
    if gamma is None:
        gamma = 0.0
    if args.sigma2 is not None:
        return TwdpParams(k=args.k, gamma=gamma, sigma2=args.sigma2)
    return TwdpParams(k=args.k, gamma=gamma)


def _series_control(args) -> SeriesControl:
    return SeriesControl(rel_tol=args.tol, max_terms=args.max_terms)


def _add_param_flags(sp, k_required=True):
    sp.add_argument("--k", type=float, required=k_required,
                    help="specular-to-diffuse power ratio K")
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--gamma", type=float, default=None,
                       help="specular magnitude ratio V2/V1 in [0, 1]")
    group.add_argument("--delta", type=float, default=None,
                       help="legacy parameter Delta in [0, 1] (converted to Gamma)")
    sp.add_argument("--sigma2", type=float, default=None,
                    help="diffuse half power; default normalizes total power to 1")


def _add_series_flags(sp):
    sp.add_argument("--tol", type=float, default=1e-12, help="series relative tolerance")
    sp.add_argument("--max-terms", type=int, default=500, help="series term budget")


def _parse_snr_range(spec: str) -> np.ndarray:
    try:
        start, stop, step = (float(tok) for tok in spec.split(":"))
    except ValueError as exc:
        raise InvalidParameterError(
            f"--snr-db expects from:to:step, got {spec!r}"
        ) from exc
    if step <= 0 or stop < start:
        raise InvalidParameterError(f"bad --snr-db range {spec!r}")
    n = int(round((stop - start) / step)) + 1
    return start + step * np.arange(n)


def _default_workers() -> int:
    env = os.environ.get("TWDP_WORKERS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


# ----------------------------------------------------------------------------
# subcommands


def _cmd_pdf_cdf(args, which: str, out) -> int:
    p = _params_from_args(args)
    ctl = _series_control(args)
    scale = math.sqrt(p.omega) if args.normalized else 1.0
    xs = SweepGrid(Axis.ENVELOPE_R, 0.0, args.rmax, args.points).values()
    points = []
    if which == "pdf":
        for x in xs:
            res = dist.pdf(p, float(x) * scale, ctl)
            points.append(CurvePoint(float(x), res.value * scale,
                                     {"terms_used": res.terms_used}))
    else:
        for res, x in zip(dist.cdf_grid(p, xs * scale, ctl), xs):
            points.append(CurvePoint(float(x), res.value,
                                     {"terms_used": res.terms_used}))
    rows = [(pt.x, pt.y, pt.aux["terms_used"]) for pt in points]
    _write_csv(["x", "y", "terms_used"], rows, out)
    return EXIT_OK


def _cmd_mgf(args, out) -> int:
    p = _params_from_args(args)
    ctl = _series_control(args)
    gamma0 = 10.0 ** (args.gamma0_db / 10.0)
    ctx = dist.SnrContext.from_average_snr(p, gamma0)
    if args.smin >= args.smax or args.smax > 0:
        raise InvalidParameterError("mgf sweep requires smin < smax <= 0")
    xs = np.linspace(args.smin, args.smax, args.points)
    header = ["s"]
    if args.method in ("series", "both"):
        header += ["mgf_series", "terms_used"]
    if args.method in ("closed", "both"):
        header += ["mgf_closed"]
    rows = []
    for s in xs:
        row = [float(s)]
        if args.method in ("series", "both"):
            res = mgf_series(p, ctx, float(s), ctl)
            row += [res.value, res.terms_used]
        if args.method in ("closed", "both"):
            row += [mgf_closed(p, ctx, float(s))]
        rows.append(row)
    _write_csv(header, rows, out)
    return EXIT_OK


def _asep_exact_with_fallback(p, mod, gamma0, ctl):
    """(value, terms, tag); substitutes quadrature when the series flags
    unrecoverable cancellation."""
    try:
        res = asep_exact(p, mod, gamma0, ctl)
        return res.value, res.terms_used, "exact"
    except CancellationLossError:
        return asep_quadrature(p, mod, gamma0), 0, "quadrature-fallback"


def _cmd_asep(args, out) -> int:
    p = _params_from_args(args)
    ctl = _series_control(args)
    mod = ModulationSpec(args.mod_order)
    snrs = _parse_snr_range(args.snr_db)
    methods = ["exact", "asymptotic", "quadrature"] if args.method == "all" else [args.method]
    header = ["snr_db"] + methods + (["method_tag"] if "exact" in methods else [])
    rows = []
    for db in snrs:
        gamma0 = 10.0 ** (db / 10.0)
        row = [float(db)]
        tag = ""
        for m in methods:
            if m == "exact":
                value, _terms, tag = _asep_exact_with_fallback(p, mod, gamma0, ctl)
                row.append(value)
            elif m == "asymptotic":
                row.append(asep_asymptotic(p, mod, gamma0))
            else:
                row.append(asep_quadrature(p, mod, gamma0))
        if "exact" in methods:
            row.append(tag)
        rows.append(row)
    _write_csv(header, rows, out)
    return EXIT_OK


def _cmd_simulate(args, out) -> int:
    p = _params_from_args(args)
    mod = ModulationSpec(args.mod_order)
    snrs = _parse_snr_range(args.snr_db)
    cfg = mcsim.SimConfig(
        n_samples=args.samples, seed=args.seed, workers=args.workers
    )
    rows = []
    for db in snrs:
        est = mcsim.simulate_psk_ser(p, mod, float(db), cfg, min_errors=args.min_errors)
        rows.append((float(db), est.ser, est.ci95_halfwidth, est.errors, est.trials))
    _write_csv(["snr_db", "ser", "ci95", "errors", "trials"], rows, out)
    return EXIT_OK


def _cmd_convert(args, out) -> int:
    if (args.gamma is None) == (args.delta is None):
        raise InvalidParameterError("convert requires exactly one of --gamma/--delta")
    rows = []
    if args.gamma is not None:
        gamma = args.gamma
        delta = params.delta_from_gamma(gamma)
        k_of = lambda kr: params.k_from_rice_gamma(kr, gamma)
    else:
        delta = args.delta
        gamma = params.gamma_from_delta(delta)
        k_of = lambda kr: params.k_from_rice_delta(kr, delta)
    header = ["gamma", "delta"]
    row = [gamma, delta]
    if args.k_rice is not None:
        header += ["k_rice", "k"]
        row += [args.k_rice, k_of(args.k_rice)]
    rows.append(row)
    _write_csv(header, rows, out)
    return EXIT_OK


def _figure_sets(sigma2):
    out = []
    for k, g, tag in FIGURE_SETS:
        out.append((TwdpParams(k=k, gamma=g) if sigma2 is None
                    else TwdpParams(k=k, gamma=g, sigma2=sigma2), tag))
    return out


def _cmd_figures(args, out) -> int:
    outdir = args.outdir
    os.makedirs(outdir, exist_ok=True)
    ctl = SeriesControl()
    manifest: dict = {
        "seed": args.seed,
        "samples": args.samples,
        "snr_step_db": args.snr_step,
        "figures": {},
    }

    def emit(name, header, rows, meta):
        path = os.path.join(outdir, name)
        with open(path, "w", newline="") as fh:
            _write_csv(header, rows, fh)
        manifest["figures"][name] = meta
        out.write(f"wrote {path}\n")

    # parameter-map curves
    v_ratio = np.linspace(0.0, 1.0, args.points)
    emit(
        "fig1.csv",
        ["v2_over_v1", "delta", "gamma"],
        [(x, params.delta_from_gamma(float(x)), x) for x in v_ratio],
        {"curves": ["delta", "gamma"], "points": args.points},
    )
    emit(
        "fig2.csv",
        ["param_value", "k_ratio_vs_delta", "k_ratio_vs_gamma"],
        [
            (
                x,
                params.k_from_rice_delta(1.0, float(x)),
                params.k_from_rice_gamma(1.0, float(x)),
            )
            for x in v_ratio
        ],
        {"curves": ["k/k_rice vs delta", "k/k_rice vs gamma"], "points": args.points},
    )

    # normalized envelope pdf/cdf curves for the four parameter sets
    sets = _figure_sets(None)
    r_norm = np.linspace(0.0, 3.5, args.points)
    for which, fname in (("pdf", "fig3a.csv"), ("cdf", "fig3b.csv")):
        header = ["r_norm"] + [f"{which}_{tag}" for _, tag in sets]
        cols = []
        max_terms = 0
        for p, _tag in sets:
            scale = math.sqrt(p.omega)
            if which == "pdf":
                res = [dist.pdf(p, float(x) * scale, ctl) for x in r_norm]
                cols.append([v.value * scale for v in res])
            else:
                res = dist.cdf_grid(p, r_norm * scale, ctl)
                cols.append([v.value for v in res])
            max_terms = max(max_terms, max(v.terms_used for v in res))
        rows = list(zip(r_norm, *cols))
        emit(fname, header, rows, {
            "sets": [tag for _, tag in sets],
            "points": args.points,
            "max_terms_used": max_terms,
        })

    # exact / asymptotic / simulated symbol error rate, one file per PSK order
    snrs = np.arange(0.0, 40.0 + 1e-9, args.snr_step)
    cfg_kwargs = dict(n_samples=args.samples, seed=args.seed, workers=args.workers)
    for m_order, fname in ((2, "fig4a.csv"), (4, "fig4b.csv"), (8, "fig4c.csv"), (16, "fig4d.csv")):
        mod = ModulationSpec(m_order)
        header = ["snr_db"]
        for _, tag in sets:
            header += [f"exact_{tag}", f"asym_{tag}", f"sim_{tag}", f"sim_ci95_{tag}"]
        rows = []
        fallbacks = []
        max_terms = 0
        for db in snrs:
            gamma0 = 10.0 ** (db / 10.0)
            row = [float(db)]
            for p, tag in sets:
                value, terms, tag_method = _asep_exact_with_fallback(p, mod, gamma0, ctl)
                max_terms = max(max_terms, terms)
                if tag_method != "exact":
                    fallbacks.append({"snr_db": float(db), "set": tag})
                est = mcsim.simulate_psk_ser(p, mod, float(db), mcsim.SimConfig(**cfg_kwargs))
                row += [value, asep_asymptotic(p, mod, gamma0), est.ser, est.ci95_halfwidth]
            rows.append(row)
        emit(fname, header, rows, {
            "m_order": m_order,
            "sets": [tag for _, tag in sets],
            "seed": args.seed,
            "samples_per_point": args.samples,
            "max_terms_used": max_terms,
            "quadrature_fallbacks": fallbacks,
        })

    # binary PSK error-rate families against the legacy and revised parameter
    delta_family = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.75, 1.0]
    gamma_family = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
    mod2 = ModulationSpec(2)
    for fname, values, flavor in (
        ("fig6a.csv", delta_family, "delta"),
        ("fig6b.csv", gamma_family, "gamma"),
    ):
        header = ["snr_db"] + [f"asep_{flavor}_{v:g}" for v in values]
        rows = []
        for db in snrs:
            gamma0 = 10.0 ** (db / 10.0)
            row = [float(db)]
            for v in values:
                gamma = params.gamma_from_delta(v) if flavor == "delta" else v
                p = TwdpParams(k=6.0, gamma=gamma)
                value, _terms, _tag = _asep_exact_with_fallback(p, mod2, gamma0, ctl)
                row.append(value)
            rows.append(row)
        emit(fname, header, rows, {
            "k": 6.0,
            "m_order": 2,
            flavor: values,
        })

    manifest_path = os.path.join(outdir, "manifest.json")
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    out.write(f"wrote {manifest_path}\n")
    return EXIT_OK


# ----------------------------------------------------------------------------
# parser / entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="twdp",
        description="TWDP fading statistics, M-PSK error rates and Monte Carlo checks (CSV output)",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    for which in ("pdf", "cdf"):
        sp = sub.add_parser(which, help=f"envelope {which} curve")
        _add_param_flags(sp)
        _add_series_flags(sp)
        sp.add_argument("--rmax", type=float, default=3.5,
                        help="upper envelope value (normalized units by default)")
        sp.add_argument("--points", type=int, default=200)
        sp.add_argument("--normalized", action=argparse.BooleanOptionalAction, default=True,
                        help="x axis is r/sqrt(Omega) and the density is rescaled accordingly")

    sp = sub.add_parser("mgf", help="SNR MGF curve over s <= 0")
    _add_param_flags(sp)
    _add_series_flags(sp)
    sp.add_argument("--gamma0-db", type=float, default=10.0)
    sp.add_argument("--smin", type=float, default=-10.0)
    sp.add_argument("--smax", type=float, default=0.0)
    sp.add_argument("--points", type=int, default=101)
    sp.add_argument("--method", choices=["series", "closed", "both"], default="both")

    sp = sub.add_parser("asep", help="average M-PSK symbol error probability curve")
    _add_param_flags(sp)
    _add_series_flags(sp)
    sp.add_argument("--mod-order", type=int, default=2)
    sp.add_argument("--snr-db", type=str, default="0:40:5", help="from:to:step in dB")
    sp.add_argument("--method", choices=["exact", "asymptotic", "quadrature", "all"],
                    default="all")

    sp = sub.add_parser("simulate", help="Monte Carlo M-PSK symbol error rate")
    _add_param_flags(sp)
    sp.add_argument("--mod-order", type=int, default=2)
    sp.add_argument("--snr-db", type=str, default="0:40:5")
    sp.add_argument("--samples", type=int, default=1_000_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=_default_workers())
    sp.add_argument("--min-errors", type=int, default=None,
                    help="stop early once this many error events are seen")

    sp = sub.add_parser("convert", help="convert between Gamma and Delta (and K forms)")
    sp.add_argument("--gamma", type=float, default=None)
    sp.add_argument("--delta", type=float, default=None)
    sp.add_argument("--k-rice", type=float, default=None,
                    help="also report total K for this dominant-ray K factor")

    sp = sub.add_parser("figures", help="emit the full CSV curve bundle plus manifest")
    sp.add_argument("--outdir", type=str, required=True)
    sp.add_argument("--points", type=int, default=401)
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=_default_workers())
    sp.add_argument("--snr-step", type=float, default=2.0)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    out = sys.stdout
    try:
        if args.command in ("pdf", "cdf"):
            return _cmd_pdf_cdf(args, args.command, out)
        if args.command == "mgf":
            return _cmd_mgf(args, out)
        if args.command == "asep":
            return _cmd_asep(args, out)
        if args.command == "simulate":
            return _cmd_simulate(args, out)
        if args.command == "convert":
            return _cmd_convert(args, out)
        if args.command == "figures":
            return _cmd_figures(args, out)
        ap.error(f"unknown command {args.command}")
    except InvalidParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SeriesDivergenceError, CancellationLossError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SERIES
    except QuadratureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_QUADRATURE
    except OSError as exc:
        print(f"error: {exc.strerror or exc} ({getattr(exc, 'filename', '')})", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
