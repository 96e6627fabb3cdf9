"""Command-line interface.

Subcommands: ``basis`` (synthesize and dump a basis set), ``fit`` (fit a
CSV dataset or a synthetic realization), ``montecarlo`` (repeated-noise
validation), ``sweep`` (quality tables for complete/incomplete sets), and
``compare`` (orthogonal vs. monomial route on the same data). Every
subcommand writes delimited data files and, unless ``--no-plot`` is given, a
companion PNG. A JSON config file can preset any option; explicit flags win.

Exit codes: 0 success, 2 usage, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from math import pi
from pathlib import Path

import numpy as np

from . import __version__, dataio
from .baseline import gram_matrix, vandermonde_basis, vandermonde_fit
from .basis import WeightModel, synthesize_basis
from .errors import DataError, NumericalError, SingularSystem
from .fitting import Observations, hermite_fit
from .quality import quality_measures, sweep_complete, sweep_incomplete
from .synthetic import SyntheticSpec, generate, run_monte_carlo, weights_for

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

_DEFAULTS = {
    "basis": {
        "n": 300, "degree": 4, "range": [-1.0, 1.0],
        "sigma_y": 0.2, "sigma_dy": 0.8,
        "check": False, "out": ".", "plot": True,
    },
    "fit": {
        "input": None, "function": "cos5x", "coeffs": None,
        "n": 500, "degree": 35, "range": [-2 * pi, 2 * pi],
        "sigma_y": 0.1, "sigma_dy": 2.0, "seed": 0,
        "method": "dop", "out": ".", "plot": True,
    },
    "montecarlo": {
        "function": "cos5x", "coeffs": None,
        "n": 500, "degree": 35, "range": [-2 * pi, 2 * pi],
        "sigma_y": 0.1, "sigma_dy": 2.0, "seed": 0, "n_iter": 1000,
        "out": ".", "plot": True,
    },
    "sweep": {
        "mode": None, "n": None, "degrees": None,
        "sigma_y": 0.2, "sigma_dy": 0.8,
        "out": ".", "plot": True,
    },
    "compare": {
        "input": None, "function": "cos5x", "coeffs": None,
        "n": 500, "degree": 35, "range": [-2 * pi, 2 * pi],
        "sigma_y": 0.1, "sigma_dy": 2.0, "seed": 0,
        "out": ".", "plot": True,
    },
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dopfit",
        description="Covariance-weighted discrete orthogonal polynomial fitting",
    )
    parser.add_argument("--version", action="version", version=f"dopfit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file presetting options")
        p.add_argument("--out", help="output directory (default: current)")
        p.add_argument(
            "--plot", action=argparse.BooleanOptionalAction, default=None,
            help="render companion PNG figures (default: on)",
        )

    def sigmas(p, what):
        p.add_argument("--sigma-y", type=float, help=f"value-domain {what}")
        p.add_argument("--sigma-dy", type=float, help=f"derivative-domain {what}")

    def synth(p):
        p.add_argument("--function", choices=["cos5x", "polynomial"],
                       help="synthetic truth (default: cos5x)")
        p.add_argument("--coeffs", help="comma-separated monomial coefficients, "
                                        "low order first (for --function polynomial)")
        p.add_argument("--n", type=int, help="sample count")
        p.add_argument("--range", nargs=2, type=float, metavar=("LO", "HI"),
                       help="abscissa interval")
        p.add_argument("--seed", type=int, help="noise seed")

    p = sub.add_parser("basis", help="synthesize a basis set and dump its columns")
    p.add_argument("--n", type=int, help="sample count")
    p.add_argument("--degree", type=int, help="basis degree")
    p.add_argument("--range", nargs=2, type=float, metavar=("LO", "HI"))
    sigmas(p, "noise level")
    p.add_argument("--check", action=argparse.BooleanOptionalAction, default=None,
                   help="also write the quality report")
    common(p)

    p = sub.add_parser("fit", help="fit a dataset file or a synthetic realization")
    p.add_argument("--input", help="dataset CSV (header x,y,dy[,sigma_y,sigma_dy]); "
                                   "omit to fit synthetic data")
    p.add_argument("--degree", type=int, help="polynomial degree")
    p.add_argument("--method", choices=["dop", "vandermonde", "both"])
    synth(p)
    sigmas(p, "noise level / global sigma for files without sigma columns")
    common(p)

    p = sub.add_parser("montecarlo", help="repeated-noise validation experiment")
    p.add_argument("--degree", type=int, help="polynomial degree")
    p.add_argument("--n-iter", type=int, help="number of iterations")
    synth(p)
    sigmas(p, "noise level")
    common(p)

    p = sub.add_parser("sweep", help="quality tables over sizes or degrees")
    p.add_argument("--mode", choices=["complete", "incomplete"])
    p.add_argument("--n", help="sample counts: START:STEP:STOP, comma list, or one "
                               "integer (incomplete mode takes one integer)")
    p.add_argument("--degrees", help="comma-separated degrees (incomplete mode)")
    sigmas(p, "noise level")
    common(p)

    p = sub.add_parser("compare", help="orthogonal vs monomial route on one dataset")
    p.add_argument("--input", help="dataset CSV; omit to compare on synthetic data")
    p.add_argument("--degree", type=int, help="polynomial degree")
    synth(p)
    sigmas(p, "noise level / global sigma for files without sigma columns")
    common(p)

    return parser


def _resolve(parser, args) -> tuple[dict, set]:
    """Merge CLI flags over config-file values over built-in defaults.

    Returns the resolved option dict and the set of keys that were given
    explicitly (flag or config), which some commands need to distinguish
    from defaults.
    """
    defaults = _DEFAULTS[args.command]
    config = {}
    if getattr(args, "config", None):
        try:
            config = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config file: {exc}")
        if not isinstance(config, dict):
            parser.error("config file must hold a JSON object")
        unknown = set(config) - set(defaults)
        if unknown:
            parser.error(f"unknown config keys: {', '.join(sorted(unknown))}")
    values = dict(defaults)
    explicit = set()
    for key in defaults:
        if key in config:
            values[key] = config[key]
            explicit.add(key)
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
            explicit.add(key)
    _validate(parser, args.command, values)
    return values, explicit


def _validate(parser, command, v):
    if v.get("degree") is not None and command != "sweep" and v["degree"] < 0:
        parser.error("--degree must be >= 0")
    if v.get("n") is not None and command != "sweep":
        if int(v["n"]) < 2:
            parser.error("--n must be >= 2")
    for key in ("sigma_y", "sigma_dy"):
        if v.get(key) is not None and not v[key] >= 0:
            parser.error(f"--{key.replace('_', '-')} must be >= 0")
    if command == "montecarlo" and v["n_iter"] < 1:
        parser.error("--n-iter must be >= 1")
    if v.get("range") is not None and not v["range"][0] < v["range"][1]:
        parser.error("--range must satisfy LO < HI")
    if command == "sweep":
        if v["mode"] is None:
            parser.error("--mode is required")
        if v["n"] is None:
            parser.error("--n is required")
        if v["mode"] == "complete":
            v["n_values"] = _parse_int_list(parser, str(v["n"]), "--n")
            if any(n < 2 for n in v["n_values"]):
                parser.error("--n values must be >= 2")
        else:
            try:
                v["n_fixed"] = int(v["n"])
            except ValueError:
                parser.error("--n must be a single integer in incomplete mode")
            if v["n_fixed"] < 2:
                parser.error("--n must be >= 2")
            if not v.get("degrees"):
                parser.error("--degrees is required in incomplete mode")
            v["degree_values"] = _parse_int_list(parser, str(v["degrees"]), "--degrees")
            if not v["degree_values"] or any(d < 0 for d in v["degree_values"]):
                parser.error("--degrees must be a non-empty list of degrees >= 0")
    if command in ("fit", "montecarlo", "compare") or (
        command == "basis" and v.get("function") == "polynomial"
    ):
        if v.get("function") == "polynomial":
            if not v.get("coeffs"):
                parser.error("--coeffs is required with --function polynomial")
            v["coeff_values"] = _parse_float_list(parser, str(v["coeffs"]), "--coeffs")


def _parse_int_list(parser, spec, flag) -> list[int]:
    try:
        if ":" in spec:
            start, step, stop = (int(part) for part in spec.split(":"))
            if step <= 0:
                raise ValueError
            return list(range(start, stop + 1, step))
        return [int(part) for part in spec.split(",") if part.strip() != ""]
    except ValueError:
        parser.error(f"{flag}: expected START:STEP:STOP, a comma list, or an integer")


def _parse_float_list(parser, spec, flag) -> list[float]:
    try:
        values = [float(part) for part in spec.split(",") if part.strip() != ""]
    except ValueError:
        parser.error(f"{flag}: expected a comma-separated list of numbers")
    if not values:
        parser.error(f"{flag}: list is empty")
    return values


# -- data assembly ---------------------------------------------------------------

def _synthetic_spec(v) -> SyntheticSpec:
    return SyntheticSpec(
        function=v["function"],
        coefficients=tuple(v["coeff_values"]) if v.get("coeff_values") else None,
        x_range=(v["range"][0], v["range"][1]),
        n=int(v["n"]),
        sigma_y=v["sigma_y"],
        sigma_dy=v["sigma_dy"],
        seed=int(v["seed"]),
    )


def _load_inputs(v, explicit):
    """Dataset from --input or a synthetic draw; returns (x, obs, weights, meta)."""
    if v.get("input"):
        sigma_y = v["sigma_y"] if "sigma_y" in explicit else None
        sigma_dy = v["sigma_dy"] if "sigma_dy" in explicit else None
        x_raw, obs, weights = dataio.read_dataset(
            v["input"], sigma_y=sigma_y, sigma_dy=sigma_dy
        )
        meta = {"sigma_y": sigma_y, "sigma_dy": sigma_dy, "seed": None}
        return x_raw, obs, weights, meta
    spec = _synthetic_spec(v)
    x_raw, _, _, y_hat, dy_hat = generate(spec)
    meta = {"sigma_y": spec.sigma_y, "sigma_dy": spec.sigma_dy, "seed": spec.seed}
    return x_raw, Observations(y_hat, dy_hat), weights_for(spec), meta


def _out_dir(v) -> Path:
    out = Path(v["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _announce(paths):
    for path in paths:
        print(f"wrote {path}")


# -- subcommands -------------------------------------------------------------------

def _cmd_basis(v, explicit) -> int:
    out = _out_dir(v)
    x_raw = np.linspace(v["range"][0], v["range"][1], int(v["n"]))
    weights = WeightModel.from_sigmas(v["sigma_y"], v["sigma_dy"], int(v["n"]))
    basis = synthesize_basis(x_raw, weights, v["degree"])
    written = list(dataio.write_basis(out, basis))
    if v["check"]:
        report = quality_measures(basis)
        written.append(
            dataio.write_quality(out / "quality.json", report, basis.grid.n, basis.degree)
        )
        print(f"orthonormality residual (frobenius): {report.eps_frob:.3e}")
    if v["plot"]:
        from . import plots

        plots.save_basis_figure(basis, out / "basis.png")
        written.append(out / "basis.png")
    _announce(written)
    return EXIT_OK


def _cmd_fit(v, explicit) -> int:
    out = _out_dir(v)
    x_raw, obs, weights, meta = _load_inputs(v, explicit)
    degree = int(v["degree"])
    meta["degree"] = degree
    written = []
    fits = {}
    if v["method"] in ("dop", "both"):
        basis = synthesize_basis(x_raw, weights, degree)
        fit = hermite_fit(basis, obs)
        fits["dop"] = fit
        name = "fit" if v["method"] == "dop" else "fit_dop"
        written.append(out / f"{name}.csv")
        written.append(
            dataio.write_fit(out / f"{name}.csv", fit, basis.grid,
                             meta=dict(meta, method="dop"))
        )
    if v["method"] in ("vandermonde", "both"):
        vb = vandermonde_basis(x_raw, degree)
        try:
            fit = vandermonde_fit(vb, weights, obs)
        except SingularSystem:
            if v["method"] == "vandermonde":
                raise
            fits["vandermonde"] = None
        else:
            fits["vandermonde"] = fit
            name = "fit" if v["method"] == "vandermonde" else "fit_vandermonde"
            written.append(out / f"{name}.csv")
            written.append(
                dataio.write_fit(out / f"{name}.csv", fit, vb.grid,
                                 meta=dict(meta, method="vandermonde"))
            )
    if v["method"] == "both":
        written.append(_write_diff(out / "diff.json", fits, obs, degree))
    for label, fit in fits.items():
        if fit is not None:
            res_y = np.std(obs.y_hat - fit.y_tilde, ddof=1)
            res_dy = np.std(obs.y_hat_prime - fit.y_tilde_prime, ddof=1)
            print(f"{label}: residual std value={res_y:.6g} derivative={res_dy:.6g}")
        else:
            print(f"{label}: normal equations singular at degree {degree}")
    if v["plot"]:
        from . import plots

        shown = {k: f for k, f in fits.items() if f is not None}
        if len(shown) == 1:
            plots.save_fit_figure(x_raw, obs, next(iter(shown.values())),
                                  out / "fit.png", title=f"degree {degree} fit")
        else:
            plots.save_compare_figure(
                x_raw, obs,
                {k: (f.y_tilde, f.y_tilde_prime) for k, f in shown.items()},
                out / "fit.png",
            )
        written.append(out / "fit.png")
    _announce(written)
    return EXIT_OK


def _write_diff(path, fits, obs, degree) -> Path:
    dop, van = fits.get("dop"), fits.get("vandermonde")
    payload = {
        "degree": degree,
        "n": int(obs.n),
        "vandermonde_solved": van is not None,
        "version": __version__,
    }
    if van is not None:
        scale = max(float(np.linalg.norm(dop.y_tilde)), 1e-300)
        payload["rms_diff_y"] = float(
            np.sqrt(np.mean((dop.y_tilde - van.y_tilde) ** 2))
        )
        payload["rms_diff_dy"] = float(
            np.sqrt(np.mean((dop.y_tilde_prime - van.y_tilde_prime) ** 2))
        )
        payload["rel_diff_y"] = float(
            np.linalg.norm(dop.y_tilde - van.y_tilde) / scale
        )
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return path


def _cmd_montecarlo(v, explicit) -> int:
    out = _out_dir(v)
    spec = _synthetic_spec(v)
    result = run_monte_carlo(spec, int(v["degree"]), int(v["n_iter"]))
    written = [dataio.write_montecarlo(out / "montecarlo.json", result, spec,
                                       int(v["degree"]))]
    print(
        f"mean residual std over {result.n_iter} runs: "
        f"value={result.mean_std_ry:.6g} (gain {spec.sigma_y:g}), "
        f"derivative={result.mean_std_rdy:.6g} (gain {spec.sigma_dy:g})"
    )
    if v["plot"]:
        from . import plots

        plots.save_montecarlo_figure(result, spec.sigma_y, spec.sigma_dy,
                                     out / "montecarlo.png")
        written.append(out / "montecarlo.png")
    _announce(written)
    return EXIT_OK


def _cmd_sweep(v, explicit) -> int:
    out = _out_dir(v)
    if v["mode"] == "complete":
        rows = sweep_complete(v["n_values"], v["sigma_y"], v["sigma_dy"])
    else:
        rows = sweep_incomplete(
            v["n_fixed"], v["degree_values"], v["sigma_y"], v["sigma_dy"]
        )
    written = [dataio.write_sweep(out / f"sweep_{v['mode']}.csv", rows)]
    failures = [r for r in rows if r.report is None or r.error]
    print(f"{len(rows)} rows, {len(failures)} with recorded errors")
    if v["plot"]:
        from . import plots

        plots.save_sweep_figure(rows, v["mode"], out / "sweep.png")
        written.append(out / "sweep.png")
    _announce(written)
    return EXIT_OK


def _cmd_compare(v, explicit) -> int:
    out = _out_dir(v)
    x_raw, obs, weights, meta = _load_inputs(v, explicit)
    degree = int(v["degree"])
    meta["degree"] = degree
    basis = synthesize_basis(x_raw, weights, degree)
    dop = hermite_fit(basis, obs)
    written = [
        dataio.write_fit(out / "fit_dop.csv", dop, basis.grid,
                         meta=dict(meta, method="dop")),
        out / "fit_dop.csv",
    ]
    vb = vandermonde_basis(x_raw, degree)
    gram = gram_matrix(vb, weights)
    payload = {
        "degree": degree,
        "n": int(obs.n),
        "gram_condition": float(np.linalg.cond(gram)),
        "version": __version__,
    }
    try:
        van = vandermonde_fit(vb, weights, obs)
    except SingularSystem as exc:
        van = None
        payload["vandermonde_error"] = str(exc)
    else:
        payload["vandermonde_error"] = None
        written += [
            dataio.write_fit(out / "fit_vandermonde.csv", van, vb.grid,
                             meta=dict(meta, method="vandermonde")),
            out / "fit_vandermonde.csv",
        ]
        payload["rms_diff_y"] = float(np.sqrt(np.mean((dop.y_tilde - van.y_tilde) ** 2)))
        payload["rms_diff_dy"] = float(
            np.sqrt(np.mean((dop.y_tilde_prime - van.y_tilde_prime) ** 2))
        )
    (out / "comparison.json").write_text(
        json.dumps(payload, indent=2) + "\n", encoding="utf-8"
    )
    written.append(out / "comparison.json")
    status = "solved" if van is not None else "singular"
    print(f"vandermonde normal equations: {status} "
          f"(condition {payload['gram_condition']:.3e})")
    if v["plot"]:
        from . import plots

        fits = {"dop": (dop.y_tilde, dop.y_tilde_prime)}
        if van is not None:
            fits["vandermonde"] = (van.y_tilde, van.y_tilde_prime)
        plots.save_compare_figure(x_raw, obs, fits, out / "compare.png")
        written.append(out / "compare.png")
    _announce(written)
    return EXIT_OK


_HANDLERS = {
    "basis": _cmd_basis,
    "fit": _cmd_fit,
    "montecarlo": _cmd_montecarlo,
    "sweep": _cmd_sweep,
    "compare": _cmd_compare,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    values, explicit = _resolve(parser, args)
    try:
        return _HANDLERS[args.command](values, explicit)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
