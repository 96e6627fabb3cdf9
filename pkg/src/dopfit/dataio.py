"""Dataset ingestion and result serialization.

CSV files use comma separators, ``.`` decimals, ``#`` comment lines, and
UTF-8 with LF or CRLF endings. Floats are written with ``repr``, which
round-trips exactly (shortest representation, at most 17 significant
digits). JSON results carry no timestamps, so identical inputs give
byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from . import __version__
from .basis import Grid, WeightModel
from .errors import NegativeSigma, NonMonotonicAbscissa, ParseError, ZeroSigma
from .fitting import HermiteFit, Observations
from .quality import QualityReport, SweepRow
from .synthetic import MonteCarloResult, SyntheticSpec

DATASET_HEADER = ["x", "y", "dy"]
DATASET_HEADER_SIGMA = ["x", "y", "dy", "sigma_y", "sigma_dy"]
FIT_HEADER = ["x", "y_tilde", "dy_tilde", "sd_y", "sd_dy"]
SWEEP_HEADER = [
    "n", "d", "method",
    "eps_max", "eps_frob", "eps_det", "eps_cond", "eps_rank",
    "eta_max", "eta_frob", "eta_det", "eta_cond", "eta_rank",
    "error",
]


def read_dataset(path, sigma_y=None, sigma_dy=None):
    """Read a dataset CSV into fitting inputs.

    The file needs header ``x,y,dy`` or ``x,y,dy,sigma_y,sigma_dy``. Without
    sigma columns, global ``sigma_y``/``sigma_dy`` must be supplied; with
    them, per-sample diagonal weights ``1/sigma**2`` are built (``inf``
    drops the sample from its domain, ``0`` is rejected). Returns
    ``(x_raw, Observations, WeightModel)``.
    """
    path = Path(path)
    rows = []
    try:
        handle = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    with handle:
        for lineno, record in enumerate(csv.reader(handle), start=1):
            if not record or (record[0].lstrip().startswith("#")):
                continue
            if len(record) == 1 and not record[0].strip():
                continue
            rows.append((lineno, [cell.strip() for cell in record]))
    if not rows:
        raise ParseError(f"{path}: no header row found")
    header_line, header = rows[0]
    if header == DATASET_HEADER:
        has_sigma = False
    elif header == DATASET_HEADER_SIGMA:
        has_sigma = True
    else:
        raise ParseError(
            f"{path}: header must be {','.join(DATASET_HEADER)} or "
            f"{','.join(DATASET_HEADER_SIGMA)}",
            row=header_line,
        )
    data_rows = rows[1:]
    if not data_rows:
        raise ParseError(f"{path}: no data rows", row=header_line)
    table = np.empty((len(data_rows), len(header)))
    for i, (lineno, record) in enumerate(data_rows):
        if len(record) != len(header):
            raise ParseError(
                f"{path}: expected {len(header)} fields, got {len(record)}",
                row=lineno,
            )
        for j, cell in enumerate(record):
            try:
                table[i, j] = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}: not a number: {cell!r}", row=lineno, column=header[j]
                ) from None
    x = table[:, 0]
    y = table[:, 1]
    dy = table[:, 2]
    for j, name in enumerate(("x", "y", "dy")):
        if not np.all(np.isfinite(table[:, j])):
            raise ParseError(f"{path}: column {name!r} has non-finite values")
    if np.any(np.diff(x) <= 0):
        raise NonMonotonicAbscissa(f"{path}: column 'x' must be strictly increasing")
    if has_sigma:
        sy, sdy = table[:, 3], table[:, 4]
        _check_sigma_column(sy, path, "sigma_y")
        _check_sigma_column(sdy, path, "sigma_dy")
    else:
        if sigma_y is None or sigma_dy is None:
            raise ParseError(
                f"{path}: no sigma columns; global sigma_y and sigma_dy required"
            )
        sy, sdy = sigma_y, sigma_dy
    weights = WeightModel.from_sigmas(sy, sdy, n=x.size)
    return x, Observations(y, dy), weights


def _check_sigma_column(values: np.ndarray, path, name: str):
    if np.any(np.isnan(values)) or np.any(values < 0):
        raise NegativeSigma(f"{path}: column {name!r} must be non-negative")
    if np.any(values == 0.0):
        raise ZeroSigma(
            f"{path}: column {name!r} contains 0; exact constraints are not "
            "supported, use inf to drop a sample"
        )


def write_fit(path, fit: HermiteFit, grid: Grid, meta: dict | None = None):
    """Write a fit as CSV plus a JSON sidecar with the coefficients.

    The sidecar lands next to the CSV with a ``.json`` suffix and carries
    the coefficient vector and run metadata (degree, n, sigmas, seed,
    version); metadata not supplied defaults to null.
    """
    path = Path(path)
    columns = [grid.x_raw, fit.y_tilde, fit.y_tilde_prime, fit.sd_y, fit.sd_dy]
    _write_csv(path, FIT_HEADER, np.column_stack(columns))
    meta = meta or {}
    sidecar = {
        "gamma": [float(g) for g in fit.gamma],
        "degree": fit.degree,
        "n": int(grid.n),
        "sigma_y": meta.get("sigma_y"),
        "sigma_dy": meta.get("sigma_dy"),
        "seed": meta.get("seed"),
        "version": __version__,
    }
    for key, value in meta.items():
        sidecar.setdefault(key, value)
    sidecar_path = path.with_suffix(".json")
    sidecar_path.write_text(json.dumps(sidecar, indent=2) + "\n", encoding="utf-8")
    return sidecar_path


def write_basis(out_dir, basis) -> tuple[Path, Path]:
    """Write basis columns as ``p.csv`` / ``p_prime.csv`` (one per degree)."""
    out_dir = Path(out_dir)
    p_path = out_dir / "p.csv"
    dp_path = out_dir / "p_prime.csv"
    degrees = range(basis.degree + 1)
    _write_csv(
        p_path,
        ["x"] + [f"p{i}" for i in degrees],
        np.column_stack([basis.grid.x_raw, basis.p]),
    )
    _write_csv(
        dp_path,
        ["x"] + [f"dp{i}" for i in degrees],
        np.column_stack([basis.grid.x_raw, basis.p_prime]),
    )
    return p_path, dp_path


def quality_to_dict(report: QualityReport, n: int, degree: int) -> dict:
    return {
        "n": int(n),
        "degree": int(degree),
        "eps_max": report.eps_max,
        "eps_frob": report.eps_frob,
        "eps_det": report.eps_det,
        "eps_cond": report.eps_cond,
        "eps_rank": report.eps_rank,
        "eta": {k: _jsonable(v) for k, v in report.eta.items()},
        "version": __version__,
    }


def write_quality(path, report: QualityReport, n: int, degree: int) -> Path:
    path = Path(path)
    payload = json.dumps(quality_to_dict(report, n, degree), indent=2)
    path.write_text(payload + "\n", encoding="utf-8")
    return path


def write_sweep(path, rows: list[SweepRow]) -> Path:
    """Write sweep rows under the fixed quality-table schema."""
    path = Path(path)
    out = []
    for row in rows:
        if row.report is None:
            eps = [""] * 5
            eta = [""] * 5
        else:
            rep = row.report
            eps = [rep.eps_max, rep.eps_frob, rep.eps_det, rep.eps_cond, rep.eps_rank]
            eta = [rep.eta[m] for m in ("max", "frob", "det", "cond", "rank")]
        out.append(
            [row.n, row.d, row.method]
            + [_fmt(v) for v in eps]
            + [_fmt(v) for v in eta]
            + [row.error or ""]
        )
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        writer.writerows(out)
    return path


def read_sweep(path) -> list[dict]:
    """Read a sweep table back into dicts (floats where possible)."""
    with Path(path).open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        rows = []
        for record in reader:
            parsed = {}
            for key, value in record.items():
                if key in ("n", "d", "eps_rank"):
                    parsed[key] = int(value) if value else None
                elif key in ("method", "error"):
                    parsed[key] = value
                else:
                    parsed[key] = float(value) if value else None
            rows.append(parsed)
        return rows


def montecarlo_to_dict(
    result: MonteCarloResult, spec: SyntheticSpec, degree: int
) -> dict:
    return {
        "function": spec.function,
        "coefficients": list(spec.coefficients) if spec.coefficients else None,
        "range": [spec.x_range[0], spec.x_range[1]],
        "n": spec.n,
        "degree": int(degree),
        "sigma_y": spec.sigma_y,
        "sigma_dy": spec.sigma_dy,
        "seed": result.seed,
        "n_iter": result.n_iter,
        "mean_std_ry": result.mean_std_ry,
        "mean_std_rdy": result.mean_std_rdy,
        "mean_std_noise_y": result.mean_std_noise_y,
        "mean_std_noise_dy": result.mean_std_noise_dy,
        "mean_std_err_y": result.mean_std_err_y,
        "mean_std_err_dy": result.mean_std_err_dy,
        "per_iteration": [[row[0], row[1]] for row in result.per_iteration.tolist()],
        "version": __version__,
    }


def write_montecarlo(path, result, spec, degree) -> Path:
    path = Path(path)
    payload = json.dumps(montecarlo_to_dict(result, spec, degree), indent=2)
    path.write_text(payload + "\n", encoding="utf-8")
    return path


def _write_csv(path: Path, header: list[str], table: np.ndarray):
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in np.atleast_2d(table):
            writer.writerow([_fmt(v) for v in row])


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _jsonable(value: float):
    # json.dumps rejects inf; keep the +inf sentinel as a string.
    if value == float("inf"):
        return "inf"
    if value == float("-inf"):
        return "-inf"
    return value
