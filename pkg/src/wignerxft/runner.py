"""Experiment orchestration and result files.

``run_experiment`` writes into its output directory::

    heat_samples.json   summary statistics of the forward heat samples
    histogram.csv       Q_center,density,count,density_reversed,log_ratio,log_ratio_err
    xft_fit.json        fitted slope against the dbeta_omega target
    mgf.json            moment generating function per s with the Renyi prediction
    clausius.json       <Q> and the sign check
    manifest.json       config echo, seeds, chunk count, summaries
"""

from __future__ import annotations

import csv
import json
import math
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, rng
from .config import ConfigError, ExperimentConfig, config_from_dict
from .errors import DivergenceUndefinedError, InsufficientBinsError, XftError
from .heat import (
    analytic_full_swap_pdf,
    characteristic_function_pdf,
    clausius_check,
    histogram,
    is_full_swap,
    log_ratio_table,
    mgf_estimate,
    sample_heat,
    sample_reverse_heat,
    xft_fit,
)
from .limits import classical_limit_sweep, delta_beta_classical, delta_beta_omega
from .states import evolve_variance, renyi_overlap, thermal_variance
from .dynamics import forward_propagator

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3
EXIT_CHECK_FAILED = 4

PLOT_KINDS = ("xft_ratio", "heat_pdf", "mgf_vs_s", "classical_limit")


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int
    n_blocks: int
    wall_clock: float
    results: dict = field(default_factory=dict)
    defect: dict = field(default_factory=dict)
    files: dict = field(default_factory=dict)
    status: str = "ok"
    exit_code: int = EXIT_OK

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "software": {
                "name": "wignerxft",
                "version": __version__,
                "numpy": np.__version__,
                "python": platform.python_version(),
            },
            "config": self.config,
            "seed": self.seed,
            "chunk_count": self.n_blocks,
            "block_size": rng.BLOCK_SIZE,
            "wall_clock_seconds": self.wall_clock,
            "results": self.results,
            "defect": self.defect,
            "files": self.files,
            "status": self.status,
            "exit_code": self.exit_code,
        }


# ---------------------------------------------------------------- file helpers


def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return _clean(obj.item())
    return obj


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _num(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_num(v) for v in row])


def read_csv(path: Path) -> dict[str, np.ndarray]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(v) for v in row] for row in reader], dtype=float)
    if data.size == 0:
        return {h: np.array([]) for h in header}
    return {h: data[:, i] for i, h in enumerate(header)}


# ---------------------------------------------------------------- simulate


def _histogram_rows(h, h_rev):
    _, y, err, usable = log_ratio_table(h, min_count=1)
    k = h.n_half
    log_ratio = np.full(h.counts.size, math.nan)
    log_err = np.full(h.counts.size, math.nan)
    log_ratio[k:][usable] = y[usable]
    log_err[k:][usable] = err[usable]
    # reverse-run estimate of p(-Q) at each bin centre Q
    density_reversed = h_rev.densities[::-1]
    return zip(h.centers, h.densities, h.counts, density_reversed, log_ratio, log_err)


def run_experiment(cfg: ExperimentConfig, out_dir=None, *, threads: int | None = None) -> RunManifest:
    """Simulate one protocol and write every result file; returns the manifest."""
    start = time.perf_counter()
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    p = cfg.protocol()
    dbo = delta_beta_omega(p.spec_a, p.spec_b)
    db = dbo.delta

    samples = sample_heat(p, cfg.n_samples, cfg.seed, threads=threads)
    reverse = sample_reverse_heat(p, cfg.n_samples, cfg.seed, threads=threads)
    q = samples.heat
    defect = samples.defect_stats()
    gated = p.conserves_energy and p.coupling.strength > 0
    checks: dict[str, bool] = {}
    status, code = "ok", EXIT_OK

    write_json(out / "heat_samples.json", {
        "n": int(q.size),
        "mean": float(q.mean()),
        "std": float(q.std(ddof=1)),
        "min": float(q.min()),
        "max": float(q.max()),
        "quantiles": dict(zip(["p01", "p25", "p50", "p75", "p99"], np.quantile(q, [0.01, 0.25, 0.5, 0.75, 0.99]).tolist())),
        "defect": defect,
        "chunk_count": samples.n_blocks,
        "seed": cfg.seed,
    })

    h = histogram(samples, cfg.histogram.bin_width, cfg.histogram.half_range)
    h_rev = histogram(reverse, h.bin_width, h.bin_edges[-1])
    write_csv(
        out / "histogram.csv",
        ["Q_center", "density", "count", "density_reversed", "log_ratio", "log_ratio_err"],
        _histogram_rows(h, h_rev),
    )

    xft = {"delta_beta_omega": db, "beta_A_omega": dbo.beta_a_omega, "beta_B_omega": dbo.beta_b_omega,
           "delta_beta_classical": delta_beta_classical(p.spec_a.temperature, p.spec_b.temperature),
           "defect": defect, "exact_conservation": gated, "bin_width": h.bin_width, "outside_range": h.outside}
    try:
        fit = xft_fit(h, cfg.histogram.min_count)
    except InsufficientBinsError as exc:
        xft.update(error=str(exc), category="numerical_degeneracy", paired_bins=exc.n_pairs)
        status, code = "degenerate", EXIT_DEGENERATE
    else:
        z = fit.z_score(db)
        xft.update(slope=fit.slope, stderr=fit.slope_stderr, intercept=fit.intercept,
                   intercept_stderr=fit.intercept_stderr, bins_used=fit.bins_used, chi2=fit.chi2,
                   z_score=z, relative_error=abs(fit.slope - db) / abs(db) if db else None)
        if gated:
            checks["xft_slope_3sigma"] = abs(z) <= 3.0
    write_json(out / "xft_fit.json", xft)

    v0 = thermal_variance((p.spec_a, p.spec_b))
    vt = evolve_variance(v0, forward_propagator(p))
    mgf_rows = []
    for s in cfg.s_values:
        m = mgf_estimate(samples, db, s)
        row = {"s": s, "estimate": m.value, "stderr": m.stderr, "trimmed_fraction": m.trimmed_fraction}
        try:
            log_overlap = renyi_overlap(v0, vt, s)
        except DivergenceUndefinedError as exc:
            row.update(renyi_prediction=None, renyi_divergence=None, renyi_note=str(exc))
        else:
            row["renyi_prediction"] = math.exp(log_overlap)
            row["renyi_divergence"] = log_overlap / (1.0 - s) if s != 1 else 0.0
            if m.stderr > 0:
                row["z_score"] = (m.value - row["renyi_prediction"]) / m.stderr
            if gated and m.stderr > 0:
                limit = 4.0 if s == 1 else 3.0
                checks[f"mgf_s{s:g}"] = abs(row["z_score"]) <= limit
        mgf_rows.append(row)
    write_json(out / "mgf.json", {"delta_beta_omega": db, "exact_conservation": gated, "values": mgf_rows})

    cl = clausius_check(samples, db)
    write_json(out / "clausius.json", {"mean_Q": cl.mean_q, "stderr": cl.stderr, "sign_ok": cl.sign_ok,
                                       "delta_beta_omega": db, "product": db * cl.mean_q})
    if gated:
        checks["clausius"] = cl.sign_ok

    if code == EXIT_OK and not all(checks.values()):
        status, code = "check_failed", EXIT_CHECK_FAILED

    files = {k: f"{k}" for k in ("heat_samples.json", "histogram.csv", "xft_fit.json", "mgf.json", "clausius.json")}
    manifest = RunManifest(
        command="simulate",
        config=cfg.to_dict(),
        seed=cfg.seed,
        n_blocks=samples.n_blocks,
        wall_clock=time.perf_counter() - start,
        results={"xft": {k: xft.get(k) for k in ("slope", "stderr", "delta_beta_omega", "z_score")},
                 "mgf": {str(r["s"]): r["estimate"] for r in mgf_rows},
                 "clausius": {"mean_Q": cl.mean_q, "stderr": cl.stderr, "sign_ok": cl.sign_ok},
                 "checks": checks},
        defect=defect,
        files=files,
        status=status,
        exit_code=code,
    )
    write_json(out / "manifest.json", manifest.to_dict())
    return manifest


# ---------------------------------------------------------------- sweeps


def _mc_slope(p, cfg: ExperimentConfig, threads):
    samples = sample_heat(p, cfg.n_samples, cfg.seed, threads=threads)
    try:
        fit = xft_fit(histogram(samples, cfg.histogram.bin_width, cfg.histogram.half_range), cfg.histogram.min_count)
    except InsufficientBinsError:
        return samples, math.nan, math.nan
    return samples, fit.slope, fit.slope_stderr


def run_sweep(cfg: ExperimentConfig, axis: str, out_dir=None, *, threads: int | None = None) -> RunManifest:
    """Sweep ``hbar`` (classical limit) or the coupling strength (weak coupling)."""
    start = time.perf_counter()
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    results: dict = {"axis": axis}
    n_blocks = len(rng.block_sizes(cfg.n_samples))

    if axis == "hbar":
        values = sorted(cfg.sweep.hbar, reverse=True)
        if len(values) < 3:
            raise ConfigError("missing_key", "sweep.hbar", "need at least three hbar values for a sweep")
        p0 = cfg.protocol()
        try:
            report = classical_limit_sweep(p0.spec_a, p0.spec_b, values)
        except XftError as exc:
            raise ConfigError("invalid_value", "sweep.hbar", str(exc)) from None
        rows = []
        for hb, dbo, err in zip(report.hbar_values, report.delta_beta_omega, report.delta_beta_errors):
            _, slope, se = _mc_slope(cfg.protocol(hbar=float(hb)), cfg, threads)
            rows.append((hb, dbo, report.delta_beta, err, slope, se, abs(slope - dbo)))
        write_csv(out / "limit_sweep.csv",
                  ["hbar", "delta_beta_omega", "delta_beta", "abs_error", "mc_slope", "mc_slope_stderr", "mc_abs_error"],
                  rows)
        monotone = bool(np.all(np.diff(report.delta_beta_errors) < 0))
        results.update(convergence_order=report.convergence_order_estimate,
                       error_ratios=report.error_ratios.tolist(), monotone_errors=monotone)
        files = {"limit_sweep.csv": "limit_sweep.csv"}
        code = EXIT_OK if monotone else EXIT_CHECK_FAILED
    elif axis == "lambda":
        values = list(cfg.sweep.strength)
        if len(values) < 2:
            raise ConfigError("missing_key", "sweep.lambda", "need at least two coupling strengths for a sweep")
        rows = []
        for lam in values:
            p = cfg.protocol(strength=lam)
            db = delta_beta_omega(p.spec_a, p.spec_b).delta
            samples, slope, se = _mc_slope(p, cfg, threads)
            d = samples.defect_stats()
            rows.append((lam, d["mean_abs"], d["stderr_abs"], slope, se, db, abs(slope - db)))
        write_csv(out / "lambda_sweep.csv",
                  ["lambda", "mean_abs_defect", "defect_stderr", "mc_slope", "mc_slope_stderr",
                   "delta_beta_omega", "abs_slope_error"], rows)
        files = {"lambda_sweep.csv": "lambda_sweep.csv"}
        code = EXIT_OK
    else:
        raise ConfigError("invalid_value", "axis", f"{axis!r}; valid axes: hbar, lambda")

    manifest = RunManifest(
        command=f"sweep:{axis}",
        config=cfg.to_dict(),
        seed=cfg.seed,
        n_blocks=n_blocks,
        wall_clock=time.perf_counter() - start,
        results=results,
        files=files,
        status="ok" if code == EXIT_OK else "check_failed",
        exit_code=code,
    )
    write_json(out / "manifest.json", manifest.to_dict())
    return manifest


# ---------------------------------------------------------------- plot data


def load_manifest(path) -> tuple[dict, Path]:
    path = Path(path)
    return json.loads(path.read_text(encoding="utf-8")), path.parent


def _write_columns(path: Path, header: list[str], columns, comments=()) -> None:
    lines = [f"# {c}" for c in comments]
    lines.append("# " + " ".join(header))
    for row in zip(*columns):
        lines.append(" ".join(_num(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def emit_plot_data(manifest_path, kind: str, out_dir=None) -> Path:
    """Write ``plot_<kind>.dat``: whitespace-delimited columns with ``#`` headers."""
    if kind not in PLOT_KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; valid kinds: {', '.join(PLOT_KINDS)}")
    manifest, run_dir = load_manifest(manifest_path)
    out = Path(out_dir) if out_dir is not None else run_dir
    out.mkdir(parents=True, exist_ok=True)
    target = out / f"plot_{kind}.dat"
    cfg = config_from_dict(manifest["config"])
    files = manifest.get("files", {})

    if kind == "classical_limit":
        if "limit_sweep.csv" in files:
            table = read_csv(run_dir / files["limit_sweep.csv"])
            h, err = table["hbar"], table["abs_error"]
        else:
            p = cfg.protocol()
            h = cfg.hbar * 0.5 ** np.arange(8)
            err = classical_limit_sweep(p.spec_a, p.spec_b, h).delta_beta_errors
        x, y = np.log10(h), np.log10(err)
        order = float(np.polyfit(x, y, 1)[0])
        _write_columns(target, ["log10_hbar", "log10_abs_error", "err"], [x, y, np.zeros_like(x)],
                       [f"log-log slope {order!r}"])
        return target

    if "histogram.csv" not in files:
        raise ValueError(f"plot kind {kind!r} needs a simulate manifest")

    if kind == "mgf_vs_s":
        data = json.loads((run_dir / files["mgf.json"]).read_text(encoding="utf-8"))["values"]
        pred = [r["renyi_prediction"] if r["renyi_prediction"] is not None else math.nan for r in data]
        _write_columns(target, ["s", "mgf", "stderr", "renyi_prediction"],
                       [[r["s"] for r in data], [r["estimate"] for r in data], [r["stderr"] for r in data], pred])
        return target

    table = read_csv(run_dir / files["histogram.csv"])
    qc = table["Q_center"]
    if kind == "xft_ratio":
        fit = json.loads((run_dir / files["xft_fit.json"]).read_text(encoding="utf-8"))
        keep = np.isfinite(table["log_ratio"]) & (table["count"] >= cfg.histogram.min_count)
        comments = [f"delta_beta_omega {fit['delta_beta_omega']!r}"]
        if fit.get("slope") is not None:
            comments.append(f"fit: log_ratio = {fit['intercept']!r} + {fit['slope']!r} * Q")
        _write_columns(target, ["Q", "log_ratio", "err"],
                       [qc[keep], table["log_ratio"][keep], table["log_ratio_err"][keep]], comments)
        return target

    # heat_pdf
    n = cfg.n_samples
    width = float(qc[1] - qc[0]) if qc.size > 1 else 1.0
    columns = [qc, table["density"], np.sqrt(table["count"]) / (n * width)]
    header = ["Q", "density_mc", "err"]
    p = cfg.protocol()
    if p.coupling.strength > 0:
        cf = characteristic_function_pdf(p, qc)
        columns.append(cf.density)
        header.append("cf_inversion")
    if is_full_swap(p):
        columns.append(analytic_full_swap_pdf(p).pdf(qc))
        header.append("analytic_laplace")
    _write_columns(target, header, columns)
    return target
