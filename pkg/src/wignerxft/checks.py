"""End-to-end verification suite behind ``wignerxft verify`` and the acceptance tests.

Each check returns a :class:`CheckResult`; ``quick=True`` shrinks sample
counts and randomized grids for a fast smoke run and skips runtime budgets.
"""

from __future__ import annotations

import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import mpmath
import numpy as np

from .dynamics import CouplingModel, ProtocolSpec, forward_propagator
from .heat import (
    analytic_full_swap_pdf,
    characteristic_function_pdf,
    clausius_check,
    histogram,
    ks_distance,
    mgf_estimate,
    sample_heat,
    xft_fit,
)
from .limits import (
    classical_limit_sweep,
    delta_beta_classical,
    delta_beta_omega,
    equipartition_report,
    low_temperature_check,
)
from .quadrature import renyi_overlap_quadrature
from .states import OscillatorSpec, evolve_variance, nu_thermal, renyi_overlap, thermal_variance
from .symplectic import (
    TIME_REVERSAL,
    microreversibility_residual,
    propagator,
    symplectic_residual,
    williamson_eigenvalues,
)

SHOWCASE_SEED = 42
FULL_N = 1_000_000
QUICK_N = 200_000


@dataclass
class CheckResult:
    name: str
    passed: bool
    elapsed: float = 0.0
    budget: float | None = None
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = ", ".join(f"{k}={_fmt(v)}" for k, v in self.details.items())
        return f"[{status}] {self.name} ({self.elapsed:.2f}s) {extra}"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def showcase_protocol(hbar: float = 1.0) -> ProtocolSpec:
    """Resonant full swap: omega = 1, T_A = 2, T_B = 1, mixing angle pi/2."""
    return ProtocolSpec(
        OscillatorSpec(1.0, 2.0, hbar),
        OscillatorSpec(1.0, 1.0, hbar),
        CouplingModel("beam_splitter", 1.0),
        math.pi / 2,
    )


def random_generator(rng: np.random.Generator, *, t_symmetric: bool, low: float = -5.0, high: float = 5.0) -> np.ndarray:
    """Symmetric positive-definite generator with entries in ``[low, high]``.

    Positive-definite generators are bounded Hamiltonians, so their propagators
    stay O(1) for all times. The diagonal is shifted until the smallest
    eigenvalue is 0.1, then the matrix is rescaled back into the entry range.
    """
    g = rng.uniform(low, high, (4, 4))
    g = np.triu(g) + np.triu(g, 1).T
    if t_symmetric:
        g = g * (np.outer(np.diag(TIME_REVERSAL), np.diag(TIME_REVERSAL)) > 0)
    g = g + max(0.0, 0.1 - np.linalg.eigvalsh(g)[0]) * np.eye(4)
    return g * min(1.0, min(abs(low), abs(high)) / np.max(np.abs(g)))


def random_symplectic(rng: np.random.Generator) -> np.ndarray:
    g = rng.uniform(-1.0, 1.0, (4, 4))
    return propagator(g + g.T, rng.uniform(0.0, 1.0))


def random_physical_variance(rng: np.random.Generator) -> np.ndarray:
    nu = rng.uniform(0.5, 5.0, 2)
    return evolve_variance(np.diag([nu[0], nu[0], nu[1], nu[1]]), random_symplectic(rng))


def _timed(name: str, budget: float | None, quick: bool, fn: Callable[[], tuple[bool, dict]]) -> CheckResult:
    start = time.perf_counter()
    ok, details = fn()
    elapsed = time.perf_counter() - start
    if budget is not None and not quick and elapsed > budget:
        ok = False
        details["over_budget"] = True
    return CheckResult(name, bool(ok), elapsed, budget, details)


# ---------------------------------------------------------------- criteria


def check_symplectic_suite(quick: bool = False, seed: int = 1) -> CheckResult:
    n = 50 if quick else 200

    def run():
        rng = np.random.default_rng(seed)
        worst = dict(symplectic=0.0, det=0.0, group=0.0, micro=0.0)
        for i in range(n):
            t_sym = i % 2 == 0
            g = random_generator(rng, t_symmetric=t_sym)
            t = rng.uniform(0.0, 10.0)
            t1 = rng.uniform(0.0, t)
            s = propagator(g, t)
            worst["symplectic"] = max(worst["symplectic"], symplectic_residual(s))
            worst["det"] = max(worst["det"], abs(np.linalg.det(s) - 1.0))
            group = np.max(np.abs(propagator(g, t1) @ propagator(g, t - t1) - s))
            worst["group"] = max(worst["group"], group)
            if t_sym:
                worst["micro"] = max(worst["micro"], microreversibility_residual(s))
        ok = (
            worst["symplectic"] <= 1e-10
            and worst["det"] <= 1e-9
            and worst["group"] <= 1e-9
            and worst["micro"] <= 1e-9
        )
        return ok, {"generators": n, **{f"max_{k}": v for k, v in worst.items()}}

    return _timed("1 symplectic suite", 5.0, quick, run)


def check_williamson(quick: bool = False, seed: int = 2) -> CheckResult:
    n = 50 if quick else 200

    def run():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(n):
            v = random_physical_variance(rng)
            s = random_symplectic(rng)
            nu = np.array(williamson_eigenvalues(v))
            nu_s = np.array(williamson_eigenvalues(evolve_variance(v, s)))
            worst = max(worst, float(np.max(np.abs(nu_s - nu) / nu)))
        thermal_err = 0.0
        mpmath.mp.dps = 40
        for omega, temp, hbar in [(1.0, 2.0, 1.0), (1.0, 1.0, 1.0), (2.0, 0.3, 1.0), (0.7, 5.0, 0.01), (3.0, 0.1, 1.0)]:
            spec = OscillatorSpec(omega, temp, hbar)
            nu = williamson_eigenvalues(thermal_variance((spec, spec)))[0]
            exact = float(mpmath.coth(mpmath.mpf(hbar) * omega / (2 * mpmath.mpf(temp))) / 2)
            thermal_err = max(thermal_err, abs(nu - exact) / exact)
        ok = worst <= 1e-8 and thermal_err <= 1e-12
        return ok, {"pairs": n, "max_rel_change": worst, "thermal_rel_err": thermal_err}

    return _timed("2 Williamson invariance", 5.0, quick, run)


def check_quantum_xft(quick: bool = False) -> CheckResult:
    def run():
        p = showcase_protocol()
        target = delta_beta_omega(p.spec_a, p.spec_b, check=True).delta
        samples = sample_heat(p, QUICK_N if quick else FULL_N, SHOWCASE_SEED, threads=1)
        fit = xft_fit(histogram(samples))
        z = fit.z_score(target)
        rel = abs(fit.slope - target) / abs(target)
        ok = abs(z) <= 3.0 and (quick or rel <= 0.02)
        return ok, {
            "slope": fit.slope,
            "stderr": fit.slope_stderr,
            "target": target,
            "z": z,
            "rel_err": rel,
            "bins": fit.bins_used,
            "max_defect": samples.defect_stats()["max_abs"],
        }

    return _timed("3 quantum XFT slope", 60.0, quick, run)


def check_oracle_triangle(quick: bool = False) -> CheckResult:
    def run():
        p = showcase_protocol()
        samples = sample_heat(p, QUICK_N if quick else FULL_N, SHOWCASE_SEED)
        laplace = analytic_full_swap_pdf(p)
        grid = np.linspace(-60.0, 80.0, 28001)
        cf = characteristic_function_pdf(p, grid)
        ks_lap = ks_distance(samples, laplace.cdf)
        ks_cf = ks_distance(samples, cf.cdf)
        sup = float(np.max(np.abs(cf.density - laplace.pdf(grid))))
        ok = ks_lap <= 0.01 and ks_cf <= 0.02 and sup <= 1e-4
        return ok, {"ks_laplace": ks_lap, "ks_cf": ks_cf, "oracle_sup": sup, "cf_mass": cf.mass()}

    return _timed("4 oracle triangle", 90.0, quick, run)


def check_mgf(quick: bool = False) -> CheckResult:
    def run():
        p = showcase_protocol()
        db = delta_beta_omega(p.spec_a, p.spec_b).delta
        samples = sample_heat(p, QUICK_N if quick else FULL_N, SHOWCASE_SEED)
        v0 = thermal_variance((p.spec_a, p.spec_b))
        vt = evolve_variance(v0, forward_propagator(p))
        m1 = mgf_estimate(samples, db, 1.0)
        details = {"mgf_s1": m1.value, "z_s1": (m1.value - 1.0) / m1.stderr}
        ok = abs(m1.value - 1.0) <= 4.0 * m1.stderr
        worst_quad = 0.0
        for s in (0.25, 0.5, 0.75):
            closed = renyi_overlap(v0, vt, s)
            quad = renyi_overlap_quadrature(v0, vt, s)
            worst_quad = max(worst_quad, abs(quad - closed) / abs(closed))
            m = mgf_estimate(samples, db, s)
            z = (m.value - math.exp(closed)) / m.stderr
            details[f"z_s{s}"] = z
            ok = ok and abs(z) <= 3.0
        details["renyi_quad_rel"] = worst_quad
        ok = ok and worst_quad <= 1e-6
        return ok, details

    return _timed("5 MGF identity and Renyi link", 60.0, quick, run)


def clausius_configs(n: int, seed: int = 6) -> list[ProtocolSpec]:
    """Random exactly conserving protocols with beta_B_omega > beta_A_omega."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        omega = rng.uniform(0.5, 2.0)
        t_hot, t_cold = np.sort(rng.uniform(0.2, 5.0, 2))[::-1]
        hbar = rng.choice([0.1, 0.5, 1.0, 2.0])
        out.append(
            ProtocolSpec(
                OscillatorSpec(omega, float(t_hot), hbar),
                OscillatorSpec(omega, float(t_cold), hbar),
                CouplingModel("beam_splitter", 1.0),
                float(rng.uniform(0.3, math.pi / 2)),
            )
        )
    return out


def check_clausius(quick: bool = False) -> CheckResult:
    def run():
        n = QUICK_N if quick else FULL_N
        ok = True
        gated = 0
        worst_z = math.inf
        for i, p in enumerate(clausius_configs(3 if quick else 10)):
            db = delta_beta_omega(p.spec_a, p.spec_b).delta
            assert db > 0
            res = clausius_check(sample_heat(p, n, 100 + i), db)
            signal = p.spec_a.quantum * abs(nu_thermal(p.spec_a) - nu_thermal(p.spec_b))
            if signal > 10.0 * res.stderr:
                gated += 1
                worst_z = min(worst_z, res.mean_q / res.stderr)
                ok = ok and res.mean_q - 3.0 * res.stderr > 0 and res.sign_ok
        worst_eq = 0.0
        for i, (omega, temp) in enumerate([(1.0, 1.0), (0.6, 3.0), (1.7, 0.4)]):
            spec = OscillatorSpec(omega, temp, 1.0)
            p = ProtocolSpec(spec, spec, CouplingModel("beam_splitter", 1.0), 1.0)
            res = clausius_check(sample_heat(p, n, 200 + i), 0.0)
            worst_eq = max(worst_eq, abs(res.mean_q) / res.stderr)
            ok = ok and abs(res.mean_q) <= 3.0 * res.stderr
        return ok, {"gated": gated, "min_z_hot_to_cold": worst_z, "max_abs_z_equilibrium": worst_eq}

    return _timed("6 Clausius inequality", 120.0, quick, run)


def check_classical_limit(quick: bool = False) -> CheckResult:
    def run():
        spec_a = OscillatorSpec(1.0, 2.0, 1.0)
        spec_b = OscillatorSpec(1.0, 1.0, 1.0)
        report = classical_limit_sweep(spec_a, spec_b, [0.1, 0.05, 0.025, 0.0125])
        ratios_ok = bool(np.all(np.abs(report.error_ratios - 4.0) <= 0.4))
        p = showcase_protocol(hbar=1e-2)
        fit = xft_fit(histogram(sample_heat(p, QUICK_N if quick else FULL_N, SHOWCASE_SEED)))
        target = delta_beta_classical(2.0, 1.0)
        z = fit.z_score(target)
        ok = ratios_ok and abs(z) <= 3.0
        return ok, {
            "error_ratios": report.error_ratios.tolist(),
            "order": report.convergence_order_estimate,
            "mc_slope": fit.slope,
            "stderr": fit.slope_stderr,
            "z": z,
        }

    return _timed("7 classical limit", 120.0, quick, run)


def check_low_temperature(quick: bool = False) -> CheckResult:
    def run():
        value, limit, rel = low_temperature_check(2.0, 1.0, hbar=1.0, x=20.0)
        return rel <= 1e-6, {"delta_beta_omega": value, "limit": limit, "rel_err": rel}

    return _timed("8 low-temperature limit", 1.0, quick, run)


def check_equipartition(quick: bool = False) -> CheckResult:
    def run():
        near = equipartition_report(OscillatorSpec(1e-3, 1.0, 1.0)).ratio
        mpmath.mp.dps = 40
        coth1 = float(mpmath.coth(1))
        mid = equipartition_report(OscillatorSpec(2.0, 1.0, 1.0)).ratio
        ok = abs(near - 1.0) <= 1e-6 and abs(mid - coth1) <= 1e-12 * coth1
        return ok, {"ratio_classical": near, "ratio_x1": mid, "coth1": coth1}

    return _timed("9 equipartition deviation", 1.0, quick, run)


WEAK_COUPLING_LAMBDAS = (0.4, 0.2, 0.1, 0.05)


def weak_coupling_sweep(n: int, seed: int = SHOWCASE_SEED) -> dict:
    """Position-position coupling, omega_A = 1, omega_B = 1.5, T_A = 2, T_B = 1, tau = 5."""
    spec_a = OscillatorSpec(1.0, 2.0, 1.0)
    spec_b = OscillatorSpec(1.5, 1.0, 1.0)
    target = delta_beta_omega(spec_a, spec_b).delta
    defects, slope_errs, slopes, stderrs = [], [], [], []
    for lam in WEAK_COUPLING_LAMBDAS:
        p = ProtocolSpec(spec_a, spec_b, CouplingModel("position_position", lam * spec_a.omega), 5.0)
        samples = sample_heat(p, n, seed)
        fit = xft_fit(histogram(samples))
        defects.append(samples.defect_stats()["mean_abs"])
        slopes.append(fit.slope)
        stderrs.append(fit.slope_stderr)
        slope_errs.append(abs(fit.slope - target))
    return {"target": target, "mean_abs_defect": defects, "slopes": slopes, "slope_stderr": stderrs,
            "abs_slope_error": slope_errs}


def check_weak_coupling(quick: bool = False) -> list[CheckResult]:
    start = time.perf_counter()
    sweep = weak_coupling_sweep(QUICK_N if quick else FULL_N)
    elapsed = time.perf_counter() - start
    over = not quick and elapsed > 300.0
    d, e = sweep["mean_abs_defect"], sweep["abs_slope_error"]
    defect_ok = all(b < a for a, b in zip(d, d[1:])) and not over
    slope_ok = all(b < a for a, b in zip(e, e[1:])) and not over
    return [
        CheckResult("10a weak coupling: defect decreases", defect_ok, elapsed, 300.0,
                    {"mean_abs_defect": d}),
        CheckResult("10b weak coupling: |slope - dbeta_omega| decreases", slope_ok, elapsed, 300.0,
                    {"abs_slope_error": e, "slope_stderr": sweep["slope_stderr"], "target": sweep["target"]}),
    ]


def check_reproducibility(quick: bool = False) -> CheckResult:
    from .config import showcase_config
    from .runner import run_experiment

    def run():
        cfg = showcase_config(n_samples=QUICK_N if quick else FULL_N)
        with tempfile.TemporaryDirectory() as tmp:
            first = run_experiment(cfg, Path(tmp) / "a")
            second = run_experiment(cfg, Path(tmp) / "b")
            same = (Path(tmp) / "a" / "histogram.csv").read_bytes() == (Path(tmp) / "b" / "histogram.csv").read_bytes()
        return same and first.n_blocks == second.n_blocks, {"chunks": first.n_blocks, "identical": same}

    return _timed("11 reproducibility", None, quick, run)


def run_all(quick: bool = False) -> list[CheckResult]:
    results = [
        check_symplectic_suite(quick),
        check_williamson(quick),
        check_quantum_xft(quick),
        check_oracle_triangle(quick),
        check_mgf(quick),
        check_clausius(quick),
        check_classical_limit(quick),
        check_low_temperature(quick),
        check_equipartition(quick),
    ]
    results.extend(check_weak_coupling(quick))
    results.append(check_reproducibility(quick))
    return results
