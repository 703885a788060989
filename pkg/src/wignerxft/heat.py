"""Monte Carlo heat statistics and the exact oracles they are checked against.

Initial points are drawn from the thermal Wigner density, pushed through the
forward propagator, and the heat ``Q = H_B(xi_tau) - H_B(xi_0)`` is recorded
together with the energy defect ``dE_A + dE_B``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from . import rng
from .dynamics import ProtocolSpec, forward_propagator, heat_and_defect, propagate
from .errors import (
    HeavyTailWarning,
    InsufficientBinsError,
    InvalidInputError,
    NumericalDegeneracyError,
    PreconditionError,
    ResolutionError,
)
from .states import beta_omega, nu_thermal, thermal_variance, wigner_sample
from .symplectic import TIME_REVERSAL

MIN_PAIRED_BINS = 5
DEFAULT_HALF_BINS = 100
DEFAULT_RANGE_SIGMAS = 10.0
MGF_BATCHES = 100


# ---------------------------------------------------------------- sampling


@dataclass(frozen=True)
class HeatSamples:
    heat: np.ndarray
    defect: np.ndarray
    seed: int
    n_blocks: int
    stream: int = rng.FORWARD_STREAM

    def __len__(self) -> int:
        return self.heat.size

    def defect_stats(self) -> dict[str, float]:
        a = np.abs(self.defect)
        return {
            "mean_abs": float(a.mean()),
            "stderr_abs": float(a.std(ddof=1) / math.sqrt(a.size)) if a.size > 1 else 0.0,
            "max_abs": float(a.max()),
        }


def sample_heat(
    p: ProtocolSpec,
    n: int,
    seed: int,
    *,
    stream: int = rng.FORWARD_STREAM,
    threads: int | None = None,
) -> HeatSamples:
    """Draw ``n`` independent heat values for protocol ``p``.

    Deterministic in ``(seed, n, stream)``; the thread count only changes
    scheduling.
    """
    if n < 1:
        raise InvalidInputError(f"need at least one sample, got {n}")
    v = thermal_variance((p.spec_a, p.spec_b))
    s = forward_propagator(p)
    sizes = rng.block_sizes(n)

    def one_block(b: int):
        xi0 = wigner_sample(v, rng.block_generator(seed, b, stream), sizes[b])
        if stream == rng.REVERSE_STREAM:
            xi0 = xi0 @ TIME_REVERSAL
        return heat_and_defect(p, xi0, propagate(s, xi0))

    parts = rng.map_blocks(one_block, len(sizes), threads)
    return HeatSamples(
        heat=np.concatenate([q for q, _ in parts]),
        defect=np.concatenate([d for _, d in parts]),
        seed=seed,
        n_blocks=len(sizes),
        stream=stream,
    )


def sample_reverse_heat(p: ProtocolSpec, n: int, seed: int, *, threads: int | None = None) -> HeatSamples:
    """Heat of reverse realisations started from time-reversed thermal points.

    Uses a stream independent of the forward one, so its histogram is an
    independent estimate of the reverse-process heat distribution.
    """
    return sample_heat(p, n, seed, stream=rng.REVERSE_STREAM, threads=threads)


def mean_energy_defect(p: ProtocolSpec, n_samples: int, seed: int) -> tuple[float, float]:
    """Monte Carlo mean of ``|dE_A + dE_B|`` and its standard error."""
    if n_samples < 1000:
        raise InvalidInputError(f"n_samples must be >= 1000, got {n_samples}")
    stats = sample_heat(p, n_samples, seed).defect_stats()
    return stats["mean_abs"], stats["stderr_abs"]


def _heat_array(samples) -> np.ndarray:
    q = samples.heat if isinstance(samples, HeatSamples) else np.asarray(samples, dtype=float)
    q = np.ravel(q)
    if q.size == 0:
        raise InvalidInputError("empty sample set")
    return q


# ---------------------------------------------------------------- histograms


@dataclass(frozen=True)
class HeatHistogram:
    """Histogram on bins symmetric about zero.

    Bin ``i`` of the positive half covers ``[i w, (i+1) w)`` and its mirror
    covers ``(-(i+1) w, -i w]``, so ``+q`` and ``-q`` always land in paired
    bins. ``Q = 0`` is counted on the positive side.
    """

    bin_edges: np.ndarray
    counts: np.ndarray
    n_total: int
    outside: int = 0

    @property
    def bin_width(self) -> float:
        return float(self.bin_edges[1] - self.bin_edges[0])

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    @property
    def densities(self) -> np.ndarray:
        return self.counts / (self.n_total * self.bin_width)

    @property
    def n_half(self) -> int:
        return self.counts.size // 2

    def paired(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(Q centres > 0, counts at +Q, counts at -Q)``."""
        k = self.n_half
        return self.centers[k:], self.counts[k:], self.counts[:k][::-1]


def auto_binning(q: np.ndarray) -> tuple[float, float]:
    """Default ``(bin_width, half_range)``: +-10 sample standard deviations, 200 bins."""
    sd = float(np.std(q))
    if not sd > 0:
        half_range = max(1.0, 2.0 * float(np.max(np.abs(q))))
    else:
        half_range = DEFAULT_RANGE_SIGMAS * sd
    return half_range / DEFAULT_HALF_BINS, half_range


def histogram(samples, bin_width: float | None = None, half_range: float | None = None) -> HeatHistogram:
    """Bin heat samples on ``[-half_range, half_range]`` with width ``bin_width``.

    ``half_range`` is rounded up to a whole number of bins. Missing arguments
    fall back to :func:`auto_binning`.
    """
    q = _heat_array(samples)
    if bin_width is None or half_range is None:
        auto_w, auto_r = auto_binning(q[np.isfinite(q)])
    w = auto_w if bin_width is None else float(bin_width)
    r = auto_r if half_range is None else float(half_range)
    if not w > 0:
        raise InvalidInputError(f"bin_width must be positive, got {bin_width}")
    if not r > 0:
        raise InvalidInputError(f"range must be positive, got {half_range}")
    k = max(1, math.ceil(r / w - 1e-9))
    edges = w * np.arange(-k, k + 1, dtype=float)

    mag = np.floor(np.abs(q) / w)
    idx = np.where(q >= 0, k + mag, k - 1 - mag)
    inside = (mag < k) & np.isfinite(q)
    counts = np.bincount(idx[inside].astype(np.int64), minlength=2 * k)
    return HeatHistogram(edges, counts, n_total=q.size, outside=int(q.size - inside.sum()))


# ---------------------------------------------------------------- XFT fit


@dataclass(frozen=True)
class XftFit:
    slope: float
    intercept: float
    slope_stderr: float
    intercept_stderr: float
    bins_used: int
    chi2: float

    def z_score(self, target: float) -> float:
        return (self.slope - target) / self.slope_stderr


def log_ratio_table(h: HeatHistogram, min_count: int = 25):
    """Per paired bin: ``Q``, ``ln(n+/n-)``, its Poisson error, and a usable mask."""
    qc, n_plus, n_minus = h.paired()
    ok = (n_plus >= min_count) & (n_minus >= min_count) & (qc > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        y = np.log(n_plus / n_minus)
        err = np.sqrt(1.0 / n_plus + 1.0 / n_minus)
    return qc, y, err, ok


def xft_fit(h: HeatHistogram, min_count: int = 25) -> XftFit:
    """Weighted least-squares line through ``ln(n(Q) / n(-Q))`` versus ``Q``.

    Raises:
        InsufficientBinsError: fewer than five bin pairs have ``min_count``
            entries on both sides.
    """
    qc, y, err, ok = log_ratio_table(h, min_count)
    n_ok = int(ok.sum())
    if n_ok < MIN_PAIRED_BINS:
        raise InsufficientBinsError(n_ok, MIN_PAIRED_BINS)
    x, y, w = qc[ok], y[ok], 1.0 / err[ok] ** 2
    design = np.column_stack([np.ones_like(x), x])
    cov = np.linalg.inv(design.T @ (design * w[:, None]))
    coef = cov @ (design.T @ (w * y))
    resid = y - design @ coef
    return XftFit(
        slope=float(coef[1]),
        intercept=float(coef[0]),
        slope_stderr=float(math.sqrt(cov[1, 1])),
        intercept_stderr=float(math.sqrt(cov[0, 0])),
        bins_used=n_ok,
        chi2=float(np.sum(w * resid**2)),
    )


def delta_beta(p: ProtocolSpec) -> float:
    return beta_omega(p.spec_b) - beta_omega(p.spec_a)


# ---------------------------------------------------------------- oracles


def is_full_swap(p: ProtocolSpec, tol: float = 1e-9) -> bool:
    if p.coupling.kind != "beam_splitter" or not p.is_resonant:
        return False
    k = p.mixing_angle / math.pi - 0.5
    return abs(k - round(k)) <= tol


@dataclass(frozen=True)
class AsymmetricLaplace:
    """Heat law of a resonant full swap: ``Q = X_A - X_B`` with exponential ``X``.

    ``rate_pos`` and ``rate_neg`` are the inverse mean energies of A and B.
    """

    rate_pos: float
    rate_neg: float

    @property
    def norm(self) -> float:
        a, b = self.rate_pos, self.rate_neg
        return a * b / (a + b)

    @property
    def mean(self) -> float:
        return 1.0 / self.rate_pos - 1.0 / self.rate_neg

    def pdf(self, q):
        q = np.asarray(q, dtype=float)
        return self.norm * np.where(q >= 0, np.exp(-self.rate_pos * np.abs(q)), np.exp(-self.rate_neg * np.abs(q)))

    def cdf(self, q):
        q = np.asarray(q, dtype=float)
        a, b = self.rate_pos, self.rate_neg
        below = a / (a + b) * np.exp(-b * np.abs(q))
        above = 1.0 - b / (a + b) * np.exp(-a * np.abs(q))
        return np.where(q < 0, below, above)

    __call__ = pdf


def analytic_full_swap_pdf(p: ProtocolSpec) -> AsymmetricLaplace:
    """Exact heat density for a resonant beam splitter at a full-swap mixing angle."""
    if not is_full_swap(p):
        raise PreconditionError(
            "analytic oracle needs a resonant beam splitter with mixing angle pi/2 (mod pi)"
        )
    a = 1.0 / (p.spec_a.quantum * nu_thermal(p.spec_a))
    b = 1.0 / (p.spec_b.quantum * nu_thermal(p.spec_b))
    return AsymmetricLaplace(a, b)


def heat_quadratic_form(p: ProtocolSpec) -> np.ndarray:
    """``M`` with ``Q(xi0) = xi0^T M xi0 / 2``."""
    s = forward_propagator(p)
    proj_b = np.diag([0.0, 0.0, 1.0, 1.0])
    m = p.spec_b.quantum * (s.T @ proj_b @ s - proj_b)
    return 0.5 * (m + m.T)


def heat_eigenvalues(p: ProtocolSpec) -> np.ndarray:
    """Eigenvalues ``l_k`` such that ``Q = sum_k l_k z_k^2 / 2`` with ``z`` standard normal."""
    chol = np.linalg.cholesky(thermal_variance((p.spec_a, p.spec_b)))
    return np.linalg.eigvalsh(chol.T @ heat_quadratic_form(p) @ chol)


def characteristic_function(eigenvalues, u) -> np.ndarray:
    """``E exp(i u Q) = prod_k (1 - i u l_k)^(-1/2)``."""
    u = np.asarray(u, dtype=float)
    log_phi = np.zeros(u.shape, dtype=complex)
    for lam in eigenvalues:
        log_phi -= 0.5 * np.log(1.0 - 1j * lam * u)
    return np.exp(log_phi)


@dataclass(frozen=True)
class TabulatedDensity:
    grid: np.ndarray
    density: np.ndarray
    u_max: float = 0.0
    du: float = 0.0
    tail_bound: float = 0.0
    extras: dict = field(default_factory=dict)

    def cdf(self, q):
        """Cumulative trapezoid integral of the tabulated density, interpolated at ``q``."""
        g, d = self.grid, self.density
        c = np.concatenate([[0.0], np.cumsum(0.5 * (d[1:] + d[:-1]) * np.diff(g))])
        return np.interp(q, g, c)

    def mass(self) -> float:
        return float(np.trapezoid(self.density, self.grid))


def _cutoff(abs_lams: np.ndarray, phi_floor: float, tail_tol: float) -> float:
    """Frequency beyond which ``|phi|`` is below ``phi_floor`` or the tail integral below ``tail_tol``."""

    def log_abs_phi(u):
        return -0.25 * np.sum(np.log1p((u * abs_lams) ** 2))

    target = math.log(phi_floor)
    hi = 1.0 / abs_lams.max()
    while log_abs_phi(hi) > target:
        hi *= 2.0
    u_floor = scipy.optimize.brentq(lambda u: log_abs_phi(u) - target, 0.0, hi)

    # |phi(u)| <= C u^(-r/2); the tail integral is finite for r > 2.
    r = abs_lams.size
    if r > 2:
        c = 1.0 / math.prod(math.sqrt(x) for x in abs_lams)
        u_tail = (c / (math.pi * tail_tol * (r / 2 - 1))) ** (1.0 / (r / 2 - 1))
        return min(u_floor, u_tail)
    return u_floor


def _tail_bound(abs_lams: np.ndarray, u_max: float) -> float:
    r = abs_lams.size
    if r <= 2:
        return math.inf
    c = 1.0 / math.prod(math.sqrt(x) for x in abs_lams)
    return c * u_max ** (1 - r / 2) / (math.pi * (r / 2 - 1))


def characteristic_function_pdf(
    p: ProtocolSpec,
    grid,
    *,
    du: float | None = None,
    u_max: float | None = None,
    tail_tol: float = 1e-6,
    max_points: int = 1 << 23,
) -> TabulatedDensity:
    """Heat density by Fourier inversion of the Gaussian characteristic function.

    The inversion integral ``p(Q) = (1/pi) int_0^U Re[exp(-iuQ) phi(u)] du`` is
    evaluated with the trapezoid rule through one FFT and interpolated onto
    ``grid``. ``U`` defaults to where ``|phi| < 1e-12`` or the analytic tail
    bound drops below ``tail_tol``, whichever comes first; ``du`` defaults to a
    step whose alias period clears the heat tails.

    Raises:
        ResolutionError: if the inverted density dips below ``-1e-6``.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise InvalidInputError("grid must be a strictly increasing 1-D array")
    lams = heat_eigenvalues(p)
    scale = max(np.max(np.abs(lams)), p.spec_b.quantum)
    lams = lams[np.abs(lams) > 1e-12 * scale]

    if lams.size == 0:
        # Q vanishes identically: all mass in the cell nearest zero.
        density = np.zeros_like(grid)
        i = int(np.argmin(np.abs(grid)))
        cell = 0.5 * (grid[min(i + 1, grid.size - 1)] - grid[max(i - 1, 0)])
        density[i] = 1.0 / cell
        return TabulatedDensity(grid, density)

    abs_lams = np.abs(lams)
    mean = 0.5 * float(np.sum(lams))
    span = float(np.max(np.abs(grid)))
    if du is None:
        period = 2.0 * (span + abs(mean) + 40.0 * abs_lams.max())
        du = 2.0 * math.pi / period
    if u_max is None:
        u_max = _cutoff(abs_lams, 1e-12, tail_tol)
    n = 1 << max(10, math.ceil(math.log2(u_max / du)))
    if n > max_points:
        n = max_points
    u_max = n * du

    u = du * np.arange(n)
    phi = characteristic_function(lams, u)
    dq = 2.0 * math.pi / (n * du)
    q0 = -0.5 * n * dq
    weights = phi * np.exp(-1j * u * q0)
    weights[0] *= 0.5
    dens_fft = (du / math.pi) * np.fft.fft(weights).real
    q_fft = q0 + dq * np.arange(n)
    density = np.interp(grid, q_fft, dens_fft)

    if np.min(density) < -1e-6:
        raise ResolutionError(
            f"inverted density reaches {np.min(density):.3g}; refine du or raise u_max"
        )
    return TabulatedDensity(
        grid, density, u_max=u_max, du=du, tail_bound=_tail_bound(abs_lams, u_max)
    )


def ks_distance(samples, cdf) -> float:
    """Kolmogorov-Smirnov distance between the empirical law of ``samples`` and ``cdf``."""
    q = np.sort(_heat_array(samples))
    n = q.size
    f = np.asarray(cdf(q), dtype=float)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(n) / n
    return float(max(upper.max(), lower.max()))


# ---------------------------------------------------------------- MGF, Clausius


@dataclass(frozen=True)
class MgfEstimate:
    s: float
    value: float
    stderr: float
    trimmed_fraction: float = 0.0


def _batch_stderr(x: np.ndarray, batches: int = MGF_BATCHES) -> float:
    if x.size < 2 * batches:
        return float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    means = np.array([b.mean() for b in np.array_split(x, batches)])
    return float(means.std(ddof=1) / math.sqrt(batches))


def mgf_estimate(samples, delta_beta_omega: float, s: float) -> MgfEstimate:
    """Sample mean of ``exp(-s dbeta Q)`` with a 100-batch-means standard error.

    Samples whose exponent would overflow are dropped with a
    :class:`HeavyTailWarning` that reports the trimmed fraction.
    """
    q = _heat_array(samples)
    if s == 0 or delta_beta_omega == 0:
        return MgfEstimate(s, 1.0, 0.0)
    expo = -s * delta_beta_omega * q
    keep = expo < np.log(np.finfo(float).max) - math.log(q.size)
    trimmed = 1.0 - keep.mean()
    if trimmed > 0:
        warnings.warn(
            f"exp(-s dbeta Q) overflows for {trimmed:.3g} of the samples at s={s}; trimmed",
            HeavyTailWarning,
            stacklevel=2,
        )
        expo = expo[keep]
    x = np.exp(expo)
    return MgfEstimate(s, float(x.mean()), _batch_stderr(x), float(trimmed))


@dataclass(frozen=True)
class ClausiusResult:
    mean_q: float
    stderr: float
    sign_ok: bool


def clausius_check(samples, delta_beta_omega: float, n_sigma: float = 3.0) -> ClausiusResult:
    """Check ``dbeta <Q> >= 0`` to within ``n_sigma`` standard errors."""
    q = _heat_array(samples)
    mean = float(q.mean())
    se = float(q.std(ddof=1) / math.sqrt(q.size)) if q.size > 1 else 0.0
    ok = delta_beta_omega * mean >= -n_sigma * se * abs(delta_beta_omega)
    return ClausiusResult(mean, se, bool(ok))


def reverse_consistency(
    h_forward: HeatHistogram, h_reverse: HeatHistogram, delta_beta_omega: float, min_count: int = 25
) -> np.ndarray:
    """Per-bin z-scores of ``n_fwd(Q) - exp(dbeta Q) n_rev(-Q)`` on the positive half."""
    if h_forward.counts.shape != h_reverse.counts.shape:
        raise InvalidInputError("histograms must share the same binning")
    qc, n_fwd, _ = h_forward.paired()
    _, _, n_rev_neg = h_reverse.paired()
    ok = (n_fwd >= min_count) & (n_rev_neg >= min_count)
    if not ok.any():
        raise NumericalDegeneracyError("no populated bins to compare")
    factor = np.exp(delta_beta_omega * qc)
    scale = h_forward.n_total / h_reverse.n_total
    pred = factor * n_rev_neg * scale
    var = n_fwd + factor**2 * n_rev_neg * scale**2
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (n_fwd - pred) / np.sqrt(var)
    return z[ok]
