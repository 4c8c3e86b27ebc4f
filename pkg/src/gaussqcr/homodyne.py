"""Monte Carlo balanced homodyne detection and the calibrated theta estimator."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ZeroDetectionMode
from .fisher import report_from_bundle
from .gaussian import GaussianState
from .models import DEFAULT_STEP, ParametricFamily, differentiate
from .modes import ComplexField, Grid, inner_product

DEFAULT_LO_PHOTONS = 1e8


@dataclass(frozen=True, eq=False)
class HomodyneConfig:
    """Local oscillator settings; ``lo_mode=None`` means the detection mode."""

    lo_mode: ComplexField | None = None
    lo_photons: float = DEFAULT_LO_PHOTONS
    lo_phase: float = 0.0
    samples: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.lo_mode is not None and abs(self.lo_mode.norm() - 1.0) > 1e-8:
            raise ValueError("local oscillator mode must have unit norm")
        if not self.lo_photons > 0:
            raise ValueError("lo_photons must be positive")
        if int(self.samples) < 1:
            raise ValueError("samples must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


def stream(seed: int, index: int) -> np.random.Generator:
    """Independent counter-based generator for block ``index`` of run ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(index),))))


def homodyne_mean(mean_field: ComplexField, lo_mode: ComplexField, lo_photons: float, lo_phase: float = 0.0) -> float:
    """``2 sqrt(N_LO) Re(exp(-i phase) <lo, a_bar>)``."""
    return 2.0 * math.sqrt(lo_photons) * (np.exp(-1j * lo_phase) * inner_product(lo_mode, mean_field)).real


def quadrature_moments(state: GaussianState, lo_phase: float = 0.0, mode: int = 0) -> tuple[float, float]:
    """Mean and variance of ``cos(phase) x + sin(phase) p`` of one mode."""
    m = state.mode_count
    vec = np.zeros(2 * m)
    vec[mode] = math.cos(lo_phase)
    vec[m + mode] = math.sin(lo_phase)
    return float(vec @ state.mean), float(vec @ state.cov @ vec)


def sample_homodyne(state: GaussianState, cfg: HomodyneConfig, count: int, rng: np.random.Generator) -> np.ndarray:
    """Homodyne outcomes for mode 0 of ``state`` (the LO mode must be mode 0 of its basis).

    Draws from ``Normal(sqrt(N_LO) mean, N_LO var)`` of the LO-phase quadrature.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    mu, var = quadrature_moments(state, cfg.lo_phase)
    scale = math.sqrt(cfg.lo_photons)
    return scale * mu + scale * math.sqrt(var) * rng.standard_normal(count)


@dataclass(frozen=True)
class ExperimentReport:
    """Outcome of a simulated estimation run.

    Per-sample quantities refer to a single homodyne shot; ``*_total`` values
    are for all ``total_samples`` shots pooled.  When the LO has no first-order
    sensitivity to theta, ``sensitive`` is False and every spread is ``inf``.
    """

    theta_true: float
    mean: float
    std: float
    stderr: float
    bias: float
    d_zero: float
    slope: float
    empirical_delta_theta: float
    qcr_delta_theta: float
    ratio: float
    std_stderr: float
    block_delta_theta: float | None
    empirical_delta_theta_total: float
    qcr_delta_theta_total: float
    total_samples: int
    repetitions: int
    samples: int
    sensitive: bool
    lo_photons: float
    lo_phase: float

    def to_dict(self) -> dict:
        return asdict(self)

    def within_bias(self, k: float = 3.0) -> bool:
        return abs(self.bias) <= k * self.stderr

    def respects_bound(self, k: float = 3.0) -> bool:
        return self.ratio >= 1.0 - k * self.std_stderr


@dataclass(frozen=True)
class _Block:
    n: int
    mean: float
    m2: float


def _combine(blocks):
    # Chan et al. parallel update, applied in block order
    n, mean, m2 = 0, 0.0, 0.0
    for b in blocks:
        tot = n + b.n
        delta = b.mean - mean
        mean = mean + delta * b.n / tot
        m2 = m2 + b.m2 + delta**2 * n * b.n / tot
        n = tot
    return n, mean, m2


def run_experiment(
    family: ParametricFamily,
    theta_true: float,
    cfg: HomodyneConfig,
    repetitions: int = 1,
    grid: Grid | None = None,
    h: float = DEFAULT_STEP,
    analytic: bool = True,
    threads: int = 1,
    keep_blocks: bool = False,
):
    """Simulate ``repetitions`` blocks of ``cfg.samples`` homodyne shots at ``theta_true``.

    Each shot gives ``theta~ = (D - D0) / slope``, where ``D0`` is the exact mean
    signal at theta = 0 and ``slope = d<D>/dtheta`` at 0.  With the LO in the
    detection mode and zero phase, ``slope = sqrt(N_LO I0)``.

    Returns the :class:`ExperimentReport`, or ``(report, block_rows)`` when
    ``keep_blocks`` is set.
    """
    if grid is None:
        grid = Grid.uniform()
    bundle = differentiate(family, grid, h, analytic=analytic)
    fisher = report_from_bundle(bundle)
    lo = cfg.lo_mode
    if lo is None:
        nrm = bundle.a_bar_prime.norm()
        if nrm <= 1e-12:
            raise ZeroDetectionMode("theta does not move the mean field; no detection mode for the LO")
        lo = bundle.a_bar_prime / nrm
    d_zero = homodyne_mean(bundle.a_bar, lo, cfg.lo_photons, cfg.lo_phase)
    slope = 2.0 * math.sqrt(cfg.lo_photons) * (np.exp(-1j * cfg.lo_phase) * inner_product(lo, bundle.a_bar_prime)).real

    point = family.evaluate(theta_true, grid)
    state = point.state_in(point.working_basis(leading=[lo]))
    sensitive = abs(slope) > 1e-9 * math.sqrt(cfg.lo_photons) * max(math.sqrt(fisher.i_full), 1.0)

    samples = int(cfg.samples)
    reps = int(repetitions)
    if reps < 1:
        raise ValueError("repetitions must be >= 1")

    def block(r):
        d = sample_homodyne(state, cfg, samples, stream(cfg.seed, r))
        if not sensitive:
            return _Block(samples, math.nan, math.nan)
        est = (d - d_zero) / slope
        mu = float(np.mean(est))
        return _Block(samples, mu, float(np.sum((est - mu) ** 2)))

    if threads > 1 and reps > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(block, range(reps)))
    else:
        blocks = [block(r) for r in range(reps)]

    total = samples * reps
    qcr = fisher.delta_theta_min
    std_se = 1.0 / math.sqrt(2.0 * max(total - 1, 1))
    if sensitive:
        n, mean, m2 = _combine(blocks)
        std = math.sqrt(m2 / (n - 1)) if n > 1 else math.nan
        block_means = np.array([b.mean for b in blocks])
        block_dt = float(np.std(block_means, ddof=1) * math.sqrt(samples)) if reps > 1 else None
        report = ExperimentReport(
            theta_true=float(theta_true), mean=mean, std=std, stderr=std / math.sqrt(n), bias=mean - theta_true,
            d_zero=d_zero, slope=float(slope), empirical_delta_theta=std, qcr_delta_theta=qcr,
            ratio=std / qcr, std_stderr=std_se, block_delta_theta=block_dt,
            empirical_delta_theta_total=std / math.sqrt(n), qcr_delta_theta_total=qcr / math.sqrt(total),
            total_samples=total, repetitions=reps, samples=samples, sensitive=True,
            lo_photons=float(cfg.lo_photons), lo_phase=float(cfg.lo_phase),
        )
    else:
        inf = math.inf
        report = ExperimentReport(
            theta_true=float(theta_true), mean=math.nan, std=inf, stderr=inf, bias=math.nan,
            d_zero=d_zero, slope=float(slope), empirical_delta_theta=inf, qcr_delta_theta=qcr,
            ratio=inf, std_stderr=std_se, block_delta_theta=None,
            empirical_delta_theta_total=inf, qcr_delta_theta_total=qcr / math.sqrt(total),
            total_samples=total, repetitions=reps, samples=samples, sensitive=False,
            lo_photons=float(cfg.lo_photons), lo_phase=float(cfg.lo_phase),
        )
    if keep_blocks:
        rows = [{"repetition": r, "samples": b.n, "mean_estimate": b.mean, "std_estimate": math.sqrt(b.m2 / (b.n - 1)) if b.n > 1 else math.nan}
                for r, b in enumerate(blocks)]
        return report, rows
    return report
