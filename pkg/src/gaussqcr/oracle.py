"""Independent check of the Fisher information through state overlaps.

The squared overlap of two pure Gaussian states is the phase-space integral
``(4 pi)^M \\int W_1 W_2``.  It is evaluated in closed form and, for a single
mode, by direct summation on a phase-space grid.  The small-step deficit of the
overlap gives the Fisher information without going through the mean/noise
decomposition used in :mod:`gaussqcr.fisher`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm
from scipy.special import erfc

from .errors import CoverageError, DimensionError, NoInformation, PurityError, StepTooLarge, UnsupportedDimension
from .gaussian import GaussianState, check_purity, omega, random_pure_state
from .models import ParametricFamily
from .modes import Grid

MAX_DEFICIT = 0.01
TAIL_TOL = 1e-8
DET_TOL = 1e-8


@dataclass(frozen=True)
class OverlapResult:
    overlap_sq: float
    method: str
    deficit: float

    @property
    def bures_distance(self) -> float:
        return math.sqrt(max(2.0 * (1.0 - math.sqrt(max(self.overlap_sq, 0.0))), 0.0))


def _check_pair(s1: GaussianState, s2: GaussianState):
    if s1.mode_count != s2.mode_count:
        raise DimensionError(f"states have {s1.mode_count} and {s2.mode_count} modes")
    for s in (s1, s2):
        if not check_purity(s).pure:
            raise PurityError("overlap formula requires pure states")
        # the overlap integral drops the Wigner normalisation, valid only for det = 1
        if abs(np.linalg.det(s.cov) - 1.0) > DET_TOL:
            raise PurityError(f"covariance determinant {np.linalg.det(s.cov):.12g} differs from 1")


def overlap_closed_form(s1: GaussianState, s2: GaussianState) -> OverlapResult:
    """``2^M / sqrt(det(G1 + G2)) * exp(-d^T (G1 + G2)^{-1} d / 2)``.

    ``deficit = 1 - overlap_sq`` is computed through ``expm1`` so it stays
    accurate when the states are nearly identical.
    """
    _check_pair(s1, s2)
    total = s1.cov + s2.cov
    delta = s1.mean - s2.mean
    sign, logdet = np.linalg.slogdet(total)
    quad = float(delta @ np.linalg.solve(total, delta))
    log_f = s1.mode_count * math.log(2.0) - 0.5 * logdet - 0.5 * quad
    deficit = -math.expm1(log_f)
    return OverlapResult(math.exp(log_f), "closed_form", deficit)


def wigner(state: GaussianState, x, p) -> np.ndarray:
    """Single-mode Wigner function on broadcastable coordinate arrays."""
    if state.mode_count != 1:
        raise UnsupportedDimension("Wigner grid evaluation is single-mode only")
    inv = np.linalg.inv(state.cov)
    dx = np.asarray(x) - state.mean[0]
    dp = np.asarray(p) - state.mean[1]
    q = inv[0, 0] * dx**2 + 2 * inv[0, 1] * dx * dp + inv[1, 1] * dp**2
    return np.exp(-0.5 * q) / (2 * np.pi * math.sqrt(np.linalg.det(state.cov)))


def _tail_mass(state: GaussianState, center, box) -> float:
    mass = 0.0
    for k in range(2):
        sd = math.sqrt(state.cov[k, k])
        off = state.mean[k] - center[k]
        mass += 0.5 * (erfc((box - off) / (math.sqrt(2) * sd)) + erfc((box + off) / (math.sqrt(2) * sd)))
    return mass


def auto_box(s1: GaussianState, s2: GaussianState, n_std: float = 6.5) -> float:
    """Half-width around the midpoint covering ``n_std`` standard deviations of both states."""
    center = 0.5 * (s1.mean + s2.mean)
    return max(
        abs(s.mean[k] - center[k]) + n_std * math.sqrt(s.cov[k, k]) for s in (s1, s2) for k in range(2)
    )


def overlap_grid(s1: GaussianState, s2: GaussianState, box: float | None = None, points_per_axis: int = 512) -> OverlapResult:
    """Squared overlap ``4 pi sum W1 W2 dA`` on a square grid centred between the two means.

    ``box`` is the half-width of the square.
    """
    if s1.mode_count != 1 or s2.mode_count != 1:
        raise UnsupportedDimension("grid integration is implemented for M = 1 only")
    _check_pair(s1, s2)
    if points_per_axis < 64:
        raise ValueError("points_per_axis must be >= 64")
    center = 0.5 * (s1.mean + s2.mean)
    if box is None:
        box = auto_box(s1, s2)
    tail = _tail_mass(s1, center, box) + _tail_mass(s2, center, box)
    if tail > TAIL_TOL:
        raise CoverageError(f"box half-width {box} leaves tail mass {tail:.2e}")
    xs = np.linspace(center[0] - box, center[0] + box, points_per_axis)
    ps = np.linspace(center[1] - box, center[1] + box, points_per_axis)
    cell = (xs[1] - xs[0]) * (ps[1] - ps[0])
    x, p = np.meshgrid(xs, ps, indexing="ij")
    val = 4 * np.pi * float(np.sum(wigner(s1, x, p) * wigner(s2, x, p))) * cell
    return OverlapResult(val, "grid_integration", 1.0 - val)


# -- Fisher information from the overlap deficit ---------------------------------------


def _info_at(pair: Callable[[float], tuple], h: float) -> tuple[float, float]:
    # states at -h and +h: the deficit is even in h, so Richardson removes the h^2 error
    s0, s1 = pair(h)
    d = overlap_closed_form(s0, s1).deficit
    return d / h**2, d


def _richardson_info(pair, h: float) -> float:
    i_h, d = _info_at(pair, h)
    if d >= MAX_DEFICIT:
        raise StepTooLarge(f"overlap deficit {d:.3g} at h={h} exceeds {MAX_DEFICIT}")
    i_half, _ = _info_at(pair, h / 2)
    return (4.0 * i_half - i_h) / 3.0


def auto_step(pair, h0: float = 1e-3, target: float = 1e-5, h_max: float = 0.25) -> float:
    """Step giving an overlap deficit near ``target``."""
    h = h0
    for _ in range(6):
        _, d = _info_at(pair, h)
        if d <= 0:
            if h >= h_max:
                raise NoInformation("overlap does not change with theta")
            h = min(h * 10, h_max)
            continue
        h_new = min(h * math.sqrt(target / d), h_max)
        if abs(h_new / h - 1) < 0.2:
            return h_new
        h = h_new
    return h


def family_pair(family: ParametricFamily, grid: Grid):
    """``h -> (state at -h, state at +h)`` expressed in a common mode basis."""

    def pair(h):
        pm, pp = family.evaluate(-h, grid), family.evaluate(h, grid)
        basis = pm.working_basis(extra=[pp.mean_field] + list(pp.basis.modes))
        return pm.state_in(basis), pp.state_in(basis)

    return pair


def path_pair(path: "GaussianPath"):
    return lambda h: (path.state(-h), path.state(h))


def qfi_from_overlap(family: ParametricFamily, grid: Grid, h: float | None = None) -> float:
    """Fisher information from the overlap deficit, with Richardson extrapolation.

    Uses ``I = lim (1 - |<psi_-h|psi_h>|^2) / h^2``, which equals
    ``lim 4 (1 - |<psi_0|psi_h>|^2) / h^2`` but has no odd powers of ``h``.

    With ``h=None`` a step is chosen so the overlap deficit is about 1e-5.
    """
    pair = family_pair(family, grid)
    if h is None:
        h = auto_step(pair, h0=1e-3 * family.scale())
    return _richardson_info(pair, h)


def qfi_from_overlap_path(path: "GaussianPath", h: float | None = None) -> float:
    pair = path_pair(path)
    if h is None:
        h = auto_step(pair)
    return _richardson_info(pair, h)


def bures_bound(s0: GaussianState, sh: GaussianState, h: float, q: int = 1) -> float:
    """``(2 sqrt(Q) s / h)^{-1}`` with ``s`` the Bures distance between the two states."""
    s = overlap_closed_form(s0, sh).bures_distance
    return math.inf if s == 0 else h / (2.0 * math.sqrt(q) * s)


# -- random phase-space families -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GaussianPath:
    """Pure-state path ``theta -> (S(theta) X(theta), S(theta) G0 S(theta)^T)``.

    ``S(theta) = expm(theta Omega H)`` with ``H`` symmetric is symplectic, so
    every point of the path is pure.  The mean is ``X0 + theta d1 + theta^2 d2 / 2``
    before the symplectic map.
    """

    base: GaussianState
    generator: np.ndarray
    d1: np.ndarray
    d2: np.ndarray

    def _sym(self, theta):
        return expm(theta * omega(self.base.mode_count) @ self.generator)

    def state(self, theta: float) -> GaussianState:
        s = self._sym(theta)
        mean = s @ (self.base.mean + theta * self.d1 + 0.5 * theta**2 * self.d2)
        cov = s @ self.base.cov @ s.T
        return GaussianState(mean, 0.5 * (cov + cov.T))

    def derivatives(self):
        """Exact ``(X', G')`` at theta = 0."""
        k = omega(self.base.mode_count) @ self.generator
        mean_prime = k @ self.base.mean + self.d1
        cov_prime = k @ self.base.cov + self.base.cov @ k.T
        return mean_prime, cov_prime


def random_path(m: int, rng: np.random.Generator, max_db: float = 10.0, gen_scale: float = 0.5) -> GaussianPath:
    base = random_pure_state(m, rng, max_db=max_db)
    a = rng.standard_normal((2 * m, 2 * m)) * gen_scale
    gen = 0.5 * (a + a.T)
    return GaussianPath(base, gen, rng.standard_normal(2 * m), rng.standard_normal(2 * m))
