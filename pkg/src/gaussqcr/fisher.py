"""Quantum Fisher information and quantum Cramer-Rao bounds for pure Gaussian states."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .errors import CovarianceError, InvalidPhotonNumber, NoInformation, ZeroDetectionMode
from .models import DEFAULT_STEP, DerivativeBundle, ParametricFamily, differentiate, embed_covariance, quadrature_mean
from .modes import Grid, ModeBasis, complete_basis


@dataclass(frozen=True)
class FisherReport:
    """Every sensitivity quantity for one family at theta = 0.

    ``delta_theta_min`` uses the full information (mean and noise terms);
    ``bound_linearized`` uses only the detection-mode element of the inverse
    covariance, i.e. it drops the noise term.  Both are for ``q`` repetitions.
    """

    i_full: float
    i_mean_term: float
    i_cov_term: float
    i_reduced: float
    i_zero: float
    gamma_inv_11: float | None
    delta_theta_min: float
    bound_linearized: float
    q: int
    cov_ratio: float
    photon_number: float | None = None
    photon_number_prime: float | None = None
    mode_shape_term: float | None = None
    photon_term: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _factor(cov):
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise CovarianceError(f"covariance must be square, got shape {cov.shape}")
    if not np.all(np.isfinite(cov)) or np.max(np.abs(cov - cov.T)) > 1e-10 * max(1.0, np.max(np.abs(cov))):
        raise CovarianceError("covariance must be finite and symmetric")
    try:
        return cho_factor(cov, lower=True)
    except np.linalg.LinAlgError as exc:
        raise CovarianceError("covariance is singular or indefinite") from exc


def inverse_element(cov, i: int = 0, j: int | None = None) -> float:
    """``(cov^{-1})[i, j]`` by Cholesky solve."""
    fac = _factor(cov)
    e = np.zeros(fac[0].shape[0])
    e[i] = 1.0
    col = cho_solve(fac, e)
    return float(col[i if j is None else j])


def qfi_full(mean_prime, cov, cov_prime) -> tuple[float, float]:
    """Mean-field and noise contributions to the pure-state Gaussian QFI.

    Returns ``(X'^T Gamma^{-1} X', tr((Gamma' Gamma^{-1})^2) / 4)``.
    """
    fac = _factor(cov)
    mean_prime = np.asarray(mean_prime, dtype=float)
    cov_prime = np.asarray(cov_prime, dtype=float)
    n = fac[0].shape[0]
    if mean_prime.shape != (n,) or cov_prime.shape != (n, n):
        raise CovarianceError("mean_prime/cov_prime dimensions do not match the covariance")
    i_mean = float(mean_prime @ cho_solve(fac, mean_prime))
    # tr((G' G^-1)^2) = ||L^-1 G' L^-T||_F^2 with G = L L^T
    low = np.tril(fac[0])
    b = solve_triangular(low, cov_prime, lower=True)
    b = solve_triangular(low, b.T, lower=True)
    i_cov = float(np.sum(b * b)) / 4.0
    return max(i_mean, 0.0), i_cov


def qfi_reduced(a_bar_prime_norm_sq: float, cov_in_detection_basis) -> float:
    """``4 (Gamma^{-1})[1,1] ||a_bar'||^2`` with index 1 the x-quadrature of the detection mode."""
    if a_bar_prime_norm_sq < 0:
        raise ValueError("squared norm must be non-negative")
    return 4.0 * inverse_element(cov_in_detection_basis, 0) * a_bar_prime_norm_sq


def coherent_info(n: float, u_prime_norm_sq: float, n_prime: float) -> float:
    """Coherent-state information ``N (4 ||u'||^2 + (N'/N)^2)``."""
    if not n > 0:
        raise InvalidPhotonNumber(f"photon number must be positive, got {n}")
    return n * (4.0 * u_prime_norm_sq + (n_prime / n) ** 2)


def _bound(info: float, q: int) -> float:
    return math.inf if info <= 0 else 1.0 / math.sqrt(q * info)


def qcr_bound(
    i_mean_term: float,
    i_cov_term: float,
    q: int = 1,
    *,
    i_reduced: float | None = None,
    i_zero: float = 0.0,
    gamma_inv_11: float | None = None,
    **extra,
) -> FisherReport:
    """Assemble a :class:`FisherReport`.

    Raises:
        NoInformation: if both information terms vanish.
    """
    q = int(q)
    if q < 1:
        raise ValueError("repetition count q must be >= 1")
    i_full = i_mean_term + i_cov_term
    if not i_full > 0:
        raise NoInformation("Fisher information vanishes; theta is not identifiable at first order")
    if i_reduced is None:
        i_reduced = i_mean_term
    return FisherReport(
        i_full=i_full,
        i_mean_term=i_mean_term,
        i_cov_term=i_cov_term,
        i_reduced=i_reduced,
        i_zero=i_zero,
        gamma_inv_11=gamma_inv_11,
        delta_theta_min=_bound(i_full, q),
        bound_linearized=_bound(i_reduced, q),
        q=q,
        cov_ratio=i_cov_term / i_full,
        **extra,
    )


def optimal_bound(sigma_min: float, n: float, u_prime_norm_sq: float, n_prime: float, q: int = 1) -> float:
    """Bound with the most squeezed quadrature (std ``sigma_min``) alone in the detection mode."""
    if not sigma_min > 0:
        raise ValueError("sigma_min must be positive")
    return sigma_min / math.sqrt(q * coherent_info(n, u_prime_norm_sq, n_prime))


class DetectionSetup(NamedTuple):
    bundle: DerivativeBundle
    basis: ModeBasis | None
    cov: np.ndarray
    cov_prime: np.ndarray
    mean_prime: np.ndarray


def detection_setup(bundle: DerivativeBundle) -> DetectionSetup:
    """Covariance, its derivative and ``X'`` in the detection basis.

    The basis starts with the detection mode and is completed by the family's
    covariance modes.  When the mean field does not move, the family basis is
    used and ``basis`` is ``None``.
    """
    nrm = bundle.a_bar_prime.norm()
    if nrm <= 1e-12:
        dim = 2 * len(bundle.basis)
        return DetectionSetup(bundle, None, bundle.cov0, bundle.cov_prime, np.zeros(dim))
    basis = complete_basis([bundle.a_bar_prime / nrm], bundle.basis.modes)
    cov = embed_covariance(basis, bundle.basis, bundle.cov0)
    cov_prime = embed_covariance(basis, bundle.basis, bundle.cov_prime, derivative=True)
    return DetectionSetup(bundle, basis, cov, cov_prime, quadrature_mean(basis, bundle.a_bar_prime))


def report_from_bundle(bundle: DerivativeBundle, q: int = 1) -> FisherReport:
    setup = detection_setup(bundle)
    i_mean, i_cov = qfi_full(setup.mean_prime, setup.cov, setup.cov_prime)
    a2 = bundle.a_bar_prime.norm() ** 2
    extra = {"photon_number": bundle.N, "photon_number_prime": bundle.N_prime}
    if setup.basis is None:
        return qcr_bound(i_mean, i_cov, q, i_reduced=0.0, i_zero=0.0, gamma_inv_11=None, **extra)
    g11 = inverse_element(setup.cov, 0)
    i_zero = 4.0 * a2
    if bundle.N > 1e-12:
        photon_term = (bundle.N_prime / bundle.N) ** 2
        extra.update(photon_term=photon_term, mode_shape_term=i_zero / bundle.N - photon_term)
    return qcr_bound(
        i_mean, i_cov, q, i_reduced=qfi_reduced(a2, setup.cov), i_zero=i_zero, gamma_inv_11=g11, **extra
    )


def analyze(
    family: ParametricFamily,
    grid: Grid,
    q: int = 1,
    h: float = DEFAULT_STEP,
    analytic: bool = False,
    richardson: bool = False,
) -> FisherReport:
    """Full pipeline: derivatives at 0, detection basis, information terms and bounds."""
    return report_from_bundle(differentiate(family, grid, h, richardson=richardson, analytic=analytic), q)


def require_detection_mode(bundle: DerivativeBundle):
    if bundle.a_bar_prime.norm() <= 1e-12:
        raise ZeroDetectionMode("theta does not move the mean field; no detection mode")
