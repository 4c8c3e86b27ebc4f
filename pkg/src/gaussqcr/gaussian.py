"""Pure multimode Gaussian states in quadrature phase space.

Conventions used throughout the package:

* quadratures ``x = a + a^dagger`` and ``p = i(a^dagger - a)``, so the vacuum
  covariance matrix is the identity;
* phase-space vectors are ordered ``(x_1, ..., x_M, p_1, ..., p_M)``;
* the symplectic form is ``Omega = [[0, I], [-I, 0]]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DimensionError, InvalidState, InvalidVariance, NotUnitary

PURITY_TOL = 1e-9
SYMMETRY_TOL = 1e-12


def omega(m: int) -> np.ndarray:
    """Symplectic form for ``m`` modes in (x..., p...) ordering."""
    eye = np.eye(m)
    zero = np.zeros((m, m))
    return np.block([[zero, eye], [-eye, zero]])


def db_to_variance(db):
    """Squeezing in dB (positive = below vacuum) to quadrature variance."""
    return 10.0 ** (-np.asarray(db, dtype=float) / 10.0)


def variance_to_db(var):
    return -10.0 * np.log10(np.asarray(var, dtype=float))


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Mean quadrature vector and covariance matrix of an ``M``-mode state."""

    mean: np.ndarray
    cov: np.ndarray
    mode_count: int = field(init=False)

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.cov, dtype=float)
        if mean.size % 2 or mean.size == 0:
            raise DimensionError(f"mean must have even positive length, got {mean.size}")
        if cov.shape != (mean.size, mean.size):
            raise DimensionError(f"cov shape {cov.shape} does not match mean length {mean.size}")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise InvalidState("state contains non-finite entries")
        scale = max(1.0, float(np.max(np.abs(cov))))
        if np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL * scale:
            raise InvalidState("covariance matrix is not symmetric")
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise InvalidState("covariance matrix is not positive definite") from exc
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "mode_count", mean.size // 2)

    @classmethod
    def vacuum(cls, m: int) -> "GaussianState":
        return cls(np.zeros(2 * m), np.eye(2 * m))

    @classmethod
    def coherent(cls, alpha) -> "GaussianState":
        """Coherent state with complex amplitudes ``alpha`` (one per mode)."""
        alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
        return cls(np.concatenate([2 * alpha.real, 2 * alpha.imag]), np.eye(2 * alpha.size))

    def to_dict(self) -> dict:
        return {
            "mode_count": self.mode_count,
            "mean": self.mean.tolist(),
            "cov": self.cov.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GaussianState":
        state = cls(data["mean"], data["cov"])
        if int(data.get("mode_count", state.mode_count)) != state.mode_count:
            raise DimensionError("mode_count does not match mean length")
        return state

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "GaussianState":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class SymplecticTransform:
    """Real ``2M x 2M`` phase-space map, optionally remembering its unitary."""

    matrix: np.ndarray
    origin: np.ndarray | None = None

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] % 2:
            raise DimensionError(f"symplectic matrix must be 2M x 2M, got {mat.shape}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def mode_count(self) -> int:
        return self.matrix.shape[0] // 2

    def symplectic_residual(self) -> float:
        om = omega(self.mode_count)
        return float(np.max(np.abs(self.matrix @ om @ self.matrix.T - om)))

    def orthogonality_residual(self) -> float:
        return float(np.max(np.abs(self.matrix @ self.matrix.T - np.eye(self.matrix.shape[0]))))

    def is_passive(self, tol: float = 1e-10) -> bool:
        return self.orthogonality_residual() <= tol and self.symplectic_residual() <= tol

    def inverse(self) -> "SymplecticTransform":
        # O^{-1} = -Omega O^T Omega for any symplectic O
        om = omega(self.mode_count)
        origin = None if self.origin is None else self.origin.conj().T
        return SymplecticTransform(-om @ self.matrix.T @ om, origin)


@dataclass(frozen=True, eq=False)
class SqueezerBank:
    """Independent single-mode squeezers; ``variances[i]`` is the x-quadrature variance."""

    variances: tuple

    def __post_init__(self):
        var = tuple(float(v) for v in np.atleast_1d(self.variances))
        if not var:
            raise InvalidVariance("squeezer bank is empty")
        for v in var:
            if not np.isfinite(v) or v <= 0:
                raise InvalidVariance(f"quadrature variance must be positive, got {v}")
        object.__setattr__(self, "variances", var)

    @classmethod
    def from_db(cls, db) -> "SqueezerBank":
        return cls(tuple(db_to_variance(np.atleast_1d(db))))

    @property
    def sigma_min_sq(self) -> float:
        return min(self.variances)

    def __len__(self):
        return len(self.variances)


class PurityReport(NamedTuple):
    residual: float
    pure: bool


def make_squeezed_bank(bank: SqueezerBank) -> GaussianState:
    """Product state of the bank's squeezers before any mixing."""
    var = np.asarray(bank.variances)
    return GaussianState(np.zeros(2 * var.size), np.diag(np.concatenate([var, 1.0 / var])))


def symplectic_from_unitary(u, tol: float = 1e-10) -> SymplecticTransform:
    """Passive phase-space map induced by the mode transformation ``a -> U a``."""
    u = np.atleast_2d(np.asarray(u, dtype=complex))
    if u.shape[0] != u.shape[1]:
        raise NotUnitary(f"matrix must be square, got {u.shape}")
    if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > tol:
        raise NotUnitary("matrix is not unitary")
    return SymplecticTransform(isometry_to_real(u), u)


def isometry_to_real(u: np.ndarray) -> np.ndarray:
    """``[[Re U, -Im U], [Im U, Re U]]`` for any complex (possibly rectangular) ``U``."""
    re, im = u.real, u.imag
    return np.block([[re, -im], [im, re]])


def transform_state(state: GaussianState, transform: SymplecticTransform) -> GaussianState:
    o = transform.matrix
    if o.shape[0] != state.mean.size:
        raise DimensionError(
            f"transform acts on {transform.mode_count} modes, state has {state.mode_count}"
        )
    cov = o @ state.cov @ o.T
    return GaussianState(o @ state.mean, 0.5 * (cov + cov.T))


def check_purity(state: GaussianState) -> PurityReport:
    om = omega(state.mode_count)
    residual = float(np.max(np.abs(state.cov @ om @ state.cov - om)))
    return PurityReport(residual, residual <= PURITY_TOL)


def symplectic_eigenvalues(cov) -> np.ndarray:
    """Symplectic spectrum of ``cov`` (each value once, ascending)."""
    cov = np.asarray(cov, dtype=float)
    m = cov.shape[0] // 2
    ev = np.abs(np.linalg.eigvals(1j * omega(m) @ cov))
    return np.sort(ev)[::2]


def rotation(phi: float) -> np.ndarray:
    """Single-mode phase-space rotation induced by ``a -> exp(i phi) a``."""
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s], [s, c]])


def haar_unitary(m: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random ``m x m`` unitary from a QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_pure_state(m: int, rng: np.random.Generator, max_db: float = 10.0, max_shift: float = 4.0) -> GaussianState:
    """Random pure state: squeezers up to ``max_db`` mixed by a Haar network, then displaced."""
    bank = SqueezerBank(tuple(db_to_variance(rng.uniform(0.0, max_db, m))))
    o = symplectic_from_unitary(haar_unitary(m, rng))
    state = transform_state(make_squeezed_bank(bank), o)
    shift = rng.standard_normal(2 * m)
    shift *= rng.uniform(0.0, max_shift) / max(np.linalg.norm(shift), 1e-300)
    return GaussianState(state.mean + shift, state.cov)
