"""Theta-parametrised pure Gaussian state families.

A family evaluates, for a given ``theta`` and grid, to a :class:`ModelPoint`:
the mean photon field on the grid plus a covariance matrix declared in the
family's own (theta-independent) mode basis.  Every mode outside that basis is
in vacuum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import BasisDeficient, ConfigError, DomainError
from .gaussian import GaussianState, db_to_variance, isometry_to_real, rotation
from .modes import (
    ComplexField,
    Grid,
    ModeBasis,
    complete_basis,
    hermite_gauss,
    inner_product,
    mean_field_mode,
)

DEFAULT_STEP = 1e-4
DEFAULT_DOMAIN = (-0.3, 0.3)


def embed_covariance(target: ModeBasis, source: ModeBasis, cov, *, derivative=False) -> np.ndarray:
    """Express a covariance declared on ``source`` modes in the ``target`` basis.

    Modes of ``target`` outside the span of ``source`` are taken to be vacuum.
    With ``derivative=True`` the matrix is treated as a covariance derivative, so
    the vacuum complement contributes nothing.
    """
    u = target.overlaps(source)
    if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[1]))) > 1e-8:
        raise BasisDeficient("target basis does not span the covariance modes")
    o = isometry_to_real(u)
    cov = np.asarray(cov, dtype=float)
    if derivative:
        out = o @ cov @ o.T
    else:
        out = np.eye(2 * len(target)) + o @ (cov - np.eye(cov.shape[0])) @ o.T
    return 0.5 * (out + out.T)


def quadrature_mean(basis: ModeBasis, a_bar: ComplexField) -> np.ndarray:
    """Mean quadratures ``(2 Re alpha, 2 Im alpha)`` with ``alpha_k = <mode_k, a_bar>``."""
    alpha = basis.coefficients(a_bar)
    return np.concatenate([2 * alpha.real, 2 * alpha.imag])


@dataclass(frozen=True, eq=False)
class ModelPoint:
    """A family evaluated at one theta."""

    mean_field: ComplexField
    basis: ModeBasis
    cov: np.ndarray

    @property
    def photon_number(self) -> float:
        return self.mean_field.norm() ** 2

    def working_basis(self, leading=(), extra=()) -> ModeBasis:
        """Orthonormal basis starting with ``leading`` that spans the covariance modes
        and the mean field (plus any ``extra`` fields)."""
        cands = list(self.basis.modes)
        if self.mean_field.norm() > 1e-12:
            cands.append(self.mean_field)
        cands.extend(f for f in extra if f.norm() > 1e-12)
        return complete_basis(leading, cands)

    def state_in(self, basis: ModeBasis) -> GaussianState:
        return GaussianState(quadrature_mean(basis, self.mean_field), embed_covariance(basis, self.basis, self.cov))


class ParametricFamily:
    """Base class for theta-parametrised families.

    Subclasses implement :meth:`_evaluate` and may override
    :meth:`analytic_derivative` to supply exact ``(a_bar', cov')`` at theta = 0.
    """

    name = "family"
    domain = DEFAULT_DOMAIN

    def evaluate(self, theta: float, grid: Grid) -> ModelPoint:
        lo, hi = self.domain
        if not lo <= theta <= hi:
            raise DomainError(f"theta={theta} outside model domain [{lo}, {hi}]")
        return self._evaluate(float(theta), grid)

    def _evaluate(self, theta: float, grid: Grid) -> ModelPoint:
        raise NotImplementedError

    def analytic_derivative(self, grid: Grid):
        return None

    def scale(self) -> float:
        """Natural theta scale, used to pick test displacements."""
        return 1.0

    def config(self) -> dict:
        return {"model": self.name, "params": dict(self.__dict__)}


def _single_mode_cov(sigma2: float) -> np.ndarray:
    return np.diag([sigma2, 1.0 / sigma2])


@dataclass(frozen=True, eq=False)
class PhaseModel(ParametricFamily):
    """``a_theta = sqrt(N) exp(i theta) u0``; optional squeezing in the detection mode ``i u0``."""

    N: float = 100.0
    sigma2: float = 1.0
    w: float = 1.0
    name = "phase"

    def _u0(self, grid):
        return hermite_gauss(0, self.w, 0.0, grid)

    def _evaluate(self, theta, grid):
        u0 = self._u0(grid)
        basis = ModeBasis((u0 * 1j,))
        return ModelPoint(u0 * (np.sqrt(self.N) * np.exp(1j * theta)), basis, _single_mode_cov(self.sigma2))

    def analytic_derivative(self, grid):
        return self._u0(grid) * (1j * np.sqrt(self.N)), np.zeros((2, 2))


@dataclass(frozen=True, eq=False)
class DisplacementModel(ParametricFamily):
    """TEM00 beam laterally displaced by theta; the detection mode is ``HG_1``."""

    N: float = 100.0
    w: float = 1.0
    sigma2: float = 1.0
    name = "displacement"

    def _evaluate(self, theta, grid):
        basis = ModeBasis((hermite_gauss(1, self.w, 0.0, grid),))
        mean = hermite_gauss(0, self.w, theta, grid) * np.sqrt(self.N)
        return ModelPoint(mean, basis, _single_mode_cov(self.sigma2))

    def analytic_derivative(self, grid):
        u0 = hermite_gauss(0, self.w, 0.0, grid)
        # d/dc exp(-(x-c)^2/w^2) at c = 0
        deriv = ComplexField(u0.values * (2.0 * grid.points / self.w**2), grid)
        return deriv * np.sqrt(self.N), np.zeros((2, 2))

    def scale(self):
        return self.w


@dataclass(frozen=True, eq=False)
class AmplitudeModel(ParametricFamily):
    """``a_theta = sqrt(N) (1 + m theta) u0``: only the photon number moves."""

    N: float = 100.0
    m: float = 1.0
    w: float = 1.0
    sigma2: float = 1.0
    name = "amplitude"

    def _evaluate(self, theta, grid):
        u0 = hermite_gauss(0, self.w, 0.0, grid)
        return ModelPoint(u0 * (np.sqrt(self.N) * (1 + self.m * theta)), ModeBasis((u0,)), _single_mode_cov(self.sigma2))

    def analytic_derivative(self, grid):
        u0 = hermite_gauss(0, self.w, 0.0, grid)
        return u0 * (np.sqrt(self.N) * self.m), np.zeros((2, 2))


@dataclass(frozen=True, eq=False)
class SqueezeParamModel(ParametricFamily):
    """Squeezed vacuum ``cov = diag(exp(2 theta), exp(-2 theta))``; no mean field."""

    w: float = 1.0
    name = "squeeze-param"

    def _evaluate(self, theta, grid):
        u0 = hermite_gauss(0, self.w, 0.0, grid)
        return ModelPoint(u0 * 0.0, ModeBasis((u0,)), np.diag([np.exp(2 * theta), np.exp(-2 * theta)]))

    def analytic_derivative(self, grid):
        u0 = hermite_gauss(0, self.w, 0.0, grid)
        return u0 * 0.0, np.diag([2.0, -2.0])


@dataclass(frozen=True, eq=False)
class RotatedSqueezedModel(ParametricFamily):
    """Phase shift acting on both the mean field and a squeezed detection mode.

    Mean field ``sqrt(N) exp(i theta) u0``; the mode ``i u0`` carries
    ``R(theta) diag(sigma2, 1/sigma2) R(theta)^T``.
    """

    N: float = 100.0
    sigma2: float = 0.5
    w: float = 1.0
    name = "rotated-squeezed"

    def _evaluate(self, theta, grid):
        u0 = hermite_gauss(0, self.w, 0.0, grid)
        r = rotation(theta)
        cov = r @ _single_mode_cov(self.sigma2) @ r.T
        return ModelPoint(u0 * (np.sqrt(self.N) * np.exp(1j * theta)), ModeBasis((u0 * 1j,)), 0.5 * (cov + cov.T))

    def analytic_derivative(self, grid):
        u0 = hermite_gauss(0, self.w, 0.0, grid)
        gen = np.array([[0.0, -1.0], [1.0, 0.0]])
        cov0 = _single_mode_cov(self.sigma2)
        return u0 * (1j * np.sqrt(self.N)), gen @ cov0 - cov0 @ gen


@dataclass(frozen=True, eq=False)
class VacuumModel(ParametricFamily):
    """Trivial family: vacuum for every theta, carries no information."""

    w: float = 1.0
    name = "vacuum"

    def _evaluate(self, theta, grid):
        u0 = hermite_gauss(0, self.w, 0.0, grid)
        return ModelPoint(u0 * 0.0, ModeBasis((u0,)), np.eye(2))

    def analytic_derivative(self, grid):
        return hermite_gauss(0, self.w, 0.0, grid) * 0.0, np.zeros((2, 2))


class CallableFamily(ParametricFamily):
    """Wrap a user function ``f(theta, grid) -> ModelPoint`` as a family."""

    def __init__(self, func: Callable[[float, Grid], ModelPoint], name="custom", domain=DEFAULT_DOMAIN):
        self.func = func
        self.name = name
        self.domain = domain

    def _evaluate(self, theta, grid):
        return self.func(theta, grid)


MODELS = {
    cls.name: cls
    for cls in (PhaseModel, DisplacementModel, AmplitudeModel, SqueezeParamModel, RotatedSqueezedModel, VacuumModel)
}
BUILTIN_FAMILIES = ("phase", "displacement", "amplitude", "squeeze-param", "rotated-squeezed")


def make_model(name: str, params: dict | None = None) -> ParametricFamily:
    """Instantiate a built-in family; ``squeeze_db`` is accepted in place of ``sigma2``."""
    if name not in MODELS:
        raise ConfigError(f"unknown model {name!r}; choose from {sorted(MODELS)}")
    cls = MODELS[name]
    params = dict(params or {})
    if "squeeze_db" in params:
        if "sigma2" in params:
            raise ConfigError("give either squeeze_db or sigma2, not both")
        params["sigma2"] = float(db_to_variance(params.pop("squeeze_db")))
    allowed = set(cls.__dataclass_fields__)
    for key in params:
        if key not in allowed:
            raise ConfigError(f"unknown parameter {key!r} for model {name!r}")
    try:
        model = cls(**{k: float(v) for k, v in params.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    for key in ("N", "w", "sigma2"):
        if key in allowed and getattr(model, key) <= 0:
            raise ConfigError(f"model parameter {key} must be positive")
    return model


@dataclass(frozen=True, eq=False)
class DerivativeBundle:
    a_bar: ComplexField
    a_bar_prime: ComplexField
    N: float
    N_prime: float
    cov0: np.ndarray
    cov_prime: np.ndarray
    basis: ModeBasis
    step: float | None = None
    meta: dict = field(default_factory=dict)


def _central(family, grid, h):
    plus = family.evaluate(h, grid)
    minus = family.evaluate(-h, grid)
    a_prime = (plus.mean_field - minus.mean_field) / (2 * h)
    cov_prime = (np.asarray(plus.cov) - np.asarray(minus.cov)) / (2 * h)
    n_prime = (plus.photon_number - minus.photon_number) / (2 * h)
    return a_prime, cov_prime, n_prime


def differentiate(
    family: ParametricFamily,
    grid: Grid,
    h: float = DEFAULT_STEP,
    richardson: bool = False,
    analytic: bool = False,
) -> DerivativeBundle:
    """Derivatives of the mean field, photon number and covariance at theta = 0.

    Central differences with step ``h``; ``richardson=True`` combines steps ``h``
    and ``h/2`` to cancel the leading error.  ``analytic=True`` uses the
    family's closed-form derivative instead (falling back to differences when
    the family has none).
    """
    p0 = family.evaluate(0.0, grid)
    exact = family.analytic_derivative(grid) if analytic else None
    if exact is not None:
        a_prime, cov_prime = exact
        n_prime = 2 * inner_product(p0.mean_field, a_prime).real
        step = None
    else:
        if h <= 0:
            raise ValueError("finite-difference step must be positive")
        a_prime, cov_prime, n_prime = _central(family, grid, h)
        if richardson:
            a2, c2, n2 = _central(family, grid, h / 2)
            a_prime = (a2 * 4.0 - a_prime) / 3.0
            cov_prime = (4.0 * c2 - cov_prime) / 3.0
            n_prime = (4.0 * n2 - n_prime) / 3.0
        step = h
    return DerivativeBundle(
        a_bar=p0.mean_field,
        a_bar_prime=a_prime,
        N=p0.photon_number,
        N_prime=float(n_prime),
        cov0=np.asarray(p0.cov, dtype=float),
        cov_prime=np.asarray(cov_prime, dtype=float),
        basis=p0.basis,
        step=step,
        meta={"family": family.name, "richardson": bool(richardson and exact is None)},
    )


def mode_derivative(family: ParametricFamily, grid: Grid, h: float = DEFAULT_STEP):
    """``(u_0, u'_0)`` for the normalised mean-field mode, by central differences."""
    u0 = mean_field_mode(family.evaluate(0.0, grid).mean_field)
    up = mean_field_mode(family.evaluate(h, grid).mean_field)
    um = mean_field_mode(family.evaluate(-h, grid).mean_field)
    return u0, (up - um) / (2 * h)
