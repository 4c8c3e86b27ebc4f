"""Discretised mode functions, inner products and mode-basis construction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BasisDeficient, GridError, ResolutionError, ZeroDetectionMode, ZeroMeanField

PIVOT_TOL = 1e-10
ORTHONORMAL_TOL = 1e-8
MIN_POINTS_PER_WAIST = 16


@dataclass(frozen=True, eq=False)
class Grid:
    """1-D sample coordinates with positive quadrature weights."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1)
        wts = np.array(self.weights, dtype=float).reshape(-1)
        if pts.size != wts.size:
            raise GridError("points and weights must have equal length")
        if pts.size < 2 or np.any(np.diff(pts) <= 0):
            raise GridError("grid points must be strictly increasing")
        if np.any(wts <= 0):
            raise GridError("grid weights must be positive")
        pts.setflags(write=False)
        wts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", wts)

    @classmethod
    def from_points(cls, points) -> "Grid":
        """Trapezoid weights for arbitrary increasing sample points."""
        pts = np.asarray(points, dtype=float)
        if pts.size < 2:
            raise GridError("need at least two grid points")
        d = np.diff(pts)
        wts = np.zeros_like(pts)
        wts[:-1] += 0.5 * d
        wts[1:] += 0.5 * d
        return cls(pts, wts)

    @classmethod
    def uniform(cls, lo: float = -8.0, hi: float = 8.0, points: int = 1024) -> "Grid":
        return cls.from_points(np.linspace(lo, hi, int(points)))

    @property
    def spacing(self) -> float:
        return float(np.max(np.diff(self.points)))

    def __len__(self):
        return self.points.size

    def same_as(self, other: "Grid") -> bool:
        return self is other or (
            self.points.shape == other.points.shape
            and np.array_equal(self.points, other.points)
            and np.array_equal(self.weights, other.weights)
        )


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex amplitudes sampled on a :class:`Grid`."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex).reshape(-1)
        if vals.size != len(self.grid):
            raise GridError(f"field has {vals.size} samples, grid has {len(self.grid)}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def norm(self) -> float:
        return float(np.sqrt(inner_product(self, self).real))

    def __mul__(self, c):
        return ComplexField(self.values * c, self.grid)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return ComplexField(self.values / c, self.grid)

    def __add__(self, other):
        _check_grid(self, other)
        return ComplexField(self.values + other.values, self.grid)

    def __sub__(self, other):
        _check_grid(self, other)
        return ComplexField(self.values - other.values, self.grid)

    def __neg__(self):
        return ComplexField(-self.values, self.grid)


@dataclass(frozen=True, eq=False)
class ModeBasis:
    """Ordered orthonormal modes on a shared grid."""

    modes: tuple

    def __post_init__(self):
        modes = tuple(self.modes)
        if not modes:
            raise BasisDeficient("a mode basis needs at least one mode")
        for f in modes[1:]:
            _check_grid(modes[0], f)
        object.__setattr__(self, "modes", modes)
        err = np.max(np.abs(self.gram() - np.eye(len(modes))))
        if err > ORTHONORMAL_TOL:
            raise BasisDeficient(f"modes are not orthonormal (max Gram error {err:.3g})")

    @property
    def grid(self) -> Grid:
        return self.modes[0].grid

    def __len__(self):
        return len(self.modes)

    def __getitem__(self, i):
        return self.modes[i]

    def matrix(self) -> np.ndarray:
        """Mode values stacked as rows, shape ``(M, len(grid))``."""
        return np.stack([m.values for m in self.modes])

    def gram(self) -> np.ndarray:
        v = np.stack([m.values for m in self.modes])
        w = self.modes[0].grid.weights
        return (v.conj() * w) @ v.T

    def coefficients(self, f: ComplexField) -> np.ndarray:
        """``<mode_k, f>`` for every mode."""
        _check_grid(self.modes[0], f)
        return (self.matrix().conj() * f.grid.weights) @ f.values

    def overlaps(self, other: "ModeBasis") -> np.ndarray:
        """Matrix ``U[k, j] = <self_k, other_j>``."""
        _check_grid(self.modes[0], other.modes[0])
        return (self.matrix().conj() * self.grid.weights) @ other.matrix().T


def _check_grid(f: ComplexField, g: ComplexField):
    if not f.grid.same_as(g.grid):
        raise GridError("fields live on different grids")


def inner_product(f: ComplexField, g: ComplexField) -> complex:
    """``sum_k w_k conj(f_k) g_k``."""
    _check_grid(f, g)
    return complex(np.sum(f.grid.weights * np.conj(f.values) * g.values))


def _hermite_functions(n_max: int, s: np.ndarray) -> np.ndarray:
    """Normalised Hermite functions ``psi_0..psi_n_max`` of ``s`` by stable recurrence."""
    out = np.empty((n_max + 1, s.size))
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * s**2)
    if n_max >= 1:
        out[1] = np.sqrt(2.0) * s * out[0]
    for n in range(2, n_max + 1):
        out[n] = np.sqrt(2.0 / n) * s * out[n - 1] - np.sqrt((n - 1) / n) * out[n - 2]
    return out


def hermite_gauss(n: int, waist: float, center: float, grid: Grid) -> ComplexField:
    """n-th Hermite-Gauss mode, ``HG_0 ~ exp(-(x - center)^2 / waist^2)``, unit grid norm."""
    if n < 0:
        raise ValueError("mode order must be non-negative")
    if waist <= 0:
        raise ValueError("waist must be positive")
    if grid.spacing > waist / MIN_POINTS_PER_WAIST:
        raise ResolutionError(
            f"grid spacing {grid.spacing:.3g} does not resolve waist {waist} "
            f"({MIN_POINTS_PER_WAIST} points per waist required)"
        )
    s = np.sqrt(2.0) * (grid.points - center) / waist
    vals = _hermite_functions(n, s)[n]
    f = ComplexField(vals.astype(complex), grid)
    return f / f.norm()


def hermite_gauss_ladder(count: int, waist: float, center: float, grid: Grid) -> list:
    """``HG_0 .. HG_{count-1}``, each normalised on the grid."""
    if grid.spacing > waist / MIN_POINTS_PER_WAIST:
        raise ResolutionError(f"grid spacing {grid.spacing:.3g} does not resolve waist {waist}")
    s = np.sqrt(2.0) * (grid.points - center) / waist
    fields = []
    for vals in _hermite_functions(count - 1, s):
        f = ComplexField(vals.astype(complex), grid)
        fields.append(f / f.norm())
    return fields


def mean_field_mode(a_bar: ComplexField) -> ComplexField:
    """Normalised mean photon field mode ``a_bar / ||a_bar||``."""
    nrm = a_bar.norm()
    if nrm <= 1e-12:
        raise ZeroMeanField("mean field vanishes; mode shape undefined")
    return a_bar / nrm


def _orthogonalize(v: np.ndarray, basis: list, w: np.ndarray) -> np.ndarray:
    # two classical Gram-Schmidt passes
    for _ in range(2):
        for b in basis:
            v = v - b * np.sum(w * b.conj() * v)
    return v


def complete_basis(leading, candidates=(), size: int | None = None) -> ModeBasis:
    """Orthonormal basis starting with ``leading`` and completed from ``candidates``.

    Leading fields are orthonormalised in order and must be linearly independent.
    Candidates are then added greedily: each step takes the candidate with the
    largest residual after projection (lowest index on ties) and stops at
    ``size`` modes or when every residual drops below the pivot threshold.
    """
    leading = list(leading)
    candidates = list(candidates)
    if not leading and not candidates:
        raise BasisDeficient("nothing to build a basis from")
    ref = (leading or candidates)[0]
    for f in leading + candidates:
        _check_grid(ref, f)
    grid = ref.grid
    w = grid.weights
    basis: list = []
    for f in leading:
        v = _orthogonalize(f.values, basis, w)
        nrm = np.sqrt(np.sum(w * np.abs(v) ** 2))
        if nrm <= PIVOT_TOL * max(1.0, f.norm()):
            raise BasisDeficient("leading fields are linearly dependent")
        basis.append(v / nrm)
    pool = [c.values for c in candidates]
    while pool and (size is None or len(basis) < size):
        projected = [_orthogonalize(c, basis, w) for c in pool]
        norms = np.array([
            np.sqrt(np.sum(w * np.abs(r) ** 2) / max(np.sum(w * np.abs(c) ** 2), 1e-300))
            for r, c in zip(projected, pool)
        ])
        best = float(norms.max())
        if best <= PIVOT_TOL:
            break
        k = int(np.flatnonzero(norms >= best * (1 - 1e-9))[0])
        r = projected[k]
        basis.append(r / np.sqrt(np.sum(w * np.abs(r) ** 2)))
        del pool[k]
    if size is not None and len(basis) < size:
        raise BasisDeficient(f"only {len(basis)} independent modes available, {size} requested")
    return ModeBasis(tuple(ComplexField(v, grid) for v in basis))


def build_detection_basis(
    a_bar_prime: ComplexField,
    target_size: int,
    seeds=None,
    waist: float = 1.0,
    center: float = 0.0,
) -> ModeBasis:
    """Detection mode ``a_bar' / ||a_bar'||`` followed by ``target_size - 1`` completion modes.

    The default completion seeds are the Hermite-Gauss ladder ``HG_0 .. HG_{M+4}``
    with the given waist and center.
    """
    if target_size < 1:
        raise ValueError("target_size must be at least 1")
    nrm = a_bar_prime.norm()
    if nrm <= 1e-12:
        raise ZeroDetectionMode("mean field derivative vanishes; theta does not move the mean field")
    if seeds is None:
        seeds = hermite_gauss_ladder(target_size + 5, waist, center, a_bar_prime.grid)
    return complete_basis([a_bar_prime / nrm], seeds, size=target_size)
