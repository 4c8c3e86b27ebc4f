import math

import numpy as np
import pytest
from scipy.integrate import quad

from gaussqcr.errors import BasisDeficient, GridError, ResolutionError, ZeroDetectionMode, ZeroMeanField
from gaussqcr.io import read_basis, read_field_csv, write_basis, write_field_csv
from gaussqcr.modes import (
    ComplexField,
    Grid,
    ModeBasis,
    build_detection_basis,
    complete_basis,
    hermite_gauss,
    hermite_gauss_ladder,
    inner_product,
    mean_field_mode,
)


def test_grid_integrates_gaussian(grid):
    f = ComplexField(np.exp(-grid.points**2 / 2), grid)
    total = np.sum(grid.weights * f.values.real)
    assert abs(total - math.sqrt(2 * math.pi)) < 1e-8


@pytest.mark.parametrize("pts,wts", [([0, 0, 1], [1, 1, 1]), ([0, 1], [1, -1]), ([0, 1], [1])])
def test_grid_validation(pts, wts):
    with pytest.raises(GridError):
        Grid(pts, wts)


def test_inner_product_basics(grid):
    hg0, hg1 = hermite_gauss(0, 1.0, 0.0, grid), hermite_gauss(1, 1.0, 0.0, grid)
    assert abs(inner_product(hg0, hg0) - 1) < 1e-12
    assert abs(inner_product(hg0, hg1)) < 1e-12
    f = hg0 * (1 + 2j) + hg1 * 0.3j
    assert inner_product(f, hg1) == pytest.approx(np.conj(inner_product(hg1, f)))


def test_shifted_overlap_against_quadrature(grid):
    # independent oracle: adaptive quadrature of the analytic normalised modes
    def g(x, c):
        return (2 / math.pi) ** 0.25 * math.exp(-((x - c) ** 2))

    ref, _ = quad(lambda x: g(x, 0) * g(x, 0.5), -np.inf, np.inf, epsabs=1e-14)
    assert ref == pytest.approx(math.exp(-0.125), abs=1e-12)
    val = inner_product(hermite_gauss(0, 1.0, 0.0, grid), hermite_gauss(0, 1.0, 0.5, grid))
    assert abs(val - ref) < 1e-10


def test_inner_product_grid_mismatch(grid):
    other = Grid.uniform(-8, 8, 1000)
    with pytest.raises(GridError):
        inner_product(hermite_gauss(0, 1, 0, grid), hermite_gauss(0, 1, 0, other))


def test_hermite_gauss_orthonormal(grid):
    ladder = hermite_gauss_ladder(8, 1.0, 0.0, grid)
    np.testing.assert_allclose(ModeBasis(tuple(ladder)).gram(), np.eye(8), atol=1e-10)
    for n in (0, 3, 7):
        np.testing.assert_allclose(ladder[n].values, hermite_gauss(n, 1.0, 0.0, grid).values, atol=1e-13)


def test_hermite_gauss_resolution():
    with pytest.raises(ResolutionError):
        hermite_gauss(0, 0.05, 0.0, Grid.uniform(-8, 8, 256))


@pytest.mark.parametrize("w", [1.0, 2.0])
def test_displaced_mode_derivative_norm(grid, w):
    h = 1e-4
    d = (hermite_gauss(0, w, h, grid) - hermite_gauss(0, w, -h, grid)) / (2 * h)
    assert abs(d.norm() - 1 / w) < 1e-6


def test_mean_field_mode_examples(grid):
    hg0, hg1 = hermite_gauss(0, 1, 0, grid), hermite_gauss(1, 1, 0, grid)
    np.testing.assert_allclose(mean_field_mode(hg0 * 3).values, hg0.values, atol=1e-14)
    np.testing.assert_allclose(mean_field_mode(hg0 * (1 + 1j)).values, (hg0 * ((1 + 1j) / math.sqrt(2))).values, atol=1e-14)
    u = mean_field_mode(hg0 * 2 + hg1)
    np.testing.assert_allclose(u.values, ((hg0 * 2 + hg1) / math.sqrt(5)).values, atol=1e-14)
    with pytest.raises(ZeroMeanField):
        mean_field_mode(hg0 * 0)


def test_detection_basis_hg1(grid):
    hg = hermite_gauss_ladder(4, 1, 0, grid)
    b = build_detection_basis(hg[1] * 7.0, 3)
    for k, n in enumerate((1, 0, 2)):
        assert abs(abs(inner_product(b[k], hg[n])) - 1) < 1e-10
    np.testing.assert_allclose(b.gram(), np.eye(3), atol=1e-10)


def test_detection_basis_phase_mode(grid):
    hg0 = hermite_gauss(0, 1, 0, grid)
    b = build_detection_basis(hg0 * 10j, 2)
    np.testing.assert_allclose(b[0].values, (hg0 * 1j).values, atol=1e-13)


def test_detection_basis_mixed_and_deterministic(grid):
    hg0, hg1 = hermite_gauss(0, 1, 0, grid), hermite_gauss(1, 1, 0, grid)
    f = (hg0 + hg1) / math.sqrt(2)
    b1, b2 = build_detection_basis(f, 4), build_detection_basis(f, 4)
    np.testing.assert_allclose(b1.gram(), np.eye(4), atol=1e-10)
    np.testing.assert_array_equal(b1.matrix(), b2.matrix())
    np.testing.assert_allclose(b1[0].values, f.values, atol=1e-13)


def test_detection_basis_errors(grid):
    hg0 = hermite_gauss(0, 1, 0, grid)
    with pytest.raises(ZeroDetectionMode):
        build_detection_basis(hg0 * 0, 2)
    with pytest.raises(BasisDeficient):
        build_detection_basis(hg0, 3, seeds=[hg0, hg0 * 2j])


def test_complete_basis_dependent_leading(grid):
    hg0 = hermite_gauss(0, 1, 0, grid)
    with pytest.raises(BasisDeficient):
        complete_basis([hg0, hg0 * 3])


def test_field_and_basis_roundtrip(tmp_path, grid):
    f = hermite_gauss(2, 1, 0.3, grid) * (0.5 - 2j)
    write_field_csv(tmp_path / "f.csv", f)
    back = read_field_csv(tmp_path / "f.csv", grid)
    np.testing.assert_allclose(back.values, f.values, rtol=1e-15, atol=1e-300)
    b = build_detection_basis(f, 3)
    again = read_basis(write_basis(tmp_path / "basis", b))
    np.testing.assert_allclose(again.matrix(), b.matrix(), atol=1e-15)
