import math

import numpy as np
import pytest
from scipy.linalg import expm

from gaussqcr.errors import CoverageError, DimensionError, PurityError, StepTooLarge, UnsupportedDimension
from gaussqcr.fisher import analyze, qfi_full
from gaussqcr.gaussian import (
    GaussianState,
    SymplecticTransform,
    haar_unitary,
    omega,
    random_pure_state,
    symplectic_from_unitary,
    transform_state,
)
from gaussqcr.models import DisplacementModel, PhaseModel, RotatedSqueezedModel, SqueezeParamModel
from gaussqcr.oracle import (
    bures_bound,
    family_pair,
    overlap_closed_form,
    overlap_grid,
    qfi_from_overlap,
    qfi_from_overlap_path,
    random_path,
)

VAC = GaussianState.vacuum(1)
COH = GaussianState([2.0, 0.0], np.eye(2))
SQZ = GaussianState([0.0, 0.0], np.diag([0.25, 4.0]))
EXAMPLES = [(VAC, VAC, 1.0), (VAC, COH, math.exp(-1)), (VAC, SQZ, 0.8)]


@pytest.mark.parametrize("s1,s2,expect", EXAMPLES)
def test_closed_form_examples(s1, s2, expect):
    assert overlap_closed_form(s1, s2).overlap_sq == pytest.approx(expect, rel=1e-14)


@pytest.mark.parametrize("s1,s2,expect", EXAMPLES)
def test_grid_examples(s1, s2, expect):
    assert abs(overlap_grid(s1, s2).overlap_sq - expect) < 1e-6


def test_random_pairs_grid_vs_closed(rng):
    for _ in range(50):
        s1, s2 = random_pure_state(1, rng), random_pure_state(1, rng)
        assert abs(overlap_grid(s1, s2).overlap_sq - overlap_closed_form(s1, s2).overlap_sq) < 1e-6


def test_overlap_errors():
    with pytest.raises(PurityError):
        overlap_closed_form(VAC, GaussianState([0, 0], 2 * np.eye(2)))
    with pytest.raises(DimensionError):
        overlap_closed_form(VAC, GaussianState.vacuum(2))
    with pytest.raises(UnsupportedDimension):
        overlap_grid(GaussianState.vacuum(2), GaussianState.vacuum(2))
    with pytest.raises(CoverageError):
        overlap_grid(VAC, COH, box=3.0)


def test_pure_states_have_unit_determinant(rng):
    for m in (1, 2, 3):
        for _ in range(20):
            assert np.linalg.det(random_pure_state(m, rng).cov) == pytest.approx(1.0, rel=1e-8)


def test_symmetry_and_invariance(rng):
    for m in (1, 2, 3):
        for _ in range(10):
            s1, s2 = random_pure_state(m, rng), random_pure_state(m, rng)
            f12 = overlap_closed_form(s1, s2).overlap_sq
            assert f12 == overlap_closed_form(s2, s1).overlap_sq
            assert 0 < f12 <= 1
            a = rng.standard_normal((2 * m, 2 * m)) * 0.3
            active = SymplecticTransform(expm(omega(m) @ (a + a.T)))
            for t in (symplectic_from_unitary(haar_unitary(m, rng)), active):
                g = overlap_closed_form(transform_state(s1, t), transform_state(s2, t)).overlap_sq
                assert g == pytest.approx(f12, rel=1e-10, abs=1e-14)


def test_qfi_from_overlap_builtins(grid):
    assert qfi_from_overlap(PhaseModel(), grid) == pytest.approx(400, abs=0.04)
    assert qfi_from_overlap(SqueezeParamModel(), grid) == pytest.approx(2, abs=2e-4)
    assert qfi_from_overlap(DisplacementModel(), grid) == pytest.approx(400, abs=0.04)
    ref = analyze(RotatedSqueezedModel(), grid, analytic=True).i_full
    assert qfi_from_overlap(RotatedSqueezedModel(), grid) == pytest.approx(ref, rel=1e-4)


def test_random_paths_match_fisher(rng):
    for m in (1, 2, 3):
        for _ in range(5):
            path = random_path(m, rng)
            xp, cp = path.derivatives()
            ref = sum(qfi_full(xp, path.base.cov, cp))
            assert qfi_from_overlap_path(path) == pytest.approx(ref, rel=1e-4)


def test_step_too_large(grid):
    with pytest.raises(StepTooLarge):
        qfi_from_overlap(PhaseModel(), grid, h=0.2)


def test_bures_consistency(grid):
    h = 1e-3
    s0, sh = family_pair(PhaseModel(), grid)(h / 2)
    # the pair straddles 0, so the separation is h
    bound = bures_bound(s0, sh, h)
    assert bound == pytest.approx(0.05, rel=1e-3)
