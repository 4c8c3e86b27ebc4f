"""Acceptance criteria; each test prints one PASS/FAIL line with its measured margin."""

import math
import time

import numpy as np
import pytest

from gaussqcr.allocation import optimize_allocation, random_network_audit
from gaussqcr.fisher import analyze, coherent_info, qfi_full
from gaussqcr.gaussian import (
    SqueezerBank,
    check_purity,
    haar_unitary,
    make_squeezed_bank,
    random_pure_state,
    symplectic_from_unitary,
    transform_state,
)
from gaussqcr.homodyne import HomodyneConfig, run_experiment
from gaussqcr.models import (
    BUILTIN_FAMILIES,
    DisplacementModel,
    PhaseModel,
    differentiate,
    embed_covariance,
    make_model,
    mode_derivative,
    quadrature_mean,
)
from gaussqcr.modes import ComplexField, ModeBasis, build_detection_basis, complete_basis, hermite_gauss, inner_product
from gaussqcr.oracle import overlap_closed_form, overlap_grid, qfi_from_overlap, qfi_from_overlap_path, random_path

SIX_DB = 10 ** -0.6
MEAN_MODELS = [n for n in BUILTIN_FAMILIES if n != "squeeze-param"]


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail, elapsed, limit):
        ok = ok and elapsed < limit
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail} ({elapsed:.2f}s < {limit}s)")
        assert ok

    return emit


def test_criterion_1_shot_noise_phase(grid, report):
    t0 = time.perf_counter()
    exact = analyze(PhaseModel(N=100), grid, analytic=True).delta_theta_min
    numeric = analyze(PhaseModel(N=100), grid).delta_theta_min
    e1, e2 = abs(exact - 0.05), abs(numeric - 0.05)
    report(1, e1 < 1e-9 and e2 < 1e-6, f"phase N=100 analytic err {e1:.2e}, numeric err {e2:.2e}", time.perf_counter() - t0, 1)


def test_criterion_2_displacement(grid, report):
    t0 = time.perf_counter()
    fam = DisplacementModel(N=1e6, w=1.0)
    exact = analyze(fam, grid, analytic=True).delta_theta_min
    numeric = analyze(fam, grid).delta_theta_min
    det = build_detection_basis(differentiate(fam, grid).a_bar_prime, 3)[0]
    ov = abs(inner_product(det, hermite_gauss(1, 1.0, 0.0, grid))) ** 2
    e1, e2 = abs(exact - 5e-4), abs(numeric - 5e-4)
    ok = e1 < 1e-9 and e2 < 1e-6 and ov >= 1 - 1e-8
    report(2, ok, f"displacement err {e1:.2e}/{e2:.2e}, HG1 overlap^2 {ov:.12f}", time.perf_counter() - t0, 1)


def test_criterion_3_squeezing_factor(grid, report):
    t0 = time.perf_counter()
    target = 10 ** (-6 / 20)
    worst = 0.0
    for name, params in (("phase", {"N": 100}), ("displacement", {"N": 1e6})):
        for analytic in (True, False):
            plain = analyze(make_model(name, params), grid, analytic=analytic)
            sq = analyze(make_model(name, {**params, "squeeze_db": 6.0}), grid, analytic=analytic)
            for a, b in ((sq.delta_theta_min, plain.delta_theta_min), (sq.bound_linearized, plain.bound_linearized)):
                worst = max(worst, abs(a / b / target - 1))
    report(3, worst < 1e-9, f"6 dB factor {target:.9f}, worst rel err {worst:.2e}", time.perf_counter() - t0, 1)


def test_criterion_4_oracle(grid, report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    worst_fam = 0.0
    for name in BUILTIN_FAMILIES:
        fam = make_model(name)
        direct = analyze(fam, grid, analytic=True).i_full
        worst_fam = max(worst_fam, abs(qfi_from_overlap(fam, grid) / direct - 1))
    for k in range(60):
        path = random_path(1 + k % 3, rng)
        xp, cp = path.derivatives()
        direct = sum(qfi_full(xp, path.base.cov, cp))
        worst_fam = max(worst_fam, abs(qfi_from_overlap_path(path) / direct - 1))
    worst_grid = 0.0
    for _ in range(200):
        s1, s2 = random_pure_state(1, rng), random_pure_state(1, rng)
        worst_grid = max(worst_grid, abs(overlap_grid(s1, s2).overlap_sq - overlap_closed_form(s1, s2).overlap_sq))
    ok = worst_fam < 1e-4 and worst_grid < 1e-6
    report(4, ok, f"5 built-in + 60 random families rel err {worst_fam:.2e}; 200 grid pairs abs err {worst_grid:.2e}",
           time.perf_counter() - t0, 60)


def test_criterion_5_homodyne_saturation(grid, report):
    t0 = time.perf_counter()
    lines, ok, seed = [], True, 50
    for name, params, theta in (("phase", {"N": 100}, 0.01), ("displacement", {"N": 100}, 0.005)):
        for db in (0.0, 6.0):
            fam = make_model(name, {**params, "squeeze_db": db})
            seed += 1
            rep = run_experiment(fam, theta, HomodyneConfig(samples=100_000, seed=seed), grid=grid)
            good = 0.98 <= rep.ratio <= 1.02 and rep.within_bias(3.0)
            ok &= good
            lines.append(f"{name}/{db:g}dB ratio {rep.ratio:.4f} bias/se {abs(rep.bias) / rep.stderr:.2f}")
    report(5, ok, "; ".join(lines), time.perf_counter() - t0, 30)


def _suboptimal_configs(grid):
    hg = [hermite_gauss(n, 1.0, 0.0, grid) for n in range(3)]
    cases = []
    for name, db in (("phase", 0.0), ("phase", 6.0), ("displacement", 0.0), ("displacement", 6.0)):
        fam = make_model(name, {"N": 100, "squeeze_db": db})
        det = differentiate(fam, grid, analytic=True).a_bar_prime
        det = det / det.norm()
        other = hg[2]
        for mix in (0.0, 0.3, 0.6, 0.9):
            lo = det * math.cos(mix) + other * math.sin(mix)
            lo = lo / lo.norm()
            for phase in (0.0, 0.2, 0.5, 1.0):
                if mix == 0.0 and phase == 0.0:
                    continue
                cases.append((fam, lo, phase))
    return cases


def test_criterion_6_bound_never_violated(grid, report):
    t0 = time.perf_counter()
    cases = _suboptimal_configs(grid)
    violations, worst = 0, math.inf
    for k, (fam, lo, phase) in enumerate(cases):
        rep = run_experiment(fam, 0.0, HomodyneConfig(lo_mode=lo, lo_phase=phase, samples=50_000, seed=100 + k), grid=grid)
        margin = (rep.ratio - (1 - 3 * rep.std_stderr)) if rep.sensitive else math.inf
        worst = min(worst, margin)
        violations += not rep.respects_bound(3.0)
    ok = len(cases) >= 50 and violations == 0
    report(6, ok, f"{len(cases)} suboptimal LO configs, violations {violations}, min margin {worst:.3f}",
           time.perf_counter() - t0, 120)


def test_criterion_7_allocation(report):
    t0 = time.perf_counter()
    bank = SqueezerBank.from_db((6.0, 3.0, 0.0, 0.0))
    audit = random_network_audit(bank, trials=1000, seed=7)
    _, best = optimize_allocation(bank)
    eq = abs(best.gamma_inv_11 - best.spectral_radius) / best.spectral_radius
    changes = []
    for extra in ((6.0,), (3.0, 0.0), (6.0, 6.0, 1.0)):
        _, ext = optimize_allocation(SqueezerBank(bank.variances + SqueezerBank.from_db(extra).variances))
        changes.append(ext.gamma_inv_11 - best.gamma_inv_11)
    ok = (audit.max_gamma_inv_11 <= audit.spectral_radius + 1e-10 and audit.passed and eq < 1e-12
          and all(c == 0 for c in changes))
    report(7, ok, f"max diag {audit.max_gamma_inv_11:.6f} <= {audit.spectral_radius:.6f}, optimum rel err {eq:.1e}, "
           f"append changes {changes}", time.perf_counter() - t0, 30)


def test_criterion_8_invariants(grid, report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    purity = 0.0
    for _ in range(100):
        m = int(rng.integers(1, 5))
        s = make_squeezed_bank(SqueezerBank(tuple(rng.uniform(0.05, 1.0, m))))
        for _ in range(3):
            s = transform_state(s, symplectic_from_unitary(haar_unitary(m, rng)))
        purity = max(purity, check_purity(s).residual)
        assert check_purity(random_pure_state(m, rng)).pure
    worst_basis, worst_orth, worst_form = 0.0, 0.0, 0.0
    hg = [hermite_gauss(n, 1.0, 0.0, grid) for n in range(5)]
    for name in MEAN_MODELS:
        for params in ({}, {"squeeze_db": 3.0}) if name != "rotated-squeezed" else ({},):
            fam = make_model(name, params)
            b = differentiate(fam, grid)
            ref = analyze(fam, grid).i_mean_term
            base = complete_basis([], list(b.basis.modes) + [b.a_bar_prime] + hg, size=5)
            for _ in range(5):
                mixed = ModeBasis(tuple(ComplexField(v, grid) for v in haar_unitary(5, rng) @ base.matrix()))
                cov = embed_covariance(mixed, b.basis, b.cov0)
                im, _ = qfi_full(quadrature_mean(mixed, b.a_bar_prime), cov, np.zeros_like(cov))
                worst_basis = max(worst_basis, abs(im / ref - 1))
            h = 1e-4
            u, up = mode_derivative(fam, grid, h)
            worst_orth = max(worst_orth, abs(inner_product(u, up).real) / (10 * h**2))
            direct = 4 * b.a_bar_prime.norm() ** 2
            worst_form = max(worst_form, abs(coherent_info(b.N, up.norm() ** 2, b.N_prime) / direct - 1))
    ok = purity < 1e-9 and worst_basis < 1e-8 and worst_orth <= 1 and worst_form < 1e-6
    report(8, ok, f"purity {purity:.1e}, basis {worst_basis:.1e}, Re<u,u'>/(10h^2) {worst_orth:.1e}, "
           f"two-form {worst_form:.1e}", time.perf_counter() - t0, 60)
