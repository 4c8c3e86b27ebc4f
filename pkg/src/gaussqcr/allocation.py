"""Where to put the squeezing: diagonal of the inverse covariance versus its spectral radius.

For a bank of independent squeezers mixed by a passive network ``O``, the
inverse covariance is ``O diag(1/s_i, s_i) O^T``.  Each diagonal element is a
convex combination of the eigenvalues, so it cannot exceed ``1 / s_min`` and
reaches it only when the detection quadrature lies in the ``s_min`` eigenspace.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import PassiveRequired
from .fisher import inverse_element
from .gaussian import SqueezerBank, SymplecticTransform, haar_unitary, make_squeezed_bank, symplectic_from_unitary

OPTIMAL_GAP = 1e-8
AUDIT_SLACK = 1e-10


@dataclass(frozen=True, eq=False)
class AllocationProblem:
    bank: SqueezerBank
    network: SymplecticTransform
    detection_index: int = 0


@dataclass(frozen=True)
class AllocationReport:
    gamma_inv_11: float
    spectral_radius: float
    gap: float
    optimal: bool
    eigenmode_alignment: float

    def to_dict(self) -> dict:
        return asdict(self)


def _diag_covariance(bank: SqueezerBank) -> np.ndarray:
    var = np.asarray(bank.variances)
    return np.concatenate([var, 1.0 / var])


def evaluate_allocation(problem: AllocationProblem) -> AllocationReport:
    bank, net, d = problem.bank, problem.network, problem.detection_index
    if net.mode_count != len(bank):
        raise ValueError(f"network acts on {net.mode_count} modes, bank has {len(bank)}")
    if not 0 <= d < len(bank):
        raise IndexError(f"detection index {d} out of range")
    if not net.is_passive():
        raise PassiveRequired("optimality certificate only holds for passive (orthogonal) networks")
    o = net.matrix
    cov = o @ make_squeezed_bank(bank).cov @ o.T
    g11 = inverse_element(0.5 * (cov + cov.T), d)
    s_min = bank.sigma_min_sq
    radius = 1.0 / s_min
    diag = _diag_covariance(bank)
    eigspace = np.abs(diag - s_min) <= 1e-12 * max(1.0, s_min)
    alignment = float(np.sum(o[d, eigspace] ** 2))
    gap = radius - g11
    return AllocationReport(g11, radius, gap, gap <= OPTIMAL_GAP, min(alignment, 1.0))


def optimize_allocation(bank: SqueezerBank, detection_index: int = 0):
    """Route the most squeezed source (lowest index on ties) to ``detection_index``.

    The squeezers emit x-squeezed light and the detection quadrature is x, so a
    permutation suffices; no extra phase rotation is needed.
    """
    m = len(bank)
    best = int(np.argmin(bank.variances))
    perm = list(range(m))
    perm[detection_index], perm[best] = perm[best], perm[detection_index]
    u = np.zeros((m, m))
    # output mode k receives input mode perm[k]
    u[np.arange(m), perm] = 1.0
    net = symplectic_from_unitary(u)
    return net, evaluate_allocation(AllocationProblem(bank, net, detection_index))


@dataclass(frozen=True)
class AuditReport:
    trials: int
    spectral_radius: float
    optimal_gamma_inv_11: float
    max_gamma_inv_11: float
    violations: int
    passed: bool
    rows: tuple

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("rows")
        return out


def random_network_audit(bank: SqueezerBank, trials: int = 1000, seed: int = 0, detection_index: int = 0) -> AuditReport:
    """Evaluate ``trials`` Haar-random passive networks and compare with the optimum.

    ``rows`` holds ``(alignment, gamma_inv_11)`` per trial.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    _, best = optimize_allocation(bank, detection_index)
    rows = []
    violations = 0
    for t in range(trials):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(t,))))
        net = symplectic_from_unitary(haar_unitary(len(bank), rng))
        rep = evaluate_allocation(AllocationProblem(bank, net, detection_index))
        if rep.gamma_inv_11 > rep.spectral_radius + AUDIT_SLACK or rep.gamma_inv_11 > best.gamma_inv_11 + AUDIT_SLACK:
            violations += 1
        rows.append((rep.eigenmode_alignment, rep.gamma_inv_11))
    max_g = max(g for _, g in rows)
    return AuditReport(
        trials=trials,
        spectral_radius=best.spectral_radius,
        optimal_gamma_inv_11=best.gamma_inv_11,
        max_gamma_inv_11=max_g,
        violations=violations,
        passed=violations == 0,
        rows=tuple(rows),
    )
