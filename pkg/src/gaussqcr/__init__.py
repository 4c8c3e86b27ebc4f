"""Quantum Cramer-Rao bounds, detection modes and homodyne saturation for multimode Gaussian light."""

from .allocation import evaluate_allocation, optimize_allocation, random_network_audit
from .fisher import FisherReport, analyze, coherent_info, optimal_bound, qcr_bound, qfi_full, qfi_reduced
from .gaussian import (
    GaussianState,
    SqueezerBank,
    SymplecticTransform,
    check_purity,
    make_squeezed_bank,
    symplectic_from_unitary,
    transform_state,
)
from .homodyne import HomodyneConfig, homodyne_mean, run_experiment, sample_homodyne
from .models import differentiate, make_model
from .modes import ComplexField, Grid, ModeBasis, build_detection_basis, hermite_gauss, inner_product, mean_field_mode
from .oracle import overlap_closed_form, overlap_grid, qfi_from_overlap

__version__ = "0.1.0"
