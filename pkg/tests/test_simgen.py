# tests/test_simgen.py
import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from pydantic import ValidationError

from flmreg.core.exceptions import DomainError
from flmreg.shared.constants import BetaChoice, GridConvention, ScoreDistribution, Spacing
from flmreg.features.fda_core import empirical_spectrum, inner_product
from flmreg.features.simgen import (
    SimDesign,
    add_measurement_error,
    beta_coefficients,
    draw_dataset,
    gamma_sequence,
    kl_basis,
    population_model,
    population_split,
    true_beta,
)


def test_cosine_basis_on_midpoint_grid():
    basis = kl_basis(50, 3)
    assert_allclose(basis[0].values, 1.0)
    assert inner_product(basis[1], basis[1], basis[1].grid) == pytest.approx(1.0, abs=1e-6)
    assert inner_product(basis[1], basis[2], basis[1].grid) == pytest.approx(0.0, abs=1e-12)
    assert kl_basis(50, 0) == []
    with pytest.raises(DomainError):
        kl_basis(50, -1)


def test_gamma_sequences():
    assert_allclose(gamma_sequence(Spacing.WELL_SPACED, 2.0, 4), [1.0, -0.5, 1 / 3, -0.25])
    closely = gamma_sequence(Spacing.CLOSELY_SPACED, 1.1, 12)
    assert closely[0] == 1.0
    assert closely[1] == pytest.approx(-0.19996)
    assert closely[4] == pytest.approx(0.2 * 5 ** -0.55)
    assert closely[10] == pytest.approx(0.2 * (10 ** -0.55 - 0.0001))


def test_slowly_decaying_design_spreads_its_variance():
    variances = gamma_sequence(Spacing.WELL_SPACED, 1.1, 50) ** 2
    assert variances[:5].sum() / variances.sum() == pytest.approx(0.56, abs=0.02)


def test_slope_coefficients_partition():
    b1 = beta_coefficients(BetaChoice.BETA1, 50)
    b2 = beta_coefficients(BetaChoice.BETA2, 50)
    b3 = beta_coefficients(BetaChoice.BETA3, 50)
    assert b1[0] == 1.0
    assert b1[1] == pytest.approx(-1.0)
    assert b1[2] == pytest.approx(4 / 9)
    assert_array_equal(b2 + b3, b1)
    design = SimDesign(m=30)
    total = true_beta(design.model_copy(update={"beta_choice": BetaChoice.BETA1}))
    head = true_beta(design.model_copy(update={"beta_choice": BetaChoice.BETA2}))
    tail = true_beta(design.model_copy(update={"beta_choice": BetaChoice.BETA3}))
    assert_allclose((head + tail).values, total.values, atol=1e-12)


def test_custom_slope():
    design = SimDesign(beta_choice=BetaChoice.CUSTOM, custom_beta=[0.0, 2.0], m=20, n_components=4)
    phi2 = kl_basis(20, 2)[1]
    assert_allclose(true_beta(design).values, 2.0 * phi2.values, atol=1e-12)


def test_design_validation():
    with pytest.raises(ValidationError):
        SimDesign(alpha_decay=1.0)
    with pytest.raises(ValidationError):
        SimDesign(n=1)
    with pytest.raises(ValidationError):
        SimDesign(beta_choice=BetaChoice.CUSTOM)
    with pytest.raises(ValidationError):
        SimDesign(beta_choice=BetaChoice.CUSTOM, custom_beta=[1.0, 2.0, 3.0], n_components=2)


def test_draws_are_reproducible_per_replication(small_design):
    first, _, _ = draw_dataset(small_design, replication=3)
    again, _, _ = draw_dataset(small_design, replication=3)
    other, _, _ = draw_dataset(small_design, replication=4)
    assert_array_equal(first.X, again.X)
    assert_array_equal(first.y, again.y)
    assert not np.array_equal(first.X, other.X)


def test_noiseless_responses_are_exact_inner_products():
    design = SimDesign(beta_choice=BetaChoice.BETA2, n=25, m=20, n_components=8, noise_sd=0.0)
    data, beta, _ = draw_dataset(design)
    assert_allclose(data.y, data.X @ beta.values / data.m, atol=1e-14)


def test_score_variances_follow_gamma():
    design = SimDesign(alpha_decay=2.0, n=10000, m=50, n_components=10, seed=8)
    data, _, _ = draw_dataset(design)
    basis = np.vstack([c.values for c in kl_basis(50, 5)])
    scores = data.X @ basis.T / data.m
    target = gamma_sequence(Spacing.WELL_SPACED, 2.0, 5) ** 2
    sample = scores.var(axis=0, ddof=1)
    se = target * np.sqrt(0.8 / design.n)
    assert np.all(np.abs(sample - target) <= 4 * se)


def test_gaussian_and_degenerate_scores():
    gaussian = SimDesign(n=20, m=10, n_components=3, score_distribution=ScoreDistribution.GAUSSIAN)
    data, _, _ = draw_dataset(gaussian)
    assert data.n == 20
    degenerate = gaussian.model_copy(update={"score_distribution": ScoreDistribution.DEGENERATE})
    data, _, _ = draw_dataset(degenerate)
    assert_allclose(data.X, np.tile(data.X[0], (20, 1)))


def test_empirical_eigenvalues_approach_population():
    design = SimDesign(alpha_decay=2.0, n=5000, m=50, n_components=20, seed=2)
    data, _, split = draw_dataset(design)
    spec = empirical_spectrum(data)
    assert_allclose(spec.eigvals[:5], split.eigvals[:5], rtol=0.05)


def test_measurement_error():
    design = SimDesign(n=5000, m=50, n_components=10, seed=12)
    data, _, _ = draw_dataset(design)
    assert add_measurement_error(data, 0.0, seed=1) is data
    with pytest.raises(DomainError):
        add_measurement_error(data, -0.1, seed=1)
    noisy = add_measurement_error(data, 0.5, seed=1)
    assert_array_equal(noisy.y, data.y)
    assert_array_equal(noisy.X, add_measurement_error(data, 0.5, seed=1).X)
    clean_var = data.X.var(axis=0)
    noisy_var = noisy.X.var(axis=0)
    assert np.mean(noisy_var - clean_var) == pytest.approx(0.25, rel=0.05)


def test_design_measurement_error_is_applied():
    design = SimDesign(n=30, m=20, n_components=5, measurement_error_sd=0.3, seed=5)
    clean = design.model_copy(update={"measurement_error_sd": 0.0})
    noisy, _, _ = draw_dataset(design)
    plain, _, _ = draw_dataset(clean)
    assert_array_equal(noisy.y, plain.y)
    assert not np.allclose(noisy.X, plain.X)


def test_population_split_drops_vanishing_cosine():
    design = SimDesign(m=50, n_components=50)
    split = population_split(design)
    assert split.J == 49
    assert split.r == design.split_r
    assert_allclose(split.eigvals, gamma_sequence(Spacing.WELL_SPACED, 2.0, 49) ** 2)


def test_population_split_on_endpoint_grid():
    design = SimDesign(m=20, n_components=10, grid=GridConvention.ENDPOINT, split_r=2)
    split = population_split(design)
    assert split.J == 10
    gram = split.eigfuns @ split.eigfuns.T / 20
    assert_allclose(gram, np.eye(10), atol=1e-8)
    basis = np.vstack([c.values for c in kl_basis(20, 10, GridConvention.ENDPOINT)])
    variances = gamma_sequence(Spacing.WELL_SPACED, 2.0, 10) ** 2
    expected_trace = np.sum(variances * np.mean(basis ** 2, axis=1))
    assert split.eigvals.sum() == pytest.approx(expected_trace, rel=1e-10)


def test_population_model_of_a_design():
    design = SimDesign(m=50, n_components=50, noise_sd=2.0)
    model = population_model(design, split_r=3)
    assert model.split_r == 3
    assert model.sigma2 == pytest.approx(4.0)
    assert_allclose(model.coeff_kurtosis, 0.8)
    assert_allclose(model.beta_coeffs, beta_coefficients(BetaChoice.BETA1, 50)[:49], atol=1e-12)


def test_short_expansion_reveals_every_component():
    design = SimDesign(n=20, m=10, n_components=3)
    assert design.split_r > design.n_components
    data, _, split = draw_dataset(design)
    assert data.n == 20
    assert split.r == 3
    assert split.J == 3
    with pytest.raises(DomainError):
        population_split(design)
