import numpy as np
import pytest
from numpy.testing import assert_allclose

from fairgm.gmconfig import FitConfig, PenaltyKind
from fairgm.gmdata import GroupedDataset
from fairgm.gmdisparity import (
    FairObjectives,
    choose_gamma,
    disparity_error,
    disparity_grad,
    disparity_report,
    group_losses,
    objective_vector,
    pairwise_disparity,
)
from fairgm.gmerror import MissingLocalSolution, UnsupportedPenaltyGradient
from fairgm.gmmodels import model_inputs, model_loss


def _gaussian_local(model, groups, make_local):
    # regularized inverse moments, or the moments themselves for the covariance model
    if model == "glasso":
        thetas = [np.linalg.inv(g.S + 0.1 * np.eye(g.P)) for g in groups]
    else:
        thetas = [g.S + 0.1 * np.eye(g.P) for g in groups]
    return make_local(model, groups, thetas)


def _binary_local(groups, make_local, rng, random_sym):
    return make_local("binnet", groups, [random_sym(rng, groups[0].P, scale=0.2) for _ in groups])


def test_error_vanishes_at_local_graph(gaussian_ds, make_local):
    _, groups = model_inputs(gaussian_ds)
    local = _gaussian_local("glasso", groups, make_local)
    for k in range(1, 4):
        assert disparity_error(local.theta(k), k, local, groups) == pytest.approx(0.0, abs=1e-12)


def test_group_losses_match_model_loss(gaussian_ds, rng, random_pd):
    _, groups = model_inputs(gaussian_ds)
    theta = random_pd(rng, 4)
    for model in ("glasso", "covgraph"):
        expected = [model_loss(model, theta, g, 0.05) for g in groups]
        assert_allclose(group_losses(model, theta, groups, 0.05), expected, rtol=1e-12)


def test_pairwise_disparity_by_hand(gaussian_ds, make_local, rng, random_pd):
    _, groups = model_inputs(gaussian_ds)
    local = _gaussian_local("glasso", groups, make_local)
    theta = random_pd(rng, 4)
    E = [disparity_error(theta, k, local, groups) for k in (1, 2, 3)]
    square = PenaltyKind("square")
    expected = 0.5 * (E[1] - E[0]) ** 2 + 0.5 * (E[1] - E[2]) ** 2
    assert pairwise_disparity(theta, 2, square, local, groups) == pytest.approx(expected)
    expected_exp = np.exp(E[0] - E[1]) + np.exp(E[0] - E[2])
    assert pairwise_disparity(theta, 1, PenaltyKind("exp"), local, groups) == pytest.approx(expected_exp)

    report = disparity_report(theta, local, groups, square)
    assert report.total == pytest.approx(report.pairwise.sum())
    assert report.spread == pytest.approx(max(E) - min(E))
    assert_allclose(report.errors, E)


@pytest.mark.parametrize("model", ["glasso", "covgraph"])
@pytest.mark.parametrize("penalty", ["square", "exp"])
def test_gaussian_disparity_gradient(model, penalty, gaussian_ds, make_local, rng, random_pd, assert_gradient):
    _, groups = model_inputs(gaussian_ds)
    local = _gaussian_local(model, groups, make_local)
    kind = PenaltyKind(penalty)
    for _ in range(20):
        theta = random_pd(rng, 4)
        for k in (1, 2, 3):
            grad = disparity_grad(theta, k, kind, local, groups)
            assert_gradient(lambda m: pairwise_disparity(m, k, kind, local, groups), grad, theta, rng, n_dir=1)


@pytest.mark.parametrize("penalty", ["square", "exp"])
def test_binnet_disparity_gradient(penalty, binary_ds, make_local, rng, random_sym, assert_gradient):
    _, groups = model_inputs(binary_ds)
    local = _binary_local(groups, make_local, rng, random_sym)
    kind = PenaltyKind(penalty)
    for _ in range(20):
        theta = random_sym(rng, 4, scale=0.2)
        for k in (1, 2, 3):
            grad = disparity_grad(theta, k, kind, local, groups)
            assert_gradient(lambda m: pairwise_disparity(m, k, kind, local, groups), grad, theta, rng, n_dir=1)


def test_identical_groups_have_no_disparity(rng, make_local):
    X = rng.normal(size=(30, 3))
    ds = GroupedDataset(np.vstack([X, X]), np.repeat([1, 2], 30))
    _, groups = model_inputs(ds)
    local = _gaussian_local("glasso", groups, make_local)
    theta = np.eye(3) * 1.5
    report = disparity_report(theta, local, groups)
    assert report.total == pytest.approx(0.0, abs=1e-20)
    assert_allclose(disparity_grad(theta, 1, PenaltyKind(), local, groups), 0.0, atol=1e-12)


def test_abs_penalty_is_evaluation_only(gaussian_ds, make_local):
    _, groups = model_inputs(gaussian_ds)
    local = _gaussian_local("glasso", groups, make_local)
    theta = np.eye(4)
    assert pairwise_disparity(theta, 1, PenaltyKind("abs"), local, groups) >= 0.0
    with pytest.raises(UnsupportedPenaltyGradient):
        disparity_grad(theta, 1, PenaltyKind("abs"), local, groups)


def test_missing_local_solutions(gaussian_ds, make_local):
    _, groups = model_inputs(gaussian_ds)
    local = _gaussian_local("glasso", groups, make_local)
    with pytest.raises(MissingLocalSolution):
        local.theta(4)
    with pytest.raises(KeyError):
        disparity_report(np.eye(4), None, groups)
    with pytest.raises(MissingLocalSolution):
        disparity_report(np.eye(4), local, groups[:2])


def test_pairwise_needs_two_groups(gaussian_ds, make_local):
    _, groups = model_inputs(gaussian_ds)
    local = _gaussian_local("glasso", groups[:1], make_local)
    with pytest.raises(ValueError):
        pairwise_disparity(np.eye(4), 1, PenaltyKind(), local, groups[:1])


def test_objective_vector(gaussian_ds, make_local, rng, random_pd):
    pooled, groups = model_inputs(gaussian_ds)
    local = _gaussian_local("glasso", groups, make_local)
    config = FitConfig(lam=0.05)
    theta = random_pd(rng, 4)
    fair = objective_vector(theta, "glasso", config, local, pooled, groups, gamma=0.2)
    assert fair.M == 4
    l1 = 0.05 * np.abs(theta).sum()
    assert fair[0] == pytest.approx(model_loss("glasso", theta, pooled) + l1)
    frob = 0.2 * np.sum(theta**2)
    assert fair[2] == pytest.approx(pairwise_disparity(theta, 2, PenaltyKind(), local, groups) + l1 + frob)
    assert fair.frob[0] == 0.0

    single = objective_vector(theta, "glasso", config, None, pooled, groups)
    assert single.M == 1
    assert single[0] == pytest.approx(fair[0])


def test_fair_objective_gradients_with_frobenius_term(gaussian_ds, make_local, rng, random_pd, assert_gradient):
    pooled, groups = model_inputs(gaussian_ds)
    local = _gaussian_local("glasso", groups, make_local)
    objectives = FairObjectives("glasso", pooled, groups, local, FitConfig(), gamma=0.3)
    theta = random_pd(rng, 4)
    grads = objectives.grads(theta)
    assert grads.shape == (4, 4, 4)
    for k in range(4):
        assert_gradient(lambda m: objectives.smooth(m)[k], grads[k], theta, rng)


def test_choose_gamma(binary_ds, gaussian_ds, make_local, rng, random_sym):
    _, groups = model_inputs(gaussian_ds)
    local = _gaussian_local("glasso", groups, make_local)
    assert choose_gamma("glasso", local, groups, [np.eye(4)]) == 0.0

    _, groups = model_inputs(binary_ds)
    local = _binary_local(groups, make_local, rng, random_sym)
    samples = [np.zeros((4, 4)), *local.thetas]
    gamma = choose_gamma("binnet", local, groups, samples)
    assert gamma >= 0.0

    # with gamma added every disparity objective has a positive semidefinite Hessian at the samples
    config = FitConfig()
    objectives = FairObjectives("binnet", groups[0], groups, local, config, gamma=gamma + 1e-3)
    theta = samples[1]
    h = 1e-4
    for k in range(1, 4):
        for _ in range(5):
            D = random_sym(rng, 4)
            D /= np.linalg.norm(D)
            second = objectives.smooth(theta + h * D)[k] - 2 * objectives.smooth(theta)[k]
            second += objectives.smooth(theta - h * D)[k]
            assert second / h**2 >= -1e-4
