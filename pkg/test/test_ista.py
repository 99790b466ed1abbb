import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from fairgm.gmconfig import FitConfig
from fairgm.gmdata import GroupedDataset
from fairgm.gmdisparity import FairObjectives
from fairgm.gmerror import ConvergenceWarning, NotPositiveDefinite, SolverError
from fairgm.gmmodels import ModelInput, covgraph_grad, model_inputs, model_loss
from fairgm.gmsolver import fit_locals, fit_single, soft_threshold, solve_subproblem
from fairgm.gmsolver.ista import StepSchedule, feasible_start, line_search


@pytest.fixture
def normal_ds(rng):
    X = rng.normal(size=(400, 3))
    return GroupedDataset(X, np.repeat([1, 2], 200))


def _objectives(trace):
    return np.array([record["objectives"] for record in trace])


def test_soft_threshold():
    m = np.array([-3.0, -0.5, 0.0, 0.5, 3.0])
    assert_array_equal(soft_threshold(m, 1.0), [-2.0, 0.0, 0.0, 0.0, 2.0])
    assert_array_equal(soft_threshold(m, 0.0), m)
    with pytest.raises(ValueError):
        soft_threshold(m, -1.0)


def test_step_schedules():
    fair = StepSchedule.fair(FitConfig(ell0=1e-2, ell_decay=0.1, ell_max=1e3))
    assert fair.start(None) == 1e-2
    assert fair.start(10.0) == pytest.approx(1.0)
    assert fair.start(0.05) == 1e-2
    assert StepSchedule.fair(FitConfig(ell0=1e-2, ell_decay=1.0, ell_max=1e3)).start(1e5) == 1e3

    ista = StepSchedule.ista(FitConfig())
    assert (ista.ell0, ista.growth) == (1.0, 2.0)
    assert ista.start(None) == ista.start(64.0) == 1.0


def test_step_backtracks_from_one_by_halving(gaussian_ds):
    est = fit_single("glasso", gaussian_ds, FitConfig(lam=0.05))
    ells = np.array([record["ell"] for record in est.trace])
    assert np.all(ells >= 1.0)
    assert_array_equal(np.exp2(np.round(np.log2(ells))), ells)


def test_unpenalized_glasso_recovers_inverse_moment(normal_ds):
    pooled, _ = model_inputs(normal_ds)
    est = fit_single("glasso", pooled, FitConfig(lam=0.0, eps=1e-10))
    assert est.converged and est.is_pd
    assert_allclose(est.matrix, np.linalg.inv(pooled.S), atol=1e-6)


def test_large_penalty_gives_diagonal_estimate(normal_ds):
    pooled, _ = model_inputs(normal_ds)
    assert np.max(np.abs(pooled.S - np.diag(np.diag(pooled.S)))) < 1.0
    est = fit_single("glasso", pooled, FitConfig(lam=1.0, eps=1e-10))
    off = est.matrix - np.diag(np.diag(est.matrix))
    assert_array_equal(off, 0.0)
    # the penalty covers the diagonal too: S_jj - 1/theta_jj + lam = 0
    assert_allclose(np.diag(est.matrix), 1.0 / (np.diag(pooled.S) + 1.0), rtol=1e-6)


def test_covgraph_is_stationary(normal_ds):
    pooled, _ = model_inputs(normal_ds)
    est = fit_single("covgraph", pooled, FitConfig(lam=0.0, tau=0.05, eps=1e-10))
    assert est.converged
    assert np.abs(covgraph_grad(est.matrix, pooled.S, 0.05)).sum() < 1e-6


def test_raw_gradient_stop_rule(normal_ds):
    pooled, _ = model_inputs(normal_ds)
    est = fit_single("glasso", pooled, FitConfig(lam=0.0, eps=1e-8, stop_rule="raw_gradient"))
    assert est.converged
    assert_allclose(est.matrix, np.linalg.inv(pooled.S), atol=1e-6)


@pytest.mark.parametrize("model", ["glasso", "covgraph"])
def test_objective_never_increases(model, gaussian_ds):
    est = fit_single(model, gaussian_ds, FitConfig(lam=0.05))
    F = _objectives(est.trace)[:, 0]
    assert len(F) == est.iterations
    assert np.all(np.diff(F) <= 1e-10)
    assert_array_equal([r["rho"] for r in est.trace], np.ones((est.iterations, 1)))
    assert all(np.isnan(r["delta_total"]) for r in est.trace)


def test_binnet_fit(binary_ds):
    est = fit_single("binnet", binary_ds, FitConfig(lam=0.01))
    assert est.converged
    assert np.all(np.isfinite(est.matrix))
    assert np.all(np.diff(_objectives(est.trace)[:, 0]) <= 1e-10)


def test_callback_sees_every_iterate(gaussian_ds):
    seen = []
    est = fit_single("glasso", gaussian_ds, FitConfig(lam=0.05), callback=lambda t, theta: seen.append(t))
    assert seen == list(range(1, est.iterations + 1))


def test_iteration_cap_warns(gaussian_ds):
    with pytest.warns(ConvergenceWarning):
        est = fit_single("glasso", gaussian_ds, FitConfig(lam=0.01, max_iter=1))
    assert est.not_converged
    assert est.iterations == 1


def test_infeasible_start():
    with pytest.raises(NotPositiveDefinite):
        feasible_start("glasso", -np.eye(3))
    assert_array_equal(feasible_start("binnet", -np.eye(3)), -np.eye(3))


def test_line_search_gives_up_on_infeasible_proposals():
    inp = ModelInput(S=np.eye(2), n=10)
    config = FitConfig(ell0=1.0, ell_max=1e3)
    oracle = FairObjectives("glasso", inp, (), None, config)
    schedule = StepSchedule.fair(config)
    theta = np.eye(2)
    with pytest.raises(SolverError):
        line_search(
            theta,
            oracle.smooth(theta),
            oracle.grads(theta),
            oracle,
            lambda ell: (-np.eye(2), None),
            1.0,
            schedule,
            requires_pd=True,
        )


class _OverflowingOracle:
    """Quadratic model whose objective overflows everywhere except at the start."""

    lam = 0.0

    def __init__(self, start: np.ndarray):
        self.start = start

    def smooth(self, theta):
        return np.array([0.0 if np.array_equal(theta, self.start) else np.inf])

    def grads(self, theta):
        return (theta - 2.0 * np.eye(theta.shape[0]))[np.newaxis]

    def l1(self, theta):
        return 0.0


def test_line_search_raises_on_persistent_overflow():
    theta = np.eye(2)
    oracle = _OverflowingOracle(theta)
    grads = oracle.grads(theta)
    with pytest.raises(SolverError, match="non-finite"):
        line_search(
            theta,
            oracle.smooth(theta),
            grads,
            oracle,
            lambda ell: (theta - grads[0] / ell, None),
            1.0,
            StepSchedule(1.0, 2.0, None, 1e3),
            requires_pd=False,
        )


def test_stalled_fit_is_not_converged(binary_ds):
    # a single trial step of length 1e4 cannot decrease the objective
    config = FitConfig(lam=0.01, step0=1e4, ell0=1e-4, ell_max=1e-4)
    with pytest.warns(ConvergenceWarning, match="stalled"):
        est = fit_single("binnet", binary_ds, config)
    assert est.info["stalled"]
    assert est.not_converged
    assert est.iterations == 1
    assert_array_equal(est.matrix, 0.0)
    assert est.trace[-1]["residual"] > config.eps


def test_prox_step_satisfies_descent_bound(rng, random_pd):
    for _ in range(20):
        S = random_pd(rng, 4, shift=0.2)
        theta = random_pd(rng, 4)
        grads = (S - np.linalg.inv(theta))[np.newaxis]
        ell, lam = rng.uniform(0.5, 5.0), rng.uniform(0.0, 0.3)
        sol = solve_subproblem(theta, grads, ell, lam)
        step = sol.phi_next - theta
        assert sol.varphi <= -0.5 * ell * np.sum(step**2) + 1e-12


def test_fit_locals(gaussian_ds, monkeypatch):
    config = FitConfig(lam=0.05)
    monkeypatch.delenv("FAIRGM_THREADS", raising=False)
    local = fit_locals("glasso", gaussian_ds, config)
    assert local.K == 3
    _, groups = model_inputs(gaussian_ds)
    for k in range(1, 4):
        assert local.losses[k - 1] == pytest.approx(model_loss("glasso", local.theta(k), groups[k - 1]))
        single = fit_single("glasso", groups[k - 1], config)
        assert_allclose(local.theta(k), single.matrix, atol=1e-12)

    monkeypatch.setenv("FAIRGM_THREADS", "3")
    threaded = fit_locals("glasso", gaussian_ds, config)
    for a, b in zip(local.thetas, threaded.thetas):
        assert_allclose(a, b, atol=1e-12)
