import logging
import time
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from tqdm import tqdm

from ..gmconfig import FitConfig
from ..gmdata import GroupedDataset
from ..gmdisparity import (
    DisparityReport,
    FairObjectives,
    LocalSolutions,
    choose_gamma,
    disparity_report,
    group_losses,
)
from ..gmerror import ConvergenceWarning, SolverError, UnsupportedPenaltyGradient
from ..gmestimate import GraphEstimate
from ..gmmodels import ModelInput, ModelKind, initial_matrix, is_positive_definite, model_inputs
from ..gmtype import FeasibleSet, ModelName, TraceRecord
from .ista import IterCallback, StepSchedule, feasible_start, fit_locals, fit_single, line_search, soft_threshold
from .simplex import project_simplex

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimplexWeights:
    rho: np.ndarray

    def __post_init__(self) -> None:
        rho = np.asarray(self.rho, dtype=np.float64)
        if rho.ndim != 1 or np.any(rho < -1e-12) or np.any(rho > 1 + 1e-12) or abs(rho.sum() - 1.0) > 1e-10:
            msg = f"Invalid value of 'rho', (expected a point of the probability simplex, got {rho})"
            raise ValueError(msg)
        object.__setattr__(self, "rho", np.clip(rho, 0.0, 1.0))

    @property
    def M(self) -> int:
        return self.rho.shape[0]


@dataclass(frozen=True)
class SubproblemSolution:
    """
    Minimizer ``phi_next`` of max_k psi_k over symmetric matrices, where
    psi_k(phi) = <grad f_k, phi - theta> + g(phi) - g(theta) + ell/2 ||phi - theta||_F^2,
    together with the dual weights that produce it.
    """

    phi_next: np.ndarray
    rho: SimplexWeights
    omega: float
    varphi: float
    psi: np.ndarray
    iterations: int
    is_pd: bool | None = None

    @property
    def gap(self) -> float:
        return self.varphi - self.omega


def _recover(theta: np.ndarray, grads: np.ndarray, rho: np.ndarray, ell: float, lam: float) -> np.ndarray:
    v = np.tensordot(rho, grads, axes=1)
    return soft_threshold(theta - v / ell, lam / ell)


def _psi(theta: np.ndarray, grads: np.ndarray, phi: np.ndarray, ell: float, lam: float) -> np.ndarray:
    step = phi - theta
    linear = np.einsum("kij,ij->k", grads, step)
    return linear + lam * (np.abs(phi).sum() - np.abs(theta).sum()) + 0.5 * ell * float(np.sum(np.square(step)))


def _evaluate(theta, grads, rho, ell, lam) -> tuple[np.ndarray, np.ndarray, float]:
    phi = _recover(theta, grads, rho, ell, lam)
    psi = _psi(theta, grads, phi, ell, lam)
    return phi, psi, float(rho @ psi)


def _solve_two(theta, grads, ell, lam) -> tuple[np.ndarray, int]:
    # the derivative of the dual along the simplex is psi_1 - psi_2, nonincreasing in rho_1
    count = 0

    def slope(r: float) -> float:
        nonlocal count
        count += 1
        _, psi, _ = _evaluate(theta, grads, np.array([r, 1.0 - r]), ell, lam)
        return float(psi[0] - psi[1])

    s0, s1 = slope(0.0), slope(1.0)
    if s0 <= 0:
        r = 0.0
    elif s1 >= 0:
        r = 1.0
    else:
        r = brentq(slope, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return np.array([r, 1.0 - r]), count


def _solve_many(theta, grads, ell, lam, max_iter, tol) -> tuple[np.ndarray, int]:
    M = grads.shape[0]
    gram = np.einsum("kij,lij->kl", grads, grads)
    lipschitz = float(np.linalg.eigvalsh(gram)[-1]) / ell
    rho = np.full(M, 1.0 / M)
    if lipschitz <= 0:
        return rho, 0

    step = 1.0 / lipschitz
    y, t = rho.copy(), 1.0
    best_rho, best_omega = rho, -np.inf
    it = 0
    for it in range(1, max_iter + 1):
        _, psi_y, _ = _evaluate(theta, grads, y, ell, lam)
        rho_next = project_simplex(y + step * psi_y)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = rho_next + ((t - 1.0) / t_next) * (rho_next - rho)
        rho, t = rho_next, t_next

        _, psi, omega = _evaluate(theta, grads, rho, ell, lam)
        if omega > best_omega:
            best_rho, best_omega = rho, omega
        if float(psi.max()) - omega <= tol * (1.0 + abs(omega)):
            break
    return best_rho, it


def solve_subproblem(
    theta: np.ndarray,
    grads: np.ndarray,
    ell: float,
    lam: float,
    feasible_set: FeasibleSet = "symmetric",
    dual_max_iter: int = 500,
    dual_tol: float = 1e-8,
) -> SubproblemSolution:
    """
    Solve the proximal multi-objective subproblem through its dual over the simplex.

    One objective is a plain proximal gradient step, two objectives reduce to a scalar root
    search, and more use accelerated projected gradient ascent on the dual weights.
    """
    grads_ndarray = np.asarray(grads, dtype=np.float64)
    if grads_ndarray.ndim == 2:
        grads_ndarray = grads_ndarray[np.newaxis]
    if grads_ndarray.shape[1:] != theta.shape:
        msg = f"Invalid shape of 'grads', (expected M matrices of shape {theta.shape}, got {grads_ndarray.shape})"
        raise ValueError(msg)
    if not np.all(np.isfinite(grads_ndarray)):
        msg = "Gradients contain non-finite entries"
        raise SolverError(msg)
    if ell <= 0:
        msg = f"Invalid value of 'ell', (expected > 0, got {ell})"
        raise ValueError(msg)

    M = grads_ndarray.shape[0]
    if M == 1:
        rho, iterations = np.ones(1), 0
    elif M == 2:
        rho, iterations = _solve_two(theta, grads_ndarray, ell, lam)
    else:
        rho, iterations = _solve_many(theta, grads_ndarray, ell, lam, dual_max_iter, dual_tol)

    phi, psi, omega = _evaluate(theta, grads_ndarray, rho, ell, lam)
    is_pd = is_positive_definite(phi) if feasible_set == "symmetric_pd" else None
    return SubproblemSolution(
        phi_next=phi,
        rho=SimplexWeights(rho),
        omega=omega,
        varphi=float(psi.max()),
        psi=psi,
        iterations=iterations,
        is_pd=is_pd,
    )


def pareto_residual(
    theta: np.ndarray,
    grads: np.ndarray,
    ell: float,
    lam: float,
    dual_max_iter: int = 500,
    dual_tol: float = 1e-8,
) -> float:
    """Optimal value of the subproblem at ``theta``; it is <= 0 and vanishes at Pareto stationary points."""
    sol = solve_subproblem(theta, grads, ell, lam, dual_max_iter=dual_max_iter, dual_tol=dual_tol)
    return sol.omega


def _initial_iterate(
    model: ModelName, pooled: ModelInput, groups: tuple[ModelInput, ...], local: LocalSolutions, config: FitConfig
) -> tuple[np.ndarray, int | None]:
    if config.init == "pooled":
        return fit_single(model, pooled, config).matrix, None
    if config.init == "identity":
        return np.eye(pooled.P), None
    # the local graph whose own group carries the largest pairwise disparity
    penalty = config.penalty_kind
    scores = np.array(
        [
            disparity_report(local.theta(k), local, groups, penalty, config.tau).pairwise[k - 1]
            for k in range(1, local.K + 1)
        ]
    )
    k_star = int(np.argmax(scores)) + 1
    return local.theta(k_star).copy(), k_star


def fit_fair(
    model: ModelName,
    ds: GroupedDataset,
    config: FitConfig,
    local: LocalSolutions | None = None,
    fair: bool = True,
    callback: IterCallback | None = None,
) -> tuple[GraphEstimate, DisparityReport]:
    """
    Multi-objective proximal gradient fit of the pooled loss together with every group's
    pairwise disparity.

    With one group the problem is a single penalized fit. ``fair=False`` keeps the pooled loss
    as the only objective and runs the same loop, which then reduces to ISTA.

    With several objectives the loop stops once the Pareto residual of the new iterate, taken at
    the fixed ``ell0``, is within ``eps`` of zero, or once the gradient map
    ``ell * ||theta+ - theta||_F`` drops below ``eps * (1 + ||theta||_F)``. Both measures are free
    of the ``ell`` the line search happened to accept. A stalled line search is reported in
    ``info["stalled"]`` and is not by itself convergence.
    """
    kind = ModelKind(model)
    penalty = config.penalty_kind
    if fair and not penalty.smooth:
        msg = f"Penalty {penalty.name!r} is evaluation-only, (expected 'square' or 'exp' to fit)"
        raise UnsupportedPenaltyGradient(msg)
    pooled, groups = model_inputs(ds)

    if ds.K == 1:
        est = fit_single(model, pooled, config, callback=callback)
        losses = group_losses(model, est.matrix, groups, config.tau)
        single = LocalSolutions(model, (est.matrix,), losses, config.lam, (est,))
        return est, disparity_report(est.matrix, single, groups, penalty, config.tau)

    if local is None:
        local = fit_locals(model, ds, config)

    tic = time.perf_counter()
    init_group = None
    if fair:
        theta0, init_group = _initial_iterate(model, pooled, groups, local, config)
        if config.gamma is not None:
            gamma = config.gamma
        else:
            gamma = choose_gamma(model, local, groups, [theta0, *local.thetas], config.tau, penalty)
        objectives = FairObjectives(model, pooled, groups, local, config, gamma)
    else:
        theta0, gamma = initial_matrix(model, pooled), 0.0
        objectives = FairObjectives(model, pooled, groups, None, config)

    theta = feasible_start(model, theta0)
    f_theta = objectives.smooth(theta)
    grads = objectives.grads(theta)
    M = objectives.M
    # one objective retraces fit_single step for step
    schedule = StepSchedule.fair(config) if M > 1 else StepSchedule.ista(config)
    logger.info("fit_fair %s: P=%d, K=%d, M=%d, lam=%g, gamma=%g", model, pooled.P, ds.K, M, config.lam, gamma)

    def propose(ell_try: float):
        sol = solve_subproblem(
            theta, grads, ell_try, config.lam, kind.feasible_set, config.dual_max_iter, config.dual_tol
        )
        return sol.phi_next, sol

    trace: list[TraceRecord] = []
    n_pd = n_descent = 0
    ell: float | None = None
    residual = grad_map = np.inf
    converged = stalled = False
    iteration = 0
    pbar = tqdm(range(config.max_iter), desc=f"fair_{model}", leave=False, disable=not config.progress)
    for t in pbar:
        ls = line_search(theta, f_theta, grads, objectives, propose, schedule.start(ell), schedule, kind.requires_pd)
        n_pd += ls.n_pd
        n_descent += ls.n_descent
        ell = ls.ell
        sol: SubproblemSolution = ls.proposal  # type: ignore[assignment]
        stalled = ls.stalled
        if stalled:
            # nothing was accepted, measure the gradient map of the first trial step instead
            trial = propose(schedule.ell0)[0] - theta
            grad_map = schedule.ell0 * float(np.abs(trial).sum() if M == 1 else np.linalg.norm(trial))
        else:
            step = ls.theta - theta
            grad_map = ell * float(np.abs(step).sum() if M == 1 else np.linalg.norm(step))

        theta, f_theta = ls.theta, ls.smooth
        grads = objectives.grads(theta)
        iteration = t + 1
        if M == 1:
            residual = grad_map
            done = residual <= config.eps or (not stalled and grad_map == 0.0)
        else:
            residual = pareto_residual(theta, grads, config.ell0, config.lam, config.dual_max_iter, config.dual_tol)
            done = abs(residual) <= config.eps or grad_map <= config.eps * (1.0 + float(np.linalg.norm(theta)))
        frob = gamma * float(np.sum(np.square(theta)))
        trace.append(
            {
                "iteration": iteration,
                "objectives": f_theta + objectives.l1(theta),
                "delta_total": float(f_theta[1:].sum() - (M - 1) * frob) if M > 1 else float("nan"),
                "rho": sol.rho.rho,
                "ell": ell,
                "residual": residual,
            }
        )
        if callback is not None:
            callback(iteration, theta)
        logger.debug(
            "iter %d: F=%s ell=%.3g residual=%.3g grad_map=%.3g",
            iteration,
            trace[-1]["objectives"],
            ell,
            residual,
            grad_map,
        )

        if done:
            converged = True
            break
        if stalled:
            break

    runtime = time.perf_counter() - tic
    if not converged:
        if stalled:
            msg = f"fit_fair {model} stalled after {iteration} iterations with residual {residual:.3g}"
        else:
            msg = f"fit_fair {model} reached max_iter={config.max_iter} before Pareto stationarity"
        warnings.warn(msg, ConvergenceWarning, stacklevel=2)
    logger.info("fit_fair %s: %d iterations, residual=%.3g, converged=%s", model, iteration, residual, converged)

    est = GraphEstimate(
        theta,
        model,
        is_pd=is_positive_definite(theta),
        trace=trace,
        converged=converged,
        iterations=iteration,
        n_pd_backtracks=n_pd,
        n_descent_backtracks=n_descent,
        runtime=runtime,
        info={
            "gamma": gamma,
            "init_group": init_group,
            "stalled": stalled,
            "residual": residual,
            "grad_map": grad_map,
            "ell": ell,
            "M": M,
            "lam": config.lam,
        },
    )
    return est, disparity_report(theta, local, groups, penalty, config.tau)
