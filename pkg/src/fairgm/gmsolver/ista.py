import logging
import time
import warnings
from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np
from tqdm import tqdm
from tqdm.contrib.concurrent import thread_map

from ..gmconfig import FitConfig, worker_count
from ..gmdata import GroupedDataset
from ..gmdisparity import FairObjectives, LocalSolutions
from ..gmerror import ConvergenceWarning, NotPositiveDefinite, SolverError
from ..gmestimate import GraphEstimate
from ..gmmodels import (
    ModelInput,
    ModelKind,
    initial_matrix,
    is_positive_definite,
    model_grad,
    model_inputs,
    model_loss,
    project_feasible,
)
from ..gmtype import ModelName, TraceRecord

logger = logging.getLogger(__name__)

IterCallback = Callable[[int, np.ndarray], None]


class SmoothOracle(Protocol):
    lam: float

    def smooth(self, theta: np.ndarray) -> np.ndarray: ...

    def grads(self, theta: np.ndarray) -> np.ndarray: ...

    def l1(self, theta: np.ndarray) -> float: ...


@dataclass
class IstaState:
    theta: np.ndarray
    step: float
    iteration: int
    objective: float


@dataclass
class LineSearchResult:
    theta: np.ndarray
    smooth: np.ndarray
    ell: float
    proposal: object
    n_pd: int
    n_descent: int
    stalled: bool


def soft_threshold(m: np.ndarray, t: float) -> np.ndarray:
    """sign(m) * max(|m| - t, 0), the proximal map of t * ||.||_1"""
    if t < 0:
        msg = f"Invalid value of 't', (expected >= 0, got {t})"
        raise ValueError(msg)
    m_ndarray = np.asarray(m, dtype=np.float64)
    return np.sign(m_ndarray) * np.maximum(np.abs(m_ndarray) - t, 0.0)


def _sufficient_decrease(
    f_old: np.ndarray,
    f_new: np.ndarray,
    grads: np.ndarray,
    step: np.ndarray,
    ell: float,
    g_old: float,
    g_new: float,
) -> bool:
    """Descent-lemma test for every smooth part and no increase of any composite objective."""
    linear = np.einsum("kij,ij->k", grads, step)
    quad = 0.5 * ell * float(np.sum(np.square(step)))
    slack = 1e-12 * np.maximum(1.0, np.abs(f_old))
    upper = f_old + linear + quad + slack
    if np.any(f_new > upper):
        return False
    return bool(np.all(f_new + g_new <= f_old + g_old))


@dataclass(frozen=True)
class StepSchedule:
    """
    Backtracking schedule over ``ell``, the inverse step.

    Each iteration starts at ``start(ell_prev)`` and multiplies ``ell`` by ``growth`` per rejected
    proposal. With ``decay=None`` every iteration restarts from ``ell0``.
    """

    ell0: float
    growth: float
    decay: float | None
    ell_max: float

    @classmethod
    def ista(cls, config: FitConfig) -> "StepSchedule":
        """Step ``step0`` halved (by default) until accepted, from scratch at every iteration."""
        return cls(1.0 / config.step0, 1.0 / config.step_shrink, None, config.ell_max)

    @classmethod
    def fair(cls, config: FitConfig) -> "StepSchedule":
        return cls(config.ell0, config.ell_growth, config.ell_decay, config.ell_max)

    def start(self, ell_prev: float | None) -> float:
        if ell_prev is None or self.decay is None:
            return self.ell0
        return min(max(self.ell0, ell_prev * self.decay), self.ell_max)


def line_search(
    theta: np.ndarray,
    f_theta: np.ndarray,
    grads: np.ndarray,
    oracle: SmoothOracle,
    propose: Callable[[float], tuple[np.ndarray, object]],
    ell_start: float,
    schedule: StepSchedule,
    requires_pd: bool,
) -> LineSearchResult:
    """
    Grow ``ell`` by ``schedule.growth`` until the proposal is feasible and decreases every objective.

    A proposal that stays infeasible or non-finite beyond ``schedule.ell_max`` raises
    ``SolverError``. When only the descent test keeps failing the iterate is returned unchanged
    and flagged as stalled: no representable step improves on it.
    """
    ell = ell_start
    n_pd = n_descent = 0
    g_theta = oracle.l1(theta)
    last_failure = ""
    while ell <= schedule.ell_max:
        candidate, proposal = propose(ell)
        if requires_pd:
            if not is_positive_definite(candidate):
                n_pd += 1
                last_failure = "pd"
                logger.debug("ell=%.3g: candidate is not positive definite", ell)
                ell *= schedule.growth
                continue
        try:
            f_new = oracle.smooth(candidate)
        except NotPositiveDefinite:
            n_pd += 1
            last_failure = "pd"
            ell *= schedule.growth
            continue
        if not np.all(np.isfinite(f_new)):
            n_descent += 1
            last_failure = "nonfinite"
            logger.debug("ell=%.3g: objective is not finite", ell)
            ell *= schedule.growth
            continue
        if _sufficient_decrease(f_theta, f_new, grads, candidate - theta, ell, g_theta, oracle.l1(candidate)):
            return LineSearchResult(candidate, f_new, ell, proposal, n_pd, n_descent, False)
        n_descent += 1
        last_failure = "descent"
        logger.debug("ell=%.3g: descent test failed", ell)
        ell *= schedule.growth

    if last_failure == "pd":
        msg = f"Iterate stays infeasible for ell up to {schedule.ell_max:.3g} ({n_pd} positive-definiteness failures)"
        raise SolverError(msg)
    if last_failure == "nonfinite":
        msg = f"Objectives stay non-finite for ell up to {schedule.ell_max:.3g}"
        raise SolverError(msg)
    _, proposal = propose(ell / schedule.growth)
    return LineSearchResult(theta, f_theta, ell / schedule.growth, proposal, n_pd, n_descent, True)


def _as_input(model: ModelName, data: GroupedDataset | ModelInput) -> ModelInput:
    if isinstance(data, ModelInput):
        return data
    pooled, _ = model_inputs(data)
    return pooled


def feasible_start(model: ModelName, theta0: np.ndarray) -> np.ndarray:
    theta, feasible = project_feasible(theta0, model)
    if not feasible:
        msg = f"Invalid initial iterate, (expected a positive definite matrix for {model})"
        raise NotPositiveDefinite(msg)
    return theta


def fit_single(
    model: ModelName,
    data: GroupedDataset | ModelInput,
    config: FitConfig,
    theta0: np.ndarray | None = None,
    callback: IterCallback | None = None,
) -> GraphEstimate:
    """
    Proximal gradient (ISTA) fit of one penalized graphical model on pooled data or a group slice.

    Every iteration backtracks the step from ``config.step0``, shrinking it by ``config.step_shrink``
    until the proposal is feasible and decreases the objective. Iterations stop when the composite
    gradient map ``||theta+ - theta||_1 / step`` (or, with ``stop_rule="raw_gradient"``, the raw
    loss gradient) drops below ``eps``. A stalled line search is flagged in ``info["stalled"]``
    and only counts as converged when the stopping rule holds at the stalled iterate.
    """
    kind = ModelKind(model)
    inp = _as_input(model, data)
    oracle = FairObjectives(model, inp, (), None, config)
    schedule = StepSchedule.ista(config)
    theta = feasible_start(model, theta0 if theta0 is not None else initial_matrix(model, inp))

    tic = time.perf_counter()
    f_theta = oracle.smooth(theta)
    grads = oracle.grads(theta)
    state = IstaState(theta=theta, step=config.step0, iteration=0, objective=float(f_theta[0]) + oracle.l1(theta))
    trace: list[TraceRecord] = []
    n_pd = n_descent = 0
    ell: float | None = None
    converged = stalled = False
    logger.info("fit_single %s: P=%d, n=%d, lam=%g", model, inp.P, inp.n, config.lam)

    def propose(ell_try: float):
        return soft_threshold(theta - grads[0] / ell_try, config.lam / ell_try), None

    pbar = tqdm(range(config.max_iter), desc=f"ista_{model}", leave=False, disable=not config.progress)
    for t in pbar:
        ls = line_search(theta, f_theta, grads, oracle, propose, schedule.start(ell), schedule, kind.requires_pd)
        n_pd += ls.n_pd
        n_descent += ls.n_descent
        ell = ls.ell
        step = ls.theta - theta
        if ls.stalled:
            # nothing was accepted, measure the gradient map of the first trial step instead
            stalled = True
            residual = schedule.ell0 * float(np.abs(propose(schedule.ell0)[0] - theta).sum())
        else:
            residual = ell * float(np.abs(step).sum())

        theta, f_theta = ls.theta, ls.smooth
        grads = oracle.grads(theta)
        state = IstaState(theta=theta, step=1.0 / ell, iteration=t + 1, objective=float(f_theta[0]) + oracle.l1(theta))
        trace.append(
            {
                "iteration": t + 1,
                "objectives": np.array([state.objective]),
                "delta_total": float("nan"),
                "rho": np.ones(1),
                "ell": ell,
                "residual": residual,
            }
        )
        if callback is not None:
            callback(t + 1, theta)
        logger.debug("iter %d: F=%.12g ell=%.3g residual=%.3g", t + 1, state.objective, ell, residual)

        if config.stop_rule == "gradient_map":
            stop_value = residual
        else:
            stop_value = float(np.abs(model_grad(model, theta, inp, config.tau)).sum())
        # a fixed point of the prox step is stationary whatever the raw gradient says
        if stop_value <= config.eps or (not ls.stalled and not np.any(step)):
            converged = True
            break
        if ls.stalled:
            break

    runtime = time.perf_counter() - tic
    if not converged:
        if stalled:
            msg = f"fit_single {model} stalled after {state.iteration} iterations with residual {residual:.3g}"
        else:
            msg = f"fit_single {model} reached max_iter={config.max_iter} before the stopping rule held"
        warnings.warn(msg, ConvergenceWarning, stacklevel=2)
    logger.info(
        "fit_single %s: %d iterations, F=%.10g, converged=%s", model, state.iteration, state.objective, converged
    )

    return GraphEstimate(
        theta,
        model,
        is_pd=is_positive_definite(theta),
        trace=trace,
        converged=converged,
        iterations=state.iteration,
        n_pd_backtracks=n_pd,
        n_descent_backtracks=n_descent,
        runtime=runtime,
        info={"stalled": stalled, "objective": state.objective, "lam": config.lam},
    )


def fit_locals(model: ModelName, ds: GroupedDataset, config: FitConfig) -> LocalSolutions:
    """One penalized fit per group, with each group's raw loss at its own optimum."""
    _, groups = model_inputs(ds)

    def _fit(inp: ModelInput) -> GraphEstimate:
        return fit_single(model, inp, config)

    workers = min(worker_count(), len(groups))
    if workers > 1:
        estimates = thread_map(_fit, groups, max_workers=workers, disable=not config.progress, leave=False)
    else:
        estimates = [_fit(inp) for inp in groups]
    thetas = tuple(est.matrix for est in estimates)
    losses = np.array([model_loss(model, th, inp, config.tau) for th, inp in zip(thetas, groups)])
    return LocalSolutions(model=model, thetas=thetas, losses=losses, lam=config.lam, estimates=tuple(estimates))
