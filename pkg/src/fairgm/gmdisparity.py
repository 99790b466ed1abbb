import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import eigvalsh
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .gmconfig import FitConfig, PenaltyKind
from .gmerror import MissingLocalSolution, UnsupportedPenaltyGradient
from .gmestimate import GraphEstimate, ObjectiveVector
from .gmmodels import ModelInput, model_grad, model_loss, smat, svec
from .gmmodels.feasible import pd_factor, pd_logdet
from .gmtype import ModelName

logger = logging.getLogger(__name__)

DENSE_HESSIAN_MAX_DIM = 400


@dataclass(frozen=True)
class LocalSolutions:
    """Per-group optimal graphs and their raw losses, ordered by group id."""

    model: ModelName
    thetas: tuple[np.ndarray, ...]
    losses: np.ndarray
    lam: float
    estimates: tuple[GraphEstimate, ...] = field(default=(), repr=False)

    def __post_init__(self) -> None:
        if len(self.thetas) != len(self.losses):
            msg = f"Invalid lengths of 'thetas' and 'losses', (got {len(self.thetas)} and {len(self.losses)})"
            raise ValueError(msg)

    @property
    def K(self) -> int:
        return len(self.thetas)

    def theta(self, k: int) -> np.ndarray:
        """Local graph of group ``k`` (1-based id)."""
        if not 1 <= k <= self.K:
            msg = f"No local solution for group {k}, (have groups 1..{self.K})"
            raise MissingLocalSolution(msg)
        return self.thetas[k - 1]


@dataclass(frozen=True)
class DisparityReport:
    errors: np.ndarray
    pairwise: np.ndarray
    total: float
    spread: float

    def to_dict(self) -> dict:
        return {
            "errors": self.errors.tolist(),
            "pairwise": self.pairwise.tolist(),
            "total": self.total,
            "spread": self.spread,
        }


def _check_local(local: LocalSolutions | None, groups: Sequence[ModelInput]) -> LocalSolutions:
    if local is None:
        msg = "Graph disparity needs the local solutions of every group"
        raise MissingLocalSolution(msg)
    if local.K != len(groups):
        msg = f"Local solutions do not match the groups, (expected {len(groups)}, got {local.K})"
        raise MissingLocalSolution(msg)
    return local


def group_losses(model: ModelName, theta: np.ndarray, groups: Sequence[ModelInput], tau: float = 0.01) -> np.ndarray:
    """Raw loss of ``theta`` on every group; the Gaussian models share one factorization."""
    if model == "glasso":
        logdet = pd_logdet(pd_factor(theta))
        return np.array([-logdet + float(np.sum(g.S * theta)) for g in groups])
    if model == "covgraph":
        logdet = pd_logdet(pd_factor(theta))
        return np.array([0.5 * float(np.sum(np.square(theta - g.S))) - tau * logdet for g in groups])
    return np.array([model_loss(model, theta, g, tau) for g in groups])


def _group_grad_parts(model: ModelName, theta: np.ndarray, groups: Sequence[ModelInput], tau: float) -> np.ndarray:
    """
    Per-group gradients up to a term shared by all groups, which cancels in every difference.
    """
    if model == "glasso":
        return np.stack([g.S for g in groups])
    if model == "covgraph":
        return np.stack([-g.S for g in groups])
    return np.stack([model_grad(model, theta, g, tau) for g in groups])


def _pairwise_from_errors(errors: np.ndarray, penalty: PenaltyKind) -> np.ndarray:
    diff = errors[:, np.newaxis] - errors[np.newaxis, :]
    values = np.asarray(penalty.value(diff), dtype=np.float64)
    np.fill_diagonal(values, 0.0)
    return values.sum(axis=1)


def _disparity_grads_from(errors: np.ndarray, parts: np.ndarray, penalty: PenaltyKind) -> np.ndarray:
    if not penalty.smooth:
        msg = f"Penalty {penalty.name!r} is evaluation-only, (expected 'square' or 'exp' for gradients)"
        raise UnsupportedPenaltyGradient(msg)
    diff = errors[:, np.newaxis] - errors[np.newaxis, :]
    weights = np.asarray(penalty.derivative(diff), dtype=np.float64)
    np.fill_diagonal(weights, 0.0)
    return weights.sum(axis=1)[:, np.newaxis, np.newaxis] * parts - np.einsum("ks,sij->kij", weights, parts)


def disparity_errors(
    theta: np.ndarray, local: LocalSolutions, groups: Sequence[ModelInput], tau: float = 0.01
) -> np.ndarray:
    local = _check_local(local, groups)
    return group_losses(local.model, theta, groups, tau) - local.losses


def disparity_error(
    theta: np.ndarray, k: int, local: LocalSolutions, groups: Sequence[ModelInput], tau: float = 0.01
) -> float:
    """E_k = L(theta; X_k) - L(theta_k*; X_k) for group ``k`` (1-based id)."""
    local = _check_local(local, groups)
    local.theta(k)
    return model_loss(local.model, theta, groups[k - 1], tau) - float(local.losses[k - 1])


def pairwise_disparity(
    theta: np.ndarray,
    k: int,
    penalty: PenaltyKind,
    local: LocalSolutions,
    groups: Sequence[ModelInput],
    tau: float = 0.01,
) -> float:
    """Delta_k = sum over s != k of penalty(E_k - E_s)."""
    if len(groups) < 2:
        msg = f"Pairwise disparity needs at least two groups, (got {len(groups)})"
        raise ValueError(msg)
    local = _check_local(local, groups)
    local.theta(k)
    errors = disparity_errors(theta, local, groups, tau)
    return float(_pairwise_from_errors(errors, penalty)[k - 1])


def disparity_grad(
    theta: np.ndarray,
    k: int,
    penalty: PenaltyKind,
    local: LocalSolutions,
    groups: Sequence[ModelInput],
    tau: float = 0.01,
) -> np.ndarray:
    if len(groups) < 2:
        msg = f"Pairwise disparity needs at least two groups, (got {len(groups)})"
        raise ValueError(msg)
    local = _check_local(local, groups)
    local.theta(k)
    if not penalty.smooth:
        msg = f"Penalty {penalty.name!r} is evaluation-only, (expected 'square' or 'exp' for gradients)"
        raise UnsupportedPenaltyGradient(msg)
    errors = disparity_errors(theta, local, groups, tau)
    parts = _group_grad_parts(local.model, theta, groups, tau)
    return _disparity_grads_from(errors, parts, penalty)[k - 1]


def disparity_report(
    theta: np.ndarray,
    local: LocalSolutions,
    groups: Sequence[ModelInput],
    penalty: PenaltyKind | None = None,
    tau: float = 0.01,
) -> DisparityReport:
    penalty = penalty if penalty is not None else PenaltyKind()
    errors = disparity_errors(theta, local, groups, tau)
    pairwise = _pairwise_from_errors(errors, penalty)
    return DisparityReport(
        errors=errors,
        pairwise=pairwise,
        total=float(pairwise.sum()),
        spread=float(errors.max() - errors.min()),
    )


class FairObjectives:
    def __init__(
        self,
        model: ModelName,
        pooled: ModelInput,
        groups: Sequence[ModelInput],
        local: LocalSolutions | None,
        config: FitConfig,
        gamma: float = 0.0,
    ) -> None:
        """
        The objectives minimized together by the fair solver: the pooled loss f_1 and, when local
        solutions are given, the pairwise disparities f_2..f_M with the gamma * ||.||_F^2 term folded
        into their smooth part. Without local solutions only f_1 remains.
        """
        self.model: ModelName = model
        self.pooled = pooled
        self.groups = tuple(groups)
        self.local = _check_local(local, self.groups) if local is not None else None
        self.penalty = config.penalty_kind
        self.lam = config.lam
        self.tau = config.tau
        self.gamma = gamma

    @property
    def M(self) -> int:
        return 1 if self.local is None else len(self.groups) + 1

    def l1(self, theta: np.ndarray) -> float:
        return self.lam * float(np.abs(theta).sum())

    def errors(self, theta: np.ndarray) -> np.ndarray:
        assert self.local is not None
        return group_losses(self.model, theta, self.groups, self.tau) - self.local.losses

    def _raw(self, theta: np.ndarray) -> tuple[np.ndarray, float]:
        f1 = model_loss(self.model, theta, self.pooled, self.tau)
        if self.local is None:
            return np.array([f1]), 0.0
        pairwise = _pairwise_from_errors(self.errors(theta), self.penalty)
        return np.concatenate([[f1], pairwise]), self.gamma * float(np.sum(np.square(theta)))

    def evaluate(self, theta: np.ndarray) -> ObjectiveVector:
        raw, frob = self._raw(theta)
        frob_vec = np.full(raw.shape, frob)
        frob_vec[0] = 0.0
        return ObjectiveVector(smooth=raw, l1=self.l1(theta), frob=frob_vec)

    def smooth(self, theta: np.ndarray) -> np.ndarray:
        """f_k including the convexification term, the part handled by gradient steps."""
        raw, frob = self._raw(theta)
        raw[1:] += frob
        return raw

    def grads(self, theta: np.ndarray) -> np.ndarray:
        g1 = model_grad(self.model, theta, self.pooled, self.tau)
        if self.local is None:
            return g1[np.newaxis]
        parts = _group_grad_parts(self.model, theta, self.groups, self.tau)
        dgrads = _disparity_grads_from(self.errors(theta), parts, self.penalty)
        if self.gamma > 0:
            dgrads = dgrads + 2.0 * self.gamma * theta
        return np.concatenate([g1[np.newaxis], dgrads])


def objective_vector(
    theta: np.ndarray,
    model: ModelName,
    config: FitConfig,
    local: LocalSolutions | None,
    pooled: ModelInput,
    groups: Sequence[ModelInput],
    gamma: float | None = None,
) -> ObjectiveVector:
    """F_1..F_M at ``theta``; ``local=None`` disables fairness and leaves the single pooled objective."""
    if gamma is None:
        gamma = config.gamma if config.gamma is not None else 0.0
    return FairObjectives(model, pooled, groups, local, config, gamma).evaluate(theta)


def _disparity_hessian_min(
    theta: np.ndarray,
    k: int,
    penalty: PenaltyKind,
    local: LocalSolutions,
    groups: Sequence[ModelInput],
    tau: float,
    h: float,
) -> float:
    P = theta.shape[0]
    dim = P * (P + 1) // 2

    def matvec(v: np.ndarray) -> np.ndarray:
        v = np.ravel(v)
        direction = smat(v)
        plus = disparity_grad(theta + h * direction, k, penalty, local, groups, tau)
        minus = disparity_grad(theta - h * direction, k, penalty, local, groups, tau)
        return svec((plus - minus) / (2.0 * h))

    if dim <= DENSE_HESSIAN_MAX_DIM:
        hess = np.column_stack([matvec(e) for e in np.eye(dim)])
        return float(eigvalsh(0.5 * (hess + hess.T))[0])

    operator = LinearOperator((dim, dim), matvec=matvec, dtype=np.float64)
    try:
        values = eigsh(operator, k=1, which="SA", tol=1e-6, return_eigenvectors=False)
    except ArpackNoConvergence as e:
        if len(e.eigenvalues) == 0:
            raise
        logger.warning("smallest Hessian eigenvalue did not converge, using the partial estimate")
        values = e.eigenvalues
    return float(np.min(values))


def choose_gamma(
    model: ModelName,
    local: LocalSolutions,
    groups: Sequence[ModelInput],
    sample_thetas: Sequence[np.ndarray],
    tau: float = 0.01,
    penalty: PenaltyKind | None = None,
    h: float = 1e-5,
) -> float:
    """
    Weight of the Frobenius term that makes every disparity objective convex.

    The Gaussian disparities are convex already (their Hessians are sums of Kronecker squares), so
    only binnet is examined: the smallest Hessian eigenvalue of each Delta_k is estimated at every
    sample point by finite differences of its gradient.
    """
    if model != "binnet" or len(groups) < 2:
        return 0.0
    penalty = penalty if penalty is not None else PenaltyKind()
    local = _check_local(local, groups)
    lowest = np.inf
    for theta in sample_thetas:
        for k in range(1, len(groups) + 1):
            lowest = min(lowest, _disparity_hessian_min(theta, k, penalty, local, groups, tau, h))
    gamma = max(0.0, -0.5 * lowest)
    logger.info("convexification weight gamma=%.6g (smallest Hessian eigenvalue %.6g)", gamma, lowest)
    return gamma
