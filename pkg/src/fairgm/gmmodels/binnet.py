import numpy as np
from scipy.special import expit

from ..gmerror import DatasetError


def _check_binary(X: np.ndarray) -> None:
    if not np.all((X == 0) | (X == 1)):
        msg = "Invalid entries of 'X', (expected values in {0, 1})"
        raise DatasetError(msg)


def softplus(u: np.ndarray) -> np.ndarray:
    """log(1 + exp(u)) without overflow."""
    return np.maximum(u, 0.0) + np.log1p(np.exp(-np.abs(u)))


def natural_params(theta: np.ndarray, X: np.ndarray) -> np.ndarray:
    """u_ij = theta_jj + sum_{j' != j} theta_jj' x_ij'"""
    diag = np.diag(theta)
    off = theta - np.diag(diag)
    return X @ off.T + diag


def binnet_loss(theta: np.ndarray, X: np.ndarray, cross: np.ndarray | None = None) -> float:
    """Negative pseudo log-likelihood of an Ising model with symmetric parameter ``theta``."""
    _check_binary(X)
    if cross is None:
        cross = X.T @ X
    U = natural_params(theta, X)
    return -float(np.sum(theta * cross)) + float(np.sum(softplus(U)))


def binnet_grad(theta: np.ndarray, X: np.ndarray, cross: np.ndarray | None = None) -> np.ndarray:
    """
    Entrywise gradient over the full P x P parameter.

    Off-diagonal entry (j, j') is -(X^T X)_jj' + sum_i x_ij' sigmoid(u_ij), the diagonal drops
    the x factor. The result is not symmetric; the solvers symmetrize it.
    """
    _check_binary(X)
    if cross is None:
        cross = X.T @ X
    prob = expit(natural_params(theta, X))
    grad = prob.T @ X - cross
    np.fill_diagonal(grad, prob.sum(axis=0) - np.diag(cross))
    return grad
