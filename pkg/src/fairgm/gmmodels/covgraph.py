import numpy as np

from .feasible import pd_factor, pd_inverse, pd_logdet, symmetrize


def covgraph_loss(sigma: np.ndarray, S: np.ndarray, tau: float) -> float:
    """0.5 * ||sigma - S||_F^2 - tau * log det(sigma)"""
    factor = pd_factor(sigma)
    return 0.5 * float(np.sum(np.square(sigma - S))) - tau * pd_logdet(factor)


def covgraph_grad(sigma: np.ndarray, S: np.ndarray, tau: float) -> np.ndarray:
    factor = pd_factor(sigma)
    return symmetrize(sigma - S - tau * pd_inverse(factor))
