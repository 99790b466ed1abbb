import numpy as np

from .feasible import pd_factor, pd_inverse, pd_logdet, symmetrize


def glasso_loss(theta: np.ndarray, S: np.ndarray) -> float:
    """-log det(theta) + tr(S theta)"""
    factor = pd_factor(theta)
    return -pd_logdet(factor) + float(np.sum(S * theta))


def glasso_grad(theta: np.ndarray, S: np.ndarray) -> np.ndarray:
    factor = pd_factor(theta)
    return symmetrize(S - pd_inverse(factor))
