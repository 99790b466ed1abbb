import numpy as np
from scipy.special import logsumexp

MAX_EXACT_P = 12


def binary_states(P: int) -> np.ndarray:
    """All 2^P binary vectors as rows; x_1 is the most significant bit of the row index."""
    codes = np.arange(2**P)[:, np.newaxis]
    shifts = np.arange(P - 1, -1, -1)[np.newaxis, :]
    return ((codes >> shifts) & 1).astype(np.float64)


def state_index(x: np.ndarray) -> np.ndarray:
    """Row index in ``binary_states`` of each binary row of ``x``."""
    x_ndarray = np.atleast_2d(np.asarray(x)).astype(np.int64)
    P = x_ndarray.shape[1]
    return x_ndarray @ (1 << np.arange(P - 1, -1, -1))


def ising_log_weight(theta: np.ndarray, states: np.ndarray) -> np.ndarray:
    """sum_j theta_jj x_j + sum_{j<j'} theta_jj' x_j x_j' for each row"""
    upper = np.triu(theta, 1)
    return states @ np.diag(theta) + np.einsum("ij,jk,ik->i", states, upper, states)


def exact_ising_distribution(theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Probabilities of every binary state under the Ising density, by enumeration."""
    theta_ndarray = np.asarray(theta, dtype=np.float64)
    P = theta_ndarray.shape[0]
    if P > MAX_EXACT_P:
        msg = f"Invalid size of 'theta', (expected P <= {MAX_EXACT_P} for enumeration, got {P})"
        raise ValueError(msg)
    states = binary_states(P)
    log_w = ising_log_weight(theta_ndarray, states)
    probs = np.exp(log_w - logsumexp(log_w))
    return states, probs


def exact_ising_marginals(theta: np.ndarray) -> np.ndarray:
    states, probs = exact_ising_distribution(theta)
    return probs @ states
