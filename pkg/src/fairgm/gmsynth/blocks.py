import numpy as np
from scipy.linalg import eigh

from ..gmerror import GeneratorError
from ..gmmodels.feasible import pd_factor, pd_inverse, symmetrize
from .truth import GroundTruth

EIGEN_FLOOR = 1e-5


def _random_block(rng: np.random.Generator, size: int, mean: float, sd: float) -> np.ndarray:
    block = symmetrize(rng.normal(loc=mean, scale=sd, size=(size, size)))
    w, v = eigh(block)
    w = np.maximum(w, EIGEN_FLOOR)
    return symmetrize((v * w) @ v.T)


def gen_block_covariances(
    P: int,
    Q: int,
    K: int,
    seed: int,
    n_reset: int = 2,
    mean: float = 0.7,
    sd: float = 0.2,
) -> GroundTruth:
    """
    K block-diagonal covariance matrices with Q equal blocks.

    Sigma_1 draws each block entrywise from N(mean, sd^2), symmetrizes it and floors its
    eigenvalues at 1e-5. Each later Sigma_k copies Sigma_{k-1} and resets the next ``n_reset``
    blocks that are still untouched, in ascending order, to the identity.
    """
    if P < 1 or Q < 1 or K < 1:
        msg = f"Invalid values of 'P', 'Q', 'K', (expected positive integers, got {P}, {Q}, {K})"
        raise GeneratorError(msg)
    if P % Q != 0:
        msg = f"Invalid value of 'Q', (expected a divisor of P={P}, got {Q})"
        raise GeneratorError(msg)
    if n_reset < 1 or n_reset * (K - 1) > Q:
        msg = f"Not enough blocks to reset, (need {n_reset} x {K - 1} of {Q} blocks)"
        raise GeneratorError(msg)

    rng = np.random.default_rng(seed)
    size = P // Q
    sigma = np.zeros((P, P))
    for q in range(Q):
        sl = slice(q * size, (q + 1) * size)
        sigma[sl, sl] = _random_block(rng, size, mean, sd)

    covariances = [sigma]
    for k in range(1, K):
        sigma = covariances[-1].copy()
        for q in range((k - 1) * n_reset, k * n_reset):
            sl = slice(q * size, (q + 1) * size)
            sigma[sl, sl] = np.eye(size)
        covariances.append(sigma)

    precisions = tuple(pd_inverse(pd_factor(s)) for s in covariances)
    meta = {"generator": "blocks", "P": P, "Q": Q, "K": K, "seed": seed, "n_reset": n_reset, "mean": mean, "sd": sd}
    return GroundTruth(kind="gaussian", matrices=tuple(covariances), precisions=precisions, meta=meta)
