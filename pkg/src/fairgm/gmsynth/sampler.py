import logging

import numpy as np
from numba import jit

from ..gmerror import GeneratorError, NotPositiveDefinite
from ..gmmodels.feasible import pd_factor

logger = logging.getLogger(__name__)

# uniforms drawn per chunk of the Gibbs chain
CHUNK_DRAWS = 2_000_000


def group_rngs(seed: int, K: int) -> list[np.random.Generator]:
    """
    Independent PCG64 streams for the samples of groups 1..K.

    Stream ``k`` is child ``k`` of ``SeedSequence(seed)``; child 0 is left to the ground-truth
    generators, which seed from ``seed`` directly.
    """
    children = np.random.SeedSequence(seed).spawn(K + 1)
    return [np.random.default_rng(child) for child in children[1:]]


def _as_rng(seed: int | np.random.Generator) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_mvn(sigma: np.ndarray, N: int, seed: int | np.random.Generator = 0) -> np.ndarray:
    """N draws from N(0, sigma) as rows, through the Cholesky factor of sigma."""
    try:
        lower, _ = pd_factor(np.asarray(sigma, dtype=np.float64))
    except NotPositiveDefinite:
        msg = "Invalid value of 'sigma', (expected a positive definite covariance)"
        raise NotPositiveDefinite(msg) from None
    if N < 1:
        msg = f"Invalid value of 'N', (expected >= 1, got {N})"
        raise GeneratorError(msg)
    rng = _as_rng(seed)
    z = rng.standard_normal((N, sigma.shape[0]))
    return z @ np.tril(lower).T


@jit(nopython=True, cache=True)
def _gibbs_sweeps(theta, x, uniforms, thinning, out):
    n_sweeps, P = uniforms.shape
    n_out = 0
    for t in range(n_sweeps):
        for j in range(P):
            u = theta[j, j]
            for jj in range(P):
                if jj != j:
                    u += theta[j, jj] * x[jj]
            if u >= 0:
                prob = 1.0 / (1.0 + np.exp(-u))
            else:
                z = np.exp(u)
                prob = z / (1.0 + z)
            x[j] = 1.0 if uniforms[t, j] < prob else 0.0
        if thinning > 0 and (t + 1) % thinning == 0:
            out[n_out, :] = x
            n_out += 1
    return n_out


def gibbs_sample_ising(
    theta: np.ndarray,
    N: int,
    burn_in: int = 10_000,
    thinning: int = 100,
    seed: int | np.random.Generator = 0,
) -> np.ndarray:
    """
    Systematic-scan Gibbs sampler for the Ising density exp(sum_j theta_jj x_j + sum_{j<j'} theta_jj' x_j x_j').

    After ``burn_in`` sweeps one state is kept every ``thinning`` sweeps.
    """
    theta_ndarray = np.ascontiguousarray(theta, dtype=np.float64)
    if theta_ndarray.ndim != 2 or theta_ndarray.shape[0] != theta_ndarray.shape[1]:
        msg = f"Invalid shape of 'theta', (expected a square matrix, got {theta_ndarray.shape})"
        raise GeneratorError(msg)
    if not np.allclose(theta_ndarray, theta_ndarray.T, rtol=0, atol=1e-12):
        msg = "Invalid value of 'theta', (expected a symmetric matrix)"
        raise GeneratorError(msg)
    if burn_in < 0 or thinning < 1 or N < 0:
        msg = f"Invalid chain settings, (expected burn_in >= 0, thinning >= 1, N >= 0, got {burn_in}, {thinning}, {N})"
        raise GeneratorError(msg)

    rng = _as_rng(seed)
    P = theta_ndarray.shape[0]
    x = rng.integers(0, 2, size=P).astype(np.float64)
    samples = np.empty((N, P))
    sweeps_per_chunk = max(thinning, (CHUNK_DRAWS // max(P, 1)) // thinning * thinning)

    remaining = burn_in
    scratch = np.empty((0, P))
    while remaining > 0:
        n = min(remaining, sweeps_per_chunk)
        _gibbs_sweeps(theta_ndarray, x, rng.random((n, P)), 0, scratch)
        remaining -= n

    collected = 0
    while collected < N:
        n_keep = min(N - collected, sweeps_per_chunk // thinning)
        n_out = _gibbs_sweeps(theta_ndarray, x, rng.random((n_keep * thinning, P)), thinning, samples[collected:])
        collected += n_out
    logger.debug("gibbs: P=%d, N=%d, burn_in=%d, thinning=%d", P, N, burn_in, thinning)
    return samples
