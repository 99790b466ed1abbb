from typing import Sequence

import numpy as np

from ..gmdata import GroupedDataset
from ..gmerror import GeneratorError
from .blocks import gen_block_covariances
from .hubs import gen_hub_networks
from .sampler import gibbs_sample_ising, group_rngs, sample_mvn
from .truth import GroundTruth


def _sizes(sizes: Sequence[int], K: int) -> list[int]:
    sizes = list(sizes)
    if len(sizes) == 1:
        sizes = sizes * K
    if len(sizes) != K or any(n < 1 for n in sizes):
        msg = f"Invalid value of 'sizes', (expected {K} positive sample sizes, got {sizes})"
        raise GeneratorError(msg)
    return sizes


def _stack(blocks: list[np.ndarray], binary: bool) -> GroupedDataset:
    data = np.vstack(blocks)
    groups = np.concatenate([np.full(b.shape[0], k + 1) for k, b in enumerate(blocks)])
    return GroupedDataset(data, groups, binary=binary)


def simulate_gaussian(
    P: int, Q: int, K: int, sizes: Sequence[int], seed: int, n_reset: int = 2
) -> tuple[GroupedDataset, GroundTruth]:
    """Block-diagonal ground truth and Gaussian samples of every group."""
    sizes = _sizes(sizes, K)
    truth = gen_block_covariances(P, Q, K, seed, n_reset=n_reset)
    rngs = group_rngs(seed, K)
    blocks = [sample_mvn(sigma, n, rng) for sigma, n, rng in zip(truth.matrices, sizes, rngs)]
    return _stack(blocks, binary=False), truth


def simulate_ising(
    P: int,
    H: int,
    K: int,
    sizes: Sequence[int],
    seed: int,
    burn_in: int = 10_000,
    thinning: int = 100,
) -> tuple[GroupedDataset, GroundTruth]:
    """Hub-network ground truth and Gibbs samples of every group."""
    sizes = _sizes(sizes, K)
    truth = gen_hub_networks(P, H, K, seed)
    rngs = group_rngs(seed, K)
    blocks = [
        gibbs_sample_ising(theta, n, burn_in=burn_in, thinning=thinning, seed=rng)
        for theta, n, rng in zip(truth.matrices, sizes, rngs)
    ]
    return _stack(blocks, binary=True), truth
