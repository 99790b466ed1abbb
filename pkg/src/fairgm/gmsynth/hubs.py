import numpy as np
from scipy.linalg import eigvalsh

from ..gmerror import GeneratorError
from ..gmmodels.feasible import symmetrize
from .truth import GroundTruth


def gen_hub_networks(
    P: int,
    H: int,
    K: int,
    seed: int,
    edge_prob: float = 0.01,
    hub_prob: float = 0.99,
    min_eig: float = 0.1,
) -> GroundTruth:
    """
    K symmetric Ising parameter matrices built around H hub nodes.

    Background edges appear with probability ``edge_prob`` and the rows and columns of the hubs
    are filled with probability ``hub_prob``. Edge weights are uniform in +-[0.25, 0.75] on hub
    rows and columns and in +-[0.25, 0.5] elsewhere. Theta_1 is shifted so that its smallest
    eigenvalue equals ``min_eig``; every later group drops the edges of two more hubs.
    """
    if P < 4:
        msg = f"Invalid value of 'P', (expected >= 4, got {P})"
        raise GeneratorError(msg)
    if H < 1 or H > P:
        msg = f"Invalid value of 'H', (expected 1..{P}, got {H})"
        raise GeneratorError(msg)
    if K < 1 or H - 2 * (K - 1) < 0:
        msg = f"Not enough hubs to remove, (need 2 x {K - 1} of {H} hubs)"
        raise GeneratorError(msg)

    rng = np.random.default_rng(seed)
    upper = np.triu(rng.random((P, P)) < edge_prob, 1)
    adjacency = upper | upper.T

    hubs = rng.choice(P, size=H, replace=False)
    is_hub = np.zeros(P, dtype=bool)
    is_hub[hubs] = True
    for h in hubs:
        links = rng.random(P) < hub_prob
        links[h] = False
        adjacency[h, :] = links
        adjacency[:, h] = links

    hub_entry = is_hub[:, np.newaxis] | is_hub[np.newaxis, :]
    high = np.where(hub_entry, 0.75, 0.5)
    magnitude = 0.25 + (high - 0.25) * rng.random((P, P))
    sign = np.where(rng.random((P, P)) < 0.5, -1.0, 1.0)
    weights = symmetrize(np.where(adjacency, sign * magnitude, 0.0))

    theta = weights + (min_eig - eigvalsh(weights)[0]) * np.eye(P)
    thetas = [theta]
    for k in range(1, K):
        theta = thetas[-1].copy()
        for h in hubs[2 * (k - 1) : 2 * k]:
            diag = theta[h, h]
            theta[h, :] = 0.0
            theta[:, h] = 0.0
            theta[h, h] = diag
        thetas.append(theta)

    meta = {
        "generator": "hubs",
        "P": P,
        "H": H,
        "K": K,
        "seed": seed,
        "hubs": [int(h) for h in hubs],
        "edge_prob": edge_prob,
        "hub_prob": hub_prob,
    }
    return GroundTruth(kind="ising", matrices=tuple(thetas), precisions=tuple(thetas), meta=meta)
