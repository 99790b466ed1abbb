from dataclasses import dataclass

import numpy as np

from ..gmdata import GroupedDataset, GroupStats, group_stats
from ..gmtype import ModelName
from .binnet import binnet_grad, binnet_loss
from .covgraph import covgraph_grad, covgraph_loss
from .feasible import symmetrize
from .glasso import glasso_grad, glasso_loss


@dataclass(frozen=True)
class ModelInput:
    """What a loss needs from one slice of data: its second moment, and for Ising the raw block."""

    S: np.ndarray
    n: int
    X: np.ndarray | None = None
    cross: np.ndarray | None = None

    @property
    def P(self) -> int:
        return self.S.shape[0]


def model_inputs(
    ds: GroupedDataset, stats: GroupStats | None = None
) -> tuple[ModelInput, tuple[ModelInput, ...]]:
    """Pooled input and one input per group, ordered by group id."""
    if stats is None:
        stats = group_stats(ds)
    sizes = ds.group_sizes
    if not ds.binary:
        pooled = ModelInput(S=stats.S, n=ds.N)
        groups = tuple(ModelInput(S=S_k, n=int(n_k)) for S_k, n_k in zip(stats.S_groups, sizes))
        return pooled, groups

    assert stats.cross is not None and stats.cross_groups is not None
    pooled = ModelInput(S=stats.S, n=ds.N, X=ds.data, cross=stats.cross)
    groups = tuple(
        ModelInput(S=S_k, n=int(n_k), X=X_k, cross=C_k)
        for S_k, n_k, X_k, C_k in zip(stats.S_groups, sizes, ds.blocks, stats.cross_groups)
    )
    return pooled, groups


def _binary_block(inp: ModelInput) -> np.ndarray:
    if inp.X is None:
        msg = "Invalid model input, (binnet needs the binary data block, got second moments only)"
        raise ValueError(msg)
    return inp.X


def model_loss(model: ModelName, theta: np.ndarray, inp: ModelInput, tau: float = 0.01) -> float:
    """
    Raw loss of one data slice as the solvers see it. The Gaussian losses work with the sample
    second moment, and binnet is put on the same footing by averaging its pseudo-likelihood over
    the ``inp.n`` observations.
    """
    if model == "glasso":
        return glasso_loss(theta, inp.S)
    elif model == "covgraph":
        return covgraph_loss(theta, inp.S, tau)
    elif model == "binnet":
        return binnet_loss(theta, _binary_block(inp), inp.cross) / inp.n
    msg = f"Invalid value of 'model', (expected 'glasso', 'covgraph' or 'binnet', got {model!r})"
    raise ValueError(msg)


def model_grad(model: ModelName, theta: np.ndarray, inp: ModelInput, tau: float = 0.01) -> np.ndarray:
    """Gradient over symmetric matrices (the binnet entrywise gradient is symmetrized)."""
    if model == "glasso":
        return glasso_grad(theta, inp.S)
    elif model == "covgraph":
        return covgraph_grad(theta, inp.S, tau)
    elif model == "binnet":
        return symmetrize(binnet_grad(theta, _binary_block(inp), inp.cross)) / inp.n
    msg = f"Invalid value of 'model', (expected 'glasso', 'covgraph' or 'binnet', got {model!r})"
    raise ValueError(msg)


def initial_matrix(model: ModelName, inp: ModelInput, delta: float = 1e-3) -> np.ndarray:
    """Feasible starting point: diag(S) + delta*I for the Gaussian models, zeros for binnet."""
    if model == "binnet":
        return np.zeros((inp.P, inp.P))
    diag = np.diag(inp.S)
    if np.all(diag == 0):
        return np.eye(inp.P)
    return np.diag(diag) + delta * np.eye(inp.P)
