from dataclasses import dataclass
from typing import get_args

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from ..gmerror import NotPositiveDefinite
from ..gmtype import FeasibleSet, ModelName

FEASIBLE_SETS: dict[ModelName, FeasibleSet] = {
    "glasso": "symmetric_pd",
    "covgraph": "symmetric_pd",
    "binnet": "symmetric",
}


@dataclass(frozen=True)
class ModelKind:
    name: ModelName

    def __post_init__(self) -> None:
        if self.name not in get_args(ModelName):
            msg = f"Invalid value of 'model', (expected one of {get_args(ModelName)}, got {self.name!r})"
            raise ValueError(msg)

    @property
    def feasible_set(self) -> FeasibleSet:
        return FEASIBLE_SETS[self.name]

    @property
    def requires_pd(self) -> bool:
        return self.feasible_set == "symmetric_pd"


def symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def pd_factor(m: np.ndarray) -> tuple[np.ndarray, bool]:
    """Cholesky factor of a symmetric matrix; failure is the positive-definiteness test."""
    if not np.all(np.isfinite(m)):
        msg = "Matrix has non-finite entries"
        raise NotPositiveDefinite(msg)
    try:
        return cho_factor(m, lower=True, check_finite=False)
    except LinAlgError:
        msg = "Matrix is not positive definite"
        raise NotPositiveDefinite(msg) from None


def pd_logdet(factor: tuple[np.ndarray, bool]) -> float:
    return 2.0 * float(np.sum(np.log(np.diag(factor[0]))))


def pd_inverse(factor: tuple[np.ndarray, bool]) -> np.ndarray:
    P = factor[0].shape[0]
    return symmetrize(cho_solve(factor, np.eye(P), check_finite=False))


def is_positive_definite(m: np.ndarray) -> bool:
    try:
        pd_factor(m)
    except NotPositiveDefinite:
        return False
    return True


def project_feasible(m: np.ndarray, kind: ModelKind | ModelName) -> tuple[np.ndarray, bool]:
    """
    Symmetrize ``m`` and report whether it lies in the feasible set of ``kind``.

    No eigenvalue clipping happens here, the solvers keep iterates positive definite
    through their step-size search.
    """
    if isinstance(kind, str):
        kind = ModelKind(kind)
    m_ndarray = np.asarray(m, dtype=np.float64)
    if m_ndarray.ndim != 2 or m_ndarray.shape[0] != m_ndarray.shape[1]:
        msg = f"Invalid shape of 'm', (expected a square matrix, got {m_ndarray.shape})"
        raise ValueError(msg)
    sym = symmetrize(m_ndarray)
    if kind.requires_pd:
        return sym, is_positive_definite(sym)
    return sym, True


def svec(m: np.ndarray) -> np.ndarray:
    """Upper triangle of a symmetric matrix with off-diagonals scaled by sqrt(2)."""
    iu = np.triu_indices(m.shape[0])
    scale = np.where(iu[0] == iu[1], 1.0, np.sqrt(2.0))
    return m[iu] * scale


def smat(v: np.ndarray) -> np.ndarray:
    d = v.shape[0]
    P = int(round((np.sqrt(8 * d + 1) - 1) / 2))
    if P * (P + 1) // 2 != d:
        msg = f"Invalid length of 'v', (expected P(P+1)/2 for some P, got {d})"
        raise ValueError(msg)
    iu = np.triu_indices(P)
    scale = np.where(iu[0] == iu[1], 1.0, 1 / np.sqrt(2.0))
    m = np.zeros((P, P))
    m[iu] = v * scale
    return m + np.triu(m, 1).T
