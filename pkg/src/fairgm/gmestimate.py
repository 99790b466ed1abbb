import copy
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .gmtype import ModelName, ObjectiveParts, TraceRecord


@dataclass(frozen=True)
class ObjectiveVector:
    """
    Values F_1..F_M with their parts: the smooth loss or disparity f_k, the shared l1 term and
    the Frobenius convexification term (zero for k = 1).
    """

    smooth: np.ndarray
    l1: float
    frob: np.ndarray

    def __post_init__(self) -> None:
        if self.smooth.shape != self.frob.shape or self.smooth.ndim != 1:
            msg = f"Invalid shapes of 'smooth' and 'frob', (got {self.smooth.shape} and {self.frob.shape})"
            raise ValueError(msg)

    @property
    def values(self) -> np.ndarray:
        return self.smooth + self.l1 + self.frob

    @property
    def M(self) -> int:
        return self.smooth.shape[0]

    @property
    def components(self) -> ObjectiveParts:
        return {"smooth": self.smooth.copy(), "l1": self.l1, "frob": self.frob.copy()}

    def __len__(self) -> int:
        return self.M

    def __getitem__(self, index):
        return self.values[index]


class GraphEstimate:
    def __init__(
        self,
        matrix: np.ndarray,
        model: ModelName,
        is_pd: bool,
        trace: list[TraceRecord] | None = None,
        converged: bool = True,
        iterations: int = 0,
        n_pd_backtracks: int = 0,
        n_descent_backtracks: int = 0,
        runtime: float = 0.0,
        info: dict | None = None,
    ) -> None:
        """
        A fitted P x P graph (precision, covariance or Ising parameter) with its solver history.
        """
        matrix_ndarray = np.array(matrix, dtype=np.float64)
        if matrix_ndarray.ndim != 2 or matrix_ndarray.shape[0] != matrix_ndarray.shape[1]:
            msg = f"Invalid shape of 'matrix', (expected a square matrix, got {matrix_ndarray.shape})"
            raise ValueError(msg)
        self.matrix = 0.5 * (matrix_ndarray + matrix_ndarray.T)
        self.model: ModelName = model
        self.is_pd = is_pd
        self.trace = trace if trace is not None else list()
        self.converged = converged
        self.iterations = iterations
        self.n_pd_backtracks = n_pd_backtracks
        self.n_descent_backtracks = n_descent_backtracks
        self.runtime = runtime
        self.info = info if info is not None else dict()

    @property
    def not_converged(self) -> bool:
        return not self.converged

    @property
    def P(self) -> int:
        return self.matrix.shape[0]

    def adjacency(self, lam: float) -> np.ndarray:
        """Off-diagonal edge indicator |theta_jj'| >= lam."""
        adj = (np.abs(self.matrix) >= lam).astype(np.int64)
        np.fill_diagonal(adj, 0)
        return adj

    def trace_frame(self) -> pd.DataFrame:
        rows = []
        for record in self.trace:
            row = {"iteration": record["iteration"]}
            row.update({f"F_{k + 1}": v for k, v in enumerate(record["objectives"])})
            row["delta_total"] = record["delta_total"]
            row.update({f"rho_{k + 1}": v for k, v in enumerate(record["rho"])})
            row["ell"] = record["ell"]
            row["residual"] = record["residual"]
            rows.append(row)
        return pd.DataFrame(rows)

    def copy(self, **kwargs):
        copy_dict = copy.deepcopy(self.__dict__)
        if kwargs:
            for k, val in kwargs.items():
                copy_dict[k] = val
        return self.__class__(**copy_dict)

    def __repr__(self) -> str:
        status = "converged" if self.converged else "not converged"
        return f"GraphEstimate(model={self.model!r}, P={self.P}, iterations={self.iterations}, {status})"
