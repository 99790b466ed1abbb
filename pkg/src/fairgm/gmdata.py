from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd

from .gmerror import DatasetError
from .gmtype import ModelName


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


class GroupedDataset:
    def __init__(
        self,
        data: np.ndarray,
        group_of_row: Sequence[int] | np.ndarray,
        labels: Sequence | None = None,
        binary: bool = False,
    ) -> None:
        """
        An N x P observation matrix partitioned into K sensitive groups.

        ``group_of_row`` holds contiguous group ids 1..K. Per-group sequences returned by this
        class and by the rest of the package are ordered by group id, so group ``k`` sits at
        position ``k - 1``.
        """
        data_ndarray = np.array(data, dtype=np.float64)
        groups_ndarray = np.array(group_of_row, dtype=np.int64)
        if data_ndarray.ndim != 2:
            msg = f"Invalid ndim of 'data', (expected 2, got {data_ndarray.ndim})"
            raise DatasetError(msg)
        if groups_ndarray.shape != (data_ndarray.shape[0],):
            msg = (
                "Invalid length between 'data' and 'group_of_row', "
                + f"(got {data_ndarray.shape[0]} and {groups_ndarray.shape})"
            )
            raise DatasetError(msg)

        if groups_ndarray.size and groups_ndarray.min() < 1:
            msg = f"Invalid group id, (expected ids in 1..K, got {groups_ndarray.min()})"
            raise DatasetError(msg)
        n_groups = int(groups_ndarray.max()) if groups_ndarray.size else 0
        sizes = np.bincount(groups_ndarray, minlength=n_groups + 1)[1:]
        if n_groups == 0 or np.any(sizes == 0):
            empty = [k + 1 for k in np.flatnonzero(sizes == 0)]
            msg = f"Empty group, (every group in 1..{n_groups} needs rows, got none for {empty})"
            raise DatasetError(msg)
        if binary and not np.all((data_ndarray == 0) | (data_ndarray == 1)):
            msg = "Invalid entries of 'data', (expected values in {0, 1} for a binary dataset)"
            raise DatasetError(msg)

        self.data = _readonly(data_ndarray)
        self.group_of_row = _readonly(groups_ndarray)
        self.labels = list(labels) if labels is not None else list(range(1, n_groups + 1))
        if len(self.labels) != n_groups:
            msg = f"Invalid length of 'labels', (expected {n_groups}, got {len(self.labels)})"
            raise DatasetError(msg)
        self.binary = binary

    @property
    def N(self) -> int:
        return self.data.shape[0]

    @property
    def P(self) -> int:
        return self.data.shape[1]

    @property
    def K(self) -> int:
        return len(self.labels)

    @property
    def group_sizes(self) -> np.ndarray:
        return np.bincount(self.group_of_row, minlength=self.K + 1)[1:]

    def block(self, k: int) -> np.ndarray:
        """Rows of group ``k`` (1-based id)."""
        if not 1 <= k <= self.K:
            msg = f"Invalid value of 'k', (expected 1..{self.K}, got {k})"
            raise DatasetError(msg)
        return self.data[self.group_of_row == k]

    @property
    def blocks(self) -> tuple[np.ndarray, ...]:
        return tuple(self.block(k) for k in range(1, self.K + 1))

    def subset(self, k: int) -> "GroupedDataset":
        block = self.block(k)
        return GroupedDataset(block, np.ones(block.shape[0], dtype=np.int64), [self.labels[k - 1]], self.binary)

    def __repr__(self) -> str:
        return f"GroupedDataset(N={self.N}, P={self.P}, K={self.K}, group_sizes={self.group_sizes.tolist()})"


@dataclass(frozen=True)
class GroupStats:
    S: np.ndarray
    S_groups: tuple[np.ndarray, ...]
    cross: np.ndarray | None = None
    cross_groups: tuple[np.ndarray, ...] | None = None


def validate_dataset(
    raw: np.ndarray | pd.DataFrame,
    labels: Sequence | np.ndarray,
    model: ModelName | None = None,
    binary: bool | None = None,
    categories: Sequence | None = None,
) -> GroupedDataset:
    """
    Check a raw observation matrix and map its group labels to contiguous ids 1..K.

    Labels keep their order of first appearance. When ``categories`` is given every listed
    label must own at least one row.
    """
    raw_ndarray = np.asarray(raw)
    if raw_ndarray.ndim != 2:
        msg = f"Invalid ndim of 'raw', (expected 2, got {raw_ndarray.ndim})"
        raise DatasetError(msg)
    N, P = raw_ndarray.shape
    if N < 2 or P < 2:
        msg = f"Invalid shape of 'raw', (expected at least 2 rows and 2 columns, got {raw_ndarray.shape})"
        raise DatasetError(msg)
    try:
        raw_ndarray = raw_ndarray.astype(np.float64)
    except (TypeError, ValueError):
        msg = "Invalid entries of 'raw', (expected numeric values)"
        raise DatasetError(msg) from None
    if not np.all(np.isfinite(raw_ndarray)):
        msg = "Invalid entries of 'raw', (expected finite values, got NaN or Inf)"
        raise DatasetError(msg)

    labels_series = pd.Series(np.asarray(labels))
    if labels_series.size != N:
        msg = f"Invalid length of 'labels', (expected {N}, got {labels_series.size})"
        raise DatasetError(msg)
    if labels_series.isna().any():
        msg = "Invalid entries of 'labels', (got missing group labels)"
        raise DatasetError(msg)
    codes, uniques = pd.factorize(labels_series, sort=False)
    uniques = list(uniques)

    if categories is not None:
        missing = [c for c in categories if c not in uniques]
        if missing:
            msg = f"Empty group, (no rows for the groups {missing})"
            raise DatasetError(msg)

    if binary is None:
        binary = model == "binnet"
    return GroupedDataset(raw_ndarray, codes + 1, uniques, binary=binary)


def group_stats(ds: GroupedDataset) -> GroupStats:
    """Uncentered second moments of the pooled data and of each group."""
    S = ds.data.T @ ds.data / ds.N
    blocks = ds.blocks
    S_groups = tuple(X.T @ X / X.shape[0] for X in blocks)
    if not ds.binary:
        return GroupStats(S=S, S_groups=S_groups)
    cross = ds.data.T @ ds.data
    cross_groups = tuple(X.T @ X for X in blocks)
    return GroupStats(S=S, S_groups=S_groups, cross=cross, cross_groups=cross_groups)


def standardize(raw: np.ndarray) -> np.ndarray:
    """Zero mean and unit variance per column; constant columns are only centred."""
    raw_ndarray = np.asarray(raw, dtype=np.float64)
    centred = raw_ndarray - raw_ndarray.mean(axis=0)
    std = raw_ndarray.std(axis=0)
    std[std == 0] = 1.0
    return centred / std
