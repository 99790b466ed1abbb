from pathlib import Path

import numpy as np

from ..gmerror import DatasetError


def read_matrix(filepath: str | Path) -> np.ndarray:
    """Square matrix stored as comma-separated rows without header."""
    try:
        m = np.loadtxt(filepath, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as e:
        msg = f"Cannot parse '{filepath}' as a numeric matrix ({e})"
        raise DatasetError(msg) from None
    if m.shape[0] != m.shape[1]:
        msg = f"Invalid shape of matrix in '{filepath}', (expected a square matrix, got {m.shape})"
        raise DatasetError(msg)
    return m


def write_matrix(filepath: str | Path, m: np.ndarray, fmt: str = "%.17g") -> None:
    np.savetxt(filepath, m, fmt=fmt, delimiter=",")
