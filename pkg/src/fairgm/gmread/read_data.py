from pathlib import Path

import numpy as np
import pandas as pd

from ..gmdata import GroupedDataset, standardize, validate_dataset
from ..gmerror import DatasetError
from ..gmtype import ModelName


def read_grouped_csv(
    filepath: str | Path,
    group_col: str = "group",
    model: ModelName | None = None,
    standardize_columns: bool = False,
) -> GroupedDataset:
    """
    Read a header-row CSV with one group column and numeric feature columns.

    Standardization, when asked for, is applied to the whole table before grouping.
    """
    try:
        frame = pd.read_csv(filepath, encoding="utf-8", float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        msg = f"Cannot parse '{filepath}' as CSV ({e})"
        raise DatasetError(msg) from None

    if group_col not in frame.columns:
        msg = f"Invalid value of 'group_col', (expected one of {list(frame.columns)}, got {group_col!r})"
        raise DatasetError(msg)
    features = frame.drop(columns=group_col)
    non_numeric = [c for c in features.columns if not pd.api.types.is_numeric_dtype(features[c])]
    if non_numeric:
        msg = f"Invalid feature columns, (expected numeric values, got non-numeric {non_numeric})"
        raise DatasetError(msg)

    raw = features.to_numpy(dtype=np.float64)
    if standardize_columns:
        if not np.all(np.isfinite(raw)):
            msg = "Invalid entries of the data, (expected finite values, got NaN or Inf)"
            raise DatasetError(msg)
        raw = standardize(raw)
    return validate_dataset(raw, frame[group_col].to_numpy(), model=model)


def write_grouped_csv(
    filepath: str | Path,
    data: np.ndarray,
    group_of_row: np.ndarray,
    group_col: str = "group",
    columns: list[str] | None = None,
) -> None:
    P = data.shape[1]
    columns = columns if columns is not None else [f"x{j + 1}" for j in range(P)]
    frame = pd.DataFrame(data, columns=columns)
    frame[group_col] = group_of_row
    frame.to_csv(filepath, index=False, float_format="%.17g", encoding="utf-8")
