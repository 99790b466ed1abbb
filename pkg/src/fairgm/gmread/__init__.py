from .manifest import RunManifest, file_digest, read_json, write_json
from .read_data import read_grouped_csv, write_grouped_csv
from .read_matrix import read_matrix, write_matrix

__all__ = [
    "RunManifest",
    "file_digest",
    "read_json",
    "write_json",
    "read_grouped_csv",
    "write_grouped_csv",
    "read_matrix",
    "write_matrix",
]
