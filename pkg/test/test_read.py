import hashlib
import json
import platform

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from fairgm.gmconfig import FitConfig
from fairgm.gmdata import GroupedDataset
from fairgm.gmerror import DatasetError
from fairgm.gmread import (
    RunManifest,
    file_digest,
    read_grouped_csv,
    read_json,
    read_matrix,
    write_grouped_csv,
    write_json,
    write_matrix,
)
from fairgm.gmsolver import fit_single


def test_grouped_csv_round_trip(tmp_path, rng):
    data = rng.normal(size=(12, 3))
    groups = np.repeat([1, 2, 3], 4)
    filepath = tmp_path / "data.csv"
    write_grouped_csv(filepath, data, groups)
    ds = read_grouped_csv(filepath)
    assert_array_equal(ds.data, data)
    assert_array_equal(ds.group_of_row, groups)
    assert ds.labels == [1, 2, 3]
    assert not ds.binary


@pytest.mark.filterwarnings("ignore::fairgm.gmerror.ConvergenceWarning")
def test_fit_from_csv_matches_fit_in_memory(tmp_path, rng):
    data = rng.normal(size=(40, 3))
    groups = np.repeat([1, 2], 20)
    write_grouped_csv(tmp_path / "data.csv", data, groups)
    config = FitConfig(lam=0.05, max_iter=200)
    from_file = fit_single("glasso", read_grouped_csv(tmp_path / "data.csv"), config)
    in_memory = fit_single("glasso", GroupedDataset(data, groups), config)
    assert_array_equal(from_file.matrix, in_memory.matrix)


def test_string_group_labels(tmp_path):
    filepath = tmp_path / "data.csv"
    filepath.write_text("a,b,sex\n1,0,f\n0,1,m\n1,1,f\n0,0,m\n", encoding="utf-8")
    ds = read_grouped_csv(filepath, group_col="sex", model="binnet")
    assert ds.labels == ["f", "m"]
    assert_array_equal(ds.group_of_row, [1, 2, 1, 2])
    assert ds.binary


def test_bad_csv_inputs(tmp_path):
    filepath = tmp_path / "data.csv"
    filepath.write_text("a,b,group\n1,2,1\n3,4,2\n", encoding="utf-8")
    with pytest.raises(DatasetError):
        read_grouped_csv(filepath, group_col="site")

    filepath.write_text("a,b,group\n1,x,1\n3,4,2\n", encoding="utf-8")
    with pytest.raises(DatasetError):
        read_grouped_csv(filepath)

    filepath.write_text("a,b,group\n1,,1\n3,4,2\n", encoding="utf-8")
    with pytest.raises(DatasetError):
        read_grouped_csv(filepath)


def test_standardized_columns(tmp_path, rng):
    data = rng.normal(loc=3.0, scale=2.0, size=(50, 2))
    filepath = tmp_path / "data.csv"
    write_grouped_csv(filepath, data, np.repeat([1, 2], 25))
    ds = read_grouped_csv(filepath, standardize_columns=True)
    assert_allclose(ds.data.mean(axis=0), 0.0, atol=1e-12)
    assert_allclose(ds.data.std(axis=0), 1.0)


def test_matrix_files(tmp_path, rng):
    m = rng.normal(size=(4, 4))
    filepath = tmp_path / "m.csv"
    write_matrix(filepath, m)
    assert_array_equal(read_matrix(filepath), m)

    filepath.write_text("1,2,3\n4,5,6\n", encoding="utf-8")
    with pytest.raises(DatasetError):
        read_matrix(filepath)
    filepath.write_text("1,a\n2,3\n", encoding="utf-8")
    with pytest.raises(DatasetError):
        read_matrix(filepath)


def test_json_maps_non_finite_to_null(tmp_path):
    filepath = tmp_path / "report.json"
    write_json(filepath, {"x": float("nan"), "y": np.float64(0.1), "z": np.arange(3), "ok": np.bool_(True)})
    report = read_json(filepath)
    assert report == {"x": None, "y": 0.1, "z": [0, 1, 2], "ok": True}
    assert "NaN" not in filepath.read_text(encoding="utf-8")


def test_file_digest(tmp_path):
    filepath = tmp_path / "blob.bin"
    payload = b"fairgm" * 1000
    filepath.write_bytes(payload)
    assert file_digest(filepath) == hashlib.sha256(payload).hexdigest()


def test_run_manifest(tmp_path):
    data = tmp_path / "data.csv"
    data.write_text("a,group\n1,1\n", encoding="utf-8")
    manifest = RunManifest(command="fit", config={"lam": 0.01}, seed=3)
    manifest.add_input(data)
    manifest.add_output(tmp_path / "theta_hat.csv")
    manifest.write(tmp_path / "manifest.json")

    record = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
    assert record["command"] == "fit"
    assert record["python"] == platform.python_version()
    assert record["inputs"] == {str(data): file_digest(data)}
    assert record["schema_version"] == 1
    assert record["dry_run"] is False
