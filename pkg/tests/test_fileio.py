import numpy as np
import pytest

from snxp.cavity import CavityParams
from snxp.errors import FileFormatError
from snxp.fileio import (read_count_matrix, read_csv, write_count_matrix,
                         write_csv)
from snxp.foil import FoilParams
from snxp.synth import CountMatrix, DatasetTruth, SweepConfig


def _matrix(with_truth=False):
    cfg = SweepConfig(detuning_min=-3.0, detuning_max=3.0, n_detunings=4,
                      n_time_bins=5, total_expected_counts=100.0, rng_seed=7)
    counts = np.arange(20, dtype=np.int64).reshape(5, 4)
    truth = None
    if with_truth:
        truth = DatasetTruth(cavity=CavityParams(), foil=FoilParams(),
                             delays=np.linspace(0.0, 0.2, 4))
    return CountMatrix(counts=counts, config=cfg, truth=truth)


def test_count_matrix_roundtrip_without_truth(tmp_path):
    path = tmp_path / "counts.txt"
    m = _matrix()
    write_count_matrix(path, m)
    back = read_count_matrix(path)
    np.testing.assert_array_equal(back.counts, m.counts)
    assert back.config == m.config
    assert back.truth is None


def test_count_matrix_roundtrip_with_truth(tmp_path):
    path = tmp_path / "counts.txt"
    m = _matrix(with_truth=True)
    write_count_matrix(path, m)
    back = read_count_matrix(path)
    assert back.truth is not None
    assert back.truth.cavity == m.truth.cavity
    assert back.truth.foil == m.truth.foil
    np.testing.assert_allclose(back.truth.delays, m.truth.delays, rtol=1e-15)


def test_count_matrix_bad_files(tmp_path):
    p = tmp_path / "f.txt"
    p.write_text("")
    with pytest.raises(FileFormatError):
        read_count_matrix(p)
    p.write_text("# other-format 1\n1 2\n")
    with pytest.raises(FileFormatError):
        read_count_matrix(p)
    p.write_text("# snxp-counts 99\n1 2\n")
    with pytest.raises(FileFormatError):
        read_count_matrix(p)
    p.write_text("# snxp-counts 1\n1 2\n")  # missing config
    with pytest.raises(FileFormatError):
        read_count_matrix(p)
    p.write_text('# snxp-counts 1\n# config: {"bogus_key": 1}\n1 2\n')
    with pytest.raises(FileFormatError):
        read_count_matrix(p)


def test_count_matrix_non_integer_entry(tmp_path):
    path = tmp_path / "counts.txt"
    write_count_matrix(path, _matrix())
    text = path.read_text().replace("13", "x")
    path.write_text(text)
    with pytest.raises(FileFormatError):
        read_count_matrix(path)


def test_count_matrix_bad_truth_block(tmp_path):
    path = tmp_path / "counts.txt"
    write_count_matrix(path, _matrix(with_truth=True))
    text = path.read_text().replace('"foil"', '"oops"')
    path.write_text(text)
    with pytest.raises(FileFormatError):
        read_count_matrix(path)


def test_csv_roundtrip(tmp_path):
    path = tmp_path / "curve.csv"
    x = np.linspace(0.0, 1.0, 7)
    y = np.sin(x)
    write_csv(path, ["x", "y"], [x, y])
    header, cols = read_csv(path)
    assert header == ["x", "y"]
    np.testing.assert_allclose(cols[0], x, rtol=1e-16)
    np.testing.assert_allclose(cols[1], y, rtol=1e-16)


def test_csv_validation(tmp_path):
    path = tmp_path / "curve.csv"
    with pytest.raises(FileFormatError):
        write_csv(path, ["a"], [np.zeros(2), np.zeros(2)])
    with pytest.raises(FileFormatError):
        write_csv(path, ["a", "b"], [np.zeros(2), np.zeros(3)])
    path.write_text("a,b\n1.0\n")
    with pytest.raises(FileFormatError):
        read_csv(path)
    path.write_text("a,b\n1.0,zz\n")
    with pytest.raises(FileFormatError):
        read_csv(path)
    path.write_text("")
    with pytest.raises(FileFormatError):
        read_csv(path)


def test_csv_empty_table(tmp_path):
    path = tmp_path / "curve.csv"
    write_csv(path, ["x", "y"], [np.array([]), np.array([])])
    header, cols = read_csv(path)
    assert header == ["x", "y"]
    assert cols[0].size == 0 and cols[1].size == 0
