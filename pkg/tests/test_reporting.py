import logging

import numpy as np
import pandas as pd
import pytest

from errors import ValidationError
from reporting import clamp_probabilities, format_value, read_csv, read_metadata, write_csv


def test_format_value():
    assert format_value(0.1) == "0.10000000000000001"
    assert format_value(np.float64(2.0)) == "2"
    assert format_value((-6.5, 6.5, 201)) == "-6.5,6.5,201"
    assert format_value("revival") == "revival"


def test_csv_layout(tmp_path):
    frame = pd.DataFrame({"t": [0.0, 0.5], "P": [1.0, 1 / 3]})
    path = write_csv(frame, tmp_path / "nested" / "run.csv", {"software_version": "0.4.0", "g": 2.0})
    text = path.read_text()
    assert text.splitlines() == [
        "#software_version=0.4.0",
        "#g=2",
        "t,P",
        "0,1",
        "0.5,0.33333333333333331",
    ]
    assert "\r" not in text


def test_metadata_and_data_read_back(tmp_path):
    frame = pd.DataFrame({"t": np.linspace(0.0, 1.0, 4), "P": np.array([1.0, 0.3, 0.2, 0.9])})
    path = write_csv(frame, tmp_path / "run.csv", {"omega0": 0.3, "outputs": ("revival", "spectrum")})
    assert read_metadata(path) == {"omega0": "0.29999999999999999", "outputs": "revival,spectrum"}
    pd.testing.assert_frame_equal(read_csv(path), frame)


def test_identical_inputs_give_identical_bytes(tmp_path):
    frame = pd.DataFrame({"x": np.random.default_rng(0).normal(size=20)})
    first = write_csv(frame, tmp_path / "a.csv", {"seed": 0}).read_bytes()
    second = write_csv(frame, tmp_path / "b.csv", {"seed": 0}).read_bytes()
    assert first == second


def test_metadata_must_fit_one_line(tmp_path):
    with pytest.raises(ValidationError):
        write_csv(pd.DataFrame({"a": [1]}), tmp_path / "bad.csv", {"note": "two\nlines"})


def test_clamp_probabilities(caplog):
    with caplog.at_level(logging.WARNING):
        clamped, count = clamp_probabilities([-0.01, 0.5, 1.2], "two-mode")
    assert clamped.tolist() == [0.0, 0.5, 1.0]
    assert count == 2
    assert "Clamped 2 two-mode" in caplog.text
    _, untouched = clamp_probabilities([0.0, 1.0])
    assert untouched == 0
