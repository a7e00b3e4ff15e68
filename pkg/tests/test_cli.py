import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest

from modal_homodyne.cli import (
    EXIT_CONFIG,
    EXIT_NUMERIC,
    EXIT_OK,
    EXIT_STATISTICAL,
    load_config,
    main,
)

GOLDEN = Path(__file__).parent / "golden"


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], np.array(rows[1:], dtype=float)
    return header, data


def assert_json_close(actual, expected, rtol=1e-9):
    assert type(actual) is type(expected), (actual, expected)
    if isinstance(expected, dict):
        assert set(actual) == set(expected)
        for key in expected:
            assert_json_close(actual[key], expected[key], rtol)
    elif isinstance(expected, float):
        assert actual == pytest.approx(expected, rel=rtol, abs=1e-300)
    else:
        assert actual == expected


def test_fig3_output(tmp_path):
    assert main(["fig3", "--out", str(tmp_path)]) == EXIT_OK
    header, data = read_csv(tmp_path / "fig3.csv")
    assert header == ["gamma", "snr_total_db", "snr_filtered_db", "gain_db"]
    assert data.shape[0] >= 200
    gammas = data[:, 0]
    assert np.all(np.diff(gammas) > 0)
    row = data[np.argmin(np.abs(gammas - 1e-2))]
    assert row[0] == pytest.approx(1e-2, rel=1e-12)
    assert row[3] == pytest.approx(13.0, abs=0.5)
    # gain column is the difference of the two SNR columns
    np.testing.assert_allclose(data[:, 3], data[:, 2] - data[:, 1], atol=1e-9)
    # nothing left to filter at perfect mode matching: gain ~ -10log10(1+r*eta_f)
    assert data[-1, 0] == pytest.approx(1.0)
    assert data[-1, 3] == pytest.approx(-10.0 * math.log10(1.0 + 20.0 * 1e-3), abs=1e-9)


def test_fig3_golden_regression(tmp_path):
    assert main(["fig3", "--out", str(tmp_path)]) == EXIT_OK
    _, fresh = read_csv(tmp_path / "fig3.csv")
    _, golden = read_csv(GOLDEN / "fig3.csv")
    np.testing.assert_allclose(fresh, golden, rtol=1e-12)


def test_fig5_output(tmp_path):
    assert main(["fig5", "--out", str(tmp_path)]) == EXIT_OK
    header, data = read_csv(tmp_path / "fig5.csv")
    assert header == ["gamma", "x", "density"]
    gammas = np.unique(data[:, 0])
    np.testing.assert_allclose(gammas, [0.0, 0.5, 1.0 / math.sqrt(2.0), 1.0], rtol=1e-9)
    summary = json.loads((tmp_path / "fig5_summary.json").read_text())
    for mass in summary["total_mass"].values():
        assert mass == pytest.approx(1.0, abs=1e-6)
    # every curve is even in x
    for g in gammas:
        block = data[data[:, 0] == g]
        np.testing.assert_allclose(block[:, 2], block[::-1, 2], atol=1e-12)


def test_appendix_i_golden(tmp_path):
    assert main(["appendix-i", "--out", str(tmp_path)]) == EXIT_OK
    fresh = json.loads((tmp_path / "appendix_i.json").read_text())
    golden = json.loads((GOLDEN / "appendix_i.json").read_text())
    assert_json_close(fresh, golden)


def test_tophat_golden(tmp_path):
    assert main(["tophat", "--out", str(tmp_path)]) == EXIT_OK
    fresh = json.loads((tmp_path / "tophat.json").read_text())
    golden = json.loads((GOLDEN / "tophat.json").read_text())
    assert_json_close(fresh, golden)


def test_sample_deterministic_and_golden(tmp_path):
    assert main(["sample", "--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(["sample", "--out", str(tmp_path / "b")]) == EXIT_OK
    a = json.loads((tmp_path / "a" / "sample_stats.json").read_text())
    b = json.loads((tmp_path / "b" / "sample_stats.json").read_text())
    assert a == b
    golden = json.loads((GOLDEN / "sample_stats.json").read_text())
    assert_json_close(a, golden)


def test_sample_flag_overrides(tmp_path):
    assert main(["sample", "--out", str(tmp_path), "--shots", "2000", "--seed", "42"]) == EXIT_OK
    stats = json.loads((tmp_path / "sample_stats.json").read_text())
    assert stats["n_shots"] == 2000
    assert stats["seed"] == 42


def test_sample_dump_counts(tmp_path):
    config = load_config("sample", None)
    config.update({"n_shots": 10, "n_points": 10000, "dump_counts": True})
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    assert main(["sample", "--config", str(path), "--out", str(tmp_path)]) == EXIT_OK
    header, data = read_csv(tmp_path / "sample_record.csv")
    assert header == ["bin_index", "n1", "n2"]
    assert data.shape == (10000, 3)
    assert np.all(data[:, 1:] >= 0)


def test_validate_passes(tmp_path):
    config = load_config("validate", None)
    config.update({"ks_shots": 20000, "snr_shots": 200000, "snr_tol_db": 0.5})
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    assert main(["validate", "--config", str(path), "--out", str(tmp_path)]) == EXIT_OK
    report = json.loads((tmp_path / "validate_report.json").read_text())
    assert report["passed"]
    assert set(report["checks"]) == {
        "ks_unfiltered",
        "filtered_snr",
        "energy_bookkeeping",
        "determinism",
    }


def test_validate_statistical_failure(tmp_path):
    # an absurdly tight SNR tolerance cannot be met by any finite sample
    config = load_config("validate", None)
    config.update({"ks_shots": 5000, "snr_shots": 5000, "snr_tol_db": 1e-9})
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    assert main(["validate", "--config", str(path), "--out", str(tmp_path)]) == EXIT_STATISTICAL


def test_unknown_config_key_rejected(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"version": 1, "mystery_knob": 3}))
    assert main(["fig3", "--config", str(path), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_wrong_config_version_rejected(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"version": 99}))
    assert main(["fig5", "--config", str(path), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_malformed_config_rejected(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("{not json")
    assert main(["sample", "--config", str(path), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_misaligned_sampler_geometry_rejected(tmp_path):
    config = load_config("sample", None)
    config["n_points"] = 1000  # gamma^2 * n_points = 0.1, not a whole bin count
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    assert main(["sample", "--config", str(path), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_numerical_contract_violation_exit(tmp_path):
    config = load_config("tophat", None)
    config["t1_s"] = 2.0 * config["t_interval_s"]
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    assert main(["tophat", "--config", str(path), "--out", str(tmp_path)]) == EXIT_NUMERIC


def test_grid_points_flag_rejected_where_unused(tmp_path):
    assert main(["appendix-i", "--out", str(tmp_path), "--grid-points", "128"]) == EXIT_CONFIG
