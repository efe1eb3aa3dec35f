import json
import math

import numpy as np
import pandas as pd
import pytest


def test_report__write_json_is_canonical(tmp_path):
    from tcopula_bayes._report import read_json, write_json

    path = write_json(
        tmp_path / "nested" / "out.json",
        {
            "b": np.float64(1.5),
            "a": (np.int64(2), np.array([0.25, math.inf])),
            "c": {1: float("nan"), "path": tmp_path},
        },
    )

    assert path.read_text() == json.dumps(
        {
            "a": [2, [0.25, None]],
            "b": 1.5,
            "c": {"1": None, "path": str(tmp_path)},
        },
        sort_keys=True,
        indent=2,
    ) + "\n"
    assert read_json(path)["a"] == [2, [0.25, None]]


def test_report__read_json_errors(tmp_path):
    from tcopula_bayes._errors import DataError
    from tcopula_bayes._report import read_json

    broken = tmp_path / "broken.json"
    broken.write_text("{")

    with pytest.raises(DataError, match="Cannot read"):
        read_json(broken)
    with pytest.raises(DataError, match="Cannot read"):
        read_json(tmp_path / "absent.json")


def test_report__write_rows_keeps_full_precision(tmp_path):
    from tcopula_bayes._report import write_rows

    path = write_rows(tmp_path / "rows.csv", [{"x": 0.1, "n": 3}, {"x": 1 / 3, "n": 4}])

    frame = pd.read_csv(path, float_precision="round_trip")
    assert frame["x"].tolist() == [0.1, 1 / 3]
    assert frame["n"].tolist() == [3, 4]


def test_report__render_table():
    from tcopula_bayes._report import render_table

    text = render_table([{"model": "M1", "dic": 2354.33333}], digits=3)

    assert "model" in text
    assert "2.35e+03" in text
    assert render_table([]) == "(empty)"


def test_report__garch_rows():
    from tcopula_bayes._garch import GarchParams
    from tcopula_bayes._report import garch_rows

    fit = GarchParams(mu=0.0, omega=1e-6, alpha=0.05, beta=0.9, sigma0_sq=1e-4)

    rows = garch_rows([fit], ["EUR"])

    assert rows[0]["label"] == "EUR"
    assert rows[0]["beta"] == 0.9
    assert set(rows[0]) >= {"mu", "omega", "alpha", "sigma0_sq", "converged"}


def test_report__comparison_rows():
    from tcopula_bayes._report import comparison_rows
    from tcopula_bayes._risk import CvarComparison, CvarEstimate

    a = CvarEstimate(alpha=0.99, var=1.0, cvar=2.0, std_error=0.1, n_exceed=100, n_sims=10000)
    b = CvarEstimate(alpha=0.99, var=1.5, cvar=3.0, std_error=0.2, n_exceed=100, n_sims=10000)
    comparison = CvarComparison(
        portfolio="p", model_a="M1", model_b="M2", estimate_a=a, estimate_b=b,
        delta=0.5, delta_se=0.05,
    )

    (row,) = comparison_rows([comparison])

    assert row["portfolio"] == "p"
    assert row["alpha"] == 0.99
    assert (row["a_cvar"], row["b_cvar"]) == (2.0, 3.0)
    assert (row["a_n_exceed"], row["b_std_error"]) == (100, 0.2)
    assert (row["delta"], row["delta_se"]) == (0.5, 0.05)


def test_report__write_selection(tmp_path):
    from tcopula_bayes._report import write_selection
    from tcopula_bayes._selection import ModelScore, SelectionReport
    from tcopula_bayes._types import GroupConfig

    report = SelectionReport(
        (ModelScore("M1", GroupConfig((0, 0)), status="failed", error="x"),),
        ("A", "B"),
    )

    written = write_selection(report, tmp_path)

    assert [path.name for path in written] == [
        "selection.json",
        "posterior.csv",
        "modes.csv",
        "criteria.csv",
    ]
    assert all(path.exists() for path in written)


def test_report__copy_config(tmp_path):
    from tcopula_bayes._report import copy_config

    source = tmp_path / "my.ini"
    source.write_text("[chain]\nseed = 1\n")

    target = copy_config(source, tmp_path / "out")

    assert target.name == "run.ini"
    assert target.read_text() == source.read_text()
    assert copy_config(target, tmp_path / "out") == target


def test_report__copy_config_records_overrides(tmp_path):
    import configparser

    from tcopula_bayes._report import copy_config

    source = tmp_path / "my.ini"
    source.write_text("[chain]\nseed = 1\n")

    target = copy_config(
        source,
        tmp_path / "out",
        {"chain.seed": 9, "output.directory": "/runs/a", "x.y": None},
    )

    parser = configparser.ConfigParser()
    parser.read(target)
    assert parser.get("chain", "seed") == "1"
    assert dict(parser.items("cli")) == {
        "chain.seed": "9",
        "output.directory": "/runs/a",
    }
    assert source.read_text() == "[chain]\nseed = 1\n"


def test_report__write_manifest(tmp_path):
    import hashlib

    from tcopula_bayes._report import MANIFEST_NAME, write_manifest

    (tmp_path / "b.txt").write_text("beta")
    (tmp_path / "sub").mkdir()
    (tmp_path / "sub" / "a.txt").write_text("alpha")

    manifest = write_manifest(tmp_path)
    again = write_manifest(tmp_path).read_text()

    lines = manifest.read_text().splitlines()
    assert manifest.name == MANIFEST_NAME
    assert lines == [
        f"{hashlib.sha256(b'beta').hexdigest()}  b.txt",
        f"{hashlib.sha256(b'alpha').hexdigest()}  sub/a.txt",
    ]
    assert again == manifest.read_text()
