import csv
import shutil
from pathlib import Path

import numpy as np
import pytest
import yaml
from scipy.stats import poisson

from cointjump.cli import EXIT_INVALID, EXIT_MISMATCH, EXIT_NUMERICAL, EXIT_OK, main
from cointjump.config import load_config, validate_config
from cointjump.errors import ConfigError

CONFIGS = Path(__file__).resolve().parents[1] / "src" / "cointjump" / "configs"
DATA = Path(__file__).resolve().parents[1] / "data"


def write(tmp_path, doc, name="run.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(doc))
    return p


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(ln for ln in fh if not ln.startswith("#")))


PMF_DOC = {"dependence": {"kind": "cointegrated", "lambda1": 4.0, "lambda2": 3.0, "a": 0.5},
           "option": {"maturity": 1.0}}


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.yaml")))
def test_shipped_configs_validate(name):
    load_config(CONFIGS / name)


@pytest.mark.parametrize("doc, key", [
    ({"dependence": {"kind": "cointegrated", "lambda1": 1, "lambda2": 1, "a": 0.5, "alpha": 1}}, "dependence.alpha"),
    ({"dependance": {}}, "dependance"),
    ({"dependence": {"kind": "cointegrated", "lambda1": 1, "lambda2": 1}}, "dependence"),
    ({"dependence": {"kind": "cointegrated", "lambda1": -1, "lambda2": 1, "a": 0.5}}, "dependence.lambda1"),
    ({"numerics": {"tail_tol": 0.01}}, "numerics.tail_tol"),
    ({"option": {"kind": "call", "strike": 1.0}}, "option"),
    ({"model": {"kind": "merton", "legs": [{"sigma": 0.2, "jump_m": 1.0, "jump_nu": 0.1}]}}, "model"),
])
def test_schema_errors_name_the_offending_key(doc, key):
    with pytest.raises(ConfigError) as exc:
        validate_config(doc)
    assert key in str(exc.value)


def test_config_hash_and_overrides():
    cfg = validate_config(PMF_DOC)
    assert cfg.config_hash() == validate_config(dict(PMF_DOC)).config_hash()
    other = cfg.with_overrides(seed=5)
    assert other.numerics.seed == 5 and other.config_hash() != cfg.config_hash()
    with pytest.raises(ConfigError):
        cfg.with_overrides(tail_tol=1.0)
    with pytest.raises(ConfigError):
        validate_config([1, 2])


def test_pmf_command_writes_the_joint_law(tmp_path):
    assert main(["pmf", "--config", str(write(tmp_path, PMF_DOC)), "--out", str(tmp_path)]) == EXIT_OK
    rows = read_rows(tmp_path / "pmf.csv")
    m = np.array([int(r["m"]) for r in rows])
    p = np.array([float(r["prob"]) for r in rows])
    marg1 = np.bincount(m, weights=p)
    np.testing.assert_allclose(marg1, poisson.pmf(np.arange(marg1.size), 4.0), atol=1e-12)
    assert (tmp_path / "pmf.csv").read_text().startswith("# cointjump v")


def test_outputs_are_byte_identical_across_runs(tmp_path):
    doc = dict(PMF_DOC, numerics={"n_paths": 3000, "seed": 4})
    cfg = write(tmp_path, doc)
    for sub in ("a", "b"):
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / sub)]) == EXIT_OK
    assert (tmp_path / "a" / "counts.csv").read_bytes() == (tmp_path / "b" / "counts.csv").read_bytes()
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "c"), "--seed", "5"]) == EXIT_OK
    assert (tmp_path / "a" / "counts.csv").read_bytes() != (tmp_path / "c" / "counts.csv").read_bytes()


def test_price_command_with_monte_carlo_columns(tmp_path):
    assert main(["price", "--config", str(CONFIGS / "merton_call.yaml"), "--out", str(tmp_path),
                 "--paths", "20000"]) == EXIT_OK
    row = read_rows(tmp_path / "price.csv")[0]
    assert abs(float(row["value"]) - float(row["mc_estimate"])) < 4 * float(row["mc_std_error"])


def test_invalid_config_exits_with_code_two(tmp_path, capsys):
    bad = write(tmp_path, {"dependence": {"kind": "gaussian", "lambda1": 1, "lambda2": 1}})
    assert main(["pmf", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_INVALID
    assert "dependence.kind" in capsys.readouterr().err
    assert main(["pmf", "--config", str(tmp_path / "missing.yaml"), "--out", str(tmp_path)]) == EXIT_INVALID


def test_numerical_failure_exits_with_code_three(tmp_path):
    doc = {"dependence": {"kind": "independent", "lambda1": 20.0, "lambda2": 20.0},
           "model": {"kind": "merton", "legs": [{"s0": 100, "sigma": 0.2, "jump_m": 1.1, "jump_nu": 0.1},
                                                {"s0": 100, "sigma": 0.15, "jump_m": 1.1, "jump_nu": 0.07}],
                     "rho_w": 0.8, "rho_d": 0.99},
           "option": {"kind": "spread", "maturity": 1.0},
           "numerics": {"max_error": 1e-16}}
    assert main(["price", "--config", str(write(tmp_path, doc)), "--out", str(tmp_path)]) == EXIT_NUMERICAL


def test_misaligned_inputs_exit_with_code_two(tmp_path):
    shutil.copy(DATA / "synthetic_eex.csv", tmp_path / "s1.csv")
    lines = (DATA / "synthetic_powernext.csv").read_text().splitlines()
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    (tmp_path / "s2.csv").write_text("\n".join([body[0]] + body[2:]) + "\n")
    doc = {"io": {"input1": "s1.csv", "input2": "s2.csv"}, "calibration": {"kinds": ["independent"]}}
    assert main(["calibrate", "--config", str(write(tmp_path, doc)), "--out", str(tmp_path)]) == EXIT_INVALID


def test_reproduce_table2_passes(tmp_path):
    assert main(["reproduce", "table2", "--out", str(tmp_path)]) == EXIT_OK
    rows = read_rows(tmp_path / "table2_report.csv")
    assert len(rows) == 4


def test_mismatch_exit_code_is_distinct():
    assert len({EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_MISMATCH}) == 4
