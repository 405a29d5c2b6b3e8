import json
import subprocess
import sys

import pytest

from artifact.cli import ConfigError, RunConfig, main, parse_matrix, parse_range, read_config_file


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_theta_prints_t_basis_expansion(capsys):
    code, out, _ = run_cli(capsys, "theta", "--datum", "SL2", "--lam", "-1")
    assert code == 0
    assert "T[e]: 1 - 2*q^-1 + q^-2" in out
    assert "T[s0s1]: q^-2" in out
    assert out.rstrip().endswith("overall: PASS")


def test_plancherel_table_has_five_passing_rows(capsys):
    code, out, _ = run_cli(capsys, "plancherel", "--nu-range", "-2..2", "--json")
    assert code == 0
    report = json.loads(out)
    assert len(report["output"]["rows"]) == 5
    assert all(row.endswith("pass") for row in report["output"]["rows"])
    assert [c["name"] for c in report["checks"]] == [f"nu={n}" for n in range(-2, 3)]


def test_unknown_datum_is_a_config_error(capsys):
    code, _, err = run_cli(capsys, "theta", "--datum", "GL3")
    assert code == 2
    assert "GL3" in err
    with pytest.raises(ConfigError):
        RunConfig(datum="GL3").validate()


@pytest.mark.parametrize("bad", [{"p": 4}, {"level": 9}, {"nu_range": (2, -2)}, {"trials": 0}, {"chart": "sphere"}])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        RunConfig(**bad).validate()


def test_module_error_surfaces_with_context(capsys):
    code, _, err = run_cli(capsys, "cosets", "--op", "psi", "--matrix", "p,0;0,1/p")
    assert code == 1
    assert "NotDeep" in err


def test_parsers():
    assert parse_range("-3..4") == (-3, 4)
    with pytest.raises(ConfigError):
        parse_range("1-2")
    assert parse_matrix("p,0;0,1/p", 3) == (3, 0, 0, pytest.approx(1 / 3))
    with pytest.raises(ConfigError):
        parse_matrix("1,2,3", 3)


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# plancherel sweep\nnu-range = -1..1\nq_mode = numeric\n")
    assert read_config_file(str(cfg)) == {"nu_range": (-1, 1), "q_mode": "numeric"}
    code, out, _ = run_cli(capsys, "plancherel", "--config", str(cfg), "--json")
    assert code == 0
    report = json.loads(out)
    assert report["config"]["nu_range"] == [-1, 1]
    assert len(report["output"]["rows"]) == 3
    code, out, _ = run_cli(capsys, "plancherel", "--config", str(cfg), "--nu-range", "0..0", "--json")
    assert json.loads(out)["config"]["nu_range"] == [0, 0]


def test_config_file_errors(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    with pytest.raises(ConfigError):
        read_config_file(str(cfg))
    with pytest.raises(ConfigError):
        read_config_file(str(tmp_path / "missing.cfg"))


def test_json_schema_shape(capsys):
    code, out, _ = run_cli(capsys, "cosets", "--json")
    report = json.loads(out)
    assert set(report) == {"schema", "command", "config", "output", "checks", "ok"}
    assert report["schema"] == 1 and report["command"] == "cosets"
    for check in report["checks"]:
        assert set(check) == {"name", "pass", "details"}
    assert report["ok"] is (code == 0)


@pytest.mark.parametrize("argv", [
    ("radon-check", "--level", "2", "--trials", "3", "--seed", "5", "--json"),
    ("specialize-check", "--chart", "cover", "--json"),
    ("cosets", "--op", "psi", "--matrix", "p^3,0;0,p^-3", "--seed", "2", "--json"),
])
def test_reports_are_byte_identical(capsys, argv):
    first = run_cli(capsys, *argv)
    second = run_cli(capsys, *argv)
    assert first == second
    assert first[0] == 0


def test_specialize_report_records_thresholds(capsys):
    code, out, _ = run_cli(capsys, "specialize-check", "--chart", "pgl2-boundary", "--p", "3", "--level", "3", "--trials", "3", "--json")
    assert code == 0
    report = json.loads(out)
    assert report["output"]["N(m)"] == 1
    assert report["output"]["lambda_0"] == [[1]]
    assert "equivariance_radius" in report["output"]


def test_radon_report_records_gamma_table(capsys):
    code, out, _ = run_cli(capsys, "radon-check", "--level", "2", "--trials", "2", "--json")
    assert code == 0
    table = json.loads(out)["output"]["gamma_table"]
    assert {row["index"] for row in table} == {0, 1}
    assert all(row["functions"] >= 3 for row in table)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "artifact", "theta", "--lam", "2"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "overall: PASS" in proc.stdout
