import json
from importlib import resources

import numpy as np
import pytest

from padic_mumford import config
from padic_mumford.cli import EXIT_INVALID, EXIT_NUMERIC, EXIT_OK, main
from padic_mumford.kernelop import KernelError

G2 = str(resources.files("padic_mumford") / "fixtures" / "fixture-g2.toml")
G3 = str(resources.files("padic_mumford") / "fixtures" / "fixture-g3.toml")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# -- config ---------------------------------------------------------------


def test_fixtures_are_packaged():
    assert config.fixture_names() == ["fixture-g2", "fixture-g3"]
    with pytest.raises(config.ConfigError):
        config.load_fixture("fixture-g9")


def test_round_trip(cfg_g3):
    again = config.loads(cfg_g3.dumps())
    assert again.to_dict() == cfg_g3.to_dict()
    assert again.group().genus == 3


def test_missing_key_reports_line(cfg_g2):
    text = cfg_g2.dumps().replace('C = "1"\nzeros', 'zeros', 1)
    with pytest.raises(config.ConfigError) as exc:
        config.loads(text)
    assert "missing key 'C'" in str(exc.value)
    assert exc.value.line is not None


def test_syntax_error_reports_line():
    with pytest.raises(config.ConfigError) as exc:
        config.loads("p = 5\ngroup = [\n")
    assert exc.value.line is not None


def test_bad_rational_rejected(cfg_g2):
    text = cfg_g2.dumps().replace('ends = [\n    "5",', 'ends = [\n    "5/x",', 1)
    with pytest.raises(config.ConfigError):
        config.loads(text)


def test_unbalanced_kernel_rejected(cfg_g2):
    data = cfg_g2.to_dict()
    data["kernel"]["poles"] = data["kernel"]["poles"][:1]
    with pytest.raises(KernelError):
        config.from_dict(data).kernel_spec()


# -- command line -----------------------------------------------------------


def test_genus_command(capsys):
    code, out, _ = run(capsys, "genus", G2)
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["genus"] == 2 and rep["n_a"] == [2]
    assert {"ends", "n_a", "genus", "confidence"} <= set(rep)


def test_spectrum_command(capsys):
    code, out, _ = run(capsys, "spectrum", "--depth", "12", G3)
    assert code == EXIT_OK
    rep = json.loads(out)
    assert len(rep["accumulation_candidates"]) == len(rep["ends"]) == 2
    code, out, _ = run(capsys, "spectrum", "--emit", "csv", G2)
    assert out.splitlines()[0] == "index,eigenvalue"


def test_tree_command(capsys, tmp_path):
    target = tmp_path / "tree.json"
    code, out, _ = run(capsys, "tree", G2, "--out", str(target))
    assert code == EXIT_OK and out == ""
    nodes = json.loads(target.read_text())["nodes"]
    assert {"id", "center", "k", "nu", "neighbors"} <= set(nodes[0])


def test_heat_command(capsys, tmp_path):
    code, out, _ = run(capsys, "heat", G2, "--t-grid", "0,1,10", "--h0", "delta:0")
    assert code == EXIT_OK
    rows = [line.split(",") for line in out.splitlines()]
    assert rows[0][0] == "t" and len(rows) == 4
    # mass flows out of the delta but stays a probability vector in the nu-weighted sense
    values = np.array([[float(x) for x in r[1:]] for r in rows[1:]])
    assert values[0, 0] == 1.0 and values[-1, 0] < 1.0
    h0 = tmp_path / "h0.txt"
    n = len(rows[0]) - 1
    h0.write_text(" ".join(["1"] * n))
    code, out, _ = run(capsys, "heat", G2, "--t-grid", "0,1", "--h0", str(h0))
    assert code == EXIT_OK
    assert all(abs(float(x) - 1) < 1e-9 for x in out.splitlines()[2].split(",")[1:])


def test_sample_paths_are_byte_identical(capsys):
    _, first, _ = run(capsys, "sample-paths", G2, "--n", "5", "--horizon", "3", "--seed", "9")
    _, second, _ = run(capsys, "sample-paths", G2, "--n", "5", "--horizon", "3", "--seed", "9")
    assert first == second
    lines = first.splitlines()
    assert len(lines) == 5 and json.loads(lines[0])["vertices"][0] == 0


def test_theta_product_command(capsys):
    code, out, _ = run(capsys, "theta", G2, "--a", "3", "--b", "4", "--z", "1/7")
    assert code == EXIT_OK
    assert {"value", "valuation", "tail_estimate"} <= set(json.loads(out))


def test_exit_code_on_invalid_config(capsys, tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("p = \n")
    code, _, err = run(capsys, "genus", str(bad))
    assert code == EXIT_INVALID
    assert "line 1" in err
    code, _, _ = run(capsys, "genus", str(tmp_path / "missing.toml"))
    assert code == EXIT_INVALID


def test_exit_code_on_non_convergence(capsys):
    code, _, err = run(capsys, "genus", G2, "--levels", "3")
    assert code == EXIT_NUMERIC
    assert "stabilized" in err


def test_make_fixture_rejects_bad_exponents(capsys):
    code, _, err = run(capsys, "hyperelliptic", "make-fixture", "--centers", "0:2,2:2", "--m", "1,1")
    assert code == EXIT_INVALID
    assert "g - 1" in err


def test_verify_command(capsys):
    code, out, _ = run(capsys, "verify", G2)
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["passed"] and rep["genus"]["genus"] == 2
