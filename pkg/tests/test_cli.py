import csv
import json
import os

import pytest
from hypothesis import given, strategies as st

from jordanchain import acceptance, cli, kvformat
from jordanchain.acceptance import CheckResult
from jordanchain.errors import ValidationError

CUBIC_CFG = """\
# W~_u = u^3 - u
N = 1
tilde_coeffs = [0, 0, -1, 0, 6]
times = [0, 1]
k = 2
seed_u = [0]
"""

EXPONENTS_CFG = """\
N = 2
times = [0, 1.0]
tilde_coeffs = [0, 0, 0, 0, 0, 1]
k = 1
seed_u = [0.9, -0.45]
free_times = [0]
"""


def _run(tmp_path, command, text, *extra, out="out"):
    cfg = tmp_path / f"{command}.cfg"
    cfg.write_text(text)
    target = tmp_path / out
    return cli.main([command, "--config", str(cfg), "--output", str(target), *extra]), target


def _rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_catastrophe_row(tmp_path):
    status, out = _run(tmp_path, "catastrophe", CUBIC_CFG)
    assert status == 0
    header, row = _rows(out / "catastrophe.csv")
    assert header == ["x0", "t0", "u0_1", "k", "slope"]
    vals = [float(v) for v in row]
    assert vals[:4] == pytest.approx([0, 1, 0, 2], abs=1e-10)
    assert vals[4] == pytest.approx(-2 / 3, abs=0.01)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "catastrophe"
    assert manifest["files"] == ["catastrophe.csv"]


def test_missing_key_writes_nothing(tmp_path, capsys):
    status, out = _run(tmp_path, "catastrophe", "N = 1\n")
    assert status == 2
    assert not out.exists()
    assert "ValidationError" in capsys.readouterr().err


def test_unknown_key_rejected(tmp_path):
    status, out = _run(tmp_path, "density", "N = 2\nparams = [0, 1]\nu_min = -1\nu_max = 1\nn_points = 5\ncolour = red\n")
    assert status == 2 and not out.exists()


def test_domain_error_exit_code(tmp_path):
    status, out = _run(tmp_path, "density", "N = 2\nparams = [0, -1]\nu_min = -1\nu_max = 1\nn_points = 5\n")
    assert status == 2 and not out.exists()


def test_numerical_failure_exit_code(tmp_path):
    # Newton cannot leave a fold seed, which is a numerical failure
    text = "N = 1\ntilde_coeffs = [0, 0, 0, 2]\ntimes = [0, 2]\nk = 1\nseed_u = [5e8]\n"
    status, _ = _run(tmp_path, "catastrophe", text)
    assert status == 3


def test_config_required(tmp_path):
    assert cli.main(["density", "--output", str(tmp_path / "o")]) == 2


def test_deterministic_across_runs_and_jobs(tmp_path):
    s1, o1 = _run(tmp_path, "exponents", EXPONENTS_CFG, out="a")
    s2, o2 = _run(tmp_path, "exponents", EXPONENTS_CFG, "--jobs", "2", out="b")
    assert s1 == s2 == 0
    assert (o1 / "exponents.csv").read_bytes() == (o2 / "exponents.csv").read_bytes()


def test_density_table_and_plot(tmp_path):
    text = "N = 2\nparams = [0.3, 0.7]\nu_min = -2\nu_max = 2\nn_points = 11\n"
    status, out = _run(tmp_path, "density", text)
    assert status == 0
    rows = _rows(out / "density.csv")
    assert rows[0] == ["u", "G"] and len(rows) == 12
    # 17 significant digits survive a round trip
    assert float(rows[1][0]) == -2.0
    svg = (out / "density.svg").read_text()
    assert "<svg" in svg and 'version="1.1"' in svg
    _, again = _run(tmp_path, "density", text, out="again")
    assert (again / "density.svg").read_bytes() == (out / "density.svg").read_bytes()
    assert not [f for f in os.listdir(out) if f.startswith(".tmp-")]


@pytest.mark.parametrize("command,text,table", [
    ("bh-solve", "tilde_coeffs = [0, 0, 1]\nx_min = -1\nx_max = 1\nn_points = 21\nt = 1\n", "bh_solution"),
    ("jordan-solve", "N = 2\ntilde_coeffs = [0, 0, 1, 1, 0.1]\nx_min = -1\nx_max = 1\nn_points = 51\n"
                     "t_end = 0.02\ndt = 0.004\n", "jordan_solution"),
    ("average", "N = 2\nparams = [0.3, 0.7]\ntilde_coeffs = [0, 0, 1]\nn_max = 3\n", "moments"),
    ("burgers", "nu = 1.0\nt = 0.3\nn_points = 32\n", "burgers_momenta"),
    ("kdv", "c = 1.0\nt = 0.2\nn_points = 128\n", "kdv"),
    ("el", "k = 2\na = 0.01\ntau = -1\nA = 0.25\ny_min = -3\ny_max = 3\nn_points = 301\n", "el_solution"),
])
def test_commands_produce_tables(tmp_path, command, text, table):
    status, out = _run(tmp_path, command, text)
    assert status == 0
    rows = _rows(out / f"{table}.csv")
    assert len(rows) >= 2
    assert all(len(r) == len(rows[0]) for r in rows)


def test_bh_solve_values(tmp_path):
    status, out = _run(tmp_path, "bh-solve", "tilde_coeffs = [0, 0, 1]\nx_min = -1\nx_max = 1\nn_points = 5\nt = 1\n")
    rows = _rows(out / "bh_solution.csv")[1:]
    for x, u, _ in rows:
        assert float(u) == pytest.approx(-float(x) / 2, abs=1e-12)


def test_average_moments_match_schur(tmp_path):
    status, out = _run(tmp_path, "average", "N = 2\nparams = [0.3, 0.7]\ntilde_coeffs = [0, 0, 1]\nn_max = 4\n")
    for _, m, p in _rows(out / "moments.csv")[1:]:
        assert float(m) == pytest.approx(float(p), abs=1e-8)


def _fake_results(passed):
    return [CheckResult(i + 1, f"criterion {i + 1}", passed or i != 3) for i in range(len(acceptance.CHECKS))]


@pytest.mark.parametrize("passed,code", [(True, 0), (False, 3)])
def test_verify_table(tmp_path, monkeypatch, capsys, passed, code):
    monkeypatch.setattr(acceptance, "run_all", lambda scale, jobs: _fake_results(passed))
    status = cli.main(["verify", "--output", str(tmp_path / "v")])
    assert status == code
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == len(acceptance.CHECKS)
    assert all(line.startswith("[PASS]") or line.startswith("[FAIL]") for line in lines)
    assert ("[FAIL]" in lines[3]) == (not passed)


def test_run_config_validation():
    with pytest.raises(ValidationError):
        cli.RunConfig("bogus", {}, "o")
    with pytest.raises(ValidationError):
        cli.RunConfig("verify", {}, "o", jobs=0)
    with pytest.raises(ValidationError):
        cli.RunConfig("verify", {}, "o", tolerance_scale=-1)


# ---------------------------------------------------------------- config format

def test_kv_grammar():
    m = kvformat.parse_text("a = 1  # int\nb = [1, 2.5, x]\n\nc = true\nd = 'q'\n")
    assert m == {"a": 1, "b": [1, 2.5, "x"], "c": True, "d": "q"}


def test_kv_errors():
    with pytest.raises(ValidationError):
        kvformat.parse_text("no equals sign\n")
    with pytest.raises(ValidationError):
        kvformat.parse_text("a = [1, 2\n")


scalar = st.one_of(st.integers(-10 ** 6, 10 ** 6), st.floats(allow_nan=False, allow_infinity=False),
                   st.booleans())


@given(st.dictionaries(st.from_regex(r"[a-z][a-z_0-9]{0,8}", fullmatch=True),
                       st.one_of(scalar, st.lists(scalar, max_size=4)), max_size=6))
def test_kv_round_trip(mapping):
    assert kvformat.parse_text(kvformat.format_text(mapping)) == mapping
