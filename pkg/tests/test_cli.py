import subprocess
import sys
from pathlib import Path

import pytest

from fsperturb import cli

DATA = Path(__file__).parent / "data"
H0 = str(DATA / "h0_2x2.txt")


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def problem(w, *extra):
    return ["--h0", H0, "--w", str(DATA / w), "--lam0-index", "1", *extra]


def test_certify_valid(capsys):
    code, out, _ = run(capsys, "certify", *problem("w_2x2.txt", "--a", "0.1", "--b", "0.1"))
    assert code == cli.EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "valid=true"
    values = dict(line.split("=", 1) for line in lines)
    assert float(values["delta"]) == pytest.approx(0.0125, abs=1e-15)
    assert float(values["phi"]) == pytest.approx(0.01, abs=1e-15)
    assert values["k"] == "1.25" and values["m"] == "1"


def test_certify_failure_exit_code(capsys):
    code, out, _ = run(capsys, "certify", *problem("w_big.txt"))
    assert code == cli.EXIT_CERT
    assert "cond1=false" in out.splitlines()
    # with the default a = 0.1, b = 0.8 the 2x2 example sits exactly on the strict boundary
    code, out, _ = run(capsys, "certify", *problem("w_2x2.txt"))
    assert code == cli.EXIT_CERT and "cond2=false" in out.splitlines()


def test_solve_check(capsys):
    code, out, _ = run(capsys, "solve", *problem("w_2x2.txt", "--a", "0.1", "--b", "0.1", "--check"))
    assert code == cli.EXIT_OK
    assert "lam_i=0.9900980486" in out and "brute_force_lam=0.9900980486" in out
    assert "in_interval=true" in out


def test_solve_csv(capsys):
    code, out, _ = run(capsys, "solve", *problem("w_2x2.txt", "--a", "0.1", "--b", "0.1", "--csv"))
    assert code == cli.EXIT_OK
    header, row = out.splitlines()
    assert header == ",".join(cli.SOLVE_HEADER)
    assert row.startswith("1,0.9900980486,")


def test_solve_unperturbed(capsys):
    code, out, _ = run(capsys, "solve", *problem("w_zero.txt"))
    assert code == cli.EXIT_OK
    assert "lam_i=1 " in out and "iterations=1 " in out


def test_solve_exit_codes(capsys):
    code, _, err = run(capsys, "solve", *problem("w_shift.txt"))
    assert code == cli.EXIT_CERT and "--force" in err
    code, out, _ = run(capsys, "solve", *problem("w_shift.txt", "--force"))
    assert code == cli.EXIT_SOLVER
    assert "error:" in out


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["certify", "--h0", H0],
    ["certify", "--h0", H0, "--w", str(DATA / "missing.txt"), "--lam0-index", "1"],
    ["certify", "--h0", H0, "--w", str(DATA / "w_2x2.txt"), "--lam0-index", "5"],
    ["certify", "--h0", H0, "--w", str(DATA / "w_2x2.txt"), "--lam0-index", "1", "--a", "0.5", "--b", "0.6"],
    ["helium", "constants", "--index", "9"],
    ["helium", "constants", "--nr", "6"],
    ["helium", "convergence", "--max-index", "13"],
    ["helium", "constants", "--sphere", "cube:2", "--index", "1"],
])
def test_input_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == cli.EXIT_INPUT
    assert out == "" and err


def test_non_symmetric_matrix_rejected(capsys, tmp_path):
    bad = tmp_path / "w.txt"
    bad.write_text("2\n0 1\n0 0\n")
    code, _, err = run(capsys, "certify", "--h0", H0, "--w", str(bad), "--lam0-index", "1")
    assert code == cli.EXIT_INPUT and "error:" in err


def test_helium_table1(capsys):
    code, out, _ = run(capsys, "helium", "table1", "--csv")
    assert code == cli.EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "z,E_exact,E_lead,delta_pct,err_pct,lower,upper,in_interval"
    assert lines[1].startswith("10,-93.9,-94,")
    assert lines[-1].endswith(",false")
    code, text, _ = run(capsys, "helium", "table1")
    assert "main_part=94 " in text and "delta=8.51%" in text


def test_helium_bounds(capsys):
    code, out, _ = run(capsys, "helium", "bounds", "--z", "10")
    assert code == cli.EXIT_OK
    assert "interval=[-102, -94]" in out and "valid=false" in out
    code, out, _ = run(capsys, "helium", "bounds", "--z", "200", "--symmetry", "antisym", "--csv")
    assert out.splitlines()[1].endswith(",170,true")


def test_helium_constants_explicit_grid(capsys, tmp_path):
    argv = ["helium", "constants", "--nr", "6", "--rmax", "10", "--sphere", "product:3", "--csv"]
    out_file = tmp_path / "c.csv"
    code, out, _ = run(capsys, *argv, "--out", str(out_file))
    assert code == cli.EXIT_OK
    assert out_file.read_text() == out
    assert out.splitlines()[0] == "index,w1,w2,w1_as,w2_as"
    _, again, _ = run(capsys, *argv)
    assert again == out


def test_helium_convergence_small(capsys):
    code, out, _ = run(capsys, "helium", "convergence", "--max-index", "1", "--csv")
    assert code == cli.EXIT_OK
    assert out.splitlines()[1].startswith("1,0.647")


def test_console_script_byte_stable():
    argv = [sys.executable, "-m", "fsperturb.cli", "certify",
            *problem("w_2x2.txt", "--a", "0.1", "--b", "0.1")]
    a = subprocess.run(argv, capture_output=True, check=True)
    b = subprocess.run(argv, capture_output=True, check=True)
    assert a.stdout == b.stdout and a.stdout.startswith(b"valid=true\n")
