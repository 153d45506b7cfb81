import csv
import io
import json

import numpy as np
import pytest

from case_spectra.cli import int_list, main
from case_spectra.markel import SymTridiag, build_markel
from case_spectra.phase import make_henyey_greenstein

HG_FLAGS = ["--phase", "hg", "--g", "0.9", "--N", "9", "--c", "0.9"]
ISO_FLAGS = ["--phase", "isotropic", "--c", "0.9"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_int_list():
    assert int_list("0,2,5") == [0, 2, 5]
    assert int_list("0..3") == [0, 1, 2, 3]
    assert int_list("0,-3,3") == [0, -3, 3]
    assert int_list("1, 4..5") == [1, 4, 5]


def test_spectrum_isotropic_columns_and_pair(capsys):
    code, out, _ = run(capsys, "spectrum", *ISO_FLAGS, "--m", "0", "--lmax", "5")
    assert code == 0
    assert out.splitlines()[0] == "m,l_max,index,eigenvalue,kind,matrix_residual,oracle_lambda"
    rows = table(out)
    assert len(rows) == 6
    vals = [float(r["eigenvalue"]) for r in rows]
    assert vals == sorted(vals)
    assert vals[-1] == pytest.approx(1.9032, abs=5e-5) and vals[0] == -vals[-1]
    # at l_max = 5 the pair is not a root to 1e-8, so the oracle keeps it in the continuum
    assert all(r["kind"] == "continuum" for r in rows)
    assert abs(float(rows[-1]["oracle_lambda"])) < 1e-5


def test_spectrum_isotropic_pair_discrete_without_oracle(capsys):
    code, out, _ = run(capsys, "spectrum", *ISO_FLAGS, "--lmax", "5", "--no-oracle")
    rows = table(out)
    disc = [float(r["eigenvalue"]) for r in rows if r["kind"] == "discrete"]
    assert code == 0 and disc == pytest.approx([-1.9032, 1.9032], abs=5e-5)
    assert all(r["oracle_lambda"] == "" for r in rows)


def test_spectrum_isotropic_pair_discrete_once_converged(capsys):
    code, out, _ = run(capsys, "spectrum", *ISO_FLAGS, "--lmax", "64")
    disc = [r for r in table(out) if r["kind"] == "discrete"]
    assert code == 0 and len(disc) == 2
    assert all(abs(float(r["oracle_lambda"])) < 1e-8 for r in disc)


def test_spectrum_isotropic_m1_has_no_discrete(capsys):
    code, out, _ = run(capsys, "spectrum", *ISO_FLAGS, "--m", "1", "--lmax", "64")
    rows = table(out)
    assert code == 0 and len(rows) == 64
    assert all(r["kind"] == "continuum" and r["oracle_lambda"] == "" for r in rows)


def test_spectrum_hg_discrete_rows_verified(capsys):
    code, out, _ = run(capsys, "spectrum", *HG_FLAGS, "--m", "0", "--lmax", "501")
    rows = table(out)
    assert code == 0 and len(rows) == 502
    disc = [r for r in rows if r["kind"] == "discrete"]
    pos = sorted(float(r["eigenvalue"]) for r in disc if float(r["eigenvalue"]) > 0)
    assert pos == pytest.approx([1.12282079, 1.55291136, 2.1990469, 4.84588826], abs=1e-8)
    assert all(abs(float(r["oracle_lambda"])) < 1e-8 for r in disc)
    assert max(float(r["matrix_residual"]) for r in rows) < 1e-10


def test_spectrum_rows_sorted_by_m_then_lmax(capsys):
    code, out, _ = run(capsys, "spectrum", *HG_FLAGS, "--m", "2,0", "--lmax", "12,10")
    keys = [(int(r["m"]), int(r["l_max"])) for r in table(out)]
    assert code == 0 and keys == sorted(keys)
    assert keys[0] == (0, 10) and keys[-1] == (2, 12)


def test_converge_isotropic_table(capsys):
    code, out, _ = run(capsys, "converge", *ISO_FLAGS, "--lmax", "1,3,5,501")
    rows = table(out)
    assert code == 0 and list(rows[0]) == ["l_max", "largest_eigenvalue", "n_discrete"]
    got = [round(float(r["largest_eigenvalue"]), 4) for r in rows]
    assert got == [1.8257, 1.9027, 1.9032, 1.9032]
    assert rows[-1]["n_discrete"] == "2"


def test_converge_hg_stabilizes(capsys):
    from case_spectra.commands import convergence_point

    p = make_henyey_greenstein(0.9, 9, 0.9)
    a, b = convergence_point(p, 0, 51), convergence_point(p, 0, 501)
    assert len(a.discrete) == len(b.discrete) == 8
    assert np.max(np.abs(np.array(a.discrete) - np.array(b.discrete))) < 1e-6
    code, out, _ = run(capsys, "converge", *HG_FLAGS, "--lmax", "9,19,51,501")
    assert code == 0 and [r["n_discrete"] for r in table(out)][-2:] == ["8", "8"]


def test_converge_config_errors(capsys):
    code, _, err = run(capsys, "converge", *ISO_FLAGS, "--lmax", "5")
    assert code == 2 and "two distinct" in err
    assert run(capsys, "converge", *ISO_FLAGS, "--lmax", "5,5")[0] == 2
    assert run(capsys, "converge", *ISO_FLAGS, "--m", "0,1", "--lmax", "3,5")[0] == 2


def test_msweep_plus_minus_m_identical(capsys):
    code, out, _ = run(capsys, "msweep", *HG_FLAGS, "--m", "0,-3,3", "--lmax", "501")
    assert code == 0 and out.splitlines()[0] == "m,index,eigenvalue"
    rows = table(out)
    by_m = {m: [(r["index"], r["eigenvalue"]) for r in rows if r["m"] == m] for m in ("-3", "3")}
    assert by_m["-3"] == by_m["3"] and len(by_m["3"]) == 4


def test_msweep_largest_drops_with_m(capsys):
    code, out, _ = run(capsys, "msweep", *HG_FLAGS, "--m", "0..5", "--lmax", "501")
    rows = table(out)
    top = [max(float(r["eigenvalue"]) for r in rows if r["m"] == str(m)) for m in range(6)]
    assert code == 0 and all(a > b for a, b in zip(top, top[1:]))


def test_dispersion_isotropic_one_sign_change(capsys):
    code, out, _ = run(capsys, "dispersion", *ISO_FLAGS, "--zmin", "1.05", "--zmax", "4", "--zcount", "100")
    rows = table(out)
    assert code == 0 and list(rows[0]) == ["z", "value", "quad_nodes", "est_error"]
    v = np.array([float(r["value"]) for r in rows])
    z = np.array([float(r["z"]) for r in rows])
    flips = np.flatnonzero(np.diff(np.sign(v)))
    assert flips.size == 1 and z[flips[0]] < 1.9032 < z[flips[0] + 1]


def test_dispersion_inside_cut(capsys):
    code, out, _ = run(capsys, "dispersion", *ISO_FLAGS, "--zmin", "-0.99", "--zmax", "0.99", "--zcount", "101")
    rows = table(out)
    mid = rows[50]
    assert code == 0 and float(mid["z"]) == 0.0 and float(mid["value"]) == 1.0


def test_dispersion_hg_sign_changes_match_discrete_count(capsys):
    code, out, _ = run(capsys, "dispersion", *HG_FLAGS, "--zmin", "1.001", "--zmax", "20", "--zcount", "400")
    v = np.array([float(r["value"]) for r in table(out)])
    assert code == 0 and np.count_nonzero(np.diff(np.sign(v))) == 4


@pytest.mark.parametrize("lo,hi", [("0.5", "2"), ("-2", "-0.5"), ("-3", "3"), ("1", "3")])
def test_dispersion_range_touching_cut_is_config_error(capsys, lo, hi):
    code, _, err = run(capsys, "dispersion", *ISO_FLAGS, "--zmin", lo, "--zmax", hi)
    assert code == 2 and "config error" in err


def test_dispersion_m_above_order_is_config_error(capsys):
    assert run(capsys, "dispersion", *ISO_FLAGS, "--m", "1", "--zmin", "2", "--zmax", "3")[0] == 2


def test_json_matches_csv(capsys):
    args = ["converge", *ISO_FLAGS, "--lmax", "1,3,5"]
    _, csv_out, _ = run(capsys, *args)
    code, js, _ = run(capsys, *args, "--format", "json")
    doc = json.loads(js)
    assert code == 0 and set(doc) == {"config", "rows"}
    assert doc["config"]["command"] == "converge" and doc["config"]["c"] == 0.9
    for row, ref in zip(doc["rows"], table(csv_out)):
        assert row["l_max"] == int(ref["l_max"])
        assert row["largest_eigenvalue"] == float(ref["largest_eigenvalue"])
        assert row["n_discrete"] == int(ref["n_discrete"])


def test_json_null_oracle(capsys):
    code, js, _ = run(capsys, "spectrum", *ISO_FLAGS, "--m", "1", "--lmax", "3", "--format", "json")
    doc = json.loads(js)
    assert code == 0 and all(r["oracle_lambda"] is None for r in doc["rows"])


def test_seventeen_digit_format(capsys):
    _, out, _ = run(capsys, "converge", *ISO_FLAGS, "--lmax", "1,3")
    text = table(out)[0]["largest_eigenvalue"]
    assert float(text) == float(format(float(text), ".17g")) and len(text.replace(".", "")) >= 16


def test_out_file_and_gnuplot(tmp_path, capsys):
    out = tmp_path / "conv.csv"
    code, stdout, _ = run(capsys, "converge", *ISO_FLAGS, "--lmax", "1,3", "--out", str(out), "--gnuplot")
    assert code == 0 and stdout == ""
    assert out.read_text().startswith("l_max,")
    script = (tmp_path / "conv.csv.gp").read_text()
    assert "set datafile separator ','" in script and str(out) in script and "plot" in script


def test_gnuplot_to_stderr_without_out(capsys):
    code, out, err = run(capsys, "dispersion", *ISO_FLAGS, "--zmin", "1.1", "--zmax", "3", "--zcount", "5", "--gnuplot")
    assert code == 0 and out.startswith("z,") and "plot '-'" in err


def test_matrix_dump_roundtrip(tmp_path, capsys):
    path = tmp_path / "b.txt"
    code, _, _ = run(capsys, "matrix", *HG_FLAGS, "--m", "2", "--lmax", "20", "--out", str(path))
    T = SymTridiag.load(path)
    ref = build_markel(make_henyey_greenstein(0.9, 9, 0.9), 2, 20)
    assert code == 0 and T.dim == 19
    np.testing.assert_array_equal(T.offdiag, ref.offdiag)
    np.testing.assert_array_equal(T.diag, ref.diag)


def test_custom_coefficients(tmp_path, capsys):
    f = tmp_path / "coef.txt"
    f.write_text("# HG g=0.5, N=3\n1\n0.5\n\n0.25\n0.125\n")
    code, out, _ = run(capsys, "msweep", "--phase", "custom", "--coeff-file", str(f), "--c", "0.8", "--m", "0", "--lmax", "200")
    code_hg, out_hg, _ = run(capsys, "msweep", "--phase", "hg", "--g", "0.5", "--N", "3", "--c", "0.8", "--m", "0", "--lmax", "200")
    assert code == code_hg == 0 and out == out_hg and len(table(out)) > 0


def test_bad_coefficient_file_reports_line(tmp_path, capsys):
    f = tmp_path / "bad.txt"
    f.write_text("1\n0.5\nnot-a-number\n")
    code, _, err = run(capsys, "spectrum", "--phase", "custom", "--coeff-file", str(f), "--c", "0.5", "--lmax", "5")
    assert code == 2 and f"{f}:3:" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["spectrum", "--phase", "isotropic", "--lmax", "5"],  # missing --c
        ["spectrum", *ISO_FLAGS[:-1], "1.0", "--lmax", "5"],  # c outside (0, 1)
        ["spectrum", "--phase", "hg", "--g", "0.9", "--c", "0.9"],  # missing --N
        ["spectrum", "--phase", "hg", "--g", "1.5", "--N", "3", "--c", "0.9"],  # |f_l| > 1
        ["spectrum", "--phase", "custom", "--c", "0.9"],  # missing file
        ["spectrum", *ISO_FLAGS, "--m", "6", "--lmax", "5"],  # l_max below |m|
        ["spectrum", *ISO_FLAGS, "--eps-disc", "-1"],
        ["spectrum", *ISO_FLAGS, "--tol", "0"],
        ["msweep", *ISO_FLAGS, "--lmax", "5,7"],
        ["matrix", *ISO_FLAGS, "--m", "0,1", "--lmax", "5"],
    ],
)
def test_config_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("case-spectra: config error:")


def test_bad_thread_env_is_config_error(capsys, monkeypatch):
    monkeypatch.setenv("CASE_SPECTRA_THREADS", "zero")
    assert run(capsys, "spectrum", *ISO_FLAGS, "--lmax", "5")[0] == 2


def test_numerical_failure_exits_3(capsys, monkeypatch):
    from case_spectra import commands
    from case_spectra.errors import NumericalFailure

    def boom(*a, **k):
        raise NumericalFailure("inverse iteration stalled", residual=1.0)

    monkeypatch.setattr(commands, "eigenvectors", boom)
    code, _, err = run(capsys, "spectrum", *ISO_FLAGS, "--lmax", "5")
    assert code == 3 and "numerical failure" in err


def test_root_count_above_bound_is_inconsistent():
    from case_spectra.commands import _classify
    from case_spectra.errors import InconsistencyError
    from case_spectra.phase import make_isotropic

    with pytest.raises(InconsistencyError):
        _classify(make_isotropic(0.9), 0, np.array([-3.0, -2.0, 2.0, 3.0]), False, 1e-6)


def test_inconsistency_exits_3(capsys, monkeypatch):
    from case_spectra import commands
    from case_spectra.errors import InconsistencyError

    def forged(*a, **k):
        raise InconsistencyError("2 positive discrete eigenvalues exceed the bound")

    monkeypatch.setattr(commands, "_classify", forged)
    code, _, err = run(capsys, "spectrum", *ISO_FLAGS, "--lmax", "9")
    assert code == 3 and "bound" in err


def test_deterministic_across_thread_counts(tmp_path, capsys, monkeypatch):
    outs = []
    for threads in ("1", "8", "8"):
        monkeypatch.setenv("CASE_SPECTRA_THREADS", threads)
        path = tmp_path / f"s{threads}{len(outs)}.json"
        assert run(capsys, "spectrum", *HG_FLAGS, "--m", "0..3", "--lmax", "60", "--format", "json", "--out", str(path))[0] == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] == outs[2]
