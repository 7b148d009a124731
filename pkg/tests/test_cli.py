import math

import numpy as np
import pytest

from hubwit.cli import main
from hubwit.csvio import read_table, write_table


def run_cli(*argv):
    return main(list(argv))


def test_witness_scan_ed_schema(tmp_path):
    csv = tmp_path / "scan.csv"
    rc = run_cli(
        "witness-scan", "--geometry-kind", "chain", "--geometry-dims", "4",
        "--model-u", "4", "--temperature-min", "0.1", "--temperature-max", "5",
        "--temperature-count", "6", "--output-csv", str(csv),
    )
    assert rc == 0
    table = read_table(csv)
    assert table.columns == ["T", "chi_z", "l0_z", "witness_e"]
    assert len(table.rows) == 6
    assert table.metadata["command"] == "witness-scan"
    assert table.metadata["geometry.kind"] == "chain"
    assert "version" in table.metadata
    assert all(row[1] >= 0 for row in table.rows)  # chi_z nonnegative
    # witness identity holds row by row
    for temperature, chi, l0, witness in table.rows:
        assert witness == pytest.approx(chi - (l0 - 1 / 12) / temperature, abs=1e-12)


def test_witness_scan_qmc_adds_error_columns(tmp_path):
    csv = tmp_path / "scan_qmc.csv"
    rc = run_cli(
        "witness-scan", "--geometry-kind", "chain", "--geometry-dims", "2",
        "--model-u", "4", "--run-method", "qmc",
        "--temperature-values", "0.5,1.0",
        "--qmc-warmup-sweeps", "10", "--qmc-measure-sweeps", "40", "--qmc-bin-size", "10",
        "--output-csv", str(csv),
    )
    assert rc == 0
    table = read_table(csv)
    assert table.columns == [
        "T", "chi_z", "l0_z", "witness_e", "err_chi_z", "err_l0_z", "err_witness_e"
    ]
    assert len(table.rows) == 2


def test_witness_scan_empty_grid_fails(tmp_path, capsys):
    rc = run_cli(
        "witness-scan", "--geometry-kind", "chain", "--geometry-dims", "4",
        "--temperature-values", "", "--output-csv", str(tmp_path / "x.csv"),
    )
    assert rc != 0
    assert "temperature" in capsys.readouterr().err


def test_validation_reports_all_errors(tmp_path, capsys):
    rc = run_cli(
        "witness-scan", "--geometry-kind", "blob", "--model-u", "-3",
        "--temperature-min", "5", "--temperature-max", "1",
        "--output-csv", str(tmp_path / "x.csv"),
    )
    assert rc == 2
    err = capsys.readouterr().err
    assert "geometry.kind" in err
    assert "model.u" in err
    assert "temperature" in err


def test_tc_vs_u_single_point_and_status(tmp_path):
    csv = tmp_path / "tc.csv"
    rc = run_cli(
        "tc-vs-u", "--geometry-kind", "chain", "--geometry-dims", "4",
        "--ugrid-values", "4", "--temperature-min", "0.05", "--temperature-max", "10",
        "--output-csv", str(csv),
    )
    assert rc == 0
    table = read_table(csv)
    assert table.columns == ["U", "Tc", "status"]
    assert len(table.rows) == 1
    assert table.rows[0][2] == "ok"
    assert 0.5 < table.rows[0][1] < 0.7


def test_tc_vs_u_odd_cluster_all_none(tmp_path):
    csv = tmp_path / "tc3.csv"
    rc = run_cli(
        "tc-vs-u", "--geometry-kind", "chain", "--geometry-dims", "3",
        "--model-u", "0", "--ugrid-values", "0.0001,0.001",
        "--temperature-min", "0.01", "--temperature-max", "50",
        "--output-csv", str(csv),
    )
    assert rc == 0
    table = read_table(csv)
    assert [row[2] for row in table.rows] == ["none", "none"]
    assert all(row[1] is None for row in table.rows)


def test_extrapolate_synthetic_constant(tmp_path, capsys):
    csv = tmp_path / "ext.csv"
    rc = run_cli(
        "extrapolate", "--extrapolation-points", "2:0.5,4:0.5,6:0.5",
        "--output-csv", str(csv),
    )
    assert rc == 0
    table = read_table(csv)
    assert table.columns == ["order", "tc_infinity"]
    for _, value in table.rows:
        assert value == pytest.approx(0.5, abs=1e-9)


def test_extrapolate_needs_three_sizes(capsys):
    rc = run_cli("extrapolate", "--extrapolation-sizes", "2,4")
    assert rc == 2
    assert "3 distinct" in capsys.readouterr().err


def test_qmc_run_deterministic_bytes(tmp_path):
    args = [
        "qmc-run", "--geometry-kind", "chain", "--geometry-dims", "2",
        "--model-u", "4", "--temperature-values", "0.5,1.0",
        "--qmc-warmup-sweeps", "5", "--qmc-measure-sweeps", "20", "--qmc-bin-size", "5",
        "--qmc-seed", "9",
    ]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_cli(*args, "--output-csv", str(a)) == 0
    assert run_cli(*args, "--output-csv", str(b)) == 0
    content_a = a.read_text().replace(str(a), "OUT")
    content_b = b.read_text().replace(str(b), "OUT")
    assert content_a == content_b  # identical up to the embedded output path


def test_qmc_run_log_and_columns(tmp_path):
    csv, log = tmp_path / "q.csv", tmp_path / "q.log"
    rc = run_cli(
        "qmc-run", "--geometry-kind", "chain", "--geometry-dims", "2",
        "--model-u", "4", "--temperature-values", "0.5",
        "--qmc-warmup-sweeps", "5", "--qmc-measure-sweeps", "20", "--qmc-bin-size", "5",
        "--output-csv", str(csv), "--output-log", str(log),
    )
    assert rc == 0
    table = read_table(csv)
    assert table.columns[:7] == [
        "T", "chi_z", "err_chi_z", "l0_z", "err_l0_z", "witness_e", "err_witness_e"
    ]
    assert log.exists()
    assert len(log.read_text().splitlines()) == 1 + 4  # header + 4 bins


def test_qmc_temperature_incompatible_with_step(tmp_path, capsys):
    rc = run_cli(
        "qmc-run", "--geometry-kind", "chain", "--geometry-dims", "2",
        "--temperature-values", "100", "--output-csv", str(tmp_path / "x.csv"),
    )
    assert rc == 2
    assert "delta_tau" in capsys.readouterr().err


@pytest.mark.parametrize("kind", ["witness", "tc", "qmc"])
def test_plot_script_compiles_and_never_executes(tmp_path, kind):
    out = tmp_path / f"plot_{kind}.py"
    rc = run_cli("plot", "some.csv", "other.csv", "--kind", kind, "--out", str(out))
    assert rc == 0
    source = out.read_text()
    compile(source, str(out), "exec")  # syntactically valid
    assert "some.csv" in source
    assert not (tmp_path / "plot.png").exists()


def test_csv_round_trip_exact(tmp_path):
    path = tmp_path / "rt.csv"
    rows = [
        [0.1, 1.0 / 3.0, -2.5e-17, None],
        [123456.789, math.pi, 7, "ok"],
    ]
    write_table(path, {"a": "b"}, ["w", "x", "y", "z"], rows)
    table = read_table(path)
    assert table.metadata == {"a": "b"}
    for original, parsed in zip(rows, table.rows):
        for a, b in zip(original, parsed):
            assert a == b or (a is None and b is None)
            if isinstance(a, float):
                assert isinstance(b, float) and a == b  # exact round trip


def test_witness_csv_round_trips(tmp_path):
    csv = tmp_path / "scan.csv"
    run_cli(
        "witness-scan", "--geometry-kind", "ring", "--geometry-dims", "4",
        "--model-u", "8", "--temperature-min", "0.3", "--temperature-max", "3",
        "--temperature-count", "4", "--output-csv", str(csv),
    )
    table = read_table(csv)
    write_table(tmp_path / "copy.csv", table.metadata, table.columns, table.rows)
    assert read_table(tmp_path / "copy.csv").rows == table.rows
