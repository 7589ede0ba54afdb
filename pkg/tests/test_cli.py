import csv
import json
import math

import pytest

from nwci.cli import main, parse_point


def run(capsys, *argv):
    rc = main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_ci_prop_wilson(capsys):
    rc, out, _ = run(capsys, "ci-prop", "--successes", "752", "--trials", "1353", "--method", "wilson")
    assert rc == 0
    assert "[0.529, 0.582]" in out


def test_ci_prop_json_and_degenerate(capsys):
    rc, out, _ = run(capsys, "ci-prop", "--successes", "0", "--trials", "10", "--format", "json")
    assert rc == 0
    doc = json.loads(out)
    assert [d["method"] for d in doc] == ["wald", "wilson", "ac"]
    rc, out, _ = run(capsys, "ci-prop", "--successes", "10", "--trials", "10", "--method", "wald")
    assert "degenerate" in out


@pytest.mark.parametrize("argv", [
    ["ci-prop", "--successes", "1", "--trials", "0"],
    ["ci-prop", "--successes", "11", "--trials", "10"],
    ["ci-prop", "--successes", "1", "--trials", "10", "--alpha", "1.2"],
    ["simulate", "--scenario", "3", "--n", "100"],
    ["simulate", "--scenario", "1", "--n", "100", "--grid-min", "2", "--grid-max", "1"],
    ["simulate", "--scenario", "2", "--n", "100", "--pilot", "formula"],
    ["select-h", "--data", "x.csv", "--seed", "-1"],
    ["select-h", "--data", "x.csv", "--pilot", "abc"],
])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_missing_file_exit_1(tmp_path, capsys):
    rc, _, err = run(capsys, "analyze", "--data", str(tmp_path / "nope.csv"), "--out", str(tmp_path))
    assert rc == 1 and "error" in err
    rc, _, _ = run(capsys, "select-h", "--data", str(tmp_path / "nope.csv"), "--out", str(tmp_path))
    assert rc == 1


def test_bad_row_exit_1(tmp_path, capsys, fixture_ties_path):
    bad = tmp_path / "bad.csv"
    bad.write_text(fixture_ties_path.read_text().replace(",0,0\n", ",0,7\n", 1))
    rc, _, err = run(capsys, "analyze", "--data", str(bad), "--out", str(tmp_path / "o"))
    assert rc == 1 and "line" in err


def test_parse_point():
    assert parse_point("pi/2") == pytest.approx(math.pi / 2)
    assert parse_point("-pi") == pytest.approx(-math.pi)
    assert parse_point("2pi") == pytest.approx(2 * math.pi)
    assert parse_point("0.25") == 0.25


def test_simulate_deterministic_files(tmp_path, capsys):
    args = ["simulate", "--scenario", "1", "--n", "80", "--m", "4", "--b", "30",
            "--x", "0", "pi/2", "--grid-steps", "15", "--seed", "3"]
    assert run(capsys, *args, "--out", str(tmp_path / "a"))[0] == 0
    assert run(capsys, "--threads", "1", *args, "--out", str(tmp_path / "b"))[0] == 0
    for name in ("coverage_report.csv", "coverage_report.json", "replicates.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    with (tmp_path / "a" / "coverage_report.csv").open() as fh:
        assert len(list(csv.DictReader(fh))) == 6


def test_select_h_xy_csv(tmp_path, capsys):
    data = tmp_path / "xy.csv"
    data.write_text("x,y\n" + "".join(f"{i / 10 - 2},{int(i % 3 == 0)}\n" for i in range(40)))
    rc, out, _ = run(capsys, "select-h", "--data", str(data), "--b", "50", "--grid-steps", "20",
                     "--method", "all", "--pilot", "0.5", "--out", str(tmp_path / "o"))
    assert rc == 0 and "Wilson" in out
    for m in ("wald", "wilson", "ac"):
        assert (tmp_path / "o" / f"coverage_{m}.csv").is_file()


def test_analyze_fixture_deterministic(tmp_path, capsys, fixture_ties_path):
    args = ["analyze", "--data", str(fixture_ties_path), "--b", "100", "--grid-steps", "30"]
    rc, out, _ = run(capsys, *args, "--out", str(tmp_path / "a"))
    assert rc == 0 and "SLHA significant at level 0.05" in out
    run(capsys, *args, "--threads", "3", "--out", str(tmp_path / "b"))
    for name in ("report.json", "coverage_wilson.csv", "nw_curve.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_out_from_environment(tmp_path, capsys, monkeypatch, fixture_ties_path):
    monkeypatch.setenv("NWCI_OUT", str(tmp_path / "env"))
    rc, _, _ = run(capsys, "analyze", "--data", str(fixture_ties_path), "--b", "20", "--grid-steps", "10")
    assert rc == 0 and (tmp_path / "env" / "report.json").is_file()
