import json
import subprocess
import sys

import pytest

from pqfor.cli import main
from pqfor.grid import load_grid

FAST = ["--directions", "8", "--swarm-size", "4", "--iterations", "3", "--threads", "1"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("ith, expected", [(None, 220.0), ("680", 680.0)])
def test_build_grid(tmp_path, capsys, ith, expected):
    out = tmp_path / "g.json"
    argv = ["build-grid", "--out", str(out)] + ([] if ith is None else ["--ith", ith])
    assert run(capsys, *argv)[0] == 0
    assert {ln.i_rated for ln in load_grid(out).lines} == {expected}
    manifest = json.loads((tmp_path / "g.json.manifest.json").read_text())
    assert manifest["command"] == "build-grid"
    assert manifest["config"]["i_rated"] == expected


def test_unwritable_path(tmp_path, capsys):
    code, _, err = run(capsys, "build-grid", "--out", str(tmp_path / "missing" / "g.json"))
    assert code == 3 and err


def test_unknown_scenario(tmp_path, capsys):
    code, _, err = run(capsys, "for", "--scenario", "9x", "--out", str(tmp_path / "f.json"))
    assert code == 1 and "9x" in err


def test_bad_flag_is_usage_error(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["for", "--directions", "many", "--out", str(tmp_path / "f.json")])
    assert exc.value.code == 1


def test_infeasible_start_exit_2(tmp_path, capsys):
    code, _, err = run(capsys, "for", "--scenario", "0a", "--ith", "20", *FAST, "--out", str(tmp_path / "f.json"))
    assert code == 2 and "infeasible" in err


def test_bad_grid_file(tmp_path, capsys):
    bad = tmp_path / "g.json"
    bad.write_text("{not json")
    code, _, _ = run(capsys, "for", "--grid", str(bad), "--scenario", "0", *FAST, "--out", str(tmp_path / "f.json"))
    assert code == 3


@pytest.mark.parametrize("argv, expected", [
    (["--curve", "linear", "--cp", "35", "--p", "0"], "35.0\n"),
    (["--curve", "quadratic", "--cp", "12", "--p", "-0.5"], "15.0\n"),
])
def test_epf_values(capsys, argv, expected):
    code, out, _ = run(capsys, "epf", *argv)
    assert code == 0 and out == expected


def test_epf_sweep(capsys):
    code, out, _ = run(capsys, "epf", "--curve", "cubic", "--cp", "35", "--sweep", "5")
    rows = out.splitlines()
    assert code == 0
    assert rows[0] == "p_norm,cost,zone,tier"
    assert len(rows) == 6
    assert rows[1].startswith("-1.0,70.0,i,low")
    assert rows[-1].startswith("1.0,0.0,vii,high")


@pytest.mark.parametrize("argv", [["--curve", "quartic"], ["--curve", "linear", "--p", "2"]])
def test_epf_rejects(capsys, argv):
    assert run(capsys, "epf", *argv)[0] == 1


def test_epf_file_and_plot(tmp_path, capsys):
    out = tmp_path / "epf.csv"
    assert run(capsys, "epf", "--curve", "linear", "--sweep", "11", "--out", str(out), "--plot")[0] == 0
    assert (tmp_path / "epf.png").stat().st_size > 0
    manifest = json.loads((tmp_path / "epf.csv.manifest.json").read_text())
    assert manifest["config"]["c_q"] == 0.35


def test_derive_fleet(capsys):
    code, out, _ = run(capsys, "derive-fleet")
    rows = [r.split(",") for r in out.splitlines()[1:]]
    assert code == 0
    assert [(r[0], r[3], r[4], r[5]) for r in rows] == [
        ("0", "0", "0.0", ""), ("1", "5", "55.0", "2"), ("2", "10", "110.0", "2 4"), ("3", "15", "165.0", "2 4 7")]
    assert run(capsys, "derive-fleet", "--simultaneity", "0")[0] == 1


def _for(tmp_path, name, *extra):
    out = tmp_path / f"{name}.json"
    code = main(["for", "--scenario", "0", *FAST, "--out", str(out), *extra])
    assert code == 0
    return out


def test_for_outputs_reproducible(tmp_path, capsys):
    a = _for(tmp_path, "a")
    b = _for(tmp_path, "b")
    assert a.read_bytes() == b.read_bytes()
    assert a.with_suffix(".csv").read_bytes() == b.with_suffix(".csv").read_bytes()
    ma = json.loads((tmp_path / "a.json.manifest.json").read_text())
    mb = json.loads((tmp_path / "b.json.manifest.json").read_text())
    for m in (ma, mb):
        assert m.pop("duration_s") >= 0
        m["outputs"] = [p.rsplit("/", 1)[-1][1:] for p in m["outputs"]]
    assert ma == mb
    assert ma["seed"] == 42 and ma["config"]["directions"] == 8
    doc = json.loads(a.read_text())
    assert len(doc["boundary"]) == 8 and doc["area_mw_mvar"] > 0
    c = _for(tmp_path, "c", "--seed", "7")
    assert c.read_bytes() != a.read_bytes()


def test_for_threads_identical(tmp_path, capsys):
    a = _for(tmp_path, "a")
    b = _for(tmp_path, "b", "--threads", "2")
    assert a.read_bytes() == b.read_bytes()


def test_loss_map_from_for(tmp_path, capsys):
    f = _for(tmp_path, "f", "--ith", "680", "--plot")
    assert (tmp_path / "f.png").stat().st_size > 0
    out = tmp_path / "lm.csv"
    code = main(["loss-map", "--for", str(f), "--resolution", "7", "--out", str(out), "--threads", "1"])
    assert code == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "p_mw,q_mvar,loss_mw,feasible"
    assert len(rows) == 1 + 49
    flags = [r.rsplit(",", 1)[1] for r in rows[1:]]
    assert set(flags) <= {"true", "false"} and "true" in flags and "false" in flags
    manifest = json.loads((tmp_path / "lm.csv.manifest.json").read_text())
    assert manifest["config"]["i_rated"] == 680.0  # taken over from the FOR file
    code = main(["loss-map", "--for", str(f), "--scenario", "3a", "--out", str(out)])
    assert code == 1  # different FPU set


def test_loss_map_bad_for_file(tmp_path, capsys):
    bad = tmp_path / "f.json"
    bad.write_text('{"boundary": 3}')
    assert run(capsys, "loss-map", "--for", str(bad), "--out", str(tmp_path / "lm.csv"))[0] == 3


def test_sample(tmp_path, capsys):
    out = tmp_path / "cloud.csv"
    code, msg, _ = run(capsys, "sample", "--scenario", "0", "--samples", "50", "--out", str(out), "--plot")
    assert code == 0 and "of 50 samples feasible" in msg
    assert out.read_text().startswith("p_mw,q_mvar\n")
    assert (tmp_path / "cloud.hull.csv").exists()
    assert (tmp_path / "cloud.png").exists()
    assert run(capsys, "sample", "--samples", "0", "--out", str(out))[0] == 1


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pqfor.cli", "epf", "--curve", "linear", "--p", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout == "0.0\n"
