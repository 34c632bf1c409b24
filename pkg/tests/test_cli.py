import csv
import io
import json
import subprocess
import sys

import pytest

from rabi_lab import cli


def read_csv(path):
    text = path.read_text(encoding="utf-8")
    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("# "):
            key, value = line[2:].split(": ", 1)
            meta[key] = json.loads(value)
        else:
            body.append(line)
    return meta, list(csv.DictReader(io.StringIO("\n".join(body))))


def test_parse_grid():
    assert cli.parse_grid("0:0.3:0.1") == [0.0, 0.1, 0.2, 0.3]
    assert cli.parse_grid("0.1,0.5") == [0.1, 0.5]
    assert cli.parse_grid("0.2") == [0.2]
    for bad in ("0:1", "0:1:0", "0.5,0.1", "-1", ""):
        with pytest.raises(cli.ConfigError):
            cli.parse_grid(bad)


def test_spectrum_uncoupled_pattern(tmp_path):
    out = tmp_path / "s.csv"
    code = cli.main(["spectrum", "--f", "0", "--epsilon", "0.6", "--levels", "3",
                     "--methods", "exact,uaa,rwa", "--out", str(out)])
    assert code == 0
    meta, rows = read_csv(out)
    assert meta["command"] == "spectrum"
    assert len(rows) == 6
    for row in rows:
        for m in ("exact", "uaa", "rwa"):
            assert abs(float(row[f"dE_{m}"])) == pytest.approx(0.3, abs=1e-12)
        assert row["flag"] == "ok"
    exact = sorted(float(r["E_exact"]) for r in rows)
    assert exact == pytest.approx([-0.3, 0.3, 0.7, 1.3, 1.7, 2.3])


def test_spectrum_deterministic(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert cli.main(["spectrum", "--f", "0:0.5:0.25", "--levels", "4", "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_spectrum_thread_count_does_not_change_output(tmp_path, monkeypatch):
    outs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("RABI_LAB_THREADS", threads)
        p = tmp_path / f"t{threads}.csv"
        assert cli.main(["spectrum", "--f", "0:0.6:0.2", "--levels", "3", "--out", str(p)]) == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]


def test_spectrum_unconverged_flag(tmp_path):
    out = tmp_path / "s.csv"
    code = cli.main(["spectrum", "--f", "2.0", "--levels", "6", "--n-max", "14",
                     "--methods", "exact", "--out", str(out)])
    assert code == 1
    _, rows = read_csv(out)
    assert all(r["flag"].startswith("exact:") for r in rows)


def test_evolve_rwa_zero_coupling(tmp_path):
    out = tmp_path / "e.csv"
    code = cli.main(["evolve", "--f", "0", "--nbar", "4", "--methods", "rwa",
                     "--t-max", "10", "--samples", "11", "--out", str(out)])
    assert code == 0
    meta, rows = read_csv(out)
    assert list(rows[0]) == ["t", "tau", "W_rwa"]
    assert all(float(r["W_rwa"]) == pytest.approx(-1.0, abs=1e-12) for r in rows)
    assert meta["config"]["n_max"] >= 4 + 24 + 40


def test_evolve_columns_and_metadata(tmp_path):
    out = tmp_path / "e.csv"
    code = cli.main(["evolve", "--f", "0.05", "--nbar", "9", "--methods", "exact,uaa,asymptotic",
                     "--tau-max", "2", "--samples", "21", "--out", str(out)])
    assert code == 0
    meta, rows = read_csv(out)
    assert list(rows[0]) == ["t", "tau", "W_exact", "W_uaa", "W_asymptotic"]
    assert float(rows[-1]["tau"]) == pytest.approx(2.0)
    assert float(rows[0]["W_exact"]) == pytest.approx(-1.0, abs=1e-9)
    assert meta["config"]["epsilon"] == 1.0 and "tool" in meta
    assert cli.default_horizon(0.1, 100) == pytest.approx(4 * 3.141592653589793 * 10 / 0.1)


def test_config_file_merge(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"evolve": {"f": 0.0, "nbar": 1.0, "methods": "rwa", "samples": 3,
                                          "t_max": 1.0}}))
    out = tmp_path / "e.csv"
    assert cli.main(["evolve", "--config", str(cfg), "--samples", "5", "--out", str(out)]) == 0
    meta, rows = read_csv(out)
    assert len(rows) == 5
    assert meta["config"]["nbar"] == 1.0
    cfg.write_text(json.dumps({"evolve": {"bogus": 1}}))
    assert cli.main(["evolve", "--config", str(cfg)]) == 2


def test_usage_errors(capsys):
    assert cli.main(["evolve", "--methods", "magic"]) == 2
    assert cli.main(["spectrum", "--f", "1:0:0.1"]) == 2
    assert cli.main(["evolve", "--epsilon", "-1", "--methods", "rwa", "--samples", "3"]) == 2
    assert cli.main(["applicability", "--lambda0-nm", "500"]) == 2
    assert cli.main(["validate", "--only", "no-such-check"]) == 2
    assert "error" in capsys.readouterr().err


def test_applicability_report(tmp_path):
    args = ["applicability", "--lambda0-nm", "500", "--q-factor", "1e6", "--volume-cm3", "1",
            "--area-cm2", "0.01", "--field-energy-j", "460"]
    out = tmp_path / "r.json"
    assert cli.main(args + ["--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    res = doc["results"]
    assert res["single_mode_ok"] is True
    assert res["mu"] == pytest.approx(1.0, rel=0.02)
    out100 = tmp_path / "r100.json"
    args100 = list(args)
    args100[args100.index("1e6")] = "1e8"
    assert cli.main(args100 + ["--out", str(out100)]) == 0
    f100 = json.loads(out100.read_text())["results"]["coupling_f"]
    assert f100 == pytest.approx(res["coupling_f"] / 10)
    nm1 = tmp_path / "r1.json"
    args1 = list(args)
    args1[args1.index("500")] = "1"
    assert cli.main(args1 + ["--out", str(nm1)]) == 0
    assert json.loads(nm1.read_text())["results"]["w_crit"] == pytest.approx(5.7e10, rel=0.02)
    again = tmp_path / "again.json"
    cli.main(args + ["--out", str(again)])
    assert again.read_bytes() == out.read_bytes()


def test_validate_only_and_json(tmp_path, capsys):
    assert cli.main(["validate", "--only", "delta-root"]) == 0
    text = capsys.readouterr().out
    assert "delta-root" in text and "1/1 checks passed" in text
    out = tmp_path / "v.json"
    assert cli.main(["validate", "--only", "delta-root,beta-anchor", "--json", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["total"] == 2 and doc["passed"] == 2
    assert {r["slug"] for r in doc["results"]} == {"delta-root", "beta-anchor"}


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "rabi_lab", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "rabi-lab" in res.stdout
