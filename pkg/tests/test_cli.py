import json
import subprocess
import sys

import pytest

from nwlab import reporting as rp
from nwlab.cli import main
from nwlab.truthtable import TruthTable


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def test_mcsp_n2_all_tables(tmp_path):
    assert run(tmp_path, "mcsp", "--n", "2", "--basis", "aon") == 0
    rows = rp.read_csv((tmp_path / "mcsp.csv").read_text())
    assert len(rows) == 16
    sizes = {r["table"]: int(r["min_size"]) for r in rows}
    assert sizes["6"] == sizes["9"] == 7 and sizes["0"] == sizes["a"] == 0
    assert max(sizes.values()) == 7


def test_invalid_basis_exits_1(tmp_path, capsys):
    assert run(tmp_path, "mcsp", "--n", "2", "--basis", "nope") == 1
    err = capsys.readouterr().err
    assert "usage:" in err and "invalid basis" in err


def test_usage_errors_exit_1(tmp_path):
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main(["mcsp", "--n", "two"])
    assert e.value.code == 1


def test_contract_failure_exits_2(tmp_path):
    f = tmp_path / "f.tt"
    f.write_text(TruthTable.constant(16, 0).to_text())
    code = run(tmp_path, "learn", "from-distinguisher", "--table", str(f),
               "--distinguisher", "const:1", "--degree", "2")
    assert code == 2
    rep = json.loads((tmp_path / "learn-from-distinguisher.json").read_text())
    assert rep["status"] == "failure"


def test_byte_identical_reports(tmp_path):
    outs = []
    for k in range(2):
        d = tmp_path / str(k)
        assert main(["bootstrap", "--n", "6", "--trials", "2", "--seed", "5", "--out", str(d)]) == 0
        outs.append(((d / "bootstrap.json").read_bytes(), (d / "bootstrap.csv").read_bytes()))
        assert (d / "bootstrap.timing.json").exists()
    assert outs[0] == outs[1]
    d = tmp_path / "w2"
    assert main(["bootstrap", "--n", "6", "--trials", "2", "--seed", "5", "--workers", "2",
                 "--out", str(d)]) == 0
    assert (d / "bootstrap.csv").read_bytes() == outs[0][1]


def test_config_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": [2], "s_max": 5}))
    assert run(tmp_path, "counting", "--config", str(cfg), "--s-max", "3") == 0
    rows = rp.read_csv((tmp_path / "counting.csv").read_text())
    assert [(r["n"], r["s"]) for r in rows] == [("2", "2"), ("2", "3")]
    rep = json.loads((tmp_path / "counting.json").read_text())
    assert rep["config"]["s_max"] == 3 and rep["master_seed"] == 0
    cfg.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(SystemExit):
        run(tmp_path, "counting", "--config", str(cfg))


def test_other_subcommands(tmp_path):
    assert run(tmp_path, "nw", "design", "--k", "16", "--m", "8", "--degree", "2") == 0
    rep = json.loads((tmp_path / "nw-design.json").read_text())
    assert rep["selection"]["q"] == 17 and rep["max_intersection"] <= 1
    f = tmp_path / "f.tt"
    f.write_text(TruthTable.parity(4).to_text())
    assert run(tmp_path, "nw", "sample", "--table", str(f), "--ell", "2", "--count", "2") == 0
    assert TruthTable.from_text((tmp_path / "nw-sample-0.tt").read_text()).n == 2
    assert run(tmp_path, "natural", "--transform", "amplify", "--n", "3") == 0
    rows = rp.read_csv((tmp_path / "natural.csv").read_text())
    assert rows[0]["density"] == "3/4" and rows[0]["violations"] == "0"
    assert run(tmp_path, "game", "--n", "2") == 0
    rep = json.loads((tmp_path / "game.json").read_text())
    assert rep["value"] == "0" and rep["small_support"]["first_ok"]
    assert run(tmp_path, "compress", "--bench", "2") == 0
    assert run(tmp_path, "learn", "bench", "--trials", "3") == 0
    assert run(tmp_path, "learn", "run", "--table", str(f), "--learner", "memorizer") == 0
    assert json.loads((tmp_path / "learn-run.json").read_text())["error"] == "0"


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "nwlab", "counting", "--n", "2", "--s-max", "3",
                        "--out", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 0 and (tmp_path / "counting.csv").exists()
