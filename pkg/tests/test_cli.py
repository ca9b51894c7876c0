import json

import pytest

from tfch.cli import main


@pytest.fixture
def cfg_file(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("alpha = 0.5\nmobility = 0.1\nepsilon = 0.05\nnx = 16\nny = 16\nT = 0.01\nN = 4\n"
                 f"initial = random\namplitude = 0.1\nout_dir = {tmp_path / 'out'}\n")
    return p


def test_run(cfg_file, tmp_path, capsys):
    assert main(["run", str(cfg_file), "--seed", "4", "--variant", "ratio"]) == 0
    assert "completed: 4 steps" in capsys.readouterr().out
    meta = json.loads((tmp_path / "out" / "metadata.json").read_text())
    assert meta["seed"] == 4 and meta["config"]["variant"] == "ratio"


def test_out_dir_override(cfg_file, tmp_path):
    assert main(["run", str(cfg_file), "--out-dir", str(tmp_path / "other")]) == 0
    assert (tmp_path / "other" / "energy.csv").exists()


def test_study(cfg_file, capsys):
    assert main(["study", str(cfg_file), "--levels", "3"]) == 0
    assert "order" in capsys.readouterr().out


def test_bad_config_exits_2(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text("alpha = 1.5\n")
    assert main(["run", str(p)]) == 2
    assert "line 1, key 'alpha'" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.cfg")]) == 2


def test_verify_kernels(capsys):
    assert main(["verify-kernels", "--samples", "10", "--seed", "1"]) == 0
    out = capsys.readouterr().out
    assert "[PASS]" in out and "[FAIL]" not in out


def test_usage_error():
    with pytest.raises(SystemExit):
        main(["frobnicate"])
