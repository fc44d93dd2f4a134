import json

import pytest

from rbfbca.cli import main


def write_config(tmp_path, **overrides):
    data = {
        "objective": "bowl", "n": 2, "modes": ["rbf-bca", "random"],
        "runs_per_group": 2, "master_seed": 3, "solver": {"max_evals": 12},
    }
    data.update(overrides)
    p = tmp_path / "campaign.json"
    p.write_text(json.dumps(data), encoding="utf-8")
    return p


def test_bench_writes_reports(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out = tmp_path / "bench"
    code = main(["bench", "--config", str(cfg), "--out", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "rbf-bca: runs=2" in text
    assert "random: runs=2" in text
    assert (out / "runs.csv").exists()
    assert (out / "groups.csv").exists()
    assert (out / "campaign.png").exists()


def test_bench_mode_and_seed_overrides(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out = tmp_path / "bench"
    code = main([
        "bench", "--config", str(cfg), "--out", str(out),
        "--mode", "random", "--seed", "9", "--max-evals", "8",
    ])
    assert code == 0
    text = capsys.readouterr().out
    assert "rbf-bca" not in text
    rows = (out / "runs.csv").read_text(encoding="utf-8").splitlines()
    body = [r for r in rows if not r.startswith("#")][1:]
    assert len(body) == 2
    assert all(r.split(",")[1] == "random" for r in body)
    assert all(r.split(",")[6] == "8" for r in body)  # evals column


def test_bench_rejects_bad_config(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text(json.dumps({"objective": "nope"}), encoding="utf-8")
    code = main(["bench", "--config", str(p)])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_bench_missing_config_file(tmp_path, capsys):
    code = main(["bench", "--config", str(tmp_path / "absent.json")])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_place_bundled_scene(tmp_path, capsys):
    out = tmp_path / "place"
    code = main([
        "place", "--scenario", "two-obstacle-room", "--out", str(out),
        "--max-evals", "16",
    ])
    assert code == 0
    text = capsys.readouterr().out
    assert "coverage" in text and "placement" in text
    assert (out / "placement.svg").exists()


def test_place_parse_error_names_the_line(tmp_path, capsys):
    bad = tmp_path / "bad.scene"
    bad.write_text("[scene]\nwidth = oops\n", encoding="utf-8")
    code = main(["place", "--scenario", str(bad), "--out", str(tmp_path / "o")])
    assert code == 2
    assert "line 2" in capsys.readouterr().err


def test_demo_materializes_scenes(tmp_path, capsys):
    out = tmp_path / "demo"
    code = main(["demo", "--out", str(out), "--max-evals", "15"])
    assert code == 0
    assert (out / "empty-room.scene").exists()
    assert (out / "two-obstacle-room.scene").exists()
    assert (out / "placement.svg").exists()
    assert "coverage" in capsys.readouterr().out


def test_unknown_command_exits_with_usage_error():
    with pytest.raises(SystemExit) as err:
        main(["polish"])
    assert err.value.code == 2
