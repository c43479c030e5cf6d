import io
import json
import pathlib
import subprocess
import sys

import pytest

from kstab_mirror.cli import run

CONFIGS = sorted((pathlib.Path(__file__).parent.parent / "configs").glob("*.json"))


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), out)
    return code, out.getvalue()


def lines_with(text, prefix):
    return [l for l in text.splitlines() if l.startswith(prefix)]


def test_describe_reports_slope():
    code, text = call("describe", "--surface", "blp_p2", "--q", "1/2")
    assert code == 0
    assert lines_with(text, "mu:") == ["mu: 10/3"]
    code, text = call("describe", "--surface", "p2")
    assert lines_with(text, "mu:") == ["mu: 3"]


def test_describe_jsonl_is_parseable():
    code, text = call("describe", "--surface", "p2", "--format", "jsonl")
    assert code == 0
    recs = [json.loads(l) for l in text.splitlines() if l.strip()]
    assert {r["table"] for r in recs} == {"intersections"}
    assert len(recs) == 3


def test_inline_fan(tmp_path):
    cfg = tmp_path / "f2.json"
    cfg.write_text(json.dumps({"surface": {"rays": [[1, 0], [0, 1], [-1, 2], [0, -1]],
                                           "omega": "D1 + D4"}}))
    code, text = call("describe", "--config", str(cfg))
    assert code == 0 and "kahler: yes" in text
    # degree -2 on the (-2)-curve
    cfg.write_text(json.dumps({"surface": {"rays": [[1, 0], [0, 1], [-1, 2], [0, -1]],
                                           "omega": "D1 + 2D2 + D3 + D4"}}))
    assert call("describe", "--config", str(cfg))[0] == 2


def test_malformed_fan_exit_code(tmp_path):
    cfg = tmp_path / "bad_fan.json"
    cfg.write_text(json.dumps({"surface": {"rays": [[1, 0], [1, 2], [-1, -1]], "omega": "D1"}}))
    assert call("describe", "--config", str(cfg))[0] == 3


def test_bad_json_exit_code(tmp_path):
    cfg = tmp_path / "broken.json"
    cfg.write_text("{not json")
    assert call("describe", "--config", str(cfg))[0] == 2


def test_unknown_surface_and_bad_k():
    assert call("describe", "--surface", "nope")[0] == 2
    assert call("critical", "--surface", "p2", "--k", "5", "3")[0] == 2


def test_wall_exit_code():
    assert call("critical", "--surface", "blp_p2", "--q", "3/7")[0] == 4
    assert call("critical", "--surface", "blp_p2", "--q", "3/7", "--allow-walls", "--k", "2")[0] == 0


def test_pairing_tolerance_failure():
    assert call("pairing", "--surface", "blp_p2", "--q", "1/4")[0] == 0
    assert call("pairing", "--surface", "blp_p2", "--q", "1/4", "--tolerance", "1e-70")[0] == 1


def test_slope_verdict():
    code, text = call("slope", "--surface", "blp_p2", "--q", "1/2", "--z", "E", "--s", "1/2", "--k", "3", "5")
    assert code == 0
    assert lines_with(text, "verdict:") == ["verdict: DESTABILIZES (margin 1/3)"]


def test_df_normal_cone():
    code, text = call("df", "--config", str(CONFIGS[0].parent / "p1xp1_blowup.json"), "--k", "3", "5")
    assert code == 0
    assert lines_with(text, "intersection:") == ["intersection: 1/4"]


def test_scan_csv():
    code, text = call("scan", "--config", str(CONFIGS[0].parent / "blp_p2.json"), "--format", "csv")
    assert code == 0
    rows = [l.split(",") for l in text.strip().splitlines()]
    assert rows[0] == ["param", "wall", "approx"]
    assert [r[1] for r in rows[1:]] == ["3/7"]


@pytest.mark.parametrize("cfg", CONFIGS, ids=[c.stem for c in CONFIGS])
def test_every_config_describes(cfg):
    assert call("describe", "--config", str(cfg))[0] == 0


def test_precision_env(tmp_path):
    def sub(bits):
        env = {"KSTAB_PRECISION": bits, "PATH": "/usr/bin:/bin"}
        return subprocess.run([sys.executable, "-m", "kstab_mirror.cli", "describe", "--surface", "p2"],
                              capture_output=True, text=True, env=env)
    assert sub("512").returncode == 0
    bad = sub("64")
    assert bad.returncode == 2 and "128-bit floor" in bad.stderr
