import json

import pytest

from hashnet import config as C
from hashnet.pipeline import Settings, to_timestamp


def test_defaults_and_file_merge(tmp_path):
    f = tmp_path / "run.yaml"
    f.write_text("analysis:\n  threshold: 0.8\ndata:\n  events: ev.jsonl\n")
    cfg = C.load_config(f, environ={})
    assert cfg["analysis"] == {"threshold": 0.8}
    assert cfg["data"]["anchors"] == C.DEFAULTS["data"]["anchors"]
    assert C.resolve(cfg, cfg["data"]["events"]) == tmp_path / "ev.jsonl"
    assert C.resolve(cfg, "/abs/x") == C.Path("/abs/x")


def test_env_override_wins():
    env = {"HASHNET_ANALYSIS__THRESHOLD": "0.9", "HASHNET_DATA__WINDOW__START": "2021-09-01",
           "HASHNET_OUTPUT": "elsewhere", "OTHER": "x"}
    cfg = C.load_config(None, environ=env)
    assert cfg["analysis"]["threshold"] == 0.9
    assert to_timestamp(cfg["data"]["window"]["start"]) == to_timestamp("2021-09-01T00:00:00Z")
    assert cfg["output"] == "elsewhere"
    assert Settings.from_dict(cfg["analysis"]).threshold == 0.9


def test_errors(tmp_path):
    with pytest.raises(C.ConfigError):
        C.load_config(tmp_path / "missing.yaml", environ={})
    bad = tmp_path / "bad.yaml"
    bad.write_text("bogus: 1\n")
    with pytest.raises(C.ConfigError, match="unknown sections"):
        C.load_config(bad, environ={})
    bad.write_text("- a\n- b\n")
    with pytest.raises(C.ConfigError):
        C.load_config(bad, environ={})
    with pytest.raises(ValueError):
        Settings.from_dict({"nope": 1})


def test_hash_ignores_location_and_tracks_content(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir(), b.mkdir()
    (a / "c.yaml").write_text("analysis: {seed: 1}\n")
    (b / "c.yaml").write_text(json.dumps({"analysis": {"seed": 1}}))
    ha = C.config_hash(C.load_config(a / "c.yaml", environ={}))
    hb = C.config_hash(C.load_config(b / "c.yaml", environ={}))
    assert ha == hb and len(ha) == 64
    hc = C.config_hash(C.load_config(a / "c.yaml", environ={"HASHNET_ANALYSIS__SEED": "2"}))
    assert hc != ha


def test_dump_roundtrip(tmp_path):
    cfg = C.load_config(None, environ={"HASHNET_ANALYSIS__SEED": "4"})
    C.dump_config(cfg, tmp_path / "out.yaml")
    back = C.load_config(tmp_path / "out.yaml", environ={})
    assert C.config_hash(back) == C.config_hash(cfg)
