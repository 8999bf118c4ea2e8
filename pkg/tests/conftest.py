import json

import pytest

from hashnet import pipeline as P
from hashnet import synth
from hashnet.ingest import DAY, ORIGINAL, REPOST, Event

T0 = 1_600_000_000 // DAY * DAY


def ev(ts, user, tags, kind=ORIGINAL, rt=None, eid=None, loc=None):
    return Event(eid or f"{user}-{ts}-{'.'.join(sorted(tags))}", ts, user, kind, frozenset(tags),
                 rt if kind == REPOST else None, loc)


def jsonl(records):
    return [json.dumps(r) for r in records]


def small_config(seed=3):
    """About 10k events: the default scenario scaled down."""
    cfg = synth.default_scenario(seed)
    cfg.n_users = 300
    cfg.n_weeks = 8
    for g, n in zip(cfg.groups, [40, 40, 30, 10, 30, 25]):
        g["size"] = n
    cfg.scheduled = [
        {"kind": "synchronization", "participants": ["A", "B"], "pool": "sync",
         "start_week": 5, "duration": 2, "intensity": 0.45},
        {"kind": "buzz", "anchor": "P", "n_users": 30, "reposts_per_user": 6, "start_week": 6},
    ]
    cfg.null_model_size = 50
    return cfg


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    cfg = small_config()
    corpus = synth.generate(cfg)
    d = tmp_path_factory.mktemp("small")
    paths = synth.write_corpus(corpus, d)
    loaded = P.load_corpus(paths["events"], paths["anchors"], paths["locations"], cfg.window)
    return cfg, corpus, paths, loaded


@pytest.fixture(scope="session")
def default_corpus(tmp_path_factory):
    cfg = synth.default_scenario()
    corpus = synth.generate(cfg)
    d = tmp_path_factory.mktemp("default")
    paths = synth.write_corpus(corpus, d)
    loaded = P.load_corpus(paths["events"], paths["anchors"], paths["locations"], cfg.window)
    return cfg, corpus, paths, loaded


# acceptance results, one (criterion, passed, detail) per check, echoed at the end of the run
ACCEPTANCE: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
