"""Scenario script parsing and deterministic replay."""

from __future__ import annotations

from importlib import resources

import pytest

from eikc.engine import Engine, ScriptedClock
from eikc.errors import ScriptParseError
from eikc.model import ValidationState
from eikc.repository import Repository
from eikc.scenario import ScenarioRunner, parse_script, run_scenario_text

from conftest import EPOCH

SUNSEED = resources.files("eikc").joinpath("data", "sunseed.scenario").read_text(encoding="utf-8")

MINI = """
actor id=dm role=DecisionMaker name="Chair"
actor id=w role=Watcher name="Researcher"
project id=p title="Mini case" org="Org"
declare id=dp as=dm project=p task=DecisionProblemDefinition what="automate the paperwork"
annotate as=w thread=dp text="which paperwork"
revise as=dm thread=dp what="automate the invoicing paperwork"
validate as=w thread=dp remark="clear now"
"""


def _run(tmp_path, text, name="store"):
    with Repository(tmp_path / name) as repo:
        engine = Engine(repo, clock=ScriptedClock(EPOCH))
        transcript = run_scenario_text(text, engine)
        states = [t.state for t in repo.list_threads()]
        fingerprint = repo.state_fingerprint()
    return transcript, states, fingerprint


# --- parsing -----------------------------------------------------------------

def test_parse_rejects_unknown_verb():
    with pytest.raises(ScriptParseError, match="unknown verb"):
        parse_script("explode as=dm\n")


def test_parse_rejects_missing_keys():
    with pytest.raises(ScriptParseError, match="missing"):
        parse_script("actor id=x\n")


def test_parse_rejects_undeclared_actor():
    with pytest.raises(ScriptParseError, match="undeclared actor"):
        parse_script('project id=p title="T"\nannotate as=ghost thread=t text="x"\n')


def test_parse_rejects_bad_role_and_task():
    with pytest.raises(ScriptParseError, match="unknown role"):
        parse_script("actor id=x role=Admiral\n")
    with pytest.raises(ScriptParseError, match="unknown task"):
        parse_script(
            'actor id=d role=DecisionMaker\nproject id=p title="T"\n'
            'declare id=t as=d project=p task=Nonsense what="x"\n'
        )


def test_parse_comments_and_blanks():
    script = parse_script("# a comment\n\nactor id=d role=DecisionMaker\n")
    assert list(script.actors) == ["d"]
    assert script.actions == []


# --- execution -----------------------------------------------------------------

def test_mini_scenario(tmp_path):
    transcript, states, _ = _run(tmp_path, MINI)
    assert transcript.ok
    assert states == [ValidationState.VALIDATED]
    assert len(transcript.lines) == 5


def test_empty_script_leaves_store_empty(tmp_path):
    transcript, states, fingerprint = _run(tmp_path, "# nothing happens\n")
    assert transcript.ok and states == []
    import hashlib

    assert fingerprint == hashlib.sha256().hexdigest()


def test_expected_error_assertion(tmp_path):
    text = MINI + 'annotate as=w thread=dp text="too late" expect=ThreadClosed\n'
    transcript, _, _ = _run(tmp_path, text)
    assert transcript.ok
    assert "expected-error ThreadClosed" in transcript.lines[-1]


def test_unexpected_error_flagged(tmp_path):
    text = MINI + 'annotate as=w thread=dp text="too late"\n'
    transcript, _, _ = _run(tmp_path, text)
    assert not transcript.ok
    assert "ERROR ThreadClosed" in transcript.lines[-1]


def test_expected_error_that_succeeds_is_flagged(tmp_path):
    text = MINI.replace(
        'annotate as=w thread=dp text="which paperwork"',
        'annotate as=w thread=dp text="which paperwork" expect=RoleNotPermitted',
    )
    transcript, _, _ = _run(tmp_path, text)
    assert not transcript.ok


# --- the bundled fixture ------------------------------------------------------

def test_sunseed_all_threads_validated(tmp_path):
    transcript, states, _ = _run(tmp_path, SUNSEED)
    assert transcript.ok
    assert len(states) == 4
    assert all(s is ValidationState.VALIDATED for s in states)


def test_sunseed_deterministic_across_fresh_stores(tmp_path):
    t1, _, f1 = _run(tmp_path, SUNSEED, "one")
    t2, _, f2 = _run(tmp_path, SUNSEED, "two")
    assert f1 == f2
    assert t1.text() == t2.text()


def test_sunseed_scripted_clock_timestamps(tmp_path):
    with Repository(tmp_path / "store") as repo:
        engine = Engine(repo, clock=ScriptedClock(EPOCH))
        run_scenario_text(SUNSEED, engine)
        whens = [e.when for e in repo.list_entries()]
        assert whens == sorted(whens)
        assert whens[0].year == EPOCH.year


def test_sunseed_entry_kinds_match_script(tmp_path):
    # the stake thread is scripted as declare, 2x(annotate, revise), validate
    from eikc.model import EntryKind

    with Repository(tmp_path / "store") as repo:
        engine = Engine(repo, clock=ScriptedClock(EPOCH))
        run_scenario_text(SUNSEED, engine)
        stake = next(
            t for t in repo.list_threads() if t.task_kind.value == "StakeDefinition"
        )
        _, entries = repo.load_thread(stake.thread_id)
        assert [e.kind for e in entries] == [
            EntryKind.DECLARATION,
            EntryKind.ANNOTATION,
            EntryKind.REVISION,
            EntryKind.ANNOTATION,
            EntryKind.REVISION,
            EntryKind.VALIDATION,
        ]
