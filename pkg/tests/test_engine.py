"""Capitalization loop: permissions, state transitions, sequencing,
timestamps and the aggregation operation."""

from __future__ import annotations

from datetime import datetime, timezone

import pytest

from eikc.engine import Engine
from eikc.errors import (
    EmptyTitle,
    IllegalTransition,
    NotOriginator,
    RoleNotPermitted,
    ThreadClosed,
    UnknownProject,
    UnknownThread,
)
from eikc.model import (
    ConversionTag,
    EntryKind,
    KnowledgeContent,
    TaskKind,
    ValidationState,
    fold_state,
)
from eikc.repository import Repository

from conftest import DM, DM2, WATCHER, WATCHER2, EPOCH, SteppingClock


def _content(what="stake of the problem", **kw):
    return KnowledgeContent(what=what, **kw)


@pytest.fixture
def project(engine):
    return engine.open_project("Automation drive", "Sunseed Oil Nigeria Plc").project_id


def _stake_thread(engine, project):
    return engine.declare(project, WATCHER, TaskKind.STAKE_DEFINITION, _content())


# --- open_project ----------------------------------------------------------

def test_open_project(engine):
    project = engine.open_project("Total automation DP", "Sunseed Oil Nigeria Plc")
    assert project.project_id and project.created_at.tzinfo is not None
    assert engine.repository.next_seq(project.project_id) == 1


def test_open_project_empty_title(engine):
    with pytest.raises(EmptyTitle):
        engine.open_project("", "Org")
    with pytest.raises(EmptyTitle):
        engine.open_project("   ", "Org")


def test_two_opens_distinct_ids(engine):
    first = engine.open_project("One", "Org")
    second = engine.open_project("Two", "Org")
    assert first.project_id != second.project_id


# --- declare -----------------------------------------------------------------

def test_declare_decision_problem(engine, project):
    thread_id = engine.declare(
        project,
        DM,
        TaskKind.DECISION_PROBLEM_DEFINITION,
        _content("total automation of production and sales processes"),
    )
    thread, entries = engine.repository.load_thread(thread_id)
    assert thread.state is ValidationState.DECLARED
    assert entries[0].kind is EntryKind.DECLARATION
    assert entries[0].conversion_tag is ConversionTag.EXTERNALIZATION
    assert entries[0].parent_id is None


def test_declare_wrong_role(engine, project):
    with pytest.raises(RoleNotPermitted):
        engine.declare(project, WATCHER, TaskKind.DECISION_PROBLEM_DEFINITION, _content())
    with pytest.raises(RoleNotPermitted):
        engine.declare(project, DM, TaskKind.STAKE_DEFINITION, _content())


def test_declare_unknown_project(engine):
    with pytest.raises(UnknownProject):
        engine.declare("p9999", DM, TaskKind.DECISION_PROBLEM_DEFINITION, _content())


def test_declare_seq_assignment(engine, project):
    engine.declare(project, DM, TaskKind.DECISION_PROBLEM_DEFINITION, _content("first"))
    engine.declare(project, WATCHER, TaskKind.STAKE_DEFINITION, _content("second"))
    # replay the log and assert entry seqs are exactly 1..n
    seqs = [e.seq for e in engine.repository.list_entries()]
    assert seqs == [1, 2]


# --- annotate ------------------------------------------------------------------

def test_annotate_moves_state(engine, project):
    thread_id = _stake_thread(engine, project)
    engine.annotate(thread_id, DM, "needs figures")
    thread, entries = engine.repository.load_thread(thread_id)
    assert thread.state is ValidationState.UNDER_ANNOTATION
    assert entries[-1].conversion_tag is ConversionTag.SOCIALIZATION
    assert entries[-1].content.what == "needs figures"


def test_annotate_parent_is_latest_content_entry(engine, project):
    thread_id = _stake_thread(engine, project)
    engine.annotate(thread_id, DM, "round 1")
    engine.revise(thread_id, WATCHER, _content("revised stake"))
    engine.annotate(thread_id, DM, "round 2")
    _, entries = engine.repository.load_thread(thread_id)
    # independent scan: the parent must be the content entry with the
    # largest seq among declarations/revisions
    content_entries = [e for e in entries if e.kind in (EntryKind.DECLARATION, EntryKind.REVISION)]
    expected_parent = max(content_entries, key=lambda e: e.seq)
    assert entries[-1].parent_id == expected_parent.entry_id


def test_annotate_by_originator_forbidden(engine, project):
    thread_id = _stake_thread(engine, project)
    with pytest.raises(RoleNotPermitted):
        engine.annotate(thread_id, WATCHER, "self-annotation")


def test_annotate_wrong_role(engine, project):
    thread_id = _stake_thread(engine, project)
    with pytest.raises(RoleNotPermitted):
        engine.annotate(thread_id, WATCHER2, "wrong side of the table")


def test_annotate_closed_thread(engine, project):
    thread_id = _stake_thread(engine, project)
    engine.validate(thread_id, DM, "fine as declared")
    with pytest.raises(ThreadClosed):
        engine.annotate(thread_id, DM, "too late")


def test_annotate_twice_without_revision(engine, project):
    thread_id = _stake_thread(engine, project)
    engine.annotate(thread_id, DM, "first")
    with pytest.raises(IllegalTransition):
        engine.annotate(thread_id, DM2, "second without a revision")


def test_annotate_unknown_thread(engine):
    with pytest.raises(UnknownThread):
        engine.annotate("p0001-t999", DM, "hello")


# --- revise -----------------------------------------------------------------

def test_revise_flow(engine, project):
    thread_id = _stake_thread(engine, project)
    engine.annotate(thread_id, DM, "tighten the wording")
    before = len(engine.repository.load_thread(thread_id)[1])
    engine.revise(thread_id, WATCHER, _content("updated stake"))
    thread, entries = engine.repository.load_thread(thread_id)
    assert thread.state is ValidationState.REVISED
    assert len(entries) == before + 1
    assert entries[-1].parent_id == entries[-2].entry_id  # the annotation


def test_revise_requires_originator(engine, project):
    thread_id = _stake_thread(engine, project)
    engine.annotate(thread_id, DM, "note")
    with pytest.raises(NotOriginator):
        engine.revise(thread_id, WATCHER2, _content("hijack"))
    with pytest.raises(NotOriginator):
        engine.revise(thread_id, DM, _content("hijack"))


def test_revise_before_annotation_illegal(engine, project):
    thread_id = _stake_thread(engine, project)
    with pytest.raises(IllegalTransition):
        engine.revise(thread_id, WATCHER, _content("nothing to react to"))


def test_entry_count_after_k_rounds(engine, project):
    # after k annotate/revise rounds the thread holds exactly 1 + 2k entries
    for k in range(4):
        thread_id = _stake_thread(engine, project)
        for _ in range(k):
            engine.annotate(thread_id, DM, "round")
            engine.revise(thread_id, WATCHER, _content("updated"))
        _, entries = engine.repository.load_thread(thread_id)
        assert len(entries) == 1 + 2 * k


# --- validate ------------------------------------------------------------------

def test_validate_from_each_open_state(engine, project):
    # Declared
    t1 = _stake_thread(engine, project)
    engine.validate(t1, DM, "agree as declared")
    assert engine.repository.load_thread(t1)[0].state is ValidationState.VALIDATED
    assert len(engine.repository.load_thread(t1)[1]) == 2
    # UnderAnnotation
    t2 = _stake_thread(engine, project)
    engine.annotate(t2, DM, "note")
    engine.validate(t2, DM2, "fine")
    assert engine.repository.load_thread(t2)[0].state is ValidationState.VALIDATED
    # Revised
    t3 = _stake_thread(engine, project)
    engine.annotate(t3, DM, "note")
    engine.revise(t3, WATCHER, _content("updated"))
    engine.validate(t3, DM, "fine now")
    assert engine.repository.load_thread(t3)[0].state is ValidationState.VALIDATED


def test_validate_twice(engine, project):
    thread_id = _stake_thread(engine, project)
    engine.validate(thread_id, DM, "done")
    with pytest.raises(ThreadClosed):
        engine.validate(thread_id, DM2, "again")


def test_validate_wrong_role(engine, project):
    thread_id = _stake_thread(engine, project)
    with pytest.raises(RoleNotPermitted):
        engine.validate(thread_id, WATCHER2, "watchers do not close stakes")


def test_decision_record_validated_by_second_dm(engine, project):
    thread_id = engine.declare(project, DM, TaskKind.DECISION_RECORD, _content("final decision"))
    with pytest.raises(RoleNotPermitted):
        engine.validate(thread_id, WATCHER, "wrong role for decisions")
    with pytest.raises(RoleNotPermitted):
        engine.validate(thread_id, DM, "originator cannot close own record")
    engine.validate(thread_id, DM2, "countersigned")
    assert engine.repository.load_thread(thread_id)[0].state is ValidationState.VALIDATED


# --- aggregate -----------------------------------------------------------------

def test_aggregate_matches_filter_oracle(engine, project):
    thread_id = _stake_thread(engine, project)
    engine.annotate(thread_id, DM, "round one")
    engine.revise(thread_id, WATCHER, _content("second version"))
    engine.annotate(thread_id, DM, "round two")
    engine.revise(thread_id, WATCHER, _content("third version"))

    aggregated = engine.aggregate(thread_id)
    _, entries = engine.repository.load_thread(thread_id)
    oracle = [
        (e.who, e.content.what, e.content.why, e.content.how, e.content.result, e.when)
        for e in entries
        if e.kind in (EntryKind.DECLARATION, EntryKind.REVISION)
    ]
    assert len(aggregated.tuples) == 3
    assert [
        (t.who, t.what, t.why, t.how, t.result, t.when) for t in aggregated.tuples
    ] == oracle
    # when values are non-decreasing along the tuple order
    whens = [t.when for t in aggregated.tuples]
    assert whens == sorted(whens)


def test_aggregate_fresh_thread(engine, project):
    thread_id = _stake_thread(engine, project)
    aggregated = engine.aggregate(thread_id)
    assert len(aggregated.tuples) == 1
    assert aggregated.tuples[0].what == "stake of the problem"


def test_aggregate_unknown_thread(engine):
    with pytest.raises(UnknownThread):
        engine.aggregate("missing")


# --- cross-cutting invariants ------------------------------------------------

def test_fold_reproduces_thread_state(engine, project):
    t = _stake_thread(engine, project)
    engine.annotate(t, DM, "a")
    engine.revise(t, WATCHER, _content("r"))
    engine.validate(t, DM, "v")
    thread, entries = engine.repository.load_thread(t)
    assert fold_state(e.kind for e in entries) is thread.state


def test_alternation_between_revisions(engine, project):
    t = _stake_thread(engine, project)
    for _ in range(3):
        engine.annotate(t, DM, "a")
        engine.revise(t, WATCHER, _content("r"))
    _, entries = engine.repository.load_thread(t)
    kinds = [e.kind for e in entries]
    for i, left in enumerate(kinds):
        for j in range(i + 1, len(kinds)):
            if left is EntryKind.REVISION and kinds[j] is EntryKind.REVISION:
                assert EntryKind.ANNOTATION in kinds[i + 1 : j]
            if left is EntryKind.ANNOTATION and kinds[j] is EntryKind.ANNOTATION:
                assert EntryKind.REVISION in kinds[i + 1 : j]


def test_rejected_operation_leaves_state_untouched(engine, project, tmp_path):
    thread_id = _stake_thread(engine, project)
    repo = engine.repository
    fingerprint = repo.state_fingerprint()
    raw = repo.log_path.read_bytes()
    for attempt in (
        lambda: engine.declare(project, WATCHER, TaskKind.DECISION_PROBLEM_DEFINITION, _content()),
        lambda: engine.annotate(thread_id, WATCHER, "own thread"),
        lambda: engine.revise(thread_id, WATCHER, _content("no annotation yet")),
        lambda: engine.validate(thread_id, WATCHER2, "wrong role"),
        lambda: engine.open_project("", "Org"),
    ):
        with pytest.raises(Exception):
            attempt()
        assert repo.state_fingerprint() == fingerprint
        assert repo.log_path.read_bytes() == raw


def test_timestamps_non_decreasing_with_backwards_clock(repo):
    clock = SteppingClock(EPOCH)
    engine = Engine(repo, clock=clock)
    project = engine.open_project("Drive", "Org").project_id
    clock.step(100)
    t = engine.declare(project, WATCHER, TaskKind.STAKE_DEFINITION, _content())
    clock.step(-50)  # wall clock jumps backwards
    engine.annotate(t, DM, "note")
    _, entries = repo.load_thread(t)
    whens = [e.when for e in entries]
    assert whens == sorted(whens)
    seqs = [e.seq for e in entries]
    assert seqs == sorted(seqs)  # ties broken by seq


def test_millisecond_truncation(engine, clock, project):
    clock.current = datetime(2010, 5, 1, 12, 0, 0, 123456, tzinfo=timezone.utc)
    t = engine.declare(project, WATCHER, TaskKind.STAKE_DEFINITION, _content())
    _, entries = engine.repository.load_thread(t)
    assert entries[0].when.microsecond == 123000
