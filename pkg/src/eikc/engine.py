"""The capitalization loop: declare, annotate, revise, validate, aggregate.

Every operation validates permissions and the thread state before
anything is written, then appends immutable records through the
repository. Timestamps come from an injectable clock and are clamped to
be non-decreasing within each project (ties are resolved by seq).
"""

from __future__ import annotations

from datetime import datetime, timezone
from typing import Callable, Optional

from .errors import (
    EmptyTitle,
    IllegalTransition,
    NotOriginator,
    RoleNotPermitted,
    ThreadClosed,
)
from .model import (
    CONVERSION_TAGS,
    Actor,
    AggregatedKR,
    AggregatedTuple,
    EntryKind,
    KnowledgeContent,
    KnowledgeEntry,
    KnowledgeThread,
    Project,
    TaskKind,
    ValidationState,
    next_state,
    permitted,
    truncate_ms,
)
from .repository import Repository, entry_record, project_record, thread_record

Clock = Callable[[], datetime]


def system_clock() -> datetime:
    return datetime.now(timezone.utc)


class ScriptedClock:
    """Deterministic clock for reproducible runs: starts at a fixed epoch
    and only moves when told to."""

    def __init__(self, start: datetime, step_seconds: float = 1.0):
        self._current = truncate_ms(start)
        self._step = step_seconds

    def __call__(self) -> datetime:
        return self._current

    def advance(self) -> None:
        self._current = truncate_ms(
            datetime.fromtimestamp(self._current.timestamp() + self._step, tz=timezone.utc)
        )


class Engine:
    """Orchestrates the declare/annotate/revise/validate cycle over one
    repository. Safe for concurrent callers; mutations on a store are
    serialized by the repository lock."""

    def __init__(self, repository: Repository, clock: Optional[Clock] = None):
        self.repository = repository
        self.clock: Clock = clock or system_clock

    # -- time -----------------------------------------------------------------

    def _now(self, project_id: Optional[str] = None) -> datetime:
        ts = truncate_ms(self.clock())
        if project_id is not None:
            last = self.repository.last_when(project_id)
            if last is not None and ts < last:
                ts = last
        return ts

    # -- operations -------------------------------------------------------------

    def open_project(self, title: str, organization: str) -> Project:
        """Create a project; the seq counter starts empty."""
        if not title or not title.strip():
            raise EmptyTitle("project title must be non-empty")
        with self.repository.lock:
            project = Project(
                project_id=self.repository.new_project_id(),
                title=title,
                organization=organization,
                created_at=self._now(),
            )
            self.repository.append(project_record(project))
            return project

    def declare(self, project_id: str, actor: Actor, task: TaskKind, content: KnowledgeContent) -> str:
        """Open a new thread with its declaration entry; returns thread id."""
        with self.repository.lock:
            self.repository.project(project_id)  # raises UnknownProject
            if not permitted(actor.role, task, EntryKind.DECLARATION):
                raise RoleNotPermitted(
                    f"{actor.role.value} may not declare {task.value}"
                )
            when = self._now(project_id)
            thread_id = self.repository.new_thread_id(project_id)
            self.repository.append(
                thread_record(project_id, thread_id, task, actor.actor_id, actor.role, when)
            )
            self._append_entry(
                actor, project_id, thread_id, EntryKind.DECLARATION, content, parent_id=None, when=when
            )
            return thread_id

    def annotate(self, thread_id: str, actor: Actor, annotation_text: str) -> str:
        """Record a counterpart actor's reaction to the latest version."""
        with self.repository.lock:
            thread, entries = self._open_thread(thread_id)
            is_originator = actor.actor_id == thread.originator
            if not permitted(actor.role, thread.task_kind, EntryKind.ANNOTATION, is_originator):
                raise RoleNotPermitted(
                    f"{actor.role.value} may not annotate {thread.task_kind.value}"
                    + (" as originator" if is_originator else "")
                )
            next_state(thread.state, EntryKind.ANNOTATION)  # raises IllegalTransition
            parent = _latest(entries, (EntryKind.DECLARATION, EntryKind.REVISION))
            return self._append_entry(
                actor,
                thread.project_id,
                thread_id,
                EntryKind.ANNOTATION,
                KnowledgeContent(what=annotation_text),
                parent_id=parent.entry_id,
            )

    def revise(self, thread_id: str, actor: Actor, content: KnowledgeContent) -> str:
        """Originator updates the knowledge in reaction to an annotation."""
        with self.repository.lock:
            thread, entries = self._open_thread(thread_id)
            if actor.actor_id != thread.originator:
                raise NotOriginator(f"{actor.actor_id} did not originate thread {thread_id}")
            if not permitted(actor.role, thread.task_kind, EntryKind.REVISION, True):
                raise RoleNotPermitted(
                    f"{actor.role.value} may not revise {thread.task_kind.value}"
                )
            if thread.state is not ValidationState.UNDER_ANNOTATION:
                raise IllegalTransition(
                    f"revision requires an open annotation, thread is {thread.state.value}"
                )
            parent = _latest(entries, (EntryKind.ANNOTATION,))
            return self._append_entry(
                actor, thread.project_id, thread_id, EntryKind.REVISION, content, parent_id=parent.entry_id
            )

    def validate(self, thread_id: str, actor: Actor, remark: str) -> str:
        """Record the concession; the thread closes permanently."""
        with self.repository.lock:
            thread, entries = self._open_thread(thread_id)
            is_originator = actor.actor_id == thread.originator
            if not permitted(actor.role, thread.task_kind, EntryKind.VALIDATION, is_originator):
                raise RoleNotPermitted(
                    f"{actor.role.value} may not validate {thread.task_kind.value}"
                    + (" as originator" if is_originator else "")
                )
            next_state(thread.state, EntryKind.VALIDATION)
            parent = _latest(entries, (EntryKind.DECLARATION, EntryKind.REVISION))
            return self._append_entry(
                actor,
                thread.project_id,
                thread_id,
                EntryKind.VALIDATION,
                KnowledgeContent(what=remark),
                parent_id=parent.entry_id,
            )

    def add_feedback(self, actor: Actor, target: KnowledgeEntry, comment: str, rating: int) -> str:
        """Append a feedback entry to the target's thread. Does not touch
        the validation state; allowed on closed threads."""
        with self.repository.lock:
            return self._append_entry(
                actor,
                target.project_id,
                target.thread_id,
                EntryKind.FEEDBACK,
                KnowledgeContent(what=comment, why=str(rating)),
                parent_id=target.entry_id,
            )

    def aggregate(self, thread_id: str) -> AggregatedKR:
        """One (who, what, why, how, result, when) tuple per declaration or
        revision, in seq order. Pure read."""
        _, entries = self.repository.load_thread(thread_id)
        tuples = tuple(
            AggregatedTuple(
                who=e.who,
                what=e.content.what,
                why=e.content.why,
                how=e.content.how,
                result=e.content.result,
                when=e.when,
            )
            for e in entries
            if e.kind in (EntryKind.DECLARATION, EntryKind.REVISION)
        )
        return AggregatedKR(thread_id=thread_id, tuples=tuples)

    # -- helpers ---------------------------------------------------------------

    def _open_thread(self, thread_id: str) -> tuple[KnowledgeThread, list[KnowledgeEntry]]:
        thread, entries = self.repository.load_thread(thread_id)
        if thread.state is ValidationState.VALIDATED:
            raise ThreadClosed(f"thread {thread_id} is validated and closed")
        return thread, entries

    def _append_entry(
        self,
        actor: Actor,
        project_id: str,
        thread_id: str,
        kind: EntryKind,
        content: KnowledgeContent,
        parent_id: Optional[str],
        when: Optional[datetime] = None,
    ) -> str:
        entry = KnowledgeEntry(
            entry_id=self.repository.new_entry_id(project_id),
            project_id=project_id,
            thread_id=thread_id,
            seq=self.repository.next_seq(project_id),
            kind=kind,
            who=actor.actor_id,
            content=content,
            when=when if when is not None else self._now(project_id),
            parent_id=parent_id,
            conversion_tag=CONVERSION_TAGS[kind],
        )
        self.repository.append(entry_record(entry, actor.role))
        return entry.entry_id


def _latest(entries: list[KnowledgeEntry], kinds: tuple[EntryKind, ...]) -> KnowledgeEntry:
    for entry in reversed(entries):
        if entry.kind in kinds:
            return entry
    raise IllegalTransition(f"thread has no {'/'.join(k.value for k in kinds)} entry")
