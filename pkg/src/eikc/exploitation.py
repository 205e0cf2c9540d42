"""Exploitation of the capitalized store: exploration by classification
axes, conjunctive term queries, thread visualization, retrieval of similar
past cases, and the feedback loop that itself becomes queryable knowledge.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Optional

from .engine import Engine
from .errors import EmptyDescription, EmptyQuery, NotValidated, RatingOutOfRange
from .model import (
    Actor,
    EntryKind,
    KnowledgeContent,
    KnowledgeEntry,
    KnowledgeThread,
    TaskKind,
    ValidationState,
)

SNIPPET_LEN = 160

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> set[str]:
    """Lowercased alphanumeric token set; the vocabulary of similarity
    scoring."""
    return set(_TOKEN_RE.findall(text.lower()))


@dataclass(frozen=True)
class QuerySpec:
    """A conjunctive term query with optional scope filters.

    Terms are normalized (trimmed, case-folded); every term must occur in
    an entry's content for the entry to match.
    """

    terms: tuple[str, ...]
    project_id: Optional[str] = None
    task_kind: Optional[TaskKind] = None
    year: Optional[int] = None
    validated_only: bool = False

    @classmethod
    def build(
        cls,
        terms: list[str] | tuple[str, ...],
        project_id: Optional[str] = None,
        task_kind: Optional[TaskKind] = None,
        year: Optional[int] = None,
        validated_only: bool = False,
    ) -> "QuerySpec":
        normalized = tuple(t.strip().casefold() for t in terms if t.strip())
        if not normalized:
            raise EmptyQuery("no query terms left after normalization")
        return cls(
            terms=normalized,
            project_id=project_id,
            task_kind=task_kind,
            year=year,
            validated_only=validated_only,
        )


@dataclass(frozen=True)
class QueryHit:
    entry_id: str
    thread_id: str
    snippet: str
    score: int


@dataclass(frozen=True)
class ResultSet:
    hits: tuple[QueryHit, ...]
    query: QuerySpec
    executed_at: datetime


@dataclass(frozen=True)
class Cluster:
    """One group of an exploration axis; threads never repeat across the
    clusters of one axis."""

    axis: str
    key: str
    thread_ids: tuple[str, ...]


class ViewMode(str, Enum):
    VALIDATED = "validated"
    EVOLUTION = "evolution"
    COMPLETE = "complete"


@dataclass(frozen=True)
class ViewItem:
    entry_id: str
    kind: EntryKind
    who: str
    when: datetime
    content: KnowledgeContent


@dataclass(frozen=True)
class ThreadView:
    thread_id: str
    mode: ViewMode
    state: ValidationState
    items: tuple[ViewItem, ...]


@dataclass(frozen=True)
class SimilarCase:
    thread_id: str
    score: float
    task_kind: TaskKind
    state: ValidationState
    last_when: datetime


EXPLORE_AXES = ("task", "project", "year", "state")


class Exploitation:
    """Read-mostly operations over one store; ``record_feedback`` is the
    single write and follows the engine's append contract."""

    def __init__(self, engine: Engine):
        self.engine = engine
        self.repository = engine.repository

    # -- explore -----------------------------------------------------------

    def explore(self, axis: str) -> list[Cluster]:
        """Partition every thread of the store along one axis: task kind,
        project, creation year, or validation state."""
        if axis not in EXPLORE_AXES:
            raise ValueError(f"axis must be one of {EXPLORE_AXES}, got {axis!r}")
        groups: dict[str, list[str]] = {}
        for thread in self.repository.list_threads():
            key = self._axis_key(axis, thread)
            groups.setdefault(key, []).append(thread.thread_id)
        return [
            Cluster(axis=axis, key=key, thread_ids=tuple(groups[key]))
            for key in sorted(groups)
        ]

    def _axis_key(self, axis: str, thread: KnowledgeThread) -> str:
        if axis == "task":
            return thread.task_kind.value
        if axis == "project":
            return thread.project_id
        if axis == "state":
            return thread.state.value
        return str(self._thread_year(thread))

    def _thread_year(self, thread: KnowledgeThread) -> int:
        if thread.entry_ids:
            return self.repository.entry(thread.entry_ids[0]).when.year
        return thread.created_at.year

    # -- query -------------------------------------------------------------

    def query(self, spec: QuerySpec) -> ResultSet:
        """Conjunctive scan: a hit must contain every term in its content
        and satisfy all scope filters. Score counts (term, field) pairs;
        ordering is score desc, then seq, then entry id."""
        if not spec.terms:
            raise EmptyQuery("query has no terms")
        threads = {t.thread_id: t for t in self.repository.list_threads()}
        hits = []
        order: dict[str, int] = {}
        for position, entry in enumerate(self.repository.list_entries()):
            order[entry.entry_id] = position
            if not self._in_scope(entry, threads[entry.thread_id], spec):
                continue
            fields = [f.casefold() for f in entry.content.fields()]
            haystack = "\n".join(fields)
            if not all(term in haystack for term in spec.terms):
                continue
            score = sum(1 for term in spec.terms for f in fields if term in f)
            hits.append(
                QueryHit(
                    entry_id=entry.entry_id,
                    thread_id=entry.thread_id,
                    snippet=self._snippet(entry, spec.terms),
                    score=score,
                )
            )
        hits.sort(key=lambda h: (-h.score, order[h.entry_id], h.entry_id))
        return ResultSet(hits=tuple(hits), query=spec, executed_at=self.engine._now())

    def _in_scope(self, entry: KnowledgeEntry, thread: KnowledgeThread, spec: QuerySpec) -> bool:
        if spec.project_id is not None and entry.project_id != spec.project_id:
            return False
        if spec.year is not None and entry.when.year != spec.year:
            return False
        if spec.task_kind is not None and thread.task_kind is not spec.task_kind:
            return False
        if spec.validated_only and thread.state is not ValidationState.VALIDATED:
            return False
        return True

    def _snippet(self, entry: KnowledgeEntry, terms: tuple[str, ...]) -> str:
        for text in entry.content.fields():
            lowered = text.casefold()
            if any(term in lowered for term in terms):
                return text[:SNIPPET_LEN]
        return entry.content.what[:SNIPPET_LEN]

    # -- visualize -----------------------------------------------------------

    def visualize(self, thread_id: str, mode: ViewMode) -> ThreadView:
        """The three lifecycle views of a thread.

        complete: every lifecycle entry from initiation through validation;
        evolution: everything strictly before the validation entry (all of
        it for open threads); validated: the final content-bearing entry
        plus the validation record. Feedback entries are exploitation
        artifacts and do not appear in lifecycle views.
        """
        thread, entries = self.repository.load_thread(thread_id)
        lifecycle = [e for e in entries if e.kind is not EntryKind.FEEDBACK]
        validated = thread.state is ValidationState.VALIDATED

        if mode is ViewMode.COMPLETE:
            chosen = lifecycle
        elif mode is ViewMode.EVOLUTION:
            chosen = lifecycle[:-1] if validated else lifecycle
        else:
            if not validated:
                raise NotValidated(f"thread {thread_id} is {thread.state.value}")
            validation = lifecycle[-1]
            final = next(
                e for e in reversed(lifecycle) if e.kind in (EntryKind.DECLARATION, EntryKind.REVISION)
            )
            chosen = [final, validation]

        items = tuple(
            ViewItem(entry_id=e.entry_id, kind=e.kind, who=e.who, when=e.when, content=e.content)
            for e in chosen
        )
        return ThreadView(thread_id=thread_id, mode=mode, state=thread.state, items=items)

    # -- similar cases -------------------------------------------------------

    def similar_cases(self, description: str, k: int) -> list[SimilarCase]:
        """Rank threads by token overlap with the description: score is
        |tokens(description) ∩ tokens(thread)| / |tokens(description)|,
        zero-score threads dropped, ties broken by most recent activity."""
        if not description or not description.strip():
            raise EmptyDescription("description must be non-empty")
        if k < 1:
            raise ValueError("k must be a positive integer")
        wanted = tokenize(description)
        if not wanted:
            raise EmptyDescription("description has no searchable tokens")

        scored = []
        for thread in self.repository.list_threads():
            entries = [self.repository.entry(e) for e in thread.entry_ids]
            if not entries:
                continue
            have: set[str] = set()
            for entry in entries:
                for text in entry.content.fields():
                    have |= tokenize(text)
            score = len(wanted & have) / len(wanted)
            if score == 0:
                continue
            scored.append(
                SimilarCase(
                    thread_id=thread.thread_id,
                    score=score,
                    task_kind=thread.task_kind,
                    state=thread.state,
                    last_when=entries[-1].when,
                )
            )
        scored.sort(key=lambda c: (-c.score, -c.last_when.timestamp(), c.thread_id))
        return scored[:k]

    # -- feedback ---------------------------------------------------------------

    def record_feedback(self, actor: Actor, target_entry_id: str, rating: int, comment: str) -> str:
        """Capture an actor's relevance assessment of an exploited entry.

        The feedback is appended to the target's thread (rating stored as
        the ``why`` token, comment as ``what``) and is immediately
        queryable; the thread's validation state is untouched.
        """
        if not isinstance(rating, int) or isinstance(rating, bool) or not 1 <= rating <= 5:
            raise RatingOutOfRange(f"rating must be an integer in 1..5, got {rating!r}")
        target = self.repository.entry(target_entry_id)
        return self.engine.add_feedback(actor, target, comment, rating)
