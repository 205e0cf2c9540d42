"""Core value types, the role/task permission matrix and the validation
state machine.

Everything here is immutable and side-effect free; the repository and the
engine build on these types but never extend them with hidden state.

Workflow in one paragraph: an originator *declares* a knowledge unit for a
task, a counterpart actor *annotates* it, the originator *revises*, and the
annotate/revise loop repeats until a permitted validator records the
concession (*validates*). Every step is an immutable, timestamped entry;
the thread state is always recomputable by folding the transition function
over the entry kinds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Iterable, Optional

from .errors import IllegalTransition, InvalidContent


class Role(str, Enum):
    """The two actor roles. Closed enumeration."""

    DECISION_MAKER = "DecisionMaker"
    WATCHER = "Watcher"


class TaskKind(str, Enum):
    """Task taxonomy for the decision-resolution workflow."""

    DECISION_PROBLEM_DEFINITION = "DecisionProblemDefinition"
    STAKE_DEFINITION = "StakeDefinition"
    ISP_TRANSLATION = "IspTranslation"
    SOURCE_IDENTIFICATION = "SourceIdentification"
    INDICATOR_GENERATION = "IndicatorGeneration"
    DECISION_RECORD = "DecisionRecord"


class EntryKind(str, Enum):
    """Kinds of capitalized entries."""

    DECLARATION = "Declaration"
    ANNOTATION = "Annotation"
    REVISION = "Revision"
    VALIDATION = "Validation"
    FEEDBACK = "Feedback"


class ValidationState(str, Enum):
    """Thread lifecycle states. ``VALIDATED`` is terminal."""

    DECLARED = "Declared"
    UNDER_ANNOTATION = "UnderAnnotation"
    REVISED = "Revised"
    VALIDATED = "Validated"


class ConversionTag(str, Enum):
    """Knowledge-conversion process an entry belongs to.

    Declarations and revisions externalize the originator's knowledge;
    annotations, validations and feedback are communication between actors.
    """

    SOCIALIZATION = "Socialization"
    EXTERNALIZATION = "Externalization"


#: Conversion tag implied by each entry kind. Fixed, not caller-selectable.
CONVERSION_TAGS: dict[EntryKind, ConversionTag] = {
    EntryKind.DECLARATION: ConversionTag.EXTERNALIZATION,
    EntryKind.REVISION: ConversionTag.EXTERNALIZATION,
    EntryKind.ANNOTATION: ConversionTag.SOCIALIZATION,
    EntryKind.VALIDATION: ConversionTag.SOCIALIZATION,
    EntryKind.FEEDBACK: ConversionTag.SOCIALIZATION,
}


@dataclass(frozen=True)
class Actor:
    """A registered participant: identity plus role."""

    actor_id: str
    display_name: str
    role: Role


@dataclass(frozen=True)
class Project:
    """A decision-resolution project grouping threads."""

    project_id: str
    title: str
    organization: str
    created_at: datetime


@dataclass(frozen=True)
class KnowledgeContent:
    """The what/why/how/result payload of an entry.

    ``what`` must be non-empty; annotation and validation text also lives
    in ``what``. ``result`` is the optional solution/decision outcome.
    """

    what: str
    why: str = ""
    how: str = ""
    result: Optional[str] = None

    def __post_init__(self):
        if not self.what or not self.what.strip():
            raise InvalidContent("content 'what' must be non-empty")

    def fields(self) -> list[str]:
        """Content fields in a fixed order, for matching and snippets."""
        out = [self.what, self.why, self.how]
        if self.result is not None:
            out.append(self.result)
        return out


@dataclass(frozen=True)
class KnowledgeEntry:
    """One immutable capitalized unit.

    ``seq`` is the project-local sequence number (gapless, starting at 1);
    ``when`` is UTC at millisecond precision. ``parent_id`` is the entry
    being responded to and is None exactly for declarations.
    """

    entry_id: str
    project_id: str
    thread_id: str
    seq: int
    kind: EntryKind
    who: str
    content: KnowledgeContent
    when: datetime
    parent_id: Optional[str] = None
    conversion_tag: ConversionTag = ConversionTag.EXTERNALIZATION


@dataclass
class KnowledgeThread:
    """Ordered entry sequence for one task, carrying the validation state.

    ``state`` is always equal to ``fold_state`` over the entries' kinds;
    the repository recomputes and checks this on load.
    """

    thread_id: str
    project_id: str
    task_kind: TaskKind
    originator: str
    state: ValidationState
    created_at: datetime
    entry_ids: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class AggregatedTuple:
    """One (who, what, why, how, result, when) record of an aggregation."""

    who: str
    what: str
    why: str
    how: str
    result: Optional[str]
    when: datetime


@dataclass(frozen=True)
class AggregatedKR:
    """Aggregated view of a thread: one tuple per declaration/revision."""

    thread_id: str
    tuples: tuple[AggregatedTuple, ...]


# --------------------------------------------------------------------------
# Validation state machine
# --------------------------------------------------------------------------

#: The complete legal transition table: exactly these 7 (state, event)
#: pairs are legal; the remaining 13 of the 4x5 grid raise.
#: (DECLARED, DECLARATION) is the initial self-transition that lets the
#: thread state be reproduced by folding over *all* its entry kinds.
TRANSITIONS: dict[tuple[ValidationState, EntryKind], ValidationState] = {
    (ValidationState.DECLARED, EntryKind.DECLARATION): ValidationState.DECLARED,
    (ValidationState.DECLARED, EntryKind.ANNOTATION): ValidationState.UNDER_ANNOTATION,
    (ValidationState.DECLARED, EntryKind.VALIDATION): ValidationState.VALIDATED,
    (ValidationState.UNDER_ANNOTATION, EntryKind.REVISION): ValidationState.REVISED,
    (ValidationState.UNDER_ANNOTATION, EntryKind.VALIDATION): ValidationState.VALIDATED,
    (ValidationState.REVISED, EntryKind.ANNOTATION): ValidationState.UNDER_ANNOTATION,
    (ValidationState.REVISED, EntryKind.VALIDATION): ValidationState.VALIDATED,
}


def next_state(current: ValidationState, event: EntryKind) -> ValidationState:
    """Deterministic transition function of the thread state machine.

    Raises IllegalTransition for every (state, event) pair outside the
    7-member legal table, including everything out of VALIDATED (terminal)
    and every Feedback event (feedback never drives the state machine).
    """
    try:
        return TRANSITIONS[(current, event)]
    except KeyError:
        raise IllegalTransition(f"no transition for ({current.value}, {event.value})") from None


def fold_state(kinds: Iterable[EntryKind]) -> ValidationState:
    """Replay a thread's state from its entry kinds.

    Feedback entries are exploitation artifacts, not validation events, so
    they are skipped. Raises IllegalTransition if the sequence is not one
    the engine could have produced.
    """
    state = ValidationState.DECLARED
    for kind in kinds:
        if kind is EntryKind.FEEDBACK:
            continue
        state = next_state(state, kind)
    return state


# --------------------------------------------------------------------------
# Permission matrix
# --------------------------------------------------------------------------

#: Role that declares (and therefore revises) threads of each task kind.
DECLARING_ROLE: dict[TaskKind, Role] = {
    TaskKind.DECISION_PROBLEM_DEFINITION: Role.DECISION_MAKER,
    TaskKind.STAKE_DEFINITION: Role.WATCHER,
    TaskKind.ISP_TRANSLATION: Role.WATCHER,
    TaskKind.SOURCE_IDENTIFICATION: Role.WATCHER,
    TaskKind.INDICATOR_GENERATION: Role.WATCHER,
    TaskKind.DECISION_RECORD: Role.DECISION_MAKER,
}


def counterpart(role: Role) -> Role:
    """The opposite role."""
    return Role.WATCHER if role is Role.DECISION_MAKER else Role.DECISION_MAKER


def annotator_role(task: TaskKind) -> Role:
    """Role allowed to annotate threads of this task kind."""
    return counterpart(DECLARING_ROLE[task])


def validator_role(task: TaskKind) -> Role:
    """Role allowed to validate threads of this task kind.

    Counterpart of the declaring role, except decision records, which are
    closed by decision-maker authority.
    """
    if task is TaskKind.DECISION_RECORD:
        return Role.DECISION_MAKER
    return counterpart(DECLARING_ROLE[task])


def permitted(actor_role: Role, task: TaskKind, action: EntryKind, is_originator: bool = False) -> bool:
    """Pure predicate: may an actor of this role take this action?

    Rules: declaration requires the task's declaring role; revision is the
    originator's alone; annotation and validation go to the counterpart
    role and never to the originator (decision records accept any
    non-originator decision maker as validator); feedback is open to all.
    """
    if action is EntryKind.DECLARATION:
        return actor_role is DECLARING_ROLE[task]
    if action is EntryKind.REVISION:
        return is_originator and actor_role is DECLARING_ROLE[task]
    if action is EntryKind.ANNOTATION:
        return not is_originator and actor_role is annotator_role(task)
    if action is EntryKind.VALIDATION:
        return not is_originator and actor_role is validator_role(task)
    return True  # Feedback


# --------------------------------------------------------------------------
# Timestamps: UTC, millisecond precision
# --------------------------------------------------------------------------

def truncate_ms(ts: datetime) -> datetime:
    """Clamp a timezone-aware instant to UTC millisecond precision."""
    ts = ts.astimezone(timezone.utc)
    return ts.replace(microsecond=(ts.microsecond // 1000) * 1000)


def format_when(ts: datetime) -> str:
    """ISO 8601 UTC with exactly millisecond precision, e.g.
    ``2010-06-15T09:30:00.000Z``."""
    ts = truncate_ms(ts)
    return ts.strftime("%Y-%m-%dT%H:%M:%S.") + f"{ts.microsecond // 1000:03d}Z"


def parse_when(text: str) -> datetime:
    """Inverse of :func:`format_when`; accepts any ISO 8601 UTC instant."""
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    return truncate_ms(datetime.fromisoformat(text))
