"""Append-only, replayable store of knowledge records.

The persistent form is a single UTF-8 log file, one JSON object per line.
Each line carries a checksum over its canonical payload; a torn trailing
record is detected on open and dropped with a warning, any earlier
corruption fails the open. Replaying the log from an empty state always
reproduces the live state, including every thread's validation state and
the period index.

The store fingerprint is a SHA-256 digest streamed over the canonical
payloads in log order. It is maintained incrementally on append and
rebuilt identically by replay, so equality of fingerprints attests
equality of state.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, Optional

from filelock import FileLock, Timeout

from .errors import (
    CorruptLog,
    DuplicateEntryId,
    IllegalTransition,
    ProjectCollision,
    StorageFailure,
    UnknownEntry,
    UnknownProject,
    UnknownThread,
)
from .model import (
    CONVERSION_TAGS,
    ConversionTag,
    EntryKind,
    KnowledgeContent,
    KnowledgeEntry,
    KnowledgeThread,
    Project,
    Role,
    TaskKind,
    ValidationState,
    fold_state,
    format_when,
    next_state,
    parse_when,
)

log = logging.getLogger(__name__)

LOG_FILENAME = "events.log"
LOCK_FILENAME = "store.lock"
EXPORT_FORMAT_VERSION = 1

RECORD_TYPE_PROJECT = "project"
RECORD_TYPE_THREAD = "thread"
RECORD_TYPE_ENTRY = "entry"


@dataclass(frozen=True)
class LogRecord:
    """One log line. Which optional fields are present depends on
    ``record_type``; absent fields are omitted from the serialized line.

    Project records reuse ``content`` for their descriptive text:
    ``what`` holds the title and ``why`` the organization.
    """

    record_type: str
    project_id: str
    when: datetime
    seq: Optional[int] = None
    thread_id: Optional[str] = None
    entry_id: Optional[str] = None
    kind: Optional[EntryKind] = None
    task_kind: Optional[TaskKind] = None
    who: Optional[str] = None
    role: Optional[Role] = None
    content: Optional[KnowledgeContent] = None
    parent_id: Optional[str] = None
    conversion_tag: Optional[ConversionTag] = None

    def payload(self) -> dict:
        """Record fields in wire order, without the checksum."""
        out: dict = {"record_type": self.record_type}
        if self.seq is not None:
            out["seq"] = self.seq
        out["project_id"] = self.project_id
        if self.thread_id is not None:
            out["thread_id"] = self.thread_id
        if self.entry_id is not None:
            out["entry_id"] = self.entry_id
        if self.kind is not None:
            out["kind"] = self.kind.value
        if self.task_kind is not None:
            out["task_kind"] = self.task_kind.value
        if self.who is not None:
            out["who"] = self.who
        if self.role is not None:
            out["role"] = self.role.value
        if self.content is not None:
            content: dict = {"what": self.content.what, "why": self.content.why, "how": self.content.how}
            if self.content.result is not None:
                content["result"] = self.content.result
            out["content"] = content
        out["when"] = format_when(self.when)
        if self.parent_id is not None:
            out["parent_id"] = self.parent_id
        if self.conversion_tag is not None:
            out["conversion_tag"] = self.conversion_tag.value
        return out

    def canonical(self) -> str:
        """Canonical payload serialization; checksum and fingerprint input."""
        return json.dumps(self.payload(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)

    def checksum(self) -> str:
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()[:16]

    def to_line(self) -> str:
        return json.dumps(
            {"checksum": self.checksum(), **self.payload()},
            separators=(",", ":"),
            ensure_ascii=False,
        )

    @classmethod
    def from_line(cls, line: str) -> "LogRecord":
        """Parse and checksum-verify one line. Raises ValueError on any
        malformed input; the caller decides between torn-drop and
        CorruptLog."""
        obj = json.loads(line)
        if not isinstance(obj, dict):
            raise ValueError("record is not an object")
        stored_sum = obj.pop("checksum", None)
        content = None
        if "content" in obj:
            c = obj["content"]
            content = KnowledgeContent(
                what=c["what"], why=c.get("why", ""), how=c.get("how", ""), result=c.get("result")
            )
        record = cls(
            record_type=obj["record_type"],
            project_id=obj["project_id"],
            when=parse_when(obj["when"]),
            seq=obj.get("seq"),
            thread_id=obj.get("thread_id"),
            entry_id=obj.get("entry_id"),
            kind=EntryKind(obj["kind"]) if "kind" in obj else None,
            task_kind=TaskKind(obj["task_kind"]) if "task_kind" in obj else None,
            who=obj.get("who"),
            role=Role(obj["role"]) if "role" in obj else None,
            content=content,
            parent_id=obj.get("parent_id"),
            conversion_tag=ConversionTag(obj["conversion_tag"]) if "conversion_tag" in obj else None,
        )
        if record.record_type not in (RECORD_TYPE_PROJECT, RECORD_TYPE_THREAD, RECORD_TYPE_ENTRY):
            raise ValueError(f"unknown record_type {record.record_type!r}")
        if stored_sum != record.checksum():
            raise ValueError("checksum mismatch")
        return record


def project_record(project: Project) -> LogRecord:
    return LogRecord(
        record_type=RECORD_TYPE_PROJECT,
        project_id=project.project_id,
        when=project.created_at,
        content=KnowledgeContent(what=project.title, why=project.organization),
    )


def thread_record(
    project_id: str, thread_id: str, task_kind: TaskKind, who: str, role: Role, when: datetime
) -> LogRecord:
    return LogRecord(
        record_type=RECORD_TYPE_THREAD,
        project_id=project_id,
        thread_id=thread_id,
        task_kind=task_kind,
        who=who,
        role=role,
        when=when,
    )


def entry_record(entry: KnowledgeEntry, role: Role) -> LogRecord:
    return LogRecord(
        record_type=RECORD_TYPE_ENTRY,
        project_id=entry.project_id,
        seq=entry.seq,
        thread_id=entry.thread_id,
        entry_id=entry.entry_id,
        kind=entry.kind,
        who=entry.who,
        role=role,
        content=entry.content,
        when=entry.when,
        parent_id=entry.parent_id,
        conversion_tag=entry.conversion_tag,
    )


class StoreState:
    """In-memory state derived from a record sequence.

    Holds projects, threads, entries, the per-project sequence counters,
    the creation-year period index and the running fingerprint. Mutated
    only by :meth:`apply`, which validates each record against everything
    applied before it.
    """

    def __init__(self) -> None:
        self.projects: dict[str, Project] = {}
        self.threads: dict[str, KnowledgeThread] = {}
        self.entries: dict[str, KnowledgeEntry] = {}
        self.project_threads: dict[str, list[str]] = {}
        self.entry_count: dict[str, int] = {}
        self.entry_order: list[str] = []
        self.period_index: dict[int, list[str]] = {}
        self.last_when: dict[str, datetime] = {}
        self.records: list[LogRecord] = []
        self._hasher = hashlib.sha256()

    def state_fingerprint(self) -> str:
        """Stable 256-bit digest of the canonical record stream."""
        return self._hasher.hexdigest()

    def next_seq(self, project_id: str) -> int:
        return self.entry_count.get(project_id, 0) + 1

    def apply(self, record: LogRecord) -> Optional[int]:
        """Validate ``record`` against the current state and apply it.

        Returns the entry seq for entry records, None otherwise. Raises
        the precise error class for the violation; callers replaying a
        persisted log wrap failures as CorruptLog.
        """
        if record.record_type == RECORD_TYPE_PROJECT:
            self._apply_project(record)
        elif record.record_type == RECORD_TYPE_THREAD:
            self._apply_thread(record)
        else:
            self._apply_entry(record)
        self.records.append(record)
        self.last_when[record.project_id] = record.when
        self._hasher.update(record.canonical().encode("utf-8"))
        self._hasher.update(b"\n")
        return record.seq

    def _apply_project(self, record: LogRecord) -> None:
        if record.project_id in self.projects:
            raise ProjectCollision(f"project {record.project_id} already exists")
        if record.content is None:
            raise CorruptLog("project record without content")
        self.projects[record.project_id] = Project(
            project_id=record.project_id,
            title=record.content.what,
            organization=record.content.why,
            created_at=record.when,
        )
        self.project_threads[record.project_id] = []
        self.entry_count[record.project_id] = 0

    def _apply_thread(self, record: LogRecord) -> None:
        if record.project_id not in self.projects:
            raise UnknownProject(f"thread references unknown project {record.project_id}")
        if record.thread_id is None or record.task_kind is None or record.who is None:
            raise CorruptLog("thread record missing fields")
        if record.thread_id in self.threads:
            raise CorruptLog(f"thread {record.thread_id} already exists")
        self.threads[record.thread_id] = KnowledgeThread(
            thread_id=record.thread_id,
            project_id=record.project_id,
            task_kind=record.task_kind,
            originator=record.who,
            state=ValidationState.DECLARED,
            created_at=record.when,
        )
        self.project_threads[record.project_id].append(record.thread_id)

    def _apply_entry(self, record: LogRecord) -> None:
        if record.project_id not in self.projects:
            raise UnknownProject(f"entry references unknown project {record.project_id}")
        thread = self.threads.get(record.thread_id or "")
        if thread is None:
            raise UnknownThread(f"entry references unknown thread {record.thread_id}")
        if (
            record.entry_id is None
            or record.seq is None
            or record.kind is None
            or record.who is None
            or record.content is None
            or record.conversion_tag is None
        ):
            raise CorruptLog("entry record missing fields")
        if record.entry_id in self.entries:
            raise DuplicateEntryId(f"entry id {record.entry_id} already used")
        expected = self.next_seq(record.project_id)
        if record.seq != expected:
            raise CorruptLog(f"seq {record.seq} breaks gapless order (expected {expected})")
        if record.conversion_tag is not CONVERSION_TAGS[record.kind]:
            raise CorruptLog(f"{record.kind.value} entry carries tag {record.conversion_tag.value}")
        if (record.parent_id is None) != (record.kind is EntryKind.DECLARATION):
            raise CorruptLog("parent_id must be absent exactly for declarations")
        if record.parent_id is not None:
            parent = self.entries.get(record.parent_id)
            if parent is None or parent.thread_id != record.thread_id:
                raise UnknownEntry(f"parent entry {record.parent_id} not in thread")
        if record.kind is EntryKind.DECLARATION and thread.entry_ids:
            raise CorruptLog("declaration must be the first entry of its thread")
        if record.kind is not EntryKind.FEEDBACK:
            thread.state = next_state(thread.state, record.kind)

        entry = KnowledgeEntry(
            entry_id=record.entry_id,
            project_id=record.project_id,
            thread_id=record.thread_id,  # type: ignore[arg-type]
            seq=record.seq,
            kind=record.kind,
            who=record.who,
            content=record.content,
            when=record.when,
            parent_id=record.parent_id,
            conversion_tag=record.conversion_tag,
        )
        self.entries[entry.entry_id] = entry
        self.entry_count[record.project_id] = record.seq
        self.entry_order.append(entry.entry_id)
        thread.entry_ids.append(entry.entry_id)
        self.period_index.setdefault(entry.when.year, []).append(entry.entry_id)


def replay_records(records: Iterable[LogRecord]) -> StoreState:
    """Build a state from records, wrapping any violation as CorruptLog."""
    state = StoreState()
    for record in records:
        try:
            state.apply(record)
        except CorruptLog:
            raise
        except (IllegalTransition, DuplicateEntryId, UnknownProject, UnknownThread, UnknownEntry, ProjectCollision) as exc:
            raise CorruptLog(str(exc)) from exc
    return state


def parse_export(text: str) -> list[LogRecord]:
    """Parse export-format text: a format_version header line followed by
    record lines. Raises CorruptLog on any malformed content."""
    lines = text.splitlines()
    if not lines:
        raise CorruptLog("empty export: missing header")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise CorruptLog(f"bad export header: {exc}") from exc
    if not isinstance(header, dict) or header.get("format_version") != EXPORT_FORMAT_VERSION:
        raise CorruptLog(f"unsupported export header: {lines[0]!r}")
    records = []
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            records.append(LogRecord.from_line(line))
        except (ValueError, KeyError, TypeError) as exc:
            raise CorruptLog(f"line {i}: {exc}") from exc
    return records


def replay_export(text: str) -> StoreState:
    """Replay export-format text into a fresh in-memory state."""
    return replay_records(parse_export(text))


class Repository:
    """A durable store bound to a directory.

    One writer per store: opening read-write takes an advisory file lock
    and fails with StorageFailure if another holder exists. All public
    methods serialize on an internal lock, so appends are linearizable and
    reads see prefix-consistent snapshots.
    """

    def __init__(self, data_dir: str | Path, read_only: bool = False):
        self.data_dir = Path(data_dir)
        self.read_only = read_only
        self.lock = threading.RLock()
        self._flock: Optional[FileLock] = None
        self._fh = None

        self.data_dir.mkdir(parents=True, exist_ok=True)
        if not read_only:
            self._flock = FileLock(str(self.data_dir / LOCK_FILENAME))
            try:
                self._flock.acquire(timeout=1.0)
            except Timeout:
                raise StorageFailure(f"store {self.data_dir} is locked by another writer") from None
        try:
            self._state = self._replay_file()
            if not read_only:
                self._fh = open(self.log_path, "a", encoding="utf-8")
        except BaseException:
            self._release_flock()
            raise

    # -- lifecycle ----------------------------------------------------------

    @property
    def log_path(self) -> Path:
        return self.data_dir / LOG_FILENAME

    def _release_flock(self) -> None:
        if self._flock is not None:
            self._flock.release()
            self._flock = None

    def close(self) -> None:
        with self.lock:
            if self._fh is not None:
                self._fh.close()
                self._fh = None
            self._release_flock()

    def __enter__(self) -> "Repository":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _replay_file(self) -> StoreState:
        state = StoreState()
        if not self.log_path.exists():
            return state
        raw = self.log_path.read_bytes()
        lines = raw.decode("utf-8").splitlines()
        good_bytes = 0
        for i, line in enumerate(lines):
            if not line.strip():
                continue
            last = i == len(lines) - 1
            try:
                record = LogRecord.from_line(line)
            except (ValueError, KeyError, TypeError) as exc:
                if last:
                    log.warning("dropping torn trailing record in %s: %s", self.log_path, exc)
                    if not self.read_only:
                        self._truncate(good_bytes)
                    return state
                raise CorruptLog(f"{self.log_path} line {i + 1}: {exc}") from exc
            try:
                state.apply(record)
            except CorruptLog:
                raise
            except (
                IllegalTransition,
                DuplicateEntryId,
                UnknownProject,
                UnknownThread,
                UnknownEntry,
                ProjectCollision,
            ) as exc:
                raise CorruptLog(f"{self.log_path} line {i + 1}: {exc}") from exc
            good_bytes += len(line.encode("utf-8")) + 1
        return state

    def _truncate(self, size: int) -> None:
        with open(self.log_path, "r+b") as fh:
            fh.truncate(size)

    # -- writes ---------------------------------------------------------------

    def append(self, record: LogRecord) -> Optional[int]:
        """Validate, persist and index one record; returns the assigned
        seq for entry records. Never rewrites existing bytes."""
        with self.lock:
            if self.read_only or self._fh is None:
                raise StorageFailure("repository opened read-only")
            seq = self._state.apply(record)
            try:
                self._fh.write(record.to_line() + "\n")
                self._fh.flush()
            except OSError as exc:  # pragma: no cover - disk failure path
                raise StorageFailure(f"append failed: {exc}") from exc
            return seq

    # -- reads ----------------------------------------------------------------

    def state_fingerprint(self) -> str:
        with self.lock:
            return self._state.state_fingerprint()

    def project(self, project_id: str) -> Project:
        with self.lock:
            try:
                return self._state.projects[project_id]
            except KeyError:
                raise UnknownProject(f"unknown project {project_id}") from None

    def has_project(self, project_id: str) -> bool:
        with self.lock:
            return project_id in self._state.projects

    def list_projects(self) -> list[Project]:
        with self.lock:
            return list(self._state.projects.values())

    def list_threads(self, project_id: Optional[str] = None) -> list[KnowledgeThread]:
        with self.lock:
            if project_id is not None:
                if project_id not in self._state.projects:
                    raise UnknownProject(f"unknown project {project_id}")
                ids = self._state.project_threads[project_id]
            else:
                ids = list(self._state.threads)
            return [self._thread_snapshot(t) for t in ids]

    def _thread_snapshot(self, thread_id: str) -> KnowledgeThread:
        t = self._state.threads[thread_id]
        return KnowledgeThread(
            thread_id=t.thread_id,
            project_id=t.project_id,
            task_kind=t.task_kind,
            originator=t.originator,
            state=t.state,
            created_at=t.created_at,
            entry_ids=list(t.entry_ids),
        )

    def load_thread(self, thread_id: str) -> tuple[KnowledgeThread, list[KnowledgeEntry]]:
        """Thread snapshot plus its entries in seq order. The state is
        recomputed from the entry kinds and must match the stored one."""
        with self.lock:
            if thread_id not in self._state.threads:
                raise UnknownThread(f"unknown thread {thread_id}")
            thread = self._thread_snapshot(thread_id)
            entries = [self._state.entries[e] for e in thread.entry_ids]
            recomputed = fold_state(e.kind for e in entries)
            if recomputed is not thread.state:
                raise CorruptLog(
                    f"thread {thread_id}: stored state {thread.state.value} != replayed {recomputed.value}"
                )
            return thread, entries

    def entry(self, entry_id: str) -> KnowledgeEntry:
        with self.lock:
            try:
                return self._state.entries[entry_id]
            except KeyError:
                raise UnknownEntry(f"unknown entry {entry_id}") from None

    def has_entry(self, entry_id: str) -> bool:
        with self.lock:
            return entry_id in self._state.entries

    def list_entries(self) -> list[KnowledgeEntry]:
        """All entries in log order."""
        with self.lock:
            return [self._state.entries[e] for e in self._state.entry_order]

    def list_by_period(self, year: int) -> list[str]:
        """Entry ids whose ``when`` falls in the given UTC year, seq order."""
        with self.lock:
            return list(self._state.period_index.get(year, []))

    def period_years(self) -> list[int]:
        with self.lock:
            return sorted(self._state.period_index)

    def next_seq(self, project_id: str) -> int:
        with self.lock:
            if project_id not in self._state.projects:
                raise UnknownProject(f"unknown project {project_id}")
            return self._state.next_seq(project_id)

    def last_when(self, project_id: str) -> Optional[datetime]:
        """Timestamp of the newest record of a project, if any."""
        with self.lock:
            return self._state.last_when.get(project_id)

    def stats(self) -> dict:
        with self.lock:
            return {
                "projects": len(self._state.projects),
                "threads": len(self._state.threads),
                "entries": len(self._state.entries),
            }

    # -- id allocation ----------------------------------------------------------

    def new_project_id(self) -> str:
        with self.lock:
            n = len(self._state.projects) + 1
            while f"p{n:04d}" in self._state.projects:
                n += 1
            return f"p{n:04d}"

    def new_thread_id(self, project_id: str) -> str:
        with self.lock:
            n = len(self._state.project_threads.get(project_id, [])) + 1
            while f"{project_id}-t{n:03d}" in self._state.threads:
                n += 1
            return f"{project_id}-t{n:03d}"

    def new_entry_id(self, project_id: str) -> str:
        with self.lock:
            n = self._state.next_seq(project_id)
            while f"{project_id}-e{n:05d}" in self._state.entries:
                n += 1
            return f"{project_id}-e{n:05d}"

    # -- export / import -------------------------------------------------------

    def export(self, project_id: Optional[str] = None) -> str:
        """Portable log: header line plus record lines in log order."""
        with self.lock:
            if project_id is not None and project_id not in self._state.projects:
                raise UnknownProject(f"unknown project {project_id}")
            header = json.dumps({"format_version": EXPORT_FORMAT_VERSION}, separators=(",", ":"))
            lines = [header]
            for record in self._state.records:
                if project_id is None or record.project_id == project_id:
                    lines.append(record.to_line())
            return "\n".join(lines) + "\n"

    def import_log(self, text: str) -> dict:
        """Merge a portable log into this store.

        The imported projects must be disjoint from the existing ones;
        the imported records are validated as a self-contained log before
        anything is written. Returns counts of what was imported.
        """
        with self.lock:
            records = parse_export(text)
            incoming_projects = {r.project_id for r in records if r.record_type == RECORD_TYPE_PROJECT}
            referenced = {r.project_id for r in records}
            for pid in sorted(referenced):
                if pid in self._state.projects:
                    raise ProjectCollision(f"project {pid} already present in store")
            if referenced - incoming_projects:
                missing = sorted(referenced - incoming_projects)[0]
                raise CorruptLog(f"import references project {missing} it does not create")
            scratch = replay_records(records)
            for entry_id in scratch.entries:
                if entry_id in self._state.entries:
                    raise DuplicateEntryId(f"entry id {entry_id} already in store")
            for record in records:
                self.append(record)
            return {
                "projects": len(scratch.projects),
                "threads": len(scratch.threads),
                "entries": len(scratch.entries),
            }
