"""Error hierarchy shared by the engine, repository, service and CLI.

Every error carries a stable machine-readable ``code`` so that HTTP
responses and CLI transcripts can surface the exact failure class without
string matching on messages.
"""

from __future__ import annotations


class EikcError(Exception):
    """Base class; ``code`` is stable across all surfaces."""

    code = "Error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


# --- protocol / permission -------------------------------------------------

class IllegalTransition(EikcError):
    code = "IllegalTransition"


class RoleNotPermitted(EikcError):
    code = "RoleNotPermitted"


class NotOriginator(EikcError):
    code = "NotOriginator"


class ThreadClosed(EikcError):
    code = "ThreadClosed"


class NotValidated(EikcError):
    code = "NotValidated"


# --- lookups ---------------------------------------------------------------

class UnknownProject(EikcError):
    code = "UnknownProject"


class UnknownThread(EikcError):
    code = "UnknownThread"


class UnknownEntry(EikcError):
    code = "UnknownEntry"


# --- input validation ------------------------------------------------------

class EmptyTitle(EikcError):
    code = "EmptyTitle"


class InvalidContent(EikcError):
    code = "InvalidContent"


class EmptyQuery(EikcError):
    code = "EmptyQuery"


class EmptyDescription(EikcError):
    code = "EmptyDescription"


class RatingOutOfRange(EikcError):
    code = "RatingOutOfRange"


# --- storage ---------------------------------------------------------------

class StorageFailure(EikcError):
    code = "StorageFailure"


class DuplicateEntryId(EikcError):
    code = "DuplicateEntryId"


class CorruptLog(EikcError):
    code = "CorruptLog"


class ProjectCollision(EikcError):
    code = "ProjectCollision"


# --- service / cli ---------------------------------------------------------

class BadRegistry(EikcError):
    code = "BadRegistry"


class PortInUse(EikcError):
    code = "PortInUse"


class ScriptParseError(EikcError):
    code = "ScriptParseError"


class UnknownActor(EikcError):
    code = "UnknownActor"
