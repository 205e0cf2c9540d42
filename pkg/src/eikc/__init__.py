"""EIKC: a collaborative knowledge-capitalization service.

Actors declare knowledge for decision-resolution tasks, counterpart
actors annotate, originators revise, and the loop closes with a recorded
concession. Every step lands in an append-only, replayable store and is
exploitable through exploration, conjunctive queries, thread views,
similar-case retrieval and capitalized feedback.
"""

from .engine import Engine, ScriptedClock, system_clock
from .exploitation import Exploitation, QuerySpec, ViewMode
from .model import (
    Actor,
    AggregatedKR,
    ConversionTag,
    EntryKind,
    KnowledgeContent,
    KnowledgeEntry,
    KnowledgeThread,
    Project,
    Role,
    TaskKind,
    ValidationState,
    next_state,
    permitted,
)
from .repository import Repository

__version__ = "0.1.0"

__all__ = [
    "Actor",
    "AggregatedKR",
    "ConversionTag",
    "Engine",
    "EntryKind",
    "Exploitation",
    "KnowledgeContent",
    "KnowledgeEntry",
    "KnowledgeThread",
    "Project",
    "QuerySpec",
    "Repository",
    "Role",
    "ScriptedClock",
    "TaskKind",
    "ValidationState",
    "ViewMode",
    "next_state",
    "permitted",
    "system_clock",
    "__version__",
]
