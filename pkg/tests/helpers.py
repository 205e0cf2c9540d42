"""Shared test machinery: random store generation and the independent
brute-force evaluators the implementation is checked against.

Everything here is deliberately written as straight-line scans over raw
entries so it stays independent of the production query/visualization
code paths.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from datetime import datetime, timezone

from eikc.engine import Engine
from eikc.exploitation import QuerySpec
from eikc.model import (
    Actor,
    EntryKind,
    KnowledgeContent,
    KnowledgeEntry,
    KnowledgeThread,
    Role,
    TaskKind,
    ValidationState,
)
from eikc.repository import Repository

from conftest import ACTORS, DM, DM2, WATCHER, WATCHER2, SteppingClock

VOCAB = [
    "automation", "production", "sales", "distribution", "market", "share",
    "risk", "stake", "churn", "fulfilment", "vendor", "integration", "cost",
    "pilot", "customer", "satisfaction", "benchmark", "competitor", "budget",
    "board", "decision", "indicator", "source", "journal", "report", "delay",
    "process", "order", "warehouse", "capacity", "environment", "internal",
    "external", "revenue", "quarter", "lagos", "refinery", "packaging",
]

DECLARING_ACTOR = {
    Role.DECISION_MAKER: (DM, DM2),
    Role.WATCHER: (WATCHER, WATCHER2),
}

TASK_DECLARER = {
    TaskKind.DECISION_PROBLEM_DEFINITION: Role.DECISION_MAKER,
    TaskKind.STAKE_DEFINITION: Role.WATCHER,
    TaskKind.ISP_TRANSLATION: Role.WATCHER,
    TaskKind.SOURCE_IDENTIFICATION: Role.WATCHER,
    TaskKind.INDICATOR_GENERATION: Role.WATCHER,
    TaskKind.DECISION_RECORD: Role.DECISION_MAKER,
}


def random_sentence(rng: random.Random, lo: int = 3, hi: int = 8) -> str:
    return " ".join(rng.choice(VOCAB) for _ in range(rng.randint(lo, hi)))


def random_content(rng: random.Random) -> KnowledgeContent:
    return KnowledgeContent(
        what=random_sentence(rng),
        why=random_sentence(rng, 0, 5) or "",
        how=random_sentence(rng, 0, 5) or "",
        result=random_sentence(rng, 2, 4) if rng.random() < 0.2 else None,
    )


def other_actor(rng: random.Random, role: Role, not_actor: str) -> Actor:
    candidates = [a for a in DECLARING_ACTOR[role] if a.actor_id != not_actor]
    return candidates[0] if candidates else rng.choice(DECLARING_ACTOR[role])


def counterpart_role(role: Role) -> Role:
    return Role.WATCHER if role is Role.DECISION_MAKER else Role.DECISION_MAKER


def validator_for(task: TaskKind) -> Role:
    if task is TaskKind.DECISION_RECORD:
        return Role.DECISION_MAKER
    return counterpart_role(TASK_DECLARER[task])


def populate_store(engine: Engine, clock: SteppingClock, rng: random.Random, n_entries: int) -> None:
    """Fill a store with valid activity until it holds about ``n_entries``
    entries across 1-3 projects, mixed thread shapes, years and feedback."""
    repo = engine.repository
    projects = []
    for i in range(rng.randint(1, 3)):
        clock.step(rng.randint(60, 3_000_000))
        projects.append(engine.open_project(f"Project {random_sentence(rng, 2, 3)}", "Test Org").project_id)

    entries_made = 0
    while entries_made < n_entries:
        clock.step(rng.randint(60, 3_000_000))
        project_id = rng.choice(projects)
        task = rng.choice(list(TaskKind))
        declarer_role = TASK_DECLARER[task]
        originator = rng.choice(DECLARING_ACTOR[declarer_role])
        thread_id = engine.declare(project_id, originator, task, random_content(rng))
        entries_made += 1

        rounds = rng.randint(0, 3)
        annotator = other_actor(rng, counterpart_role(declarer_role), originator.actor_id)
        for _ in range(rounds):
            if entries_made >= n_entries:
                break
            clock.step(rng.randint(60, 500_000))
            engine.annotate(thread_id, annotator, random_sentence(rng))
            entries_made += 1
            if entries_made >= n_entries:
                break
            clock.step(rng.randint(60, 500_000))
            engine.revise(thread_id, originator, random_content(rng))
            entries_made += 1

        thread, _ = repo.load_thread(thread_id)
        if thread.state is not ValidationState.UNDER_ANNOTATION and rng.random() < 0.6:
            validator = other_actor(rng, validator_for(task), originator.actor_id)
            clock.step(rng.randint(60, 500_000))
            engine.validate(thread_id, validator, random_sentence(rng, 2, 4))
            entries_made += 1

        if rng.random() < 0.25 and entries_made < n_entries:
            _, entries = repo.load_thread(thread_id)
            target = rng.choice(entries)
            clock.step(rng.randint(60, 500_000))
            from eikc.exploitation import Exploitation

            Exploitation(engine).record_feedback(
                rng.choice([DM, DM2, WATCHER, WATCHER2]),
                target.entry_id,
                rng.randint(1, 5),
                random_sentence(rng, 2, 5),
            )
            entries_made += 1


def random_query_spec(rng: random.Random, repo: Repository) -> QuerySpec:
    n_terms = rng.randint(1, 3)
    terms = []
    for _ in range(n_terms):
        pick = rng.random()
        if pick < 0.6:
            terms.append(rng.choice(VOCAB))
        elif pick < 0.8:
            word = rng.choice(VOCAB)
            terms.append(word[: rng.randint(2, max(2, len(word) - 1))])
        else:
            terms.append(rng.choice(["zzz", "quasar", "Automation", "SALES", " market "]))
    projects = [p.project_id for p in repo.list_projects()]
    years = repo.period_years()
    return QuerySpec.build(
        terms,
        project_id=rng.choice(projects) if projects and rng.random() < 0.3 else None,
        task_kind=rng.choice(list(TaskKind)) if rng.random() < 0.3 else None,
        year=rng.choice(years) if years and rng.random() < 0.3 else None,
        validated_only=rng.random() < 0.3,
    )


# --- independent evaluators -------------------------------------------------

def brute_force_query(repo: Repository, spec: QuerySpec) -> set[str]:
    """Naive full scan, written against raw entries only."""
    threads: dict[str, KnowledgeThread] = {t.thread_id: t for t in repo.list_threads()}
    matched = set()
    for entry in repo.list_entries():
        thread = threads[entry.thread_id]
        if spec.project_id is not None and entry.project_id != spec.project_id:
            continue
        if spec.year is not None and entry.when.year != spec.year:
            continue
        if spec.task_kind is not None and thread.task_kind != spec.task_kind:
            continue
        if spec.validated_only and thread.state != ValidationState.VALIDATED:
            continue
        haystack = entry.content.what + "\n" + entry.content.why + "\n" + entry.content.how
        if entry.content.result is not None:
            haystack = haystack + "\n" + entry.content.result
        haystack = haystack.casefold()
        ok = True
        for term in spec.terms:
            if term not in haystack:
                ok = False
                break
        if ok:
            matched.add(entry.entry_id)
    return matched


def brute_force_similarity(repo: Repository, description: str) -> dict[str, float]:
    """Token-overlap scores recomputed from scratch for every thread."""
    import re

    def toks(text: str) -> set[str]:
        return set(re.findall(r"[a-z0-9]+", text.lower()))

    wanted = toks(description)
    scores: dict[str, float] = {}
    for thread in repo.list_threads():
        text_parts = []
        for entry_id in thread.entry_ids:
            entry = repo.entry(entry_id)
            text_parts.extend([entry.content.what, entry.content.why, entry.content.how])
            if entry.content.result is not None:
                text_parts.append(entry.content.result)
        overlap = wanted & toks(" ".join(text_parts))
        if thread.entry_ids and wanted:
            score = len(overlap) / len(wanted)
            if score > 0:
                scores[thread.thread_id] = score
    return scores
