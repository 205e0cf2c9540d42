from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest

from eikc.engine import Engine, ScriptedClock
from eikc.model import Actor, Role
from eikc.repository import Repository

EPOCH = datetime(2010, 1, 1, tzinfo=timezone.utc)

DM = Actor("dm1", "Board Chair", Role.DECISION_MAKER)
DM2 = Actor("dm2", "Operations Director", Role.DECISION_MAKER)
WATCHER = Actor("w1", "Product Researcher", Role.WATCHER)
WATCHER2 = Actor("w2", "Market Analyst", Role.WATCHER)

ACTORS = {a.actor_id: a for a in (DM, DM2, WATCHER, WATCHER2)}


class SteppingClock:
    """Manually advanced clock for tests that need controlled timestamps."""

    def __init__(self, start: datetime = EPOCH):
        self.current = start

    def __call__(self) -> datetime:
        return self.current

    def step(self, seconds: float) -> None:
        self.current = self.current + timedelta(seconds=seconds)


@pytest.fixture
def repo(tmp_path):
    with Repository(tmp_path / "store") as repository:
        yield repository


@pytest.fixture
def clock():
    return SteppingClock()


@pytest.fixture
def engine(repo, clock):
    return Engine(repo, clock=clock)


@pytest.fixture
def scripted_engine(repo):
    return Engine(repo, clock=ScriptedClock(EPOCH))
