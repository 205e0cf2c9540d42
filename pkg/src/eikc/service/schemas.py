"""Request/response models of the HTTP surface.

Thin, lossless mirrors of the core types: the adapter layer converts and
never decides. Timestamps travel as ISO 8601 UTC millisecond strings,
enums as their wire names.
"""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field

from ..exploitation import Cluster, QueryHit, ResultSet, SimilarCase, ThreadView, ViewItem
from ..model import (
    Actor,
    KnowledgeContent,
    KnowledgeEntry,
    KnowledgeThread,
    Project,
    format_when,
)


class ContentModel(BaseModel):
    what: str = Field(min_length=1)
    why: str = ""
    how: str = ""
    result: Optional[str] = None

    def to_content(self) -> KnowledgeContent:
        return KnowledgeContent(what=self.what, why=self.why, how=self.how, result=self.result)

    @classmethod
    def from_content(cls, content: KnowledgeContent) -> "ContentModel":
        return cls(what=content.what, why=content.why, how=content.how, result=content.result)


class ProjectCreate(BaseModel):
    title: str
    organization: str = ""


class DeclareRequest(BaseModel):
    task_kind: str
    content: ContentModel


class AnnotateRequest(BaseModel):
    text: str = Field(min_length=1)


class ReviseRequest(BaseModel):
    content: ContentModel


class ValidateRequest(BaseModel):
    remark: str = Field(min_length=1)


class FeedbackRequest(BaseModel):
    rating: int
    comment: str = Field(min_length=1)


class ActorOut(BaseModel):
    actor_id: str
    display_name: str
    role: str
    token: str

    @classmethod
    def from_actor(cls, actor: Actor, token: str) -> "ActorOut":
        return cls(actor_id=actor.actor_id, display_name=actor.display_name, role=actor.role.value, token=token)


class ProjectOut(BaseModel):
    project_id: str
    title: str
    organization: str
    created_at: str

    @classmethod
    def from_project(cls, project: Project) -> "ProjectOut":
        return cls(
            project_id=project.project_id,
            title=project.title,
            organization=project.organization,
            created_at=format_when(project.created_at),
        )


class EntryOut(BaseModel):
    entry_id: str
    thread_id: str
    project_id: str
    seq: int
    kind: str
    who: str
    who_display: str
    when: str
    parent_id: Optional[str]
    conversion_tag: str
    content: ContentModel

    @classmethod
    def from_entry(cls, entry: KnowledgeEntry, display: str) -> "EntryOut":
        return cls(
            entry_id=entry.entry_id,
            thread_id=entry.thread_id,
            project_id=entry.project_id,
            seq=entry.seq,
            kind=entry.kind.value,
            who=entry.who,
            who_display=display,
            when=format_when(entry.when),
            parent_id=entry.parent_id,
            conversion_tag=entry.conversion_tag.value,
            content=ContentModel.from_content(entry.content),
        )


class ThreadOut(BaseModel):
    thread_id: str
    project_id: str
    task_kind: str
    originator: str
    state: str
    version: int
    entry_ids: list[str]

    @classmethod
    def from_thread(cls, thread: KnowledgeThread) -> "ThreadOut":
        return cls(
            thread_id=thread.thread_id,
            project_id=thread.project_id,
            task_kind=thread.task_kind.value,
            originator=thread.originator,
            state=thread.state.value,
            version=len(thread.entry_ids),
            entry_ids=list(thread.entry_ids),
        )


class ViewItemOut(BaseModel):
    entry_id: str
    kind: str
    who: str
    who_display: str
    when: str
    content: ContentModel

    @classmethod
    def from_item(cls, item: ViewItem, display: str) -> "ViewItemOut":
        return cls(
            entry_id=item.entry_id,
            kind=item.kind.value,
            who=item.who,
            who_display=display,
            when=format_when(item.when),
            content=ContentModel.from_content(item.content),
        )


class ThreadViewOut(BaseModel):
    thread_id: str
    project_id: str
    task_kind: str
    originator: str
    mode: str
    state: str
    version: int
    items: list[ViewItemOut]

    @classmethod
    def from_view(cls, view: ThreadView, thread: KnowledgeThread, names: dict[str, str]) -> "ThreadViewOut":
        return cls(
            thread_id=view.thread_id,
            project_id=thread.project_id,
            task_kind=thread.task_kind.value,
            originator=thread.originator,
            mode=view.mode.value,
            state=view.state.value,
            version=len(thread.entry_ids),
            items=[ViewItemOut.from_item(i, names.get(i.who, i.who)) for i in view.items],
        )


class ClusterOut(BaseModel):
    key: str
    thread_ids: list[str]
    size: int

    @classmethod
    def from_cluster(cls, cluster: Cluster) -> "ClusterOut":
        return cls(key=cluster.key, thread_ids=list(cluster.thread_ids), size=len(cluster.thread_ids))


class ExploreOut(BaseModel):
    axis: str
    clusters: list[ClusterOut]


class QueryHitOut(BaseModel):
    entry_id: str
    thread_id: str
    snippet: str
    score: int

    @classmethod
    def from_hit(cls, hit: QueryHit) -> "QueryHitOut":
        return cls(entry_id=hit.entry_id, thread_id=hit.thread_id, snippet=hit.snippet, score=hit.score)


class QueryOut(BaseModel):
    terms: list[str]
    hits: list[QueryHitOut]
    executed_at: str

    @classmethod
    def from_result(cls, result: ResultSet) -> "QueryOut":
        return cls(
            terms=list(result.query.terms),
            hits=[QueryHitOut.from_hit(h) for h in result.hits],
            executed_at=format_when(result.executed_at),
        )


class SimilarCaseOut(BaseModel):
    thread_id: str
    score: float
    task_kind: str
    state: str
    last_when: str

    @classmethod
    def from_case(cls, case: SimilarCase) -> "SimilarCaseOut":
        return cls(
            thread_id=case.thread_id,
            score=case.score,
            task_kind=case.task_kind.value,
            state=case.state.value,
            last_when=format_when(case.last_when),
        )


class SimilarOut(BaseModel):
    cases: list[SimilarCaseOut]


class DeclareOut(BaseModel):
    thread: ThreadOut
    entry: EntryOut


class EntryCreatedOut(BaseModel):
    entry_id: str
    thread_id: str
    state: str
    version: int


class ImportOut(BaseModel):
    projects: int
    threads: int
    entries: int


class HealthOut(BaseModel):
    status: str
    projects: int
    threads: int
    entries: int
    fingerprint: str


class ErrorBody(BaseModel):
    code: str
    message: str


class ErrorOut(BaseModel):
    error: ErrorBody
