"""Scripted scenario replay: the test vehicle for whole capitalization
runs.

A scenario file is line-oriented text, one action per line, ``#`` starts
a comment. Each line is a verb followed by ``key=value`` arguments
(shell-style quoting). ``actor`` and ``project`` lines set up the roster
and workspace; the remaining verbs map 1:1 to engine and exploitation
operations. An action may carry ``expect=<ErrorCode>`` to assert that it
fails exactly that way.

Example::

    actor dm role=DecisionMaker name="Board Chair"
    actor w1 role=Watcher name="Product Researcher"
    project id=auto title="Automation drive" org="Sunseed Oil"
    declare id=dp as=dm project=auto task=DecisionProblemDefinition what="..."
    annotate as=w1 thread=dp text="scope unclear"
    revise as=dm thread=dp what="..." why="..."
    validate as=w1 thread=dp remark="agreed"
    annotate as=w1 thread=dp text="late" expect=ThreadClosed

Symbols bound by ``id=`` refer to the produced thread (``declare``) or
entry (other verbs); ``declare`` binds its symbol to both the new thread
and its declaration entry, so feedback can target declarations.
"""

from __future__ import annotations

import shlex
from dataclasses import dataclass, field
from typing import Optional

from .engine import Engine
from .errors import EikcError, ScriptParseError
from .exploitation import Exploitation, QuerySpec, ViewMode
from .model import Actor, KnowledgeContent, Role, TaskKind

ACTION_VERBS = ("project", "declare", "annotate", "revise", "validate", "feedback", "query", "visualize")

_VERB_KEYS: dict[str, tuple[set[str], set[str]]] = {
    # verb: (required keys, optional keys)
    "actor": ({"id", "role"}, {"name"}),
    "project": ({"id", "title"}, {"org"}),
    "declare": ({"id", "as", "project", "task", "what"}, {"why", "how", "result"}),
    "annotate": ({"as", "thread", "text"}, {"id", "expect"}),
    "revise": ({"as", "thread", "what"}, {"id", "why", "how", "result", "expect"}),
    "validate": ({"as", "thread", "remark"}, {"id", "expect"}),
    "feedback": ({"as", "entry", "rating", "comment"}, {"id", "expect"}),
    "query": ({"terms"}, {"project", "task", "year", "validated-only", "expect"}),
    "visualize": ({"thread", "mode"}, {"expect"}),
}
# declare/annotate/... may also assert errors
_VERB_KEYS["declare"] = (_VERB_KEYS["declare"][0], _VERB_KEYS["declare"][1] | {"expect"})
_VERB_KEYS["project"] = (_VERB_KEYS["project"][0], _VERB_KEYS["project"][1] | {"expect"})


@dataclass(frozen=True)
class Action:
    line_no: int
    verb: str
    args: dict[str, str]
    expect: Optional[str] = None


@dataclass
class ScenarioScript:
    actors: dict[str, Actor] = field(default_factory=dict)
    actions: list[Action] = field(default_factory=list)


@dataclass
class Transcript:
    lines: list[str] = field(default_factory=list)
    ok: bool = True
    fingerprint: str = ""

    def text(self) -> str:
        return "\n".join(self.lines + [f"fingerprint {self.fingerprint}"]) + "\n"


def parse_script(text: str) -> ScenarioScript:
    """Parse and statically validate a scenario script."""
    script = ScenarioScript()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            tokens = shlex.split(stripped, comments=True)
        except ValueError as exc:
            raise ScriptParseError(f"line {line_no}: {exc}") from exc
        if not tokens:
            continue
        verb, *rest = tokens
        if verb not in _VERB_KEYS:
            raise ScriptParseError(f"line {line_no}: unknown verb {verb!r}")
        args = {}
        for token in rest:
            if "=" not in token:
                raise ScriptParseError(f"line {line_no}: expected key=value, got {token!r}")
            key, value = token.split("=", 1)
            if key in args:
                raise ScriptParseError(f"line {line_no}: duplicate key {key!r}")
            args[key] = value
        required, optional = _VERB_KEYS[verb]
        missing = required - set(args)
        unknown = set(args) - required - optional
        if missing:
            raise ScriptParseError(f"line {line_no}: {verb} missing {sorted(missing)}")
        if unknown:
            raise ScriptParseError(f"line {line_no}: {verb} got unknown keys {sorted(unknown)}")

        if verb == "actor":
            try:
                role = Role(args["role"])
            except ValueError:
                raise ScriptParseError(f"line {line_no}: unknown role {args['role']!r}") from None
            actor_id = args["id"]
            if actor_id in script.actors:
                raise ScriptParseError(f"line {line_no}: actor {actor_id!r} already declared")
            script.actors[actor_id] = Actor(
                actor_id=actor_id, display_name=args.get("name", actor_id), role=role
            )
            continue

        if "as" in args and args["as"] not in script.actors:
            raise ScriptParseError(f"line {line_no}: undeclared actor {args['as']!r}")
        if verb == "declare":
            try:
                TaskKind(args["task"])
            except ValueError:
                raise ScriptParseError(f"line {line_no}: unknown task {args['task']!r}") from None
        if verb == "visualize" and args["mode"] not in [m.value for m in ViewMode]:
            raise ScriptParseError(f"line {line_no}: unknown mode {args['mode']!r}")
        if verb == "feedback":
            try:
                int(args["rating"])
            except ValueError:
                raise ScriptParseError(f"line {line_no}: rating must be an integer") from None

        expect = args.pop("expect", None)
        script.actions.append(Action(line_no=line_no, verb=verb, args=args, expect=expect))
    return script


class ScenarioRunner:
    """Executes a parsed script strictly in order against one engine."""

    def __init__(self, engine: Engine, exploitation: Optional[Exploitation] = None):
        self.engine = engine
        self.exploitation = exploitation or Exploitation(engine)
        self.projects: dict[str, str] = {}
        self.threads: dict[str, str] = {}
        self.entries: dict[str, str] = {}

    def run(self, script: ScenarioScript) -> Transcript:
        transcript = Transcript()
        clock = self.engine.clock
        for index, action in enumerate(script.actions, start=1):
            if hasattr(clock, "advance"):
                clock.advance()
            try:
                outcome = self._apply(script, action)
            except EikcError as exc:
                if action.expect == exc.code:
                    transcript.lines.append(
                        f"{index:03d} expected-error {exc.code} {action.verb} (line {action.line_no})"
                    )
                else:
                    transcript.ok = False
                    transcript.lines.append(
                        f"{index:03d} ERROR {exc.code} {action.verb} (line {action.line_no}): {exc.message}"
                    )
                continue
            if action.expect is not None:
                transcript.ok = False
                transcript.lines.append(
                    f"{index:03d} ERROR expected {action.expect} but {action.verb} succeeded "
                    f"(line {action.line_no})"
                )
            else:
                transcript.lines.append(f"{index:03d} ok {action.verb} {outcome}")
        transcript.fingerprint = self.engine.repository.state_fingerprint()
        return transcript

    # -- single action -------------------------------------------------------

    def _apply(self, script: ScenarioScript, action: Action) -> str:
        args = action.args
        if action.verb == "project":
            project = self.engine.open_project(args["title"], args.get("org", ""))
            self.projects[args["id"]] = project.project_id
            return f"{args['id']} -> {project.project_id}"

        if action.verb == "declare":
            actor = script.actors[args["as"]]
            project_id = self.projects.get(args["project"], args["project"])
            content = _content(args)
            thread_id = self.engine.declare(project_id, actor, TaskKind(args["task"]), content)
            thread, entries = self.engine.repository.load_thread(thread_id)
            self.threads[args["id"]] = thread_id
            self.entries[args["id"]] = entries[0].entry_id
            return f"{args['id']} -> thread={thread_id} state={thread.state.value}"

        if action.verb == "annotate":
            actor = script.actors[args["as"]]
            thread_id = self.threads.get(args["thread"], args["thread"])
            entry_id = self.engine.annotate(thread_id, actor, args["text"])
            return self._entry_outcome(action, thread_id, entry_id)

        if action.verb == "revise":
            actor = script.actors[args["as"]]
            thread_id = self.threads.get(args["thread"], args["thread"])
            entry_id = self.engine.revise(thread_id, actor, _content(args))
            return self._entry_outcome(action, thread_id, entry_id)

        if action.verb == "validate":
            actor = script.actors[args["as"]]
            thread_id = self.threads.get(args["thread"], args["thread"])
            entry_id = self.engine.validate(thread_id, actor, args["remark"])
            return self._entry_outcome(action, thread_id, entry_id)

        if action.verb == "feedback":
            actor = script.actors[args["as"]]
            target = self.entries.get(args["entry"], args["entry"])
            entry_id = self.exploitation.record_feedback(
                actor, target, int(args["rating"]), args["comment"]
            )
            if "id" in args:
                self.entries[args["id"]] = entry_id
            return f"-> entry={entry_id}"

        if action.verb == "query":
            spec = QuerySpec.build(
                args["terms"].split(","),
                project_id=self.projects.get(args["project"], args["project"]) if "project" in args else None,
                task_kind=TaskKind(args["task"]) if "task" in args else None,
                year=int(args["year"]) if "year" in args else None,
                validated_only=args.get("validated-only", "false").lower() == "true",
            )
            result = self.exploitation.query(spec)
            ids = ",".join(h.entry_id for h in result.hits)
            return f"-> hits={len(result.hits)} [{ids}]"

        if action.verb == "visualize":
            thread_id = self.threads.get(args["thread"], args["thread"])
            view = self.exploitation.visualize(thread_id, ViewMode(args["mode"]))
            return f"-> mode={view.mode.value} items={len(view.items)} state={view.state.value}"

        raise ScriptParseError(f"unhandled verb {action.verb}")  # pragma: no cover

    def _entry_outcome(self, action: Action, thread_id: str, entry_id: str) -> str:
        if "id" in action.args:
            self.entries[action.args["id"]] = entry_id
        thread, _ = self.engine.repository.load_thread(thread_id)
        return f"-> entry={entry_id} state={thread.state.value}"


def _content(args: dict[str, str]) -> KnowledgeContent:
    return KnowledgeContent(
        what=args["what"],
        why=args.get("why", ""),
        how=args.get("how", ""),
        result=args.get("result"),
    )


def run_scenario_text(text: str, engine: Engine) -> Transcript:
    """Parse and run a script against an engine; convenience for tests and
    the CLI."""
    script = parse_script(text)
    return ScenarioRunner(engine).run(script)
