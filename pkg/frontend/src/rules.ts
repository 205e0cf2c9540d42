// Optimistic mirror of the server's permission matrix and transition
// table, used only to enable/disable action controls. The server remains
// the authority; a denied call renders its error verbatim.

import type { EntryKind, Role, TaskKind, ThreadState } from "./types.js";

const DECLARER: Record<TaskKind, Role> = {
  DecisionProblemDefinition: "DecisionMaker",
  StakeDefinition: "Watcher",
  IspTranslation: "Watcher",
  SourceIdentification: "Watcher",
  IndicatorGeneration: "Watcher",
  DecisionRecord: "DecisionMaker",
};

export function counterpart(role: Role): Role {
  return role === "DecisionMaker" ? "Watcher" : "DecisionMaker";
}

export function annotatorRole(task: TaskKind): Role {
  return counterpart(DECLARER[task]);
}

export function validatorRole(task: TaskKind): Role {
  // decision records are countersigned by another decision maker
  return task === "DecisionRecord" ? "DecisionMaker" : counterpart(DECLARER[task]);
}

export function permittedMirror(
  role: Role,
  task: TaskKind,
  action: EntryKind,
  isOriginator: boolean,
): boolean {
  switch (action) {
    case "Declaration":
      return role === DECLARER[task];
    case "Revision":
      return isOriginator && role === DECLARER[task];
    case "Annotation":
      return !isOriginator && role === annotatorRole(task);
    case "Validation":
      return !isOriginator && role === validatorRole(task);
    case "Feedback":
      return true;
  }
}

const LEGAL_IN_STATE: Record<Exclude<EntryKind, "Declaration" | "Feedback">, ThreadState[]> = {
  Annotation: ["Declared", "Revised"],
  Revision: ["UnderAnnotation"],
  Validation: ["Declared", "UnderAnnotation", "Revised"],
};

export function transitionAllows(state: ThreadState, action: EntryKind): boolean {
  if (action === "Feedback") return true; // never drives the state machine
  if (action === "Declaration") return false; // threads declare exactly once
  return LEGAL_IN_STATE[action].includes(state);
}

export interface ThreadFacts {
  task_kind: TaskKind;
  originator: string;
  state: ThreadState;
}

export interface ActorFacts {
  actor_id: string;
  role: Role;
}

export interface ActionAvailability {
  annotate: boolean;
  revise: boolean;
  validate: boolean;
  feedback: boolean;
}

/** A control is shown exactly when the corresponding API call would be
 * both permitted for the signed-in actor and legal in the thread state. */
export function availableActions(actor: ActorFacts, thread: ThreadFacts): ActionAvailability {
  const isOriginator = actor.actor_id === thread.originator;
  const can = (action: EntryKind) =>
    permittedMirror(actor.role, thread.task_kind, action, isOriginator) &&
    transitionAllows(thread.state, action);
  return {
    annotate: can("Annotation"),
    revise: can("Revision"),
    validate: can("Validation"),
    feedback: can("Feedback"),
  };
}

export function canDeclare(role: Role, task: TaskKind): boolean {
  return permittedMirror(role, task, "Declaration", false);
}
