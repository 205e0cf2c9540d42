// Wire types of the knowledge-capitalization service API.

export type Role = "DecisionMaker" | "Watcher";

export type TaskKind =
  | "DecisionProblemDefinition"
  | "StakeDefinition"
  | "IspTranslation"
  | "SourceIdentification"
  | "IndicatorGeneration"
  | "DecisionRecord";

export type EntryKind = "Declaration" | "Annotation" | "Revision" | "Validation" | "Feedback";

export type ThreadState = "Declared" | "UnderAnnotation" | "Revised" | "Validated";

export type ViewMode = "validated" | "evolution" | "complete";

export const TASK_KINDS: TaskKind[] = [
  "DecisionProblemDefinition",
  "StakeDefinition",
  "IspTranslation",
  "SourceIdentification",
  "IndicatorGeneration",
  "DecisionRecord",
];

export interface Content {
  what: string;
  why?: string;
  how?: string;
  result?: string | null;
}

export interface ActorInfo {
  actor_id: string;
  display_name: string;
  role: Role;
  token: string;
}

export interface ProjectInfo {
  project_id: string;
  title: string;
  organization: string;
  created_at: string;
}

export interface ThreadInfo {
  thread_id: string;
  project_id: string;
  task_kind: TaskKind;
  originator: string;
  state: ThreadState;
  version: number;
  entry_ids: string[];
}

export interface ViewItem {
  entry_id: string;
  kind: EntryKind;
  who: string;
  who_display: string;
  when: string;
  content: Content;
}

export interface ThreadView {
  thread_id: string;
  project_id: string;
  task_kind: TaskKind;
  originator: string;
  mode: ViewMode;
  state: ThreadState;
  version: number;
  items: ViewItem[];
}

export interface EntryCreated {
  entry_id: string;
  thread_id: string;
  state: ThreadState;
  version: number;
}

export interface Cluster {
  key: string;
  thread_ids: string[];
  size: number;
}

export interface ExploreResult {
  axis: string;
  clusters: Cluster[];
}

export interface QueryHit {
  entry_id: string;
  thread_id: string;
  snippet: string;
  score: number;
}

export interface QueryResult {
  terms: string[];
  hits: QueryHit[];
  executed_at: string;
}

export interface SimilarCase {
  thread_id: string;
  score: number;
  task_kind: TaskKind;
  state: ThreadState;
  last_when: string;
}

export interface HealthInfo {
  status: string;
  projects: number;
  threads: number;
  entries: number;
  fingerprint: string;
}
