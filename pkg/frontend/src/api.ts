// Thin fetch client; the only way the UI talks to the service.

import type {
  ActorInfo,
  Content,
  EntryCreated,
  ExploreResult,
  HealthInfo,
  ProjectInfo,
  QueryResult,
  SimilarCase,
  TaskKind,
  ThreadInfo,
  ThreadView,
  ViewMode,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public code: string,
    message: string,
    public status: number,
  ) {
    super(message);
  }
}

export interface QueryFilters {
  project?: string;
  task?: TaskKind;
  year?: number;
  validatedOnly?: boolean;
}

export class ApiClient {
  token: string | null = null;

  constructor(public baseUrl: string = "") {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (this.token) headers["X-Actor-Token"] = this.token;
    const response = await fetch(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    const parsed = text ? JSON.parse(text) : null;
    if (!response.ok) {
      const err = parsed?.error ?? { code: "HttpError", message: text };
      throw new ApiError(err.code, err.message, response.status);
    }
    return parsed as T;
  }

  health(): Promise<HealthInfo> {
    return this.request("GET", "/health");
  }

  listActors(): Promise<ActorInfo[]> {
    return this.request("GET", "/actors");
  }

  listProjects(): Promise<ProjectInfo[]> {
    return this.request("GET", "/projects");
  }

  createProject(title: string, organization: string): Promise<ProjectInfo> {
    return this.request("POST", "/projects", { title, organization });
  }

  listThreads(projectId: string): Promise<ThreadInfo[]> {
    return this.request("GET", `/projects/${projectId}/threads`);
  }

  declare(projectId: string, taskKind: TaskKind, content: Content): Promise<{ thread: ThreadInfo }> {
    return this.request("POST", `/projects/${projectId}/threads`, {
      task_kind: taskKind,
      content,
    });
  }

  annotate(threadId: string, text: string): Promise<EntryCreated> {
    return this.request("POST", `/threads/${threadId}/annotations`, { text });
  }

  revise(threadId: string, content: Content): Promise<EntryCreated> {
    return this.request("POST", `/threads/${threadId}/revisions`, { content });
  }

  validate(threadId: string, remark: string): Promise<EntryCreated> {
    return this.request("POST", `/threads/${threadId}/validation`, { remark });
  }

  feedback(entryId: string, rating: number, comment: string): Promise<EntryCreated> {
    return this.request("POST", `/entries/${entryId}/feedback`, { rating, comment });
  }

  view(threadId: string, mode: ViewMode): Promise<ThreadView> {
    return this.request("GET", `/threads/${threadId}?mode=${mode}`);
  }

  explore(axis: "task" | "project" | "year" | "state"): Promise<ExploreResult> {
    return this.request("GET", `/explore?axis=${axis}`);
  }

  query(terms: string, filters: QueryFilters = {}): Promise<QueryResult> {
    const params = new URLSearchParams({ terms });
    if (filters.project) params.set("project", filters.project);
    if (filters.task) params.set("task", filters.task);
    if (filters.year !== undefined) params.set("year", String(filters.year));
    if (filters.validatedOnly) params.set("validated_only", "true");
    return this.request("GET", `/query?${params.toString()}`);
  }

  similar(q: string, k: number): Promise<{ cases: SimilarCase[] }> {
    return this.request("GET", `/similar?q=${encodeURIComponent(q)}&k=${k}`);
  }
}
