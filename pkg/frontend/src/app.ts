// Single-page client: sign in as a registered actor, work the
// declare/annotate/revise/validate loop, explore, query, retrieve
// similar cases and rate reused knowledge. Pure client of the HTTP API;
// open thread views re-poll every 2 seconds on the version counter.

import { ApiClient, ApiError } from "./api.js";
import { availableActions, canDeclare } from "./rules.js";
import { renderActionButtons, renderBanner, renderCases, renderClusters, renderHits, renderTimeline } from "./render.js";
import { timelineCards } from "./viewmodel.js";
import type { ActorInfo, Content, TaskKind, ThreadView, ViewMode } from "./types.js";
import { TASK_KINDS } from "./types.js";

export const POLL_MS = 2000;

export interface ThreadViewHandle {
  refresh(): Promise<void>;
  stop(): void;
}

/** Build the live thread screen (banner, timeline, action buttons) into
 * ``container`` and keep it fresh by polling the version counter. */
export function mountThreadView(
  container: HTMLElement,
  api: ApiClient,
  actor: ActorInfo,
  threadId: string,
  mode: ViewMode = "complete",
  pollMs: number = POLL_MS,
): ThreadViewHandle {
  container.replaceChildren();
  const bannerBox = document.createElement("div");
  const actionsBox = document.createElement("div");
  const timelineBox = document.createElement("div");
  const errorBox = document.createElement("p");
  errorBox.className = "error";
  container.append(bannerBox, actionsBox, errorBox, timelineBox);

  let lastVersion = -1;

  const showError = (err: unknown) => {
    errorBox.textContent = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
  };

  const act = (fn: () => Promise<unknown>) => async () => {
    errorBox.textContent = "";
    try {
      await fn();
    } catch (err) {
      showError(err);
    }
    await refresh(true);
  };

  async function refresh(force = false): Promise<void> {
    let view: ThreadView;
    try {
      view = await api.view(threadId, mode);
    } catch (err) {
      showError(err);
      return;
    }
    if (!force && view.version === lastVersion) return;
    lastVersion = view.version;

    const thread = {
      task_kind: view.task_kind,
      originator: view.originator,
      state: view.state,
    };

    renderBanner(bannerBox, view.state);
    renderTimeline(timelineBox, timelineCards(view), (entryId) => {
      const rating = Number(window.prompt("Rating 1..5?", "5"));
      const comment = window.prompt("How was this knowledge useful?") ?? "";
      if (rating && comment) void act(() => api.feedback(entryId, rating, comment))();
    });
    renderActionButtons(actionsBox, availableActions(actor, thread), {
      annotate: act(() => api.annotate(threadId, window.prompt("Annotation") ?? "")),
      revise: act(() =>
        api.revise(threadId, {
          what: window.prompt("Revised statement") ?? "",
          why: window.prompt("Why (rationale)") ?? "",
          how: window.prompt("How (approach)") ?? "",
        }),
      ),
      validate: act(() => api.validate(threadId, window.prompt("Concession remark") ?? "")),
    });
  }

  void refresh(true);
  const timer = setInterval(() => void refresh(), pollMs);
  return {
    refresh: () => refresh(true),
    stop: () => clearInterval(timer),
  };
}

// ---------------------------------------------------------------------------
// SPA shell (runs only in a real page with an #app element)
// ---------------------------------------------------------------------------

interface AppState {
  api: ApiClient;
  actor: ActorInfo | null;
  threadHandle: ThreadViewHandle | null;
}

function screen(root: HTMLElement, title: string): HTMLElement {
  root.replaceChildren();
  const heading = document.createElement("h2");
  heading.textContent = title;
  root.appendChild(heading);
  const body = document.createElement("div");
  root.appendChild(body);
  return body;
}

async function signInScreen(state: AppState, root: HTMLElement): Promise<void> {
  const body = screen(root, "Sign in");
  const actors = await state.api.listActors();
  const list = document.createElement("div");
  list.className = "actor-list";
  for (const actor of actors) {
    const button = document.createElement("button");
    button.className = "actor-choice";
    button.textContent = `${actor.display_name} (${actor.role})`;
    button.addEventListener("click", () => {
      state.actor = actor;
      state.api.token = actor.token;
      location.hash = "#/dashboard";
    });
    list.appendChild(button);
  }
  body.appendChild(list);
}

async function dashboardScreen(state: AppState, root: HTMLElement): Promise<void> {
  const body = screen(root, "Projects");
  const projects = await state.api.listProjects();
  for (const project of projects) {
    const section = document.createElement("section");
    section.className = "project";
    const heading = document.createElement("h3");
    heading.textContent = `${project.title} — ${project.organization}`;
    section.appendChild(heading);
    const threads = await state.api.listThreads(project.project_id);
    const list = document.createElement("ul");
    for (const thread of threads) {
      const item = document.createElement("li");
      const link = document.createElement("a");
      link.href = `#/thread/${thread.thread_id}`;
      link.textContent = `${thread.task_kind} · ${thread.state} · v${thread.version}`;
      item.appendChild(link);
      list.appendChild(item);
    }
    section.appendChild(list);
    const declareLink = document.createElement("a");
    declareLink.href = `#/declare/${project.project_id}`;
    declareLink.textContent = "+ declare knowledge";
    section.appendChild(declareLink);
    body.appendChild(section);
  }
  const form = document.createElement("form");
  form.innerHTML =
    '<h3>New project</h3><input name="title" placeholder="Title" required> ' +
    '<input name="org" placeholder="Organization"> <button type="submit">Create</button>';
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(form);
    void state.api
      .createProject(String(data.get("title")), String(data.get("org") ?? ""))
      .then(() => renderRoute(state, root));
  });
  body.appendChild(form);
}

async function declareScreen(state: AppState, root: HTMLElement, projectId: string): Promise<void> {
  const body = screen(root, "Declare knowledge");
  if (!state.actor) return;
  const form = document.createElement("form");
  const tasks = TASK_KINDS.filter((task) => state.actor && canDeclare(state.actor.role, task));
  form.innerHTML =
    `<select name="task">${tasks.map((t) => `<option>${t}</option>`).join("")}</select>` +
    '<textarea name="what" placeholder="What (the knowledge statement)" required></textarea>' +
    '<textarea name="why" placeholder="Why (rationale / stake)"></textarea>' +
    '<textarea name="how" placeholder="How (method / approach)"></textarea>' +
    '<button type="submit">Declare</button><p class="error"></p>';
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(form);
    const content: Content = {
      what: String(data.get("what")),
      why: String(data.get("why") ?? ""),
      how: String(data.get("how") ?? ""),
    };
    state.api
      .declare(projectId, data.get("task") as TaskKind, content)
      .then((created) => {
        location.hash = `#/thread/${created.thread.thread_id}`;
      })
      .catch((err: ApiError) => {
        const errorBox = form.querySelector(".error");
        if (errorBox) errorBox.textContent = `${err.code}: ${err.message}`;
      });
  });
  body.appendChild(form);
}

async function exploreScreen(state: AppState, root: HTMLElement): Promise<void> {
  const body = screen(root, "Explore");
  const tabs = document.createElement("div");
  tabs.className = "tabs";
  const output = document.createElement("div");
  for (const axis of ["task", "project", "year", "state"] as const) {
    const button = document.createElement("button");
    button.textContent = `by ${axis}`;
    button.addEventListener("click", () => {
      void state.api.explore(axis).then((result) => renderClusters(output, result.clusters));
    });
    tabs.appendChild(button);
  }
  body.append(tabs, output);
  const first = await state.api.explore("task");
  renderClusters(output, first.clusters);
}

async function queryScreen(state: AppState, root: HTMLElement): Promise<void> {
  const body = screen(root, "Query");
  const form = document.createElement("form");
  form.innerHTML =
    '<input name="terms" placeholder="terms, comma separated" required>' +
    '<label><input type="checkbox" name="validated"> validated only</label>' +
    '<button type="submit">Search</button>';
  const output = document.createElement("div");
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(form);
    void state.api
      .query(String(data.get("terms")), { validatedOnly: data.get("validated") === "on" })
      .then((result) => renderHits(output, result.hits));
  });
  body.append(form, output);
}

async function similarScreen(state: AppState, root: HTMLElement): Promise<void> {
  const body = screen(root, "Similar cases");
  const form = document.createElement("form");
  form.innerHTML =
    '<textarea name="q" placeholder="Describe the new problem" required></textarea>' +
    '<button type="submit">Find similar</button>';
  const output = document.createElement("div");
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(form);
    void state.api.similar(String(data.get("q")), 10).then((result) => renderCases(output, result.cases));
  });
  body.append(form, output);
}

async function renderRoute(state: AppState, root: HTMLElement): Promise<void> {
  state.threadHandle?.stop();
  state.threadHandle = null;
  const hash = location.hash || "#/signin";
  if (!state.actor && hash !== "#/signin") {
    location.hash = "#/signin";
    return;
  }
  if (hash === "#/signin") return signInScreen(state, root);
  if (hash === "#/dashboard") return dashboardScreen(state, root);
  if (hash === "#/explore") return exploreScreen(state, root);
  if (hash === "#/query") return queryScreen(state, root);
  if (hash === "#/similar") return similarScreen(state, root);
  const declareMatch = hash.match(/^#\/declare\/(.+)$/);
  if (declareMatch) return declareScreen(state, root, declareMatch[1]);
  const threadMatch = hash.match(/^#\/thread\/(.+)$/);
  if (threadMatch && state.actor) {
    const body = screen(root, `Thread ${threadMatch[1]}`);
    state.threadHandle = mountThreadView(body, state.api, state.actor, threadMatch[1]);
  }
}

export function bootstrap(): void {
  const root = document.getElementById("app");
  if (!root) return;
  const state: AppState = { api: new ApiClient(""), actor: null, threadHandle: null };
  window.addEventListener("hashchange", () => void renderRoute(state, root));
  void renderRoute(state, root);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  bootstrap();
}
