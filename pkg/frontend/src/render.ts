// DOM construction. No fetching and no rules in here: containers are
// filled from already-computed view models.

import type { Cluster, QueryHit, SimilarCase, ThreadState } from "./types.js";
import type { ActionAvailability } from "./rules.js";
import type { TimelineCard } from "./viewmodel.js";
import { bannerText } from "./viewmodel.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderBanner(container: HTMLElement, state: ThreadState): void {
  container.replaceChildren();
  const banner = el("div", `banner state-${state.toLowerCase()}`, bannerText(state));
  banner.dataset.state = state;
  container.appendChild(banner);
}

export function renderTimeline(
  container: HTMLElement,
  cards: TimelineCard[],
  onFeedback?: (entryId: string) => void,
): void {
  container.replaceChildren();
  const list = el("div", "timeline");
  for (const card of cards) {
    const article = el("article", `card kind-${card.kind.toLowerCase()}`);
    article.dataset.entryId = card.entryId;
    const header = el("header");
    header.appendChild(el("span", "badge", card.kind));
    header.appendChild(el("span", "actor", card.actorName));
    header.appendChild(el("time", "when", card.timestamp));
    article.appendChild(header);
    for (const [index, line] of card.lines.entries()) {
      article.appendChild(el("p", index === 0 ? "what" : "detail", line));
    }
    if (onFeedback) {
      const button = el("button", "feedback-button", "rate");
      button.addEventListener("click", () => onFeedback(card.entryId));
      article.appendChild(button);
    }
    list.appendChild(article);
  }
  container.appendChild(list);
}

export interface ActionHandlers {
  annotate?: () => void;
  revise?: () => void;
  validate?: () => void;
}

/** Buttons are rendered only for actions the signed-in actor may take. */
export function renderActionButtons(
  container: HTMLElement,
  availability: ActionAvailability,
  handlers: ActionHandlers = {},
): void {
  container.replaceChildren();
  const bar = el("div", "actions");
  const add = (name: "annotate" | "revise" | "validate", label: string) => {
    if (!availability[name]) return;
    const button = el("button", `action-${name}`, label);
    button.dataset.action = name;
    const handler = handlers[name];
    if (handler) button.addEventListener("click", handler);
    bar.appendChild(button);
  };
  add("annotate", "Annotate");
  add("revise", "Revise");
  add("validate", "Validate (concede)");
  container.appendChild(bar);
}

export function renderClusters(
  container: HTMLElement,
  clusters: Cluster[],
  onOpen?: (threadId: string) => void,
): void {
  container.replaceChildren();
  for (const cluster of clusters) {
    const section = el("section", "cluster");
    section.appendChild(el("h3", undefined, `${cluster.key} (${cluster.size})`));
    const list = el("ul");
    for (const threadId of cluster.thread_ids) {
      const item = el("li");
      const link = el("a", "thread-link", threadId);
      link.href = `#/thread/${threadId}`;
      if (onOpen) link.addEventListener("click", () => onOpen(threadId));
      item.appendChild(link);
      list.appendChild(item);
    }
    section.appendChild(list);
    container.appendChild(section);
  }
}

export function renderHits(container: HTMLElement, hits: QueryHit[]): void {
  container.replaceChildren();
  const list = el("ol", "hits");
  for (const hit of hits) {
    const item = el("li", "hit");
    const link = el("a", "thread-link", hit.thread_id);
    link.href = `#/thread/${hit.thread_id}`;
    item.appendChild(link);
    item.appendChild(el("span", "score", ` score ${hit.score} `));
    item.appendChild(el("span", "snippet", hit.snippet));
    list.appendChild(item);
  }
  container.appendChild(list);
}

export function renderCases(container: HTMLElement, cases: SimilarCase[]): void {
  container.replaceChildren();
  const list = el("ol", "cases");
  for (const c of cases) {
    const item = el("li", "case");
    const link = el("a", "thread-link", c.thread_id);
    link.href = `#/thread/${c.thread_id}`;
    item.appendChild(link);
    item.appendChild(
      el("span", "meta", ` ${c.task_kind} · ${c.state} · score ${c.score.toFixed(2)}`),
    );
    list.appendChild(item);
  }
  container.appendChild(list);
}
