// Pure translation from API payloads to what the screens display.
// Every card corresponds 1:1 to an entry returned by the API.

import type { ThreadState, ThreadView, ViewItem } from "./types.js";

export interface TimelineCard {
  entryId: string;
  kind: string;
  actorName: string;
  timestamp: string;
  lines: string[];
}

function contentLines(item: ViewItem): string[] {
  const lines = [item.content.what];
  if (item.content.why) lines.push(`why: ${item.content.why}`);
  if (item.content.how) lines.push(`how: ${item.content.how}`);
  if (item.content.result) lines.push(`result: ${item.content.result}`);
  return lines;
}

export function timelineCards(view: ThreadView): TimelineCard[] {
  return view.items.map((item) => ({
    entryId: item.entry_id,
    kind: item.kind,
    actorName: item.who_display || item.who,
    timestamp: item.when,
    lines: contentLines(item),
  }));
}

export function bannerText(state: ThreadState): string {
  switch (state) {
    case "Declared":
      return "Declared — awaiting annotation or concession";
    case "UnderAnnotation":
      return "Under annotation — originator may revise";
    case "Revised":
      return "Revised — awaiting annotation or concession";
    case "Validated":
      return "Validated";
  }
}
