// Conformance against a live service loaded with the bundled fixture:
// DOM card counts equal API item counts for every view mode, action
// buttons mirror server permission outcomes for both roles, and a
// validate click flips the banner within one poll cycle.

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { ApiClient, ApiError } from "../src/api.js";
import { availableActions } from "../src/rules.js";
import { mountThreadView } from "../src/app.js";
import { renderTimeline } from "../src/render.js";
import { timelineCards } from "../src/viewmodel.js";
import type { ActorInfo, ThreadState, ViewMode } from "../src/types.js";

let server: ChildProcess;
let base: string;
let chair: ApiClient;
let researcher: ApiClient;
let actors: Record<string, ActorInfo>;

const VALIDATED_STAKE = "p0001-t002"; // two annotate/revise rounds in the fixture

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.listen(0, "127.0.0.1", () => {
      const port = (probe.address() as { port: number }).port;
      probe.close(() => resolve(port));
    });
    probe.on("error", reject);
  });
}

async function waitForHealth(url: string, timeoutMs = 30000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      const response = await fetch(`${url}/health`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error("service did not come up");
    await new Promise((r) => setTimeout(r, 250));
  }
}

beforeAll(async () => {
  const dir = mkdtempSync(join(tmpdir(), "eikc-ui-"));
  const store = join(dir, "store");
  const registry = join(dir, "actors.json");
  writeFileSync(
    registry,
    JSON.stringify({
      actors: [
        { actor_id: "chair", display_name: "Board Chair", role: "DecisionMaker" },
        { actor_id: "director", display_name: "Operations Director", role: "DecisionMaker" },
        { actor_id: "researcher", display_name: "Product Researcher", role: "Watcher" },
      ],
    }),
  );
  execFileSync("python3", ["-m", "eikc.cli", "run-scenario", "sunseed", "--data-dir", store, "--clock=scripted"]);

  const port = await freePort();
  base = `http://127.0.0.1:${port}`;
  server = spawn(
    "python3",
    ["-m", "eikc.cli", "serve", "--port", String(port), "--data-dir", store, "--actors", registry],
    { stdio: "ignore" },
  );
  await waitForHealth(base);

  const anonymous = new ApiClient(base);
  actors = Object.fromEntries((await anonymous.listActors()).map((a) => [a.actor_id, a]));
  chair = new ApiClient(base);
  chair.token = actors.chair.token;
  researcher = new ApiClient(base);
  researcher.token = actors.researcher.token;
});

afterAll(() => {
  server?.kill("SIGTERM");
});

describe("timeline conformance", () => {
  it("DOM card count equals the API item count for all three modes", async () => {
    for (const mode of ["validated", "evolution", "complete"] as ViewMode[]) {
      const view = await chair.view(VALIDATED_STAKE, mode);
      const container = document.createElement("div");
      renderTimeline(container, timelineCards(view));
      expect(container.querySelectorAll(".card").length, mode).toBe(view.items.length);
    }
    const complete = await chair.view(VALIDATED_STAKE, "complete");
    expect(complete.items.length).toBe(6);
    const evolution = await chair.view(VALIDATED_STAKE, "evolution");
    expect(evolution.items.length).toBe(5);
  });

  it("every card shows originator and timestamp from the API", async () => {
    const view = await chair.view(VALIDATED_STAKE, "evolution");
    const container = document.createElement("div");
    renderTimeline(container, timelineCards(view));
    const whos = [...container.querySelectorAll(".card .actor")].map((n) => n.textContent);
    const whens = [...container.querySelectorAll(".card .when")].map((n) => n.textContent);
    expect(whos).toEqual(view.items.map((i) => i.who_display));
    expect(whens).toEqual(view.items.map((i) => i.when));
  });
});

describe("action buttons mirror server outcomes", () => {
  // a fresh stake-definition probe thread in the requested state
  async function probeThread(state: ThreadState): Promise<string> {
    const created = await researcher.declare("p0001", "StakeDefinition", {
      what: `probe stake ${Math.random().toString(36).slice(2)}`,
    });
    const threadId = created.thread.thread_id;
    if (state === "UnderAnnotation") {
      await chair.annotate(threadId, "probe annotation");
    } else if (state === "Validated") {
      await chair.validate(threadId, "probe concession");
    }
    return threadId;
  }

  async function serverAllows(
    client: ApiClient,
    threadId: string,
    action: "annotate" | "revise" | "validate",
  ): Promise<boolean> {
    try {
      if (action === "annotate") await client.annotate(threadId, "probe");
      else if (action === "revise") await client.revise(threadId, { what: "probe revision" });
      else await client.validate(threadId, "probe");
      return true;
    } catch (err) {
      if (err instanceof ApiError) return false;
      throw err;
    }
  }

  it("enablement equals the live outcome for both roles in every state", async () => {
    const states: ThreadState[] = ["Declared", "UnderAnnotation", "Validated"];
    const actions = ["annotate", "revise", "validate"] as const;
    for (const state of states) {
      for (const [client, actor] of [
        [chair, actors.chair],
        [researcher, actors.researcher],
      ] as const) {
        for (const action of actions) {
          const threadId = await probeThread(state);
          const view = await client.view(threadId, "complete");
          const ui = availableActions(
            { actor_id: actor.actor_id, role: actor.role },
            { task_kind: view.task_kind, originator: view.originator, state: view.state },
          );
          const allowed = await serverAllows(client, threadId, action);
          expect(ui[action], `${state}/${actor.actor_id}/${action}`).toBe(allowed);
        }
      }
    }
  });
});

describe("validate click", () => {
  it("transitions the banner to Validated within one poll cycle", async () => {
    // chair declares a fresh decision problem; researcher may concede it
    const created = await chair.declare("p0001", "DecisionProblemDefinition", {
      what: "ui click fixture problem",
    });
    const threadId = created.thread.thread_id;

    window.prompt = () => "conceded from the browser";
    const container = document.createElement("div");
    const handle = mountThreadView(container, researcher, actors.researcher, threadId, "complete", 100);
    try {
      await new Promise((r) => setTimeout(r, 300));
      const banner = () => container.querySelector(".banner") as HTMLElement;
      expect(banner().dataset.state).toBe("Declared");

      const button = container.querySelector(".action-validate") as HTMLButtonElement;
      expect(button).toBeTruthy();
      button.click();

      await new Promise((r) => setTimeout(r, 400)); // > one poll cycle
      expect(banner().dataset.state).toBe("Validated");
      // closed thread: lifecycle buttons disappear
      expect(container.querySelector(".action-validate")).toBeNull();
      expect(container.querySelector(".action-annotate")).toBeNull();
    } finally {
      handle.stop();
    }
  });
});
