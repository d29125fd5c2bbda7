// Grading workflow against the real service: seed a store with one
// awaiting-grades session of three rubric items, then run a scripted
// browser pass end to end.

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join, dirname } from "node:path";
import { fileURLToPath } from "node:url";

import { afterAll, beforeAll, beforeEach, describe, expect, it } from "vitest";

import { AiqClient } from "../src/api";
import { ConsoleApp } from "../src/app";

const HERE = dirname(fileURLToPath(import.meta.url));
const SEED_SCRIPT = join(HERE, "..", "scripts", "seed_store.py");

let storeDir: string;
let server: ChildProcess;
let base: string;
let client: AiqClient;

async function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port"));
        return;
      }
      probe.close(() => resolve(address.port));
    });
  });
}

async function waitFor(
  condition: () => boolean | Promise<boolean>,
  what: string,
  timeoutMs = 15000,
): Promise<void> {
  const started = Date.now();
  for (;;) {
    let ok = false;
    try {
      ok = await condition();
    } catch {
      ok = false;
    }
    if (ok) return;
    if (Date.now() - started > timeoutMs) {
      throw new Error(`timed out waiting for ${what}`);
    }
    await new Promise((resolve) => setTimeout(resolve, 100));
  }
}

beforeAll(async () => {
  storeDir = mkdtempSync(join(tmpdir(), "aiq-console-"));
  execFileSync("python3", [SEED_SCRIPT, storeDir]);

  const port = await freePort();
  base = `http://127.0.0.1:${port}`;
  server = spawn("python3", ["-m", "aiq", "serve", "--store", storeDir, "--port", String(port)], {
    env: { ...process.env, AIQ_PORT: "", AIQ_STORE: "" },
    stdio: ["ignore", "pipe", "pipe"],
  });
  client = new AiqClient(base);
  await waitFor(async () => {
    const response = await fetch(`${base}/api/sessions`);
    return response.ok;
  }, "service to come up");
});

afterAll(() => {
  server?.kill("SIGTERM");
  rmSync(storeDir, { recursive: true, force: true });
});

beforeEach(() => {
  document.body.innerHTML = '<div id="app"></div>';
});

function root(): HTMLElement {
  return document.getElementById("app") as HTMLElement;
}

function byTestId(id: string): HTMLElement | null {
  return root().querySelector(`[data-testid=${id}]`);
}

function setPoints(value: string): void {
  (byTestId("points-input") as HTMLInputElement).value = value;
}

function submitScoreForm(): void {
  (byTestId("score-form") as HTMLFormElement).dispatchEvent(
    new Event("submit", { bubbles: true, cancelable: true }),
  );
}

describe("criterion 9: grading workflow against a seeded store", () => {
  it("scores all three rubric items to completion with the 422 rendered inline", async () => {
    const app = new ConsoleApp(root(), new AiqClient(base));
    await app.mount();

    // the seeded session shows up awaiting grades with 3 pending items
    const table = byTestId("sessions-table");
    expect(table?.textContent).toContain("Demo System");
    expect(table?.textContent).toContain("awaiting grades");

    // open its queue like a grader would
    (byTestId("grade-s-demo") as HTMLButtonElement).click();
    await waitFor(() => byTestId("queue-card") !== null, "queue to render");
    expect(byTestId("queue-progress")?.textContent).toContain("3 item(s)");
    expect(byTestId("queue-card")?.getAttribute("data-item")).toBe("q-cre-1");
    expect(byTestId("item-response")?.textContent).toContain("tide");

    // out-of-range submission: inline 422, queue does not advance
    setPoints("99");
    submitScoreForm();
    await waitFor(
      () => byTestId("inline-error")?.classList.contains("hidden") === false,
      "inline error",
    );
    expect(byTestId("inline-error")?.textContent).toContain("OutOfRange");
    expect(byTestId("queue-card")?.getAttribute("data-item")).toBe("q-cre-1");

    // valid scores advance through the queue
    setPoints("4");
    submitScoreForm();
    await waitFor(
      () => byTestId("queue-card")?.getAttribute("data-item") === "q-cre-2",
      "advance to the second item",
    );
    setPoints("5");
    submitScoreForm();
    await waitFor(
      () => byTestId("queue-card")?.getAttribute("data-item") === "q-cre-3",
      "advance to the third item",
    );

    // the last grade completes the session and shows the final Q
    setPoints("6");
    submitScoreForm();
    await waitFor(() => byTestId("queue-complete") !== null, "completion panel");
    const shownQ = byTestId("final-q")?.textContent;
    expect(shownQ).toBeTruthy();

    // the displayed value is exactly what the API reports
    const rank = await client.getRank();
    const row = rank.rows.find((r) => r.subject_id === "demo-system");
    expect(row).toBeDefined();
    expect(shownQ).toBe(row?.q_display);

    // a second submit to a scored item surfaces NotPending (idempotence)
    const again = await fetch(`${base}/api/sessions/s-demo/scores`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ item_id: "q-cre-1", points: 4, grader_id: "g" }),
    });
    expect(again.status).toBe(409);

    // and the session list now shows the session complete
    await app.show("sessions");
    await waitFor(
      () => byTestId("sessions-table")?.textContent?.includes("complete") === true,
      "session list refresh",
    );
  });
});
