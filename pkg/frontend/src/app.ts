import {
  AiqClient,
  ApiError,
  QueuePayload,
  RankPayload,
  SessionSummary,
} from "./api";

export type ViewName = "sessions" | "queue" | "rank" | "classify";

export const POLL_INTERVAL_MS = 2000;

function esc(text: string): string {
  const div = document.createElement("div");
  div.textContent = text;
  return div.innerHTML;
}

function statusBadge(status: string): string {
  return `<span class="badge badge-${esc(status)}">${esc(status.replace("_", " "))}</span>`;
}

// The grading console: session list, grading queue, rank table, and the
// profile classifier form. Read-mostly polling; all mutations go through
// POST /api/sessions/{id}/scores and POST /api/profiles/classify.
export class ConsoleApp {
  readonly client: AiqClient;
  private readonly root: HTMLElement;
  private view: ViewName = "sessions";
  private sessionId: string | null = null;
  private queue: QueuePayload | null = null;
  private pollTimer: ReturnType<typeof setInterval> | null = null;
  private disconnected = false;

  constructor(root: HTMLElement, client: AiqClient) {
    this.root = root;
    this.client = client;
  }

  async mount(): Promise<void> {
    this.root.innerHTML = `
      <header class="topbar">
        <span class="brand">aiq grader console</span>
        <nav>
          <button data-testid="nav-sessions" data-nav="sessions">Sessions</button>
          <button data-testid="nav-rank" data-nav="rank">Rankings</button>
          <button data-testid="nav-classify" data-nav="classify">Classifier</button>
        </nav>
        <label class="grader-label">grader
          <input data-testid="grader-input" id="grader-input" value="console-grader" />
        </label>
      </header>
      <div class="banner hidden" data-testid="reconnect-banner">
        service unreachable — retrying…
      </div>
      <main id="view"></main>
    `;
    this.root.querySelectorAll<HTMLButtonElement>("[data-nav]").forEach((button) => {
      button.addEventListener("click", () => {
        void this.show(button.dataset.nav as ViewName);
      });
    });
    await this.show("sessions");
  }

  startPolling(): void {
    if (this.pollTimer !== null) return;
    this.pollTimer = setInterval(() => {
      void this.refresh();
    }, POLL_INTERVAL_MS);
  }

  stopPolling(): void {
    if (this.pollTimer !== null) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
  }

  get graderId(): string {
    const input = this.root.querySelector<HTMLInputElement>("#grader-input");
    return input?.value.trim() || "console-grader";
  }

  private viewRoot(): HTMLElement {
    return this.root.querySelector("#view") as HTMLElement;
  }

  private setDisconnected(state: boolean): void {
    this.disconnected = state;
    const banner = this.root.querySelector("[data-testid=reconnect-banner]");
    banner?.classList.toggle("hidden", !state);
  }

  async show(view: ViewName, sessionId?: string): Promise<void> {
    this.view = view;
    if (sessionId !== undefined) this.sessionId = sessionId;
    await this.refresh(true);
  }

  /** Fetch the current view's data; on network failure show the banner and
   * keep the stale DOM (no data loss — the queue is refetched on reconnect). */
  async refresh(force = false): Promise<void> {
    try {
      if (this.view === "sessions") {
        this.renderSessions(await this.client.listSessions());
      } else if (this.view === "rank") {
        this.renderRank(await this.client.getRank());
      } else if (this.view === "queue" && this.sessionId) {
        const queue = await this.client.getQueue(this.sessionId);
        const changed =
          force ||
          !this.queue ||
          this.queue.items.length !== queue.items.length ||
          this.queue.items[0]?.item_id !== queue.items[0]?.item_id;
        this.queue = queue;
        if (changed) this.renderQueue(queue);
      } else if (this.view === "classify" && force) {
        this.renderClassifier();
      }
      if (this.disconnected) {
        this.setDisconnected(false);
        if (this.view === "queue" && this.queue) this.renderQueue(this.queue);
      }
    } catch (error) {
      if (error instanceof ApiError) throw error;
      this.setDisconnected(true);
    }
  }

  // -- sessions ------------------------------------------------------------

  private renderSessions(sessions: SessionSummary[]): void {
    const rows = sessions
      .map((session) => {
        const gradeButton =
          session.status === "awaiting_grades"
            ? `<button data-testid="grade-${esc(session.id)}" data-grade="${esc(session.id)}">Grade</button>`
            : "";
        return `<tr>
          <td class="mono">${esc(session.id)}</td>
          <td>${esc(session.subject_display_name)}</td>
          <td class="mono">${esc(session.battery_id)} ${esc(session.battery_version)}</td>
          <td>${statusBadge(session.status)}</td>
          <td class="num">${session.pending_count}</td>
          <td>${gradeButton}</td>
        </tr>`;
      })
      .join("");
    this.viewRoot().innerHTML = `
      <h2>Sessions</h2>
      <table class="grid" data-testid="sessions-table">
        <thead><tr>
          <th>id</th><th>subject</th><th>battery</th><th>status</th>
          <th>pending</th><th></th>
        </tr></thead>
        <tbody>${rows || `<tr><td colspan="6" class="empty">no sessions in store</td></tr>`}</tbody>
      </table>
    `;
    this.viewRoot()
      .querySelectorAll<HTMLButtonElement>("[data-grade]")
      .forEach((button) => {
        button.addEventListener("click", () => {
          void this.show("queue", button.dataset.grade);
        });
      });
  }

  // -- grading queue ---------------------------------------------------------

  private renderQueue(queue: QueuePayload): void {
    if (queue.items.length === 0) {
      this.renderQueueDone(queue, null);
      return;
    }
    const item = queue.items[0];
    this.viewRoot().innerHTML = `
      <h2>Grading — ${esc(queue.subject_display_name)}
        <span class="mono subtle">${esc(queue.session_id)}</span></h2>
      <p data-testid="queue-progress">${queue.items.length} item(s) awaiting grades</p>
      <section class="card" data-testid="queue-card" data-item="${esc(item.item_id)}">
        <h3 class="mono">${esc(item.item_id)}</h3>
        <dl>
          <dt>prompt (${esc(item.modality)})</dt>
          <dd data-testid="item-prompt">${esc(item.prompt)}</dd>
          <dt>subject's response</dt>
          <dd><pre data-testid="item-response">${esc(item.raw_response)}</pre></dd>
          <dt>rubric</dt>
          <dd data-testid="item-rubric">${esc(item.rubric)}</dd>
        </dl>
        <form data-testid="score-form">
          <label>points (0–${item.max_points})
            <input data-testid="points-input" name="points" type="number"
                   min="0" max="${item.max_points}" step="any" required />
          </label>
          <button type="submit" data-testid="submit-score">Submit score</button>
          <span class="inline-error hidden" data-testid="inline-error"></span>
        </form>
      </section>
    `;
    const form = this.viewRoot().querySelector("[data-testid=score-form]") as HTMLFormElement;
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submitCurrentScore();
    });
  }

  private renderQueueDone(queue: QueuePayload, qDisplay: string | null): void {
    const readout =
      qDisplay === null
        ? ""
        : `<p class="final-q">final Absolute IQ:
             <strong data-testid="final-q">${esc(qDisplay)}</strong></p>`;
    this.viewRoot().innerHTML = `
      <h2>Grading — ${esc(queue.subject_display_name)}
        <span class="mono subtle">${esc(queue.session_id)}</span></h2>
      <section class="card done" data-testid="queue-complete">
        <p>${statusBadge("complete")} every rubric item is scored.</p>
        ${readout}
        <button data-testid="back-to-sessions">Back to sessions</button>
      </section>
    `;
    this.viewRoot()
      .querySelector("[data-testid=back-to-sessions]")
      ?.addEventListener("click", () => {
        void this.show("sessions");
      });
  }

  async submitCurrentScore(): Promise<void> {
    if (!this.queue || this.queue.items.length === 0 || !this.sessionId) return;
    const item = this.queue.items[0];
    const input = this.viewRoot().querySelector(
      "[data-testid=points-input]",
    ) as HTMLInputElement;
    const errorBox = this.viewRoot().querySelector(
      "[data-testid=inline-error]",
    ) as HTMLElement;
    const points = Number(input.value);
    try {
      const result = await this.client.submitScore(
        this.sessionId,
        item.item_id,
        points,
        this.graderId,
      );
      if (result.final) {
        // the displayed Q comes from the API response, never computed here
        this.renderQueueDone(this.queue, result.q_display);
        this.queue = { ...this.queue, items: [] };
      } else {
        const queue = await this.client.getQueue(this.sessionId);
        this.queue = queue;
        this.renderQueue(queue);
      }
    } catch (error) {
      if (error instanceof ApiError) {
        // 409/422 keep the item in the queue with the message inline
        errorBox.textContent = `${error.code}: ${error.message}`;
        errorBox.classList.remove("hidden");
        return;
      }
      this.setDisconnected(true);
    }
  }

  // -- rankings --------------------------------------------------------------

  private renderRank(payload: RankPayload): void {
    const rows = payload.rows
      .map(
        (row) => `<tr>
          <td class="num">${row.rank}</td>
          <td>${esc(row.region ?? "")}</td>
          <td>${esc(row.display_name)}</td>
          <td class="num" data-testid="q-${esc(row.subject_id)}">${esc(row.q_display)}</td>
        </tr>`,
      )
      .join("");
    this.viewRoot().innerHTML = `
      <h2>Rankings</h2>
      <table class="grid" data-testid="rank-table">
        <thead><tr><th>rank</th><th>region</th><th>subject</th><th>Absolute IQ</th></tr></thead>
        <tbody>${rows || `<tr><td colspan="4" class="empty">no complete sessions yet</td></tr>`}</tbody>
      </table>
    `;
  }

  // -- profile classifier ------------------------------------------------------

  private renderClassifier(): void {
    const abilities = ["input", "output", "mastery", "creation"];
    const unboundedBoxes = abilities
      .map(
        (ability) => `<label class="inline">
          <input type="checkbox" data-testid="unbounded-${ability}" value="${ability}" />
          ${ability}</label>`,
      )
      .join("");
    this.viewRoot().innerHTML = `
      <h2>Profile classifier</h2>
      <form class="card" data-testid="classify-form">
        <label>subject <input data-testid="profile-subject" value="ad-hoc-subject" /></label>
        <fieldset>
          <legend>measured / declared capabilities</legend>
          <label class="inline"><input type="checkbox" data-testid="cap-input" checked /> input</label>
          <label class="inline"><input type="checkbox" data-testid="cap-output" checked /> output</label>
          <label class="inline"><input type="checkbox" data-testid="cap-sharing" /> sharing</label>
          <label class="inline"><input type="checkbox" data-testid="cap-creation" /> creation</label>
        </fieldset>
        <label>storage observations — one <code>ISO-time, level</code> per line
          <textarea data-testid="storage-observations" rows="3">2015-01-01T00:00:00+00:00, 40\n2016-01-01T00:00:00+00:00, 55</textarea>
        </label>
        <fieldset>
          <legend>declared unbounded ("approaches infinity")</legend>
          ${unboundedBoxes}
        </fieldset>
        <label>eps <input data-testid="eps-input" type="number" step="any" value="0" /></label>
        <button type="submit" data-testid="classify-submit">Classify</button>
        <span class="inline-error hidden" data-testid="classify-error"></span>
      </form>
      <section class="card hidden" data-testid="classify-result"></section>
    `;
    const form = this.viewRoot().querySelector("[data-testid=classify-form]") as HTMLFormElement;
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submitClassify();
    });
  }

  private readProfileForm(): Record<string, unknown> {
    const checked = (id: string): boolean =>
      (this.viewRoot().querySelector(`[data-testid=${id}]`) as HTMLInputElement).checked;
    const text = (id: string): string =>
      (this.viewRoot().querySelector(`[data-testid=${id}]`) as HTMLInputElement).value;
    const observations = text("storage-observations")
      .split("\n")
      .map((line) => line.trim())
      .filter((line) => line.length > 0)
      .map((line) => {
        const [at, level] = line.split(",").map((part) => part.trim());
        return { at, level: Number(level) };
      });
    const unbounded = ["input", "output", "mastery", "creation"].filter((ability) =>
      checked(`unbounded-${ability}`),
    );
    return {
      subject_ref: text("profile-subject"),
      input_positive: checked("cap-input"),
      output_positive: checked("cap-output"),
      sharing: checked("cap-sharing"),
      creation_positive: checked("cap-creation"),
      storage_observations: observations,
      unbounded,
      evidence_notes: {},
    };
  }

  async submitClassify(): Promise<void> {
    const errorBox = this.viewRoot().querySelector(
      "[data-testid=classify-error]",
    ) as HTMLElement;
    const resultBox = this.viewRoot().querySelector(
      "[data-testid=classify-result]",
    ) as HTMLElement;
    const eps = Number(
      (this.viewRoot().querySelector("[data-testid=eps-input]") as HTMLInputElement).value,
    );
    try {
      const result = await this.client.classify(this.readProfileForm(), eps);
      errorBox.classList.add("hidden");
      const gaps = result.next_grade_gaps.length
        ? `<p>gaps to the next grade:</p>
           <ul data-testid="grade-gaps">${result.next_grade_gaps
             .map((gap) => `<li>${esc(gap)}</li>`)
             .join("")}</ul>`
        : `<p data-testid="grade-gaps">top grade: no gaps</p>`;
      resultBox.innerHTML = `
        <p>intelligence grade:
          <strong class="grade-value" data-testid="grade-value">${result.grade}</strong>
          ${result.degenerate ? '<span class="subtle">(degenerate I/O case)</span>' : ""}</p>
        <p class="subtle">matched: ${result.matched_conditions.map(esc).join(", ") || "none"}</p>
        ${gaps}
      `;
      resultBox.classList.remove("hidden");
    } catch (error) {
      if (error instanceof ApiError) {
        errorBox.textContent = `${error.code}: ${error.message}`;
        errorBox.classList.remove("hidden");
        resultBox.classList.add("hidden");
        return;
      }
      this.setDisconnected(true);
    }
  }
}
