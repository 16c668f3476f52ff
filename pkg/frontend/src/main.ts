/** App shell: token handling, hash routing, 5s queue polling, event wiring.
 * All rendering goes through the pure functions in render.ts. */

import { ApiClient, ApiError, type RecordDetail } from "./api.js";
import {
  bannerView,
  detailView,
  loginView,
  queueView,
  reportsView,
  type DetailState,
} from "./render.js";
import {
  ACCEPTANCE_THRESHOLD,
  CRITERIA,
  type Bit,
  type Criterion,
  type Toggles,
  emptyToggles,
  scoreOf,
} from "./score.js";

const POLL_INTERVAL_MS = 5_000;

const app = document.getElementById("app")!;
const banner = document.getElementById("banner")!;

let client: ApiClient | null = null;
let pollTimer: number | null = null;
let detailState: DetailState | null = null;

function prefillEnabled(): boolean {
  return localStorage.getItem("prefillMachine") !== "off";
}

function reviewerName(): string {
  return localStorage.getItem("reviewer") || "reviewer";
}

function showBanner(kind: "error" | "info", message: string): void {
  banner.innerHTML = bannerView(kind, message);
  window.setTimeout(() => {
    banner.innerHTML = "";
  }, 6_000);
}

function requireLogin(message = ""): void {
  stopPolling();
  client = null;
  app.innerHTML = loginView(message);
  document.getElementById("token-save")!.addEventListener("click", () => {
    const token = (document.getElementById("token-input") as HTMLInputElement).value.trim();
    const reviewer = (document.getElementById("reviewer-input") as HTMLInputElement).value.trim();
    if (!token) return;
    localStorage.setItem("token", token);
    if (reviewer) localStorage.setItem("reviewer", reviewer);
    start();
  });
}

function handleApiError(error: unknown): void {
  if (error instanceof ApiError && error.status === 401) {
    localStorage.removeItem("token");
    requireLogin("Token rejected; sign in again.");
    return;
  }
  const message = error instanceof Error ? error.message : String(error);
  showBanner("error", message);
}

function stopPolling(): void {
  if (pollTimer !== null) {
    window.clearInterval(pollTimer);
    pollTimer = null;
  }
}

async function renderQueue(): Promise<void> {
  if (!client) return;
  try {
    const records = await client.listRecords("PendingReview");
    app.innerHTML = queueView(records, new Date());
  } catch (error) {
    handleApiError(error);
  }
}

function initDetailState(record: RecordDetail): DetailState {
  const toggles: Toggles = emptyToggles();
  if (prefillEnabled()) {
    for (const criterion of CRITERIA) {
      const cv = record.rubric[criterion];
      if (cv.provenance !== "Unset" && cv.value !== null) {
        toggles[criterion] = cv.value;
      }
    }
  }
  return { record, toggles, confirmed: new Set(), needsRevision: false };
}

async function renderDetail(recordId: string): Promise<void> {
  if (!client) return;
  stopPolling();
  try {
    const record = await client.getRecord(recordId);
    detailState = initDetailState(record);
    paintDetail();
  } catch (error) {
    handleApiError(error);
  }
}

function paintDetail(): void {
  if (!detailState) return;
  app.innerHTML = detailView(detailState);
  app.querySelectorAll<HTMLButtonElement>("button.toggle").forEach((button) => {
    button.addEventListener("click", () => {
      const criterion = button.dataset.criterion as Criterion;
      const value = Number(button.dataset.value) as Bit;
      detailState!.toggles[criterion] = value;
      detailState!.confirmed.add(criterion);
      const live = scoreOf(detailState!.toggles);
      if (live !== null && live < ACCEPTANCE_THRESHOLD) detailState!.needsRevision = false;
      paintDetail();
    });
  });
  const nrBox = document.getElementById("needs-revision") as HTMLInputElement | null;
  nrBox?.addEventListener("change", () => {
    detailState!.needsRevision = nrBox.checked;
    paintDetail();
  });
  document.getElementById("submit-review")?.addEventListener("click", submitReview);
}

async function submitReview(): Promise<void> {
  if (!client || !detailState) return;
  const { record, toggles, needsRevision } = detailState;
  const clientScore = scoreOf(toggles);
  if (clientScore === null) return;
  const criteria: Partial<Record<Criterion, Bit>> = {};
  for (const criterion of CRITERIA) criteria[criterion] = toggles[criterion]!;
  try {
    const result = await client.submitReview(record.id, criteria, {
      reviewer: reviewerName(),
      needsRevision,
    });
    if (result.score !== null && Math.abs(result.score - clientScore) > 1e-9) {
      showBanner(
        "error",
        `Score mismatch: client computed ${clientScore}, server returned ${result.score}.`,
      );
    } else {
      showBanner("info", `Review submitted: ${result.status} (score ${result.score}).`);
    }
    window.location.hash = "#/queue";
  } catch (error) {
    if (error instanceof ApiError && error.status === 409) {
      showBanner("error", "Record is no longer pending; reloading.");
      renderDetail(record.id);
      return;
    }
    handleApiError(error);
  }
}

async function renderReports(binWidth = 0.5): Promise<void> {
  if (!client) return;
  stopPolling();
  try {
    const [rows, histogram] = await Promise.all([
      client.reportSummary(),
      client.reportHistogram(binWidth),
    ]);
    app.innerHTML = reportsView(rows, histogram, binWidth);
    document.getElementById("bin-width")?.addEventListener("change", (event) => {
      renderReports(Number((event.target as HTMLSelectElement).value));
    });
  } catch (error) {
    handleApiError(error);
  }
}

function route(): void {
  if (!client) return;
  const hash = window.location.hash || "#/queue";
  const recordMatch = hash.match(/^#\/record\/(.+)$/);
  if (recordMatch) {
    renderDetail(decodeURIComponent(recordMatch[1]));
    return;
  }
  if (hash === "#/reports") {
    renderReports();
    return;
  }
  renderQueue();
  stopPolling();
  pollTimer = window.setInterval(renderQueue, POLL_INTERVAL_MS);
}

function start(): void {
  const token = localStorage.getItem("token");
  if (!token) {
    requireLogin();
    return;
  }
  client = new ApiClient("", token);
  route();
}

document.getElementById("prefill-setting")?.addEventListener("change", (event) => {
  const on = (event.target as HTMLInputElement).checked;
  localStorage.setItem("prefillMachine", on ? "on" : "off");
});

window.addEventListener("hashchange", route);
start();
