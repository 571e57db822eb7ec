/**
 * Side-by-side forced-choice UI. One active session per tab; the id is
 * kept in sessionStorage so a reload resumes from the server state.
 */

import {
  ApiError,
  ComparisonView,
  SessionClient,
  formatProgress,
} from "./session.js";

const STORAGE_KEY = "calibration-session-id";

const $ = (id: string): HTMLElement => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
};

let client: SessionClient | null = null;
let current: ComparisonView | null = null;
let submitting = false;

function show(view: "start" | "compare" | "result"): void {
  for (const name of ["start", "compare", "result"]) {
    $(`view-${name}`).hidden = name !== view;
  }
}

function setImage(id: string, pngBase64: string): void {
  ($(id) as HTMLImageElement).src = `data:image/png;base64,${pngBase64}`;
}

async function refresh(): Promise<void> {
  if (!client) return;
  let comparison;
  try {
    comparison = await client.getComparison();
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) {
      // stale id from a previous server run
      sessionStorage.removeItem(STORAGE_KEY);
      client = null;
      show("start");
      return;
    }
    throw err;
  }
  if (comparison.done) {
    await showResult();
    return;
  }
  current = comparison;
  $("param-name").textContent = comparison.param;
  $("progress").textContent = formatProgress(comparison);
  setImage("stimulus-target", comparison.stimulus_target);
  setImage("stimulus-reference", comparison.stimulus_reference);
  setImage("proxy-a", comparison.proxy_a);
  setImage("proxy-b", comparison.proxy_b);
  show("compare");
}

async function choose(side: "a" | "b"): Promise<void> {
  if (!client || !current || submitting) return;
  submitting = true;
  const value = side === "a" ? current.option_a : current.option_b;
  try {
    await client.submitChoice(current, value);
  } catch (err) {
    // duplicate or out-of-order: fall through and resync from the server
    if (!(err instanceof ApiError && err.retryable)) throw err;
  } finally {
    current = null;
    submitting = false;
  }
  await refresh();
}

async function showResult(): Promise<void> {
  if (!client) return;
  const [result, raw] = [await client.getResult(), await client.resultText()];
  const list = $("result-values");
  list.innerHTML = "";
  for (const [name, value] of Object.entries(result.values)) {
    const row = document.createElement("li");
    row.textContent = `${name}: ${value}`;
    list.appendChild(row);
  }
  const download = $("download") as HTMLAnchorElement;
  download.href = URL.createObjectURL(
    new Blob([raw], { type: "application/json" }),
  );
  download.download = "calibration-result.json";
  show("result");
}

async function start(): Promise<void> {
  client = await SessionClient.create("");
  sessionStorage.setItem(STORAGE_KEY, client.sessionId);
  await refresh();
}

function init(): void {
  $("start-button").addEventListener("click", () => void start());
  $("choose-a").addEventListener("click", () => void choose("a"));
  $("choose-b").addEventListener("click", () => void choose("b"));
  document.addEventListener("keydown", (ev) => {
    if (ev.key === "ArrowLeft") void choose("a");
    if (ev.key === "ArrowRight") void choose("b");
  });

  const existing = sessionStorage.getItem(STORAGE_KEY);
  if (existing) {
    client = SessionClient.resume("", existing);
    void refresh();
  } else {
    show("start");
  }
}

init();
