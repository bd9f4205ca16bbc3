/** DOM glue: wires the pure state machine and views to the live page. */

import { createTask, fetchSymbols, submitVotes } from "./api.js";
import { renderApp } from "./render.js";
import {
  advanceRotation,
  beginSubmit,
  currentSelection,
  currentTask,
  loadFailed,
  nextSymbol,
  poolExhausted,
  startSession,
  submitAccepted,
  submitFailed,
  submitRejected,
  taskLoaded,
  toggleItem,
  type Session,
} from "./state.js";

const WORKER_KEY = "scriptura-worker-id";

/** One worker identity per browser tab, stable across task loads. */
function workerId(): string {
  const existing = sessionStorage.getItem(WORKER_KEY);
  if (existing !== null) return existing;
  const fresh = `web-${Math.random().toString(36).slice(2, 10)}`;
  sessionStorage.setItem(WORKER_KEY, fresh);
  return fresh;
}

const rootOrNull = document.getElementById("app");
if (rootOrNull === null) throw new Error("missing #app container");
const root: HTMLElement = rootOrNull;

let session: Session | null = null;

function update(next: Session): void {
  session = next;
  root.innerHTML = renderApp(next);
}

async function loadNextTask(current: Session): Promise<void> {
  update({ ...current, phase: { kind: "loading" } });
  try {
    const outcome = await createTask(nextSymbol(current));
    if (outcome === "exhausted") {
      update(poolExhausted(current));
      return;
    }
    update(taskLoaded(advanceRotation(current), outcome));
  } catch (err) {
    update(loadFailed(current, `Could not load a task: ${String(err)}`));
  }
}

async function submitCurrent(current: Session): Promise<void> {
  const locked = beginSubmit(current);
  if (locked === current) return;
  update(locked);
  const task = currentTask(locked);
  if (task === null) return;
  try {
    const outcome = await submitVotes(task.task_id, locked.workerId, currentSelection(locked));
    const after = outcome === "accepted" ? submitAccepted(locked) : submitRejected(locked);
    update(after);
    await loadNextTask(after);
  } catch (err) {
    update(submitFailed(locked, `Submit failed, selection kept: ${String(err)}`));
  }
}

root.addEventListener("change", (event) => {
  const target = event.target as HTMLElement | null;
  const id = target?.getAttribute("data-item-id");
  if (session !== null && id !== null && id !== undefined) {
    update(toggleItem(session, id));
  }
});

root.addEventListener("click", (event) => {
  const target = event.target as HTMLElement | null;
  if (session === null || target === null) return;
  if (target.id === "submit") void submitCurrent(session);
  if (target.id === "retry") {
    if (session.phase.kind === "labeling") void submitCurrent(session);
    else void loadNextTask(session);
  }
});

async function boot(): Promise<void> {
  try {
    const symbols = await fetchSymbols();
    const labelable = symbols.filter((s) => s.char !== "").map((s) => s.name);
    const fresh = startSession(workerId(), labelable);
    await loadNextTask(fresh);
  } catch (err) {
    root.innerHTML = renderApp({
      workerId: "unassigned",
      symbols: ["none"],
      cursor: 0,
      submitted: [],
      phase: { kind: "error", message: `Could not reach the labeling service: ${String(err)}` },
    });
    // Retry wiring needs a session; reload the page instead.
    document.getElementById("retry")?.addEventListener("click", () => location.reload());
  }
}

void boot();
