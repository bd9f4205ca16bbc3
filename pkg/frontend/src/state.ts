/**
 * Pure session state machine for the labeling UI.
 *
 * Every transition returns a new session object; a refused transition
 * returns the input unchanged so callers can detect no-ops by identity.
 * Rendering and network effects live elsewhere.
 */

import type { Task } from "./api.js";

export type Phase =
  | { kind: "loading" }
  | { kind: "labeling"; task: Task; selected: string[]; submitting: boolean; notice: string | null }
  | { kind: "error"; message: string }
  | { kind: "done" };

export interface Session {
  workerId: string;
  symbols: string[];
  cursor: number;
  submitted: string[];
  phase: Phase;
}

export function startSession(workerId: string, symbols: string[]): Session {
  if (symbols.length === 0) throw new Error("no symbols to rotate through");
  return { workerId, symbols, cursor: 0, submitted: [], phase: { kind: "loading" } };
}

/** Symbol the next task should target; the rotation wraps around. */
export function nextSymbol(session: Session): string {
  const name = session.symbols[session.cursor % session.symbols.length];
  if (name === undefined) throw new Error("empty symbol rotation");
  return name;
}

export function advanceRotation(session: Session): Session {
  return { ...session, cursor: (session.cursor + 1) % session.symbols.length };
}

/** A freshly fetched task always starts with an empty selection. */
export function taskLoaded(session: Session, task: Task): Session {
  return {
    ...session,
    phase: { kind: "labeling", task, selected: [], submitting: false, notice: null },
  };
}

export function loadFailed(session: Session, message: string): Session {
  return { ...session, phase: { kind: "error", message } };
}

export function poolExhausted(session: Session): Session {
  return { ...session, phase: { kind: "done" } };
}

/** Flip one grid item; ids outside the task grid and mid-submit toggles are refused. */
export function toggleItem(session: Session, itemId: string): Session {
  const phase = session.phase;
  if (phase.kind !== "labeling" || phase.submitting) return session;
  if (!phase.task.items.some((item) => item.id === itemId)) return session;
  const selected = phase.selected.includes(itemId)
    ? phase.selected.filter((id) => id !== itemId)
    : [...phase.selected, itemId];
  return { ...session, phase: { ...phase, selected, notice: null } };
}

/**
 * Lock the current task for submission. Refused while a submit is in
 * flight and for tasks this session already submitted, so each rendered
 * task is sent at most once regardless of how often the button fires.
 */
export function beginSubmit(session: Session): Session {
  const phase = session.phase;
  if (phase.kind !== "labeling" || phase.submitting) return session;
  if (session.submitted.includes(phase.task.task_id)) return session;
  return { ...session, phase: { ...phase, submitting: true } };
}

export function submitAccepted(session: Session): Session {
  const phase = session.phase;
  if (phase.kind !== "labeling") return session;
  return {
    ...session,
    submitted: [...session.submitted, phase.task.task_id],
    phase: { kind: "loading" },
  };
}

/** Duplicate vote on the server; drop the task and move on to a fresh one. */
export function submitRejected(session: Session): Session {
  const phase = session.phase;
  if (phase.kind !== "labeling") return session;
  return {
    ...session,
    submitted: session.submitted.includes(phase.task.task_id)
      ? session.submitted
      : [...session.submitted, phase.task.task_id],
    phase: { kind: "loading" },
  };
}

/** Transport failure; keep the selection so the worker can retry. */
export function submitFailed(session: Session, message: string): Session {
  const phase = session.phase;
  if (phase.kind !== "labeling") return session;
  return { ...session, phase: { ...phase, submitting: false, notice: message } };
}

export function currentSelection(session: Session): string[] {
  return session.phase.kind === "labeling" ? [...session.phase.selected] : [];
}

export function currentTask(session: Session): Task | null {
  return session.phase.kind === "labeling" ? session.phase.task : null;
}
