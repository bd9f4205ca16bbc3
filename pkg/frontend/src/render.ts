/**
 * Pure view functions: session state in, HTML string out.
 *
 * No DOM access and no network, so the full screen for any state can be
 * asserted in tests by string comparison.
 */

import type { Task } from "./api.js";
import type { Session } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function renderBanner(): string {
  return '<p class="banner">Match the pattern, do not read.</p>';
}

function renderExemplarRow(urls: string[], kind: "positive" | "negative"): string {
  const label = kind === "positive" ? "Looks like this" : "Not like this";
  const cells = urls
    .map((url) => `<img class="exemplar ${kind}" src="${escapeHtml(url)}" alt="${kind} exemplar">`)
    .join("");
  return `<div class="exemplar-row ${kind}"><span class="exemplar-label">${label}</span>${cells}</div>`;
}

export function renderTaskHeader(task: Task): string {
  return [
    `<header class="task-header">`,
    `<h1>Find every <span class="symbol-name">${escapeHtml(task.symbol)}</span></h1>`,
    renderBanner(),
    renderExemplarRow(task.exemplars.positive, "positive"),
    renderExemplarRow(task.exemplars.negative, "negative"),
    `</header>`,
  ].join("");
}

export function renderGrid(task: Task, selected: string[]): string {
  const chosen = new Set(selected);
  const cells = task.items
    .map((item) => {
      const id = escapeHtml(item.id);
      const checked = chosen.has(item.id) ? " checked" : "";
      const marked = chosen.has(item.id) ? " marked" : "";
      return [
        `<label class="cell${marked}">`,
        `<input type="checkbox" data-item-id="${id}"${checked}>`,
        `<img src="${escapeHtml(item.url)}" alt="item ${id}">`,
        `</label>`,
      ].join("");
    })
    .join("");
  return `<div class="grid">${cells}</div>`;
}

function renderControls(selectedCount: number, submitting: boolean, notice: string | null): string {
  const disabled = submitting ? " disabled" : "";
  const busy = submitting ? "Submitting…" : "Submit";
  const parts = [
    `<div class="controls">`,
    `<span class="count">${selectedCount} selected</span>`,
    `<button id="submit" type="button"${disabled}>${busy}</button>`,
    `</div>`,
  ];
  if (notice !== null) {
    parts.push(`<p class="notice">${escapeHtml(notice)} <button id="retry" type="button">Retry</button></p>`);
  }
  return parts.join("");
}

export function renderLoading(): string {
  return `<main class="screen loading"><p>Loading task…</p></main>`;
}

export function renderDone(): string {
  return [
    `<main class="screen done">`,
    `<h1>No more tasks</h1>`,
    `<p>Every image in the pool has been labeled. Thank you!</p>`,
    `</main>`,
  ].join("");
}

export function renderError(message: string): string {
  return [
    `<main class="screen error">`,
    `<p class="notice">${escapeHtml(message)}</p>`,
    `<button id="retry" type="button">Retry</button>`,
    `</main>`,
  ].join("");
}

export function renderLabeling(
  task: Task,
  selected: string[],
  submitting: boolean,
  notice: string | null
): string {
  return [
    `<main class="screen labeling">`,
    renderTaskHeader(task),
    renderGrid(task, selected),
    renderControls(selected.length, submitting, notice),
    `</main>`,
  ].join("");
}

export function renderApp(session: Session): string {
  const phase = session.phase;
  switch (phase.kind) {
    case "loading":
      return renderLoading();
    case "labeling":
      return renderLabeling(phase.task, phase.selected, phase.submitting, phase.notice);
    case "error":
      return renderError(phase.message);
    case "done":
      return renderDone();
  }
}
