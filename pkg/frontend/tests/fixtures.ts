import type { Task } from "../src/api.js";

export function makeTask(taskId: string, symbol: string, itemIds: string[]): Task {
  return {
    task_id: taskId,
    symbol,
    exemplars: {
      positive: [`/img/exemplar/${symbol}/positive/0.png`, `/img/exemplar/${symbol}/positive/1.png`],
      negative: [`/img/exemplar/${symbol}/negative/0.png`],
    },
    items: itemIds.map((id) => ({ id, url: `/img/${id}.png` })),
  };
}

export function gridIds(count: number): string[] {
  return Array.from({ length: count }, (_, k) => `i${String(k).padStart(4, "0")}`);
}
