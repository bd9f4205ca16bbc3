/** Typed client for the labeling service HTTP API. */

export interface ExemplarUrls {
  positive: string[];
  negative: string[];
}

export interface SymbolInfo {
  name: string;
  char: string;
  exemplars: ExemplarUrls;
}

export interface GridItem {
  id: string;
  url: string;
}

export interface Task {
  task_id: string;
  symbol: string;
  exemplars: ExemplarUrls;
  items: GridItem[];
}

export interface PoolStatus {
  total_items: number;
  finalized: number;
  pending: number;
  votes: number;
  tasks: number;
  submissions: number;
}

export type SubmitOutcome = "accepted" | "duplicate";
export type CreateOutcome = Task | "exhausted";

async function readError(res: Response): Promise<string> {
  try {
    const body = (await res.json()) as { detail?: string };
    return body.detail ?? res.statusText;
  } catch {
    return res.statusText;
  }
}

export async function fetchSymbols(base = ""): Promise<SymbolInfo[]> {
  const res = await fetch(`${base}/api/symbols`);
  if (!res.ok) throw new Error(`symbols: ${await readError(res)}`);
  return (await res.json()) as SymbolInfo[];
}

/** Request a fresh task for one symbol; "exhausted" when the pool has no open items. */
export async function createTask(symbol: string, base = ""): Promise<CreateOutcome> {
  const res = await fetch(`${base}/api/tasks?symbol=${encodeURIComponent(symbol)}`, {
    method: "POST",
  });
  if (res.status === 409) return "exhausted";
  if (!res.ok) throw new Error(`create task: ${await readError(res)}`);
  return (await res.json()) as Task;
}

export async function fetchTask(taskId: string, base = ""): Promise<Task> {
  const res = await fetch(`${base}/api/tasks/${encodeURIComponent(taskId)}`);
  if (!res.ok) throw new Error(`fetch task: ${await readError(res)}`);
  return (await res.json()) as Task;
}

/** Submit one worker's selection; "duplicate" when this worker already voted on the task. */
export async function submitVotes(
  taskId: string,
  workerId: string,
  selected: string[],
  base = ""
): Promise<SubmitOutcome> {
  const res = await fetch(`${base}/api/tasks/${encodeURIComponent(taskId)}/votes`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ worker_id: workerId, selected }),
  });
  if (res.status === 409) return "duplicate";
  if (!res.ok) throw new Error(`submit votes: ${await readError(res)}`);
  return "accepted";
}

export async function poolStatus(base = ""): Promise<PoolStatus> {
  const res = await fetch(`${base}/api/pool/status`);
  if (!res.ok) throw new Error(`pool status: ${await readError(res)}`);
  return (await res.json()) as PoolStatus;
}
