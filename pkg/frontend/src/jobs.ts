/** View-model for the batch-job dashboard, including the rerun-with-doubled-
 * quota affordance and its disabled states. */

import type { Job } from "./api.js";

export const MAX_DOUBLINGS = 3;

export interface RerunAffordance {
  enabled: boolean;
  /** Why the button is disabled; null when enabled. */
  reason: string | null;
  label: string;
}

export function rerunAffordance(job: Job, maxDoublings = MAX_DOUBLINGS): RerunAffordance {
  if (job.state !== "quota_exceeded") {
    return {
      enabled: false,
      reason: `only quota-exceeded jobs can be re-run (job is ${job.state})`,
      label: "Re-run with doubled quota",
    };
  }
  if (job.doublings_used >= maxDoublings) {
    return {
      enabled: false,
      reason: `doubling limit reached (${job.doublings_used} of ${maxDoublings} used)`,
      label: "Re-run with doubled quota",
    };
  }
  const next = job.elapsed_s * 2;
  return {
    enabled: true,
    reason: null,
    label: `Re-run with doubled quota (${formatSeconds(next)}, ${
      job.doublings_used + 1
    } of ${maxDoublings})`,
  };
}

export function formatSeconds(s: number): string {
  if (s >= 3600) return `${(s / 3600).toFixed(1)} h`;
  if (s >= 60) return `${(s / 60).toFixed(0)} min`;
  return `${s.toFixed(0)} s`;
}

export interface JobRowModel {
  id: number;
  state: Job["state"];
  summary: string;
  budget: string;
  outcome: string;
  rerun: RerunAffordance;
}

export function jobRow(job: Job): JobRowModel {
  const text = job.text.length > 60 ? `${job.text.slice(0, 57)}…` : job.text;
  let outcome = "";
  if (job.state === "succeeded") {
    outcome = `${job.rows ?? 0} rows${job.truncated ? " (truncated)" : ""}${
      job.target ? ` → MyDB table ${job.target}` : ""
    }`;
  } else if (job.state === "failed") {
    outcome = job.error;
  } else if (job.state === "quota_exceeded") {
    outcome = `quota exceeded at ${formatSeconds(job.elapsed_s)}`;
  }
  return {
    id: job.id,
    state: job.state,
    summary: `#${job.id} [${job.tier}] ${text}`,
    budget: `${formatSeconds(job.elapsed_s)} / ${job.row_cap.toLocaleString()} rows`,
    outcome,
    rerun: rerunAffordance(job),
  };
}

/** True while a job can still change state (drives dashboard polling). */
export function isActive(job: Job): boolean {
  return job.state === "queued" || job.state === "running";
}
