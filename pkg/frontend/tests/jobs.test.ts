import { describe, expect, it } from "vitest";

import type { Job } from "../src/api.js";
import { formatSeconds, isActive, jobRow, rerunAffordance } from "../src/jobs.js";

function job(overrides: Partial<Job> = {}): Job {
  return {
    id: 7,
    owner: "ann",
    text: "SELECT id FROM sky.photo_obj INTO faint",
    tier: "public",
    elapsed_s: 90,
    row_cap: 1000,
    doublings_used: 0,
    state: "queued",
    submitted: 1,
    started: null,
    finished: null,
    target: "faint",
    error: "",
    rows: null,
    truncated: false,
    ...overrides,
  };
}

describe("rerunAffordance", () => {
  it("is disabled for jobs that did not exceed quota", () => {
    for (const state of ["queued", "running", "succeeded", "failed", "cancelled"] as const) {
      const a = rerunAffordance(job({ state }));
      expect(a.enabled).toBe(false);
      expect(a.reason).toContain(state);
    }
  });

  it("is enabled for a quota-exceeded job with doublings left", () => {
    const a = rerunAffordance(job({ state: "quota_exceeded", elapsed_s: 90 }));
    expect(a.enabled).toBe(true);
    expect(a.reason).toBeNull();
    expect(a.label).toContain("3 min"); // shows the doubled budget
    expect(a.label).toContain("1 of 3");
  });

  it("is disabled with a reason once the doubling limit is reached", () => {
    const a = rerunAffordance(
      job({ state: "quota_exceeded", elapsed_s: 720, doublings_used: 3 }),
    );
    expect(a.enabled).toBe(false);
    expect(a.reason).toBe("doubling limit reached (3 of 3 used)");
  });
});

describe("jobRow", () => {
  it("summarizes a successful deposit", () => {
    const row = jobRow(
      job({ state: "succeeded", rows: 120, started: 2, finished: 3 }),
    );
    expect(row.outcome).toBe("120 rows → MyDB table faint");
    expect(row.rerun.enabled).toBe(false);
  });

  it("shows the failure text for failed jobs", () => {
    const row = jobRow(job({ state: "failed", error: "no client for archive 'x'" }));
    expect(row.outcome).toBe("no client for archive 'x'");
  });

  it("shows the breached budget for quota-exceeded jobs", () => {
    const row = jobRow(job({ state: "quota_exceeded", elapsed_s: 360 }));
    expect(row.outcome).toBe("quota exceeded at 6 min");
  });
});

describe("helpers", () => {
  it("formats seconds, minutes, and hours", () => {
    expect(formatSeconds(45)).toBe("45 s");
    expect(formatSeconds(720)).toBe("12 min");
    expect(formatSeconds(5400)).toBe("1.5 h");
  });

  it("treats queued and running jobs as active", () => {
    expect(isActive(job({ state: "queued" }))).toBe(true);
    expect(isActive(job({ state: "running" }))).toBe(true);
    expect(isActive(job({ state: "succeeded" }))).toBe(false);
  });
});
