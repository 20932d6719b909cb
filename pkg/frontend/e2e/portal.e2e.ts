/** Scripted end-to-end session against a live Python stack (archive node +
 * federation portal), exercising the same modules the browser app uses. */

import { spawn, type ChildProcess } from "node:child_process";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { PortalApi, type Job } from "../src/api.js";
import { gridModel, sortRows } from "../src/grid.js";
import { jobRow, rerunAffordance } from "../src/jobs.js";
import { mydbModel } from "../src/mydb.js";
import { decodePgm, toRgba } from "../src/pgm.js";
import { caretSnippet, parseSyntaxError } from "../src/syntax.js";

const NODE_PORT = 8871;
const PORTAL_PORT = 8872;
const PORTAL_URL = `http://127.0.0.1:${PORTAL_PORT}`;

let stack: ChildProcess;

async function untilState(
  api: PortalApi,
  id: number,
  done: (job: Job) => boolean,
  timeoutMs = 30_000,
): Promise<Job> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    const job = await api.jobStatus(id);
    if (done(job)) return job;
    if (Date.now() > deadline) throw new Error(`job ${id} stuck in ${job.state}`);
    await new Promise((r) => setTimeout(r, 150));
  }
}

beforeAll(async () => {
  const here = dirname(fileURLToPath(import.meta.url));
  stack = spawn("python3", [join(here, "portal_stack.py"), String(NODE_PORT), String(PORTAL_PORT)], {
    stdio: ["ignore", "pipe", "inherit"],
  });
  await new Promise<void>((resolve, reject) => {
    const timer = setTimeout(() => reject(new Error("stack never became ready")), 120_000);
    stack.stdout!.on("data", (chunk: Buffer) => {
      if (chunk.toString().includes("READY")) {
        clearTimeout(timer);
        resolve();
      }
    });
    stack.on("exit", (code) => reject(new Error(`stack exited early (${code})`)));
  });
});

afterAll(() => {
  stack?.kill("SIGKILL");
});

describe("scripted portal session", () => {
  const anon = new PortalApi(PORTAL_URL);
  const ann = new PortalApi(PORTAL_URL, {
    credentials: { username: "ann", secret: "s3cret" },
  });

  it("lists the registered archive", async () => {
    const records = await anon.registryList();
    expect(records.map((r) => r.name)).toEqual(["sky"]);
  });

  it("runs a synchronous query and fills a sortable grid", async () => {
    const doc = await anon.query(
      "SELECT id, ra, dec, mag_r FROM sky.photo_obj WHERE CONE(180.0, 0.0, 1.0) LIMIT 40",
    );
    expect(doc.status).toBe("ok");
    const model = gridModel(doc, null);
    expect(model.rows.length).toBeGreaterThan(0);
    expect(model.headers.map((h) => h.name)).toEqual(["id", "ra", "dec", "mag_r"]);
    expect(model.emptyNotice).toBeNull();

    const byMag = sortRows(doc, { column: 3, direction: "asc" });
    const mags = byMag.map((r) => Number(r[3]));
    expect([...mags].sort((a, b) => a - b)).toEqual(mags);
  });

  it("flags truncation when the row cap bites", async () => {
    const doc = await anon.query("SELECT id FROM sky.photo_obj", "public");
    expect(doc.truncated).toBe(true);
    expect(doc.rows.length).toBe(1000);
    expect(gridModel(doc, null).truncationBanner).toContain("1000 rows");
  });

  it("reports an empty result with a zero-row notice", async () => {
    const doc = await anon.query(
      "SELECT id FROM sky.photo_obj WHERE CONE(10.0, 60.0, 0.1)",
    );
    expect(doc.status).toBe("ok");
    expect(gridModel(doc, null).emptyNotice).toBe("0 rows returned.");
  });

  it("places a caret at the reported syntax-error position", async () => {
    const text = "SELECT id FROM sky.photo_obj WHERE\n  mag_r <<";
    const doc = await anon.query(text);
    expect(doc.status).toBe("error");
    expect(doc.code).toBe("syntax");
    const pos = parseSyntaxError(doc.message)!;
    expect(pos.line).toBe(2);
    const caretLine = caretSnippet(text, pos).split("\n")[1]!;
    expect(caretLine.indexOf("^")).toBe(pos.column - 1);
  });

  it("runs the full quota-breach → doubled rerun → MyDB flow", async () => {
    await ann.mydbCreate();

    let job = await ann.submitJob(
      "SELECT id, mag_r FROM sky.photo_obj LIMIT 50 INTO e2e_faint",
      "public",
    );
    expect(job.elapsed_s).toBe(90);

    job = await untilState(ann, job.id, (j) => j.state === "quota_exceeded");
    const beforeRerun = rerunAffordance(job);
    expect(beforeRerun.enabled).toBe(true);
    expect(beforeRerun.label).toContain("3 min");

    job = await ann.rerunJob(job.id);
    job = await untilState(
      ann,
      job.id,
      (j) => j.state === "succeeded" || j.state === "failed",
    );
    expect(job.state).toBe("succeeded");
    expect(job.elapsed_s).toBe(180);
    expect(job.doublings_used).toBe(1);
    expect(jobRow(job).outcome).toBe("50 rows (truncated) → MyDB table e2e_faint");
    expect(rerunAffordance(job).enabled).toBe(false);

    const summary = mydbModel(await ann.mydbList());
    expect(summary.tables).toContain("e2e_faint");
    const table = await ann.mydbFetch("e2e_faint");
    expect(table.status).toBe("ok");
    expect(table.rows.length).toBe(50);
    expect(gridModel(table, null).headers.map((h) => h.name)).toEqual(["id", "mag_r"]);
  });

  it("fetches a cutout and converts the PGM client-side", async () => {
    const buffer = await anon.cutout("sky", 180.0, 0.0, 64, 64, 0.002);
    const image = decodePgm(buffer);
    expect(image.width).toBe(64);
    expect(image.height).toBe(64);
    const rgba = toRgba(image);
    expect(rgba.length).toBe(64 * 64 * 4);
    expect(rgba[3]).toBe(255); // opaque
  });
});
