import { describe, expect, it, vi } from "vitest";

import { PortalApi, PortalApiError, type TabularDocument } from "../src/api.js";

const OK_DOC: TabularDocument = {
  status: "ok",
  truncated: false,
  code: "",
  message: "",
  columns: [
    { name: "id", kind: "integer", unit: "", ucd: "meta.id", description: "" },
  ],
  rows: [[1], [2]],
};

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

describe("PortalApi", () => {
  it("posts queries with credentials and json format", async () => {
    const fetchMock = vi.fn(async () => jsonResponse(OK_DOC));
    const api = new PortalApi("http://portal/", {
      credentials: { username: "ann", secret: "s3cret" },
      fetch: fetchMock,
    });
    const doc = await api.query("SELECT id FROM sky.photo_obj", "public");
    expect(doc).toEqual(OK_DOC);
    expect(fetchMock).toHaveBeenCalledTimes(1);
    const [url, init] = fetchMock.mock.calls[0] as unknown as [string, RequestInit];
    expect(url).toBe("http://portal/query");
    expect(init.method).toBe("POST");
    const headers = init.headers as Record<string, string>;
    expect(headers["x-username"]).toBe("ann");
    expect(headers["x-secret"]).toBe("s3cret");
    expect(JSON.parse(String(init.body))).toEqual({
      text: "SELECT id FROM sky.photo_obj",
      tier: "public",
      format: "json",
    });
  });

  it("returns error documents without throwing", async () => {
    const errDoc = {
      ...OK_DOC,
      status: "error",
      code: "syntax",
      message: "line 1, column 1: unexpected 'SELEC' (expected SELECT)",
      columns: [],
      rows: [],
    };
    const api = new PortalApi("http://portal", { fetch: async () => jsonResponse(errDoc) });
    const doc = await api.query("SELEC x");
    expect(doc.status).toBe("error");
    expect(doc.code).toBe("syntax");
  });

  it("throws PortalApiError with the machine code on non-2xx", async () => {
    const api = new PortalApi("http://portal", {
      fetch: async () =>
        jsonResponse({ error: "auth", message: "bad credentials" }, 401),
    });
    await expect(api.submitJob("SELECT id FROM sky.photo_obj")).rejects.toMatchObject({
      name: "PortalApiError",
      code: "auth",
      status: 401,
      message: "bad credentials",
    });
  });

  it("builds cone-search urls from parameters", async () => {
    const fetchMock = vi.fn(async () => jsonResponse(OK_DOC));
    const api = new PortalApi("http://portal", { fetch: fetchMock });
    await api.coneSearch("sky", 180, -1.25, 0.5, "photo_obj");
    const [url] = fetchMock.mock.calls[0] as unknown as [string];
    const parsed = new URL(url);
    expect(parsed.pathname).toBe("/cone");
    expect(parsed.searchParams.get("archive")).toBe("sky");
    expect(parsed.searchParams.get("ra")).toBe("180");
    expect(parsed.searchParams.get("dec")).toBe("-1.25");
    expect(parsed.searchParams.get("sr")).toBe("0.5");
    expect(parsed.searchParams.get("table")).toBe("photo_obj");
  });

  it("fetches cutouts as raw bytes", async () => {
    const payload = new Uint8Array([0x50, 0x35, 0x0a]); // "P5\n"
    const api = new PortalApi("http://portal", {
      fetch: async () => new Response(payload),
    });
    const buf = await api.cutout("sky", 180, 0, 64, 64, 0.001);
    expect(new Uint8Array(buf)).toEqual(payload);
  });

  it("reports non-2xx cutout responses as errors", async () => {
    const api = new PortalApi("http://portal", {
      fetch: async () => new Response("gone", { status: 502 }),
    });
    await expect(api.cutout("sky", 180, 0, 64, 64, 0.001)).rejects.toBeInstanceOf(
      PortalApiError,
    );
  });

  it("filters job listings by owner and state", async () => {
    const fetchMock = vi.fn(async () => jsonResponse([]));
    const api = new PortalApi("http://portal", { fetch: fetchMock });
    await api.listJobs("ann", "quota_exceeded");
    const [url] = fetchMock.mock.calls[0] as unknown as [string];
    expect(url).toBe("http://portal/jobs?owner=ann&state=quota_exceeded");
  });
});
