/** Typed HTTP client for the federation portal. All communication goes
 * through the portal's JSON endpoints; nothing here knows about the server's
 * internals. */

export type ColumnKind = "integer" | "real" | "text" | "flag";

export interface ColumnMeta {
  name: string;
  kind: ColumnKind;
  unit: string;
  ucd: string;
  description: string;
}

export type Cell = number | string;

/** One tabular response, successful or not; failures carry a machine code. */
export interface TabularDocument {
  status: "ok" | "error";
  truncated: boolean;
  code: string;
  message: string;
  columns: ColumnMeta[];
  rows: Cell[][];
}

export type JobState =
  | "queued"
  | "running"
  | "succeeded"
  | "failed"
  | "cancelled"
  | "quota_exceeded";

export interface Job {
  id: number;
  owner: string;
  text: string;
  tier: string;
  elapsed_s: number;
  row_cap: number;
  doublings_used: number;
  state: JobState;
  submitted: number;
  started: number | null;
  finished: number | null;
  target: string | null;
  error: string;
  rows: number | null;
  truncated: boolean;
}

export interface ServiceRecord {
  name: string;
  endpoint: string;
  registered_at: number;
}

export interface MyDbSummary {
  owner: string;
  tables: string[];
  used_bytes: number;
  quota_bytes: number;
}

export interface Credentials {
  username: string;
  secret: string;
}

/** A non-2xx portal response ({error, message} body). */
export class PortalApiError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
    this.name = "PortalApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface PortalApiOptions {
  credentials?: Credentials;
  /** Injectable for tests; defaults to the global fetch. */
  fetch?: FetchLike;
}

export class PortalApi {
  private readonly base: string;
  private readonly credentials?: Credentials;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, options: PortalApiOptions = {}) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.credentials = options.credentials;
    this.fetchImpl = options.fetch ?? ((input, init) => fetch(input, init));
  }

  private headers(json: boolean): Record<string, string> {
    const h: Record<string, string> = {};
    if (json) h["content-type"] = "application/json";
    if (this.credentials) {
      h["x-username"] = this.credentials.username;
      h["x-secret"] = this.credentials.secret;
    }
    return h;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const r = await this.fetchImpl(this.base + path, init);
    const body = await r.json();
    if (!r.ok) {
      throw new PortalApiError(
        String(body?.error ?? "http"),
        String(body?.message ?? `HTTP ${r.status}`),
        r.status,
      );
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.json<T>(path, {
      method: "POST",
      headers: this.headers(true),
      body: JSON.stringify(payload),
    });
  }

  private get<T>(path: string): Promise<T> {
    return this.json<T>(path, { headers: this.headers(false) });
  }

  // -- queries ---------------------------------------------------------------

  /** Synchronous federated query; service failures come back as error
   * documents, never as exceptions. */
  query(text: string, tier = "public"): Promise<TabularDocument> {
    return this.post<TabularDocument>("/query", { text, tier, format: "json" });
  }

  coneSearch(
    archive: string,
    ra: number,
    dec: number,
    sr: number,
    table?: string,
  ): Promise<TabularDocument> {
    const params = new URLSearchParams({
      archive,
      ra: String(ra),
      dec: String(dec),
      sr: String(sr),
      format: "json",
    });
    if (table) params.set("table", table);
    return this.get<TabularDocument>(`/cone?${params}`);
  }

  /** Raw cutout bytes (a 16-bit binary PGM) for client-side rendering. */
  async cutout(
    archive: string,
    ra: number,
    dec: number,
    width: number,
    height: number,
    scale: number,
  ): Promise<ArrayBuffer> {
    const params = new URLSearchParams({
      archive,
      ra: String(ra),
      dec: String(dec),
      width: String(width),
      height: String(height),
      scale: String(scale),
    });
    const r = await this.fetchImpl(`${this.base}/cutout?${params}`, {
      headers: this.headers(false),
    });
    if (!r.ok) throw new PortalApiError("http", `HTTP ${r.status}`, r.status);
    return r.arrayBuffer();
  }

  // -- jobs --------------------------------------------------------------------

  submitJob(text: string, tier = "public"): Promise<Job> {
    return this.post<Job>("/jobs/submit", { text, tier });
  }

  jobStatus(id: number): Promise<Job> {
    return this.get<Job>(`/jobs/${id}`);
  }

  rerunJob(id: number): Promise<Job> {
    return this.post<Job>(`/jobs/${id}/rerun`, {});
  }

  listJobs(owner?: string, state?: JobState): Promise<Job[]> {
    const params = new URLSearchParams();
    if (owner) params.set("owner", owner);
    if (state) params.set("state", state);
    const qs = params.toString();
    return this.get<Job[]>(`/jobs${qs ? `?${qs}` : ""}`);
  }

  // -- mydb --------------------------------------------------------------------

  mydbCreate(quotaBytes?: number): Promise<{ owner: string; quota_bytes: number }> {
    return this.post("/mydb/create", { quota_bytes: quotaBytes ?? null });
  }

  mydbList(owner?: string): Promise<MyDbSummary> {
    const qs = owner ? `?owner=${encodeURIComponent(owner)}` : "";
    return this.get<MyDbSummary>(`/mydb/list${qs}`);
  }

  mydbFetch(table: string, owner?: string): Promise<TabularDocument> {
    const params = new URLSearchParams({ table, format: "json" });
    if (owner) params.set("owner", owner);
    return this.get<TabularDocument>(`/mydb/fetch?${params}`);
  }

  mydbUpload(
    table: string,
    text: string,
    delimiter = ",",
    owner?: string,
  ): Promise<{ table: string; rows: number; bytes: number }> {
    return this.post("/mydb/upload", {
      table,
      text,
      delimiter,
      owner: owner ?? null,
    });
  }

  // -- registry -------------------------------------------------------------------

  registryList(): Promise<ServiceRecord[]> {
    return this.get<ServiceRecord[]>("/registry/list");
  }
}
