/** Browser entry point: wires the API client and view-models to the DOM.
 * All state lives in this module; the view-model modules stay pure. */

import { PortalApi, type Job, type TabularDocument } from "./api.js";
import { gridModel, toggleSort, type SortState } from "./grid.js";
import { isActive, jobRow } from "./jobs.js";
import { mydbModel } from "./mydb.js";
import { decodePgm, toRgba } from "./pgm.js";
import { caretSnippet, parseSyntaxError } from "./syntax.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function api(): PortalApi {
  const username = el<HTMLInputElement>("username").value.trim();
  const secret = el<HTMLInputElement>("secret").value;
  return new PortalApi(el<HTMLInputElement>("portal-url").value.trim() || "", {
    credentials: username ? { username, secret } : undefined,
  });
}

// -- result grid -----------------------------------------------------------------

let currentDoc: TabularDocument | null = null;
let currentSort: SortState | null = null;

function renderGrid(): void {
  const host = el<HTMLDivElement>("results");
  host.textContent = "";
  if (!currentDoc) return;

  if (currentDoc.status === "error") {
    const box = document.createElement("div");
    box.className = "error-box";
    const pos = currentDoc.code === "syntax" ? parseSyntaxError(currentDoc.message) : null;
    if (pos) {
      const pre = document.createElement("pre");
      pre.textContent = caretSnippet(el<HTMLTextAreaElement>("query-text").value, pos);
      box.append(`Syntax error at line ${pos.line}, column ${pos.column}:`, pre);
    } else {
      box.textContent = `${currentDoc.code}: ${currentDoc.message}`;
    }
    host.append(box);
    return;
  }

  const model = gridModel(currentDoc, currentSort);
  if (model.truncationBanner) {
    const banner = document.createElement("div");
    banner.className = "banner";
    banner.textContent = model.truncationBanner;
    host.append(banner);
  }
  if (model.emptyNotice) {
    const notice = document.createElement("div");
    notice.className = "notice";
    notice.textContent = model.emptyNotice;
    host.append(notice);
    return;
  }

  const table = document.createElement("table");
  const thead = table.createTHead();
  const headRow = thead.insertRow();
  model.headers.forEach((h, i) => {
    const th = document.createElement("th");
    const arrow =
      model.sort?.column === i ? (model.sort.direction === "asc" ? " ▲" : " ▼") : "";
    th.textContent = h.unit ? `${h.name} (${h.unit})${arrow}` : `${h.name}${arrow}`;
    th.addEventListener("click", () => {
      currentSort = toggleSort(currentSort, i);
      renderGrid();
    });
    headRow.append(th);
  });
  const tbody = table.createTBody();
  for (const row of model.rows) {
    const tr = tbody.insertRow();
    for (const cell of row) tr.insertCell().textContent = String(cell);
  }
  host.append(table);
}

async function runQuery(): Promise<void> {
  const text = el<HTMLTextAreaElement>("query-text").value;
  const tier = el<HTMLSelectElement>("query-tier").value;
  currentSort = null;
  currentDoc = await api().query(text, tier);
  renderGrid();
}

// -- jobs ------------------------------------------------------------------------

async function refreshJobs(): Promise<void> {
  const username = el<HTMLInputElement>("username").value.trim();
  const jobs: Job[] = await api().listJobs(username || undefined);
  const host = el<HTMLDivElement>("jobs");
  host.textContent = "";
  for (const job of jobs) {
    const row = jobRow(job);
    const div = document.createElement("div");
    div.className = `job job-${row.state}`;
    div.append(`${row.summary} — ${row.state} — ${row.budget}`);
    if (row.outcome) div.append(` — ${row.outcome}`);
    const button = document.createElement("button");
    button.textContent = row.rerun.label;
    button.disabled = !row.rerun.enabled;
    if (row.rerun.reason) button.title = row.rerun.reason;
    button.addEventListener("click", async () => {
      await api().rerunJob(job.id);
      await refreshJobs();
    });
    div.append(" ", button);
    host.append(div);
  }
  if (jobs.some(isActive)) setTimeout(refreshJobs, 1500);
}

async function submitJob(): Promise<void> {
  const text = el<HTMLTextAreaElement>("query-text").value;
  const tier = el<HTMLSelectElement>("query-tier").value;
  await api().submitJob(text, tier);
  await refreshJobs();
}

// -- mydb ------------------------------------------------------------------------

async function refreshMyDb(): Promise<void> {
  const host = el<HTMLDivElement>("mydb");
  host.textContent = "";
  const model = mydbModel(await api().mydbList());
  const usage = document.createElement("div");
  usage.textContent = `${model.owner}: ${model.usageText}`;
  if (model.nearQuota) usage.className = "near-quota";
  host.append(usage);
  for (const name of model.tables) {
    const link = document.createElement("a");
    link.href = "#";
    link.textContent = name;
    link.addEventListener("click", async (event) => {
      event.preventDefault();
      currentSort = null;
      currentDoc = await api().mydbFetch(name);
      renderGrid();
    });
    const div = document.createElement("div");
    div.append(link);
    host.append(div);
  }
}

// -- cutout ----------------------------------------------------------------------

async function showCutout(): Promise<void> {
  const archive = el<HTMLInputElement>("cutout-archive").value.trim();
  const ra = Number(el<HTMLInputElement>("cutout-ra").value);
  const dec = Number(el<HTMLInputElement>("cutout-dec").value);
  const size = Number(el<HTMLInputElement>("cutout-size").value);
  const scale = Number(el<HTMLInputElement>("cutout-scale").value);
  const buffer = await api().cutout(archive, ra, dec, size, size, scale);
  const image = decodePgm(buffer);
  const canvas = el<HTMLCanvasElement>("cutout-canvas");
  canvas.width = image.width;
  canvas.height = image.height;
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("no 2d canvas context");
  ctx.putImageData(new ImageData(toRgba(image), image.width, image.height), 0, 0);
}

// -- boot ------------------------------------------------------------------------

export function boot(): void {
  el<HTMLButtonElement>("run-query").addEventListener("click", () => void runQuery());
  el<HTMLButtonElement>("submit-job").addEventListener("click", () => void submitJob());
  el<HTMLButtonElement>("refresh-jobs").addEventListener("click", () => void refreshJobs());
  el<HTMLButtonElement>("refresh-mydb").addEventListener("click", () => void refreshMyDb());
  el<HTMLButtonElement>("show-cutout").addEventListener("click", () => void showCutout());
}

if (typeof document !== "undefined" && document.getElementById("run-query")) {
  boot();
}
