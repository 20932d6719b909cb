/** View-model for the sortable result grid. Pure functions over a
 * TabularDocument so rendering and tests share one source of truth. */

import type { Cell, ColumnKind, TabularDocument } from "./api.js";

export type SortDirection = "asc" | "desc";

export interface SortState {
  column: number;
  direction: SortDirection;
}

export interface GridModel {
  headers: { name: string; unit: string; kind: ColumnKind }[];
  rows: Cell[][];
  sort: SortState | null;
  /** Shown when the service cut the result at the row cap. */
  truncationBanner: string | null;
  /** Shown when the query succeeded but matched nothing. */
  emptyNotice: string | null;
}

const NUMERIC_KINDS: ReadonlySet<string> = new Set(["integer", "real", "flag"]);

function compareCells(a: Cell, b: Cell, numeric: boolean): number {
  if (numeric) {
    const na = Number(a);
    const nb = Number(b);
    if (na < nb) return -1;
    if (na > nb) return 1;
    return 0;
  }
  return String(a) < String(b) ? -1 : String(a) > String(b) ? 1 : 0;
}

/** Stable sort of document rows by one column, respecting the column kind. */
export function sortRows(doc: TabularDocument, sort: SortState): Cell[][] {
  const kind = doc.columns[sort.column]?.kind ?? "text";
  const numeric = NUMERIC_KINDS.has(kind);
  const sign = sort.direction === "asc" ? 1 : -1;
  return doc.rows
    .map((row, i) => ({ row, i }))
    .sort((x, y) => {
      const c = compareCells(
        x.row[sort.column] ?? "",
        y.row[sort.column] ?? "",
        numeric,
      );
      return c !== 0 ? sign * c : x.i - y.i;
    })
    .map((x) => x.row);
}

/** The next sort state after a click on a header: asc, then desc, then off. */
export function toggleSort(current: SortState | null, column: number): SortState | null {
  if (current === null || current.column !== column) {
    return { column, direction: "asc" };
  }
  if (current.direction === "asc") return { column, direction: "desc" };
  return null;
}

export function gridModel(doc: TabularDocument, sort: SortState | null): GridModel {
  const rows = sort ? sortRows(doc, sort) : doc.rows;
  return {
    headers: doc.columns.map((c) => ({ name: c.name, unit: c.unit, kind: c.kind })),
    rows,
    sort,
    truncationBanner: doc.truncated
      ? `Results truncated at the row cap — showing the first ${doc.rows.length} rows.`
      : null,
    emptyNotice:
      doc.status === "ok" && doc.rows.length === 0 ? "0 rows returned." : null,
  };
}
