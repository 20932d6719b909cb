/** Helpers for showing query syntax errors with a caret at the reported
 * position. Error documents carry messages of the form
 * "line L, column C: detail". */

export interface SyntaxErrorPosition {
  line: number;
  column: number;
  detail: string;
}

const POSITION_RE = /^line (\d+), column (\d+): (.*)$/s;

export function parseSyntaxError(message: string): SyntaxErrorPosition | null {
  const m = POSITION_RE.exec(message);
  if (!m) return null;
  return {
    line: Number(m[1]),
    column: Number(m[2]),
    detail: m[3] ?? "",
  };
}

/** The offending source line followed by a caret line pointing at the
 * reported column, ready for a <pre> block. */
export function caretSnippet(queryText: string, pos: SyntaxErrorPosition): string {
  const lines = queryText.split("\n");
  const line = lines[pos.line - 1] ?? "";
  const caretAt = Math.max(1, Math.min(pos.column, line.length + 1));
  return `${line}\n${" ".repeat(caretAt - 1)}^ ${pos.detail}`;
}
