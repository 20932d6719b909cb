import { describe, expect, it } from "vitest";

import { caretSnippet, parseSyntaxError } from "../src/syntax.js";

describe("parseSyntaxError", () => {
  it("extracts line, column, and detail", () => {
    const pos = parseSyntaxError(
      "line 2, column 10: unexpected '<' (expected literal value)",
    );
    expect(pos).toEqual({
      line: 2,
      column: 10,
      detail: "unexpected '<' (expected literal value)",
    });
  });

  it("returns null for messages without a position", () => {
    expect(parseSyntaxError("unknown archive 'nowhere'")).toBeNull();
  });
});

describe("caretSnippet", () => {
  it("points the caret at the reported column of the reported line", () => {
    const query = "SELECT id FROM sky.photo_obj WHERE\n  mag_r <<";
    const pos = parseSyntaxError(
      "line 2, column 10: unexpected '<' (expected literal value)",
    )!;
    const snippet = caretSnippet(query, pos);
    const [source, caret] = snippet.split("\n");
    expect(source).toBe("  mag_r <<");
    expect(caret).toBe("         ^ unexpected '<' (expected literal value)");
    expect(caret!.indexOf("^")).toBe(pos.column - 1);
  });

  it("clamps a column just past the end of the line", () => {
    const pos = { line: 1, column: 15, detail: "unexpected end of input" };
    const snippet = caretSnippet("SELECT id FROM", pos);
    expect(snippet.split("\n")[1]).toBe("              ^ unexpected end of input");
  });
});
