import { describe, expect, it } from "vitest";

import { decodePgm, PgmError, toRgba } from "../src/pgm.js";

function encodePgm(width: number, height: number, samples: number[]): ArrayBuffer {
  const header = new TextEncoder().encode(`P5\n${width} ${height}\n65535\n`);
  const out = new Uint8Array(header.length + 2 * samples.length);
  out.set(header, 0);
  samples.forEach((s, i) => {
    out[header.length + 2 * i] = (s >> 8) & 0xff;
    out[header.length + 2 * i + 1] = s & 0xff;
  });
  return out.buffer;
}

describe("decodePgm", () => {
  it("decodes a 16-bit big-endian binary PGM", () => {
    const image = decodePgm(encodePgm(3, 2, [0, 1, 256, 65535, 513, 42]));
    expect(image.width).toBe(3);
    expect(image.height).toBe(2);
    expect(image.maxValue).toBe(65535);
    expect([...image.samples]).toEqual([0, 1, 256, 65535, 513, 42]);
  });

  it("rejects non-P5 data", () => {
    const bytes = new TextEncoder().encode("P2\n1 1\n65535\n0");
    expect(() => decodePgm(bytes.buffer as ArrayBuffer)).toThrow(PgmError);
  });

  it("rejects truncated pixel data", () => {
    const full = new Uint8Array(encodePgm(2, 2, [1, 2, 3, 4]));
    const short = full.slice(0, full.length - 3);
    expect(() => decodePgm(short.buffer as ArrayBuffer)).toThrow(/truncated/);
  });
});

describe("toRgba", () => {
  it("maps black to black and full-scale to white, opaque", () => {
    const rgba = toRgba(decodePgm(encodePgm(2, 1, [0, 65535])));
    expect([...rgba.slice(0, 4)]).toEqual([0, 0, 0, 255]);
    expect([...rgba.slice(4, 8)]).toEqual([255, 255, 255, 255]);
  });

  it("stretches midtones upward so faint sources stay visible", () => {
    const rgba = toRgba(decodePgm(encodePgm(1, 1, [16384]))); // one quarter scale
    expect(rgba[0]).toBeGreaterThan(64); // sqrt stretch: 0.25 -> 0.5
    expect(rgba[0]).toBe(128);
  });
});
