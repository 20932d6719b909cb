/** Decoder for the archive cutout format: binary PGM ("P5"), 16-bit
 * big-endian samples. Browsers don't render PGM, so we convert to RGBA for a
 * canvas. */

export interface PgmImage {
  width: number;
  height: number;
  maxValue: number;
  /** Row-major samples, length width * height. */
  samples: Uint16Array;
}

export class PgmError extends Error {}

export function decodePgm(buffer: ArrayBuffer): PgmImage {
  const bytes = new Uint8Array(buffer);
  // header: "P5" <ws> width <ws> height <ws> maxval <single ws> data
  let offset = 0;
  const token = (): string => {
    while (offset < bytes.length && isSpace(bytes[offset]!)) offset++;
    const start = offset;
    while (offset < bytes.length && !isSpace(bytes[offset]!)) offset++;
    if (start === offset) throw new PgmError("truncated header");
    return String.fromCharCode(...bytes.subarray(start, offset));
  };
  const magic = token();
  if (magic !== "P5") throw new PgmError(`not a binary PGM (magic ${magic})`);
  const width = Number(token());
  const height = Number(token());
  const maxValue = Number(token());
  if (!Number.isInteger(width) || !Number.isInteger(height) || width <= 0 || height <= 0) {
    throw new PgmError(`bad dimensions ${width}x${height}`);
  }
  if (maxValue !== 65535) throw new PgmError(`expected 16-bit samples, maxval ${maxValue}`);
  offset++; // exactly one whitespace byte separates header and data
  const n = width * height;
  if (bytes.length - offset < 2 * n) throw new PgmError("truncated pixel data");
  const samples = new Uint16Array(n);
  for (let i = 0; i < n; i++) {
    samples[i] = (bytes[offset + 2 * i]! << 8) | bytes[offset + 2 * i + 1]!;
  }
  return { width, height, maxValue, samples };
}

function isSpace(b: number): boolean {
  return b === 0x20 || b === 0x09 || b === 0x0a || b === 0x0d;
}

/** Grayscale RGBA bytes suitable for ImageData, with an asinh-like stretch so
 * faint sources stay visible next to bright ones. */
export function toRgba(image: PgmImage): Uint8ClampedArray<ArrayBuffer> {
  const out = new Uint8ClampedArray(image.width * image.height * 4);
  for (let i = 0; i < image.samples.length; i++) {
    const x = image.samples[i]! / image.maxValue;
    const v = Math.round(255 * Math.sqrt(x));
    out[4 * i] = v;
    out[4 * i + 1] = v;
    out[4 * i + 2] = v;
    out[4 * i + 3] = 255;
  }
  return out;
}
