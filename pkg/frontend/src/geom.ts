// Reader for "GEOM" mask files: a 29-byte little-endian header (magic,
// row count H', column count W', normalized flag, foreground weight w,
// area power p) followed by H'*W' row-major float32 cells.

export const GEOM_HEADER_BYTES = 29;

export interface GeomMask {
  readonly hCells: number;
  readonly wCells: number;
  readonly normalized: boolean;
  readonly fgWeight: number;
  readonly areaPower: number;
  /** Row-major hCells x wCells cells in a fresh, aligned buffer. */
  readonly values: Float32Array;
}

export function parseGeom(data: Uint8Array): GeomMask {
  if (data.byteLength < GEOM_HEADER_BYTES) {
    throw new Error(`truncated mask header: ${data.byteLength} bytes`);
  }
  const magic = String.fromCharCode(data[0], data[1], data[2], data[3]);
  if (magic !== "GEOM") {
    throw new Error(`bad mask magic ${JSON.stringify(magic)}`);
  }
  const view = new DataView(data.buffer, data.byteOffset, data.byteLength);
  const hCells = view.getUint32(4, true);
  const wCells = view.getUint32(8, true);
  const normalized = data[12] !== 0;
  const fgWeight = view.getFloat64(13, true);
  const areaPower = view.getFloat64(21, true);
  const expected = GEOM_HEADER_BYTES + hCells * wCells * 4;
  if (data.byteLength !== expected) {
    throw new Error(
      `mask payload is ${data.byteLength - GEOM_HEADER_BYTES} bytes, ` +
        `expected ${hCells * wCells * 4} for ${hCells}x${wCells} cells`
    );
  }
  const values = new Float32Array(hCells * wCells);
  for (let i = 0; i < values.length; i++) {
    values[i] = view.getFloat32(GEOM_HEADER_BYTES + i * 4, true);
  }
  return { hCells, wCells, normalized, fgWeight, areaPower, values };
}

/** The raw float32 cell bytes, validated against the header first. */
export function geomPayload(data: Uint8Array): Uint8Array {
  parseGeom(data);
  return data.subarray(GEOM_HEADER_BYTES);
}

/** Serialize a mask back to GEOM bytes; inverse of parseGeom. */
export function writeGeom(mask: GeomMask): Uint8Array {
  const out = new Uint8Array(GEOM_HEADER_BYTES + mask.values.length * 4);
  out[0] = 0x47; // G
  out[1] = 0x45; // E
  out[2] = 0x4f; // O
  out[3] = 0x4d; // M
  const view = new DataView(out.buffer);
  view.setUint32(4, mask.hCells, true);
  view.setUint32(8, mask.wCells, true);
  out[12] = mask.normalized ? 1 : 0;
  view.setFloat64(13, mask.fgWeight, true);
  view.setFloat64(21, mask.areaPower, true);
  for (let i = 0; i < mask.values.length; i++) {
    view.setFloat32(GEOM_HEADER_BYTES + i * 4, mask.values[i], true);
  }
  return out;
}
