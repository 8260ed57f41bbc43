import { describe, expect, it } from "vitest";

import { GEOM_HEADER_BYTES, geomPayload, parseGeom, writeGeom } from "../src/geom.js";

function sampleMask() {
  return {
    hCells: 2,
    wCells: 3,
    normalized: true,
    fgWeight: 2.0,
    areaPower: 0.2,
    values: new Float32Array([1.6, 0.8, 0.8, 1.6, 0.8, 0.8]),
  };
}

describe("parseGeom", () => {
  it("round-trips through writeGeom", () => {
    const mask = sampleMask();
    const blob = writeGeom(mask);
    expect(blob.byteLength).toBe(GEOM_HEADER_BYTES + 24);
    const back = parseGeom(blob);
    expect(back.hCells).toBe(2);
    expect(back.wCells).toBe(3);
    expect(back.normalized).toBe(true);
    expect(back.fgWeight).toBe(2.0);
    expect(back.areaPower).toBe(0.2);
    expect(Array.from(back.values)).toEqual(Array.from(mask.values));
  });

  it("reads the header fields at their fixed offsets", () => {
    const blob = writeGeom(sampleMask());
    expect(String.fromCharCode(blob[0], blob[1], blob[2], blob[3])).toBe("GEOM");
    const view = new DataView(blob.buffer);
    expect(view.getUint32(4, true)).toBe(2);
    expect(view.getUint32(8, true)).toBe(3);
    expect(blob[12]).toBe(1);
    expect(view.getFloat64(13, true)).toBe(2.0);
    expect(view.getFloat64(21, true)).toBe(0.2);
  });

  it("rejects a truncated header", () => {
    expect(() => parseGeom(new Uint8Array(10))).toThrow(/truncated/);
  });

  it("rejects a foreign magic", () => {
    const blob = writeGeom(sampleMask());
    blob[0] = 0x58;
    expect(() => parseGeom(blob)).toThrow(/magic/);
  });

  it("rejects a payload that does not match the header dims", () => {
    const blob = writeGeom(sampleMask());
    expect(() => parseGeom(blob.subarray(0, blob.byteLength - 4))).toThrow(/payload/);
    const padded = new Uint8Array(blob.byteLength + 4);
    padded.set(blob);
    expect(() => parseGeom(padded)).toThrow(/payload/);
  });

  it("exposes the raw payload bytes", () => {
    const blob = writeGeom(sampleMask());
    const payload = geomPayload(blob);
    expect(payload.byteLength).toBe(24);
    expect(new DataView(payload.buffer, payload.byteOffset).getFloat32(0, true)).toBeCloseTo(1.6, 6);
  });

  it("copies values out of an unaligned source", () => {
    const blob = writeGeom(sampleMask());
    const shifted = new Uint8Array(blob.byteLength + 1);
    shifted.set(blob, 1);
    const back = parseGeom(shifted.subarray(1));
    expect(back.values[0]).toBeCloseTo(1.6, 6);
  });
});
