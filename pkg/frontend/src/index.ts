export { GEOM_HEADER_BYTES, geomPayload, parseGeom, writeGeom } from "./geom.js";
export type { GeomMask } from "./geom.js";
export { Session } from "./session.js";
export type { BoxRecord, LayoutRecord, SessionConfig } from "./session.js";
