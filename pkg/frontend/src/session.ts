// A Session wraps the geoprompt CLI behind three calls: encode a layout to
// its prompt string, build its re-weighting mask, and run the augmentation
// pipeline. No formula is re-implemented here; every call shells out to the
// CLI and parses its wire formats, so outputs are byte-identical to what
// the CLI writes for the same inputs and seed.

import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join, resolve } from "node:path";

import { GeomMask, parseGeom } from "./geom.js";

export interface BoxRecord {
  class: string;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface LayoutRecord {
  image_id: string;
  width: number;
  height: number;
  view?: string;
  weather?: string;
  timeofday?: string;
  boxes: BoxRecord[];
}

export interface SessionConfig {
  /** Token grid as WIDTHxHEIGHT bins, e.g. "400x228". */
  grid: string;
  /** Default latent dims for mask(), e.g. "100x57". */
  latent: string;
  /** Stream seed shared by encode and augment. Default 0. */
  seed?: number;
  /** Token pattern containing {i}; CLI default when omitted. */
  template?: string;
  /** Foreground weight; CLI default (2.0) when omitted. */
  fgWeight?: number;
  /** Area power; CLI default (0.2) when omitted. */
  areaPower?: number;
  /** Normalize masks; CLI default (true) when omitted. */
  normalize?: boolean;
  /** Augmentation policy file, resolved relative to the config file. */
  policy?: string;
  /** CLI argv prefix. Default ["geoprompt"]. */
  command?: string[];
}

const DIMS = /^[1-9]\d*x[1-9]\d*$/;

// Mirrors the CLI's output file naming for per-image masks.
function safeName(imageId: string): string {
  return imageId.replace(/[^A-Za-z0-9._-]/g, "_");
}

function loadConfig(configPath: string): SessionConfig {
  const raw = JSON.parse(readFileSync(configPath, "utf8")) as SessionConfig;
  if (typeof raw.grid !== "string" || !DIMS.test(raw.grid)) {
    throw new Error(`config grid must look like 400x228, got ${JSON.stringify(raw.grid)}`);
  }
  if (typeof raw.latent !== "string" || !DIMS.test(raw.latent)) {
    throw new Error(`config latent must look like 100x57, got ${JSON.stringify(raw.latent)}`);
  }
  if (raw.policy !== undefined) {
    raw.policy = resolve(dirname(configPath), raw.policy);
  }
  return raw;
}

export class Session {
  private readonly config: Readonly<SessionConfig>;
  private readonly command: readonly string[];
  private readonly seed: number;

  constructor(configPath: string) {
    const config = loadConfig(configPath);
    this.command = Object.freeze([...(config.command ?? ["geoprompt"])]);
    this.seed = config.seed ?? 0;
    this.config = Object.freeze(config);
    Object.freeze(this);
  }

  /** Prompt string for one layout, byte-equal to the CLI's encode output. */
  encode(layout: LayoutRecord): string {
    return this.withWorkdir((dir) => {
      const manifest = this.writeLayout(dir, layout);
      const out = join(dir, "prompts.jsonl");
      const args = ["encode", "--manifest", manifest, "--grid", this.config.grid,
        "--seed", String(this.seed), "--out", out];
      if (this.config.template !== undefined) {
        args.push("--template", this.config.template);
      }
      this.run(args);
      const line = readFileSync(out, "utf8").split("\n").find((l) => l.trim());
      if (!line) {
        throw new Error("encode produced no prompt record");
      }
      return (JSON.parse(line) as { prompt: string }).prompt;
    });
  }

  /** Re-weighting mask for one layout, bit-equal to the CLI's GEOM payload. */
  mask(layout: LayoutRecord, latent?: string): GeomMask {
    if (latent !== undefined && !DIMS.test(latent)) {
      throw new Error(`latent must look like 100x57, got ${JSON.stringify(latent)}`);
    }
    return this.withWorkdir((dir) => {
      const manifest = this.writeLayout(dir, layout);
      const out = join(dir, "masks");
      const args = ["mask", "--manifest", manifest,
        "--latent", latent ?? this.config.latent, "--out", out];
      if (this.config.fgWeight !== undefined) {
        args.push("--w", String(this.config.fgWeight));
      }
      if (this.config.areaPower !== undefined) {
        args.push("--p", String(this.config.areaPower));
      }
      if (this.config.normalize === false) {
        args.push("--no-normalize");
      }
      this.run(args);
      const blob = readFileSync(join(out, safeName(layout.image_id) + ".geom"));
      return parseGeom(blob);
    });
  }

  /** Filter, flip, and shift one layout under the session seed and policy. */
  augment(layout: LayoutRecord): LayoutRecord {
    return this.withWorkdir((dir) => {
      const manifest = this.writeLayout(dir, layout);
      const out = join(dir, "augmented.jsonl");
      const args = ["augment", "--manifest", manifest,
        "--seed", String(this.seed), "--out", out];
      if (this.config.policy !== undefined) {
        args.push("--policy", this.config.policy);
      }
      this.run(args);
      const line = readFileSync(out, "utf8").split("\n").find((l) => l.trim());
      if (!line) {
        throw new Error("augment produced no layout record");
      }
      return JSON.parse(line) as LayoutRecord;
    });
  }

  private writeLayout(dir: string, layout: LayoutRecord): string {
    const manifest = join(dir, "layout.jsonl");
    writeFileSync(manifest, JSON.stringify(layout) + "\n");
    return manifest;
  }

  private withWorkdir<T>(body: (dir: string) => T): T {
    const dir = mkdtempSync(join(tmpdir(), "geoprompt-"));
    try {
      return body(dir);
    } finally {
      rmSync(dir, { recursive: true, force: true });
    }
  }

  private run(args: string[]): void {
    const argv = [...this.command.slice(1), ...args];
    const proc = spawnSync(this.command[0], argv, { encoding: "utf8" });
    if (proc.error) {
      throw proc.error;
    }
    if (proc.status !== 0) {
      const lines = (proc.stderr ?? "").split("\n").filter((l) => l.trim());
      const error = lines.filter((l) => l.startsWith("error:")).pop();
      const detail = error ? error.slice("error:".length).trim() : lines.join("; ");
      throw new Error(detail || `geoprompt exited with status ${proc.status}`);
    }
  }
}
