import { cpSync, mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, describe, expect, it } from "vitest";

import { main } from "../src/cli.js";
import { findOutputFile, readGeneral, readRegional } from "../src/parse.js";
import { plotGeneral, plotMulti, plotRegional } from "../src/plots.js";
import { GENERAL_MEASURES, REGIONAL_MEASURES } from "../src/schema.js";
import { countPolylinePoints } from "../src/svg.js";

const FIXTURES = join(__dirname, "fixtures");
const RUN24 = join(FIXTURES, "run24");
const REPLICAS = [1, 2, 3, 4, 5].map((i) => join(FIXTURES, `rep${i}`));
const MONTHS = 24;

const scratchDirs: string[] = [];

function scratch(): string {
  const dir = mkdtempSync(join(tmpdir(), "figures-"));
  scratchDirs.push(dir);
  return dir;
}

afterAll(() => {
  for (const dir of scratchDirs) rmSync(dir, { recursive: true, force: true });
});

describe("parsing run directories", () => {
  it("reads the 24-month general fixture", () => {
    const table = readGeneral(RUN24);
    expect(table.rows.length).toBe(MONTHS);
    expect(table.malformed).toBe(0);
    expect(table.paramTag).toContain("_0.85_");
  });

  it("reads the regional fixture with two regions", () => {
    const table = readRegional(RUN24);
    expect(table.rows.length).toBe(MONTHS * 2);
    const regions = new Set(table.rows.map((r) => r.region_id));
    expect(regions).toEqual(new Set(["RA", "RB"]));
  });

  it("skips malformed rows but keeps the rest", () => {
    const dir = scratch();
    cpSync(RUN24, dir, { recursive: true });
    const path = findOutputFile(dir, "general");
    writeFileSync(path, readFileSync(path, "utf-8") + "garbage,row\n");
    const table = readGeneral(dir);
    expect(table.rows.length).toBe(MONTHS);
    expect(table.malformed).toBe(1);
  });

  it("errors on a directory without outputs", () => {
    expect(() => readGeneral(scratch())).toThrow(/no general output/);
  });
});

describe("plotGeneral", () => {
  it("emits one figure per measure with every month untrimmed", () => {
    const out = scratch();
    const report = plotGeneral({ runDir: RUN24, trim: 0, outDir: out });
    expect(report.files.length).toBe(GENERAL_MEASURES.length);
    expect(report.warnings).toBe(0);
    for (const file of report.files) {
      const counts = countPolylinePoints(readFileSync(file, "utf-8"));
      const total = [...counts.values()].reduce((a, b) => a + b, 0);
      expect(total).toBe(MONTHS);
    }
  });

  it("trims the burn-in head to floor(T*(1-trim)) points", () => {
    const out = scratch();
    const report = plotGeneral({ runDir: RUN24, trim: 0.2, outDir: out });
    for (const file of report.files) {
      const counts = countPolylinePoints(readFileSync(file, "utf-8"));
      const total = [...counts.values()].reduce((a, b) => a + b, 0);
      expect(total).toBe(19); // floor(24 * 0.8)
    }
  });

  it("figures carry the parameter tuple footer", () => {
    const out = scratch();
    const [first] = plotGeneral({ runDir: RUN24, outDir: out }).files;
    const svg = readFileSync(first!, "utf-8");
    expect(svg).toContain('class="footer"');
    expect(svg).toContain("0.85");
  });
});

describe("plotRegional", () => {
  it("draws one line per region in every figure", () => {
    const out = scratch();
    const report = plotRegional({ runDir: RUN24, trim: 0, outDir: out });
    expect(report.files.length).toBe(REGIONAL_MEASURES.length);
    for (const file of report.files) {
      const counts = countPolylinePoints(readFileSync(file, "utf-8"));
      expect([...counts.keys()].sort()).toEqual(["RA", "RB"]);
      expect(counts.get("RA")).toBe(MONTHS);
      expect(counts.get("RB")).toBe(MONTHS);
    }
  });

  it("a region absent one month leaves a gap, not an interpolation", () => {
    const dir = scratch();
    cpSync(RUN24, dir, { recursive: true });
    const path = findOutputFile(dir, "regional");
    const lines = readFileSync(path, "utf-8")
      .split("\n")
      .filter((l) => l.trim() && !(l.startsWith("12,") && l.includes(",RB,")));
    writeFileSync(path, lines.join("\n") + "\n");
    const out = scratch();
    const report = plotRegional({ runDir: dir, trim: 0, outDir: out });
    const svg = readFileSync(report.files[0]!, "utf-8");
    const counts = countPolylinePoints(svg);
    expect(counts.get("RA")).toBe(MONTHS);
    expect(counts.get("RB")).toBe(MONTHS - 1); // split polylines, no bridge
    const rbSegments = svg.match(/data-label="RB"/g) ?? [];
    expect(rbSegments.length).toBe(2);
  });
});

describe("plotMulti", () => {
  it("five deterministic replicas produce a zero-width band", () => {
    const out = scratch();
    const report = plotMulti({ runDirs: REPLICAS, trim: 0, outDir: out });
    expect(report.files.length).toBe(GENERAL_MEASURES.length);
    for (const file of report.files) {
      const svg = readFileSync(file, "utf-8");
      const band = svg.match(/<path class="band" d="M ([^"]*)Z"/);
      expect(band).not.toBeNull();
      const coordinates = band![1]!.split(" L ").map((p) => p.trim());
      const forward = coordinates.slice(0, MONTHS);
      const backward = coordinates.slice(MONTHS).reverse();
      expect(forward).toEqual(backward); // upper edge equals lower edge
      const counts = countPolylinePoints(svg);
      expect(counts.get("median")).toBe(MONTHS);
      for (let i = 0; i < REPLICAS.length; i++) {
        expect(counts.get(`run ${i}`)).toBe(MONTHS);
      }
    }
  });

  it("rejects a single run directory", () => {
    expect(() => plotMulti({ runDirs: [RUN24] })).toThrow(/at least two/);
  });

  it("names a run with mismatched months", () => {
    const dir = scratch();
    cpSync(RUN24, dir, { recursive: true });
    const path = findOutputFile(dir, "general");
    const lines = readFileSync(path, "utf-8").split("\n").filter((l) => l.trim());
    writeFileSync(path, lines.slice(0, 12).join("\n") + "\n");
    expect(() => plotMulti({ runDirs: [RUN24, dir] })).toThrow(dir);
  });
});

describe("cli", () => {
  it("renders a single run directory into figures/", () => {
    const dir = scratch();
    cpSync(RUN24, dir, { recursive: true });
    expect(main([dir, "--trim", "0.2"])).toBe(0);
    const figures = join(dir, "figures");
    const svg = readFileSync(join(figures, "general_gdp_index.svg"), "utf-8");
    expect(svg).toContain("<svg");
  });

  it("empty general file exits nonzero", () => {
    const dir = scratch();
    cpSync(RUN24, dir, { recursive: true });
    writeFileSync(findOutputFile(dir, "general"), "");
    expect(main([dir])).toBe(1);
  });

  it("bad flags exit nonzero", () => {
    expect(main(["--trim", "2", RUN24])).toBe(1);
    expect(main([])).toBe(1);
  });
});
