/**
 * Standalone figure renderer for simulator run directories.
 *
 * Usage:
 *   seal-figures <runDir> [--trim 0.2] [--out figures/]
 *   seal-figures <runDir1> <runDir2> ... [--trim 0.2]   (multi-run overlay)
 *
 * One run directory renders the general and regional figure sets; several
 * render the stacked multi-run figures with a median line and an
 * interquartile band. Figures land in <runDir>/figures unless --out is
 * given. Exits 1 on unusable inputs; malformed rows are skipped and
 * counted in the summary.
 */

import { RunDirError } from "./parse.js";
import { plotGeneral, plotMulti, plotRegional } from "./plots.js";

interface Args {
  runDirs: string[];
  trim: number;
  outDir?: string;
}

export function parseArgs(argv: string[]): Args {
  const runDirs: string[] = [];
  let trim = 0;
  let outDir: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i]!;
    if (arg === "--trim") {
      trim = Number(argv[++i]);
      if (!(trim >= 0 && trim < 1)) {
        throw new RunDirError(`--trim must be in [0, 1), got ${argv[i]}`);
      }
    } else if (arg === "--out") {
      outDir = argv[++i];
      if (!outDir) throw new RunDirError("--out needs a directory");
    } else if (arg.startsWith("--")) {
      throw new RunDirError(`unknown option ${arg}`);
    } else {
      runDirs.push(arg);
    }
  }
  if (runDirs.length === 0) {
    throw new RunDirError("usage: seal-figures <runDir...> [--trim t] [--out dir]");
  }
  return { runDirs, trim, outDir };
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
  try {
    let files: string[] = [];
    let warnings = 0;
    if (args.runDirs.length === 1) {
      const job = { runDir: args.runDirs[0]!, trim: args.trim, outDir: args.outDir };
      const general = plotGeneral(job);
      const regional = plotRegional(job);
      files = [...general.files, ...regional.files];
      warnings = general.warnings + regional.warnings;
    } else {
      const report = plotMulti({
        runDirs: args.runDirs,
        trim: args.trim,
        outDir: args.outDir,
      });
      files = report.files;
      warnings = report.warnings;
    }
    console.log(`${files.length} figures written, ${warnings} malformed rows skipped`);
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

if (import.meta.url === `file://${process.argv[1]}`) {
  process.exit(main(process.argv.slice(2)));
}
