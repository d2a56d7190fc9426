#!/usr/bin/env node
/**
 * plotview: render simulator CSV outputs into SVG figures.
 *
 *   plotview fig2   --in fig2.csv --out fig2.svg [--minima fig2_minima.json]
 *   plotview series --in timeseries.csv --out series.svg
 *
 * `--png` additionally rasterizes via the optional `sharp` dependency when
 * it is installed; otherwise the flag fails with a clear message.  Exit
 * codes: 0 ok, 1 usage, 2 contract violation in the inputs.
 */

import * as fs from "fs";
import * as path from "path";

import { CsvContractError } from "./csv";
import { parseMinima, renderFig2 } from "./fig2";
import { renderSeries } from "./series";

interface Args {
  command: string;
  input: string;
  output: string;
  minima?: string;
  png: boolean;
  logY: boolean;
}

function parseArgs(argv: string[]): Args {
  const [command, ...rest] = argv;
  if (command !== "fig2" && command !== "series") {
    throw new UsageError(`unknown command ${command ?? "(none)"}; use fig2 or series`);
  }
  const args: Partial<Args> = { command, png: false, logY: false };
  for (let i = 0; i < rest.length; i++) {
    const flag = rest[i];
    switch (flag) {
      case "--in":
        args.input = rest[++i];
        break;
      case "--out":
        args.output = rest[++i];
        break;
      case "--minima":
        args.minima = rest[++i];
        break;
      case "--png":
        args.png = true;
        break;
      case "--log-y":
        args.logY = true;
        break;
      default:
        throw new UsageError(`unknown flag ${flag}`);
    }
  }
  if (!args.input || !args.output) {
    throw new UsageError("--in and --out are required");
  }
  return args as Args;
}

class UsageError extends Error {}

function readText(p: string): string {
  if (!fs.existsSync(p)) {
    throw new CsvContractError(`input file not found: ${p}`);
  }
  return fs.readFileSync(p, "utf-8");
}

async function writePng(svg: string, outPath: string): Promise<void> {
  let sharp: any;
  try {
    // optional dependency; vector SVG is the primary output
    sharp = require("sharp");
  } catch {
    throw new UsageError(
      "--png needs the optional 'sharp' package (npm install sharp); SVG output is unaffected",
    );
  }
  const buf = await sharp(Buffer.from(svg)).png().toBuffer();
  fs.writeFileSync(outPath, buf);
}

export async function run(argv: string[]): Promise<number> {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`usage error: ${err.message}`);
      return 1;
    }
    throw err;
  }
  try {
    let svg: string;
    if (args.command === "fig2") {
      const csv = readText(args.input);
      let minima = null;
      const sidecar =
        args.minima ??
        path.join(
          path.dirname(args.input),
          path.basename(args.input, path.extname(args.input)) + "_minima.json",
        );
      if (args.minima || fs.existsSync(sidecar)) {
        minima = parseMinima(readText(sidecar));
      }
      svg = renderFig2(csv, minima, { logY: args.logY });
    } else {
      svg = renderSeries(readText(args.input));
    }
    fs.writeFileSync(args.output, svg, "utf-8");
    if (args.png) {
      const pngPath = args.output.replace(/\.svg$/i, "") + ".png";
      await writePng(svg, pngPath);
    }
    return 0;
  } catch (err) {
    if (err instanceof CsvContractError || err instanceof SyntaxError) {
      console.error(`input contract violation: ${err.message}`);
      return 2;
    }
    if (err instanceof UsageError) {
      console.error(`usage error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

if (require.main === module) {
  run(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
