/** Command line: corpus generation, training, grid search, mask export.
 * Exit codes: 0 success, 1 failure. */

import * as fs from "fs";
import * as path from "path";
import { generateCorpus } from "./corpus";
import { exportGuidance } from "./exportGuidance";
import { FULL_GRID, gridSearch } from "./grid";
import { loadModel, saveModel } from "./io";
import { DEFAULT_CONFIG, train } from "./train";
import { LossName } from "./model";

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    if (!argv[i].startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`malformed flags near ${argv[i]}`);
    }
    flags.set(argv[i].slice(2), argv[i + 1]);
  }
  return flags;
}

function need(flags: Map<string, string>, key: string): string {
  const value = flags.get(key);
  if (value === undefined) throw new Error(`missing required flag --${key}`);
  return value;
}

async function cmdCorpus(flags: Map<string, string>): Promise<number> {
  const dir = need(flags, "out");
  const count = parseInt(flags.get("count") ?? "50", 10);
  const seed = parseInt(flags.get("seed") ?? "0", 10);
  const size = parseInt(flags.get("size") ?? "128", 10);
  const names = generateCorpus(dir, { count, seed, size });
  console.log(`wrote ${names.length} image/mask pairs to ${dir}`);
  return 0;
}

async function cmdTrain(flags: Map<string, string>): Promise<number> {
  const data = need(flags, "data");
  const out = need(flags, "out");
  const cfg = {
    ...DEFAULT_CONFIG,
    learningRate: parseFloat(flags.get("lr") ?? String(DEFAULT_CONFIG.learningRate)),
    batchSize: parseInt(flags.get("batch") ?? String(DEFAULT_CONFIG.batchSize), 10),
    loss: (flags.get("loss") ?? DEFAULT_CONFIG.loss) as LossName,
    epochs: parseInt(flags.get("epochs") ?? String(DEFAULT_CONFIG.epochs), 10),
    splitSeed: parseInt(flags.get("seed") ?? "0", 10),
    earlyStopValDice: flags.has("early-stop") ? parseFloat(flags.get("early-stop")!) : undefined,
  };
  const result = await train(data, cfg);
  await saveModel(result.model, out);
  console.log(
    `best val_dice=${result.bestValDice.toFixed(4)} (epoch ${result.bestEpoch}); ` +
      `held-out dice=${result.heldOutDice.toFixed(4)}; model saved to ${out}`
  );
  result.model.dispose();
  return 0;
}

async function cmdGrid(flags: Map<string, string>): Promise<number> {
  const data = need(flags, "data");
  const out = need(flags, "out");
  const spec = {
    ...FULL_GRID,
    epochs: parseInt(flags.get("epochs") ?? "5", 10),
    splitSeed: parseInt(flags.get("seed") ?? "0", 10),
  };
  const { best } = await gridSearch(data, spec, out);
  console.log(
    `best: lr=${best.learningRate} batch=${best.batchSize} loss=${best.loss} val_dice=${best.bestValDice.toFixed(4)}`
  );
  return 0;
}

async function cmdExport(flags: Map<string, string>): Promise<number> {
  const modelDir = need(flags, "model");
  const model = await loadModel(modelDir);
  if (flags.has("image-dir")) {
    const imageDir = need(flags, "image-dir");
    const outDir = need(flags, "out-dir");
    fs.mkdirSync(outDir, { recursive: true });
    const names = fs.readdirSync(imageDir).filter((n) => n.endsWith(".png")).sort();
    for (const name of names) {
      exportGuidance(model, path.join(imageDir, name), path.join(outDir, name));
    }
    console.log(`exported ${names.length} guidance masks to ${outDir}`);
  } else {
    const image = need(flags, "image");
    const out = need(flags, "out");
    exportGuidance(model, image, out);
    console.log(`exported guidance mask to ${out}`);
  }
  model.dispose();
  return 0;
}

async function main(): Promise<number> {
  const [command, ...rest] = process.argv.slice(2);
  const commands: Record<string, (flags: Map<string, string>) => Promise<number>> = {
    corpus: cmdCorpus,
    train: cmdTrain,
    grid: cmdGrid,
    export: cmdExport,
  };
  if (!command || !(command in commands)) {
    console.error("usage: cli.js <corpus|train|grid|export> [--flag value ...]");
    return 1;
  }
  try {
    return await commands[command](parseFlags(rest));
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

main().then((code) => {
  process.exitCode = code;
});
