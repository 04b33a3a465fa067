/** Grid search over learning rate, batch size, and loss. The full grid is
 * five learning rates (1e-2 down to 1e-6 by factors of ten), four batch
 * sizes (2, 4, 8, 16) and two losses (focal, dice): 40 configurations.
 * Ties on validation Dice resolve to the first configuration in
 * enumeration order. */

import * as fs from "fs";
import { LossName } from "./model";
import { DEFAULT_CONFIG, train, TrainConfig } from "./train";

export interface GridSpec {
  learningRates: number[];
  batchSizes: number[];
  losses: LossName[];
  epochs: number;
  splitSeed: number;
  baseFilters?: number;
}

export const FULL_GRID: Omit<GridSpec, "epochs" | "splitSeed"> = {
  learningRates: [1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
  batchSizes: [2, 4, 8, 16],
  losses: ["focal", "dice"],
};

export function enumerateGrid(spec: GridSpec): TrainConfig[] {
  const out: TrainConfig[] = [];
  for (const learningRate of spec.learningRates) {
    for (const batchSize of spec.batchSizes) {
      for (const loss of spec.losses) {
        out.push({
          ...DEFAULT_CONFIG,
          learningRate,
          batchSize,
          loss,
          epochs: spec.epochs,
          splitSeed: spec.splitSeed,
          baseFilters: spec.baseFilters ?? DEFAULT_CONFIG.baseFilters,
          quiet: true,
        });
      }
    }
  }
  return out;
}

export interface GridRow {
  learningRate: number;
  batchSize: number;
  loss: LossName;
  bestValDice: number;
  bestEpoch: number;
}

export function pickBest(rows: GridRow[]): GridRow {
  if (rows.length === 0) throw new Error("empty grid result table");
  let best = rows[0];
  for (const row of rows.slice(1)) {
    if (row.bestValDice > best.bestValDice) best = row; // ties keep the earlier row
  }
  return best;
}

export interface GridResult {
  best: GridRow;
  table: GridRow[];
}

export async function gridSearch(datasetDir: string, spec: GridSpec, tablePath?: string): Promise<GridResult> {
  const table: GridRow[] = [];
  for (const cfg of enumerateGrid(spec)) {
    const result = await train(datasetDir, cfg);
    result.model.dispose();
    table.push({
      learningRate: cfg.learningRate,
      batchSize: cfg.batchSize,
      loss: cfg.loss,
      bestValDice: result.bestValDice,
      bestEpoch: result.bestEpoch,
    });
    console.log(
      `lr=${cfg.learningRate} batch=${cfg.batchSize} loss=${cfg.loss} -> val_dice=${result.bestValDice.toFixed(4)}`
    );
  }
  const best = pickBest(table);
  if (tablePath) {
    fs.writeFileSync(tablePath, JSON.stringify({ best, table }, null, 2));
  }
  return { best, table };
}
