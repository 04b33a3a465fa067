/** Training loop with per-epoch validation Dice, best-checkpoint tracking,
 * deterministic batching, and optional early stopping once validation is
 * good enough (always within the configured epoch cap). */

import * as tf from "@tensorflow/tfjs";
import { loadDataset, splitDataset, toTensors, Sample } from "./data";
import { buildModel, diceScore, lossByName, LossName } from "./model";
import { makeRng, shuffle } from "./rng";

export interface TrainConfig {
  learningRate: number;
  batchSize: number;
  loss: LossName;
  epochs: number;
  splitSeed: number;
  weightSeed: number;
  baseFilters: number;
  /** stop after the first epoch whose validation Dice reaches this */
  earlyStopValDice?: number;
  quiet?: boolean;
}

export const DEFAULT_CONFIG: TrainConfig = {
  learningRate: 1e-4, // the 128px operating point
  batchSize: 8,
  loss: "dice",
  epochs: 20,
  splitSeed: 0,
  weightSeed: 1234,
  baseFilters: 4,
};

export interface EpochLog {
  epoch: number;
  trainLoss: number;
  valDice: number;
}

export interface TrainResult {
  model: tf.LayersModel;
  history: EpochLog[];
  bestValDice: number;
  bestEpoch: number;
  heldOutDice: number;
  split: { train: number; val: number; test: number };
}

function evaluateDice(model: tf.LayersModel, samples: Sample[], batch = 8): number {
  let score = 0;
  for (let i = 0; i < samples.length; i += batch) {
    const part = samples.slice(i, i + batch);
    const { xs, ys } = toTensors(part);
    const probs = model.predict(xs) as tf.Tensor;
    for (let j = 0; j < part.length; j++) {
      const p = probs.slice([j, 0, 0, 0], [1, -1, -1, -1]);
      const t = ys.slice([j, 0, 0, 0], [1, -1, -1, -1]);
      score += diceScore(t, p);
      p.dispose();
      t.dispose();
    }
    xs.dispose();
    ys.dispose();
    probs.dispose();
  }
  return score / samples.length;
}

export async function train(datasetDir: string, cfg: TrainConfig = DEFAULT_CONFIG): Promise<TrainResult> {
  const samples = loadDataset(datasetDir);
  const split = splitDataset(samples, cfg.splitSeed);
  const model = buildModel(cfg.baseFilters, cfg.weightSeed);
  const optimizer = tf.train.adam(cfg.learningRate);
  const lossFn = lossByName(cfg.loss);

  const history: EpochLog[] = [];
  let bestValDice = -1;
  let bestEpoch = -1;
  let bestWeights: tf.Tensor[] | null = null;

  for (let epoch = 1; epoch <= cfg.epochs; epoch++) {
    const order = shuffle(makeRng(cfg.splitSeed * 7919 + epoch), split.train.map((_, i) => i));
    let lossSum = 0;
    let steps = 0;
    for (let start = 0; start < order.length; start += cfg.batchSize) {
      const batch = order.slice(start, start + cfg.batchSize).map((i) => split.train[i]);
      const { xs, ys } = toTensors(batch);
      const lossValue = optimizer.minimize(
        () => lossFn(ys, model.apply(xs, { training: true }) as tf.Tensor),
        true
      ) as tf.Scalar;
      lossSum += lossValue.dataSync()[0];
      steps += 1;
      lossValue.dispose();
      xs.dispose();
      ys.dispose();
    }
    const valDice = evaluateDice(model, split.val);
    history.push({ epoch, trainLoss: lossSum / Math.max(1, steps), valDice });
    if (!cfg.quiet) {
      console.log(`epoch ${epoch}/${cfg.epochs}  loss=${(lossSum / steps).toFixed(4)}  val_dice=${valDice.toFixed(4)}`);
    }
    if (valDice > bestValDice) {
      bestValDice = valDice;
      bestEpoch = epoch;
      if (bestWeights) bestWeights.forEach((w) => w.dispose());
      bestWeights = model.getWeights().map((w) => w.clone());
    }
    if (cfg.earlyStopValDice !== undefined && valDice >= cfg.earlyStopValDice) {
      break;
    }
  }

  if (bestWeights) {
    model.setWeights(bestWeights);
    bestWeights.forEach((w) => w.dispose());
  }
  optimizer.dispose();
  const heldOutDice = evaluateDice(model, split.test);
  return {
    model,
    history,
    bestValDice,
    bestEpoch,
    heldOutDice,
    split: { train: split.train.length, val: split.val.length, test: split.test.length },
  };
}
