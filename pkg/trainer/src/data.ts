/** Dataset loading and the two-stage split: 90/10 into train+val vs test,
 * then 80/20 of the first part into train vs val. Split membership is
 * seed-deterministic. */

import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";
import { readGray, readRgb } from "./png";
import { makeRng, shuffle } from "./rng";
import { TRAIN_SIZE } from "./corpus";

export interface Sample {
  name: string;
  image: Float32Array; // HWC, [0,1)
  mask: Float32Array; // HW1, {0,1}
}

export interface SplitDataset {
  train: Sample[];
  val: Sample[];
  test: Sample[];
}

export function loadDataset(dir: string): Sample[] {
  const imagesDir = path.join(dir, "images");
  const masksDir = path.join(dir, "masks");
  if (!fs.existsSync(imagesDir) || !fs.existsSync(masksDir)) {
    throw new Error(`dataset dir ${dir} must contain images/ and masks/`);
  }
  const names = fs.readdirSync(imagesDir).filter((n) => n.endsWith(".png")).sort();
  if (names.length === 0) {
    throw new Error(`dataset dir ${dir} is empty`);
  }
  return names.map((name) => {
    const img = readRgb(path.join(imagesDir, name));
    const mask = readGray(path.join(masksDir, name));
    if (img.width !== TRAIN_SIZE || img.height !== TRAIN_SIZE) {
      throw new Error(`${name}: expected ${TRAIN_SIZE}x${TRAIN_SIZE}, got ${img.width}x${img.height}`);
    }
    if (mask.width !== img.width || mask.height !== img.height) {
      throw new Error(`${name}: image and mask shapes differ`);
    }
    const image = new Float32Array(img.data.length);
    for (let i = 0; i < img.data.length; i++) image[i] = img.data[i] / 256;
    const target = new Float32Array(mask.data.length);
    for (let i = 0; i < mask.data.length; i++) target[i] = mask.data[i] >= 128 ? 1 : 0;
    return { name, image, mask: target };
  });
}

export function splitDataset(samples: Sample[], seed: number): SplitDataset {
  const order = shuffle(makeRng(seed), samples.map((_, i) => i));
  const nTest = Math.max(1, Math.round(samples.length * 0.1));
  const testIdx = order.slice(0, nTest);
  const rest = order.slice(nTest);
  const nVal = Math.max(1, Math.round(rest.length * 0.2));
  const valIdx = rest.slice(0, nVal);
  const trainIdx = rest.slice(nVal);
  const pick = (idx: number[]) => idx.map((i) => samples[i]);
  return { train: pick(trainIdx), val: pick(valIdx), test: pick(testIdx) };
}

export function toTensors(samples: Sample[]): { xs: tf.Tensor4D; ys: tf.Tensor4D } {
  const n = samples.length;
  const xs = new Float32Array(n * TRAIN_SIZE * TRAIN_SIZE * 3);
  const ys = new Float32Array(n * TRAIN_SIZE * TRAIN_SIZE);
  samples.forEach((s, i) => {
    xs.set(s.image, i * TRAIN_SIZE * TRAIN_SIZE * 3);
    ys.set(s.mask, i * TRAIN_SIZE * TRAIN_SIZE);
  });
  return {
    xs: tf.tensor4d(xs, [n, TRAIN_SIZE, TRAIN_SIZE, 3]),
    ys: tf.tensor4d(ys, [n, TRAIN_SIZE, TRAIN_SIZE, 1]),
  };
}
