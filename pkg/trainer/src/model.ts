/** Toy attention U-Net for 128x128 lesion-probability maps, plus the two
 * training losses. A stride-2 stem keeps every 3x3 convolution at 64x64 or
 * below so pure-CPU training stays tractable; attention gates modulate each
 * skip connection with a coarser-level gating signal, and a final upsample
 * restores the full 128x128 probability map. A few thousand parameters,
 * far under the 2M cap. */

import * as tf from "@tensorflow/tfjs";
import { TRAIN_SIZE } from "./corpus";

export const MAX_PARAMS = 2_000_000;

function conv(
  filters: number,
  kernelSize: number,
  name: string,
  seed: number,
  opts: { strides?: number; activation?: "relu" | "sigmoid" } = {}
) {
  return tf.layers.conv2d({
    filters,
    kernelSize,
    strides: opts.strides ?? 1,
    padding: "same",
    activation: opts.activation,
    name,
    kernelInitializer: tf.initializers.glorotUniform({ seed }),
  });
}

function attentionGate(
  skip: tf.SymbolicTensor,
  gate: tf.SymbolicTensor,
  inter: number,
  tag: string,
  seed: number
): tf.SymbolicTensor {
  const thetaX = conv(inter, 1, `att_${tag}_theta`, seed).apply(skip) as tf.SymbolicTensor;
  const phiG = conv(inter, 1, `att_${tag}_phi`, seed + 1).apply(gate) as tf.SymbolicTensor;
  const added = tf.layers.add({ name: `att_${tag}_add` }).apply([thetaX, phiG]) as tf.SymbolicTensor;
  const act = tf.layers.reLU({ name: `att_${tag}_relu` }).apply(added) as tf.SymbolicTensor;
  const psi = conv(1, 1, `att_${tag}_psi`, seed + 2, { activation: "sigmoid" }).apply(act) as tf.SymbolicTensor;
  return tf.layers.multiply({ name: `att_${tag}_scale` }).apply([skip, psi]) as tf.SymbolicTensor;
}

export function buildModel(baseFilters = 4, seed = 1234): tf.LayersModel {
  const f = baseFilters;
  const input = tf.input({ shape: [TRAIN_SIZE, TRAIN_SIZE, 3] });

  // stride-2 stem: all heavier convs run at half resolution
  const enc1 = conv(f, 3, "enc1", seed, { strides: 2, activation: "relu" }).apply(input) as tf.SymbolicTensor; // 64
  const pool1 = tf.layers.maxPooling2d({ poolSize: 2 }).apply(enc1) as tf.SymbolicTensor; // 32

  const enc2 = conv(2 * f, 3, "enc2", seed + 10, { activation: "relu" }).apply(pool1) as tf.SymbolicTensor;
  const pool2 = tf.layers.maxPooling2d({ poolSize: 2 }).apply(enc2) as tf.SymbolicTensor; // 16

  const bottleneck = conv(4 * f, 3, "bottleneck", seed + 20, { activation: "relu" }).apply(
    pool2
  ) as tf.SymbolicTensor;

  const up2 = conv(2 * f, 1, "up2_reduce", seed + 30).apply(
    tf.layers.upSampling2d({ size: [2, 2] }).apply(bottleneck) as tf.SymbolicTensor
  ) as tf.SymbolicTensor; // 32
  const att2 = attentionGate(enc2, up2, f, "l2", seed + 40);
  const dec2 = conv(2 * f, 3, "dec2", seed + 50, { activation: "relu" }).apply(
    tf.layers.concatenate().apply([up2, att2]) as tf.SymbolicTensor
  ) as tf.SymbolicTensor;

  const up1 = conv(f, 1, "up1_reduce", seed + 60).apply(
    tf.layers.upSampling2d({ size: [2, 2] }).apply(dec2) as tf.SymbolicTensor
  ) as tf.SymbolicTensor; // 64
  const att1 = attentionGate(enc1, up1, f, "l1", seed + 70);
  const dec1 = conv(f, 3, "dec1", seed + 80, { activation: "relu" }).apply(
    tf.layers.concatenate().apply([up1, att1]) as tf.SymbolicTensor
  ) as tf.SymbolicTensor;

  const full = tf.layers.upSampling2d({ size: [2, 2] }).apply(dec1) as tf.SymbolicTensor; // 128
  const output = conv(1, 1, "probability", seed + 90, { activation: "sigmoid" }).apply(
    full
  ) as tf.SymbolicTensor;

  const model = tf.model({ inputs: input, outputs: output });
  if (model.countParams() > MAX_PARAMS) {
    throw new Error(`model has ${model.countParams()} parameters, above the ${MAX_PARAMS} cap`);
  }
  return model;
}

export type LossName = "dice" | "focal";

export function diceLoss(yTrue: tf.Tensor, yPred: tf.Tensor): tf.Scalar {
  return tf.tidy(() => {
    const smooth = 1.0;
    const inter = tf.sum(tf.mul(yTrue, yPred));
    const total = tf.add(tf.sum(yTrue), tf.sum(yPred));
    const dice = tf.div(tf.add(tf.mul(inter, 2), smooth), tf.add(total, smooth));
    return tf.sub(1, dice) as tf.Scalar;
  });
}

export function focalLoss(yTrue: tf.Tensor, yPred: tf.Tensor, gamma = 2.0, alpha = 0.25): tf.Scalar {
  return tf.tidy(() => {
    const eps = 1e-7;
    const p = tf.clipByValue(yPred, eps, 1 - eps);
    const pt = tf.add(tf.mul(yTrue, p), tf.mul(tf.sub(1, yTrue), tf.sub(1, p)));
    const alphaT = tf.add(tf.mul(yTrue, alpha), tf.mul(tf.sub(1, yTrue), 1 - alpha));
    const loss = tf.neg(tf.mul(tf.mul(alphaT, tf.pow(tf.sub(1, pt), gamma)), tf.log(pt)));
    return tf.mean(loss) as tf.Scalar;
  });
}

export function lossByName(name: LossName): (t: tf.Tensor, p: tf.Tensor) => tf.Scalar {
  if (name !== "dice" && name !== "focal") {
    throw new Error(`unknown loss ${name}; expected "dice" or "focal"`);
  }
  return name === "dice" ? diceLoss : (t, p) => focalLoss(t, p);
}

/** Pixelwise Dice of a thresholded prediction against a binary target. */
export function diceScore(target: tf.Tensor, probs: tf.Tensor, threshold = 0.5): number {
  return tf.tidy(() => {
    const pred = probs.greaterEqual(threshold).cast("float32");
    const inter = tf.sum(tf.mul(target, pred)).dataSync()[0];
    const total = tf.sum(target).dataSync()[0] + tf.sum(pred).dataSync()[0];
    return total === 0 ? 1.0 : (2 * inter) / total;
  });
}
