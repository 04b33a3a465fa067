/** Export guidance masks: run an image through a trained model and write the
 * thresholded 128x128 probability map in the pipeline's mask convention. */

import * as tf from "@tensorflow/tfjs";
import { TRAIN_SIZE } from "./corpus";
import { readRgb, writeMask } from "./png";

export const EXPORT_THRESHOLD = 0.5;

export function imageToInput(path: string): tf.Tensor4D {
  const img = readRgb(path);
  return tf.tidy(() => {
    const raw = tf.tensor3d(Array.from(img.data), [img.height, img.width, 3], "float32");
    const resized =
      img.width === TRAIN_SIZE && img.height === TRAIN_SIZE
        ? raw
        : tf.image.resizeBilinear(raw as tf.Tensor3D, [TRAIN_SIZE, TRAIN_SIZE]);
    return resized.div(256).expandDims(0) as tf.Tensor4D;
  });
}

export function exportGuidance(model: tf.LayersModel, imagePath: string, outMaskPath: string): void {
  const input = imageToInput(imagePath);
  const probs = model.predict(input) as tf.Tensor;
  const values = probs.dataSync();
  const mask = new Uint8Array(TRAIN_SIZE * TRAIN_SIZE);
  for (let i = 0; i < mask.length; i++) {
    mask[i] = values[i] >= EXPORT_THRESHOLD ? 1 : 0;
  }
  input.dispose();
  probs.dispose();
  writeMask(outMaskPath, TRAIN_SIZE, TRAIN_SIZE, mask);
}
