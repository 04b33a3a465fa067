/** Model persistence without tfjs-node: topology JSON plus a raw weight
 * binary, written through tf.io handlers. */

import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";

export async function saveModel(model: tf.LayersModel, dir: string): Promise<void> {
  fs.mkdirSync(dir, { recursive: true });
  await model.save(
    tf.io.withSaveHandler(async (artifacts) => {
      fs.writeFileSync(
        path.join(dir, "model.json"),
        JSON.stringify({
          modelTopology: artifacts.modelTopology,
          weightSpecs: artifacts.weightSpecs,
          format: artifacts.format,
          generatedBy: artifacts.generatedBy,
        })
      );
      const data = artifacts.weightData as ArrayBuffer;
      fs.writeFileSync(path.join(dir, "weights.bin"), Buffer.from(data));
      return { modelArtifactsInfo: { dateSaved: new Date(), modelTopologyType: "JSON" } };
    })
  );
}

export async function loadModel(dir: string): Promise<tf.LayersModel> {
  const meta = JSON.parse(fs.readFileSync(path.join(dir, "model.json"), "utf-8"));
  const weights = fs.readFileSync(path.join(dir, "weights.bin"));
  const weightData = weights.buffer.slice(weights.byteOffset, weights.byteOffset + weights.byteLength);
  return tf.loadLayersModel(
    tf.io.fromMemory({
      modelTopology: meta.modelTopology,
      weightSpecs: meta.weightSpecs,
      weightData,
    })
  );
}
