/** Synthetic blob corpus: irregular dark lesions on a fundus-toned textured
 * background, with exact masks. Blobs are parametric (radial wobble around
 * an ellipse), so the same specimen can be rasterized at the 128px training
 * size and at full resolution for end-to-end runs. */

import * as fs from "fs";
import * as path from "path";
import { gaussian, makeRng, uniform } from "./rng";
import { writeMask, writeRgb } from "./png";

export const TRAIN_SIZE = 128;

const BACKGROUND: [number, number, number] = [168, 106, 72];
const LESION: [number, number, number] = [64, 30, 26];

export interface BlobSpec {
  /** center and radii as fractions of the frame */
  cx: number;
  cy: number;
  r0: number;
  aspect: number;
  theta: number;
  /** radial wobble harmonics */
  amp2: number;
  phase2: number;
  amp3: number;
  phase3: number;
  noiseSeed: number;
}

export function sampleBlob(seed: number): BlobSpec {
  const rng = makeRng(seed * 2654435761 + 7);
  return {
    cx: uniform(rng, 0.3, 0.7),
    cy: uniform(rng, 0.3, 0.7),
    r0: uniform(rng, 0.12, 0.2),
    aspect: uniform(rng, 0.8, 1.25),
    theta: uniform(rng, 0, Math.PI),
    amp2: uniform(rng, 0.0, 0.15),
    phase2: uniform(rng, 0, 2 * Math.PI),
    amp3: uniform(rng, 0.0, 0.1),
    phase3: uniform(rng, 0, 2 * Math.PI),
    noiseSeed: Math.floor(rng() * 1e9),
  };
}

export function rasterizeMask(spec: BlobSpec, size: number): Uint8Array {
  const mask = new Uint8Array(size * size);
  const cx = spec.cx * size;
  const cy = spec.cy * size;
  const ax = spec.r0 * Math.sqrt(spec.aspect) * size;
  const ay = (spec.r0 / Math.sqrt(spec.aspect)) * size;
  const cosT = Math.cos(spec.theta);
  const sinT = Math.sin(spec.theta);
  for (let y = 0; y < size; y++) {
    for (let x = 0; x < size; x++) {
      const dx = x - cx;
      const dy = y - cy;
      const u = dx * cosT + dy * sinT;
      const v = -dx * sinT + dy * cosT;
      const rho = Math.sqrt((u / ax) ** 2 + (v / ay) ** 2);
      const phi = Math.atan2(v / ay, u / ax);
      const wobble =
        1 + spec.amp2 * Math.sin(2 * phi + spec.phase2) + spec.amp3 * Math.sin(3 * phi + spec.phase3);
      if (rho <= wobble) mask[y * size + x] = 1;
    }
  }
  return mask;
}

export function rasterizeImage(spec: BlobSpec, size: number, noiseStd = 3.0): Uint8Array {
  const mask = rasterizeMask(spec, size);
  const rng = makeRng(spec.noiseSeed);
  const img = new Uint8Array(size * size * 3);
  for (let i = 0; i < size * size; i++) {
    const color = mask[i] ? LESION : BACKGROUND;
    for (let c = 0; c < 3; c++) {
      const v = color[c] + gaussian(rng, 0, noiseStd);
      img[i * 3 + c] = Math.max(0, Math.min(255, Math.round(v)));
    }
  }
  return img;
}

export interface CorpusOptions {
  count: number;
  seed: number;
  size?: number;
  noiseStd?: number;
}

/** Write image/mask pairs under <dir>/images and <dir>/masks. */
export function generateCorpus(dir: string, opts: CorpusOptions): string[] {
  const size = opts.size ?? TRAIN_SIZE;
  const imagesDir = path.join(dir, "images");
  const masksDir = path.join(dir, "masks");
  fs.mkdirSync(imagesDir, { recursive: true });
  fs.mkdirSync(masksDir, { recursive: true });
  const names: string[] = [];
  for (let i = 0; i < opts.count; i++) {
    const spec = sampleBlob(opts.seed + i);
    const name = `blob_${String(i).padStart(3, "0")}.png`;
    writeRgb(path.join(imagesDir, name), {
      width: size,
      height: size,
      data: rasterizeImage(spec, size, opts.noiseStd ?? 3.0),
    });
    writeMask(path.join(masksDir, name), size, size, rasterizeMask(spec, size));
    names.push(name);
  }
  return names;
}
