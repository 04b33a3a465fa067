/** PNG helpers over pngjs. Masks follow the pipeline convention:
 * single-channel 8-bit, foreground 255, background 0. */

import * as fs from "fs";
import { PNG } from "pngjs";

export interface RgbImage {
  width: number;
  height: number;
  /** interleaved r,g,b per pixel */
  data: Uint8Array;
}

export interface GrayImage {
  width: number;
  height: number;
  data: Uint8Array;
}

export function readRgb(path: string): RgbImage {
  const png = PNG.sync.read(fs.readFileSync(path));
  const out = new Uint8Array(png.width * png.height * 3);
  for (let i = 0; i < png.width * png.height; i++) {
    out[i * 3] = png.data[i * 4];
    out[i * 3 + 1] = png.data[i * 4 + 1];
    out[i * 3 + 2] = png.data[i * 4 + 2];
  }
  return { width: png.width, height: png.height, data: out };
}

export function readGray(path: string): GrayImage {
  const png = PNG.sync.read(fs.readFileSync(path));
  const out = new Uint8Array(png.width * png.height);
  for (let i = 0; i < png.width * png.height; i++) {
    out[i] = png.data[i * 4]; // gray PNGs decode with r=g=b
  }
  return { width: png.width, height: png.height, data: out };
}

export function writeRgb(path: string, img: RgbImage): void {
  const png = new PNG({ width: img.width, height: img.height });
  for (let i = 0; i < img.width * img.height; i++) {
    png.data[i * 4] = img.data[i * 3];
    png.data[i * 4 + 1] = img.data[i * 3 + 1];
    png.data[i * 4 + 2] = img.data[i * 3 + 2];
    png.data[i * 4 + 3] = 255;
  }
  fs.writeFileSync(path, PNG.sync.write(png, { colorType: 2 }));
}

/** Write a binary mask as grayscale PNG with values exactly 0/255. */
export function writeMask(path: string, width: number, height: number, mask: Uint8Array): void {
  const png = new PNG({ width, height });
  for (let i = 0; i < width * height; i++) {
    const v = mask[i] ? 255 : 0;
    png.data[i * 4] = v;
    png.data[i * 4 + 1] = v;
    png.data[i * 4 + 2] = v;
    png.data[i * 4 + 3] = 255;
  }
  fs.writeFileSync(path, PNG.sync.write(png, { colorType: 0, inputColorType: 6 as 6 }));
}
