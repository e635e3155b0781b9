/** Box drawing and mask overlay helpers. The geometry functions are pure so
 * they can be tested without a DOM; the draw* functions are thin wrappers
 * over a 2D context. */

import type { Box } from './api.js';

/** Normalize a drag gesture (any corner order) into a positive-size box. */
export function boxFromDrag(x0: number, y0: number, x1: number, y1: number): Box {
  const x = Math.min(x0, x1);
  const y = Math.min(y0, y1);
  return { x: Math.round(x), y: Math.round(y), w: Math.round(Math.abs(x1 - x0)), h: Math.round(Math.abs(y1 - y0)) };
}

/** Clamp a box to image bounds, keeping at least one pixel. Drawn boxes are
 * always clamped before submission. */
export function clampBoxToImage(box: Box, width: number, height: number): Box {
  const x = Math.min(Math.max(Math.round(box.x), 0), width - 1);
  const y = Math.min(Math.max(Math.round(box.y), 0), height - 1);
  const w = Math.max(1, Math.min(Math.round(box.w), width - x));
  const h = Math.max(1, Math.min(Math.round(box.h), height - y));
  return { x, y, w, h };
}

export const OVERLAY_RGBA: [number, number, number, number] = [235, 64, 52, 110];

/** Expand a decoded 0/1 mask into RGBA bytes for an overlay ImageData. */
export function maskToRgba(
  mask: Uint8Array,
  width: number,
  height: number,
  rgba: [number, number, number, number] = OVERLAY_RGBA,
): Uint8ClampedArray {
  if (mask.length !== width * height) {
    throw new Error(`mask length ${mask.length} != ${width}x${height}`);
  }
  const out = new Uint8ClampedArray(width * height * 4);
  for (let i = 0; i < mask.length; i++) {
    if (mask[i] === 1) {
      out[i * 4] = rgba[0];
      out[i * 4 + 1] = rgba[1];
      out[i * 4 + 2] = rgba[2];
      out[i * 4 + 3] = rgba[3];
    }
  }
  return out;
}

export function drawMaskOverlay(
  ctx: CanvasRenderingContext2D,
  mask: Uint8Array,
  width: number,
  height: number,
): void {
  const image = ctx.createImageData(width, height);
  image.data.set(maskToRgba(mask, width, height));
  ctx.putImageData(image, 0, 0);
}

export function drawBox(ctx: CanvasRenderingContext2D, box: Box, color: string): void {
  ctx.save();
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.strokeRect(box.x + 0.5, box.y + 0.5, box.w, box.h);
  ctx.restore();
}
