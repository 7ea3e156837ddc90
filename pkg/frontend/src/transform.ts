// Zoom/pan mapping between image pixels and canvas pixels. One affine
// transform is used for the bitmap, every overlay, and pointer events, so
// contours cannot drift against the image at any zoom level.

import type { Point } from "./api.js";

export interface ViewTransform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

export const MIN_SCALE = 0.05;
export const MAX_SCALE = 64;

export function identity(): ViewTransform {
  return { scale: 1, offsetX: 0, offsetY: 0 };
}

export function imageToCanvas(t: ViewTransform, p: Point): Point {
  return { x: p.x * t.scale + t.offsetX, y: p.y * t.scale + t.offsetY };
}

export function canvasToImage(t: ViewTransform, p: Point): Point {
  return { x: (p.x - t.offsetX) / t.scale, y: (p.y - t.offsetY) / t.scale };
}

export function panned(t: ViewTransform, dx: number, dy: number): ViewTransform {
  return { scale: t.scale, offsetX: t.offsetX + dx, offsetY: t.offsetY + dy };
}

/** Rescale about a canvas-space anchor; the image point under the anchor
 * stays put. */
export function zoomedAt(t: ViewTransform, anchor: Point, factor: number): ViewTransform {
  const scale = Math.min(MAX_SCALE, Math.max(MIN_SCALE, t.scale * factor));
  const k = scale / t.scale;
  return {
    scale,
    offsetX: anchor.x - (anchor.x - t.offsetX) * k,
    offsetY: anchor.y - (anchor.y - t.offsetY) * k,
  };
}

/** Largest transform that shows the whole image centered in the canvas. */
export function fitTo(
  imageWidth: number,
  imageHeight: number,
  canvasWidth: number,
  canvasHeight: number,
): ViewTransform {
  const scale = Math.min(canvasWidth / imageWidth, canvasHeight / imageHeight);
  return {
    scale,
    offsetX: (canvasWidth - imageWidth * scale) / 2,
    offsetY: (canvasHeight - imageHeight * scale) / 2,
  };
}
