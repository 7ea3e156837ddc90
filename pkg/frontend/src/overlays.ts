// Canvas overlay painters. Everything goes through the one view transform,
// matching the registration invariant of the main bitmap.

import type { AxisDoc, Point, Roi } from "./api.js";
import { imageToCanvas, type ViewTransform } from "./transform.js";

export const AXIS_COLOR = "#3fbf56"; // detected median axis, green
export const LI_COLOR = "#ff4545"; // lumen-intima, red
export const MA_COLOR = "#3fd6d6"; // media-adventitia, cyan
export const ROI_COLOR = "#e8c34a";
export const POINT_COLOR = "#f2f2f2";

export function drawContour(
  ctx: CanvasRenderingContext2D,
  t: ViewTransform,
  contour: AxisDoc,
  color: string,
  width = 1.5,
): void {
  if (contour.ordinates_px.length === 0) {
    return;
  }
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.beginPath();
  for (let i = 0; i < contour.ordinates_px.length; i++) {
    const p = imageToCanvas(t, { x: contour.x_start + i, y: contour.ordinates_px[i] });
    if (i === 0) {
      ctx.moveTo(p.x, p.y);
    } else {
      ctx.lineTo(p.x, p.y);
    }
  }
  ctx.stroke();
}

export function drawRoiGuides(
  ctx: CanvasRenderingContext2D,
  t: ViewTransform,
  roi: Roi,
  imageHeight: number,
): void {
  ctx.strokeStyle = ROI_COLOR;
  ctx.lineWidth = 1;
  for (const x of [roi.x_left, roi.x_right]) {
    const top = imageToCanvas(t, { x, y: 0 });
    const bottom = imageToCanvas(t, { x, y: imageHeight - 1 });
    ctx.beginPath();
    ctx.moveTo(top.x, top.y);
    ctx.lineTo(bottom.x, bottom.y);
    ctx.stroke();
  }
}

export function drawControlPoints(
  ctx: CanvasRenderingContext2D,
  t: ViewTransform,
  points: Point[],
): void {
  ctx.fillStyle = POINT_COLOR;
  ctx.strokeStyle = AXIS_COLOR;
  ctx.lineWidth = 1;
  for (const p of points) {
    const q = imageToCanvas(t, p);
    ctx.beginPath();
    ctx.arc(q.x, q.y, 4, 0, 2 * Math.PI);
    ctx.fill();
    ctx.stroke();
  }
  // preview segments between consecutive points; the real curve comes back
  // from the server after submission
  if (points.length > 1) {
    ctx.strokeStyle = AXIS_COLOR;
    ctx.setLineDash([4, 4]);
    ctx.beginPath();
    for (let i = 0; i < points.length; i++) {
      const q = imageToCanvas(t, points[i]);
      if (i === 0) {
        ctx.moveTo(q.x, q.y);
      } else {
        ctx.lineTo(q.x, q.y);
      }
    }
    ctx.stroke();
    ctx.setLineDash([]);
  }
}
