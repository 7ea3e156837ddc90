// View-side state machine, free of DOM and network so it can be tested
// headlessly. The wiring layer feeds it server documents and pointer
// events; it answers with the single action to perform, if any. Numbers
// are never computed here, only routed.

import type { ItemDetail, Point, Roi } from "./api.js";

export type Mode = "view" | "roi-edit" | "axis-edit";

export type UiAction =
  | { kind: "none" }
  | { kind: "submit-roi"; roi: Roi };

export interface OverlayToggles {
  axis: boolean;
  li: boolean;
  ma: boolean;
  debug: boolean;
}

export class ReviewerState {
  item: ItemDetail | null = null;
  mode: Mode = "view";
  roiClicks: Point[] = [];
  axisPoints: Point[] = [];
  overlays: OverlayToggles = { axis: true, li: true, ma: true, debug: false };
  /** Inline message, e.g. the server's widen-the-ROI complaint. */
  prompt: string | null = null;
  private stale = false;

  /** Absorb a fresh item document from the server. */
  applyItem(item: ItemDetail): void {
    this.item = item;
    this.stale = false;
    if (item.status === "farwall_failed") {
      // detection failed, drop straight into manual correction
      if (this.mode !== "axis-edit") {
        this.beginAxisEdit();
      }
      return;
    }
    if (this.mode === "roi-edit" && item.roi !== null) {
      this.mode = "view";
      this.roiClicks = [];
      this.prompt = null;
    }
    if (this.mode === "axis-edit" && item.status === "farwall_corrected") {
      this.mode = "view";
    }
  }

  beginRoi(): void {
    this.mode = "roi-edit";
    this.roiClicks = [];
    this.prompt = null;
  }

  beginAxisEdit(): void {
    this.mode = "axis-edit";
    this.axisPoints = [];
    this.prompt = null;
  }

  cancelEdit(): void {
    this.mode = "view";
    this.roiClicks = [];
    this.axisPoints = [];
  }

  /** A click in image coordinates. In ROI mode the second click yields the
   * submission, left and right sorted regardless of click order. */
  clickAt(p: Point): UiAction {
    if (this.mode === "roi-edit") {
      this.roiClicks.push(p);
      if (this.roiClicks.length < 2) {
        return { kind: "none" };
      }
      const a = Math.round(this.roiClicks[0].x);
      const b = Math.round(this.roiClicks[1].x);
      return {
        kind: "submit-roi",
        roi: { x_left: Math.min(a, b), x_right: Math.max(a, b) },
      };
    }
    if (this.mode === "axis-edit") {
      this.addAxisPoint(p);
      return { kind: "none" };
    }
    return { kind: "none" };
  }

  /** The server rejected the ROI (422): keep editing, show its message. */
  roiRejected(message: string): void {
    this.mode = "roi-edit";
    this.roiClicks = [];
    this.prompt = message;
  }

  /** Insert keeping abscissas strictly increasing; a duplicate column is
   * refused rather than silently replaced. */
  addAxisPoint(p: Point): boolean {
    if (this.axisPoints.some((q) => q.x === p.x)) {
      return false;
    }
    this.axisPoints.push(p);
    this.axisPoints.sort((a, b) => a.x - b.x);
    return true;
  }

  removeAxisPoint(index: number): void {
    this.axisPoints.splice(index, 1);
  }

  moveAxisPoint(index: number, p: Point): boolean {
    const others = this.axisPoints.filter((_, i) => i !== index);
    if (others.some((q) => q.x === p.x)) {
      return false;
    }
    this.axisPoints[index] = p;
    this.axisPoints.sort((a, b) => a.x - b.x);
    return true;
  }

  canSubmitAxis(): boolean {
    if (this.axisPoints.length < 2) {
      return false;
    }
    for (let i = 1; i < this.axisPoints.length; i++) {
      if (this.axisPoints[i].x <= this.axisPoints[i - 1].x) {
        return false;
      }
    }
    return true;
  }

  axisSubmission(): { control_points: Point[] } {
    return { control_points: this.axisPoints.map((p) => ({ x: p.x, y: p.y })) };
  }

  canRunFarwall(): boolean {
    return this.item !== null && this.item.roi !== null;
  }

  canSegment(): boolean {
    if (this.item === null) {
      return false;
    }
    return (
      this.item.status === "farwall_ok" ||
      this.item.status === "farwall_corrected" ||
      this.item.status === "segmented"
    );
  }

  /** Pure client-side flip; deliberately returns nothing so callers cannot
   * mistake a toggle for something that needs the network. */
  toggleOverlay(name: keyof OverlayToggles): void {
    this.overlays[name] = !this.overlays[name];
  }

  /** A 409 from the server means our picture of the item is stale. */
  onWrongState(): void {
    this.stale = true;
  }

  needsRefresh(): boolean {
    return this.stale;
  }
}
