import { describe, expect, it } from "vitest";

import type { ItemDetail } from "../src/api.js";
import { ReviewerState } from "../src/state.js";

function item(overrides: Partial<ItemDetail> = {}): ItemDetail {
  return {
    id: "img-000",
    status: "ingested",
    roi: null,
    has_result: false,
    farwall: null,
    manual_axis: null,
    annotations: [],
    ...overrides,
  };
}

describe("ROI picking", () => {
  it("orders two clicks left-right no matter the click order", () => {
    const s = new ReviewerState();
    s.applyItem(item());
    s.beginRoi();
    expect(s.clickAt({ x: 100, y: 50 })).toEqual({ kind: "none" });
    const action = s.clickAt({ x: 60, y: 55 });
    expect(action).toEqual({ kind: "submit-roi", roi: { x_left: 60, x_right: 100 } });
  });

  it("rounds clicks to integer columns", () => {
    const s = new ReviewerState();
    s.applyItem(item());
    s.beginRoi();
    s.clickAt({ x: 447.4, y: 10 });
    const action = s.clickAt({ x: 63.7, y: 10 });
    expect(action).toEqual({ kind: "submit-roi", roi: { x_left: 64, x_right: 447 } });
  });

  it("ignores clicks outside an edit mode", () => {
    const s = new ReviewerState();
    s.applyItem(item());
    expect(s.clickAt({ x: 10, y: 10 })).toEqual({ kind: "none" });
    expect(s.roiClicks).toHaveLength(0);
  });

  it("keeps editing with the server message after a narrow-ROI rejection", () => {
    const s = new ReviewerState();
    s.applyItem(item());
    s.beginRoi();
    s.clickAt({ x: 100, y: 0 });
    s.clickAt({ x: 150, y: 0 });
    s.roiRejected("ROI width 50 px is below the 128 px patch width; widen the ROI");
    expect(s.mode).toBe("roi-edit");
    expect(s.roiClicks).toHaveLength(0);
    expect(s.prompt).toMatch(/widen the ROI/);
  });

  it("returns to view mode once the server confirms the ROI", () => {
    const s = new ReviewerState();
    s.applyItem(item());
    s.beginRoi();
    expect(s.canRunFarwall()).toBe(false);
    s.applyItem(item({ status: "roi_set", roi: { x_left: 64, x_right: 447 } }));
    expect(s.mode).toBe("view");
    expect(s.roiClicks).toHaveLength(0);
    expect(s.prompt).toBeNull();
    expect(s.canRunFarwall()).toBe(true);
  });
});

describe("axis editing", () => {
  it("opens automatically when far-wall detection failed", () => {
    const s = new ReviewerState();
    s.applyItem(item({ status: "farwall_failed", roi: { x_left: 64, x_right: 447 } }));
    expect(s.mode).toBe("axis-edit");
  });

  it("requires two points with strictly increasing columns", () => {
    const s = new ReviewerState();
    s.beginAxisEdit();
    expect(s.canSubmitAxis()).toBe(false);
    expect(s.addAxisPoint({ x: 200, y: 340 })).toBe(true);
    expect(s.canSubmitAxis()).toBe(false);
    expect(s.addAxisPoint({ x: 200, y: 500 })).toBe(false); // duplicate column
    expect(s.addAxisPoint({ x: 64, y: 335 })).toBe(true);
    expect(s.canSubmitAxis()).toBe(true);
    // stored sorted by x regardless of entry order
    expect(s.axisPoints.map((p) => p.x)).toEqual([64, 200]);
  });

  it("click routing adds axis points in axis mode", () => {
    const s = new ReviewerState();
    s.beginAxisEdit();
    s.clickAt({ x: 300, y: 360 });
    s.clickAt({ x: 100, y: 350 });
    expect(s.axisPoints.map((p) => p.x)).toEqual([100, 300]);
  });

  it("move keeps ordering and refuses column collisions", () => {
    const s = new ReviewerState();
    s.beginAxisEdit();
    s.addAxisPoint({ x: 64, y: 335 });
    s.addAxisPoint({ x: 200, y: 340 });
    s.addAxisPoint({ x: 447, y: 345 });
    expect(s.moveAxisPoint(0, { x: 200, y: 400 })).toBe(false);
    expect(s.moveAxisPoint(0, { x: 300, y: 400 })).toBe(true);
    expect(s.axisPoints.map((p) => p.x)).toEqual([200, 300, 447]);
    s.removeAxisPoint(1);
    expect(s.axisPoints.map((p) => p.x)).toEqual([200, 447]);
  });

  it("submission payload carries the control points verbatim", () => {
    const s = new ReviewerState();
    s.beginAxisEdit();
    s.addAxisPoint({ x: 447, y: 345.5 });
    s.addAxisPoint({ x: 64, y: 335.25 });
    expect(s.axisSubmission()).toEqual({
      control_points: [
        { x: 64, y: 335.25 },
        { x: 447, y: 345.5 },
      ],
    });
  });

  it("closes once the server records the corrected axis", () => {
    const s = new ReviewerState();
    s.applyItem(item({ status: "farwall_failed", roi: { x_left: 64, x_right: 447 } }));
    s.addAxisPoint({ x: 64, y: 335 });
    s.addAxisPoint({ x: 447, y: 345 });
    s.applyItem(item({ status: "farwall_corrected", roi: { x_left: 64, x_right: 447 } }));
    expect(s.mode).toBe("view");
  });
});

describe("workflow gates", () => {
  it("segmentation unlocks from a detected axis without any manual step", () => {
    const s = new ReviewerState();
    s.applyItem(item({ status: "roi_set", roi: { x_left: 64, x_right: 447 } }));
    expect(s.canSegment()).toBe(false);
    s.applyItem(item({ status: "farwall_ok", roi: { x_left: 64, x_right: 447 } }));
    expect(s.canSegment()).toBe(true);
    expect(s.mode).toBe("view"); // accepting the detection needs no edit mode
  });

  it("segmentation stays available after a run for re-runs", () => {
    const s = new ReviewerState();
    s.applyItem(item({ status: "segmented", roi: { x_left: 64, x_right: 447 }, has_result: true }));
    expect(s.canSegment()).toBe(true);
  });

  it("overlay toggles are pure client state", () => {
    const s = new ReviewerState();
    expect(s.overlays.li).toBe(true);
    s.toggleOverlay("li");
    expect(s.overlays.li).toBe(false);
    s.toggleOverlay("li");
    expect(s.overlays.li).toBe(true);
    // toggling never marks the item stale, i.e. never forces a re-fetch
    expect(s.needsRefresh()).toBe(false);
  });

  it("a wrong-state response marks the view stale until the next item doc", () => {
    const s = new ReviewerState();
    s.applyItem(item());
    expect(s.needsRefresh()).toBe(false);
    s.onWrongState();
    expect(s.needsRefresh()).toBe(true);
    s.applyItem(item({ status: "roi_set", roi: { x_left: 64, x_right: 447 } }));
    expect(s.needsRefresh()).toBe(false);
  });

  it("cancel drops both edit buffers", () => {
    const s = new ReviewerState();
    s.beginRoi();
    s.clickAt({ x: 12, y: 0 });
    s.cancelEdit();
    expect(s.mode).toBe("view");
    expect(s.roiClicks).toHaveLength(0);
    s.beginAxisEdit();
    s.addAxisPoint({ x: 10, y: 10 });
    s.cancelEdit();
    expect(s.axisPoints).toHaveLength(0);
  });
});
