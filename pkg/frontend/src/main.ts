// Wiring between the DOM, the gateway client, and the state machine.
// Pointer math goes through the shared view transform; request handling is
// serialized per item so a slow segmentation cannot interleave with a ROI
// change.

import {
  ApiError,
  GatewayClient,
  parseResult,
  type ItemDetail,
  type ItemSummary,
  type Point,
  type ResultDoc,
} from "./api.js";
import {
  AXIS_COLOR,
  LI_COLOR,
  MA_COLOR,
  drawContour,
  drawControlPoints,
  drawRoiGuides,
} from "./overlays.js";
import { ReviewerState } from "./state.js";
import {
  canvasToImage,
  fitTo,
  identity,
  imageToCanvas,
  panned,
  zoomedAt,
  type ViewTransform,
} from "./transform.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

const params = new URLSearchParams(window.location.search);
const client = new GatewayClient(params.get("api") ?? "");

const canvas = el<HTMLCanvasElement>("viewer");
const maybeCtx = canvas.getContext("2d");
if (maybeCtx === null) {
  throw new Error("canvas 2d context unavailable");
}
const ctx: CanvasRenderingContext2D = maybeCtx;

const itemSelect = el<HTMLSelectElement>("item-select");
const statusLine = el<HTMLElement>("status-line");
const promptLine = el<HTMLElement>("prompt-line");
const imtLine = el<HTMLElement>("imt-line");
const hoverLine = el<HTMLElement>("hover-line");
const buttons = {
  roi: el<HTMLButtonElement>("btn-roi"),
  farwall: el<HTMLButtonElement>("btn-farwall"),
  axis: el<HTMLButtonElement>("btn-axis"),
  submitAxis: el<HTMLButtonElement>("btn-submit-axis"),
  cancel: el<HTMLButtonElement>("btn-cancel"),
  segment: el<HTMLButtonElement>("btn-segment"),
  export: el<HTMLButtonElement>("btn-export"),
};
const toggles = {
  axis: el<HTMLInputElement>("toggle-axis"),
  li: el<HTMLInputElement>("toggle-li"),
  ma: el<HTMLInputElement>("toggle-ma"),
};

const state = new ReviewerState();
let bitmap: ImageBitmap | null = null;
let transform: ViewTransform = identity();
let result: ResultDoc | null = null;
let resultText: string | null = null;
let dragging: { kind: "pan"; last: Point } | { kind: "point"; index: number } | null = null;

// one request at a time per view; later clicks queue behind earlier ones
let inflight: Promise<unknown> = Promise.resolve();
function enqueue<T>(task: () => Promise<T>): Promise<T> {
  const next = inflight.then(task, task);
  inflight = next.then(
    () => undefined,
    () => undefined,
  );
  return next;
}

function setPrompt(text: string | null): void {
  promptLine.textContent = text ?? "";
  promptLine.style.display = text ? "block" : "none";
}

function describe(item: ItemDetail): string {
  const roi = item.roi ? `ROI [${item.roi.x_left}, ${item.roi.x_right}]` : "no ROI";
  return `${item.id}: ${item.status}, ${roi}`;
}

function syncControls(): void {
  const item = state.item;
  buttons.roi.disabled = item === null;
  buttons.farwall.disabled = !state.canRunFarwall();
  buttons.axis.disabled = item === null || item.roi === null;
  buttons.submitAxis.disabled = state.mode !== "axis-edit" || !state.canSubmitAxis();
  buttons.cancel.disabled = state.mode === "view";
  buttons.segment.disabled = !state.canSegment();
  buttons.export.disabled = resultText === null;
  statusLine.textContent = item ? describe(item) : "no item";
  setPrompt(state.prompt);
  if (result && result.imt) {
    imtLine.textContent = `IMT mean ${result.imt.mean_um.toFixed(1)} um`;
  } else {
    imtLine.textContent = result ? "no IMT (run failed)" : "";
  }
}

function render(): void {
  ctx.fillStyle = "#101417";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  if (bitmap) {
    ctx.imageSmoothingEnabled = transform.scale < 3;
    ctx.drawImage(
      bitmap,
      transform.offsetX,
      transform.offsetY,
      bitmap.width * transform.scale,
      bitmap.height * transform.scale,
    );
  }
  const item = state.item;
  if (item && item.roi && bitmap) {
    drawRoiGuides(ctx, transform, item.roi, bitmap.height);
  }
  if (state.overlays.axis && item && item.farwall && item.farwall.axis) {
    drawContour(ctx, transform, item.farwall.axis, AXIS_COLOR);
  }
  if (result) {
    if (state.overlays.li && result.li) {
      drawContour(ctx, transform, result.li, LI_COLOR);
    }
    if (state.overlays.ma && result.ma) {
      drawContour(ctx, transform, result.ma, MA_COLOR);
    }
  }
  if (state.mode === "axis-edit") {
    drawControlPoints(ctx, transform, state.axisPoints);
  }
  if (state.mode === "roi-edit" && bitmap) {
    for (const c of state.roiClicks) {
      drawRoiGuides(ctx, transform, { x_left: Math.round(c.x), x_right: Math.round(c.x) }, bitmap.height);
    }
  }
  syncControls();
}

async function refreshItem(): Promise<void> {
  const id = itemSelect.value;
  if (!id) {
    return;
  }
  const item = await client.getItem(id);
  state.applyItem(item);
  if (item.has_result) {
    resultText = await client.getResultText(id);
    result = parseResult(resultText);
  } else {
    resultText = null;
    result = null;
  }
  render();
}

async function loadItem(id: string): Promise<void> {
  const payload = await client.fetchImage(id);
  bitmap = await createImageBitmap(payload.blob);
  transform = fitTo(bitmap.width, bitmap.height, canvas.width, canvas.height);
  await refreshItem();
}

function fail(err: unknown): void {
  if (err instanceof ApiError && err.status === 409) {
    // our view of the item is stale; re-sync and let the user retry
    state.onWrongState();
    setPrompt(`${err.message} (state refreshed)`);
    void enqueue(refreshItem);
    return;
  }
  setPrompt(err instanceof Error ? err.message : String(err));
}

function submitRoi(roi: { x_left: number; x_right: number }): void {
  void enqueue(async () => {
    try {
      await client.putRoi(itemSelect.value, roi);
      result = null;
      resultText = null;
      await refreshItem();
    } catch (err) {
      if (err instanceof ApiError && err.status === 422) {
        state.roiRejected(err.message);
        render();
        return;
      }
      fail(err);
    }
  });
}

// ----------------------------------------------------------- pointer input

function canvasPoint(ev: MouseEvent): Point {
  const rect = canvas.getBoundingClientRect();
  return { x: ev.clientX - rect.left, y: ev.clientY - rect.top };
}

canvas.addEventListener("mousedown", (ev) => {
  const cp = canvasPoint(ev);
  if (ev.button === 1 || ev.shiftKey) {
    dragging = { kind: "pan", last: cp };
    ev.preventDefault();
    return;
  }
  if (state.mode === "axis-edit") {
    // grab an existing control point when close enough
    for (let i = 0; i < state.axisPoints.length; i++) {
      const qc = imageToCanvas(transform, state.axisPoints[i]);
      if (Math.hypot(qc.x - cp.x, qc.y - cp.y) < 6) {
        dragging = { kind: "point", index: i };
        return;
      }
    }
  }
});

canvas.addEventListener("mousemove", (ev) => {
  const cp = canvasPoint(ev);
  const ip = canvasToImage(transform, cp);
  if (dragging?.kind === "pan") {
    transform = panned(transform, cp.x - dragging.last.x, cp.y - dragging.last.y);
    dragging.last = cp;
    render();
    return;
  }
  if (dragging?.kind === "point") {
    state.moveAxisPoint(dragging.index, ip);
    render();
    return;
  }
  if (result && result.imt && result.li) {
    const col = Math.round(ip.x) - result.li.x_start;
    if (col >= 0 && col < result.imt.profile_um.length) {
      hoverLine.textContent = `column ${Math.round(ip.x)}: ${result.imt.profile_um[col].toFixed(1)} um`;
    } else {
      hoverLine.textContent = "";
    }
  }
});

canvas.addEventListener("mouseup", (ev) => {
  if (dragging) {
    dragging = null;
    return;
  }
  if (ev.button !== 0) {
    return;
  }
  const ip = canvasToImage(transform, canvasPoint(ev));
  const action = state.clickAt(ip);
  if (action.kind === "submit-roi") {
    submitRoi(action.roi);
  }
  render();
});

canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  transform = zoomedAt(transform, canvasPoint(ev), ev.deltaY < 0 ? 1.15 : 1 / 1.15);
  render();
});

// ---------------------------------------------------------------- buttons

buttons.roi.addEventListener("click", () => {
  state.beginRoi();
  render();
});

buttons.farwall.addEventListener("click", () => {
  void enqueue(async () => {
    try {
      await client.runFarwall(itemSelect.value);
      await refreshItem();
    } catch (err) {
      fail(err);
    }
  });
});

buttons.axis.addEventListener("click", () => {
  state.beginAxisEdit();
  render();
});

buttons.submitAxis.addEventListener("click", () => {
  if (!state.canSubmitAxis()) {
    return;
  }
  const payload = state.axisSubmission().control_points;
  void enqueue(async () => {
    try {
      await client.putAxis(itemSelect.value, payload);
      await refreshItem();
    } catch (err) {
      fail(err);
    }
  });
});

buttons.cancel.addEventListener("click", () => {
  state.cancelEdit();
  render();
});

buttons.segment.addEventListener("click", () => {
  void enqueue(async () => {
    try {
      resultText = await client.segment(itemSelect.value);
      result = parseResult(resultText);
      await refreshItem();
    } catch (err) {
      fail(err);
    }
  });
});

buttons.export.addEventListener("click", () => {
  if (resultText === null) {
    return;
  }
  // export exactly what the server stored, no re-serialization
  const blob = new Blob([resultText], { type: "application/json" });
  const url = URL.createObjectURL(blob);
  const a = document.createElement("a");
  a.href = url;
  a.download = `${itemSelect.value}-result.json`;
  a.click();
  URL.revokeObjectURL(url);
});

for (const [name, box] of Object.entries(toggles)) {
  box.addEventListener("change", () => {
    state.toggleOverlay(name as "axis" | "li" | "ma");
    render(); // client-side repaint only, nothing is fetched
  });
}

itemSelect.addEventListener("change", () => {
  void enqueue(() => loadItem(itemSelect.value));
});

async function boot(): Promise<void> {
  const items: ItemSummary[] = await client.listItems();
  itemSelect.innerHTML = "";
  for (const it of items) {
    const opt = document.createElement("option");
    opt.value = it.id;
    opt.textContent = `${it.id} (${it.status})`;
    itemSelect.appendChild(opt);
  }
  if (items.length > 0) {
    itemSelect.value = items[0].id;
    await loadItem(items[0].id);
  } else {
    statusLine.textContent = "store is empty; ingest images first";
  }
}

void boot().catch((err) => {
  statusLine.textContent = err instanceof Error ? err.message : String(err);
});
