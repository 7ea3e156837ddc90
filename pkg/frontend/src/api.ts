// REST client for the review gateway. The UI never derives numbers on its
// own; everything rendered comes straight out of these responses, and the
// result document is kept as raw text so exports stay byte-identical to
// what the server stored.

export interface Roi {
  x_left: number;
  x_right: number;
}

export interface Point {
  x: number;
  y: number;
}

export interface AxisDoc {
  x_start: number;
  ordinates_px: number[];
  ordinates_um: number[];
}

export type FarwallStatus = "ok" | "failed" | "manually_corrected";

export interface FarwallDoc {
  status: FarwallStatus;
  axis: AxisDoc | null;
  raw_axis?: AxisDoc | null;
  diagnostics: Record<string, unknown>;
}

export type ItemStatus =
  | "ingested"
  | "roi_set"
  | "farwall_ok"
  | "farwall_failed"
  | "farwall_corrected"
  | "segmented";

export interface ItemSummary {
  id: string;
  status: ItemStatus;
  roi: Roi | null;
  has_result: boolean;
}

export interface ItemDetail extends ItemSummary {
  farwall: FarwallDoc | null;
  manual_axis: AxisDoc | null;
  annotations: string[];
}

export interface ResultDoc {
  image_id: string;
  roi: Roi;
  pitch_vertical_um: number;
  pitch_horizontal_um: number;
  status: "ok" | "failed";
  farwall: FarwallDoc | null;
  li: AxisDoc | null;
  ma: AxisDoc | null;
  imt: { profile_um: number[]; mean_um: number } | null;
  provenance: Record<string, unknown>;
  diagnostics: Record<string, unknown>;
}

export interface ImagePayload {
  blob: Blob;
  pitchVerticalUm: number;
  pitchHorizontalUm: number;
}

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class GatewayClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const resp = await this.fetchImpl(`${this.base}${path}`, init);
    if (!resp.ok) {
      // gateway errors are flat {code, message} bodies
      let code = "http-error";
      let message = `HTTP ${resp.status}`;
      try {
        const body: unknown = await resp.json();
        if (body && typeof body === "object" && "code" in body) {
          const e = body as { code: unknown; message?: unknown };
          code = String(e.code);
          message = String(e.message ?? message);
        }
      } catch {
        // non-JSON error body, keep the generic message
      }
      throw new ApiError(resp.status, code, message);
    }
    return resp;
  }

  async listItems(): Promise<ItemSummary[]> {
    const resp = await this.request("/items");
    return (await resp.json()) as ItemSummary[];
  }

  async getItem(id: string): Promise<ItemDetail> {
    const resp = await this.request(`/items/${encodeURIComponent(id)}`);
    return (await resp.json()) as ItemDetail;
  }

  async fetchImage(id: string): Promise<ImagePayload> {
    const resp = await this.request(`/items/${encodeURIComponent(id)}/image`);
    return {
      blob: await resp.blob(),
      pitchVerticalUm: Number(resp.headers.get("X-Pitch-Vertical-Um") ?? "0"),
      pitchHorizontalUm: Number(resp.headers.get("X-Pitch-Horizontal-Um") ?? "0"),
    };
  }

  async putRoi(id: string, roi: Roi): Promise<ItemSummary> {
    const resp = await this.request(`/items/${encodeURIComponent(id)}/roi`, {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(roi),
    });
    return (await resp.json()) as ItemSummary;
  }

  async runFarwall(id: string): Promise<FarwallDoc> {
    const resp = await this.request(`/items/${encodeURIComponent(id)}/farwall`, {
      method: "POST",
    });
    return (await resp.json()) as FarwallDoc;
  }

  async putAxis(id: string, controlPoints: Point[]): Promise<{ status: FarwallStatus; axis: AxisDoc }> {
    const resp = await this.request(`/items/${encodeURIComponent(id)}/axis`, {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ control_points: controlPoints }),
    });
    return (await resp.json()) as { status: FarwallStatus; axis: AxisDoc };
  }

  /** Runs segmentation and returns the result document as raw text. */
  async segment(id: string): Promise<string> {
    const resp = await this.request(`/items/${encodeURIComponent(id)}/segment`, {
      method: "POST",
    });
    return resp.text();
  }

  /** The stored result, byte for byte as the server keeps it. */
  async getResultText(id: string): Promise<string> {
    const resp = await this.request(`/items/${encodeURIComponent(id)}/result`);
    return resp.text();
  }
}

export function parseResult(text: string): ResultDoc {
  return JSON.parse(text) as ResultDoc;
}
