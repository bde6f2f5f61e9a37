import type { ImageCard, Report, SegmentOverrides } from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

/** Thin client for the review service; every number shown in the UI comes
 * from these responses, never from client-side computation. */
export class ApiClient {
  constructor(
    private readonly baseUrl = "",
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return response.json() as Promise<T>;
  }

  listImages(): Promise<ImageCard[]> {
    return this.request<ImageCard[]>("/api/images");
  }

  getImage(imageId: string): Promise<ImageCard> {
    return this.request<ImageCard>(`/api/images/${imageId}`);
  }

  resegment(imageId: string, overrides: SegmentOverrides): Promise<ImageCard> {
    return this.request<ImageCard>(`/api/images/${imageId}/segment`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(overrides),
    });
  }

  accept(imageId: string): Promise<ImageCard> {
    return this.request<ImageCard>(`/api/images/${imageId}/accept`, {
      method: "POST",
    });
  }

  getReport(): Promise<Report> {
    return this.request<Report>("/api/report");
  }
}
