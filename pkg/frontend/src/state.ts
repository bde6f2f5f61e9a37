import { ApiClient } from "./api.js";
import type { ImageCard, Report, SegmentOverrides } from "./types.js";

export type OverlayLayer = "overlay" | "mask" | "diff";

/** Gallery state: cards and the aggregate banner, all echoed from the API. */
export class GalleryState {
  cards: ImageCard[] = [];
  report: Report | null = null;
  selectedIndex = 0;
  layer: OverlayLayer = "overlay";
  lastError: string | null = null;

  constructor(private readonly api: ApiClient) {}

  async refresh(): Promise<void> {
    this.cards = await this.api.listImages();
    this.report = await this.api.getReport();
    this.lastError = null;
    if (this.selectedIndex >= this.cards.length) {
      this.selectedIndex = 0;
    }
  }

  get selected(): ImageCard | undefined {
    return this.cards[this.selectedIndex];
  }

  selectNext(): void {
    if (this.cards.length > 0) {
      this.selectedIndex = (this.selectedIndex + 1) % this.cards.length;
    }
  }

  /** Re-segment one image and refresh both its card and the aggregate,
   * so every displayed number stays an echo of the service. */
  async resegment(imageId: string, overrides: SegmentOverrides): Promise<ImageCard> {
    const card = await this.api.resegment(imageId, overrides);
    this.replaceCard(card);
    this.report = await this.api.getReport();
    return card;
  }

  async accept(imageId: string): Promise<ImageCard> {
    const card = await this.api.accept(imageId);
    this.replaceCard(card);
    this.report = await this.api.getReport();
    return card;
  }

  layerUrl(card: ImageCard): string | null {
    if (this.layer === "overlay") return card.overlay_url;
    if (this.layer === "mask") return card.mask_url;
    return card.diff_url ?? null;
  }

  cycleLayer(): void {
    const order: OverlayLayer[] = ["overlay", "mask", "diff"];
    this.layer = order[(order.indexOf(this.layer) + 1) % order.length]!;
  }

  private replaceCard(card: ImageCard): void {
    const idx = this.cards.findIndex((c) => c.image_id === card.image_id);
    if (idx >= 0) {
      this.cards[idx] = card;
    } else {
      this.cards.push(card);
    }
  }
}

/** Format a percentage exactly as the banner displays it. */
export function formatPercent(value: number | null): string {
  return value === null ? "n/a" : `${value.toFixed(2)}%`;
}

export function formatLoad(value: number | null): string {
  return value === null ? "n/a" : `${value.toFixed(2)} animals/ha`;
}
