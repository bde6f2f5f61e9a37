export type ImageStatus = "pending" | "needs_review" | "accepted" | "error";

/** One image's card as returned by the review API. */
export interface ImageCard {
  image_id: string;
  status: ImageStatus;
  sac_percent: number | null;
  shrub_percent: number | null;
  soil_percent: number | null;
  class_count_used: number | null;
  needs_review: boolean;
  error: string | null;
  metrics: Record<string, unknown> | null;
  overrides: SegmentOverrides;
  overlay_url: string;
  mask_url: string;
  diff_url?: string;
}

export interface SegmentOverrides {
  c?: number;
  gamma?: number;
  shrub_threshold_px?: number;
}

export interface ReportAggregate {
  image_count: number;
  segmented_count: number;
  mean_sac_percent: number | null;
  mean_shrub_percent: number | null;
  mean_soil_percent: number | null;
  stocking_load_step: number | null;
  stocking_load_interpolated: number | null;
  total_area_ha: number | null;
}

export interface Report {
  per_image: Record<string, unknown>[];
  aggregate: ReportAggregate;
  all_accepted: boolean;
}
