import { ApiClient, ApiError } from "./api.js";
import { formatLoad, formatPercent, GalleryState } from "./state.js";
import type { ImageCard } from "./types.js";

const state = new GalleryState(new ApiClient());

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderBanner(root: HTMLElement): void {
  const banner = el("div", "banner");
  const agg = state.report?.aggregate;
  if (!agg) {
    banner.append(el("span", "", "no report yet"));
  } else {
    banner.append(
      el("span", "", `aggregate SAC ${formatPercent(agg.mean_sac_percent)}`),
      el("span", "", `load ${formatLoad(agg.stocking_load_step)} (step)`),
      el("span", "", `${formatLoad(agg.stocking_load_interpolated)} (interpolated)`),
      el("span", "", `${agg.total_area_ha ?? "?"} ha`),
    );
    if (state.report?.all_accepted) {
      banner.append(el("span", "final", "all accepted — final"));
    }
  }
  root.append(banner);
}

function renderCard(card: ImageCard, index: number): HTMLElement {
  const node = el("div", `card status-${card.status}`);
  if (index === state.selectedIndex) node.classList.add("selected");
  node.append(el("h3", "", card.image_id));
  if (card.error) {
    node.append(el("p", "error", card.error));
  } else {
    node.append(
      el("p", "", `SAC ${formatPercent(card.sac_percent)}`),
      el("p", "", `classes ${card.class_count_used ?? "?"} · ${card.status}`),
    );
    const img = el("img");
    const url = state.layerUrl(card);
    if (url) img.src = url;
    node.append(img);
  }
  node.addEventListener("click", () => {
    state.selectedIndex = index;
    render();
  });
  return node;
}

function renderDetail(root: HTMLElement): void {
  const card = state.selected;
  if (!card) return;
  const detail = el("div", "detail");
  detail.append(el("h2", "", `${card.image_id} — ${state.layer}`));

  const controls = el("div", "controls");
  const bumpBtn = el("button", "", "re-segment with one more class");
  bumpBtn.addEventListener("click", () => {
    const c = Math.min((card.class_count_used ?? 2) + 1, 9);
    run(() => state.resegment(card.image_id, { c }));
  });
  const thresholdInput = el("input") as HTMLInputElement;
  thresholdInput.type = "number";
  thresholdInput.min = "0";
  thresholdInput.placeholder = "shrub threshold (px)";
  const thresholdBtn = el("button", "", "apply threshold");
  thresholdBtn.addEventListener("click", () => {
    const value = parseInt(thresholdInput.value, 10);
    if (!Number.isNaN(value)) {
      run(() => state.resegment(card.image_id, { shrub_threshold_px: value }));
    }
  });
  const layerBtn = el("button", "", "toggle layer (l)");
  layerBtn.addEventListener("click", () => {
    state.cycleLayer();
    render();
  });
  const acceptBtn = el("button", "", "accept (a)");
  acceptBtn.addEventListener("click", () => run(() => state.accept(card.image_id)));
  controls.append(bumpBtn, thresholdInput, thresholdBtn, layerBtn, acceptBtn);
  detail.append(controls);

  const url = state.layerUrl(card);
  if (url) {
    const img = el("img", "large");
    img.src = url;
    detail.append(img);
  }
  if (card.metrics) {
    detail.append(el("pre", "", JSON.stringify(card.metrics, null, 2)));
  }
  root.append(detail);
}

function render(): void {
  const root = document.getElementById("app");
  if (!root) return;
  root.replaceChildren();
  if (state.lastError) {
    const retry = el("div", "retry-banner", `service unreachable: ${state.lastError} `);
    const btn = el("button", "", "retry");
    btn.addEventListener("click", () => run(() => state.refresh()));
    retry.append(btn);
    root.append(retry);
  }
  renderBanner(root);
  const gallery = el("div", "gallery");
  state.cards.forEach((card, index) => gallery.append(renderCard(card, index)));
  root.append(gallery);
  renderDetail(root);
}

async function run(action: () => Promise<unknown>): Promise<void> {
  try {
    await action();
    state.lastError = null;
  } catch (err) {
    state.lastError = err instanceof ApiError ? err.message : String(err);
  }
  render();
}

function onKey(event: KeyboardEvent): void {
  const card = state.selected;
  if (!card) return;
  if (event.key === "a") {
    run(() => state.accept(card.image_id).then(() => state.selectNext()));
  } else if (event.key === "n") {
    state.selectNext();
    render();
  } else if (event.key === "l") {
    state.cycleLayer();
    render();
  }
}

export function start(): void {
  document.addEventListener("keydown", onKey);
  run(() => state.refresh());
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  start();
}
