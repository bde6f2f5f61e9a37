import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { FakeService } from "./fake_service.js";

function makeClient() {
  const service = new FakeService([
    { image_id: "Im_01", sac_percent: 30.5 },
    { image_id: "Im_02", sac_percent: 12.25 },
  ]);
  return { service, client: new ApiClient("", service.fetch) };
}

describe("ApiClient", () => {
  it("lists image cards", async () => {
    const { client } = makeClient();
    const cards = await client.listImages();
    expect(cards.map((c) => c.image_id)).toEqual(["Im_01", "Im_02"]);
    expect(cards[0]!.sac_percent).toBe(30.5);
  });

  it("posts overrides on re-segment", async () => {
    const { service, client } = makeClient();
    const card = await client.resegment("Im_01", { c: 3 });
    expect(card.class_count_used).toBe(3);
    const post = service.requests.find((r) => r.method === "POST");
    expect(post?.path).toBe("/api/images/Im_01/segment");
    expect(post?.body).toEqual({ c: 3 });
  });

  it("raises ApiError with the service detail on validation failure", async () => {
    const { client } = makeClient();
    await expect(client.resegment("Im_01", { c: 0 })).rejects.toMatchObject({
      status: 422,
    });
    await expect(client.resegment("Im_01", { c: 0 })).rejects.toBeInstanceOf(ApiError);
  });

  it("raises 404 for unknown images", async () => {
    const { client } = makeClient();
    await expect(client.getImage("Im_99")).rejects.toMatchObject({ status: 404 });
  });

  it("fetches the aggregate report", async () => {
    const { client } = makeClient();
    const report = await client.getReport();
    expect(report.aggregate.mean_sac_percent).toBeCloseTo((30.5 + 12.25) / 2, 4);
    expect(report.all_accepted).toBe(false);
  });
});
