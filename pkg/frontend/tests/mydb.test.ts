import { describe, expect, it } from "vitest";

import { formatBytes, mydbModel } from "../src/mydb.js";

describe("mydbModel", () => {
  it("sorts table names and reports usage", () => {
    const model = mydbModel({
      owner: "ann",
      tables: ["zeta", "alpha"],
      used_bytes: 1024,
      quota_bytes: 64 * 1024 * 1024,
    });
    expect(model.tables).toEqual(["alpha", "zeta"]);
    expect(model.usageText).toBe("1.0 KiB of 64.0 MiB used");
    expect(model.usagePercent).toBeCloseTo(0.0015, 3);
    expect(model.nearQuota).toBe(false);
  });

  it("flags usage at or above 90 percent", () => {
    const model = mydbModel({
      owner: "ann",
      tables: [],
      used_bytes: 95,
      quota_bytes: 100,
    });
    expect(model.nearQuota).toBe(true);
    expect(model.usagePercent).toBe(95);
  });
});

describe("formatBytes", () => {
  it("picks sensible units", () => {
    expect(formatBytes(12)).toBe("12 B");
    expect(formatBytes(2048)).toBe("2.0 KiB");
    expect(formatBytes(3 * 1024 * 1024)).toBe("3.0 MiB");
    expect(formatBytes(2 * 1024 * 1024 * 1024)).toBe("2.0 GiB");
  });
});
