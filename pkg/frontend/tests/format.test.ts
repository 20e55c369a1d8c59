import { describe, expect, it } from "vitest";

import { fmtEpsilon, fmtValue } from "../src/format.js";

describe("formatters", () => {
  it("renders metric values to two decimal places", () => {
    expect(fmtValue(99)).toBe("99.00");
    expect(fmtValue(61.1517)).toBe("61.15");
    expect(fmtValue(0.005)).toBe("0.01");
  });

  it("renders epsilon to four decimal places", () => {
    expect(fmtEpsilon(0.5078125)).toBe("0.5078");
    expect(fmtEpsilon(0.001)).toBe("0.0010");
  });
});
