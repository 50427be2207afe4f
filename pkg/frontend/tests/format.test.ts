import { describe, expect, it } from "vitest";

import { cvmBadgeClass, fmt3, fmtPercent, tabLabel } from "../src/format.js";

describe("fmt3", () => {
  it("shows exactly three decimals", () => {
    expect(fmt3(0.9538851447223404)).toBe("0.954");
    expect(fmt3(0.05)).toBe("0.050");
    expect(fmt3(-0.0825)).toBe("-0.083");
    expect(fmt3(1)).toBe("1.000");
  });

  it("is the displayed form of the raw payload value", () => {
    const payloadValue = 0.46875;
    expect(fmt3(payloadValue)).toBe(payloadValue.toFixed(3));
  });
});

describe("cvmBadgeClass", () => {
  it("is green strictly below 1.0", () => {
    expect(cvmBadgeClass(0.0)).toBe("badge-green");
    expect(cvmBadgeClass(0.999)).toBe("badge-green");
  });

  it("is red at and above 1.0", () => {
    expect(cvmBadgeClass(1.0)).toBe("badge-red");
    expect(cvmBadgeClass(30.188)).toBe("badge-red");
  });
});

describe("tabLabel", () => {
  it("names the unconstrained panel", () => {
    expect(tabLabel(null)).toBe("unconstrained");
  });

  it("formats tau to two decimals", () => {
    expect(tabLabel(0.05)).toBe("tau 0.05");
    expect(tabLabel(0.3)).toBe("tau 0.30");
  });
});

describe("fmtPercent", () => {
  it("keeps one decimal", () => {
    expect(fmtPercent(41.27)).toBe("41.3%");
  });
});
