import { describe, expect, it } from "vitest";

import {
    defaultSmdState,
    moveBox,
    resizeBox,
    toCaptureRequest,
    validateSmdState,
} from "../src/smd.js";

describe("virtual SMD validation", () => {
    it("accepts the default composition", () => {
        const result = validateSmdState(defaultSmdState());
        expect(result.ok).toBe(true);
        expect(result.errors).toEqual([]);
        expect(result.warnings).toEqual([]);
    });

    it("rejects yaw beyond 75 degrees without sending", () => {
        const result = validateSmdState({ ...defaultSmdState(), yawDeg: 80 });
        expect(result.ok).toBe(false);
        expect(result.errors[0]).toContain("yaw");
    });

    it("accepts yaw exactly at the cone edge", () => {
        expect(validateSmdState({ ...defaultSmdState(), yawDeg: 75 }).ok).toBe(true);
        expect(validateSmdState({ ...defaultSmdState(), yawDeg: -75 }).ok).toBe(true);
    });

    it("warns when the face ratio leaves the comfortable band", () => {
        const small = validateSmdState({ ...defaultSmdState(), boxHeight: 0.05 });
        expect(small.ok).toBe(true);
        expect(small.warnings[0]).toContain("clamped");
        const big = validateSmdState({ ...defaultSmdState(), boxHeight: 0.3 });
        expect(big.warnings).toHaveLength(1);
    });

    it("rejects a degenerate face box", () => {
        expect(validateSmdState({ ...defaultSmdState(), boxHeight: 0 }).ok).toBe(false);
    });
});

describe("capture serialization", () => {
    it("maps the UI state onto the wire fields in degrees", () => {
        const req = toCaptureRequest({
            pitchDeg: 12, yawDeg: -30, boxCenterX: 0.4, boxCenterY: 0.6, boxHeight: 0.18,
        });
        expect(req).toEqual({
            pitch_deg: 12, yaw_deg: -30, face_cx: 0.4, face_cy: 0.6, face_ratio: 0.18,
        });
    });
});

describe("face box interactions", () => {
    it("keeps the box inside the frame when dragging", () => {
        let s = defaultSmdState();
        for (let i = 0; i < 50; i++) {
            s = moveBox(s, 0.1, 0.1);
        }
        expect(s.boxCenterX).toBe(1);
        expect(s.boxCenterY).toBeLessThanOrEqual(1 - s.boxHeight / 2);
    });

    it("clamps resize and preserves containment", () => {
        let s = resizeBox(defaultSmdState(), 10);
        expect(s.boxHeight).toBeLessThanOrEqual(0.6);
        s = resizeBox(s, -10);
        expect(s.boxHeight).toBeGreaterThan(0);
    });
});
