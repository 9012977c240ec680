import { CaptureRequest } from "./types.js";

export const YAW_LIMIT_DEG = 75;
export const PITCH_LIMIT_DEG = 90;
export const FACE_RATIO_COMFORT: [number, number] = [0.1, 0.2];

/** The virtual phone: orientation sliders plus a draggable face box. */
export interface VirtualSmdState {
    pitchDeg: number;
    yawDeg: number;
    /** face box in normalized frame coordinates */
    boxCenterX: number;
    boxCenterY: number;
    boxHeight: number; // fraction of frame height == face ratio
}

export function defaultSmdState(): VirtualSmdState {
    return { pitchDeg: 0, yawDeg: 0, boxCenterX: 0.5, boxCenterY: 0.5, boxHeight: 0.15 };
}

export interface ValidationResult {
    ok: boolean;
    errors: string[];
    warnings: string[];
}

/** Client-side mirror of the server capture validation; server stays authoritative. */
export function validateSmdState(s: VirtualSmdState): ValidationResult {
    const errors: string[] = [];
    const warnings: string[] = [];
    if (Math.abs(s.yawDeg) > YAW_LIMIT_DEG) {
        errors.push(`yaw ${s.yawDeg.toFixed(0)} deg outside +-${YAW_LIMIT_DEG} deg`);
    }
    if (Math.abs(s.pitchDeg) > PITCH_LIMIT_DEG) {
        errors.push(`pitch ${s.pitchDeg.toFixed(0)} deg outside +-${PITCH_LIMIT_DEG} deg`);
    }
    if (s.boxCenterX < 0 || s.boxCenterX > 1 || s.boxCenterY < 0 || s.boxCenterY > 1) {
        errors.push("face box center left the frame");
    }
    if (s.boxHeight <= 0) {
        errors.push("face box has no height");
    } else if (s.boxHeight < FACE_RATIO_COMFORT[0] || s.boxHeight > FACE_RATIO_COMFORT[1]) {
        warnings.push(
            `face ratio ${s.boxHeight.toFixed(2)} outside [${FACE_RATIO_COMFORT[0]}, ` +
            `${FACE_RATIO_COMFORT[1]}]; it will be clamped`);
    }
    return { ok: errors.length === 0, errors, warnings };
}

export function toCaptureRequest(s: VirtualSmdState): CaptureRequest {
    return {
        pitch_deg: s.pitchDeg,
        yaw_deg: s.yawDeg,
        face_cx: s.boxCenterX,
        face_cy: s.boxCenterY,
        face_ratio: s.boxHeight,
    };
}

/** Drag/resize plumbing for the face box; keeps the box inside the frame. */
export function moveBox(s: VirtualSmdState, dx: number, dy: number): VirtualSmdState {
    const half = s.boxHeight / 2;
    return {
        ...s,
        boxCenterX: clamp(s.boxCenterX + dx, 0, 1),
        boxCenterY: clamp(s.boxCenterY + dy, half, 1 - half),
    };
}

export function resizeBox(s: VirtualSmdState, dHeight: number): VirtualSmdState {
    const h = clamp(s.boxHeight + dHeight, 0.02, 0.6);
    return { ...s, boxHeight: h, boxCenterY: clamp(s.boxCenterY, h / 2, 1 - h / 2) };
}

function clamp(v: number, lo: number, hi: number): number {
    return Math.min(hi, Math.max(lo, v));
}
