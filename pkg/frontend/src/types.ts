export type Phase = "grounded" | "hovering" | "flying" | "at_vantage";

export interface StateEvent {
    type: "state";
    seq: number;
    step: number;
    x: number;
    y: number;
    z: number;
    yaw: number;
    cx: number;
    cy: number;
    ratio: number;
    reward: number;
    phase: Phase;
}

export interface SelfieEvent {
    type: "selfie";
    seq: number;
    phase: Phase;
    step: number;
    x: number;
    y: number;
    z: number;
    yaw_deg: number;
    cx: number;
    cy: number;
    ratio: number;
    target_azimuth_deg: number;
    target_height: number;
    target_ratio: number;
}

export interface PhaseEvent {
    type: "phase";
    seq: number;
    phase: Phase;
    x: number;
    y: number;
    z: number;
}

export interface FaultEvent {
    type: "fault";
    seq: number;
    phase: Phase;
    fault: string;
}

export type StreamEvent = StateEvent | SelfieEvent | PhaseEvent | FaultEvent;

export interface CaptureRequest {
    pitch_deg: number;
    yaw_deg: number;
    face_cx: number;
    face_cy: number;
    face_ratio: number;
}

export interface VantageResponse {
    azimuth_deg: number;
    height_m: number;
    cx: number;
    cy: number;
    body_ratio: number;
    phase: Phase;
}
