import { SelfieEvent, StateEvent } from "./types.js";

export interface Point {
    x: number;
    y: number;
}

export interface Bounds {
    minX: number;
    maxX: number;
    minY: number;
    maxY: number;
}

/** Square bounds around the person (origin), drone track, and target marker. */
export function trackBounds(points: Point[], margin = 2.0): Bounds {
    let minX = -1, maxX = 1, minY = -1, maxY = 1;
    for (const p of points) {
        minX = Math.min(minX, p.x);
        maxX = Math.max(maxX, p.x);
        minY = Math.min(minY, p.y);
        maxY = Math.max(maxY, p.y);
    }
    minX -= margin; maxX += margin; minY -= margin; maxY += margin;
    const span = Math.max(maxX - minX, maxY - minY);
    const cx = (minX + maxX) / 2;
    const cy = (minY + maxY) / 2;
    return { minX: cx - span / 2, maxX: cx + span / 2, minY: cy - span / 2, maxY: cy + span / 2 };
}

/** World point to canvas pixel (y axis flipped). */
export function toCanvas(p: Point, b: Bounds, width: number, height: number): Point {
    return {
        x: ((p.x - b.minX) / (b.maxX - b.minX)) * width,
        y: height - ((p.y - b.minY) / (b.maxY - b.minY)) * height,
    };
}

export function topViewPoint(e: { x: number; y: number }): Point {
    return { x: e.x, y: e.y };
}

/** Side view: horizontal range from the person vs altitude. */
export function sideViewPoint(e: { x: number; y: number; z: number }): Point {
    return { x: Math.hypot(e.x, e.y), y: e.z };
}

/** Gallery mirror: one entry per selfie event, deduplicated by seq. */
export class GalleryModel {
    readonly entries: SelfieEvent[] = [];
    private seen = new Set<number>();

    add(event: SelfieEvent): boolean {
        if (this.seen.has(event.seq)) {
            return false;
        }
        this.seen.add(event.seq);
        this.entries.push(event);
        return true;
    }
}

/** Scaled polyline for the reward sparkline (rewards live in [-0.8, 1]). */
export function sparklinePoints(rewards: number[], width: number, height: number,
                                lo = -0.8, hi = 1.0): Point[] {
    if (rewards.length === 0) {
        return [];
    }
    const step = rewards.length > 1 ? width / (rewards.length - 1) : 0;
    return rewards.map((r, i) => ({
        x: i * step,
        y: height - ((Math.min(hi, Math.max(lo, r)) - lo) / (hi - lo)) * height,
    }));
}

export class TrajectoryModel {
    readonly states: StateEvent[] = [];

    add(event: StateEvent): void {
        this.states.push(event);
    }

    clear(): void {
        this.states.length = 0;
    }

    rewards(): number[] {
        return this.states.map((s) => s.reward);
    }
}
