import { ApiError, BridgeClient } from "./api.js";
import {
    defaultSmdState,
    moveBox,
    resizeBox,
    toCaptureRequest,
    validateSmdState,
    VirtualSmdState,
} from "./smd.js";
import { OrderedEventLog, ReconnectBackoff, SseParser } from "./stream.js";
import { Phase, SelfieEvent, StateEvent, StreamEvent } from "./types.js";
import {
    GalleryModel,
    sideViewPoint,
    sparklinePoints,
    toCanvas,
    topViewPoint,
    trackBounds,
    TrajectoryModel,
} from "./views.js";

const client = new BridgeClient("");
let sessionId: string | null = null;
let phase: Phase = "grounded";
let smd: VirtualSmdState = defaultSmdState();
let target: { x: number; y: number; z: number } | null = null;

const log = new OrderedEventLog();
const trajectory = new TrajectoryModel();
const gallery = new GalleryModel();
const backoff = new ReconnectBackoff();
let streamAbort: AbortController | null = null;

function el<T extends HTMLElement>(id: string): T {
    return document.getElementById(id) as T;
}

// ---------------------------------------------------------------- controls

function bindControls(): void {
    const pitch = el<HTMLInputElement>("pitch");
    const yaw = el<HTMLInputElement>("yaw");
    pitch.addEventListener("input", () => {
        smd = { ...smd, pitchDeg: Number(pitch.value) };
        refreshComposer();
    });
    yaw.addEventListener("input", () => {
        smd = { ...smd, yawDeg: Number(yaw.value) };
        refreshComposer();
    });
    el<HTMLButtonElement>("takeoff").addEventListener("click", () => gesture("takeoff"));
    el<HTMLButtonElement>("land").addEventListener("click", () => gesture("land"));
    el<HTMLButtonElement>("shutter").addEventListener("click", shutter);
    bindFaceBox();
}

function bindFaceBox(): void {
    const canvas = el<HTMLCanvasElement>("selfie-frame");
    let dragging = false;
    let lastX = 0;
    let lastY = 0;
    canvas.addEventListener("pointerdown", (ev) => {
        dragging = true;
        lastX = ev.offsetX;
        lastY = ev.offsetY;
        canvas.setPointerCapture(ev.pointerId);
    });
    canvas.addEventListener("pointermove", (ev) => {
        if (!dragging) {
            return;
        }
        smd = moveBox(smd, (ev.offsetX - lastX) / canvas.width,
                      (ev.offsetY - lastY) / canvas.height);
        lastX = ev.offsetX;
        lastY = ev.offsetY;
        refreshComposer();
    });
    canvas.addEventListener("pointerup", () => (dragging = false));
    canvas.addEventListener("wheel", (ev) => {
        ev.preventDefault();
        smd = resizeBox(smd, ev.deltaY < 0 ? 0.01 : -0.01);
        refreshComposer();
    });
}

async function gesture(kind: "takeoff" | "land"): Promise<void> {
    if (!sessionId) {
        return;
    }
    try {
        phase = await client.gesture(sessionId, kind);
        setStatus(`gesture ${kind}: phase ${phase}`);
    } catch (err) {
        showError(err);
    }
    refreshComposer();
}

async function shutter(): Promise<void> {
    if (!sessionId) {
        return;
    }
    const check = validateSmdState(smd);
    if (!check.ok) {
        setWarning(check.errors.join("; "));
        return; // never send an invalid capture; composition is preserved
    }
    try {
        const vantage = await client.capture(sessionId, toCaptureRequest(smd));
        phase = vantage.phase;
        trajectory.clear();
        const az = (vantage.azimuth_deg * Math.PI) / 180;
        const range = 1.7 / (2 * vantage.body_ratio * Math.tan((65 / 2) * Math.PI / 180));
        target = { x: range * Math.cos(az), y: range * Math.sin(az), z: vantage.height_m };
        setStatus(`flying to azimuth ${vantage.azimuth_deg.toFixed(0)} deg, ` +
                  `ratio ${vantage.body_ratio.toFixed(3)}`);
    } catch (err) {
        showError(err);
    }
    refreshComposer();
}

function showError(err: unknown): void {
    if (err instanceof ApiError) {
        const d = err.detail as any;
        setWarning(typeof d === "object" && d ? (d.message ?? d.error ?? JSON.stringify(d))
                                              : String(d));
    } else {
        setWarning(String(err));
    }
}

// ---------------------------------------------------------------- stream

async function connectStream(): Promise<void> {
    if (!sessionId) {
        return;
    }
    streamAbort?.abort();
    streamAbort = new AbortController();
    const parser = new SseParser();
    try {
        const resp = await fetch(client.streamUrl(sessionId), { signal: streamAbort.signal });
        if (!resp.ok || !resp.body) {
            throw new Error(`stream rejected: ${resp.status}`);
        }
        backoff.reset();
        log.resetOrdering();
        const reader = resp.body.getReader();
        const decoder = new TextDecoder();
        for (;;) {
            const { value, done } = await reader.read();
            if (done) {
                break;
            }
            for (const event of log.pushAll(parser.feed(decoder.decode(value)))) {
                handleEvent(event);
            }
        }
    } catch {
        // fall through to reconnect
    }
    const delay = backoff.nextDelayMs();
    setStatus(`stream dropped; reconnecting in ${(delay / 1000).toFixed(1)} s`);
    setTimeout(connectStream, delay);
}

function handleEvent(event: StreamEvent): void {
    phase = event.phase;
    if (event.type === "state") {
        trajectory.add(event);
    } else if (event.type === "selfie") {
        if (gallery.add(event)) {
            renderGallery();
        }
        setStatus(`selfie captured at ratio ${event.ratio.toFixed(3)}`);
    } else if (event.type === "fault") {
        setWarning(`flight failed: ${event.fault}; recovered to hover`);
    }
    if (log.discarded > 0) {
        console.warn(`discarded ${log.discarded} out-of-order events`);
    }
    renderFlight();
    refreshComposer();
}

// ---------------------------------------------------------------- rendering

function refreshComposer(): void {
    el<HTMLSpanElement>("pitch-value").textContent = `${smd.pitchDeg.toFixed(0)} deg`;
    el<HTMLSpanElement>("yaw-value").textContent = `${smd.yawDeg.toFixed(0)} deg`;
    el<HTMLSpanElement>("ratio-value").textContent = smd.boxHeight.toFixed(3);
    const badge = el<HTMLSpanElement>("phase-badge");
    badge.textContent = phase;
    badge.className = `badge ${phase}`;
    const check = validateSmdState(smd);
    const shutterBtn = el<HTMLButtonElement>("shutter");
    shutterBtn.disabled = phase === "flying" || phase === "grounded" || !check.ok;
    setWarning(check.ok ? check.warnings.join("; ") : check.errors.join("; "));
    drawSelfieFrame();
}

function drawSelfieFrame(): void {
    const canvas = el<HTMLCanvasElement>("selfie-frame");
    const ctx = canvas.getContext("2d")!;
    ctx.fillStyle = "#1c2733";
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    ctx.strokeStyle = "#4caf7d";
    ctx.lineWidth = 2;
    const h = smd.boxHeight * canvas.height;
    const w = h * 0.75;
    ctx.strokeRect(smd.boxCenterX * canvas.width - w / 2,
                   smd.boxCenterY * canvas.height - h / 2, w, h);
    ctx.fillStyle = "#88a";
    ctx.font = "11px sans-serif";
    ctx.fillText("drag to frame, wheel to resize", 8, canvas.height - 8);
}

function renderFlight(): void {
    const states = trajectory.states;
    drawTrack(el<HTMLCanvasElement>("top-view"), states.map(topViewPoint),
              target ? topViewPoint(target) : null, "top view (x/y)");
    drawTrack(el<HTMLCanvasElement>("side-view"), states.map(sideViewPoint),
              target ? sideViewPoint(target) : null, "side view (range/alt)");
    drawSparkline(el<HTMLCanvasElement>("sparkline"), trajectory.rewards());
}

function drawTrack(canvas: HTMLCanvasElement, points: { x: number; y: number }[],
                   marker: { x: number; y: number } | null, label: string): void {
    const ctx = canvas.getContext("2d")!;
    ctx.fillStyle = "#10181f";
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    const everything = marker ? [...points, marker, { x: 0, y: 0 }] : [...points, { x: 0, y: 0 }];
    const bounds = trackBounds(everything);
    ctx.fillStyle = "#c96";
    const person = toCanvas({ x: 0, y: 0 }, bounds, canvas.width, canvas.height);
    ctx.beginPath();
    ctx.arc(person.x, person.y, 5, 0, Math.PI * 2);
    ctx.fill();
    if (marker) {
        const m = toCanvas(marker, bounds, canvas.width, canvas.height);
        ctx.strokeStyle = "#4caf7d";
        ctx.lineWidth = 2;
        ctx.beginPath();
        ctx.arc(m.x, m.y, 7, 0, Math.PI * 2);
        ctx.stroke();
    }
    ctx.fillStyle = "#7ec8ff";
    points.forEach((p, i) => {
        const c = toCanvas(p, bounds, canvas.width, canvas.height);
        ctx.globalAlpha = 0.35 + 0.65 * (i / Math.max(1, points.length - 1));
        ctx.beginPath();
        ctx.arc(c.x, c.y, 2.5, 0, Math.PI * 2);
        ctx.fill();
    });
    ctx.globalAlpha = 1;
    ctx.fillStyle = "#8aa";
    ctx.font = "11px sans-serif";
    ctx.fillText(label, 8, 14);
}

function drawSparkline(canvas: HTMLCanvasElement, rewards: number[]): void {
    const ctx = canvas.getContext("2d")!;
    ctx.fillStyle = "#10181f";
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    const pts = sparklinePoints(rewards, canvas.width, canvas.height);
    if (pts.length === 0) {
        return;
    }
    ctx.strokeStyle = "#ffd166";
    ctx.beginPath();
    pts.forEach((p, i) => (i === 0 ? ctx.moveTo(p.x, p.y) : ctx.lineTo(p.x, p.y)));
    ctx.stroke();
}

function renderGallery(): void {
    const strip = el<HTMLDivElement>("gallery");
    strip.innerHTML = "";
    for (const shot of gallery.entries) {
        const card = document.createElement("div");
        card.className = "shot";
        card.innerHTML =
            `<div class="shot-frame"><div class="shot-person" ` +
            `style="height:${(shot.ratio * 100).toFixed(0)}%;left:${(shot.cx * 100).toFixed(0)}%"></div></div>` +
            `<div class="shot-meta">ratio ${shot.ratio.toFixed(3)} / ` +
            `az ${shot.target_azimuth_deg.toFixed(0)} deg</div>`;
        strip.appendChild(card);
    }
}

function setStatus(text: string): void {
    el<HTMLDivElement>("status").textContent = text;
}

function setWarning(text: string): void {
    el<HTMLDivElement>("warning").textContent = text;
}

// ---------------------------------------------------------------- boot

async function boot(): Promise<void> {
    bindControls();
    refreshComposer();
    renderFlight();
    try {
        const session = await client.createSession();
        sessionId = session.id;
        phase = session.phase;
        setStatus(`session ${sessionId} ready; take off to begin`);
        connectStream();
    } catch (err) {
        showError(err);
        setStatus("could not reach the bridge; is `vantagefly serve` running?");
    }
    refreshComposer();
}

boot();
