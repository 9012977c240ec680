import { CaptureRequest, Phase, VantageResponse } from "./types.js";

export class ApiError extends Error {
    constructor(public status: number, public detail: unknown) {
        super(`bridge error ${status}: ${JSON.stringify(detail)}`);
    }
}

async function post(url: string, body: unknown): Promise<any> {
    const resp = await fetch(url, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
    });
    const data = await resp.json().catch(() => ({}));
    if (!resp.ok) {
        throw new ApiError(resp.status, data.detail ?? data);
    }
    return data;
}

export class BridgeClient {
    constructor(private readonly base = "") {}

    async createSession(): Promise<{ id: string; phase: Phase }> {
        return post(`${this.base}/sessions`, {});
    }

    async gesture(sessionId: string, gesture: "takeoff" | "land"): Promise<Phase> {
        const data = await post(`${this.base}/sessions/${sessionId}/gesture`, { gesture });
        return data.phase;
    }

    async capture(sessionId: string, req: CaptureRequest): Promise<VantageResponse> {
        return post(`${this.base}/sessions/${sessionId}/capture`, req);
    }

    async status(sessionId: string): Promise<any> {
        const resp = await fetch(`${this.base}/sessions/${sessionId}`);
        if (!resp.ok) {
            throw new ApiError(resp.status, await resp.text());
        }
        return resp.json();
    }

    streamUrl(sessionId: string): string {
        return `${this.base}/sessions/${sessionId}/stream`;
    }
}
