import { StreamEvent } from "./types.js";

/**
 * Incremental server-sent-events parser: feed raw chunks, get parsed events.
 * Comment lines (keepalives) are ignored.
 */
export class SseParser {
    private buffer = "";

    feed(chunk: string): StreamEvent[] {
        this.buffer += chunk;
        const events: StreamEvent[] = [];
        let idx: number;
        while ((idx = this.buffer.indexOf("\n\n")) >= 0) {
            const block = this.buffer.slice(0, idx);
            this.buffer = this.buffer.slice(idx + 2);
            for (const line of block.split("\n")) {
                if (line.startsWith("data: ")) {
                    try {
                        events.push(JSON.parse(line.slice(6)) as StreamEvent);
                    } catch {
                        // malformed frame: drop it rather than killing the stream
                    }
                }
            }
        }
        return events;
    }
}

/**
 * Keeps the event history strictly ordered by sequence number.
 * Out-of-order arrivals are discarded and counted.
 */
export class OrderedEventLog {
    readonly events: StreamEvent[] = [];
    discarded = 0;
    private lastSeq = -1;

    push(event: StreamEvent): boolean {
        if (event.seq <= this.lastSeq) {
            this.discarded += 1;
            return false;
        }
        this.lastSeq = event.seq;
        this.events.push(event);
        return true;
    }

    pushAll(events: StreamEvent[]): StreamEvent[] {
        return events.filter((e) => this.push(e));
    }

    /** Reconnects keep history; the server restarts seq per session stream. */
    resetOrdering(): void {
        this.lastSeq = -1;
    }
}

/** Exponential backoff schedule for stream reconnects: 0.5s doubling to 10s. */
export class ReconnectBackoff {
    constructor(
        private readonly baseMs = 500,
        private readonly capMs = 10_000,
    ) {}

    private attempt = 0;

    nextDelayMs(): number {
        const delay = Math.min(this.capMs, this.baseMs * 2 ** this.attempt);
        this.attempt += 1;
        return delay;
    }

    reset(): void {
        this.attempt = 0;
    }
}
