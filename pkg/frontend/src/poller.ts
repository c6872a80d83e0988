/**
 * Fixed-interval poll loop. Ticks never overlap: if one is still in
 * flight when the interval fires, that beat is skipped.
 */
export class Poller {
    private timer: ReturnType<typeof setInterval> | null = null;
    private busy = false;

    constructor(
        private intervalMs: number,
        private tick: () => Promise<void>,
    ) {}

    start(): void {
        if (this.timer !== null) {
            return;
        }
        void this.run();
        this.timer = setInterval(() => void this.run(), this.intervalMs);
    }

    stop(): void {
        if (this.timer !== null) {
            clearInterval(this.timer);
            this.timer = null;
        }
    }

    private async run(): Promise<void> {
        if (this.busy) {
            return;
        }
        this.busy = true;
        try {
            await this.tick();
        } finally {
            this.busy = false;
        }
    }
}
