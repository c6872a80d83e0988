import {ApiError, NetworkError} from "./api.js";
import type {BridgeClient} from "./api.js";
import {RECONNECTING, humanMessage} from "./messages.js";
import {Poller} from "./poller.js";
import {playHash} from "./router.js";
import {swatchColor} from "./swatch.js";

const PHASE_HINTS: Record<string, string> = {
    Created: "press start to begin the seance",
    Ambiance: "have your partner strike a T pose, then press gesture detected",
    Listening: "ask your yes-no question aloud, then press question asked",
    Answering: "behold the light; the spirits are answering",
    Ended: "the spirits have departed",
};

export interface ConsoleRoute {
    code: string | null;
    sessionId: string | null;
}

export interface ConsoleOptions {
    pollMs?: number;
    /** User-initiated page change; defaults to setting location.hash. */
    navigate?: (hash: string) => void;
    /** Silent fragment rewrite that must not remount; defaults to replaceState. */
    rewriteFragment?: (hash: string) => void;
}

/**
 * The play console. Holds no game rules: every button press goes to the
 * server, and whatever phase or refusal comes back is what renders. The
 * swatch is painted from the device's reported state only, polled on a
 * fixed interval, so it shows what the physical bulb shows.
 */
export class PlayConsole {
    private sessionId: string | null;
    private poller: Poller | null = null;
    private navigate: (hash: string) => void;
    private rewriteFragment: (hash: string) => void;

    constructor(
        private root: HTMLElement,
        private api: BridgeClient,
        private route: ConsoleRoute,
        options: ConsoleOptions = {},
    ) {
        this.sessionId = route.sessionId;
        this.navigate = options.navigate ?? ((hash) => {
            window.location.hash = hash;
        });
        this.rewriteFragment = options.rewriteFragment ?? ((hash) => {
            window.history.replaceState(null, "", hash);
        });
        if (route.code === null) {
            this.renderCodeEntry();
        } else {
            this.renderConsole(route.code);
            this.poller = new Poller(options.pollMs ?? 500, () => this.pollState());
            this.poller.start();
            if (this.sessionId !== null) {
                void this.restoreSession();
            }
        }
    }

    dispose(): void {
        this.poller?.stop();
    }

    // -- code entry ---------------------------------------------------------

    private renderCodeEntry(): void {
        this.root.innerHTML = `
            <section class="card">
                <h1>seance console</h1>
                <p class="subtitle">enter the five digit code from the pairing page</p>
                <form id="code-form">
                    <input id="code-input" inputmode="numeric" pattern="[0-9]{5}" maxlength="5"
                           placeholder="00000" required />
                    <button id="open-console" type="submit">open</button>
                </form>
                <p class="footnote"><a href="#/pair">no code yet? pair a bulb first</a></p>
            </section>
        `;
        const form = this.root.querySelector<HTMLFormElement>("#code-form")!;
        form.addEventListener("submit", (ev) => {
            ev.preventDefault();
            const code = this.root.querySelector<HTMLInputElement>("#code-input")!.value;
            if (/^[0-9]{5}$/.test(code)) {
                this.navigate(playHash(code));
            }
        });
    }

    // -- the console proper -------------------------------------------------

    private renderConsole(code: string): void {
        this.root.innerHTML = `
            <section class="card console">
                <header class="console-head">
                    <h1>seance <span class="code-inline">${code}</span></h1>
                    <span id="reconnect" class="reconnect" hidden>${RECONNECTING}</span>
                </header>
                <div class="stage">
                    <div id="swatch" class="swatch unknown" title="what the bulb shows"></div>
                    <div class="stage-text">
                        <div id="phase-banner" class="phase">no seance yet</div>
                        <div id="phase-hint" class="hint">press start to summon the spirits</div>
                        <div id="sync-label" class="sync"></div>
                    </div>
                </div>
                <p id="guidance" class="guidance" hidden></p>
                <div class="buttons">
                    <button id="btn-start" type="button">start</button>
                    <button id="btn-gesture" type="button">gesture detected</button>
                    <button id="btn-question" type="button">question asked</button>
                    <button id="btn-end" type="button">end</button>
                </div>
                <p class="footnote"><a href="#/pair">pair another bulb</a></p>
            </section>
        `;
        this.el("btn-start").addEventListener("click", () => void this.onStart(code));
        this.el("btn-gesture").addEventListener("click", () => void this.onEvent("GestureDetected", "TPose"));
        this.el("btn-question").addEventListener("click", () => void this.onEvent("QuestionAsked"));
        this.el("btn-end").addEventListener("click", () => void this.onEvent("End"));
    }

    private el(id: string): HTMLElement {
        return this.root.querySelector(`#${id}`) as HTMLElement;
    }

    private buttons(): HTMLButtonElement[] {
        return Array.from(this.root.querySelectorAll<HTMLButtonElement>(".buttons button"));
    }

    private setBusy(busy: boolean): void {
        for (const button of this.buttons()) {
            button.disabled = busy;
        }
    }

    private showGuidance(text: string): void {
        const box = this.el("guidance");
        box.textContent = text;
        box.hidden = false;
    }

    private clearGuidance(): void {
        this.el("guidance").hidden = true;
    }

    private showPhase(phase: string): void {
        this.el("phase-banner").textContent = phase;
        this.el("phase-hint").textContent = PHASE_HINTS[phase] ?? "";
    }

    // -- session lifecycle ----------------------------------------------------

    private async restoreSession(): Promise<void> {
        try {
            const view = await this.api.session(this.sessionId!);
            this.showPhase(view.phase);
        } catch (err) {
            if (err instanceof ApiError && err.code === "unknown_session") {
                this.sessionId = null;
                this.rewriteFragment(playHash(this.route.code!));
                this.showGuidance(humanMessage(err));
            } else {
                this.showGuidance(humanMessage(err));
            }
        }
    }

    private async onStart(code: string): Promise<void> {
        this.setBusy(true);
        this.clearGuidance();
        try {
            if (this.sessionId === null) {
                const handle = await this.api.createSession(code);
                this.sessionId = handle.session_id;
                this.rewriteFragment(playHash(code, handle.session_id));
            }
            const result = await this.api.sendEvent(this.sessionId, "Start");
            this.showPhase(result.phase);
        } catch (err) {
            this.showGuidance(humanMessage(err));
        } finally {
            this.setBusy(false);
        }
    }

    private async onEvent(kind: string, gestureId?: string): Promise<void> {
        if (this.sessionId === null) {
            this.showGuidance("the seance hasn't begun; press start");
            return;
        }
        this.setBusy(true);
        this.clearGuidance();
        try {
            const result = await this.api.sendEvent(this.sessionId, kind, gestureId);
            this.showPhase(result.phase);
        } catch (err) {
            // a 409 here is the server saying "wrong moment", not a bug
            this.showGuidance(humanMessage(err));
        } finally {
            this.setBusy(false);
        }
    }

    // -- polling --------------------------------------------------------------

    private async pollState(): Promise<void> {
        try {
            const state = await this.api.deviceState(this.route.code!);
            this.el("reconnect").hidden = true;
            this.paintSwatch(state.reported === null ? null : state.reported, state.in_sync);
        } catch (err) {
            if (err instanceof NetworkError) {
                this.el("reconnect").hidden = false;
                return;
            }
            if (err instanceof ApiError && (err.code === "unknown_code" || err.code === "revoked")) {
                this.poller?.stop();
                this.showGuidance(humanMessage(err));
                return;
            }
            this.showGuidance(humanMessage(err));
        }
    }

    private paintSwatch(reported: Parameters<typeof swatchColor>[0], inSync: boolean): void {
        const swatch = this.el("swatch");
        const color = swatchColor(reported);
        if (color === null) {
            swatch.classList.add("unknown");
            swatch.style.removeProperty("background-color");
        } else {
            swatch.classList.remove("unknown");
            swatch.style.backgroundColor = color;
        }
        const sync = this.el("sync-label");
        sync.textContent = inSync ? "light in sync" : "light catching up";
        sync.classList.toggle("out", !inSync);
    }
}
