// @vitest-environment happy-dom
import {afterEach, beforeEach, describe, expect, it, vi} from "vitest";

import {ApiError, NetworkError} from "../src/api.js";
import type {BridgeClient, DeviceState} from "../src/api.js";
import {PlayConsole} from "../src/console.js";
import {SPIRITS_NOT_LISTENING} from "../src/messages.js";

const GREEN = {power: true, hue: 120, saturation: 100, brightness: 100};
const RED = {power: true, hue: 0, saturation: 100, brightness: 100};

function deviceState(reported: DeviceState["reported"], inSync = true): DeviceState {
    return {
        desired: GREEN,
        reported,
        desired_revision: 1,
        reported_revision: inSync ? 1 : 0,
        in_sync: inSync,
    };
}

function makeClient(overrides: Partial<BridgeClient> = {}): BridgeClient {
    return {
        listDevices: vi.fn(),
        pair: vi.fn(),
        deviceState: vi.fn(async () => deviceState(GREEN)),
        createSession: vi.fn(async () => ({session_id: "sess-1", phase: "Created"})),
        sendEvent: vi.fn(async () => ({phase: "Ambiance", cues: ["SpookyAmbiance"], question_index: 0})),
        session: vi.fn(),
        ...overrides,
    } as BridgeClient;
}

let consoles: PlayConsole[] = [];

function mountConsole(
    client: BridgeClient,
    route = {code: "41272", sessionId: null as string | null},
    options: ConstructorParameters<typeof PlayConsole>[3] = {},
): HTMLElement {
    const root = document.createElement("div");
    document.body.append(root);
    consoles.push(new PlayConsole(root, client, route, {
        rewriteFragment: () => {},
        ...options,
    }));
    return root;
}

function guidance(root: HTMLElement): HTMLElement {
    return root.querySelector("#guidance") as HTMLElement;
}

beforeEach(() => {
    document.body.innerHTML = "";
    consoles = [];
});

afterEach(() => {
    for (const c of consoles) {
        c.dispose();
    }
});

describe("PlayConsole", () => {
    it("asks for a code when the fragment has none", () => {
        const root = mountConsole(makeClient(), {code: null, sessionId: null});
        expect(root.querySelector("#code-input")).not.toBeNull();
    });

    it("navigates to the entered code", () => {
        const navigate = vi.fn();
        const root = mountConsole(makeClient(), {code: null, sessionId: null}, {navigate});
        (root.querySelector("#code-input") as HTMLInputElement).value = "00042";
        root.querySelector("#code-form")!.dispatchEvent(
            new Event("submit", {bubbles: true, cancelable: true}),
        );
        expect(navigate).toHaveBeenCalledWith("#/play/00042");
    });

    it("start creates a session, sends Start, and records the session in the fragment", async () => {
        const client = makeClient();
        const rewriteFragment = vi.fn();
        const root = mountConsole(client, {code: "41272", sessionId: null}, {rewriteFragment});
        (root.querySelector("#btn-start") as HTMLButtonElement).click();
        await vi.waitFor(() => {
            expect(root.querySelector("#phase-banner")!.textContent).toBe("Ambiance");
        });
        expect(client.createSession).toHaveBeenCalledWith("41272");
        expect(client.sendEvent).toHaveBeenCalledWith("sess-1", "Start");
        expect(rewriteFragment).toHaveBeenCalledWith("#/play/41272/s/sess-1");
    });

    it("renders the 409 guidance on an out-of-order press", async () => {
        const client = makeClient({
            sendEvent: vi.fn(async (_id: string, kind: string) => {
                if (kind === "Start") {
                    return {phase: "Ambiance", cues: ["SpookyAmbiance"], question_index: 0};
                }
                throw new ApiError(409, "invalid_transition", "QuestionAsked is not legal in Ambiance");
            }),
        });
        const root = mountConsole(client);
        (root.querySelector("#btn-start") as HTMLButtonElement).click();
        await vi.waitFor(() => {
            expect(root.querySelector("#phase-banner")!.textContent).toBe("Ambiance");
        });

        (root.querySelector("#btn-question") as HTMLButtonElement).click();
        await vi.waitFor(() => {
            expect(guidance(root).hidden).toBe(false);
        });
        expect(guidance(root).textContent).toBe(SPIRITS_NOT_LISTENING);
        // the banner still shows what the server last confirmed
        expect(root.querySelector("#phase-banner")!.textContent).toBe("Ambiance");
    });

    it("refuses button presses before any session exists, locally", () => {
        const client = makeClient();
        const root = mountConsole(client);
        (root.querySelector("#btn-question") as HTMLButtonElement).click();
        expect(client.sendEvent).not.toHaveBeenCalled();
        expect(guidance(root).textContent).toBe("the seance hasn't begun; press start");
    });

    it("paints the swatch from reported state on each poll beat", async () => {
        vi.useFakeTimers();
        try {
            let state = deviceState(GREEN, true);
            const client = makeClient({deviceState: vi.fn(async () => state)});
            const root = mountConsole(client);
            await vi.advanceTimersByTimeAsync(0); // immediate first tick
            const swatch = root.querySelector("#swatch") as HTMLElement;
            expect(swatch.style.backgroundColor).toBe("rgb(0, 255, 0)");
            expect(root.querySelector("#sync-label")!.textContent).toBe("light in sync");

            state = deviceState(RED, false);
            await vi.advanceTimersByTimeAsync(500); // one UI poll interval later
            expect(swatch.style.backgroundColor).toBe("rgb(255, 0, 0)");
            expect(root.querySelector("#sync-label")!.textContent).toBe("light catching up");
        } finally {
            vi.useRealTimers();
        }
    });

    it("shows the hatched unknown swatch before the bulb ever reported", async () => {
        const client = makeClient({deviceState: vi.fn(async () => deviceState(null, false))});
        const root = mountConsole(client);
        await vi.waitFor(() => {
            expect(root.querySelector("#sync-label")!.textContent).toBe("light catching up");
        });
        expect((root.querySelector("#swatch") as HTMLElement).classList.contains("unknown")).toBe(true);
    });

    it("flags network loss as reconnecting and recovers", async () => {
        vi.useFakeTimers();
        try {
            let down = true;
            const client = makeClient({
                deviceState: vi.fn(async () => {
                    if (down) {
                        throw new NetworkError("fetch failed");
                    }
                    return deviceState(GREEN);
                }),
            });
            const root = mountConsole(client);
            await vi.advanceTimersByTimeAsync(0);
            expect((root.querySelector("#reconnect") as HTMLElement).hidden).toBe(false);

            down = false;
            await vi.advanceTimersByTimeAsync(500);
            expect((root.querySelector("#reconnect") as HTMLElement).hidden).toBe(true);
        } finally {
            vi.useRealTimers();
        }
    });

    it("stops polling and explains when the code is revoked", async () => {
        vi.useFakeTimers();
        try {
            const deviceStateFn = vi.fn(async () => {
                throw new ApiError(410, "revoked", "code 41272 was revoked");
            });
            const client = makeClient({deviceState: deviceStateFn});
            const root = mountConsole(client);
            await vi.advanceTimersByTimeAsync(0);
            expect(guidance(root).textContent).toBe("that pairing code was revoked");
            const calls = deviceStateFn.mock.calls.length;
            await vi.advanceTimersByTimeAsync(2000);
            expect(deviceStateFn.mock.calls.length).toBe(calls); // poller stopped
        } finally {
            vi.useRealTimers();
        }
    });

    it("restores the phase banner for a session id in the fragment", async () => {
        const client = makeClient({
            session: vi.fn(async () => ({
                session_id: "sess-9",
                code: "41272",
                phase: "Listening",
                question_index: 1,
            })),
        });
        const root = mountConsole(client, {code: "41272", sessionId: "sess-9"});
        await vi.waitFor(() => {
            expect(root.querySelector("#phase-banner")!.textContent).toBe("Listening");
        });
        expect(client.session).toHaveBeenCalledWith("sess-9");
    });

    it("drops a dead session id and says so", async () => {
        const rewriteFragment = vi.fn();
        const client = makeClient({
            session: vi.fn(async () => {
                throw new ApiError(404, "unknown_session", "no session sess-9");
            }),
        });
        const root = mountConsole(client, {code: "41272", sessionId: "sess-9"}, {rewriteFragment});
        await vi.waitFor(() => {
            expect(guidance(root).hidden).toBe(false);
        });
        expect(guidance(root).textContent).toBe("that seance is gone; start a new one");
        expect(rewriteFragment).toHaveBeenCalledWith("#/play/41272");
    });

    it("serializes button presses by disabling them while a request is in flight", async () => {
        let release!: () => void;
        const gate = new Promise<void>((resolve) => {
            release = resolve;
        });
        const client = makeClient({
            createSession: vi.fn(async () => {
                await gate;
                return {session_id: "sess-1", phase: "Created"};
            }),
        });
        const root = mountConsole(client);
        const buttons = Array.from(root.querySelectorAll<HTMLButtonElement>(".buttons button"));
        buttons[0].click();
        await vi.waitFor(() => {
            expect(buttons.every((b) => b.disabled)).toBe(true);
        });
        release();
        await vi.waitFor(() => {
            expect(buttons.every((b) => !b.disabled)).toBe(true);
        });
    });
});
