/**
 * Typed client for the bridge HTTP API. Pure transport: every non-2xx
 * response becomes an ApiError carrying the server's error code, and
 * anything that never reached the server becomes a NetworkError.
 */

export interface LightState {
    power: boolean;
    hue: number;
    saturation: number;
    brightness: number;
}

export interface DeviceState {
    desired: LightState;
    reported: LightState | null;
    desired_revision: number;
    reported_revision: number;
    in_sync: boolean;
}

export interface VendorDevice {
    vendor_device_id: string;
    alias: string;
    online: boolean;
}

export interface PairResult {
    code: string;
    alias: string;
}

export interface SessionHandle {
    session_id: string;
    phase: string;
}

export interface EventResult {
    phase: string;
    cues: string[];
    question_index: number;
}

export interface SessionView {
    session_id: string;
    code: string;
    phase: string;
    question_index: number;
}

export class ApiError extends Error {
    constructor(
        readonly status: number,
        readonly code: string,
        message: string,
    ) {
        super(message);
        this.name = "ApiError";
    }
}

export class NetworkError extends Error {
    constructor(message: string) {
        super(message);
        this.name = "NetworkError";
    }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class BridgeApi {
    private fetchFn: FetchLike;

    constructor(private baseUrl = "", fetchFn?: FetchLike) {
        this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
    }

    private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
        let resp: Response;
        try {
            resp = await this.fetchFn(this.baseUrl + path, {
                method,
                headers: body === undefined ? undefined : {"Content-Type": "application/json"},
                body: body === undefined ? undefined : JSON.stringify(body),
            });
        } catch (err) {
            throw new NetworkError(String(err));
        }
        let data: any = null;
        try {
            data = await resp.json();
        } catch {
            data = {};
        }
        if (!resp.ok) {
            throw new ApiError(
                resp.status,
                typeof data?.error === "string" ? data.error : "unknown",
                typeof data?.message === "string" ? data.message : `HTTP ${resp.status}`,
            );
        }
        return data as T;
    }

    listDevices(username: string, password: string): Promise<{devices: VendorDevice[]}> {
        return this.call("POST", "/api/vendor/devices", {
            vendor_username: username,
            vendor_password: password,
        });
    }

    pair(username: string, password: string, deviceId: string): Promise<PairResult> {
        return this.call("POST", "/api/pair", {
            vendor_username: username,
            vendor_password: password,
            vendor_device_id: deviceId,
        });
    }

    deviceState(code: string): Promise<DeviceState> {
        return this.call("GET", `/api/device/${encodeURIComponent(code)}/state`);
    }

    createSession(code: string, seed?: number): Promise<SessionHandle> {
        const body: Record<string, unknown> = {code};
        if (seed !== undefined) {
            body.seed = seed;
        }
        return this.call("POST", "/api/session", body);
    }

    sendEvent(sessionId: string, kind: string, gestureId?: string): Promise<EventResult> {
        const body: Record<string, unknown> = {kind};
        if (gestureId !== undefined) {
            body.gesture_id = gestureId;
        }
        return this.call("POST", `/api/session/${encodeURIComponent(sessionId)}/event`, body);
    }

    session(sessionId: string): Promise<SessionView> {
        return this.call("GET", `/api/session/${encodeURIComponent(sessionId)}`);
    }
}

/** The slice of BridgeApi the pages actually touch; tests hand in fakes. */
export type BridgeClient = Pick<
    BridgeApi,
    "listDevices" | "pair" | "deviceState" | "createSession" | "sendEvent" | "session"
>;
