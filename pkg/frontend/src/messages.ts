import {ApiError, NetworkError} from "./api.js";

/** Shown when the server 409s an out-of-order seance button press. */
export const SPIRITS_NOT_LISTENING = "the spirits aren't listening yet";

export const RECONNECTING = "reconnecting to the bridge...";

const BY_CODE: Record<string, string> = {
    bad_credentials: "the vendor cloud rejected that login",
    unknown_device: "that account owns no such bulb",
    unknown_code: "no bulb is paired under that code",
    revoked: "that pairing code was revoked",
    unknown_session: "that seance is gone; start a new one",
    invalid_transition: SPIRITS_NOT_LISTENING,
    unknown_gesture: "the spirits do not know that gesture",
    out_of_range: "that light state is out of range",
    device_offline: "the bulb is offline at the vendor cloud",
    cloud_unavailable: "the vendor cloud is unreachable right now",
    vendor_transient_failure: "the vendor cloud hiccuped; try again",
    invalid_vendor_session: "the bridge lost its vendor login; pair again",
    store_unavailable: "the bridge cannot write its records right now",
    code_space_exhausted: "no pairing codes left",
};

/** One human line per failure, whatever shape it arrived in. */
export function humanMessage(err: unknown): string {
    if (err instanceof NetworkError) {
        return RECONNECTING;
    }
    if (err instanceof ApiError) {
        return BY_CODE[err.code] ?? err.message;
    }
    return String(err);
}
