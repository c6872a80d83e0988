/**
 * Hash routing. The pairing code lives in the URL fragment so player 2
 * can hand the console link to player 1's device; nothing about the
 * vendor account ever appears in a URL.
 */

export type Route =
    | {page: "pair"}
    | {page: "play"; code: string | null; sessionId: string | null};

export function parseRoute(hash: string): Route {
    const parts = hash.replace(/^#\/?/, "").split("/").filter((p) => p.length > 0);
    if (parts[0] !== "play") {
        return {page: "pair"};
    }
    const code = parts[1] && /^[0-9]{5}$/.test(parts[1]) ? parts[1] : null;
    const sessionId = code && parts[2] === "s" && parts[3] ? parts[3] : null;
    return {page: "play", code, sessionId};
}

export function playHash(code: string, sessionId?: string): string {
    return sessionId ? `#/play/${code}/s/${sessionId}` : `#/play/${code}`;
}
