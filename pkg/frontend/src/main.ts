import {BridgeApi} from "./api.js";
import {PlayConsole} from "./console.js";
import {PairingPage} from "./pairing.js";
import {parseRoute} from "./router.js";

const api = new BridgeApi("");

let current: {dispose(): void} | null = null;

function mount(): void {
    const root = document.getElementById("app");
    if (root === null) {
        return;
    }
    current?.dispose();
    const route = parseRoute(window.location.hash);
    if (route.page === "pair") {
        current = new PairingPage(root, api);
    } else {
        current = new PlayConsole(root, api, route);
    }
}

window.addEventListener("hashchange", mount);
mount();
