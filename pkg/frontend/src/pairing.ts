import type {BridgeClient, VendorDevice} from "./api.js";
import {humanMessage} from "./messages.js";
import {playHash} from "./router.js";

/**
 * Pairing flow: vendor credentials, then a bulb picker, then the big
 * five digit code. Credentials stay in the form inputs; nothing is
 * written to storage of any kind.
 */
export class PairingPage {
    constructor(
        private root: HTMLElement,
        private api: BridgeClient,
    ) {
        this.render();
        this.wire();
    }

    dispose(): void {}

    private render(): void {
        this.root.innerHTML = `
            <section class="card">
                <h1>pair a bulb</h1>
                <p class="subtitle">log in to the bulb vendor, pick a light, get your seance code</p>
                <form id="login-form">
                    <label>vendor account
                        <input id="vendor-user" type="text" autocomplete="username" required />
                    </label>
                    <label>password
                        <input id="vendor-pass" type="password" autocomplete="current-password" required />
                    </label>
                    <button id="fetch-devices" type="submit">find my bulbs</button>
                </form>
                <p id="pair-error" class="error" hidden></p>
                <section id="picker" hidden>
                    <h2>pick a bulb</h2>
                    <div id="device-list"></div>
                    <button id="pair-btn" type="button" disabled>pair this bulb</button>
                </section>
                <section id="code-reveal" hidden>
                    <h2 id="paired-alias"></h2>
                    <div id="code-digits" class="code"></div>
                    <button id="copy-code" type="button">copy code</button>
                    <a id="console-link" class="go-play">open the play console</a>
                </section>
                <p class="footnote"><a href="#/play">already have a code? go straight to the console</a></p>
            </section>
        `;
    }

    private el<T extends HTMLElement>(id: string): T {
        return this.root.querySelector(`#${id}`) as T;
    }

    private showError(err: unknown): void {
        const box = this.el<HTMLParagraphElement>("pair-error");
        box.textContent = humanMessage(err);
        box.hidden = false;
    }

    private clearError(): void {
        this.el<HTMLParagraphElement>("pair-error").hidden = true;
    }

    private wire(): void {
        const form = this.el<HTMLFormElement>("login-form");
        form.addEventListener("submit", (ev) => {
            ev.preventDefault();
            void this.fetchDevices();
        });
        this.el<HTMLButtonElement>("pair-btn").addEventListener("click", () => {
            void this.pairSelected();
        });
        this.el<HTMLButtonElement>("copy-code").addEventListener("click", () => {
            void this.copyCode();
        });
    }

    private get username(): string {
        return this.el<HTMLInputElement>("vendor-user").value;
    }

    private get password(): string {
        return this.el<HTMLInputElement>("vendor-pass").value;
    }

    private async fetchDevices(): Promise<void> {
        const button = this.el<HTMLButtonElement>("fetch-devices");
        button.disabled = true;
        this.clearError();
        try {
            const {devices} = await this.api.listDevices(this.username, this.password);
            this.renderPicker(devices);
        } catch (err) {
            this.showError(err);
        } finally {
            button.disabled = false;
        }
    }

    private renderPicker(devices: VendorDevice[]): void {
        const list = this.el<HTMLDivElement>("device-list");
        list.innerHTML = "";
        for (const device of devices) {
            const label = document.createElement("label");
            label.className = "device-option";
            const radio = document.createElement("input");
            radio.type = "radio";
            radio.name = "device";
            radio.value = device.vendor_device_id;
            radio.disabled = !device.online;
            radio.addEventListener("change", () => {
                this.el<HTMLButtonElement>("pair-btn").disabled = false;
            });
            const text = document.createElement("span");
            text.textContent = `${device.alias} (${device.vendor_device_id})`;
            const badge = document.createElement("span");
            badge.className = device.online ? "badge online" : "badge offline";
            badge.textContent = device.online ? "online" : "offline";
            label.append(radio, text, badge);
            list.append(label);
        }
        this.el<HTMLElement>("picker").hidden = false;
    }

    private selectedDevice(): string | null {
        const checked = this.root.querySelector<HTMLInputElement>("input[name=device]:checked");
        return checked ? checked.value : null;
    }

    private async pairSelected(): Promise<void> {
        const deviceId = this.selectedDevice();
        if (deviceId === null) {
            return;
        }
        const button = this.el<HTMLButtonElement>("pair-btn");
        button.disabled = true;
        this.clearError();
        try {
            const result = await this.api.pair(this.username, this.password, deviceId);
            this.revealCode(result.code, result.alias);
        } catch (err) {
            this.showError(err);
        } finally {
            button.disabled = false;
        }
    }

    private revealCode(code: string, alias: string): void {
        this.el<HTMLHeadingElement>("paired-alias").textContent = alias;
        const digits = this.el<HTMLDivElement>("code-digits");
        digits.innerHTML = "";
        for (const digit of code) {
            const span = document.createElement("span");
            span.className = "digit";
            span.textContent = digit;
            digits.append(span);
        }
        this.el<HTMLAnchorElement>("console-link").href = playHash(code);
        this.el<HTMLElement>("code-reveal").hidden = false;
    }

    private async copyCode(): Promise<void> {
        const code = Array.from(
            this.root.querySelectorAll<HTMLSpanElement>("#code-digits .digit"),
        )
            .map((d) => d.textContent)
            .join("");
        const button = this.el<HTMLButtonElement>("copy-code");
        try {
            await navigator.clipboard.writeText(code);
            button.textContent = "copied";
        } catch {
            button.textContent = code; // clipboard blocked; show it for hand copy
        }
    }
}
