import type {LightState} from "./api.js";

/**
 * Convert the bulb's hue/saturation/brightness (0..360, 0..100, 0..100)
 * to an sRGB triple. This is HSV math, not CSS hsl(), because that is
 * the model the bulbs speak.
 */
export function hsbToRgb(hue: number, saturation: number, brightness: number): [number, number, number] {
    const s = saturation / 100;
    const v = brightness / 100;
    const c = v * s;
    const hp = (((hue % 360) + 360) % 360) / 60;
    const x = c * (1 - Math.abs((hp % 2) - 1));
    let rgb: [number, number, number];
    if (hp < 1) {
        rgb = [c, x, 0];
    } else if (hp < 2) {
        rgb = [x, c, 0];
    } else if (hp < 3) {
        rgb = [0, c, x];
    } else if (hp < 4) {
        rgb = [0, x, c];
    } else if (hp < 5) {
        rgb = [x, 0, c];
    } else {
        rgb = [c, 0, x];
    }
    const m = v - c;
    return [
        Math.round((rgb[0] + m) * 255),
        Math.round((rgb[1] + m) * 255),
        Math.round((rgb[2] + m) * 255),
    ];
}

export const OFF_COLOR = "rgb(24, 24, 28)";

/**
 * CSS color for the swatch, or null when the bulb has never reported.
 * A powered-off bulb renders as near-black regardless of its hue.
 */
export function swatchColor(state: LightState | null): string | null {
    if (state === null) {
        return null;
    }
    if (!state.power) {
        return OFF_COLOR;
    }
    const [r, g, b] = hsbToRgb(state.hue, state.saturation, state.brightness);
    return `rgb(${r}, ${g}, ${b})`;
}
