/* tslint:disable */
/* eslint-disable */

export class EventView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly height: number;
    readonly off: number;
    readonly on: number;
    /**
     * ON events red, OFF events blue, on white.
     */
    readonly rgba: Uint8Array;
    readonly width: number;
}

/**
 * Event frame for an RGBA image. `flow` is `"random"` or `"fixed"`.
 */
export function events(rgba: Uint8Array, width: number, height: number, threshold: number, flow: string, theta: number, seed: bigint, cap: number): EventView;

/**
 * Exposure-adjusted copy of an RGBA image.
 */
export function expose(rgba: Uint8Array, width: number, height: number, alpha: number): Uint8Array;

/**
 * Interleaved `[v0, s0, v1, s1, ...]` for `steps` updates.
 */
export function lif_curve(input: number, tau: number, threshold: number, reset: number, steps: number, paper_literal: boolean): Float32Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_eventview_free: (a: number, b: number) => void;
    readonly events: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: bigint, j: number) => [number, number, number];
    readonly eventview_height: (a: number) => number;
    readonly eventview_off: (a: number) => number;
    readonly eventview_on: (a: number) => number;
    readonly eventview_rgba: (a: number) => [number, number];
    readonly eventview_width: (a: number) => number;
    readonly expose: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly lif_curve: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
