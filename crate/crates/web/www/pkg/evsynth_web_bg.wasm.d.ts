/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_eventview_free: (a: number, b: number) => void;
export const events: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: bigint, j: number) => [number, number, number];
export const eventview_height: (a: number) => number;
export const eventview_off: (a: number) => number;
export const eventview_on: (a: number) => number;
export const eventview_rgba: (a: number) => [number, number];
export const eventview_width: (a: number) => number;
export const expose: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const lif_curve: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
