/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_reconstruction_free: (a: number, b: number) => void;
export const log_weight_map: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const phantom_names: () => [number, number];
export const reconstruction_estimate: (a: number) => [number, number];
export const reconstruction_expected_relative_error: (a: number) => number;
export const reconstruction_n: (a: number) => number;
export const reconstruction_relative_error: (a: number) => number;
export const reconstruction_truth: (a: number) => [number, number];
export const simulate_and_recover: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: bigint) => [number, number, number];
export const singular_values: (a: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_drop_slice: (a: number, b: number) => void;
export const __wbindgen_start: () => void;
