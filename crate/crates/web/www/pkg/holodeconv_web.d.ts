/* tslint:disable */
/* eslint-disable */

/**
 * One noisy simulation and recovery of a phantom.
 */
export class Reconstruction {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Recovered magnitudes, row-major `n x n`.
     */
    estimate(): Float64Array;
    /**
     * Specimen magnitudes, row-major `n x n`.
     */
    truth(): Float64Array;
    readonly expected_relative_error: number;
    readonly n: number;
    readonly relative_error: number;
}

/**
 * `log10` of the weight map for `reference`, row-major on the strided grid
 * (side `ceil(m / stride)`). Zero weights map to `-inf`.
 */
export function log_weight_map(n: number, m: number, reference: string, stride: number): Float64Array;

export function phantom_names(): string[];

export function simulate_and_recover(phantom_name: string, n: number, m: number, reference: string, photons_per_pixel: number, seed: bigint): Reconstruction;

/**
 * Singular values of the `n x n` lower-triangular ones matrix, largest first.
 */
export function singular_values(n: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_reconstruction_free: (a: number, b: number) => void;
    readonly log_weight_map: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly phantom_names: () => [number, number];
    readonly reconstruction_estimate: (a: number) => [number, number];
    readonly reconstruction_expected_relative_error: (a: number) => number;
    readonly reconstruction_n: (a: number) => number;
    readonly reconstruction_relative_error: (a: number) => number;
    readonly reconstruction_truth: (a: number) => [number, number];
    readonly simulate_and_recover: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: bigint) => [number, number, number];
    readonly singular_values: (a: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_drop_slice: (a: number, b: number) => void;
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
