/* tslint:disable */
/* eslint-disable */

/**
 * Layout: `[D/λ, correlation, |J0(2πD/λ)|]` triples for `points` spacings
 * from 0 to `d_max_wl`.
 */
export function bessel_correlation(m: number, d_max_wl: number, points: number, seed: number): Float64Array;

/**
 * Layout: `[effective_rank, bound, λ₁/λ₁ (dB), λ₂/λ₁ (dB), ...]`, with
 * eigenvalues floored at -200 dB.
 */
export function eigen_spectrum(m: number, spacing_wl: number, theta_min_deg: number, theta_max_deg: number, random_array: boolean, seed: number): Float64Array;

/**
 * Layout: `[D, σ²(D)]` pairs for `points` distances from 0 to `d_max`
 * (unit α, disk radius 500 m).
 */
export function sigma_sq_curve(r: number, gamma: number, d_max: number, points: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly bessel_correlation: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly eigen_spectrum: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly sigma_sq_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
