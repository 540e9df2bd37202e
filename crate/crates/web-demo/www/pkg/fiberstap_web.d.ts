/* tslint:disable */
/* eslint-disable */

/**
 * Rows of `(t, Omega_A, Omega_B, Omega_g, Omega_R)` on `[0, 2 t_f]`.
 */
export function pulses(eta: number, epsilon: number, t_f: number, samples: number): Float64Array;

/**
 * Rows of `(eta, e_0 .. e_6)`: branch eigenvalues of the coupling
 * Hamiltonian for `eta` in `[eta_min, eta_max]`, with `g = 1`.
 */
export function spectrum_vs_eta(eta_min: number, eta_max: number, samples: number): Float64Array;

/**
 * Rows of `(t, P_phi1 effective, P_phi7 effective, P_phi1 full, P_phi7 full)`
 * for the R branch of step 1.
 */
export function step1_populations(eta: number, epsilon: number, t_f: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly pulses: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly spectrum_vs_eta: (a: number, b: number, c: number) => [number, number, number, number];
    readonly step1_populations: (a: number, b: number, c: number) => [number, number, number, number];
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
