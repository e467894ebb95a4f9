/* tslint:disable */
/* eslint-disable */

/**
 * Commit to a uniform string over `GF(2^k)` and try to open it both as 0
 * and as 1: once through a PR box, once by guessing `z2`, where every
 * possible `z2` is tried to count how many let the guess through.
 */
export function double_open(k: number, guess: number, seed: number): string;

/**
 * One PR box over `GF(2^k)` with inputs `a` and `b`. Also reports side B's
 * output for the same box had side A typed 0, 1, or nothing.
 */
export function pr_box(k: number, a: number, b: number, seed: number): string;

/**
 * One run of the zero-knowledge protocol on an instance given as JSON
 * (`{"r", "s", "clauses"}`), by real provers with a brute-forced witness or
 * by the simulator. Returns the verdict and each verifier's view.
 */
export function zk_session(instance_json: string, simulated: boolean, sigma: number, seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly double_open: (a: number, b: number, c: number) => [number, number];
    readonly pr_box: (a: number, b: number, c: number, d: number) => [number, number];
    readonly zk_session: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
