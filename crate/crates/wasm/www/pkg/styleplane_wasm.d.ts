/* tslint:disable */
/* eslint-disable */

/**
 * Rotation path and straight line between two seasons on a synthetic
 * circle, projected into the true plane.
 */
export function compare_demo(seed: bigint, noise: number, src: string, tgt: string, steps: number): string;

/**
 * Fit a plane to a small synthetic circle and report the loss curve and
 * the principal angles to the true plane.
 */
export function learn_demo(seed: bigint, noise: number, learning_rate: number, max_steps: number): string;

/**
 * Random patches of a generated image matched to the 4x4 grid of a
 * target image by cosine similarity of their features.
 */
export function match_demo(seed: bigint, n_patches: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly compare_demo: (a: bigint, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly learn_demo: (a: bigint, b: number, c: number, d: number) => [number, number, number, number];
    readonly match_demo: (a: bigint, b: number) => [number, number, number, number];
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
