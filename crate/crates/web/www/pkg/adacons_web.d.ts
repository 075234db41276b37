/* tslint:disable */
/* eslint-disable */

/**
 * Stage statistics of the AdaCons coefficients, one entry per iteration.
 */
export class CoefficientTrace {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    normalizedMean(): Float64Array;
    normalizedStd(): Float64Array;
    rawMean(): Float64Array;
    rawStd(): Float64Array;
    smoothedMean(): Float64Array;
    smoothedStd(): Float64Array;
}

/**
 * Objective per iteration (index 0 is the starting point) for both rules.
 */
export class Curves {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    adacons(): Float64Array;
    adaconsWallTime(): number;
    sum(): Float64Array;
    /**
     * Mean per-iteration wall time, seconds.
     */
    sumWallTime(): number;
}

/**
 * Weights of one aggregation round at the initial point.
 */
export class WeightSnapshot {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Cosine between each worker gradient and the mean.
     */
    cosine(): Float64Array;
    fallback(): boolean;
    /**
     * Final weights; they sum to one.
     */
    normalized(): Float64Array;
    /**
     * `<g_i, ḡ> / |g_i|` per worker.
     */
    raw(): Float64Array;
}

export function coefficientTrace(dim: number, workers: number, effective_batch: number, iterations: number, seed: bigint, beta: number): CoefficientTrace;

/**
 * Objective curves of averaging vs AdaCons on stochastic linear regression.
 */
export function compareAggregators(dim: number, workers: number, effective_batch: number, iterations: number, seed: bigint, beta: number): Curves;

export function weightSnapshot(dim: number, workers: number, local_batch: number, seed: bigint): WeightSnapshot;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_coefficienttrace_free: (a: number, b: number) => void;
    readonly __wbg_curves_free: (a: number, b: number) => void;
    readonly __wbg_weightsnapshot_free: (a: number, b: number) => void;
    readonly coefficientTrace: (a: number, b: number, c: number, d: number, e: bigint, f: number) => [number, number, number];
    readonly coefficienttrace_normalizedMean: (a: number) => [number, number];
    readonly coefficienttrace_normalizedStd: (a: number) => [number, number];
    readonly coefficienttrace_rawMean: (a: number) => [number, number];
    readonly coefficienttrace_rawStd: (a: number) => [number, number];
    readonly coefficienttrace_smoothedMean: (a: number) => [number, number];
    readonly coefficienttrace_smoothedStd: (a: number) => [number, number];
    readonly compareAggregators: (a: number, b: number, c: number, d: number, e: bigint, f: number) => [number, number, number];
    readonly curves_adacons: (a: number) => [number, number];
    readonly curves_adaconsWallTime: (a: number) => number;
    readonly curves_sum: (a: number) => [number, number];
    readonly curves_sumWallTime: (a: number) => number;
    readonly weightSnapshot: (a: number, b: number, c: number, d: bigint) => [number, number, number];
    readonly weightsnapshot_cosine: (a: number) => [number, number];
    readonly weightsnapshot_fallback: (a: number) => number;
    readonly weightsnapshot_normalized: (a: number) => [number, number];
    readonly weightsnapshot_raw: (a: number) => [number, number];
    readonly __externref_table_alloc: () => number;
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
