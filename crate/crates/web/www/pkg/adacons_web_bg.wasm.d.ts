/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_coefficienttrace_free: (a: number, b: number) => void;
export const __wbg_curves_free: (a: number, b: number) => void;
export const __wbg_weightsnapshot_free: (a: number, b: number) => void;
export const coefficientTrace: (a: number, b: number, c: number, d: number, e: bigint, f: number) => [number, number, number];
export const coefficienttrace_normalizedMean: (a: number) => [number, number];
export const coefficienttrace_normalizedStd: (a: number) => [number, number];
export const coefficienttrace_rawMean: (a: number) => [number, number];
export const coefficienttrace_rawStd: (a: number) => [number, number];
export const coefficienttrace_smoothedMean: (a: number) => [number, number];
export const coefficienttrace_smoothedStd: (a: number) => [number, number];
export const compareAggregators: (a: number, b: number, c: number, d: number, e: bigint, f: number) => [number, number, number];
export const curves_adacons: (a: number) => [number, number];
export const curves_adaconsWallTime: (a: number) => number;
export const curves_sum: (a: number) => [number, number];
export const curves_sumWallTime: (a: number) => number;
export const weightSnapshot: (a: number, b: number, c: number, d: bigint) => [number, number, number];
export const weightsnapshot_cosine: (a: number) => [number, number];
export const weightsnapshot_fallback: (a: number) => number;
export const weightsnapshot_normalized: (a: number) => [number, number];
export const weightsnapshot_raw: (a: number) => [number, number];
export const __externref_table_alloc: () => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
