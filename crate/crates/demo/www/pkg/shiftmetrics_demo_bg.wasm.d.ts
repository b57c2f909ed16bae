/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const chain_distances: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const long_range_certificate: (a: number, b: number) => [number, number, number, number];
export const separability_series: (a: number, b: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
