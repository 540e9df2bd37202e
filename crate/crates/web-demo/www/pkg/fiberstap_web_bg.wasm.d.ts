/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const pulses: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const spectrum_vs_eta: (a: number, b: number, c: number) => [number, number, number, number];
export const step1_populations: (a: number, b: number, c: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
