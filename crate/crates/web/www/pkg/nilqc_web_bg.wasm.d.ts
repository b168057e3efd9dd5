/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const dilatationReport: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const diskCircumcenter: (a: number, b: number) => [number, number, number, number];
export const exampleNames: () => [number, number];
export const normSlice: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_drop_slice: (a: number, b: number) => void;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
