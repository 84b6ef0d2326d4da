/**
 * Minimal NPY v1.0 codec for the wire formats the core accepts:
 * little-endian C-order arrays of f32, f64 or i64, rank 1 or 2.
 */

import { IoError } from "./errors";

const MAGIC = Buffer.from("\x93NUMPY", "latin1");

export type NpyArray =
  | { descr: "<f4"; data: Float32Array; shape: number[] }
  | { descr: "<f8"; data: Float64Array; shape: number[] }
  | { descr: "<i8"; data: BigInt64Array; shape: number[] };

function descrOf(data: Float32Array | Float64Array | BigInt64Array): string {
  if (data instanceof Float32Array) return "<f4";
  if (data instanceof Float64Array) return "<f8";
  return "<i8";
}

export function encodeNpy(
  data: Float32Array | Float64Array | BigInt64Array,
  shape: number[],
): Buffer {
  const count = shape.reduce((a, b) => a * b, 1);
  if (count !== data.length) {
    throw new IoError("io_error", `shape [${shape}] does not cover ${data.length} elements`);
  }
  const shapeRepr = shape.length === 1 ? `(${shape[0]},)` : `(${shape.join(", ")})`;
  const header = `{'descr': '${descrOf(data)}', 'fortran_order': False, 'shape': ${shapeRepr}, }`;
  const unpadded = MAGIC.length + 2 + 2 + header.length + 1;
  const padding = (64 - (unpadded % 64)) % 64;
  const headerBytes = Buffer.from(header + " ".repeat(padding) + "\n", "latin1");

  const preamble = Buffer.alloc(MAGIC.length + 4);
  MAGIC.copy(preamble, 0);
  preamble[6] = 1;
  preamble[7] = 0;
  preamble.writeUInt16LE(headerBytes.length, 8);
  const payload = Buffer.from(data.buffer, data.byteOffset, data.byteLength);
  return Buffer.concat([preamble, headerBytes, payload]);
}

function parseHeader(text: string): { descr: string; fortran: boolean; shape: number[] } {
  // The writer-side header is a fixed-form Python dict literal; pull the
  // three fields out positionally instead of evaluating it.
  const descr = /'descr':\s*'([^']+)'/.exec(text);
  const fortran = /'fortran_order':\s*(True|False)/.exec(text);
  const shape = /'shape':\s*\(([^)]*)\)/.exec(text);
  if (!descr || !fortran || !shape) {
    throw new IoError("malformed_header", "NPY header is missing required fields");
  }
  const dims = shape[1]
    .split(",")
    .map((s) => s.trim())
    .filter((s) => s.length > 0)
    .map((s) => {
      const n = Number(s);
      if (!Number.isInteger(n) || n < 0) {
        throw new IoError("malformed_header", `bad shape entry ${s}`);
      }
      return n;
    });
  return { descr: descr[1], fortran: fortran[1] === "True", shape: dims };
}

export function decodeNpy(bytes: Buffer): NpyArray {
  if (bytes.length < 10 || !bytes.subarray(0, 6).equals(MAGIC)) {
    throw new IoError("malformed_header", "missing NPY magic bytes");
  }
  if (bytes[6] !== 1 || bytes[7] !== 0) {
    throw new IoError("malformed_header", `NPY version ${bytes[6]}.${bytes[7]} not supported`);
  }
  const headerLen = bytes.readUInt16LE(8);
  const dataStart = 10 + headerLen;
  if (dataStart > bytes.length) {
    throw new IoError("malformed_header", "header length exceeds file size");
  }
  const { descr, fortran, shape } = parseHeader(
    bytes.subarray(10, dataStart).toString("latin1"),
  );
  if (fortran) {
    throw new IoError("fortran_order_unsupported", "Fortran order not supported");
  }
  if (shape.length < 1 || shape.length > 2) {
    throw new IoError("unsupported_rank", `rank ${shape.length} not supported`);
  }
  const count = shape.reduce((a, b) => a * b, 1);
  // Copy out of the file buffer so typed-array alignment is guaranteed.
  const slice = (itemSize: number) => {
    if (bytes.length - dataStart !== count * itemSize) {
      throw new IoError("malformed_header", "payload size does not match header");
    }
    const copy = Buffer.alloc(count * itemSize);
    bytes.copy(copy, 0, dataStart);
    return copy;
  };
  switch (descr) {
    case "<f4":
      return { descr, data: new Float32Array(slice(4).buffer, 0, count), shape };
    case "<f8":
      return { descr, data: new Float64Array(slice(8).buffer, 0, count), shape };
    case "<i8":
      return { descr, data: new BigInt64Array(slice(8).buffer, 0, count), shape };
    default:
      throw new IoError("unsupported_dtype", `dtype ${descr} not supported`);
  }
}
