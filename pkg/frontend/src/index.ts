export {
  AlignOptions,
  AlignResult,
  BufferView,
  ClientOptions,
  LossResult,
  Matrix,
  bindAasDurations,
  bindLosses,
  coreVersion,
  matrixView,
} from "./client";
export {
  AlignkitClientError,
  CliFailureError,
  DimensionMismatchError,
  InvalidPathError,
  IoError,
  NoFeasiblePathError,
  NonContiguousBufferError,
  NonFiniteInputError,
  errorFromCode,
} from "./errors";
export { NpyArray, decodeNpy, encodeNpy } from "./npy";
