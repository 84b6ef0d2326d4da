/**
 * Typed errors mirroring the core library's machine-readable codes.
 *
 * CLI failures arrive as `{"error": {"code", "message"}}` on stderr plus
 * an exit code; they are re-raised here as the matching class so callers
 * can branch with `instanceof` instead of parsing messages.
 */

export class AlignkitClientError extends Error {
  readonly code: string;

  constructor(code: string, message: string) {
    super(message);
    this.name = new.target.name;
    this.code = code;
  }
}

/** The buffer view does not describe a dense C-order block. */
export class NonContiguousBufferError extends AlignkitClientError {
  constructor(message: string) {
    super("non_contiguous_buffer", message);
  }
}

export class DimensionMismatchError extends AlignkitClientError {}
export class NoFeasiblePathError extends AlignkitClientError {}
export class NonFiniteInputError extends AlignkitClientError {}
export class InvalidPathError extends AlignkitClientError {}
export class IoError extends AlignkitClientError {}

/** The CLI failed in a way that did not produce a structured error. */
export class CliFailureError extends AlignkitClientError {
  constructor(message: string) {
    super("cli_failure", message);
  }
}

const ERROR_CLASSES: Record<string, new (code: string, message: string) => AlignkitClientError> = {
  dim_mismatch: DimensionMismatchError,
  length_mismatch: DimensionMismatchError,
  no_feasible_path: NoFeasiblePathError,
  non_finite_input: NonFiniteInputError,
  invalid_path: InvalidPathError,
  io_error: IoError,
  malformed_header: IoError,
  unsupported_dtype: IoError,
  unsupported_rank: IoError,
  fortran_order_unsupported: IoError,
};

export function errorFromCode(code: string, message: string): AlignkitClientError {
  const cls = ERROR_CLASSES[code] ?? AlignkitClientError;
  return new cls(code, message);
}
