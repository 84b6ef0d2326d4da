/**
 * Client for the alignment kernels over their external interfaces:
 * NPY v1.0 files in a scratch directory, one CLI invocation per call,
 * JSON on stdout and machine-readable errors on stderr.
 *
 * Inputs are caller-provided typed-array views.  Views that do not
 * describe a dense C-order block are rejected synchronously, before any
 * marshalling; nothing is silently copied into a contiguous layout.
 */

import { execFile } from "node:child_process";
import { mkdtemp, readFile, rm, writeFile } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";

import {
  AlignkitClientError,
  CliFailureError,
  NonContiguousBufferError,
  errorFromCode,
} from "./errors";
import { decodeNpy, encodeNpy } from "./npy";

const execFileAsync = promisify(execFile);

/** A dense row-major matrix view over caller-owned storage. */
export interface BufferView {
  data: Float32Array | Float64Array;
  rows: number;
  cols: number;
  /** Elements between row starts; anything other than `cols` is rejected. */
  rowStride?: number;
}

export interface Matrix {
  data: Float64Array;
  rows: number;
  cols: number;
}

export interface ClientOptions {
  /** Command vector for the core CLI; default `["alignkit"]`, or $ALIGNKIT_CLI (space-split). */
  cli?: string[];
}

export interface AlignOptions extends ClientOptions {
  omega?: number;
  usePrior?: boolean;
  viterbiOnLinear?: boolean;
}

export interface AlignResult {
  durations: number[];
  viterbiScore: number;
  forwardSum: number;
  forwardSumPerFrame: number;
  klLoss: number;
  tSrc: number;
  tTrg: number;
}

export interface LossResult {
  forwardSum: number;
  forwardSumPerFrame: number;
  forwardSumGrad: Matrix;
  kl: number;
  klGrad: Matrix;
}

export function matrixView(
  data: Float32Array | Float64Array,
  rows: number,
  cols: number,
  rowStride?: number,
): BufferView {
  return rowStride === undefined ? { data, rows, cols } : { data, rows, cols, rowStride };
}

function checkView(view: BufferView, name: string): void {
  if (!Number.isInteger(view.rows) || !Number.isInteger(view.cols) || view.rows < 1 || view.cols < 1) {
    throw new NonContiguousBufferError(`${name}: rows/cols must be positive integers`);
  }
  const stride = view.rowStride ?? view.cols;
  if (stride !== view.cols) {
    throw new NonContiguousBufferError(
      `${name}: row stride ${stride} != cols ${view.cols}; dense C-order input required`,
    );
  }
  if (view.data.length !== view.rows * view.cols) {
    throw new NonContiguousBufferError(
      `${name}: buffer holds ${view.data.length} elements, view claims ${view.rows * view.cols}`,
    );
  }
}

function cliCommand(options?: ClientOptions): string[] {
  if (options?.cli && options.cli.length > 0) return options.cli;
  const env = process.env.ALIGNKIT_CLI;
  if (env && env.trim().length > 0) return env.trim().split(/\s+/);
  return ["alignkit"];
}

async function runCli(args: string[], options?: ClientOptions): Promise<Record<string, unknown>> {
  const [command, ...prefix] = cliCommand(options);
  try {
    const { stdout } = await execFileAsync(command, [...prefix, "--quiet", ...args], {
      maxBuffer: 1 << 28,
    });
    return JSON.parse(stdout) as Record<string, unknown>;
  } catch (err) {
    const failure = err as { code?: unknown; stderr?: string; message?: string };
    if (typeof failure.stderr === "string" && failure.stderr.length > 0) {
      const lastLine = failure.stderr.trim().split("\n").pop() ?? "";
      try {
        const parsed = JSON.parse(lastLine) as { error?: { code?: string; message?: string } };
        if (parsed.error?.code) {
          throw errorFromCode(parsed.error.code, parsed.error.message ?? parsed.error.code);
        }
      } catch (parseErr) {
        if (parseErr instanceof AlignkitClientError) throw parseErr;
      }
    }
    throw new CliFailureError(failure.message ?? "core CLI invocation failed");
  }
}

async function withScratchDir<T>(fn: (dir: string) => Promise<T>): Promise<T> {
  const dir = await mkdtemp(join(tmpdir(), "alignkit-client-"));
  try {
    return await fn(dir);
  } finally {
    await rm(dir, { recursive: true, force: true });
  }
}

async function writeView(path: string, view: BufferView): Promise<void> {
  await writeFile(path, encodeNpy(view.data, [view.rows, view.cols]));
}

async function readMatrix(path: string): Promise<Matrix> {
  const decoded = decodeNpy(await readFile(path));
  if (decoded.descr === "<i8") {
    throw new CliFailureError(`expected a float matrix at ${path}`);
  }
  const rows = decoded.shape[0];
  const cols = decoded.shape.length === 2 ? decoded.shape[1] : 1;
  return { data: Float64Array.from(decoded.data), rows, cols };
}

/**
 * Align a source/target feature pair and return integer durations plus
 * the diagnostics the core reports (terminal path score, both alignment
 * losses raw and per target frame).
 *
 * Invalid views throw synchronously; nothing is written or spawned.
 */
export function bindAasDurations(
  src: BufferView,
  trg: BufferView,
  options?: AlignOptions,
): Promise<AlignResult> {
  checkView(src, "src");
  checkView(trg, "trg");
  return withScratchDir(async (dir) => {
    const srcPath = join(dir, "src.npy");
    const trgPath = join(dir, "trg.npy");
    const outPath = join(dir, "durations.npy");
    await writeView(srcPath, src);
    await writeView(trgPath, trg);
    const args = ["align", "--src", srcPath, "--trg", trgPath, "--out", outPath];
    if (options?.omega !== undefined) args.push("--omega", String(options.omega));
    if (options?.usePrior === false) args.push("--no-prior");
    if (options?.viterbiOnLinear) args.push("--viterbi-on-linear");
    const reply = await runCli(args, options);

    const stored = decodeNpy(await readFile(outPath));
    if (stored.descr !== "<i8") {
      throw new CliFailureError("durations file is not an i64 NPY array");
    }
    return {
      durations: Array.from(stored.data, (v) => Number(v)),
      viterbiScore: reply.viterbi_score as number,
      forwardSum: reply.forward_sum as number,
      forwardSumPerFrame: reply.forward_sum_per_frame as number,
      klLoss: reply.kl_loss as number,
      tSrc: reply.t_src as number,
      tTrg: reply.t_trg as number,
    };
  });
}

/**
 * Evaluate the alignment losses and their gradients for a log-probability
 * matrix and a hard path (source index per target frame).
 *
 * Invalid views throw synchronously; nothing is written or spawned.
 */
export function bindLosses(
  logProbs: BufferView,
  path: ArrayLike<number>,
  options?: ClientOptions,
): Promise<LossResult> {
  checkView(logProbs, "logProbs");
  const indices = Array.from(path, (v) => {
    if (!Number.isInteger(v) || v < 0) {
      throw errorFromCode("invalid_path", `path indices must be non-negative integers, got ${v}`);
    }
    return BigInt(v);
  });
  return withScratchDir(async (dir) => {
    const lpPath = join(dir, "log_probs.npy");
    const pathPath = join(dir, "path.npy");
    const fwdGradPath = join(dir, "forward_grad.npy");
    const klGradPath = join(dir, "kl_grad.npy");
    await writeView(lpPath, logProbs);
    await writeFile(pathPath, encodeNpy(BigInt64Array.from(indices), [indices.length]));
    const reply = await runCli(
      [
        "loss",
        "--log-probs", lpPath,
        "--path", pathPath,
        "--out-forward-grad", fwdGradPath,
        "--out-kl-grad", klGradPath,
      ],
      options,
    );
    return {
      forwardSum: reply.forward_sum as number,
      forwardSumPerFrame: reply.forward_sum_per_frame as number,
      forwardSumGrad: await readMatrix(fwdGradPath),
      kl: reply.kl_loss as number,
      klGrad: await readMatrix(klGradPath),
    };
  });
}

/** Version string reported by the core package. */
export async function coreVersion(options?: ClientOptions): Promise<string> {
  const reply = await runCli(["version"], options);
  return reply.package_version as string;
}
