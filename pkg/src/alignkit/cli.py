"""Command-line front end.

Every command prints exactly one JSON object to stdout; human-readable
logs go to stderr.  Exit codes: 0 success, 2 I/O or file-format error,
3 no feasible alignment path, 4 dimension/length mismatch, 1 any other
validation error or a failed selftest.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .align import MonotonicPath, aas_durations, beta_binomial_prior, distance_matrix
from .config import AASConfig, ReductionConfig
from .errors import (
    AlignkitError,
    DimensionMismatch,
    FortranOrderUnsupported,
    InvalidParameter,
    IoFailure,
    LengthMismatch,
    MalformedHeader,
    NoFeasiblePath,
    UnsupportedDtype,
    UnsupportedRank,
)
from .losses import forward_sum, kl_hard_soft
from .metrics import DEFAULT_FRAME_SHIFT_S, ddur, dtw, dvar, f0corr, mcd, pair_by_warp
from .npyio import read_matrix, write_heatmap, write_matrix
from .regulate import expand, reduce_stack
from .selftest import run_selftest

_IO_ERRORS = (
    IoFailure,
    MalformedHeader,
    UnsupportedDtype,
    UnsupportedRank,
    FortranOrderUnsupported,
)
_SHAPE_ERRORS = (DimensionMismatch, LengthMismatch)


def _exit_code(exc: AlignkitError) -> int:
    if isinstance(exc, _IO_ERRORS):
        return 2
    if isinstance(exc, NoFeasiblePath):
        return 3
    if isinstance(exc, _SHAPE_ERRORS):
        return 4
    return 1


def _emit(obj: dict) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")


def _log(args, message: str) -> None:
    if not args.quiet:
        print(message, file=sys.stderr)


def _load_config(args) -> AASConfig:
    cfg = AASConfig.from_json_file(args.config) if args.config else AASConfig()
    overrides = {}
    for name in ("omega", "k", "pad_policy"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "no_prior", False):
        overrides["use_prior"] = False
    if getattr(args, "viterbi_on_linear", False):
        overrides["viterbi_on_linear"] = True
    return replace(cfg, **overrides) if overrides else cfg


def _load_2d(path, name: str) -> np.ndarray:
    loaded = read_matrix(path)
    if loaded.data.ndim != 2:
        raise DimensionMismatch(f"{name} must be a 2-D matrix, got 1-D from {path}")
    return np.asarray(loaded.data, dtype=np.float64)


def _load_1d(path, name: str) -> np.ndarray:
    loaded = read_matrix(path)
    if loaded.data.ndim != 1:
        raise DimensionMismatch(f"{name} must be a 1-D vector, got 2-D from {path}")
    return loaded.data


def _cmd_align(args) -> int:
    cfg = _load_config(args)
    src = _load_2d(args.src, "src")
    trg = _load_2d(args.trg, "trg")
    if args.reduce is not None:
        src = reduce_stack(src, ReductionConfig(k=args.reduce, pad_policy=cfg.pad_policy))
    durations, diag = aas_durations(src, trg, cfg)
    write_matrix(args.out, durations, "i64")
    if args.heatmap:
        write_heatmap(args.heatmap, diag.log_alignment.data, "log")
    t_trg = diag.log_alignment.t_trg
    _emit(
        {
            "version": 1,
            "t_src": diag.log_alignment.t_src,
            "t_trg": t_trg,
            "durations": [int(d) for d in durations],
            "viterbi_score": diag.viterbi_score,
            "forward_sum": diag.forward_sum.value,
            "forward_sum_per_frame": diag.forward_sum.value / t_trg,
            "kl_loss": diag.kl.value,
            "prior_applied": diag.log_alignment.prior_applied,
        }
    )
    _log(args, f"wrote durations for {len(durations)} source frames to {args.out}")
    return 0


def _cmd_expand(args) -> int:
    seq = _load_2d(args.input, "input")
    durations = _load_1d(args.durations, "durations")
    out = expand(seq, durations)
    write_matrix(args.out, out, args.dtype)
    _emit({"version": 1, "rows": out.shape[0], "cols": out.shape[1]})
    return 0


def _cmd_reduce(args) -> int:
    cfg = _load_config(args)
    seq = _load_2d(args.input, "input")
    out = reduce_stack(seq, ReductionConfig(k=cfg.k, pad_policy=cfg.pad_policy))
    write_matrix(args.out, out, args.dtype)
    _emit({"version": 1, "rows": out.shape[0], "cols": out.shape[1], "k": cfg.k})
    return 0


def _cmd_prior(args) -> int:
    cfg = _load_config(args)
    prior = beta_binomial_prior(args.t_src, args.t_trg, cfg.omega)
    write_matrix(args.out, prior, "f64")
    if args.heatmap:
        write_heatmap(args.heatmap, prior, "minmax")
    _emit(
        {
            "version": 1,
            "t_src": args.t_src,
            "t_trg": args.t_trg,
            "omega": cfg.omega,
        }
    )
    return 0


def _cmd_loss(args) -> int:
    lp = _load_2d(args.log_probs, "log-probs")
    indices = _load_1d(args.path, "path")
    if np.any(indices != np.floor(indices)):
        raise InvalidParameter("path indices must be integers")
    path = MonotonicPath(indices.astype(np.int64), lp.shape[0])
    fwd = forward_sum(lp)
    kl = kl_hard_soft(lp, path)
    if args.out_forward_grad:
        write_matrix(args.out_forward_grad, fwd.gradient, "f64")
    if args.out_kl_grad:
        write_matrix(args.out_kl_grad, kl.gradient, "f64")
    _emit(
        {
            "version": 1,
            "t_src": lp.shape[0],
            "t_trg": lp.shape[1],
            "forward_sum": fwd.value,
            "forward_sum_per_frame": fwd.value / lp.shape[1],
            "kl_loss": kl.value,
        }
    )
    return 0


def _metrics_one_pair(entry: dict, base_dir, frame_shift: float, exclude_c0: bool) -> dict:
    def resolve(key):
        value = entry.get(key)
        return None if value is None else str(base_dir / value)

    result: dict = {}
    mcc_x = resolve("mcc_x")
    mcc_y = resolve("mcc_y")
    f0_x = resolve("f0_x")
    f0_y = resolve("f0_y")
    pred = resolve("pred_dur")

    warp = None
    if mcc_x and mcc_y:
        x = _load_2d(mcc_x, "mcc_x")
        y = _load_2d(mcc_y, "mcc_y")
        result["mcd_db"] = mcd(x, y, exclude_c0=exclude_c0)
        result["ddur_s"] = ddur(x.shape[0], y.shape[0], frame_shift)
        xi = x[:, 1:] if exclude_c0 else x
        yi = y[:, 1:] if exclude_c0 else y
        warp = dtw(distance_matrix(xi, yi))
        frames = (x.shape[0], y.shape[0])
    else:
        frames = None

    if f0_x and f0_y:
        cx = _load_1d(f0_x, "f0_x")
        cy = _load_1d(f0_y, "f0_y")
        if cx.shape[0] == cy.shape[0]:
            result["f0corr"] = f0corr(cx, cy)
        elif warp is not None:
            px, py = pair_by_warp(cx, cy, warp)
            result["f0corr"] = f0corr(px, py)
        else:
            raise LengthMismatch(
                "f0 contours differ in length and no mel-cepstra are "
                "available for DTW pairing"
            )
        if frames is None:
            result["ddur_s"] = ddur(cx.shape[0], cy.shape[0], frame_shift)

    if pred:
        values = read_matrix(pred).data.astype(np.float64).ravel()
        result["dvar"] = dvar(values)
        result["pred_dur_values"] = values
    return result


def _cmd_metrics(args) -> int:
    try:
        with open(args.manifest, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        raise IoFailure(f"cannot read manifest {args.manifest}: {exc}") from exc

    base_dir = Path(args.manifest).resolve().parent
    results = []
    errors = []
    pooled: list[np.ndarray] = []
    for index, line in enumerate(lines):
        try:
            entry = json.loads(line)
            if not isinstance(entry, dict):
                raise InvalidParameter("manifest lines must be JSON objects")
            pair = _metrics_one_pair(entry, base_dir, args.frame_shift, not args.include_c0)
            pooled_values = pair.pop("pred_dur_values", None)
            if pooled_values is not None:
                pooled.append(pooled_values)
            results.append({"index": index, **pair})
        except (AlignkitError, json.JSONDecodeError) as exc:
            code = exc.code if isinstance(exc, AlignkitError) else "malformed_manifest"
            errors.append({"index": index, "code": code, "message": str(exc)})

    aggregate: dict = {"pairs": len(results), "frame_shift_s": args.frame_shift}
    for key in ("mcd_db", "f0corr", "ddur_s"):
        values = [r[key] for r in results if key in r]
        if values:
            aggregate[key] = float(np.mean(values))
    if pooled:
        aggregate["dvar"] = dvar(np.concatenate(pooled))
    _emit({"version": 1, "results": results, "aggregate": aggregate, "errors": errors})
    if lines and not results:
        _log(args, "all pairs failed")
        return 1
    return 0


def _cmd_selftest(args) -> int:
    report = run_selftest(
        trials=args.trials,
        max_t_src=args.max_t_src,
        dim=args.dim,
        sigma=args.sigma,
        seed=args.seed,
    )
    _emit(report)
    return 0 if report["passed"] else 1


def _cmd_version(args) -> int:
    _emit({"version": 1, "name": "alignkit", "package_version": __version__})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alignkit",
        description="Alignment search, alignment losses, length regulation, "
        "and objective metrics for paired feature sequences.",
    )
    parser.add_argument("--config", help="JSON file mirroring AASConfig fields")
    parser.add_argument("--seed", type=int, default=1234, help="seed for randomized commands")
    parser.add_argument("--quiet", action="store_true", help="suppress stderr logs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("align", help="derive durations aligning src to trg")
    p.add_argument("--src", required=True)
    p.add_argument("--trg", required=True)
    p.add_argument("--out", required=True, help="output durations (i64 NPY)")
    p.add_argument("--heatmap", help="optional PGM of the soft alignment")
    p.add_argument("--reduce", type=int, help="stack this many src frames first")
    p.add_argument("--omega", type=float, help="prior sharpness override")
    p.add_argument("--no-prior", action="store_true", help="disable the diagonal prior")
    p.add_argument(
        "--viterbi-on-linear",
        action="store_true",
        help="run the path search on exponentiated scores",
    )
    p.set_defaults(func=_cmd_align)

    p = sub.add_parser("expand", help="repeat frames according to durations")
    p.add_argument("--input", required=True)
    p.add_argument("--durations", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dtype", default="f64", choices=("f32", "f64"))
    p.set_defaults(func=_cmd_expand)

    p = sub.add_parser("reduce", help="stack k adjacent frames")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("-k", type=int, dest="k", help="reduction factor override")
    p.add_argument("--pad-policy", dest="pad_policy", choices=("pad_repeat_last", "truncate"))
    p.add_argument("--dtype", default="f64", choices=("f32", "f64"))
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("prior", help="write a beta-binomial prior matrix")
    p.add_argument("--t-src", type=int, required=True)
    p.add_argument("--t-trg", type=int, required=True)
    p.add_argument("--omega", type=float, help="prior sharpness override")
    p.add_argument("--out", required=True)
    p.add_argument("--heatmap")
    p.set_defaults(func=_cmd_prior)

    p = sub.add_parser("loss", help="alignment losses for given log-probs and path")
    p.add_argument("--log-probs", required=True)
    p.add_argument("--path", required=True, help="i64 NPY: source index per target frame")
    p.add_argument("--out-forward-grad", help="write forward-sum gradient (f64 NPY)")
    p.add_argument("--out-kl-grad", help="write KL gradient (f64 NPY)")
    p.set_defaults(func=_cmd_loss)

    p = sub.add_parser("metrics", help="evaluate utterance pairs from a JSONL manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--frame-shift", type=float, default=DEFAULT_FRAME_SHIFT_S)
    p.add_argument("--include-c0", action="store_true", help="keep coefficient 0 in MCD")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("selftest", help="seeded recovery and oracle suites")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--max-t-src", type=int, default=30)
    p.add_argument("--dim", type=int, default=8)
    p.add_argument("--sigma", type=float, default=0.01)
    p.set_defaults(func=_cmd_selftest)

    p = sub.add_parser("version", help="print package version")
    p.set_defaults(func=_cmd_version)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AlignkitError as exc:
        payload = {"error": {"code": exc.code, "message": str(exc)}}
        print(json.dumps(payload, sort_keys=True, separators=(",", ":")), file=sys.stderr)
        return _exit_code(exc)
    except OSError as exc:
        payload = {"error": {"code": "io_error", "message": str(exc)}}
        print(json.dumps(payload, sort_keys=True, separators=(",", ":")), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
