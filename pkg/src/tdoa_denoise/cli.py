"""Command-line front end.

Subcommands: denoise, robust-denoise, complete, robust-complete,
simulate, sweep, validate.  Exit codes: 0 success, 2 input-validation
failure, 3 non-recoverable mask, 4 non-convergence under --strict.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import matrix_io
from .completion import complete, recoverability, robust_complete
from .denoise import denoise_closed_form, denoise_element_form
from .errors import (
    ConvergenceError,
    InvalidMatrixError,
    MatrixFormatError,
    NonRecoverableMaskError,
    TdoaError,
    UndefinedMetricError,
)
from .matrices import is_consistent
from .robust import robust_denoise
from .scenes import CorruptionSpec, random_scene, simulate_trial
from .sweep import SweepConfig, run_sweep

EXIT_OK = 0
EXIT_INVALID_INPUT = 2
EXIT_NON_RECOVERABLE = 3
EXIT_NON_CONVERGENCE = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tdoa-denoise",
        description="TDOA matrix denoising, robust outlier separation, completion, and sweeps",
    )
    parser.add_argument("--seed", type=int, default=0, help="base RNG seed (simulate/sweep)")
    parser.add_argument("--jobs", type=int, default=1, help="parallel workers for sweeps")
    parser.add_argument("--format", choices=("json", "csv"), default=None, help="output format override")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_matrix_in(p):
        p.add_argument("--in", dest="in_path", required=True, help="input matrix (.json or .csv)")
        p.add_argument("--symmetrize", action="store_true", help="average away input asymmetry")

    p = sub.add_parser("denoise", help="project a noisy matrix onto the consistent set")
    add_matrix_in(p)
    p.add_argument("--out", required=True)
    p.add_argument("--method", choices=("closed", "element"), default="closed")

    p = sub.add_parser("robust-denoise", help="separate consistent part from sparse outliers")
    add_matrix_in(p)
    p.add_argument("--k", type=int, required=True, help="outlier pair budget")
    p.add_argument("--eps", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--stop", choices=("change", "level"), default="change")
    p.add_argument("--strict", action="store_true", help="exit 4 on non-convergence")
    p.add_argument("--out", required=True)
    p.add_argument("--outliers-out", default=None, help="write detected outliers (sparse JSON)")

    p = sub.add_parser("complete", help="fill in missing entries under a known mask")
    add_matrix_in(p)
    p.add_argument("--mask", required=True, help="mask JSON with missing pairs")
    p.add_argument("--out", required=True)
    p.add_argument("--pseudo", action="store_true", help="allow non-unique minimum-norm completion")

    p = sub.add_parser("robust-complete", help="joint outlier separation and completion")
    add_matrix_in(p)
    p.add_argument("--mask", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--stop", choices=("change", "level"), default="change")
    p.add_argument("--strict", action="store_true")
    p.add_argument("--pseudo", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--outliers-out", default=None)

    p = sub.add_parser("simulate", help="generate one corrupted trial bundle")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--noise-sigma", type=float, default=0.0, help="seconds")
    p.add_argument("--outliers", type=int, default=0)
    p.add_argument("--outlier-sigma", type=float, default=1e-4, help="seconds")
    p.add_argument("--missing-fraction", type=float, default=0.0)
    p.add_argument("--sensor-cube-side", type=float, default=1.0, help="meters")
    p.add_argument("--source-cube-side", type=float, default=2.0, help="meters")
    p.add_argument("--out", required=True, help="trial bundle JSON")

    p = sub.add_parser("sweep", help="run a Monte-Carlo benchmark grid")
    p.add_argument("--config", required=True, help="sweep config (.json or .toml)")
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("validate", help="parse, validate and optionally re-serialize a matrix")
    add_matrix_in(p)
    p.add_argument("--out", default=None, help="re-serialize here (round trip)")
    return parser


def _write_result(matrix, out_path: str, fmt: str | None) -> None:
    matrix_io.write_matrix(matrix, out_path, fmt=fmt)


def _run(args) -> int:
    if args.command == "denoise":
        m = matrix_io.read_matrix(args.in_path, symmetrize=args.symmetrize)
        method = denoise_element_form if args.method == "element" else denoise_closed_form
        _write_result(method(m), args.out, args.format)
        return EXIT_OK

    if args.command == "robust-denoise":
        m = matrix_io.read_matrix(args.in_path, symmetrize=args.symmetrize)
        result = robust_denoise(m, k=args.k, eps=args.eps, max_iter=args.max_iter, stop=args.stop)
        if args.strict and not result.converged:
            raise ConvergenceError(
                f"no convergence in {result.iterations} iterations "
                f"(final objective {result.objective_trace[-1]:.3e})"
            )
        _write_result(result.m_star, args.out, args.format)
        if args.outliers_out:
            matrix_io.write_outliers(result.s_star, args.outliers_out)
        if not result.converged:
            print(f"warning: not converged after {result.iterations} iterations", file=sys.stderr)
        return EXIT_OK

    if args.command == "complete":
        m = matrix_io.read_matrix(args.in_path, symmetrize=args.symmetrize)
        mask = matrix_io.read_mask(args.mask)
        if args.pseudo and not recoverability(mask):
            print("warning: mask not uniquely recoverable; returning one minimum-norm completion",
                  file=sys.stderr)
        _write_result(complete(m, mask, pseudo=args.pseudo), args.out, args.format)
        return EXIT_OK

    if args.command == "robust-complete":
        m = matrix_io.read_matrix(args.in_path, symmetrize=args.symmetrize)
        mask = matrix_io.read_mask(args.mask)
        if args.pseudo and not recoverability(mask):
            print("warning: mask not uniquely recoverable; returning one minimum-norm completion",
                  file=sys.stderr)
        result = robust_complete(
            m, mask, k=args.k, eps=args.eps, max_iter=args.max_iter, stop=args.stop,
            pseudo=args.pseudo,
        )
        if args.strict and not result.converged:
            raise ConvergenceError(
                f"no convergence in {result.iterations} iterations "
                f"(final objective {result.objective_trace[-1]:.3e})"
            )
        _write_result(result.m_star, args.out, args.format)
        if args.outliers_out:
            matrix_io.write_outliers(result.s_star, args.outliers_out)
        if not result.converged:
            print(f"warning: not converged after {result.iterations} iterations", file=sys.stderr)
        return EXIT_OK

    if args.command == "simulate":
        scene = random_scene(
            args.n,
            sensor_cube_side=args.sensor_cube_side,
            source_cube_side=args.source_cube_side,
            seed=args.seed,
        )
        spec = CorruptionSpec(
            noise_sigma=args.noise_sigma,
            outlier_count=args.outliers,
            outlier_sigma=args.outlier_sigma,
            missing_fraction=args.missing_fraction,
            rng_seed=args.seed,
        )
        trial = simulate_trial(scene, spec)
        Path(args.out).write_text(json.dumps(matrix_io.trial_to_dict(trial, args.seed)) + "\n")
        print(f"wrote trial bundle to {args.out} "
              f"(n={args.n}, outliers={len(trial.injected_outlier_pairs)}, "
              f"missing={len(trial.mask.missing_pairs)})")
        return EXIT_OK

    if args.command == "sweep":
        config = SweepConfig.from_file(args.config)
        result = run_sweep(config, args.out_dir, jobs=args.jobs)
        print(f"wrote {result.rows} rows over {result.cells} cells to {args.out_dir} "
              f"(snr failures: {result.snr_failures}, localization failures: {result.loc_failures})")
        return EXIT_OK

    if args.command == "validate":
        m = matrix_io.read_matrix(args.in_path, symmetrize=args.symmetrize)
        report = is_consistent(m)
        print(f"n={m.shape[0]} skew-symmetric=ok consistent={report.consistent} "
              f"residual={report.residual:.6e} threshold={report.threshold:.6e}")
        if args.out:
            _write_result(m, args.out, args.format)
        return EXIT_OK

    raise AssertionError(f"unhandled command {args.command!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except NonRecoverableMaskError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NON_RECOVERABLE
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NON_CONVERGENCE
    except (MatrixFormatError, InvalidMatrixError, UndefinedMetricError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except TdoaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT


if __name__ == "__main__":
    sys.exit(main())
