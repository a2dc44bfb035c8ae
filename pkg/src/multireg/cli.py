"""Command-line interface.

Subcommands: ``register`` (one correspondence file -> result file),
``synth`` (write synthetic scenes + ground truth), ``eval`` (score
result files against truth files), ``bench`` (generate/register/score
sweeps) and ``serve`` (run the HTTP service). Exit codes: 0 success,
1 internal error, 2 malformed input or invalid parameters, 3 too few
correspondences.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from .extraction import ExtractionConfig
from .fileio import (
    MalformedFileError,
    config_to_dict,
    read_correspondences,
    read_result,
    read_truth,
    write_correspondences,
    write_result,
    write_truth,
)
from .metrics import HitCriteria, score_dataset, score_sample
from .pipeline import InsufficientInput, PipelineConfig, register
from .refinement import RefinementConfig
from .synthetic import SceneSpec, SeparationInfeasible, generate_scene

__all__ = ["main"]

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_BAD_INPUT = 2
EXIT_TOO_FEW = 3

DEFAULT_BANDS = "10-50,50-70,70-90,90-99"


class _CliError(Exception):
    """Command failure with a specific exit code."""

    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _pipeline_config(args, rng_seed: int | None = None) -> PipelineConfig:
    return PipelineConfig(
        min_dist_thresh=args.min_dist_thresh,
        refinement=RefinementConfig(
            inlier_thresh=args.inlier_thresh,
            max_iterations=args.max_iters,
        ),
        extraction=ExtractionConfig(gamma_thresh=args.gamma_thresh),
        downsample_size=args.downsample,
        rng_seed=args.seed if rng_seed is None else rng_seed,
    )


def _add_pipeline_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="RNG seed")
    parser.add_argument("--min-dist-thresh", type=float, default=0.2,
                        help="group-distance merge threshold")
    parser.add_argument("--inlier-thresh", type=float, default=0.3,
                        help="squared alignment error bound for inliers")
    parser.add_argument("--gamma-thresh", type=float, default=0.5,
                        help="inlier-count drop-off cutoff")
    parser.add_argument("--downsample", type=int, default=1024,
                        help="working-set size")
    parser.add_argument("--max-iters", type=int, default=10,
                        help="refinement iteration cap")


def _add_scene_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--points", type=int, default=256,
                        help="points per instance")
    parser.add_argument("--noise", type=float, default=0.01,
                        help="per-coordinate Gaussian noise sigma")
    parser.add_argument("--workspace", type=float, default=5.0,
                        help="half-width of the translation box")
    parser.add_argument("--separation", type=float, default=1.5,
                        help="minimum distance between instance centers")


def _cmd_register(args) -> int:
    cfg = _pipeline_config(args)
    correspondences, _ = read_correspondences(args.input)

    if args.server:
        if args.dump_matrix:
            raise _CliError(EXIT_BAD_INPUT, "--dump-matrix is unavailable in server mode")
        from .service.client import register_remote, write_remote_result

        response = register_remote(args.server, correspondences, cfg)
        write_remote_result(args.output, response, cfg, include_timings=not args.no_timings)
        if not args.no_timings:
            _print_timings(response.get("timings_ms", {}))
        return EXIT_OK

    result = register(correspondences, cfg, keep_matrix=args.dump_matrix is not None)
    write_result(args.output, result, cfg, include_timings=not args.no_timings)
    if args.dump_matrix:
        np.savetxt(args.dump_matrix, result.matrix, fmt="%.9g", delimiter=",")
    if not args.no_timings:
        _print_timings({k: v * 1000.0 for k, v in result.timings.items()})
    return EXIT_OK


def _print_timings(timings_ms: dict) -> None:
    parts = " ".join(f"{stage}={ms:.2f}ms" for stage, ms in timings_ms.items())
    print(f"timings: {parts}")


def _scene_name(index: int, count: int) -> str:
    width = max(3, len(str(max(count - 1, 0))))
    return f"scene_{index:0{width}d}"


def _cmd_synth(args) -> int:
    if not 0.0 <= args.outlier_lo <= args.outlier_hi < 1.0:
        raise _CliError(EXIT_BAD_INPUT,
                        f"invalid outlier range [{args.outlier_lo}, {args.outlier_hi}]")
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        ratio = _band_ratio(args.outlier_lo, args.outlier_hi, args.seed + i)
        spec = SceneSpec(
            num_points_per_instance=args.points,
            num_instances=args.instances,
            outlier_ratio=ratio,
            noise_sigma=args.noise,
            workspace_extent=args.workspace,
            min_instance_separation=args.separation,
            seed=args.seed + i,
        )
        correspondences, truth = generate_scene(spec)
        name = _scene_name(i, args.count)
        write_correspondences(outdir / f"{name}.corr", correspondences, labels=truth.labels)
        write_truth(outdir / f"{name}.truth", truth.transforms)
    print(f"wrote {args.count} scenes to {outdir}")
    return EXIT_OK


def _band_ratio(lo: float, hi: float, seed: int) -> float:
    if lo == hi:
        return lo
    # Separate stream from the scene's own seed so the ratio draw does
    # not shift the scene geometry.
    return float(np.random.default_rng([seed, 1]).uniform(lo, hi))


def _paired_files(results_dir: Path, truth_dir: Path) -> list[tuple[Path, Path]]:
    results = {p.stem: p for p in sorted(results_dir.glob("*.json"))}
    truths = {p.stem: p for p in sorted(truth_dir.glob("*.truth"))}
    for stem in results:
        if stem not in truths:
            raise _CliError(EXIT_BAD_INPUT, f"no truth file for result '{stem}'")
    for stem in truths:
        if stem not in results:
            raise _CliError(EXIT_BAD_INPUT, f"no result file for truth '{stem}'")
    if not results:
        raise _CliError(EXIT_BAD_INPUT, f"no result files in {results_dir}")
    return [(results[stem], truths[stem]) for stem in sorted(results)]


def _cmd_eval(args) -> int:
    crit = HitCriteria(
        max_rotation_error=math.radians(args.rot_thresh_deg),
        max_translation_error=args.trans_thresh,
    )
    pairs = _paired_files(Path(args.results_dir), Path(args.truth_dir))
    samples = []
    rows = []
    runtimes = []
    for result_path, truth_path in pairs:
        loaded = read_result(result_path)
        truth = read_truth(truth_path)
        sample = score_sample(loaded.transforms, truth, crit)
        samples.append(sample)
        if loaded.timings_ms is not None:
            runtimes.append(sum(loaded.timings_ms.values()))
        rows.append((result_path.stem, sample))

    score = score_dataset(samples)
    print(f"MHR {score.mhr * 100:.2f} MHP {score.mhp * 100:.2f} MHF1 {score.mhf1 * 100:.2f}")
    mean_ms = f"{np.mean(runtimes):.2f}" if len(runtimes) == len(samples) else "-"
    print(f"mean time per sample (ms): {mean_ms}")

    if args.per_sample:
        lines = ["sample\thits\tnum_gt\tnum_pred\trecall\tprecision\tf1"]
        lines += [
            f"{name}\t{s.hits}\t{s.num_gt}\t{s.num_pred}"
            f"\t{s.recall:.4f}\t{s.precision:.4f}\t{s.f1:.4f}"
            for name, s in rows
        ]
        Path(args.per_sample).write_text("\n".join(lines) + "\n")
    return EXIT_OK


def _parse_bands(text: str) -> list[tuple[float, float]]:
    bands = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        try:
            lo_str, hi_str = chunk.split("-")
            lo, hi = float(lo_str) / 100.0, float(hi_str) / 100.0
        except ValueError:
            raise _CliError(EXIT_BAD_INPUT, f"bad band '{chunk}' (expected e.g. '50-70')")
        if not 0.0 <= lo <= hi < 1.0:
            raise _CliError(EXIT_BAD_INPUT, f"band '{chunk}' out of range")
        bands.append((lo, hi))
    if not bands:
        raise _CliError(EXIT_BAD_INPUT, "no outlier bands given")
    return bands


def _parse_instances(text: str) -> list[int]:
    text = text.strip()
    if ".." in text:
        lo_str, hi_str = text.split("..")
        lo, hi = int(lo_str), int(hi_str)
        if lo < 1 or hi < lo:
            raise _CliError(EXIT_BAD_INPUT, f"bad instance range '{text}'")
        return list(range(lo, hi + 1))
    value = int(text)
    if value < 1:
        raise _CliError(EXIT_BAD_INPUT, "instance count must be at least 1")
    return [value]


def _cmd_bench(args) -> int:
    if args.outlier is not None:
        if not 0.0 <= args.outlier < 1.0:
            raise _CliError(EXIT_BAD_INPUT, f"bad outlier ratio {args.outlier}")
        bands = [(args.outlier, args.outlier)]
    else:
        bands = _parse_bands(args.bands)
    instance_counts = _parse_instances(args.instances)
    crit = HitCriteria(
        max_rotation_error=math.radians(args.rot_thresh_deg),
        max_translation_error=args.trans_thresh,
    )

    lines = ["band_lo_pct\tband_hi_pct\tinstances\tscenes\tMHR_pct\tMHP_pct\tMHF1_pct\tmean_time_s"]
    for lo, hi in bands:
        for num_instances in instance_counts:
            samples = []
            elapsed = []
            for i in range(args.count):
                scene_seed = args.seed + i
                spec = SceneSpec(
                    num_points_per_instance=args.points,
                    num_instances=num_instances,
                    outlier_ratio=_band_ratio(lo, hi, scene_seed),
                    noise_sigma=args.noise,
                    workspace_extent=args.workspace,
                    min_instance_separation=args.separation,
                    seed=scene_seed,
                )
                correspondences, truth = generate_scene(spec)
                cfg = _pipeline_config(args, rng_seed=scene_seed)
                start = time.perf_counter()
                result = register(correspondences, cfg)
                elapsed.append(time.perf_counter() - start)
                samples.append(score_sample(result.instances, truth, crit))
            score = score_dataset(samples)
            mean_time = "-" if args.no_timings else f"{np.mean(elapsed):.4f}"
            lines.append(
                f"{lo * 100:g}\t{hi * 100:g}\t{num_instances}\t{args.count}"
                f"\t{score.mhr * 100:.2f}\t{score.mhp * 100:.2f}\t{score.mhf1 * 100:.2f}"
                f"\t{mean_time}"
            )
    table = "\n".join(lines) + "\n"
    sys.stdout.write(table)
    if args.out:
        Path(args.out).write_text(table)
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multireg",
        description="Multi-instance rigid point-cloud registration",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_reg = sub.add_parser("register", help="register one correspondence file")
    p_reg.add_argument("input", help="correspondence file (6 or 7 columns)")
    p_reg.add_argument("-o", "--output", required=True, help="result file to write")
    _add_pipeline_flags(p_reg)
    p_reg.add_argument("--dump-matrix", metavar="PATH",
                       help="write the working-set compatibility matrix as CSV")
    p_reg.add_argument("--no-timings", action="store_true",
                       help="omit timings from the result file and stdout")
    p_reg.add_argument("--server", metavar="URL",
                       help="delegate the registration to a running service")
    p_reg.set_defaults(func=_cmd_register)

    p_synth = sub.add_parser("synth", help="generate synthetic scenes")
    p_synth.add_argument("outdir", help="output directory")
    p_synth.add_argument("--count", type=int, default=1, help="number of scenes")
    p_synth.add_argument("--instances", type=int, default=1, help="instances per scene")
    p_synth.add_argument("--outlier-lo", type=float, default=0.0,
                         help="lower bound of the outlier-ratio band")
    p_synth.add_argument("--outlier-hi", type=float, default=0.0,
                         help="upper bound of the outlier-ratio band")
    p_synth.add_argument("--seed", type=int, default=0, help="base seed")
    _add_scene_flags(p_synth)
    p_synth.set_defaults(func=_cmd_synth)

    p_eval = sub.add_parser("eval", help="score result files against truth files")
    p_eval.add_argument("results_dir", help="directory of result .json files")
    p_eval.add_argument("truth_dir", help="directory of .truth files")
    p_eval.add_argument("--rot-thresh-deg", type=float, default=15.0,
                        help="max rotation error of a hit (degrees)")
    p_eval.add_argument("--trans-thresh", type=float, default=0.1,
                        help="max translation error of a hit")
    p_eval.add_argument("--per-sample", metavar="PATH",
                        help="also write a per-sample score table")
    p_eval.set_defaults(func=_cmd_eval)

    p_bench = sub.add_parser("bench", help="sweep generate -> register -> score")
    p_bench.add_argument("--bands", default=DEFAULT_BANDS,
                         help="outlier-ratio bands in percent, e.g. '10-50,50-70'")
    p_bench.add_argument("--outlier", type=float, default=None,
                         help="fixed outlier ratio in [0,1) (overrides --bands)")
    p_bench.add_argument("--instances", default="20",
                         help="instance counts: a single value or a range 'a..b'")
    p_bench.add_argument("--count", type=int, default=100, help="scenes per cell")
    p_bench.add_argument("--rot-thresh-deg", type=float, default=15.0,
                         help="max rotation error of a hit (degrees)")
    p_bench.add_argument("--trans-thresh", type=float, default=0.1,
                         help="max translation error of a hit")
    p_bench.add_argument("--no-timings", action="store_true",
                         help="print '-' in the time column (diffable output)")
    p_bench.add_argument("--out", metavar="PATH", help="also write the table here")
    _add_pipeline_flags(p_bench)
    _add_scene_flags(p_bench)
    p_bench.set_defaults(func=_cmd_bench)

    p_serve = sub.add_parser("serve", help="run the registration HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except MalformedFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (FileNotFoundError, NotADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except InsufficientInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOO_FEW
    except SeparationInfeasible as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
