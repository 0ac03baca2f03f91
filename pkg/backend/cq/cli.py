"""
Командная строка cq.

    cq quantize --space luv --k 16 IN OUT
    cq evaluate REF DIST
    cq characterize IN
    cq batch --spaces rgb xyz luv --ks 8 16 32 64 --out DIR IMAGES...

Коды выхода: 0 успех, 1 ошибка обработки, 2 ошибка аргументов.
"""

import argparse
import asyncio
import logging
import sys
from typing import List, Optional

from config import settings

from .colorspace import ScalingMode, Space
from .errors import QuantizationError
from .image import decode, encode
from .imagestats import characterize_image
from .metrics import VIF_MODES, mse, psnr_from_mse, vif
from .pipeline import image_id, profile_frame, quantize_image, run_experiment, summarize
from .quantizer import KMeansConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return number


def _seed(value: str) -> int:
    number = int(value)
    if not 0 <= number < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return number


def _add_kmeans_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=_seed, default=settings.default_seed, help="RNG seed")
    parser.add_argument("--restarts", type=_positive_int, default=settings.restarts,
                        help="k-means++ restarts (default: 10 for k<=64, 3 above)")
    parser.add_argument("--max-iterations", type=_positive_int, default=settings.max_iterations)
    parser.add_argument("--scaling", choices=[m.value for m in ScalingMode], default=settings.scaling,
                        help="component scaling to [0,1]")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cq", description="k-means color quantization in RGB, XYZ and LUV")
    parser.add_argument("--log-level", default=settings.log_level, help="logging level")
    sub = parser.add_subparsers(dest="command", required=True)

    quantize = sub.add_parser("quantize", help="quantize one image")
    quantize.add_argument("--space", required=True, choices=[s.value for s in Space])
    quantize.add_argument("--k", required=True, type=_positive_int)
    _add_kmeans_options(quantize)
    quantize.add_argument("input")
    quantize.add_argument("output")

    evaluate = sub.add_parser("evaluate", help="print VIF, PSNR and MSE for an image pair")
    evaluate.add_argument("reference")
    evaluate.add_argument("distorted")
    evaluate.add_argument("--vif-mode", choices=VIF_MODES, default=settings.vif_mode)

    characterize = sub.add_parser("characterize", help="print the hue/chroma/luminance profile as CSV")
    characterize.add_argument("input")
    characterize.add_argument("--exclude-achromatic", action="store_true", default=settings.exclude_achromatic)

    batch = sub.add_parser("batch", help="run the full (image, space, k) experiment")
    batch.add_argument("--spaces", nargs="+", choices=[s.value for s in Space], default=["rgb", "xyz", "luv"])
    batch.add_argument("--ks", nargs="+", type=_positive_int, default=[8, 16, 32, 64])
    batch.add_argument("--out", default=settings.output_dir, help="output directory")
    batch.add_argument("--threads", type=_positive_int, default=settings.threads)
    batch.add_argument("--vif-mode", choices=VIF_MODES, default=settings.vif_mode)
    batch.add_argument("--exclude-achromatic", action="store_true", default=settings.exclude_achromatic)
    batch.add_argument("--no-timing", action="store_true", help="write ms=0 so reruns are byte-identical")
    batch.add_argument("--db", action="store_true", help="also store the run in the results database")
    _add_kmeans_options(batch)
    batch.add_argument("images", nargs="+")
    return parser


def _cmd_quantize(args: argparse.Namespace) -> int:
    img = decode(args.input)
    cfg = KMeansConfig(k=args.k, max_iterations=args.max_iterations, restarts=args.restarts, seed=args.seed)
    result = quantize_image(img, args.space, cfg, args.scaling)
    encode(result.image, args.output)
    print(
        f"space={args.space} k={args.k} seed={args.seed} wcss={result.wcss!r} "
        f"iterations={result.iterations} clamped={result.clamped}"
    )
    return EXIT_OK


def _cmd_evaluate(args: argparse.Namespace) -> int:
    reference = decode(args.reference)
    distorted = decode(args.distorted)
    error = mse(reference, distorted)
    value = vif(reference, distorted, args.vif_mode)
    print(f"vif={value!r} psnr={psnr_from_mse(error)!r} mse={error!r}")
    return EXIT_OK


def _cmd_characterize(args: argparse.Namespace) -> int:
    img = decode(args.input)
    subsample = settings.stats_subsample_threshold if settings.stats_subsample else None
    profile = characterize_image(
        img,
        exclude_achromatic=args.exclude_achromatic,
        subsample_threshold=subsample,
        subsample_size=settings.stats_subsample_size,
        seed=settings.default_seed,
    )
    sys.stdout.write(profile_frame(image_id(args.input), profile).to_csv(index=False))
    return EXIT_OK


async def _store(outcome, args: argparse.Namespace) -> int:
    from database.db import close_db, get_session_context, init_db
    from database.repository import create_run, store_outcome

    await init_db()
    try:
        async with get_session_context() as session:
            run = await create_run(session, args.seed, args.spaces, args.ks, args.out)
            await store_outcome(session, run, outcome)
            return run.id
    finally:
        await close_db()


def _cmd_batch(args: argparse.Namespace) -> int:
    outcome = run_experiment(
        args.images,
        args.spaces,
        args.ks,
        args.seed,
        out_dir=args.out,
        restarts=args.restarts,
        max_iterations=args.max_iterations,
        scaling=args.scaling,
        vif_mode=args.vif_mode,
        exclude_achromatic=args.exclude_achromatic,
        subsample_threshold=settings.stats_subsample_threshold if settings.stats_subsample else None,
        subsample_size=settings.stats_subsample_size,
        threads=args.threads,
        record_runtime=settings.record_runtime and not args.no_timing,
    )
    print(summarize(outcome))
    if args.db:
        run_id = asyncio.run(_store(outcome, args))
        print(f"stored as run {run_id}")
    for name in outcome.failed:
        print(f"failed: {name}", file=sys.stderr)
    return EXIT_OK if outcome.ok else EXIT_FAILURE


COMMANDS = {
    "quantize": _cmd_quantize,
    "evaluate": _cmd_evaluate,
    "characterize": _cmd_characterize,
    "batch": _cmd_batch,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args)
    except QuantizationError as e:
        logger.debug("Command %s failed", args.command, exc_info=True)
        print(f"error [{e.error_code}]: {e.detail}", file=sys.stderr)
        return EXIT_FAILURE
