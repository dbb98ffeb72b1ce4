"""
tomofuse command line.

Every subcommand wraps one toolkit operation. Human-readable results go to
stdout, machine-readable ones as "#METRIC key=value" lines, progress to the
log (stderr).

Exit status: 0 success, 1 usage error, 2 input/parse/dimension error,
3 numerical failure.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from src.config import configure_logging, settings
from src.core.exceptions import DegenerateResponseError, NumericalFailure, TomofuseError
from src.data_pipeline.processing.patch_features import FusionConfig, build_training_set
from src.data_pipeline.storage.dataset_io import read_dataset, write_dataset
from src.experiments.repro import (
    ExperimentConfig, run_fbp_boost_experiment, run_pwls_boost_experiment, run_radius_study
)
from src.fusion.fuse import fuse
from src.fusion.pipeline import end_to_end_fbp_boost, end_to_end_pwls_boost
from src.metrics.masking import object_mask
from src.metrics.quality import HuWindow, quality_table
from src.metrics.resolution import impulse_locations, lir_fwhm, noiseless_fbp_reconstructor
from src.models.model_registry import REGISTRY_FILE, ModelRegistry
from src.models.neural.model_io import load_model, save_model
from src.models.neural.network import NeuralNet
from src.models.neural.training import TrainConfig, train
from src.optimization.lbfgs import STATUS_LINE_SEARCH_FAILED
from src.pwcdemo.experiment import PwcConfig, run_pwc_experiment
from src.reconstruction.fbp import FilterBank, FilterParams, fbp_sweep
from src.reconstruction.pwls import PwlsParams, fbp_initial_image, pwls_reconstruct
from src.scanmodel.noise import counts_to_sinogram, simulate_counts
from src.scanmodel.phantom import (
    disk_phantom, random_tissue_phantom, rasterize_phantom, read_phantom, shepp_logan_phantom, write_phantom
)
from src.scanmodel.projector import radon_forward
from src.scanmodel.raster import read_counts, read_image, write_counts, write_image, write_sinogram
from src.scanmodel.types import Image, ScanGeometry, attenuation_to_hu, hu_to_attenuation

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad flags; usage errors exit with 1 here"""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'") from e


def _ints(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'") from e


def metric(key: str, value) -> None:
    if isinstance(value, float):
        value = format(value, ".10g")
    print(f"#METRIC {key}={value}")


def _suffixed(path: str, suffix: str) -> Path:
    p = Path(path)
    return p.with_name(f"{p.stem}_{suffix}{p.suffix}")


# --- scan model -------------------------------------------------------------

def cmd_phantom(args) -> int:
    fov_radius = args.size * args.pixel_size / 2.0
    if args.from_file:
        phantom = read_phantom(args.from_file)
    elif args.preset == "shepp-logan":
        phantom = shepp_logan_phantom(fov_radius)
    elif args.preset == "disk":
        phantom = disk_phantom(fov_radius)
    else:
        phantom = random_tissue_phantom(fov_radius, args.seed, pixel_size=args.pixel_size)
    image = rasterize_phantom(phantom, args.size, args.size, args.pixel_size)
    write_image(image, args.output)
    if args.phantom_out:
        write_phantom(phantom, args.phantom_out)
    print(f"phantom {args.preset if not args.from_file else args.from_file}: {args.size}x{args.size} -> {args.output}")
    metric("min_hu", float(image.data.min()))
    metric("max_hu", float(image.data.max()))
    return EXIT_OK


def cmd_scan(args) -> int:
    image = read_image(args.input)
    size = max(image.width, image.height)
    geometry = ScanGeometry.covering(size, image.pixel_size, args.views, args.blank)
    if args.bins:
        geometry = ScanGeometry(num_views=args.views, num_bins=args.bins,
                                bin_spacing=image.pixel_size, blank_count=args.blank)
    sino = radon_forward(hu_to_attenuation(image, args.mu_water), geometry)
    counts = simulate_counts(sino, args.seed, noiseless=args.noiseless)
    write_counts(counts, args.output)
    if args.sinogram_out:
        write_sinogram(sino, args.sinogram_out)
    print(f"scan: {geometry.num_views} views x {geometry.num_bins} bins, blank {args.blank:g}"
          f"{' (noiseless)' if args.noiseless else ''} -> {args.output}")
    metric("min_count", float(counts.counts.min()))
    metric("zero_counts", int(np.sum(counts.counts == 0)))
    return EXIT_OK


# --- reconstruction ---------------------------------------------------------

def cmd_fbp(args) -> int:
    counts = read_counts(args.input)
    bank = FilterBank.sweep_bank() if args.sweep else FilterBank.from_cutoffs(args.cutoff, args.order)
    images = fbp_sweep(counts_to_sinogram(counts), bank, args.size, args.size, args.pixel_size)
    for params, image in zip(bank, images):
        path = Path(args.output) if len(bank) == 1 else _suffixed(args.output, params.label)
        hu = attenuation_to_hu(image, args.mu_water)
        hu.extra = dict(image.extra)
        write_image(hu, path)
        print(f"{params.label} -> {path}")
    return EXIT_OK


def cmd_pwls(args) -> int:
    counts = read_counts(args.input)
    params = PwlsParams(beta=args.beta, delta=args.delta, max_iters=args.iters,
                        snapshot_every=args.snapshot_every)
    init = fbp_initial_image(counts, args.size, args.size, args.pixel_size)
    result = pwls_reconstruct(counts, init, params)
    for iteration, image in zip(result.iterations, result.snapshots):
        path = _suffixed(args.output, f"it{iteration}")
        write_image(attenuation_to_hu(image, args.mu_water), path)
        print(f"iteration {iteration} -> {path}")
    metric("status", result.status)
    metric("iterations", result.n_iters)
    if result.objective_history:
        metric("objective", float(result.objective_history[-1]))
    if result.status == STATUS_LINE_SEARCH_FAILED:
        logger.error(f"PWLS line search failed after {result.n_iters} iterations")
        return EXIT_NUMERICAL
    return EXIT_OK


# --- fusion -----------------------------------------------------------------

def _fusion_config(args) -> FusionConfig:
    return FusionConfig(radii=args.radii, output_radius=args.output_radius, stride=args.stride,
                        max_examples=args.max_examples, seed=args.seed)


def cmd_make_dataset(args) -> int:
    cfg = _fusion_config(args)
    pairs = []
    for files in args.pair:
        if len(files) < 2:
            raise UsageError("--pair needs a reference followed by at least one version")
        pairs.append(([read_image(f) for f in files[1:]], read_image(files[0])))
    data = build_training_set(pairs, cfg, threads=settings.THREADS)
    write_dataset(data, args.output)
    print(f"dataset: {len(data)} examples, {data.n_inputs} inputs, {data.n_outputs} outputs -> {args.output}")
    metric("examples", len(data))
    metric("inputs", data.n_inputs)
    metric("outputs", data.n_outputs)
    return EXIT_OK


def _registry_path(args) -> Path:
    return Path(args.registry or settings.MODEL_REGISTRY_PATH or Path(args.output).with_name(REGISTRY_FILE))


def cmd_train(args) -> int:
    data = read_dataset(args.input)
    cfg = TrainConfig(trainer=args.trainer, max_epochs=args.epochs, batch_rows=args.batch, seed=args.seed,
                      validation_fraction=args.validation)
    net = NeuralNet.initialize([data.n_inputs, *args.hidden, data.n_outputs], args.seed)
    result = train(net, data, cfg)
    save_model(result.net, args.output)

    best_val = min(result.val_loss) if result.val_loss else None
    if args.register:
        registry = ModelRegistry(_registry_path(args))
        metrics = {"train_loss": float(result.train_loss[-1]), "epochs": result.epochs}
        if best_val is not None:
            metrics["val_loss"] = float(best_val)
        registry.register_model(args.name or Path(args.output).stem, args.kind, args.output,
                                result.net.layer_sizes, metrics, cfg.model_dump())

    print(f"trained {'-'.join(map(str, result.net.layer_sizes))} network ({result.status}) -> {args.output}")
    metric("status", result.status)
    metric("epochs", result.epochs)
    metric("train_loss", float(result.train_loss[-1]))
    if best_val is not None:
        metric("val_loss", float(best_val))
    return EXIT_OK


def cmd_fuse(args) -> int:
    net = load_model(args.model)
    stack = [read_image(f) for f in args.stack]
    cfg = FusionConfig(radii=args.radii, output_radius=args.output_radius)
    fused = fuse(stack, net, cfg)
    write_image(fused, args.output)
    print(f"fused {len(stack)} versions -> {args.output}")
    return EXIT_OK


def cmd_boost_fbp(args) -> int:
    counts = read_counts(args.input)
    net = load_model(args.model)
    cfg = FusionConfig(radii=args.radii, output_radius=args.output_radius)
    fused = end_to_end_fbp_boost(counts, FilterBank.from_cutoffs(args.cutoffs, args.order), net, cfg,
                                 args.size, args.size, args.pixel_size, args.mu_water)
    write_image(fused, args.output)
    print(f"FBP boost -> {args.output}")
    return EXIT_OK


def cmd_boost_pwls(args) -> int:
    counts = read_counts(args.input)
    net = load_model(args.model)
    cfg = FusionConfig(radii=args.radii, output_radius=args.output_radius)
    params = PwlsParams(beta=args.beta, delta=args.delta, max_iters=args.iters,
                        snapshot_every=args.snapshot_every)
    fused = end_to_end_pwls_boost(counts, args.snapshots, net, cfg, args.size, args.size, args.pixel_size,
                                  params, args.mu_water)
    write_image(fused, args.output)
    print(f"PWLS boost -> {args.output}")
    return EXIT_OK


# --- evaluation -------------------------------------------------------------

def cmd_eval(args) -> int:
    reference = read_image(args.ref)
    estimates = {Path(f).stem: read_image(f) for f in args.est}
    if len(args.window) != 2:
        raise UsageError(f"--window needs exactly two values b1,b2, got {len(args.window)}")
    window = HuWindow(low=args.window[0], high=args.window[1])
    mask = object_mask(reference)
    table = quality_table(reference, estimates, mask, window, include_ssim=args.ssim)
    print(table.to_csv(sep="\t", float_format="%.4f"), end="")
    for name in table.columns:
        for row in table.index:
            key = row.lower().replace(" ", "_").replace("(", "").replace(")", "").replace("-", "_")
            metric(f"{name}.{key}", float(table.loc[row, name]))

    if args.fwhm:
        geometry = ScanGeometry.covering(max(reference.shape), reference.pixel_size, args.views,
                                         settings.BLANK_COUNT)
        locations = impulse_locations(mask, args.locations, args.seed)
        for cutoff in args.cutoff:
            params = FilterParams(cutoff=cutoff, order=args.order)
            values = lir_fwhm(noiseless_fbp_reconstructor(geometry, params), reference, locations)
            print(f"{params.label}\tFWHM\t{np.mean(values):.4f}")
            metric(f"{params.label}.fwhm_mean", float(np.mean(values)))
    return EXIT_OK


def cmd_pwc_demo(args) -> int:
    train_cfg = PwcConfig(length=args.train_len, noise_std=args.noise, seed=args.seed)
    test_cfg = PwcConfig(length=args.test_len, noise_std=args.noise, seed=args.seed + 1)
    report = run_pwc_experiment(train_cfg, test_cfg, hidden=args.hidden,
                                train_config=TrainConfig(max_epochs=args.epochs, seed=args.seed))
    print(report.table.to_csv(sep="\t", float_format="%.4f"), end="")
    for method, value in report.table["SNR (dB)"].items():
        metric(f"snr[{method.replace(' ', '_')}]", float(value))
    metric("fusion_gain", report.fusion_gain)
    if args.out_dir:
        out = Path(args.out_dir)
        for name, signal in (("clean", report.clean), ("noisy", report.noisy), ("fused", report.fused)):
            write_image(Image(signal[None, :]), out / f"pwc_{name}.tfr")
    return EXIT_OK


# --- reproductions ----------------------------------------------------------

def _experiment_config(args, hidden: List[int]) -> ExperimentConfig:
    return ExperimentConfig(image_size=args.size, pixel_size=args.pixel_size, num_views=args.views,
                            blank_count=args.blank, train_slices=args.train_slices,
                            test_slices=args.test_slices, hidden=hidden, seed=args.seed,
                            threads=settings.THREADS)


def _report_experiment(experiment, csv: Optional[str]) -> int:
    summary = experiment.print_summary()
    print(summary.to_csv(sep="\t", float_format="%.4f"), end="")
    gains = experiment.gains()
    metric("median_snr_gain", float(gains["snr_gain"].median()))
    metric("median_ssim_gain", float(gains["ssim_gain"].median()))
    metric("min_snr_gain", float(gains["snr_gain"].min()))
    if csv:
        experiment.export_results(csv)
    return EXIT_OK


def cmd_repro_fbp(args) -> int:
    cfg = _experiment_config(args, args.hidden or [40])
    experiment = run_fbp_boost_experiment(
        cfg, FilterBank.from_cutoffs(args.cutoffs, args.order),
        train_config=TrainConfig(max_epochs=args.epochs, seed=args.seed))
    return _report_experiment(experiment, args.csv)


def cmd_repro_pwls(args) -> int:
    cfg = _experiment_config(args, args.hidden or [30])
    params = PwlsParams(beta=args.beta, delta=args.delta, max_iters=args.iters,
                        snapshot_every=args.snapshot_every)
    experiment = run_pwls_boost_experiment(
        cfg, args.snapshots, params, train_config=TrainConfig(max_epochs=args.epochs, seed=args.seed))
    return _report_experiment(experiment, args.csv)


def cmd_radius_study(args) -> int:
    cfg = _experiment_config(args, args.hidden or [40])
    table = run_radius_study(cfg, args.radii_list, FilterBank.from_cutoffs(args.cutoffs, args.order),
                             train_config=TrainConfig(max_epochs=args.epochs, seed=args.seed))
    print(table.to_csv(sep="\t", float_format="%.4f"), end="")
    for radius, row in table.iterrows():
        metric(f"snr_fused[r={radius}]", float(row["snr_fused"]))
    if args.csv:
        Path(args.csv).parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(args.csv)
    return EXIT_OK


# --- parser -----------------------------------------------------------------

def _grid_flags(p) -> None:
    p.add_argument("--size", type=int, default=settings.IMAGE_SIZE, help="Image width = height in pixels")
    p.add_argument("--pixel-size", type=float, default=settings.PIXEL_SIZE)


def _pwls_flags(p) -> None:
    p.add_argument("--beta", type=float, default=PwlsParams.model_fields["beta"].default)
    p.add_argument("--delta", type=float, default=PwlsParams.model_fields["delta"].default)
    p.add_argument("--iters", type=int, default=PwlsParams.model_fields["max_iters"].default)
    p.add_argument("--snapshot-every", type=int, default=PwlsParams.model_fields["snapshot_every"].default)


def _experiment_flags(p) -> None:
    _grid_flags(p)
    p.add_argument("--views", type=int, default=settings.NUM_VIEWS)
    p.add_argument("--blank", type=float, default=settings.LOW_DOSE_BLANK_COUNT)
    p.add_argument("--train-slices", type=int, default=12)
    p.add_argument("--test-slices", type=int, default=3)
    p.add_argument("--hidden", type=_ints, default=None)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", help="Write the per-slice results table")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tomofuse", description="Local fusion of CT reconstructions")
    parser.add_argument("--threads", type=int, default=None, help="Worker threads (default TOMOFUSE_THREADS)")
    parser.add_argument("--deterministic", action="store_true", help="Force single-threaded execution")
    parser.add_argument("--log-level", default=None)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("phantom", help="Rasterize a phantom (HU)")
    p.add_argument("--preset", choices=["shepp-logan", "random-tissue", "disk"], default="shepp-logan")
    p.add_argument("--from", dest="from_file", help="Phantom description file instead of a preset")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--phantom-out", help="Also write the phantom description")
    _grid_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("scan", help="Simulate photon counts of an HU image")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--views", type=int, default=settings.NUM_VIEWS)
    p.add_argument("--bins", type=int, default=None)
    p.add_argument("--blank", type=float, default=settings.BLANK_COUNT)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noiseless", action="store_true")
    p.add_argument("--mu-water", type=float, default=settings.MU_WATER)
    p.add_argument("--sinogram-out")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("fbp", help="Filtered back-projection (one output per cut-off)")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--cutoff", type=_floats, default=[np.inf], help="Cut-off(s), e.g. 0.4,1.15,inf")
    p.add_argument("--sweep", action="store_true", help="Eight-filter sweep bank instead of --cutoff/--order")
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--mu-water", type=float, default=settings.MU_WATER)
    _grid_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_fbp)

    p = sub.add_parser("pwls", help="PWLS reconstruction with snapshots <output>_it<k>")
    p.add_argument("-i", "--input", required=True)
    _pwls_flags(p)
    p.add_argument("--mu-water", type=float, default=settings.MU_WATER)
    _grid_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_pwls)

    p = sub.add_parser("make-dataset", help="Build a TFDS1 training set")
    p.add_argument("--pair", nargs="+", action="append", required=True, metavar="FILE",
                   help="Reference image followed by its versions; repeat per training slice")
    p.add_argument("--radii", type=_ints, default=[3, 3, 3])
    p.add_argument("--output-radius", type=int, default=3)
    p.add_argument("--stride", type=int, default=3)
    p.add_argument("--max-examples", type=int, default=30000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_make_dataset)

    p = sub.add_parser("train", help="Train a fusion network on a TFDS1 set")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--hidden", type=_ints, default=[40])
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch", type=int, default=1000, help="Residual rows per LM curvature estimate")
    p.add_argument("--trainer", choices=["lm", "gd"], default="lm")
    p.add_argument("--validation", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--name", help="Registry name (default: output file stem)")
    p.add_argument("--kind", default="custom", choices=["fbp-boost", "pwls-boost", "pwc", "custom"])
    p.add_argument("--registry", default=None,
                   help="Registry file (default TOMOFUSE_MODEL_REGISTRY_PATH, else next to the output)")
    p.add_argument("--no-register", dest="register", action="store_false")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("fuse", help="Fuse image versions with a trained network")
    p.add_argument("--model", required=True)
    p.add_argument("--stack", nargs="+", required=True)
    p.add_argument("--radii", type=_ints, default=[3, 3, 3])
    p.add_argument("--output-radius", type=int, default=3)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("boost-fbp", help="FBP sweep of a counts file followed by fusion")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--cutoffs", type=_floats, default=[0.4, 1.15, np.inf])
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--radii", type=_ints, default=[3, 3, 3])
    p.add_argument("--output-radius", type=int, default=3)
    p.add_argument("--mu-water", type=float, default=settings.MU_WATER)
    _grid_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_boost_fbp)

    p = sub.add_parser("boost-pwls", help="PWLS snapshots of a counts file followed by fusion")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--snapshots", type=_ints, default=[20, 60, 80])
    p.add_argument("--radii", type=_ints, default=[4, 1, 4])
    p.add_argument("--output-radius", type=int, default=0)
    _pwls_flags(p)
    p.add_argument("--mu-water", type=float, default=settings.MU_WATER)
    _grid_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_boost_pwls)

    p = sub.add_parser("eval", help="Quality metrics of estimates against a reference")
    p.add_argument("--ref", required=True)
    p.add_argument("--est", nargs="+", required=True)
    p.add_argument("--window", type=_floats, default=[-220.0, 350.0], help="b1,b2")
    p.add_argument("--ssim", action="store_true")
    p.add_argument("--fwhm", action="store_true", help="LIR FWHM of noiseless FBP on the reference")
    p.add_argument("--cutoff", type=_floats, default=[0.4, np.inf])
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--views", type=int, default=settings.NUM_VIEWS)
    p.add_argument("--locations", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("pwc-demo", help="1-D piecewise-constant fusion demo")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-len", type=int, default=20000)
    p.add_argument("--test-len", type=int, default=300)
    p.add_argument("--noise", type=float, default=0.06)
    p.add_argument("--hidden", type=int, default=20)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--out-dir", help="Write clean/noisy/fused signals as 1-row rasters")
    p.set_defaults(func=cmd_pwc_demo)

    p = sub.add_parser("repro-fbp", help="FBP-boost reproduction on synthetic slices")
    _experiment_flags(p)
    p.add_argument("--cutoffs", type=_floats, default=[0.4, 1.15, np.inf])
    p.add_argument("--order", type=int, default=3)
    p.set_defaults(func=cmd_repro_fbp)

    p = sub.add_parser("repro-pwls", help="PWLS-boost reproduction on synthetic slices")
    _experiment_flags(p)
    p.add_argument("--snapshots", type=_ints, default=[20, 60, 80])
    _pwls_flags(p)
    p.set_defaults(func=cmd_repro_pwls)

    p = sub.add_parser("radius-study", help="Fusion quality versus neighbourhood radius")
    _experiment_flags(p)
    p.add_argument("--radii-list", type=_ints, default=[0, 1, 2, 3, 4])
    p.add_argument("--cutoffs", type=_floats, default=[0.4, 1.15, np.inf])
    p.add_argument("--order", type=int, default=3)
    p.set_defaults(func=cmd_radius_study)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"tomofuse: error: {e}", file=sys.stderr)
        return EXIT_USAGE

    configure_logging(args.log_level)
    if args.deterministic:
        settings.THREADS = 1
    elif args.threads is not None:
        settings.THREADS = max(1, args.threads)

    try:
        return args.func(args)
    except UsageError as e:
        print(f"tomofuse: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalFailure, DegenerateResponseError) as e:
        logger.error(f"Numerical failure: {e}")
        print(f"tomofuse: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (TomofuseError, FileNotFoundError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"tomofuse: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INPUT
    except ValidationError as e:
        print(f"tomofuse: invalid parameters: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as e:
        logger.error(f"Invalid input: {e}")
        print(f"tomofuse: invalid input: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
