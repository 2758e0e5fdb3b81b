import argparse
import logging
import sys
from typing import Any, Sequence

from gwm_segment import __version__
from gwm_segment.errors import (
    ConfigError,
    DivergedLoss,
    FlowFormatError,
    GwmError,
    IoFailure,
    ModeMismatch,
    ValidationError,
)
from gwm_segment.eval.metrics import MODE_ORACLE, evaluate_run, oracle_predictions
from gwm_segment.flowfield.containers import LabelMap, RgbImage
from gwm_segment.flowfield.io import write_ppm
from gwm_segment.flowfield.viz import flow_to_color, labels_to_color, overlay
from gwm_segment.merge.merging import merge_masks
from gwm_segment.motion.energy import SoftMasks
from gwm_segment.motion.models import ModelFamily
from gwm_segment.run.config import load_config, train_config
from gwm_segment.run.manifest import compute_manifest, git_describe, validate_manifest
from gwm_segment.run.storage import RunDirectory
from gwm_segment.scenes.generator import generate, verify_scene
from gwm_segment.scenes.presets import PRESETS, heldout_pair_specs, preset
from gwm_segment.scenes.storage import load_scene, save_scene
from gwm_segment.segment.features import FeatureSpec, featurize
from gwm_segment.segment.segmenter import LinearFeatureSegmenter, save_segmenter
from gwm_segment.segment.training import InitKind, Mode, train_internal

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DIVERGED = 4

# appearance features used to pool segments when merging
MERGE_FEATURES = FeatureSpec()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gwm-segment",
        description="Motion-supervised segmentation on synthetic sprite scenes",
    )
    parser.add_argument("--version", action="version", version=f"gwm-segment {__version__}")
    parser.add_argument("--verbose", action="store_true", help="Log progress at INFO level")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")

    def add_common(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--config", type=str, help="JSON config file (flags override it)")
        sub.add_argument("--out", type=str, help="Output directory")

    gen = subparsers.add_parser("gen", help="Generate a synthetic scene directory")
    add_common(gen)
    gen.add_argument("--preset", type=str, help=f"Scene preset ({', '.join(PRESETS)})")
    gen.add_argument("--seed", type=int, help="Scene seed (default: 0)")
    gen.add_argument(
        "--verify", action="store_true", default=None, help="Re-read the scene and check its invariants"
    )

    seg = subparsers.add_parser("segment", help="Train a segmenter on a scene and write masks")
    add_common(seg)
    seg.add_argument("--scene", type=str, help="Scene directory written by 'gen'")
    seg.add_argument("--seed", type=int, help="Initialization seed (default: 0)")
    seg.add_argument("--k", type=int, help="Number of components (default: 4)")
    seg.add_argument("--family", choices=[f.value for f in ModelFamily], help="Motion model family")
    seg.add_argument("--mode", choices=[m.value for m in Mode], help="Mask parameterization")
    seg.add_argument("--iters", type=int, help="Gradient steps (default: 300)")
    seg.add_argument("--lr", type=float, help="Learning rate (default: 0.5 perpixel, 0.1 linear)")
    seg.add_argument("--init", choices=[k.value for k in InitKind], help="Per-pixel logit initialization")
    seg.add_argument("--restarts", type=int, help="Training restarts; the lowest final loss is kept (default: 4)")
    seg.add_argument(
        "--predict-scene", dest="predict_scene", type=str, help="Held-out scene to predict (linear mode)"
    )

    merge = subparsers.add_parser("merge", help="Merge component masks into foreground masks")
    add_common(merge)
    merge.add_argument("--masks", type=str, help="Directory with masks_*.npy")
    merge.add_argument("--scene", type=str, help="Scene directory providing the frames")
    merge.add_argument("--epsilon", type=float, help="Affinity floor (default: 1e-12)")

    ev = subparsers.add_parser("eval", help="Score predictions against scene ground truth")
    add_common(ev)
    ev.add_argument("--pred", type=str, help="Directory with pred_*.pgm")
    ev.add_argument("--scene", type=str, help="Scene directory")
    ev.add_argument("--masks", type=str, help="Directory with masks_*.npy (oracle mode)")
    ev.add_argument("--mode", choices=["heuristic", "oracle"], help="Foreground assignment")

    viz = subparsers.add_parser("viz", help="Render flow and masks as PPM images")
    add_common(viz)
    viz.add_argument("--scene", type=str, help="Scene directory")
    viz.add_argument("--masks", type=str, help="Directory with masks_*.npy to overlay")
    viz.add_argument(
        "--max-magnitude", dest="max_magnitude", type=float, help="Flow magnitude at full saturation"
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    if not args.command:
        parser.print_help()
        return EXIT_OK

    overrides = {
        key: value
        for key, value in vars(args).items()
        if key not in ("command", "config", "verbose")
    }
    handlers = {
        "gen": _gen,
        "segment": _segment,
        "merge": _merge,
        "eval": _eval,
        "viz": _viz,
    }
    try:
        config = load_config(args.command, args.config, overrides)
        return handlers[args.command](config)
    except (ConfigError, ModeMismatch) as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (IoFailure, FlowFormatError, ValidationError) as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except DivergedLoss as e:
        print(f"Training diverged: {e}", file=sys.stderr)
        return EXIT_DIVERGED
    except GwmError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_VERIFY_FAILED


def _gen(config: dict[str, Any]) -> int:
    """Handle 'gen': write one scene (two for heldout-pair) and optionally verify it."""
    if config["preset"] == "heldout-pair":
        train_spec, test_spec = heldout_pair_specs(config["seed"])
        targets = {"train": train_spec, "test": test_spec}
    else:
        targets = {"": preset(config["preset"], config["seed"])}

    ok = True
    for sub, spec in targets.items():
        directory = f"{config['out']}/{sub}" if sub else config["out"]
        save_scene(generate(spec), directory)
        print(f"Wrote scene '{spec.name}' ({spec.frames} frame(s)) to {directory}")
        if config["verify"]:
            problems = verify_scene(load_scene(directory))
            for problem in problems:
                print(f"  {problem}")
            ok = ok and not problems
    if config["verify"]:
        print("Scene verification passed." if ok else "Scene verification failed.")
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def _write_frames(
    run_dir: RunDirectory, images: Sequence[RgbImage], masks_list: Sequence[SoftMasks], epsilon: float
) -> list[str]:
    """Save per-frame masks and merged predictions; returns the merge method of each frame."""
    run_dir.ensure_directories()
    methods = []
    for t, (image, masks) in enumerate(zip(images, masks_list)):
        merged = merge_masks(masks, featurize(image, MERGE_FEATURES), epsilon)
        run_dir.save_frame(t, masks, merged.foreground)
        methods.append(merged.method)
    return methods


def _segment(config: dict[str, Any]) -> int:
    """Handle 'segment': internal learning on a scene, then merge every frame."""
    scene = load_scene(config["scene"])
    mode = Mode.parse(config["mode"])
    cfg = train_config(config)
    if config["predict_scene"] and mode is not Mode.LINEAR:
        raise ConfigError("predict_scene needs --mode linear (per-pixel masks exist only for training frames)")

    print(f"Training {mode.value} segmenter on {scene.frames} frame(s) from {config['scene']}")
    result = train_internal(list(zip(scene.images, scene.flows)), cfg, mode)
    segmenter = result.segmenter
    if mode is Mode.PERPIXEL:
        masks = [segmenter.masks(t) for t in range(scene.frames)]
    else:
        masks = [segmenter.predict(image) for image in scene.images]

    run_dir = RunDirectory(config["out"])
    heldout_dir = run_dir.subdirectory("heldout")
    # outputs of an earlier run into the same directory
    run_dir.prune_frames(0)
    heldout_dir.prune_frames(0)
    run_dir.remove(run_dir.segmenter_file)

    methods = _write_frames(run_dir, scene.images, masks, config["epsilon"])
    run_dir.write_loss_trace(result.loss_trace)
    if isinstance(segmenter, LinearFeatureSegmenter):
        save_segmenter(
            segmenter, run_dir.track(run_dir.segmenter_file), seed=cfg.seed, config=cfg.to_dict(mode)
        )
        if config["predict_scene"]:
            heldout = load_scene(config["predict_scene"])
            heldout_masks = [segmenter.predict(image) for image in heldout.images]
            _write_frames(heldout_dir, heldout.images, heldout_masks, config["epsilon"])

    manifest = compute_manifest(
        config,
        command="segment",
        tool_version=__version__,
        revision=git_describe(),
        train_config=cfg.to_dict(mode),
        result={
            "mode": mode.value,
            "frames": scene.frames,
            "iterations": cfg.iterations,
            "initial_loss": result.loss_trace[0],
            "final_loss": result.final_loss,
        },
        merge_methods=methods,
        outputs=run_dir.written_outputs(),
    )
    validate_manifest(manifest)
    run_dir.write_json(run_dir.manifest_file, manifest)
    print(f"Loss {result.loss_trace[0]:.6g} -> {result.final_loss:.6g}; wrote {config['out']}")
    return EXIT_OK


def _merge(config: dict[str, Any]) -> int:
    """Handle 'merge': turn saved soft masks into binary foreground PGMs."""
    masks_list = RunDirectory(config["masks"]).load_masks()
    scene = load_scene(config["scene"])
    if len(masks_list) != scene.frames:
        raise ConfigError(f"{len(masks_list)} mask frame(s) for a {scene.frames}-frame scene")

    out_dir = RunDirectory(config["out"])
    out_dir.ensure_directories()
    out_dir.prune_frames(scene.frames, kinds=("pred",))
    frames = []
    for t, (image, masks) in enumerate(zip(scene.images, masks_list)):
        merged = merge_masks(masks, featurize(image, MERGE_FEATURES), config["epsilon"])
        out_dir.save_prediction(t, merged.foreground)
        frames.append({"frame": t, **merged.to_dict()})
    out_dir.write_json(out_dir.merge_file, {"schema_version": 1, "frames": frames})
    print(f"Merged {len(frames)} frame(s) into {config['out']}")
    return EXIT_OK


def _eval(config: dict[str, Any]) -> int:
    """Handle 'eval': Jaccard report of predictions (or oracle assignments)."""
    scene = load_scene(config["scene"])
    if config["mode"] == MODE_ORACLE:
        masks_list = RunDirectory(config["masks"] or config["pred"]).load_masks()
        predictions = oracle_predictions(masks_list, scene)
    else:
        predictions = RunDirectory(config["pred"]).load_predictions()
    report = evaluate_run(scene, predictions, config["mode"])

    out_dir = RunDirectory(config["out"] or config["pred"])
    out_dir.write_json(out_dir.report_file, report.to_dict())
    print(report.to_text())
    return EXIT_OK


def _viz(config: dict[str, Any]) -> int:
    """Handle 'viz': colour-coded flow and, with --masks, component overlays."""
    scene = load_scene(config["scene"])
    out_dir = RunDirectory(config["out"])
    out_dir.ensure_directories()
    for t, flow in enumerate(scene.flows):
        write_ppm(flow_to_color(flow, config["max_magnitude"]), out_dir.base_dir / f"flow_{t:04d}.ppm")
        write_ppm(labels_to_color(scene.labels[t]), out_dir.base_dir / f"gt_{t:04d}.ppm")

    if config["masks"]:
        masks_list = RunDirectory(config["masks"]).load_masks()
        for t, (image, masks) in enumerate(zip(scene.images, masks_list)):
            # shift by one so component 0 is coloured too
            components = LabelMap(masks.argmax().data + 1)
            write_ppm(overlay(image, components), out_dir.base_dir / f"overlay_{t:04d}.ppm")
    print(f"Wrote visualizations to {config['out']}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
