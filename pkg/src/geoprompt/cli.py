"""Command-line front end.

One subcommand per capability: convert, encode, decode, mask, augment,
stats, split, eval-map, embed. Standard output carries exactly one JSON
summary line per run; progress and warnings go to standard error. Output
files are written atomically, so an interrupted run never leaves a
truncated file under the final name.

Exit codes: 0 success, 1 data error, 2 usage error. The default seed is 0,
overridable by the GEOPROMPT_SEED environment variable; an explicit --seed
beats both.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor

from . import kernels
from .augment import AugmentPolicy, augment
from .codec import TokenVocabulary, build_embeddings, write_embedding_table
from .detmetrics import EvalConfig, evaluate, read_detections
from .errors import GeopromptError
from .fileio import atomic_write_text
from .ingest import (
    DatasetManifest,
    parse_coco,
    parse_manifest,
    split_subset,
    stats,
    write_manifest,
)
from .layout import GridSpec
from .mask import DEFAULT_AREA_POWER, DEFAULT_FG_WEIGHT, build_mask, mask_to_file
from .prompt import PromptOptions, build_prompt, parse_prompt

DEFAULT_SEED = 0


def _parse_dims(text: str, label: str) -> tuple[int, int]:
    # Dimension flags are WIDTHxHEIGHT, e.g. --grid 400x228.
    m = re.fullmatch(r"(\d+)x(\d+)", text)
    if not m:
        raise argparse.ArgumentTypeError(f"{label} must look like 400x228, got {text!r}")
    w, h = int(m.group(1)), int(m.group(2))
    if w < 1 or h < 1:
        raise argparse.ArgumentTypeError(f"{label} dimensions must be >= 1, got {text!r}")
    return w, h


def _grid_type(text: str) -> tuple[int, int]:
    return _parse_dims(text, "--grid")


def _latent_type(text: str) -> tuple[int, int]:
    return _parse_dims(text, "--latent")


def _size_type(text: str) -> tuple[int, int]:
    return _parse_dims(text, "--size")


def _resolve_seed(explicit: int | None) -> int:
    if explicit is not None:
        return explicit
    env = os.environ.get("GEOPROMPT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise GeopromptError(f"GEOPROMPT_SEED must be an integer, got {env!r}")
    return DEFAULT_SEED


def _safe_name(image_id) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", str(image_id))


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _emit(summary: dict) -> None:
    print(json.dumps(summary, ensure_ascii=False))


def _pmap(fn, items, jobs: int):
    """Order-preserving map, sequential when jobs <= 1."""
    if jobs <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geoprompt",
        description="Layouts to location-token prompts, re-weighting masks, and AP reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="COCO JSON to canonical manifest")
    p.add_argument("--coco", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("encode", help="manifest to prompt JSONL")
    p.add_argument("--manifest", required=True)
    p.add_argument("--grid", type=_grid_type, required=True, metavar="WxH")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--dropout", action="store_true")
    p.add_argument("--dropout-rate", type=float, default=PromptOptions.dropout_rate)
    p.add_argument("--null-text", default=PromptOptions.null_text)
    p.add_argument("--no-shuffle", action="store_true")
    p.add_argument("--template", default=None, help="token pattern containing {i}")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("decode", help="prompt JSONL back to a manifest")
    p.add_argument("--prompts", required=True)
    p.add_argument("--grid", type=_grid_type, required=True, metavar="WxH")
    p.add_argument("--size", type=_size_type, required=True, metavar="WxH")
    p.add_argument("--classes", required=True, help="JSON file mapping class name to id")
    p.add_argument("--template", default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("mask", help="re-weighting mask files, one per image")
    p.add_argument("--manifest", required=True)
    p.add_argument("--latent", type=_latent_type, required=True, metavar="WxH")
    p.add_argument("--w", type=float, default=DEFAULT_FG_WEIGHT, dest="fg_weight")
    p.add_argument("--p", type=float, default=DEFAULT_AREA_POWER, dest="area_power")
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("--sidecar", action="store_true")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("augment", help="filter, flip, shift a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--policy", default=None, help="JSON policy file")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("stats", help="per-class counts and area quantiles")
    p.add_argument("--manifest", required=True)
    p.add_argument("--rarity", type=float, default=0.015)
    p.add_argument("--out", default=None)

    p = sub.add_parser("split", help="seeded image-level subset")
    p.add_argument("--manifest", required=True)
    p.add_argument("--fraction", type=float, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--independent", action="store_true", help="disable nested prefixes")
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval-map", help="COCO-style AP report")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--max-dets", type=int, default=100)
    p.add_argument("--out", default=None)

    p = sub.add_parser("embed", help="sine-cosine token embedding table")
    p.add_argument("--grid", type=_grid_type, required=True, metavar="WxH")
    p.add_argument("--size", type=_size_type, required=True, metavar="WxH")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--template", default=None)
    p.add_argument("--out", required=True)

    return parser


def _vocab_for(args, width: float, height: float) -> TokenVocabulary:
    wb, hb = args.grid
    grid = GridSpec(wb, hb, width, height)
    if args.template:
        return TokenVocabulary(grid, args.template)
    return TokenVocabulary(grid)


def _cmd_convert(args) -> dict:
    manifest = parse_coco(args.coco)
    write_manifest(manifest, args.out)
    return {
        "command": "convert",
        "images": len(manifest.layouts),
        "annotations": manifest.annotation_count,
        "categories": len(manifest.categories),
        "out": args.out,
    }


def _load_manifest(path) -> DatasetManifest:
    manifest = parse_manifest(path)
    for warning in manifest.warnings:
        _log(warning)
    return manifest


def _cmd_encode(args) -> dict:
    manifest = _load_manifest(args.manifest)
    seed = _resolve_seed(args.seed)
    options = PromptOptions(
        shuffle=not args.no_shuffle,
        dropout=args.dropout,
        dropout_rate=args.dropout_rate,
        null_text=args.null_text,
    )

    def one(layout):
        vocab = _vocab_for(args, layout.width, layout.height)
        return build_prompt(layout, vocab, seed, options)

    records = _pmap(one, manifest.layouts, args.jobs)
    atomic_write_text(args.out, "".join(r.to_json() + "\n" for r in records))
    dropped = sum(1 for r in records if r.dropped)
    return {
        "command": "encode",
        "records": len(records),
        "dropped": dropped,
        "seed": seed,
        "out": args.out,
    }


def _cmd_decode(args) -> dict:
    with open(args.classes, "r", encoding="utf-8") as fh:
        class_table = {str(k): int(v) for k, v in json.load(fh).items()}
    width, height = args.size
    wb, hb = args.grid
    grid = GridSpec(wb, hb, width, height)
    vocab = TokenVocabulary(grid, args.template) if args.template else TokenVocabulary(grid)
    from .ingest import layout_to_line
    from .prompt import PromptRecord

    lines = []
    skipped = 0
    with open(args.prompts, "r", encoding="utf-8") as fh:
        for raw in fh:
            raw = raw.strip()
            if not raw:
                continue
            record = PromptRecord.from_json(raw)
            if record.dropped:
                skipped += 1
                _log(f"skipping dropped record {record.image_id!r}")
                continue
            layout = parse_prompt(record.prompt, vocab, class_table, image_id=record.image_id)
            lines.append(layout_to_line(layout) + "\n")
    atomic_write_text(args.out, "".join(lines))
    return {
        "command": "decode",
        "records": len(lines),
        "skipped": skipped,
        "out": args.out,
    }


def _cmd_mask(args) -> dict:
    manifest = _load_manifest(args.manifest)
    w_cells, h_cells = args.latent
    os.makedirs(args.out, exist_ok=True)
    kernels.warmup()

    def one(layout):
        m = build_mask(
            layout,
            w_cells,
            h_cells,
            fg_weight=args.fg_weight,
            area_power=args.area_power,
            normalize=not args.no_normalize,
        )
        path = os.path.join(args.out, _safe_name(layout.image_id) + ".geom")
        mask_to_file(m, path, image_id=str(layout.image_id) if args.sidecar else None)
        return path

    paths = _pmap(one, manifest.layouts, args.jobs)
    return {
        "command": "mask",
        "images": len(paths),
        "latent": f"{w_cells}x{h_cells}",
        "fg_weight": args.fg_weight,
        "area_power": args.area_power,
        "normalized": not args.no_normalize,
        "out": args.out,
    }


def _cmd_augment(args) -> dict:
    manifest = _load_manifest(args.manifest)
    seed = _resolve_seed(args.seed)
    policy = AugmentPolicy.from_file(args.policy) if args.policy else AugmentPolicy()

    def one(layout):
        return augment(layout, policy, seed)

    layouts = _pmap(one, manifest.layouts, args.jobs)
    out = DatasetManifest(manifest.categories, tuple(layouts), source=manifest.source)
    write_manifest(out, args.out)
    before = manifest.annotation_count
    after = out.annotation_count
    return {
        "command": "augment",
        "images": len(layouts),
        "boxes_before": before,
        "boxes_after": after,
        "seed": seed,
        "out": args.out,
    }


def _cmd_stats(args) -> dict:
    manifest = _load_manifest(args.manifest)
    report = stats(manifest, rarity_fraction=args.rarity)
    if args.out:
        atomic_write_text(args.out, report.to_json() + "\n")
    summary = json.loads(report.to_json())
    summary = {"command": "stats", **summary}
    if args.out:
        summary["out"] = args.out
    return summary


def _cmd_split(args) -> dict:
    manifest = _load_manifest(args.manifest)
    seed = _resolve_seed(args.seed)
    subset = split_subset(manifest, args.fraction, seed, nested=not args.independent)
    write_manifest(subset, args.out)
    return {
        "command": "split",
        "images": len(subset.layouts),
        "fraction": args.fraction,
        "seed": seed,
        "out": args.out,
    }


def _cmd_eval_map(args) -> dict:
    truths = _load_manifest(args.truth)
    preds = read_detections(args.pred)
    report = evaluate(preds, truths, EvalConfig(max_dets=args.max_dets))
    if args.out:
        atomic_write_text(args.out, report.to_json() + "\n")
    summary = {"command": "eval-map", **json.loads(report.to_json())}
    if args.out:
        summary["out"] = args.out
    return summary


def _cmd_embed(args) -> dict:
    width, height = args.size
    wb, hb = args.grid
    grid = GridSpec(wb, hb, width, height)
    vocab = TokenVocabulary(grid, args.template) if args.template else TokenVocabulary(grid)
    table = build_embeddings(vocab, args.dim)
    write_embedding_table(table, args.out, vocab)
    return {
        "command": "embed",
        "rows": table.rows.shape[0],
        "dim": table.dim,
        "out": args.out,
    }


_COMMANDS = {
    "convert": _cmd_convert,
    "encode": _cmd_encode,
    "decode": _cmd_decode,
    "mask": _cmd_mask,
    "augment": _cmd_augment,
    "stats": _cmd_stats,
    "split": _cmd_split,
    "eval-map": _cmd_eval_map,
    "embed": _cmd_embed,
}


def run(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        summary = _COMMANDS[args.command](args)
    except (GeopromptError, OSError, ValueError) as exc:
        _log(f"error: {exc}")
        return 1
    _emit(summary)
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
