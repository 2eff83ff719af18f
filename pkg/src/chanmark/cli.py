"""Command-line pipeline: embed, extract, attack, evaluate, calibrate, gen-corpus.

All commands accept an optional --config JSON file whose keys mirror the long
flag names; explicit flags override config values override built-in defaults.
Reports are JSON (schema-stable) with CSV and PNG figures written next to
them when --report is given. Exit codes: 0 success, 1 content/runtime error,
2 bad configuration or usage, 3 completed with warnings (uncovered payload
positions during extraction).
"""

import argparse
import json
import os
import sys
from fractions import Fraction

import numpy as np

from .attacks import AttackSpec, AlignmentInfo, apply_alignment, apply_chain
from .codec import EmbedParams, WatermarkPayload, embed_clip, extract
from .corpus import CORPUS_KINDS, default_corpus, generate_clip
from .frame_io import VideoClip, read_clip, write_clip
from .metrics import ber, quality_report
from .report import (
    config_hash,
    format_table,
    plot_ber_bars,
    plot_calibration_sweep,
    plot_psnr_frames,
    write_csv,
    write_json,
)
from .selection import SelectionConfig

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_WARNING = 3

# Attack battery mirrored by the acceptance thresholds (BER fractions).
DEFAULT_BATTERY = [
    ("identity", [], 0.0),
    ("crop_20", [AttackSpec.crop(0.2)], 0.01),
    ("rotate_4", [AttackSpec.rotate(4.0)], 0.05),
    ("resize_150", [AttackSpec.resize(1.5)], 0.05),
    ("resize_050", [AttackSpec.resize(0.5)], 0.05),
    ("projective", [AttackSpec.projective([[7.0, 4.3], [-5.3, 5.8], [7.0, -5.8], [-7.0, -4.3]])], 0.06),
    ("tlpf_4", [AttackSpec.tlpf(4)], 0.10),
    ("frc_30", [AttackSpec.frc(30)], 0.06),
    ("frc_20", [AttackSpec.frc(20)], 0.08),
    (
        "composite",
        [
            AttackSpec.projective([[3.5, 2.9], [-2.6, 3.5], [3.5, -3.5], [-3.5, -2.9]]),
            AttackSpec.resize(0.9),
            AttackSpec.noise(2.0, seed=99),
            AttackSpec.tlpf(4),
        ],
        0.15,
    ),
]


class ConfigError(ValueError):
    pass


def _load_config(path) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return data


def _opt(args, config: dict, name: str, default):
    """Effective option value: CLI flag > config file > default."""
    cli_val = getattr(args, name.replace("-", "_"), None)
    if cli_val is not None:
        return cli_val
    if name in config:
        return config[name]
    return default


def _effective(args, names_defaults: dict) -> dict:
    config = _load_config(getattr(args, "config", None))
    unknown = set(config) - set(names_defaults)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return {name: _opt(args, config, name, dflt) for name, dflt in names_defaults.items()}


def _embed_params(opts: dict) -> EmbedParams:
    params = EmbedParams(
        p=float(opts["p"]),
        band_k=int(opts["band-k"]),
        k_frames=int(opts["k-frames"]),
        selection=SelectionConfig(theta=float(opts["theta"]), mode=opts["mode"]),
    )
    params.validate()
    return params


def _params_dict(params: EmbedParams, key: int) -> dict:
    return {
        "p": params.p,
        "band_k": params.band_k,
        "k_frames": params.k_frames,
        "theta": params.selection.theta,
        "mode": params.selection.mode,
        "key": key,
    }


def parse_attack_arg(text: str) -> list[AttackSpec]:
    """Parse --attack: JSON object/array, or shorthand like rotate:degrees=4."""
    text = text.strip()
    if not text:
        return []
    if text[0] in "[{":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad attack JSON: {exc}")
        items = data if isinstance(data, list) else [data]
        return [AttackSpec.from_dict(d) for d in items]
    specs = []
    for part in text.split("+"):
        kind, _, rest = part.strip().partition(":")
        params = {}
        for kv in filter(None, rest.split(",")):
            k, _, v = kv.partition("=")
            try:
                params[k.strip()] = float(v)
            except ValueError:
                raise ConfigError(f"bad attack parameter {kv!r}")
        specs.append(AttackSpec(kind, params))
    return specs


def _read_input(path, fps_str: str) -> VideoClip:
    num, _, den = str(fps_str).partition("/")
    return read_clip(path, fps=Fraction(int(num), int(den or 1)))


def _load_payload(opts) -> WatermarkPayload:
    """Payload from --payload file, else a seeded random 16-bit one."""
    if opts.get("payload"):
        try:
            return WatermarkPayload.from_file(opts["payload"])
        except ValueError as exc:
            raise ConfigError(str(exc))
    return WatermarkPayload.random(4, np.random.default_rng(int(opts["seed"])))


COMMON = {
    "p": 12.0,
    "band-k": 5,
    "k-frames": 5,
    "theta": 0.6,
    "mode": "both",
    "key": 3,
    "fps": "25",
    "seed": 0,
}


def cmd_embed(args) -> int:
    opts = _effective(args, {**COMMON, "input": None, "output": None, "payload": None, "report": None})
    if not opts["input"] or not opts["output"]:
        raise ConfigError("embed needs --input and --output")
    params = _embed_params(opts)
    key = int(opts["key"])
    clip = _read_input(opts["input"], opts["fps"])
    payload = _load_payload(opts)
    watermarked, masks = embed_clip(clip, payload, key, params)
    if all(len(m) == 0 for m in masks):
        print("error: payload not embeddable in this content (no blocks selected)", file=sys.stderr)
        return EXIT_ERROR
    write_clip(watermarked, opts["output"])
    quality = quality_report(clip, watermarked)
    group_counts = [len(m) for m in masks]
    print(
        f"embedded {payload.length} bits into {len(masks)} groups "
        f"(blocks/group min {min(group_counts)} max {max(group_counts)}), "
        f"PSNR mean {quality.psnr_mean:.2f} dB (blue {quality.psnr_channels[2]:.2f} dB)"
    )
    if opts["report"]:
        rep_dir = opts["report"]
        os.makedirs(rep_dir, exist_ok=True)
        write_json(
            {
                "command": "embed",
                "config_hash": config_hash(opts),
                "clip": str(opts["input"]),
                "output": str(opts["output"]),
                "params": _params_dict(params, key),
                "payload_bits": payload.to_bits(),
                "group_block_counts": group_counts,
                "psnr": quality.to_dict(),
            },
            os.path.join(rep_dir, "embed_report.json"),
        )
        write_csv(
            [{"group": g, "blocks": c} for g, c in enumerate(group_counts)],
            os.path.join(rep_dir, "group_blocks.csv"),
        )
        plot_psnr_frames(
            {"watermarked": list(quality.psnr_frames)},
            os.path.join(rep_dir, "psnr_frames.png"),
            title="Watermarked vs source PSNR",
        )
    return EXIT_OK


def cmd_extract(args) -> int:
    opts = _effective(
        args,
        {
            **COMMON,
            "input": None,
            "output": None,
            "payload": None,
            "n": None,
            "report": None,
            "alignment": None,
        },
    )
    if not opts["input"]:
        raise ConfigError("extract needs --input")
    reference = _load_payload(opts) if opts["payload"] else None
    if opts["n"] is not None:
        n = int(opts["n"])
    elif reference is not None:
        n = reference.n
    else:
        raise ConfigError("extract needs --n or a reference --payload to size the payload")
    params = _embed_params(opts)
    key = int(opts["key"])
    clip = _read_input(opts["input"], opts["fps"])
    if opts["alignment"]:
        with open(opts["alignment"]) as fh:
            clip = apply_alignment(clip, AlignmentInfo.from_dict(json.load(fh)))
    result = extract(clip, n, key, params)
    if opts["output"]:
        result.payload.to_file(opts["output"])
    uncovered = result.uncovered
    bits_ber = ber(reference.symbols, result.payload.symbols) if reference is not None else None
    line = f"extracted {result.payload.length} bits, mean confidence {result.confidence.mean():.3f}"
    if bits_ber is not None:
        line += f", BER {bits_ber:.4f}"
    print(line)
    if uncovered.size:
        print(f"warning: {uncovered.size} payload positions received no votes", file=sys.stderr)
    if opts["report"]:
        rep_dir = opts["report"]
        os.makedirs(rep_dir, exist_ok=True)
        write_json(
            {
                "command": "extract",
                "config_hash": config_hash(opts),
                "clip": str(opts["input"]),
                "params": _params_dict(params, key),
                "bits": result.payload.to_bits(),
                "confidence": [float(c) for c in result.confidence],
                "uncovered": [int(i) for i in uncovered],
                "ber": bits_ber,
            },
            os.path.join(rep_dir, "extract_report.json"),
        )
        write_csv(
            [
                {
                    "bit": i,
                    "symbol": int(result.payload.symbols[i]),
                    "confidence": float(result.confidence[i]),
                    "votes": int(result.votes[i]),
                    "count": int(result.counts[i]),
                }
                for i in range(result.payload.length)
            ],
            os.path.join(rep_dir, "confidence.csv"),
        )
    return EXIT_WARNING if uncovered.size else EXIT_OK


def cmd_attack(args) -> int:
    opts = _effective(
        args, {**COMMON, "input": None, "output": None, "attack": None, "alignment": None}
    )
    if not opts["input"] or not opts["output"] or not opts["attack"]:
        raise ConfigError("attack needs --input, --output and --attack")
    specs = parse_attack_arg(opts["attack"]) if isinstance(opts["attack"], str) else [
        AttackSpec.from_dict(d) for d in opts["attack"]
    ]
    clip = _read_input(opts["input"], opts["fps"])
    attacked, info = apply_chain(clip, specs)
    write_clip(attacked, opts["output"])
    align_path = opts["alignment"] or (str(opts["output"]) + ".align.json")
    write_json(info.to_dict(), align_path)
    print(f"applied {len(specs)} attack step(s); alignment data in {align_path}")
    return EXIT_OK


def _battery_from_opt(value) -> list[tuple[str, list[AttackSpec], float]]:
    if value in (None, "default"):
        return list(DEFAULT_BATTERY)
    if value == "none":
        return []
    with open(value) as fh:
        entries = json.load(fh)
    battery = []
    for e in entries:
        specs = [AttackSpec.from_dict(d) for d in e.get("attacks", [])]
        battery.append((e["label"], specs, float(e.get("threshold", 1.0))))
    return battery


def _corpus_for_evaluate(opts) -> list[tuple[str, VideoClip]]:
    if opts["input"]:
        name = os.path.splitext(os.path.basename(str(opts["input"])))[0]
        return [(name, _read_input(opts["input"], opts["fps"]))]
    frames = int(opts["frames"])
    return default_corpus(base_seed=int(opts["seed"]) + 7, n_frames=frames)


def cmd_evaluate(args) -> int:
    opts = _effective(
        args,
        {
            **COMMON,
            "input": None,
            "payload": None,
            "report": None,
            "battery": None,
            "attack": None,
            "frames": 100,
        },
    )
    params = _embed_params(opts)
    key = int(opts["key"])
    if opts["attack"]:
        battery = [("custom", parse_attack_arg(opts["attack"]), 1.0)]
    else:
        battery = _battery_from_opt(opts["battery"])
    payload = _load_payload(opts)

    rows = []
    psnr_series = {}
    for clip_name, clip in _corpus_for_evaluate(opts):
        watermarked, masks = embed_clip(clip, payload, key, params)
        if all(len(m) == 0 for m in masks):
            print(f"error: payload not embeddable in {clip_name}", file=sys.stderr)
            return EXIT_ERROR
        quality = quality_report(clip, watermarked)
        psnr_series[clip_name] = list(quality.psnr_frames)
        for label, specs, threshold in battery:
            if specs:
                attacked, info = apply_chain(watermarked, specs)
                aligned = apply_alignment(attacked, info)
            else:
                aligned = watermarked
            result = extract(aligned, payload.n, key, params)
            row_ber = ber(payload.symbols, result.payload.symbols)
            rows.append(
                {
                    "clip": clip_name,
                    "attack": label,
                    "ber": round(row_ber, 6),
                    "psnr_mean": round(quality.psnr_mean, 3),
                    "psnr_rgb": [round(v, 3) for v in quality.psnr_channels],
                    "params": _params_dict(params, key),
                    "threshold": threshold,
                    "pass": bool(row_ber <= threshold),
                }
            )
            print(
                f"[{clip_name}] {label}: BER {row_ber * 100:.2f}% "
                f"(threshold {threshold * 100:.0f}%) {'ok' if row_ber <= threshold else 'FAIL'}"
            )

    table_cols = ["clip", "attack", "ber", "psnr_mean", "threshold", "pass"]
    print()
    print(format_table(rows, table_cols))
    if opts["report"]:
        rep_dir = opts["report"]
        os.makedirs(rep_dir, exist_ok=True)
        write_json(
            {
                "command": "evaluate",
                "config_hash": config_hash(opts),
                "params": _params_dict(params, key),
                "payload_bits": payload.to_bits(),
                "rows": rows,
            },
            os.path.join(rep_dir, "evaluate_report.json"),
        )
        write_csv(
            [{k: r[k] for k in table_cols} for r in rows],
            os.path.join(rep_dir, "evaluate_rows.csv"),
        )
        if rows:
            first_clip = rows[0]["clip"]
            clip_rows = [r for r in rows if r["clip"] == first_clip]
            plot_ber_bars(
                [r["attack"] for r in clip_rows],
                [r["ber"] for r in clip_rows],
                os.path.join(rep_dir, "ber_by_attack.png"),
                title=f"BER by attack ({first_clip})",
            )
        if psnr_series:
            plot_psnr_frames(psnr_series, os.path.join(rep_dir, "psnr_frames.png"))
    return EXIT_OK if all(r["pass"] for r in rows) else EXIT_ERROR


def cmd_calibrate(args) -> int:
    opts = _effective(
        args,
        {
            **COMMON,
            "input": None,
            "payload": None,
            "report": None,
            "p-range": "6:20:2",
            "frames": 50,
        },
    )
    try:
        lo_s, hi_s, step_s = str(opts["p-range"]).split(":")
        lo, hi, step = float(lo_s), float(hi_s), float(step_s)
    except ValueError:
        raise ConfigError(f"bad --p-range {opts['p-range']!r}, expected lo:hi:step")
    if step <= 0 or hi < lo:
        raise ConfigError(f"empty p range {opts['p-range']!r}")
    p_values = [round(lo + i * step, 6) for i in range(int((hi - lo) / step) + 1)]

    key = int(opts["key"])
    if opts["input"]:
        clip = _read_input(opts["input"], opts["fps"])
    else:
        clip = generate_clip(int(opts["seed"]) + 7, n_frames=int(opts["frames"]))
    payload = _load_payload(opts)

    sweep = []
    for p in p_values:
        params = _embed_params({**opts, "p": p})
        watermarked, _ = embed_clip(clip, payload, key, params)
        quality = quality_report(clip, watermarked)
        result = extract(watermarked, payload.n, key, params)
        row_ber = ber(payload.symbols, result.payload.symbols)
        sweep.append({"p": p, "psnr_mean": round(quality.psnr_mean, 3), "ber": row_ber})
        print(f"p={p:g}: PSNR {quality.psnr_mean:.2f} dB, zero-attack BER {row_ber * 100:.2f}%")

    zero_rows = [s for s in sweep if s["ber"] == 0.0]
    recommended = min((s["p"] for s in zero_rows), default=None)
    if recommended is None:
        print("error: no p in range reached zero-attack BER 0", file=sys.stderr)
    else:
        print(f"recommended p = {recommended:g} (smallest with BER 0, best PSNR)")
    if opts["report"]:
        rep_dir = opts["report"]
        os.makedirs(rep_dir, exist_ok=True)
        write_json(
            {
                "command": "calibrate",
                "config_hash": config_hash(opts),
                "sweep": sweep,
                "recommended_p": recommended,
            },
            os.path.join(rep_dir, "calibrate_report.json"),
        )
        write_csv(sweep, os.path.join(rep_dir, "calibration_sweep.csv"))
        plot_calibration_sweep(
            [s["p"] for s in sweep],
            [s["psnr_mean"] for s in sweep],
            [s["ber"] for s in sweep],
            os.path.join(rep_dir, "calibration_sweep.png"),
        )
    return EXIT_OK if recommended is not None else EXIT_ERROR


def cmd_gen_corpus(args) -> int:
    opts = _effective(
        args,
        {
            "output": None,
            "seed": 0,
            "width": 352,
            "height": 288,
            "frames": 100,
            "fps": "25",
            "kind": None,
        },
    )
    if not opts["output"]:
        raise ConfigError("gen-corpus needs --output directory")
    out_dir = str(opts["output"])
    os.makedirs(out_dir, exist_ok=True)
    num, _, den = str(opts["fps"]).partition("/")
    fps = Fraction(int(num), int(den or 1))
    w, h, n = int(opts["width"]), int(opts["height"]), int(opts["frames"])
    seed = int(opts["seed"]) + 7

    if opts["kind"]:
        if opts["kind"] not in CORPUS_KINDS:
            raise ConfigError(f"unknown kind {opts['kind']!r}, expected one of {CORPUS_KINDS}")
        clips = [(f"{opts['kind']}_a", generate_clip(seed, w, h, n, fps, opts["kind"]))]
    else:
        clips = default_corpus(base_seed=seed, width=w, height=h, n_frames=n, fps=fps)
    manifest = []
    for name, clip in clips:
        path = os.path.join(out_dir, f"{name}.y4m")
        write_clip(clip, path)
        manifest.append(
            {"name": name, "path": path, "width": clip.width, "height": clip.height, "frames": len(clip)}
        )
        print(f"wrote {path} ({clip.width}x{clip.height}, {len(clip)} frames)")
    write_json(
        {"command": "gen-corpus", "config_hash": config_hash(opts), "clips": manifest},
        os.path.join(out_dir, "manifest.json"),
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chanmark",
        description="Blind video watermarking: channel-referenced band-sum embedding "
        "with texture/keypoint block selection, plus an attack/evaluation harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, fps=True):
        p.add_argument("--config", help="JSON config file; flags override its keys")
        p.add_argument("--key", type=int, help="Arnold scrambling key (default 3)")
        p.add_argument("--p", type=float, help="embedding strength (default 12.0)")
        p.add_argument("--band-k", type=int, help="DCT anti-diagonal index (default 5)")
        p.add_argument("--k-frames", type=int, help="frames per embedding group (default 5)")
        p.add_argument("--theta", type=float, help="texture threshold in (0,1) (default 0.6)")
        p.add_argument("--mode", choices=["both", "texture", "keypoints"], help="block selection mode")
        p.add_argument("--seed", type=int, help="RNG seed for generated payloads/clips")
        if fps:
            p.add_argument("--fps", help="frame rate for PNG-directory inputs, e.g. 25 or 30000/1001")

    p_embed = sub.add_parser("embed", help="embed a payload into a clip")
    p_embed.add_argument("--input", help="source clip (.y4m or PNG directory)")
    p_embed.add_argument("--output", help="watermarked clip path")
    p_embed.add_argument("--payload", help="payload bit-string file (length must be square)")
    p_embed.add_argument("--report", help="directory for embed report (JSON/CSV/PNG)")
    add_common(p_embed)
    p_embed.set_defaults(func=cmd_embed)

    p_extract = sub.add_parser("extract", help="blind-extract a payload from a clip")
    p_extract.add_argument("--input", help="clip to read (.y4m or PNG directory)")
    p_extract.add_argument("--output", help="where to write extracted bits")
    p_extract.add_argument("--payload", help="reference payload file (enables BER, sets n)")
    p_extract.add_argument("--n", type=int, help="payload side length (bits = n*n)")
    p_extract.add_argument("--alignment", help="alignment JSON from the attack command, applied first")
    p_extract.add_argument("--report", help="directory for extraction report")
    add_common(p_extract)
    p_extract.set_defaults(func=cmd_extract)

    p_attack = sub.add_parser("attack", help="apply an attack chain, saving alignment data")
    p_attack.add_argument("--input", help="clip to attack")
    p_attack.add_argument("--output", help="attacked clip path")
    p_attack.add_argument("--attack", help="attack spec: JSON or shorthand (rotate:degrees=4+tlpf)")
    p_attack.add_argument("--alignment", help="alignment JSON path (default <output>.align.json)")
    add_common(p_attack)
    p_attack.set_defaults(func=cmd_attack)

    p_eval = sub.add_parser("evaluate", help="run the attack battery and report BER/PSNR")
    p_eval.add_argument("--input", help="clip to evaluate (default: built-in synthetic corpus)")
    p_eval.add_argument("--payload", help="payload file (default: random 16-bit)")
    p_eval.add_argument("--battery", help="'default', 'none', or JSON battery file")
    p_eval.add_argument("--attack", help="evaluate a single custom attack instead of the battery")
    p_eval.add_argument("--frames", type=int, help="frames per generated corpus clip (default 100)")
    p_eval.add_argument("--report", help="directory for evaluation report")
    add_common(p_eval)
    p_eval.set_defaults(func=cmd_evaluate)

    p_cal = sub.add_parser("calibrate", help="sweep embedding strength p")
    p_cal.add_argument("--input", help="clip to calibrate on (default: synthetic)")
    p_cal.add_argument("--payload", help="payload file (default: random 16-bit)")
    p_cal.add_argument("--p-range", help="sweep as lo:hi:step (default 6:20:2)")
    p_cal.add_argument("--frames", type=int, help="frames of the synthetic clip (default 50)")
    p_cal.add_argument("--report", help="directory for sweep report")
    add_common(p_cal)
    p_cal.set_defaults(func=cmd_calibrate)

    p_gen = sub.add_parser("gen-corpus", help="write the synthetic test corpus")
    p_gen.add_argument("--output", help="output directory")
    p_gen.add_argument("--seed", type=int, help="corpus seed (default 0)")
    p_gen.add_argument("--width", type=int, help="frame width (default 352)")
    p_gen.add_argument("--height", type=int, help="frame height (default 288)")
    p_gen.add_argument("--frames", type=int, help="frames per clip (default 100)")
    p_gen.add_argument("--fps", help="frame rate (default 25)")
    p_gen.add_argument("--kind", help=f"single clip kind instead of the trio: {CORPUS_KINDS}")
    p_gen.add_argument("--config", help="JSON config file; flags override its keys")
    p_gen.set_defaults(func=cmd_gen_corpus)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
