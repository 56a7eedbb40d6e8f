"""Command-line interface.

Subcommands::

    gen           generate pilot/eval latent pairs and write SEQL files
    fit           fit one equalizer on a pilot file and save it
    eval          run a saved equalizer against a channel on paired latents
    sweep-pilots  PSNR/MSE versus pilot count (CSV)
    sweep-snr     PSNR/MSE versus alignment SNR (CSV)
    params        print aligner parameter-count table

Exit codes: 0 success, 1 invalid input or configuration, 2 runtime error.
"""

import argparse
import sys

import numpy as np

from . import channel, tensorio
from .equalizers import (
    LinearEqualizer,
    NeuralEqualizer,
    PfeEqualizer,
    count_params,
    load_equalizer,
    save_equalizer,
)
from .errors import ValidationError
from .harness import (
    ExperimentConfig,
    build_scenario,
    config_from_pairs,
    emit_csv,
    load_config,
    parse_config_text,
    run_pilot_sweep,
    run_snr_sweep,
)
from .metrics import PsnrConfig, psnr_from_mse
from .rng import TAG_EVAL_CHANNEL, stream


class _UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _layout(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("layout must be C,H,W")
    return tuple(int(p) for p in parts)


def _build_parser():
    parser = _Parser(prog="semeq", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="print aligner parameter counts")
    p.add_argument("--d", type=int, default=9216, help="input latent width")
    p.add_argument("--m", type=int, default=9216, help="output latent width")
    p.add_argument("--channels", type=int, default=16, help="conv channel count")

    p = sub.add_parser("gen", help="generate pilot and evaluation pairs")
    p.add_argument("--config", help="key-value config file")
    p.add_argument("--scenario", choices=("mismatch", "toy-codec"))
    p.add_argument("--family")
    p.add_argument("--d", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--layout", type=_layout, help="C,H,W for conv-local latents")
    p.add_argument("--image-size", type=int)
    p.add_argument("--latent-dim", type=int)
    p.add_argument("--seed-tx", type=int)
    p.add_argument("--seed-rx", type=int)
    p.add_argument("--count", type=int, help="pilot pool size")
    p.add_argument("--eval-count", type=int)
    p.add_argument("--fading", action="store_true",
                   help="attach realized fading coefficients to the pilot file")
    p.add_argument("--out", required=True, help="output prefix (writes <out>_train.seql, <out>_eval.seql)")

    p = sub.add_parser("fit", help="fit one equalizer on a pilot file")
    p.add_argument("--config", help="key-value config file with training knobs")
    p.add_argument("--pilots", required=True, help="pilot SEQL container")
    p.add_argument("--equalizer", required=True,
                   choices=("linear", "mlp", "cnn1", "cnn2", "pfe"))
    p.add_argument("--snr-align", type=float, help="alignment SNR in dB (omit for noiseless)")
    p.add_argument("--fading", action="store_true")
    p.add_argument("--layout", type=_layout, help="C,H,W input layout for cnn aligners")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lr", type=float)
    p.add_argument("--weight-decay", type=float)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--max-epochs", type=int, default=2000)
    p.add_argument("--patience", type=int, default=20)
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="evaluate a saved equalizer over a channel")
    p.add_argument("--equalizer", required=True, help="equalizer SEQL container")
    p.add_argument("--data", required=True, help="pilot container with held-out pairs")
    p.add_argument("--snr", type=float, required=True, help="evaluation SNR in dB")
    p.add_argument("--fading", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--peak", type=float, default=1.0)

    for name, help_text in (
        ("sweep-pilots", "PSNR/MSE versus pilot count"),
        ("sweep-snr", "PSNR/MSE versus alignment SNR"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="key-value config file")
        p.add_argument("--out", help="CSV path (overrides config)")
        p.add_argument("--workers", type=int, help="worker threads (overrides config)")
        p.add_argument("--timing", action="store_true", help="include fit wall-clock column")

    return parser


def _cmd_params(args):
    rows = [
        ("linear", f"d={args.d} m={args.m}", count_params("linear", (args.d, args.m))),
        ("mlp", f"d={args.d} m={args.m} h={args.d}", count_params("mlp", (args.d, args.m))),
        ("cnn1", f"c_in={args.channels} c_out={args.channels} k=5",
         count_params("cnn1", (args.channels, args.channels))),
        ("cnn2", f"c={args.channels} k=5", count_params("cnn2", (args.channels,))),
    ]
    width = max(len(r[1]) for r in rows)
    print(f"{'aligner':<8} {'dims':<{width}} {'parameters':>14}")
    for name, dims, count in rows:
        print(f"{name:<8} {dims:<{width}} {count:>14,}")
    return 0


def _config_for_gen(args):
    pairs = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            pairs = parse_config_text(fh.read())
    overrides = {
        "scenario": args.scenario,
        "family": args.family,
        "d": args.d,
        "m": args.m,
        "image_size": args.image_size,
        "latent_dim": args.latent_dim,
        "seed_tx": args.seed_tx,
        "seed_rx": args.seed_rx,
        "pool_size": args.count,
        "eval_size": args.eval_count,
    }
    if args.layout is not None:
        overrides.update(
            {"layout_c": args.layout[0], "layout_h": args.layout[1], "layout_w": args.layout[2]}
        )
    for key, value in overrides.items():
        if value is not None:
            pairs[key] = [str(value)]
    # gen only materializes pools; the sweep grid keys are irrelevant here
    pairs["pilots"] = ["1"]
    pairs["equalizer"] = ["linear"]
    return config_from_pairs(pairs)


def _cmd_gen(args):
    cfg = _config_for_gen(args)
    scenario = build_scenario(cfg)
    train_path = f"{args.out}_train.seql"
    eval_path = f"{args.out}_eval.seql"
    tensorio.write_pilot_set(
        train_path,
        scenario.x_pool,
        scenario.y_pool,
        fading=scenario.pilot_fading if args.fading else None,
    )
    tensorio.write_pilot_set(eval_path, scenario.x_eval, scenario.y_eval)
    print(f"wrote {train_path} ({len(scenario.x_pool)} pairs, d={scenario.d}, m={scenario.m})")
    print(f"wrote {eval_path} ({len(scenario.x_eval)} pairs)")
    return 0


def _cmd_fit(args):
    x, y, fading = tensorio.read_pilot_set(args.pilots)
    kind = args.equalizer
    if kind == "linear":
        noise_var = channel.real_noise_var(args.snr_align) if args.snr_align is not None else 0.0
        eq = LinearEqualizer(noise_var=noise_var)
        eq.fit(x, y, fading=fading if args.fading else None)
    elif kind == "pfe":
        n_refs = len(x) - (len(x) % 2)
        eq = PfeEqualizer().fit(x[:n_refs], y[:n_refs])
    else:
        eq = NeuralEqualizer(
            arch=kind,
            layout=args.layout,
            snr_align_db=args.snr_align,
            fading=args.fading,
            learning_rate=args.lr,
            weight_decay=args.weight_decay,
            batch_size=args.batch_size,
            max_epochs=args.max_epochs,
            patience=args.patience,
            seed=args.seed,
        )
        eq.fit(x, y)
    save_equalizer(args.out, eq)
    print(f"wrote {args.out} ({kind}, {len(x)} pilots)")
    return 0


def _cmd_eval(args):
    eq = load_equalizer(args.equalizer)
    x, y, _ = tensorio.read_pilot_set(args.data)
    coeffs = eq.pre_transform(x)
    if coeffs.shape[1] % 2 != 0:
        raise ValidationError("transmitted width must be even")
    half = coeffs.shape[1] // 2
    ce = coeffs[:, 0::2] + 1j * coeffs[:, 1::2]
    sigma2 = channel.snr_to_sigma2(args.snr)
    cfg_psnr = PsnrConfig(peak=args.peak)
    total_psnr = 0.0
    total_mse = 0.0
    for i in range(len(x)):
        g = stream(args.seed, TAG_EVAL_CHANNEL, i)
        h = channel.draw_fading(g, args.repeats)
        noise = (
            g.standard_normal((args.repeats, half))
            + 1j * g.standard_normal((args.repeats, half))
        ) * np.sqrt(0.5)
        for r in range(args.repeats):
            received = ce[i] * h[r] if args.fading else ce[i]
            if sigma2 > 0:
                received = received + np.sqrt(sigma2) * noise[r]
            flat = np.empty(coeffs.shape[1])
            flat[0::2] = received.real
            flat[1::2] = received.imag
            y_hat = eq.transform(flat[None, :])[0]
            err = float(np.mean((y_hat - y[i]) ** 2))
            total_mse += err
            total_psnr += psnr_from_mse(err, cfg_psnr)
    count = len(x) * args.repeats
    print(f"n={count} mean_psnr={total_psnr / count:.6f} mean_mse={total_mse / count:.9e}")
    return 0


def _cmd_sweep(args, runner):
    cfg = load_config(args.config)
    if args.workers is not None or args.out is not None:
        updates = {}
        if args.workers is not None:
            updates["workers"] = args.workers
        if args.out is not None:
            updates["out"] = args.out
        from dataclasses import replace

        cfg = replace(cfg, **updates)
    if cfg.out is None:
        raise ValidationError("no output path: set 'out' in the config or pass --out")
    report = runner(cfg)
    emit_csv(report, cfg.out, include_timing=args.timing)
    print(f"wrote {cfg.out} ({len(report.rows)} rows)")
    return 0


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "params":
            return _cmd_params(args)
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "fit":
            return _cmd_fit(args)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "sweep-pilots":
            return _cmd_sweep(args, run_pilot_sweep)
        if args.command == "sweep-snr":
            return _cmd_sweep(args, run_snr_sweep)
        raise ValidationError(f"unknown command {args.command!r}")
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
