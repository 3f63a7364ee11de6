"""Command-line surface tying generation, indicators, triggers, and sweeps together.

Every subcommand is reproducible byte-for-byte given identical flags and seed,
writes a sidecar JSON echoing its full resolved configuration, and renders a
figure next to the delimited output unless --no-plot is given. Exit codes:
0 ok, 1 I/O failure, 2 validation failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .errors import ValidationError
from .fields import load_series, write_series
from .harness import (
    WHOLE_FIELD,
    adaptive_loop,
    sweep_samples,
    sweep_tau,
    write_sweep_csv,
    write_sweep_summary,
    write_workflow_csv,
)
from .indicators import (
    C_DEFAULTS,
    KIND_C,
    KIND_P,
    P_DEFAULTS,
    VARIANT_COV,
    VARIANT_SCALED,
    IndicatorConfig,
    indicator_series,
    read_indicator_csv,
    write_indicator_csv,
)
from .quantiles import Sampling
from .synth import (
    SynthConfig,
    generate_ensemble,
    load_ground_truth_window,
    load_synth_config,
    synth_config_to_dict,
    write_ground_truth,
)
from .triggers import (
    FROM_ABOVE,
    FROM_BELOW,
    GroundTruthWindow,
    TriggerConfig,
    classify,
    detect_crossing,
    write_trigger_report,
)

TAU_GUIDANCE = "thresholds in [0.01, 0.05] work well for the default C indicator"


def _add_source_args(p: argparse.ArgumentParser, extra: bool = False) -> None:
    g = p.add_argument_group("input (exactly one)")
    g.add_argument("--manifest", type=Path, help="field series manifest (or .csv fixture)")
    g.add_argument("--synth-config", type=Path, help="synthetic ensemble config JSON")
    if extra:
        g.add_argument("--from-csv", type=Path,
                       help="precomputed indicator series CSV (timestep,value,defined)")


def _add_indicator_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("indicator")
    g.add_argument("--kind", choices=[KIND_C, KIND_P], default=KIND_C,
                   help="indicator to compute (default: %(default)s)")
    g.add_argument("--alpha", type=float, default=None,
                   help=f"lower percentile (defaults: C {C_DEFAULTS['alpha']}, P {P_DEFAULTS['alpha']})")
    g.add_argument("--beta", type=float, default=None,
                   help=f"upper percentile (defaults: C {C_DEFAULTS['beta']}, P {P_DEFAULTS['beta']})")
    g.add_argument("--gamma", type=float, default=None,
                   help=f"reference percentile, P only (default: {P_DEFAULTS['gamma']})")
    g.add_argument("--grid-step", type=float, default=0.01,
                   help="percentile grid step for the C band (default: %(default)s)")
    g.add_argument("--variant", choices=[VARIANT_COV, VARIANT_SCALED], default=VARIANT_COV,
                   help="C formula variant (default: %(default)s)")


def _add_sampling_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("sampling")
    g.add_argument("--k-per-rank", default=None,
                   help="samples per rank (integer), 'all' for the deterministic whole-field "
                        "sample, or omit for exact percentiles")
    g.add_argument("--seed", type=int, default=0,
                   help="master seed for all randomness (default: %(default)s)")


def _add_trigger_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("trigger")
    g.add_argument("--tau", type=float, required=True, help=f"threshold ({TAU_GUIDANCE})")
    g.add_argument("--direction", choices=[FROM_BELOW, FROM_ABOVE], default=FROM_BELOW,
                   help="crossing direction (default: %(default)s)")
    g.add_argument("--confirm-steps", type=int, default=0,
                   help="defined values that must stay past the threshold (default: %(default)s)")


def _add_window_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("classification window")
    g.add_argument("--window", type=int, nargs=2, metavar=("LO", "HI"), default=None,
                   help="acceptable fire window (inclusive timesteps)")
    g.add_argument("--ground-truth", type=Path, default=None,
                   help="ground-truth JSON written by the synth subcommand")


def _add_plot_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--plot", action=argparse.BooleanOptionalAction, default=True,
                   help="render a figure next to the output")


def _parse_k(value):
    if value is None:
        return None
    if value == WHOLE_FIELD:
        return WHOLE_FIELD
    try:
        return int(value)
    except ValueError as exc:
        raise ValidationError(f"--k-per-rank must be an integer or '{WHOLE_FIELD}'") from exc


def _indicator_config(args) -> IndicatorConfig:
    defaults = C_DEFAULTS if args.kind == KIND_C else P_DEFAULTS
    return IndicatorConfig(
        kind=args.kind,
        alpha=defaults["alpha"] if args.alpha is None else args.alpha,
        beta=defaults["beta"] if args.beta is None else args.beta,
        gamma=(defaults.get("gamma") if args.gamma is None else args.gamma)
        if args.kind == KIND_P else args.gamma,
        grid_step=args.grid_step,
        variant=args.variant,
    )


def _sampling(args) -> Sampling | None:
    k = _parse_k(args.k_per_rank)
    if k is None:
        return None
    return Sampling(k_per_rank=None if k == WHOLE_FIELD else k, seed=args.seed)


def _resolve_series_and_window(args):
    """Load the field series and, when available, the classification window."""
    window = None
    if getattr(args, "window", None) is not None:
        window = GroundTruthWindow(t_lo=args.window[0], t_hi=args.window[1])
    elif getattr(args, "ground_truth", None) is not None:
        window = load_ground_truth_window(args.ground_truth)
    sources = [s for s in (args.manifest, args.synth_config) if s is not None]
    if len(sources) != 1:
        raise ValidationError("give exactly one of --manifest or --synth-config")
    if args.manifest is not None:
        return load_series(args.manifest), None, window
    config = load_synth_config(args.synth_config)
    series, truth = generate_ensemble(config)
    if window is None:
        window = truth.window
    return series, config, window


def _write_sidecar(out: Path, payload: dict) -> Path:
    sidecar = out.with_name(out.stem + ".config.json")
    sidecar.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")
    return sidecar


def _indicator_payload(config: IndicatorConfig, args) -> dict:
    payload = {
        "indicator": dataclasses.asdict(config),
        "k_per_rank": getattr(args, "k_per_rank", None),
        "seed": args.seed,
    }
    for attr in ("manifest", "synth_config", "from_csv"):
        value = getattr(args, attr, None)
        if value is not None:
            payload["input"] = str(value)
    return payload


def cmd_synth(args) -> int:
    config = load_synth_config(args.config) if args.config else SynthConfig()
    overrides = {
        name: getattr(args, name)
        for name in ("n_steps", "n_ranks", "points_per_rank", "t_ignite",
                     "window_halfwidth", "seed")
        if getattr(args, name) is not None
    }
    if overrides:
        config = dataclasses.replace(config, **overrides)
    out_dir = Path(args.out)
    series, truth = generate_ensemble(config)
    manifest = write_series(series, out_dir, prefix=args.prefix)
    write_ground_truth(truth, out_dir / f"{args.prefix}_groundtruth.json")
    _write_sidecar(out_dir / args.prefix, {
        "subcommand": "synth",
        "synth": synth_config_to_dict(config),
        "prefix": args.prefix,
    })
    if args.plot:
        from .figures import save_percentile_bands_figure

        save_percentile_bands_figure(series, out_dir / f"{args.prefix}_percentiles.png",
                                     window=truth.window)
    print(manifest)
    return 0


def cmd_indicator(args) -> int:
    series, synth_config, window = _resolve_series_and_window(args)
    config = _indicator_config(args)
    iseries = indicator_series(series, config, _sampling(args))
    out = Path(args.out)
    write_indicator_csv(iseries, out)
    payload = {"subcommand": "indicator", **_indicator_payload(config, args)}
    if synth_config is not None:
        payload["synth"] = synth_config_to_dict(synth_config)
    _write_sidecar(out, payload)
    if args.plot:
        from .figures import save_indicator_figure

        save_indicator_figure(iseries, out.with_suffix(".png"), window=window)
    print(out)
    return 0


def cmd_trigger(args) -> int:
    trigger = TriggerConfig(tau=args.tau, direction=args.direction,
                            confirm_steps=args.confirm_steps)
    payload: dict = {"subcommand": "trigger", "trigger": dataclasses.asdict(trigger)}
    window = None
    if args.from_csv is not None:
        if args.manifest is not None or args.synth_config is not None:
            raise ValidationError("--from-csv cannot be combined with --manifest/--synth-config")
        iseries = read_indicator_csv(args.from_csv)
        if args.window is not None:
            window = GroundTruthWindow(t_lo=args.window[0], t_hi=args.window[1])
        elif args.ground_truth is not None:
            window = load_ground_truth_window(args.ground_truth)
    else:
        series, synth_config, window = _resolve_series_and_window(args)
        config = _indicator_config(args)
        iseries = indicator_series(series, config, _sampling(args))
        payload.update(_indicator_payload(config, args))
        if synth_config is not None:
            payload["synth"] = synth_config_to_dict(synth_config)
    result = detect_crossing(iseries, trigger)
    classification = classify(result, window) if window is not None else None
    out = Path(args.out)
    write_trigger_report(result, out, classification)
    _write_sidecar(out, payload)
    if result.fired:
        print(f"fired at timestep {result.fire_timestep}"
              + (f" ({classification})" if classification else ""))
    else:
        print("did not fire")
    return 0


def _tau_values(args) -> list[float]:
    if args.tau is not None:
        if args.tau_min is not None or args.tau_max is not None:
            raise ValidationError("give either --tau or a --tau-min/--tau-max/--tau-step grid")
        values = [float(v) for v in args.tau.split(",") if v.strip()]
        if not values:
            raise ValidationError("--tau list is empty")
        return values
    if args.tau_min is None or args.tau_max is None:
        raise ValidationError("need --tau or both --tau-min and --tau-max")
    lo, hi, step = args.tau_min, args.tau_max, args.tau_step
    if step <= 0 or hi < lo:
        raise ValidationError(f"bad tau grid: [{lo}, {hi}] step {step}")
    n_intervals = round((hi - lo) / step)
    if abs((hi - lo) - n_intervals * step) > 1e-9:
        raise ValidationError(f"--tau-step {step} does not divide [{lo}, {hi}]")
    return [round(lo + i * step, 12) for i in range(n_intervals + 1)]


def cmd_sweep_tau(args) -> int:
    series, synth_config, window = _resolve_series_and_window(args)
    config = _indicator_config(args)
    table = sweep_tau(
        series, config, _tau_values(args),
        k_per_rank=_parse_k(args.k_per_rank), seed=args.seed,
        direction=args.direction, confirm_steps=args.confirm_steps, window=window,
    )
    out = Path(args.out)
    write_sweep_csv(table, out)
    write_sweep_summary(table, out.with_suffix(".summary.json"))
    payload = {
        "subcommand": "sweep-tau",
        "tau_values": [row.value for row in table.rows],
        "direction": args.direction,
        "confirm_steps": args.confirm_steps,
        **_indicator_payload(config, args),
    }
    if synth_config is not None:
        payload["synth"] = synth_config_to_dict(synth_config)
    _write_sidecar(out, payload)
    if args.plot:
        from .figures import save_tau_sweep_figure

        save_tau_sweep_figure(table, out.with_suffix(".png"), window=window)
    print(out)
    return 0


def cmd_sweep_samples(args) -> int:
    series, synth_config, window = _resolve_series_and_window(args)
    config = _indicator_config(args)
    trigger = TriggerConfig(tau=args.tau, direction=args.direction,
                            confirm_steps=args.confirm_steps)
    k_values = [v.strip() for v in args.k.split(",") if v.strip()]
    if not k_values:
        raise ValidationError("--k list is empty")
    k_parsed = [_parse_k(v) for v in k_values]
    source = synth_config if (args.fresh_field and synth_config is not None) else series
    table = sweep_samples(
        source, config, trigger, k_parsed, args.realizations, args.seed,
        fresh_field=args.fresh_field, window=window,
    )
    out = Path(args.out)
    write_sweep_csv(table, out)
    write_sweep_summary(table, out.with_suffix(".summary.json"))
    payload = {
        "subcommand": "sweep-samples",
        "k_values": k_values,
        "realizations": args.realizations,
        "fresh_field": args.fresh_field,
        "trigger": dataclasses.asdict(trigger),
        **_indicator_payload(config, args),
    }
    if synth_config is not None:
        payload["synth"] = synth_config_to_dict(synth_config)
    _write_sidecar(out, payload)
    if args.plot:
        from .figures import save_samples_sweep_figure

        save_samples_sweep_figure(table, out.with_suffix(".png"), window=window)
    print(out)
    return 0


def cmd_adaptive(args) -> int:
    series, synth_config, _ = _resolve_series_and_window(args)
    config = _indicator_config(args)
    trigger = TriggerConfig(tau=args.tau, direction=args.direction,
                            confirm_steps=args.confirm_steps)
    trace = adaptive_loop(series, config, trigger, args.coarse_every, args.fine_every,
                          sampling=_sampling(args))
    out = Path(args.out)
    write_workflow_csv(trace, out)
    payload = {
        "subcommand": "adaptive",
        "coarse_every": args.coarse_every,
        "fine_every": args.fine_every,
        "trigger": dataclasses.asdict(trigger),
        **_indicator_payload(config, args),
    }
    if synth_config is not None:
        payload["synth"] = synth_config_to_dict(synth_config)
    _write_sidecar(out, payload)
    if args.plot:
        from .figures import save_adaptive_figure

        save_adaptive_figure(trace, out.with_suffix(".png"))
    if trace.switch_timestep is None:
        print("no switch; stayed coarse")
    else:
        print(f"switched to fine output at timestep {trace.switch_timestep}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trigdet",
        description="Percentile-based trigger detection over scalar field time series.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("synth", help="generate a synthetic ensemble with known ground truth")
    p.add_argument("--config", type=Path, default=None, help="synth config JSON (else defaults)")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--prefix", default="synth", help="file prefix (default: %(default)s)")
    for name in ("--n-steps", "--n-ranks", "--points-per-rank", "--t-ignite",
                 "--window-halfwidth", "--seed"):
        p.add_argument(name, type=int, default=None, help="override the config field")
    _add_plot_arg(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("indicator", help="indicator series CSV from a field series")
    _add_source_args(p)
    _add_indicator_args(p)
    _add_sampling_args(p)
    _add_window_args(p)
    p.add_argument("--out", type=Path, required=True, help="output CSV path")
    _add_plot_arg(p)
    p.set_defaults(func=cmd_indicator)

    p = sub.add_parser("trigger", help="detect the first threshold crossing",
                       epilog=f"Tip: {TAU_GUIDANCE}.")
    _add_source_args(p, extra=True)
    _add_indicator_args(p)
    _add_sampling_args(p)
    _add_trigger_args(p)
    _add_window_args(p)
    p.add_argument("--out", type=Path, required=True, help="output report JSON path")
    p.set_defaults(func=cmd_trigger)

    p = sub.add_parser("sweep-tau", help="fire time as a function of threshold",
                       epilog=f"Tip: {TAU_GUIDANCE}.")
    _add_source_args(p)
    _add_indicator_args(p)
    _add_sampling_args(p)
    g = p.add_argument_group("threshold grid")
    g.add_argument("--tau", default=None, help="comma-separated threshold list")
    g.add_argument("--tau-min", type=float, default=None)
    g.add_argument("--tau-max", type=float, default=None)
    g.add_argument("--tau-step", type=float, default=0.005)
    p.add_argument("--direction", choices=[FROM_BELOW, FROM_ABOVE], default=FROM_BELOW)
    p.add_argument("--confirm-steps", type=int, default=0)
    _add_window_args(p)
    p.add_argument("--out", type=Path, required=True, help="output CSV path")
    _add_plot_arg(p)
    p.set_defaults(func=cmd_sweep_tau)

    p = sub.add_parser("sweep-samples", help="fire-time variability vs samples per rank")
    _add_source_args(p)
    _add_indicator_args(p)
    _add_trigger_args(p)
    _add_window_args(p)
    p.add_argument("--k", required=True,
                   help="comma-separated samples-per-rank values (integers or 'all')")
    p.add_argument("--realizations", type=int, default=50,
                   help="realizations per k (default: %(default)s)")
    p.add_argument("--seed", type=int, default=0, help="master seed (default: %(default)s)")
    p.add_argument("--fresh-field", action="store_true",
                   help="regenerate the synthetic field per realization (synth source only)")
    p.add_argument("--out", type=Path, required=True, help="output CSV path")
    _add_plot_arg(p)
    p.set_defaults(func=cmd_sweep_samples)

    p = sub.add_parser("adaptive", help="coarse/fine workflow walk driven by the trigger")
    _add_source_args(p)
    _add_indicator_args(p)
    _add_sampling_args(p)
    _add_trigger_args(p)
    p.add_argument("--coarse-every", type=int, required=True,
                   help="output cadence before the switch")
    p.add_argument("--fine-every", type=int, required=True,
                   help="output cadence from the switch on")
    p.add_argument("--out", type=Path, required=True, help="output CSV path")
    _add_plot_arg(p)
    p.set_defaults(func=cmd_adaptive)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
