"""Command-line front end.

Subcommands: price (one call valuation, optional Monte Carlo cross-check),
schedule (dump the noise schedule as CSV), simulate (strategy tournament on
the score simulator), toy (analytic 2-D diffusion runs), sweep-k (strike sweep
for the option-valued strategy). Every run is deterministic for a fixed seed;
file writes are atomic; BSMIX_THREADS caps seed-level parallelism.

Each subcommand accepts --config FILE, a JSON object whose entries override
flag *defaults* (explicit flags still win). Config files are validated against
the schemas shipped in bsmix/schemas/ and mirrored in docs/.
"""

from __future__ import annotations

import argparse
import importlib.resources
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import jsonschema
import numpy as np

from . import metrics
from .ddim_schedule import ScheduleConfig, build_schedule, sigma_at
from .mixer import MixerConfig, Strategy, Trace, calibrate_strike, run_strategy
from .option_pricing import OptionParams, bs_call_price, mc_call_price
from .parallel import run_jobs
from .plots import curve_svg, scatter_svg
from .score_sim import SimEnvConfig, SimEnvironment, run_tournament
from .toy_diffusion import GaussianMixtureConcept, ToyEnvironment, ToyRunConfig, alignment_score, generate
from .traceio import atomic_write_text, summaries_to_csv, trace_to_json

__all__ = ["main"]

_DEFAULT_ENV = {"initial_scores": [0.2, 0.3], "gain": 0.05, "decay": 0.01, "noise_vol": 0.02}
_DEFAULT_CONCEPTS = {
    "concepts": [
        {
            "label": "left",
            "weights": [1.0],
            "means": [[-2.0, 0.0]],
            "covariances": [[[0.25, 0.0], [0.0, 0.25]]],
        },
        {
            "label": "right",
            "weights": [1.0],
            "means": [[2.0, 0.0]],
            "covariances": [[[0.25, 0.0], [0.0, 0.25]]],
        },
    ],
    "samples_per_seed": 8,
    "eta": 0.0,
}


class _CliError(Exception):
    """User-facing failure; rendered as one JSON line on stderr."""


class _Parser(argparse.ArgumentParser):
    # argparse's default error path prints usage only; the contract wants a
    # machine-readable line for bad flags too.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(json.dumps({"error": message}), file=sys.stderr)
        raise SystemExit(2)


def _load_schema(name: str) -> dict:
    ref = importlib.resources.files("bsmix.schemas").joinpath(name)
    return json.loads(ref.read_text())


def _validate(instance, schema_name: str, fragment: Optional[str] = None) -> None:
    schema = _load_schema(schema_name)
    if fragment is not None:
        schema = schema["$defs"][fragment]
    try:
        jsonschema.validate(instance, schema)
    except jsonschema.ValidationError as exc:
        raise _CliError(f"config failed schema validation: {exc.message}") from exc


def _read_json(path: str) -> dict:
    try:
        with open(path) as handle:
            return json.load(handle)
    except OSError as exc:
        raise _CliError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _CliError(f"{path} is not valid JSON: {exc}") from exc


def _apply_config_defaults(parser: argparse.ArgumentParser, subcommand: str, argv: list[str]) -> None:
    """Honor --config by rewriting the parser's defaults before the real parse."""
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    if known.config is None:
        return
    payload = _read_json(known.config)
    _validate(payload, "cli_config.schema.json", subcommand)
    parser.set_defaults(**{key.replace("-", "_"): value for key, value in payload.items()})


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_strategies(text: str) -> list[Strategy]:
    try:
        strategies = [Strategy.parse(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        raise _CliError(str(exc)) from exc
    if not strategies:
        raise _CliError("no strategies given")
    return strategies


def _parse_k_spec(text: str) -> list[float]:
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise _CliError("K range must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise _CliError("K range needs step > 0 and stop >= start")
        values, v = [], start
        while v <= stop + 1e-12:
            values.append(round(v, 12))
            v += step
        return values
    try:
        values = [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise _CliError(f"bad K list: {text!r}") from exc
    if not values:
        raise _CliError("empty K list")
    return values


def _strategy_file_tag(name: str) -> str:
    return name.replace(":", "-")


def _print_summaries(summaries: Sequence[metrics.RunSummary]) -> None:
    print(f"{'strategy':<16} {'seeds':>5} {'balance':>22} {'combined':>22} {'entropy':>10}")
    for s in summaries:
        print(
            f"{s.strategy:<16} {s.seeds:>5} "
            f"{s.balance_mean:>12.6f} +/- {s.balance_se:<8.6f} "
            f"{s.combined_mean:>12.6f} +/- {s.combined_se:<8.6f} "
            f"{s.entropy_mean:>10.6f}"
        )


def _mixer_config(num_prompts: int, args) -> MixerConfig:
    strike_mode = "calibrated" if getattr(args, "calibrate_strike", False) else "fixed"
    return MixerConfig(
        num_prompts=num_prompts,
        total_steps=args.steps,
        strike=args.strike,
        rate=args.rate,
        strike_mode=strike_mode,
    )


def _calibrated_strike_sim(env_cfg, mixer_cfg, schedule, seeds, master_seed) -> float:
    # Preliminary combined-conditioning pass: lerp never leaves the blended
    # concept, so its final scores are the calibration sample.
    finals = []
    for k in range(seeds):
        trace = run_strategy(SimEnvironment(env_cfg), Strategy("lerp"), mixer_cfg, schedule, master_seed + k)
        finals.extend(trace.final_scores)
    return calibrate_strike(finals, mixer_cfg)


def _calibrated_strike_toy(toy_cfg, mixer_cfg, seeds, master_seed) -> float:
    finals = []
    for k in range(seeds):
        trace, _ = generate(toy_cfg, Strategy("lerp"), mixer_cfg, master_seed + k)
        finals.extend(trace.final_scores)
    return calibrate_strike(finals, mixer_cfg)


def _cmd_price(args) -> int:
    params = OptionParams(spot=args.S, strike=args.K, rate=args.r, vol=args.sigma, tte=args.t)
    result = bs_call_price(params)
    payload = {"price": result.price, "d1": result.d1, "d2": result.d2}
    if args.mc is not None:
        paths, seed = args.mc
        estimate, stderr = mc_call_price(params, int(paths), int(seed))
        payload.update(
            mc_estimate=estimate,
            mc_stderr=stderr,
            mc_abs_diff=abs(result.price - estimate),
        )
    if args.json:
        print(json.dumps(payload))
    else:
        for key, value in payload.items():
            print(f"{key} {value!r}")
    return 0


def _schedule_csv(cfg: ScheduleConfig) -> str:
    schedule = build_schedule(cfg)
    lines = ["index,train_timestep,beta,alpha_bar,variance,sigma"]
    # Ascending training timestep = reverse execution order; the index column
    # holds the inference-step position that owns the row's variance/sigma.
    for i in reversed(range(schedule.num_inference_steps)):
        t = int(schedule.inference_timesteps[i])
        lines.append(
            ",".join(
                [
                    str(i),
                    str(t),
                    repr(float(schedule.betas[t])),
                    repr(float(schedule.alpha_bars[t])),
                    repr(float(schedule.variances[i])),
                    repr(sigma_at(schedule, i)),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def _cmd_schedule(args) -> int:
    cfg = ScheduleConfig(
        beta_start=args.beta_start,
        beta_end=args.beta_end,
        num_train_steps=args.train_steps,
        num_inference_steps=args.infer_steps,
    )
    text = _schedule_csv(cfg)
    if args.out:
        atomic_write_text(args.out, text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_simulate(args) -> int:
    env_payload = _read_json(args.env_config) if args.env_config else dict(_DEFAULT_ENV)
    _validate(env_payload, "env_config.schema.json")
    env_cfg = SimEnvConfig(
        initial_scores=tuple(env_payload["initial_scores"]),
        gain=env_payload.get("gain", 0.05),
        decay=env_payload.get("decay", 0.01),
        noise_vol=env_payload.get("noise_vol", 0.0),
    )
    strategies = _parse_strategies(args.strategies)
    schedule = build_schedule(ScheduleConfig(num_inference_steps=args.steps))
    mixer_cfg = _mixer_config(env_cfg.num_prompts, args)
    if args.calibrate_strike:
        strike = _calibrated_strike_sim(env_cfg, mixer_cfg, schedule, args.seeds, args.master_seed)
        mixer_cfg = MixerConfig(
            num_prompts=mixer_cfg.num_prompts,
            total_steps=mixer_cfg.total_steps,
            strike=strike,
            rate=mixer_cfg.rate,
            strike_mode="calibrated",
        )
        print(f"calibrated strike {strike!r}")
    summaries, traces = run_tournament(
        env_cfg, strategies, mixer_cfg, schedule, args.seeds, args.master_seed
    )
    out = _out_dir(args.out)
    atomic_write_text(out / "summary.csv", summaries_to_csv(summaries))
    for trace in traces:
        tag = _strategy_file_tag(trace.strategy)
        atomic_write_text(out / f"trace_{tag}_{trace.seed}.json", trace_to_json(trace))
    _print_summaries(summaries)
    print(f"wrote {out / 'summary.csv'} and {len(traces)} traces")
    return 0


def _toy_config(payload: dict, steps: int) -> ToyRunConfig:
    _validate(payload, "concepts.schema.json")
    concepts = tuple(
        GaussianMixtureConcept(
            weights=np.array(c["weights"]),
            means=np.array(c["means"]),
            covariances=np.array(c["covariances"]),
            label=c.get("label", f"concept {i}"),
        )
        for i, c in enumerate(payload["concepts"])
    )
    schedule = build_schedule(ScheduleConfig(num_inference_steps=steps))
    return ToyRunConfig(
        concepts=concepts,
        schedule=schedule,
        samples_per_seed=payload.get("samples_per_seed", 8),
        eta=payload.get("eta", 0.0),
    )


def _samples_csv(rows: list[tuple[int, np.ndarray, np.ndarray]], num_concepts: int) -> str:
    header = ["seed", "x", "y"] + [f"score_{i}" for i in range(num_concepts)]
    lines = [",".join(header)]
    for seed, points, scores in rows:
        for point, point_scores in zip(points, scores):
            cells = [str(seed), repr(float(point[0])), repr(float(point[1]))]
            cells += [repr(float(s)) for s in point_scores]
            lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _cmd_toy(args) -> int:
    payload = _read_json(args.concept_config) if args.concept_config else json.loads(json.dumps(_DEFAULT_CONCEPTS))
    toy_cfg = _toy_config(payload, args.steps)
    strategy = Strategy.parse(args.strategy)
    mixer_cfg = _mixer_config(len(toy_cfg.concepts), args)
    if args.calibrate_strike:
        strike = _calibrated_strike_toy(toy_cfg, mixer_cfg, args.seeds, args.master_seed)
        mixer_cfg = MixerConfig(
            num_prompts=mixer_cfg.num_prompts,
            total_steps=mixer_cfg.total_steps,
            strike=strike,
            rate=mixer_cfg.rate,
            strike_mode="calibrated",
        )
        print(f"calibrated strike {strike!r}")

    def make_job(k: int):
        return lambda: generate(toy_cfg, strategy, mixer_cfg, args.master_seed + k)

    results = run_jobs([make_job(k) for k in range(args.seeds)])
    out = _out_dir(args.out)
    rows = []
    all_samples = []
    traces = []
    for k, (trace, samples) in enumerate(results):
        seed = args.master_seed + k
        scores = np.stack([alignment_score(c, samples) for c in toy_cfg.concepts], axis=-1)
        rows.append((seed, samples, scores))
        all_samples.append(samples)
        traces.append(trace)
        tag = _strategy_file_tag(trace.strategy)
        atomic_write_text(out / f"trace_{tag}_{seed}.json", trace_to_json(trace))
    atomic_write_text(out / "samples.csv", _samples_csv(rows, len(toy_cfg.concepts)))
    if args.svg:
        stacked = np.vstack(all_samples)
        if toy_cfg.dim != 2:
            raise _CliError("--svg requires 2-D concepts")
        atomic_write_text(
            out / "samples.svg",
            scatter_svg(stacked, toy_cfg.concepts, title=f"toy samples ({strategy.name})"),
        )
    _print_summaries(metrics.aggregate(traces))
    print(f"wrote {out / 'samples.csv'} and {len(traces)} traces")
    return 0


def _cmd_sweep_k(args) -> int:
    env_payload = _read_json(args.env_config) if args.env_config else dict(_DEFAULT_ENV)
    _validate(env_payload, "env_config.schema.json")
    env_cfg = SimEnvConfig(
        initial_scores=tuple(env_payload["initial_scores"]),
        gain=env_payload.get("gain", 0.05),
        decay=env_payload.get("decay", 0.01),
        noise_vol=env_payload.get("noise_vol", 0.0),
    )
    strikes = _parse_k_spec(args.k)
    schedule = build_schedule(ScheduleConfig(num_inference_steps=args.steps))
    strategy = Strategy("black_scholes")
    lines = ["strike,balance_mean,balance_se,combined_mean,combined_se,entropy_mean"]
    balances = []
    for strike in strikes:
        mixer_cfg = MixerConfig(
            num_prompts=env_cfg.num_prompts,
            total_steps=args.steps,
            strike=strike,
            rate=args.rate,
        )
        summaries, _ = run_tournament(
            env_cfg, [strategy], mixer_cfg, schedule, args.seeds, args.master_seed
        )
        s = summaries[0]
        balances.append(s.balance_mean)
        lines.append(
            ",".join(
                [
                    repr(float(strike)),
                    repr(s.balance_mean),
                    repr(s.balance_se),
                    repr(s.combined_mean),
                    repr(s.combined_se),
                    repr(s.entropy_mean),
                ]
            )
        )
    out = _out_dir(args.out)
    atomic_write_text(out / "sweep.csv", "\n".join(lines) + "\n")
    atomic_write_text(
        out / "sweep.svg",
        curve_svg(strikes, balances, xlabel="strike", ylabel="balance_mean", title="balance vs strike"),
    )
    best = int(np.argmax(balances))
    print(f"best_strike {strikes[best]!r} balance_mean {balances[best]!r}")
    print(f"wrote {out / 'sweep.csv'} and {out / 'sweep.svg'}")
    return 0


def _build_parser() -> tuple[_Parser, dict[str, argparse.ArgumentParser]]:
    parser = _Parser(prog="bsmix", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    price = sub.add_parser("price", help="value one European call")
    price.add_argument("--S", type=float, required=False, default=None, help="spot (scaled score)")
    price.add_argument("--K", type=float, default=25.0, help="strike")
    price.add_argument("--r", type=float, default=0.01, help="rate")
    price.add_argument("--sigma", type=float, default=0.05, help="volatility")
    price.add_argument("--t", type=float, default=50.0, help="time to expiry (steps)")
    price.add_argument("--mc", nargs=2, metavar=("PATHS", "SEED"), type=int, default=None,
                       help="cross-check against the Monte Carlo estimator")
    price.add_argument("--json", action="store_true", help="emit one JSON object instead of key/value lines")
    price.add_argument("--config", help="JSON file overriding flag defaults")
    price.set_defaults(func=_cmd_price)

    schedule = sub.add_parser("schedule", help="dump the noise schedule as CSV")
    schedule.add_argument("--beta-start", type=float, default=0.00085)
    schedule.add_argument("--beta-end", type=float, default=0.012)
    schedule.add_argument("--train-steps", type=int, default=1000)
    schedule.add_argument("--infer-steps", type=int, default=100)
    schedule.add_argument("--out", help="CSV path (stdout when omitted)")
    schedule.add_argument("--config", help="JSON file overriding flag defaults")
    schedule.set_defaults(func=_cmd_schedule)

    simulate = sub.add_parser("simulate", help="strategy tournament on the score simulator")
    simulate.add_argument("--env-config", help="environment JSON (defaults to a 2-prompt environment)")
    simulate.add_argument("--strategies", default="black_scholes,clip_min,alternating,stepwise:12,lerp",
                          help="comma-separated list, e.g. black_scholes,stepwise:12,single:0")
    simulate.add_argument("--seeds", type=int, default=20, help="number of seeded runs per strategy")
    simulate.add_argument("--master-seed", type=int, default=0)
    simulate.add_argument("--steps", type=int, default=100, help="denoising steps per run")
    simulate.add_argument("--strike", type=float, default=25.0)
    simulate.add_argument("--rate", type=float, default=None, help="defaults to 1/steps")
    simulate.add_argument("--calibrate-strike", action="store_true",
                          help="derive the strike from a combined-conditioning pass")
    simulate.add_argument("--out", required=True, help="output directory")
    simulate.add_argument("--config", help="JSON file overriding flag defaults")
    simulate.set_defaults(func=_cmd_simulate)

    toy = sub.add_parser("toy", help="analytic 2-D diffusion runs")
    toy.add_argument("--concept-config", help="concepts JSON (defaults to two separated Gaussians)")
    toy.add_argument("--strategy", default="black_scholes")
    toy.add_argument("--seeds", type=int, default=10)
    toy.add_argument("--master-seed", type=int, default=0)
    toy.add_argument("--steps", type=int, default=100)
    toy.add_argument("--strike", type=float, default=25.0)
    toy.add_argument("--rate", type=float, default=None, help="defaults to 1/steps")
    toy.add_argument("--calibrate-strike", action="store_true",
                     help="derive the strike from a combined-conditioning pass")
    toy.add_argument("--svg", action="store_true", help="also write a scatter SVG")
    toy.add_argument("--out", required=True, help="output directory")
    toy.add_argument("--config", help="JSON file overriding flag defaults")
    toy.set_defaults(func=_cmd_toy)

    sweep = sub.add_parser("sweep-k", help="strike sweep for the option-valued strategy")
    sweep.add_argument("--env-config", help="environment JSON (defaults to a 2-prompt environment)")
    sweep.add_argument("--k", default="0:50:5", help="strikes, start:stop:step or comma list")
    sweep.add_argument("--seeds", type=int, default=20)
    sweep.add_argument("--master-seed", type=int, default=0)
    sweep.add_argument("--steps", type=int, default=100)
    sweep.add_argument("--rate", type=float, default=None, help="defaults to 1/steps")
    sweep.add_argument("--out", required=True, help="output directory")
    sweep.add_argument("--config", help="JSON file overriding flag defaults")
    sweep.set_defaults(func=_cmd_sweep_k)

    return parser, {
        "price": price,
        "schedule": schedule,
        "simulate": simulate,
        "toy": toy,
        "sweep-k": sweep,
    }


def main(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subparsers = _build_parser()
    if argv and argv[0] in subparsers:
        try:
            _apply_config_defaults(subparsers[argv[0]], argv[0], argv[1:])
        except _CliError as exc:
            print(json.dumps({"error": str(exc)}), file=sys.stderr)
            return 2
    args = parser.parse_args(argv)
    if args.command == "price" and args.S is None:
        print(json.dumps({"error": "price requires --S (directly or via --config)"}), file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (_CliError, ValueError, RuntimeError, OSError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
