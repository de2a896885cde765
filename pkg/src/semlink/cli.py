"""Command-line front end.

Subcommands: `importance` (compute and save per-frame weights),
`optimize` (pick an MCS assignment at one operating point), `sweep`
(Eb/N0 grid to CSV), and `simulate` (Monte Carlo trials to JSON).

Exit codes: 0 success, 2 configuration problem, 3 delay budget
infeasible, 4 provider failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from contextlib import ExitStack
from pathlib import Path
from typing import Callable, Sequence, TextIO

from semlink.adapt import InfeasibleError, SearchSpaceError, greedy_search, uniform_baseline
from semlink.config import STRATEGIES, STRATEGY_UNIFORM, ConfigError, RunConfig
from semlink.framing import Caption, build_frames, load_captions, tokenize, with_importance
from semlink.semantics import (
    Corrector,
    Embedder,
    FakeEmbedder,
    IdentityCorrector,
    ImportanceProfile,
    OracleCorrector,
    ProviderError,
    frame_importance,
    load_profiles,
)
from semlink.sidecar_client import SidecarCorrector, SidecarEmbedder, SidecarProcess
from semlink.simulate import run_pipeline, sweep, write_sweep_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_PROVIDER = 4


def _add_common_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", help="JSON config file; flags override it")
    parser.add_argument("--captions", metavar="PATH", help="caption file, one per line")
    parser.add_argument(
        "--caption", action="append", metavar="TEXT",
        help="inline caption; repeatable, replaces --captions",
    )
    parser.add_argument("--seed", type=int, help="master seed for search and channel noise")
    parser.add_argument(
        "--provider", metavar="SPEC",
        help="importance/embedding provider: fake, file:<path>, or sidecar:<command>",
    )
    parser.add_argument(
        "--corrector", metavar="SPEC",
        help="mask-fill corrector: identity, oracle, or sidecar:<command> "
        "(default: the provider's natural partner)",
    )
    parser.add_argument("--wpf", type=int, dest="words_per_frame", help="words per frame")
    parser.add_argument("--header-bytes", type=int, help="frame header size in bytes")
    parser.add_argument("--delay-budget", type=float, help="delay budget in seconds")
    parser.add_argument("--num-candidates", type=int, help="sampled assignments per search")
    parser.add_argument("--symbol-rate", type=float, help="channel symbol rate in symbols/s")
    parser.add_argument("--h-mag", type=float, help="channel coefficient magnitude")
    parser.add_argument("--out", metavar="PATH", help="output file (default: stdout)")


_OVERRIDE_FIELDS = (
    "captions", "seed", "provider", "corrector", "words_per_frame", "header_bytes",
    "delay_budget", "num_candidates", "symbol_rate", "h_mag", "out",
    "ebn0_db", "ebn0_grid_db", "trials", "erasure_mode", "strategies",
)


def _build_config(args: argparse.Namespace) -> RunConfig:
    raw: dict = {}
    if args.config:
        raw.update(dataclasses.asdict(RunConfig.from_file(args.config)))
    for name in _OVERRIDE_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            raw[name] = value
    return RunConfig.from_dict(raw)


def _resolve_captions(args: argparse.Namespace, config: RunConfig) -> list[Caption]:
    if getattr(args, "caption", None):
        return [tokenize(text) for text in args.caption]
    if config.captions:
        try:
            return load_captions(config.captions)
        except OSError as exc:
            raise ConfigError(f"cannot read captions file {config.captions}: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    raise ConfigError("no captions given; use --caption TEXT or --captions PATH")


class _Providers:
    """Embedder, corrector factory, and optional preloaded profiles for a run."""

    def __init__(
        self,
        embedder: Embedder,
        corrector_for: Callable[[Caption], Corrector],
        profiles: dict[str, ImportanceProfile] | None,
    ) -> None:
        self.embedder = embedder
        self.corrector_for = corrector_for
        self.profiles = profiles


def _build_providers(config: RunConfig, stack: ExitStack) -> _Providers:
    profiles = None
    embedder_process: SidecarProcess | None = None
    if config.provider == "fake":
        embedder: Embedder = FakeEmbedder(seed=config.seed)
    elif config.provider.startswith("file:"):
        path = config.provider.split(":", 1)[1]
        try:
            loaded = load_profiles(path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot load importance profiles from {path}: {exc}") from exc
        profiles = {p.caption: p for p in loaded}
        embedder = FakeEmbedder(seed=config.seed)
    elif config.provider.startswith("sidecar:"):
        embedder_process = stack.enter_context(SidecarProcess(config.provider.split(":", 1)[1]))
        embedder = SidecarEmbedder(embedder_process)
    else:
        raise ConfigError(f"unknown provider {config.provider!r}")

    corrector_spec = config.resolved_corrector
    if corrector_spec == "identity":
        identity = IdentityCorrector()
        corrector_for: Callable[[Caption], Corrector] = lambda caption: identity
    elif corrector_spec == "oracle":
        corrector_for = lambda caption: OracleCorrector(caption)
    elif corrector_spec.startswith("sidecar:"):
        if embedder_process is not None and config.provider == corrector_spec:
            process = embedder_process
        else:
            command = corrector_spec.split(":", 1)[1]
            process = stack.enter_context(SidecarProcess(command))
        corrector = SidecarCorrector(process)
        corrector_for = lambda caption: corrector
    else:
        raise ConfigError(f"unknown corrector {corrector_spec!r}")
    return _Providers(embedder, corrector_for, profiles)


def _open_out(config: RunConfig, stack: ExitStack) -> TextIO:
    if config.out is None:
        return sys.stdout
    return stack.enter_context(Path(config.out).open("w", encoding="utf-8"))


def _profile_for(
    caption: Caption,
    config: RunConfig,
    providers: _Providers,
) -> ImportanceProfile:
    frames = build_frames(caption, config.words_per_frame, config.header_bytes)
    if providers.profiles is not None:
        profile = providers.profiles.get(caption.text())
        if profile is None:
            raise ConfigError(f"no importance profile on file for caption {caption.text()!r}")
        if len(profile.weights) != len(frames):
            raise ConfigError(
                f"profile for {caption.text()!r} carries {len(profile.weights)} weights "
                f"but the caption frames into {len(frames)}"
            )
        return profile
    return frame_importance(caption, frames, providers.embedder, providers.corrector_for(caption))


def cmd_importance(args: argparse.Namespace) -> int:
    config = _build_config(args)
    captions = _resolve_captions(args, config)
    with ExitStack() as stack:
        providers = _build_providers(config, stack)
        profiles = [_profile_for(caption, config, providers) for caption in captions]
        out = _open_out(config, stack)
        if len(profiles) == 1:
            out.write(profiles[0].to_json() + "\n")
        else:
            out.write(json.dumps([p.to_dict() for p in profiles], indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _assignment_report(caption: Caption, config: RunConfig, providers: _Providers) -> dict:
    frames = build_frames(caption, config.words_per_frame, config.header_bytes)
    profile = _profile_for(caption, config, providers)
    weighted = with_importance(frames, profile.weights)
    solver = uniform_baseline if config.strategies == (STRATEGY_UNIFORM,) else greedy_search
    assignment = solver(
        weighted,
        config.channel(),
        config.resolved_delay_budget,
        config.modulation_schemes(),
        config.code_schemes(),
        num_candidates=config.num_candidates,
        seed=config.seed,
    )
    return {
        "caption": caption.text(),
        "ebn0_db": config.ebn0_db,
        "delay_budget_s": config.resolved_delay_budget,
        "weights": profile.weights,
        "choices": [
            {
                "frame": frame.index,
                "modulation": choice.scheme.name,
                "hadamard_order": choice.code.dimension,
                "payload_bits": frame.payload_bits,
            }
            for frame, choice in zip(weighted, assignment.choices)
        ],
        "semantic_loss": assignment.semantic_loss,
        "total_delay_s": assignment.total_delay,
        "delay_margin_s": config.resolved_delay_budget - assignment.total_delay,
    }


def cmd_optimize(args: argparse.Namespace) -> int:
    config = _build_config(args)
    captions = _resolve_captions(args, config)
    with ExitStack() as stack:
        providers = _build_providers(config, stack)
        reports = [_assignment_report(caption, config, providers) for caption in captions]
        out = _open_out(config, stack)
        payload = reports[0] if len(reports) == 1 else reports
        out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _build_config(args)
    captions = _resolve_captions(args, config)
    with ExitStack() as stack:
        providers = _build_providers(config, stack)
        rows = sweep(
            captions,
            config,
            providers.embedder,
            providers.corrector_for,
            providers.corrector_for,
            profiles=providers.profiles,
        )
        write_sweep_csv(rows, _open_out(config, stack))
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _build_config(args)
    captions = _resolve_captions(args, config)
    with ExitStack() as stack:
        providers = _build_providers(config, stack)
        reports = []
        for caption in captions:
            corrector = providers.corrector_for(caption)
            profile = (
                _profile_for(caption, config, providers)
                if providers.profiles is not None
                else None
            )
            result = run_pipeline(
                caption,
                config,
                providers.embedder,
                weight_corrector=corrector,
                trial_corrector=corrector,
                profile=profile,
            )
            report = {
                "caption": result.caption,
                "ebn0_db": config.ebn0_db,
                "erasure_mode": config.erasure_mode,
                "weights": result.profile.weights,
                "choices": [
                    {"frame": i + 1, "modulation": c.scheme.name, "hadamard_order": c.code.dimension}
                    for i, c in enumerate(result.assignment.choices)
                ],
                "expected_semantic_loss": result.assignment.semantic_loss,
                "total_delay_s": result.assignment.total_delay,
                "trials": config.trials,
                "mean_realized_loss": result.mean_realized_loss,
                "mean_similarity": result.mean_similarity,
            }
            if args.per_trial:
                report["per_trial"] = [
                    {
                        "trial": t.trial,
                        "erased_frames": list(t.erased_frames),
                        "recovered": t.recovered_text,
                        "realized_loss": t.realized_loss,
                        "similarity": t.similarity,
                    }
                    for t in result.trials
                ]
            reports.append(report)
        out = _open_out(config, stack)
        payload = reports[0] if len(reports) == 1 else reports
        out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semlink",
        description="Importance-aware link adaptation for caption transmission.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_imp = sub.add_parser("importance", help="compute per-frame importance weights")
    _add_common_options(p_imp)
    p_imp.set_defaults(func=cmd_importance)

    p_opt = sub.add_parser("optimize", help="choose an MCS assignment at one Eb/N0")
    _add_common_options(p_opt)
    p_opt.add_argument("--ebn0-db", type=float, help="operating point in dB")
    p_opt.add_argument(
        "--strategy", choices=list(STRATEGIES), dest="strategy",
        help="score candidates with importance weights (default) or without",
    )
    p_opt.set_defaults(func=cmd_optimize)

    p_sweep = sub.add_parser("sweep", help="run an Eb/N0 grid and emit CSV")
    _add_common_options(p_sweep)
    p_sweep.add_argument(
        "--ebn0-grid-db", type=_float_list, metavar="DB[,DB...]",
        help="comma-separated Eb/N0 grid in dB",
    )
    p_sweep.add_argument(
        "--strategies", type=_strategy_list, metavar="NAME[,NAME...]",
        help=f"comma-separated subset of {','.join(STRATEGIES)}",
    )
    p_sweep.add_argument("--trials", type=int, help="Monte Carlo trials per grid cell")
    p_sweep.add_argument(
        "--mode", dest="erasure_mode", choices=["analytic-bernoulli", "bit-level"],
        help="erasure model for the trials",
    )
    p_sweep.set_defaults(func=cmd_sweep)

    p_sim = sub.add_parser("simulate", help="Monte Carlo trials at one Eb/N0, JSON report")
    _add_common_options(p_sim)
    p_sim.add_argument("--ebn0-db", type=float, help="operating point in dB")
    p_sim.add_argument("--trials", type=int, help="Monte Carlo trials")
    p_sim.add_argument(
        "--mode", dest="erasure_mode", choices=["analytic-bernoulli", "bit-level"],
        help="erasure model for the trials",
    )
    p_sim.add_argument(
        "--per-trial", action="store_true", help="include every trial in the report"
    )
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad float list {text!r}") from exc


def _strategy_list(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "strategy", None) is not None:
        args.strategies = (args.strategy,)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InfeasibleError, SearchSpaceError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ProviderError as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER


if __name__ == "__main__":
    sys.exit(main())
