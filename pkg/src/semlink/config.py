"""Run configuration: defaults, JSON loading, validation, derived objects.

The symbol rate is a free parameter: delays scale as 1/symbol_rate, so
the default of 1e6 symbols/s makes the bundled delay budgets (1 ms at
one word per frame, 2 ms at two) bind against the default constellation
and code menus. Change one and you usually need to revisit the other.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields
from pathlib import Path

from semlink.codecs import CodeScheme, hadamard_params
from semlink.linkmath import MODULATIONS, ChannelModel, ModulationScheme

DEFAULT_MODULATIONS = ("BPSK", "QPSK", "16QAM", "64QAM", "256QAM")
DEFAULT_HADAMARD_ORDERS = (3, 4, 5, 6)
DEFAULT_EBN0_GRID_DB = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0)
DEFAULT_DELAY_BUDGETS = {1: 1e-3, 2: 2e-3}

STRATEGY_SEMANTIC = "semantic_aware"
STRATEGY_UNIFORM = "uniform"
STRATEGY_CORRECTED = "semantic_aware_with_correction"
STRATEGIES = (STRATEGY_SEMANTIC, STRATEGY_UNIFORM, STRATEGY_CORRECTED)

ERASURE_MODES = ("analytic-bernoulli", "bit-level")


class ConfigError(ValueError):
    """A configuration value is missing, malformed, or out of range."""


@dataclass
class RunConfig:
    """Everything a CLI run needs, with physics-level defaults filled in."""

    captions: str | None = None
    words_per_frame: int = 1
    header_bytes: int = 10
    modulations: tuple[str, ...] = DEFAULT_MODULATIONS
    hadamard_orders: tuple[int, ...] = DEFAULT_HADAMARD_ORDERS
    delay_budget: float | None = None
    num_candidates: int = 1000
    seed: int = 1
    symbol_rate: float = 1e6
    h_mag: float = 1.0
    ebn0_db: float = 10.0
    ebn0_grid_db: tuple[float, ...] = DEFAULT_EBN0_GRID_DB
    provider: str = "fake"
    corrector: str | None = None
    strategies: tuple[str, ...] = (STRATEGY_SEMANTIC, STRATEGY_UNIFORM)
    trials: int = 200
    erasure_mode: str = "analytic-bernoulli"
    out: str | None = None

    def __post_init__(self) -> None:
        self.modulations = tuple(self.modulations)
        self.hadamard_orders = tuple(int(k) for k in self.hadamard_orders)
        self.ebn0_grid_db = tuple(float(v) for v in self.ebn0_grid_db)
        self.strategies = tuple(self.strategies)
        self.validate()

    def validate(self) -> None:
        if self.words_per_frame < 1:
            raise ConfigError(f"words_per_frame must be >= 1, got {self.words_per_frame}")
        if self.header_bytes < 0:
            raise ConfigError(f"header_bytes must be >= 0, got {self.header_bytes}")
        if not self.modulations:
            raise ConfigError("modulations must not be empty")
        unknown = [name for name in self.modulations if name not in MODULATIONS]
        if unknown:
            raise ConfigError(
                f"unknown modulations {unknown}; known: {sorted(MODULATIONS)}"
            )
        if not self.hadamard_orders:
            raise ConfigError("hadamard_orders must not be empty")
        for order in self.hadamard_orders:
            try:
                hadamard_params(order)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        if self.delay_budget is not None and not (
            math.isfinite(self.delay_budget) and self.delay_budget > 0
        ):
            raise ConfigError(f"delay_budget must be > 0 seconds, got {self.delay_budget}")
        if self.delay_budget is None and self.words_per_frame not in DEFAULT_DELAY_BUDGETS:
            raise ConfigError(
                f"no default delay budget for words_per_frame={self.words_per_frame}; "
                f"set delay_budget explicitly (defaults exist for {sorted(DEFAULT_DELAY_BUDGETS)})"
            )
        if self.num_candidates < 1:
            raise ConfigError(f"num_candidates must be >= 1, got {self.num_candidates}")
        if not (math.isfinite(self.symbol_rate) and self.symbol_rate > 0):
            raise ConfigError(f"symbol_rate must be > 0, got {self.symbol_rate}")
        if not (math.isfinite(self.h_mag) and self.h_mag >= 0):
            raise ConfigError(f"h_mag must be >= 0, got {self.h_mag}")
        if not math.isfinite(self.ebn0_db):
            raise ConfigError(f"ebn0_db must be finite, got {self.ebn0_db}")
        if not self.ebn0_grid_db:
            raise ConfigError("ebn0_grid_db must not be empty")
        if any(not math.isfinite(v) for v in self.ebn0_grid_db):
            raise ConfigError("ebn0_grid_db values must be finite")
        if not self.strategies:
            raise ConfigError("strategies must not be empty")
        bad = [s for s in self.strategies if s not in STRATEGIES]
        if bad:
            raise ConfigError(f"unknown strategies {bad}; known: {list(STRATEGIES)}")
        if self.erasure_mode not in ERASURE_MODES:
            raise ConfigError(
                f"unknown erasure_mode {self.erasure_mode!r}; known: {list(ERASURE_MODES)}"
            )
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        self._validate_provider(self.provider, "provider", ("fake", "file", "sidecar"))
        if self.corrector is not None:
            self._validate_provider(
                self.corrector, "corrector", ("identity", "oracle", "sidecar")
            )

    @staticmethod
    def _validate_provider(value: str, what: str, kinds: tuple[str, ...]) -> None:
        kind = value.split(":", 1)[0]
        if kind not in kinds:
            raise ConfigError(f"unknown {what} {value!r}; expected one of {list(kinds)}")
        if kind in ("file", "sidecar") and ":" not in value:
            raise ConfigError(f"{what} {value!r} needs an argument after the colon")

    @property
    def resolved_delay_budget(self) -> float:
        if self.delay_budget is not None:
            return self.delay_budget
        return DEFAULT_DELAY_BUDGETS[self.words_per_frame]

    @property
    def resolved_corrector(self) -> str:
        """The corrector spec, defaulting to the provider's natural partner.

        A sidecar provider corrects through the same worker; everything
        else defaults to no correction.
        """
        if self.corrector is not None:
            return self.corrector
        if self.provider.startswith("sidecar:"):
            return self.provider
        return "identity"

    def modulation_schemes(self) -> list[ModulationScheme]:
        return [MODULATIONS[name] for name in self.modulations]

    def code_schemes(self) -> list[CodeScheme]:
        return [hadamard_params(order) for order in self.hadamard_orders]

    def channel(self, ebn0_db: float | None = None) -> ChannelModel:
        db = self.ebn0_db if ebn0_db is None else ebn0_db
        return ChannelModel(
            h_mag=self.h_mag, ebn0=10.0 ** (db / 10.0), symbol_rate=self.symbol_rate
        )

    @classmethod
    def from_dict(cls, raw: dict) -> RunConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**raw)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad config value: {exc}") from exc

    @classmethod
    def from_file(cls, path: str | Path) -> RunConfig:
        target = Path(path)
        if not target.exists():
            raise ConfigError(f"config file not found: {target}")
        try:
            raw = json.loads(target.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {target} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"config file {target} must hold a JSON object")
        return cls.from_dict(raw)
