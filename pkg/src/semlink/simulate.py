"""Monte Carlo transmission of framed captions and Eb/N0 sweeps.

Two erasure models are supported. In "analytic-bernoulli" mode each
frame is lost as an independent Bernoulli draw with its analytic loss
probability. In "bit-level" mode random payload bits are Hadamard
encoded, coded bits flip independently with the Gray-mapped bit error
rate, and a frame is lost when any of its blocks takes more flips than
the code's guaranteed correction radius; nearest-codeword re-decoding
success is tallied alongside as a diagnostic (it can only do better).

Every frame draws from its own seeded substream, so results do not
depend on evaluation order, and sweeps derive per-point seeds from
(seed, grid index, caption index) only, never from the strategy, so
strategies face identical channel noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, TextIO

import numpy as np

from semlink.adapt import Assignment, greedy_search, uniform_baseline
from semlink.codecs import codeword_table
from semlink.config import STRATEGY_CORRECTED, STRATEGY_UNIFORM, RunConfig
from semlink.framing import Caption, FrameSpec, apply_erasures, build_frames, tokenize, with_importance
from semlink.linkmath import ChannelModel, bit_error_prob, frame_loss_from_pbit, snr_gamma
from semlink.semantics import (
    Corrector,
    Embedder,
    IdentityCorrector,
    ImportanceProfile,
    ProfileCache,
    ProviderError,
    end_to_end_similarity,
    frame_importance,
)

SWEEP_CSV_HEADER = "ebn0_db,strategy,wpf,mean_sl,mean_similarity,trials,seed"

_DECODE_CHUNK_CELLS = 1 << 22


@dataclass(frozen=True)
class ErasureSim:
    """Raw erasure draws: one row per trial, one column per frame."""

    erased: np.ndarray
    loss_rates: np.ndarray
    decode_success_rates: np.ndarray | None = None


@dataclass(frozen=True)
class TrialReport:
    """One transmission trial: what was lost and how the recovery scored."""

    trial: int
    erased_frames: tuple[int, ...]
    recovered_text: str
    realized_loss: float
    similarity: float


@dataclass(frozen=True)
class PipelineResult:
    """A full single-caption run: profile, chosen MCS, and per-trial outcomes."""

    caption: str
    profile: ImportanceProfile
    assignment: Assignment
    trials: list[TrialReport]
    mean_realized_loss: float
    mean_similarity: float


@dataclass(frozen=True)
class SweepRow:
    """One (Eb/N0, strategy) cell of a sweep, averaged over captions and trials."""

    ebn0_db: float
    strategy: str
    wpf: int
    mean_sl: float
    mean_similarity: float
    trials: int
    seed: int


def _substream(seed: int, *path: int) -> np.random.Generator:
    return np.random.default_rng([seed, *path])


def simulate_frame_erasures(
    frames: Sequence[FrameSpec],
    assignment: Assignment,
    channel: ChannelModel,
    trials: int,
    seed: int,
    mode: str = "analytic-bernoulli",
) -> ErasureSim:
    """Draw `trials` independent erasure patterns for one assignment."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if len(frames) != len(assignment.choices):
        raise ValueError(
            f"assignment has {len(assignment.choices)} choices for {len(frames)} frames"
        )
    if mode not in ("analytic-bernoulli", "bit-level"):
        raise ValueError(f"unknown erasure mode {mode!r}")
    erased = np.zeros((trials, len(frames)), dtype=bool)
    decode_ok = np.ones((trials, len(frames)), dtype=bool) if mode == "bit-level" else None
    for fi, (frame, choice) in enumerate(zip(frames, assignment.choices)):
        rng = _substream(seed, fi)
        gamma = snr_gamma(channel, choice.scheme, choice.code.rate)
        p_bit = bit_error_prob(choice.scheme, gamma)
        if mode == "analytic-bernoulli":
            p_frame = frame_loss_from_pbit(frame.payload_bits, choice.code, p_bit)
            erased[:, fi] = rng.random(trials) < p_frame
        else:
            lost, redecoded = _bit_level_frame(frame, choice.code, p_bit, trials, rng)
            erased[:, fi] = lost
            decode_ok[:, fi] = redecoded
    return ErasureSim(
        erased=erased,
        loss_rates=erased.mean(axis=0),
        decode_success_rates=None if decode_ok is None else decode_ok.mean(axis=0),
    )


def _bit_level_frame(
    frame: FrameSpec,
    code,
    p_bit: float,
    trials: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Encode random payloads, flip coded bits, apply both acceptance rules.

    Returns (frame lost under the bounded-distance rule, frame fully
    recovered by nearest-codeword decoding). Distance computation is
    chunked over trials to bound memory.
    """
    blocks = -(-frame.payload_bits // code.dimension)
    table = codeword_table(code.dimension)
    messages = rng.integers(0, table.shape[0], size=(trials, blocks))
    flips = rng.random((trials, blocks, code.block_len)) < p_bit
    lost = (flips.sum(axis=2) > code.correctable).any(axis=1)
    received = table[messages] ^ flips
    redecoded = np.empty(trials, dtype=bool)
    chunk = max(1, _DECODE_CHUNK_CELLS // (blocks * table.shape[0] * code.block_len))
    for start in range(0, trials, chunk):
        sl = slice(start, start + chunk)
        distances = (received[sl, :, None, :] != table[None, None, :, :]).sum(axis=3)
        best = distances.argmin(axis=2)
        redecoded[sl] = (best == messages[sl]).all(axis=1)
    return lost, redecoded


class _SimilarityScorer:
    """Scores erasure patterns, memoizing by pattern.

    Patterns repeat heavily across trials (especially the empty one at
    high SNR), and correction plus embedding is the expensive step, so
    each distinct pattern is corrected and embedded once.
    """

    def __init__(
        self,
        caption: Caption,
        frames: Sequence[FrameSpec],
        embedder: Embedder,
        corrector: Corrector,
    ) -> None:
        self._caption = caption
        self._frames = frames
        self._embedder = embedder
        self._corrector = corrector
        self._cache: dict[frozenset[int], tuple[str, float]] = {}

    def score(self, erased_frames: frozenset[int]) -> tuple[str, float]:
        hit = self._cache.get(erased_frames)
        if hit is not None:
            return hit
        if not erased_frames:
            result = (self._caption.text(), 1.0)
        else:
            damaged = apply_erasures(self._caption, self._frames, erased_frames)
            try:
                corrected = self._corrector.correct(damaged.text())
            except ProviderError:
                raise
            except Exception as exc:
                raise ProviderError(f"corrector failed during simulation: {exc}") from exc
            recovered = tokenize(corrected)
            result = (corrected, end_to_end_similarity(self._caption, recovered, self._embedder))
        self._cache[erased_frames] = result
        return result


def run_pipeline(
    caption: Caption,
    config: RunConfig,
    embedder: Embedder,
    weight_corrector: Corrector,
    trial_corrector: Corrector,
    profile: ImportanceProfile | None = None,
    ebn0_db: float | None = None,
    search_seed: int | None = None,
    trial_seed: int | None = None,
) -> PipelineResult:
    """End-to-end single-caption run: weights, MCS choice, Monte Carlo trials.

    `weight_corrector` feeds the importance computation (skipped when a
    precomputed `profile` is supplied); `trial_corrector` is applied to
    each received caption before scoring.
    """
    frames = build_frames(caption, config.words_per_frame, config.header_bytes)
    if profile is None:
        profile = frame_importance(caption, frames, embedder, weight_corrector)
    if len(profile.weights) != len(frames):
        raise ValueError(
            f"profile has {len(profile.weights)} weights but the caption framed "
            f"into {len(frames)} frames"
        )
    weighted = with_importance(frames, profile.weights)
    channel = config.channel(ebn0_db)
    assignment = greedy_search(
        weighted,
        channel,
        config.resolved_delay_budget,
        config.modulation_schemes(),
        config.code_schemes(),
        num_candidates=config.num_candidates,
        seed=config.seed if search_seed is None else search_seed,
    )
    sim = simulate_frame_erasures(
        weighted,
        assignment,
        channel,
        config.trials,
        config.seed if trial_seed is None else trial_seed,
        mode=config.erasure_mode,
    )
    scorer = _SimilarityScorer(caption, weighted, embedder, trial_corrector)
    reports = []
    weights = np.asarray(profile.weights)
    for t in range(config.trials):
        pattern = frozenset(
            weighted[fi].index for fi in np.flatnonzero(sim.erased[t])
        )
        recovered_text, similarity = scorer.score(pattern)
        realized = float(weights[sim.erased[t]].sum())
        reports.append(
            TrialReport(
                trial=t,
                erased_frames=tuple(sorted(pattern)),
                recovered_text=recovered_text,
                realized_loss=realized,
                similarity=similarity,
            )
        )
    return PipelineResult(
        caption=caption.text(),
        profile=profile,
        assignment=assignment,
        trials=reports,
        mean_realized_loss=float(np.mean([r.realized_loss for r in reports])),
        mean_similarity=float(np.mean([r.similarity for r in reports])),
    )


def _search_seed(seed: int, grid_index: int, caption_index: int) -> int:
    return int(np.random.SeedSequence((seed, 0, grid_index, caption_index)).generate_state(1)[0])


def _trial_seed(seed: int, grid_index: int, caption_index: int) -> int:
    return int(np.random.SeedSequence((seed, 1, grid_index, caption_index)).generate_state(1)[0])


def sweep(
    captions: Sequence[Caption],
    config: RunConfig,
    embedder: Embedder,
    weight_corrector_for: Callable[[Caption], Corrector],
    trial_corrector_for: Callable[[Caption], Corrector],
    profiles: dict[str, ImportanceProfile] | None = None,
) -> list[SweepRow]:
    """Grid of (Eb/N0, strategy) cells averaged over all captions.

    Importance weights come from `profiles` (keyed by caption text) when
    given, otherwise from one weighting pass per caption. The optimizer
    seed and the channel-noise seed for each grid point depend on the
    caption and the grid index but not on the strategy, so every
    strategy is scored against the same noise and the same candidate
    pool.
    """
    if not captions:
        raise ValueError("sweep needs at least one caption")
    modulations = config.modulation_schemes()
    codes = config.code_schemes()
    budget = config.resolved_delay_budget
    cache = ProfileCache()
    prepared = []
    for caption in captions:
        frames = build_frames(caption, config.words_per_frame, config.header_bytes)
        if profiles is not None:
            profile = profiles.get(caption.text())
            if profile is None:
                raise ValueError(f"no importance profile for caption {caption.text()!r}")
            if len(profile.weights) != len(frames):
                raise ValueError(
                    f"profile for {caption.text()!r} has {len(profile.weights)} weights "
                    f"but the caption framed into {len(frames)} frames"
                )
        else:
            profile = cache.get_or_compute(
                caption, frames, embedder, weight_corrector_for(caption)
            )
        prepared.append((caption, with_importance(frames, profile.weights), profile))

    rows = []
    for gi, ebn0_db in enumerate(config.ebn0_grid_db):
        channel = config.channel(ebn0_db)
        searched: dict[tuple[int, str], Assignment] = {}
        for strategy in config.strategies:
            losses = []
            similarities = []
            for ci, (caption, weighted, profile) in enumerate(prepared):
                solver = uniform_baseline if strategy == STRATEGY_UNIFORM else greedy_search
                key = (ci, "uniform" if strategy == STRATEGY_UNIFORM else "semantic")
                assignment = searched.get(key)
                if assignment is None:
                    assignment = solver(
                        weighted,
                        channel,
                        budget,
                        modulations,
                        codes,
                        num_candidates=config.num_candidates,
                        seed=_search_seed(config.seed, gi, ci),
                    )
                    searched[key] = assignment
                losses.append(assignment.semantic_loss)
                sim = simulate_frame_erasures(
                    weighted,
                    assignment,
                    channel,
                    config.trials,
                    _trial_seed(config.seed, gi, ci),
                    mode=config.erasure_mode,
                )
                corrector = (
                    trial_corrector_for(caption)
                    if strategy == STRATEGY_CORRECTED
                    else _IDENTITY
                )
                scorer = _SimilarityScorer(caption, weighted, embedder, corrector)
                per_trial = [
                    scorer.score(
                        frozenset(weighted[fi].index for fi in np.flatnonzero(sim.erased[t]))
                    )[1]
                    for t in range(config.trials)
                ]
                similarities.append(float(np.mean(per_trial)))
            rows.append(
                SweepRow(
                    ebn0_db=float(ebn0_db),
                    strategy=strategy,
                    wpf=config.words_per_frame,
                    mean_sl=float(np.mean(losses)),
                    mean_similarity=float(np.mean(similarities)),
                    trials=config.trials,
                    seed=config.seed,
                )
            )
    return rows


_IDENTITY = IdentityCorrector()


def write_sweep_csv(rows: Sequence[SweepRow], stream: TextIO) -> None:
    """Write sweep rows in a fixed column order with repr-exact floats,
    so equal configurations always produce byte-identical files."""
    stream.write(SWEEP_CSV_HEADER + "\n")
    for row in rows:
        stream.write(
            f"{row.ebn0_db!r},{row.strategy},{row.wpf},{row.mean_sl!r},"
            f"{row.mean_similarity!r},{row.trials},{row.seed}\n"
        )
