"""Delay-constrained selection of per-frame modulation and coding.

The objective is the importance-weighted sum of analytic frame-loss
probabilities; the constraint is the summed serialization delay. Three
solvers share one evaluation core: seeded uniform candidate sampling
scored by semantic loss (the production path), the same sampler scored
importance-blind (the baseline), and exhaustive enumeration (the oracle
for small instances).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from semlink.codecs import CodeScheme
from semlink.framing import FrameSpec
from semlink.linkmath import (
    ChannelModel,
    ModulationScheme,
    bit_error_prob,
    frame_loss_from_pbit,
    snr_gamma,
)

EXHAUSTIVE_CAP = 1_000_000


@dataclass(frozen=True)
class McsChoice:
    """One frame's link setting: a constellation and a Hadamard code."""

    scheme: ModulationScheme
    code: CodeScheme


@dataclass(frozen=True)
class Assignment:
    """A full per-frame MCS selection with its evaluated loss and delay."""

    choices: tuple[McsChoice, ...]
    semantic_loss: float
    total_delay: float


class InfeasibleError(RuntimeError):
    """No candidate met the delay budget. Carries the tightest delay seen."""

    def __init__(self, message: str, min_delay: float) -> None:
        super().__init__(message)
        self.min_delay = min_delay


class SearchSpaceError(RuntimeError):
    """Exhaustive enumeration would exceed the configured cap."""


def frame_delay(payload_bits: int, choice: McsChoice, symbol_rate: float) -> float:
    """Serialization time of one frame: bits / (log2(M) * code rate * symbol rate)."""
    if payload_bits < 1:
        raise ValueError(f"payload must be >= 1 bit, got {payload_bits}")
    if symbol_rate <= 0:
        raise ValueError(f"symbol rate must be > 0, got {symbol_rate}")
    return payload_bits / (choice.scheme.bits_per_symbol * choice.code.rate * symbol_rate)


def total_delay(
    frames: Sequence[FrameSpec],
    choices: Sequence[McsChoice],
    symbol_rate: float,
) -> float:
    if len(frames) != len(choices):
        raise ValueError(f"got {len(choices)} choices for {len(frames)} frames")
    return sum(
        frame_delay(frame.payload_bits, choice, symbol_rate)
        for frame, choice in zip(frames, choices)
    )


def _weights_of(frames: Sequence[FrameSpec]) -> list[float]:
    weights = []
    for frame in frames:
        if frame.importance is None:
            raise ValueError(f"frame {frame.index} has no importance weight attached")
        weights.append(frame.importance)
    return weights


def evaluate(
    frames: Sequence[FrameSpec],
    choices: Sequence[McsChoice],
    channel: ChannelModel,
) -> tuple[float, float]:
    """Analytic (semantic loss, total delay) of one full assignment."""
    weights = _weights_of(frames)
    if len(frames) != len(choices):
        raise ValueError(f"got {len(choices)} choices for {len(frames)} frames")
    loss = 0.0
    for frame, choice, weight in zip(frames, choices, weights):
        gamma = snr_gamma(channel, choice.scheme, choice.code.rate)
        p_bit = bit_error_prob(choice.scheme, gamma)
        loss += weight * frame_loss_from_pbit(frame.payload_bits, choice.code, p_bit)
    return loss, total_delay(frames, choices, channel.symbol_rate)


def _choice_tables(
    frames: Sequence[FrameSpec],
    channel: ChannelModel,
    modulations: Sequence[ModulationScheme],
    codes: Sequence[CodeScheme],
) -> tuple[np.ndarray, np.ndarray]:
    """Per-frame loss and delay for every (modulation, code) pair.

    The raw bit error rate depends only on the pair, so it is computed
    once per pair and reused across frames.
    """
    loss = np.empty((len(frames), len(modulations), len(codes)))
    delay = np.empty_like(loss)
    for mi, scheme in enumerate(modulations):
        for ci, code in enumerate(codes):
            gamma = snr_gamma(channel, scheme, code.rate)
            p_bit = bit_error_prob(scheme, gamma)
            bits_per_second = scheme.bits_per_symbol * code.rate * channel.symbol_rate
            for fi, frame in enumerate(frames):
                loss[fi, mi, ci] = frame_loss_from_pbit(frame.payload_bits, code, p_bit)
                delay[fi, mi, ci] = frame.payload_bits / bits_per_second
    return loss, delay


def _validate_menu(
    frames: Sequence[FrameSpec],
    modulations: Sequence[ModulationScheme],
    codes: Sequence[CodeScheme],
) -> None:
    if not frames:
        raise ValueError("need at least one frame")
    if not modulations or not codes:
        raise ValueError("need at least one modulation and one code to choose from")


def _assignment_from_indices(
    mod_idx: Sequence[int],
    code_idx: Sequence[int],
    modulations: Sequence[ModulationScheme],
    codes: Sequence[CodeScheme],
    loss: float,
    delay: float,
) -> Assignment:
    choices = tuple(
        McsChoice(scheme=modulations[m], code=codes[c]) for m, c in zip(mod_idx, code_idx)
    )
    return Assignment(choices=choices, semantic_loss=float(loss), total_delay=float(delay))


def _pick_best(
    scores: np.ndarray,
    feasible: np.ndarray,
    mod_idx: np.ndarray,
    code_idx: np.ndarray,
) -> int | None:
    """Lowest score among feasible rows; exact score ties go to the candidate
    whose per-frame (modulation, code) index sequence is lexicographically
    smallest, so the winner never depends on sample order."""
    candidates = np.flatnonzero(feasible)
    if candidates.size == 0:
        return None
    best_score = scores[candidates].min()
    tied = candidates[scores[candidates] == best_score]
    if tied.size == 1:
        return int(tied[0])
    keys = [
        tuple(int(v) for pair in zip(mod_idx[row], code_idx[row]) for v in pair)
        for row in tied
    ]
    return int(tied[min(range(len(keys)), key=keys.__getitem__)])


def _sampled_search(
    frames: Sequence[FrameSpec],
    channel: ChannelModel,
    delay_budget: float,
    modulations: Sequence[ModulationScheme],
    codes: Sequence[CodeScheme],
    num_candidates: int,
    seed: int,
    importance_aware: bool,
) -> Assignment:
    _validate_menu(frames, modulations, codes)
    if num_candidates < 1:
        raise ValueError(f"need at least one candidate, got {num_candidates}")
    if delay_budget <= 0:
        raise ValueError(f"delay budget must be > 0, got {delay_budget}")
    weights = np.asarray(_weights_of(frames))
    loss, delay = _choice_tables(frames, channel, modulations, codes)
    rng = np.random.default_rng(seed)
    mod_idx = rng.integers(0, len(modulations), size=(num_candidates, len(frames)))
    code_idx = rng.integers(0, len(codes), size=(num_candidates, len(frames)))
    rows = np.arange(len(frames))[None, :]
    frame_loss = loss[rows, mod_idx, code_idx]
    candidate_delay = delay[rows, mod_idx, code_idx].sum(axis=1)
    semantic = frame_loss @ weights
    scores = semantic if importance_aware else frame_loss.sum(axis=1)
    best = _pick_best(scores, candidate_delay <= delay_budget, mod_idx, code_idx)
    if best is None:
        tightest = float(candidate_delay.min())
        raise InfeasibleError(
            f"none of {num_candidates} sampled assignments met the delay budget "
            f"{delay_budget:.6g} s; the tightest sampled delay was {tightest:.6g} s",
            min_delay=tightest,
        )
    return _assignment_from_indices(
        mod_idx[best], code_idx[best], modulations, codes,
        semantic[best], candidate_delay[best],
    )


def greedy_search(
    frames: Sequence[FrameSpec],
    channel: ChannelModel,
    delay_budget: float,
    modulations: Sequence[ModulationScheme],
    codes: Sequence[CodeScheme],
    num_candidates: int = 1000,
    seed: int = 0,
) -> Assignment:
    """Seeded randomized search: sample `num_candidates` full assignments
    uniformly, drop the ones over the delay budget, keep the lowest
    semantic loss.

    Deterministic for a fixed seed. Raises InfeasibleError when no sample
    fits the budget.
    """
    return _sampled_search(
        frames, channel, delay_budget, modulations, codes,
        num_candidates, seed, importance_aware=True,
    )


def uniform_baseline(
    frames: Sequence[FrameSpec],
    channel: ChannelModel,
    delay_budget: float,
    modulations: Sequence[ModulationScheme],
    codes: Sequence[CodeScheme],
    num_candidates: int = 1000,
    seed: int = 0,
) -> Assignment:
    """Importance-blind variant of greedy_search.

    Draws the identical candidate set for the same seed but scores it by
    the unweighted sum of frame losses. The returned Assignment still
    reports the true importance-weighted semantic loss, so for equal
    seeds its loss can never beat greedy_search on the same instance.
    """
    return _sampled_search(
        frames, channel, delay_budget, modulations, codes,
        num_candidates, seed, importance_aware=False,
    )


def exhaustive_search(
    frames: Sequence[FrameSpec],
    channel: ChannelModel,
    delay_budget: float,
    modulations: Sequence[ModulationScheme],
    codes: Sequence[CodeScheme],
    cap: int = EXHAUSTIVE_CAP,
) -> Assignment:
    """Enumerate every assignment and return the feasible optimum.

    Candidates are visited in lexicographic per-frame (modulation, code)
    index order and ties keep the first one seen, matching the sampled
    solvers' tie rule. Instances larger than `cap` raise SearchSpaceError
    before any work is done.
    """
    _validate_menu(frames, modulations, codes)
    if delay_budget <= 0:
        raise ValueError(f"delay budget must be > 0, got {delay_budget}")
    pairs_per_frame = len(modulations) * len(codes)
    size = pairs_per_frame ** len(frames)
    if size > cap:
        raise SearchSpaceError(
            f"exhaustive search over {size} assignments exceeds the cap of {cap}"
        )
    weights = np.asarray(_weights_of(frames))
    loss, delay = _choice_tables(frames, channel, modulations, codes)
    pair_indices = list(itertools.product(range(len(modulations)), range(len(codes))))
    best_combo: tuple[tuple[int, int], ...] | None = None
    best_loss = np.inf
    best_delay = np.inf
    min_delay = np.inf
    frame_rows = range(len(frames))
    for combo in itertools.product(pair_indices, repeat=len(frames)):
        candidate_delay = sum(delay[f, m, c] for f, (m, c) in zip(frame_rows, combo))
        min_delay = min(min_delay, candidate_delay)
        if candidate_delay > delay_budget:
            continue
        candidate_loss = sum(
            weights[f] * loss[f, m, c] for f, (m, c) in zip(frame_rows, combo)
        )
        if candidate_loss < best_loss:
            best_loss = candidate_loss
            best_delay = candidate_delay
            best_combo = combo
    if best_combo is None:
        raise InfeasibleError(
            f"no assignment out of {size} meets the delay budget {delay_budget:.6g} s; "
            f"the minimum achievable delay is {min_delay:.6g} s",
            min_delay=float(min_delay),
        )
    return _assignment_from_indices(
        [m for m, _ in best_combo], [c for _, c in best_combo],
        modulations, codes, best_loss, best_delay,
    )
