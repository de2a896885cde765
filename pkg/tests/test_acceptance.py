"""Acceptance battery: one test per release criterion, one summary line each.

Every random quantity is drawn from a fixed seed, so each criterion is a
deterministic check, tuned once and frozen. The summary block printed
after the run comes from conftest.py.
"""

from __future__ import annotations

import math
import time
from pathlib import Path

import numpy as np
import pytest

from semlink.adapt import exhaustive_search, greedy_search, uniform_baseline
from semlink.cli import EXIT_OK, main
from semlink.codecs import (
    codeword_table,
    decode,
    encode,
    hadamard_params,
    index_to_message,
)
from semlink.config import RunConfig
from semlink.framing import FrameSpec, build_frames, tokenize, with_importance
from semlink.linkmath import (
    MODULATIONS,
    ChannelModel,
    block_correct_prob,
    frame_loss_prob,
    q_function,
    sep_psk,
    sep_qam,
    snr_gamma,
)
from semlink.semantics import FakeEmbedder, OracleCorrector, frame_importance, load_profiles
from semlink.simulate import simulate_frame_erasures, sweep

DATA = Path(__file__).resolve().parent.parent / "data"

ACCEPTANCE_LINES: list[str] = []


def _report(criterion: int, ok: bool, detail: str) -> None:
    line = f"[criterion {criterion}] {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_1_block_level_monte_carlo_bridge():
    """Simulated bounded-distance block success matches the binomial model."""
    code = hadamard_params(3)
    trials = 120_000
    started = time.perf_counter()
    worst_pull = 0.0
    for i, p_bit in enumerate((0.01, 0.05, 0.1)):
        rng = np.random.default_rng([1001, i])
        flips = rng.random((trials, code.block_len)) < p_bit
        empirical = float((flips.sum(axis=1) <= code.correctable).mean())
        analytic = block_correct_prob(code.block_len, code.correctable, p_bit)
        sigma = math.sqrt(analytic * (1.0 - analytic) / trials)
        worst_pull = max(worst_pull, abs(empirical - analytic) / sigma)
    elapsed = time.perf_counter() - started
    ok = worst_pull <= 3.0 and elapsed < 5.0
    _report(
        1, ok,
        f"block success vs binomial, worst |z| = {worst_pull:.2f} (limit 3), "
        f"{elapsed:.2f} s for 3x{trials} trials",
    )


def test_criterion_2_codec_exactness():
    """All messages, all correctable error patterns, plus exhaustive linearity."""
    import itertools

    checked = 0
    ok = True
    for order in (3, 4):
        code = hadamard_params(order)
        for idx in range(2 ** order):
            message = index_to_message(idx, order)
            word = encode(code, message)
            for nflips in range(code.correctable + 1):
                for positions in itertools.combinations(range(code.block_len), nflips):
                    corrupted = word.copy()
                    corrupted[list(positions)] ^= 1
                    decoded, _ = decode(code, corrupted)
                    if not np.array_equal(decoded, message):
                        ok = False
                    checked += 1
        table = codeword_table(order)
        for a in range(2 ** order):
            for b in range(2 ** order):
                if not np.array_equal(table[a] ^ table[b], table[a ^ b]):
                    ok = False
    _report(
        2, ok,
        f"decode exact on {checked} (message, error pattern) cases for k=3,4; "
        f"linearity exhaustive",
    )


def test_criterion_3_psk_and_qam_cross_checks():
    """The PSK correction integral against the closed-form QPSK identity."""
    worst_psk = 0.0
    for gamma in (0.0, 1.0, 5.0, 10.0, 20.0):
        closed_form = 1.0 - (1.0 - q_function(math.sqrt(gamma))) ** 2
        worst_psk = max(worst_psk, abs(sep_psk(4, gamma) - closed_form))
    worst_qam = 0.0
    for gamma in (0.0, 1.0, 5.0, 10.0, 20.0):
        worst_qam = max(worst_qam, abs(sep_qam(4, gamma) - sep_psk(4, gamma)))
    ok = worst_psk <= 1e-6 and worst_qam <= 1e-12
    _report(
        3, ok,
        f"QPSK integral vs closed form: max diff {worst_psk:.2e} (limit 1e-6); "
        f"4-QAM vs QPSK: max diff {worst_qam:.2e} (limit 1e-12)",
    )


def test_criterion_4_frame_loss_monte_carlo_bridge():
    """Both erasure models reproduce the analytic frame-loss probability."""
    points = [
        ("QPSK", 3, 3.0),
        ("16QAM", 4, 8.0),
        ("64QAM", 3, 20.0),
    ]
    trials = 20_000
    payload_bits = 120
    worst = {"analytic-bernoulli": 0.0, "bit-level": 0.0}
    for i, (name, order, gamma) in enumerate(points):
        scheme = MODULATIONS[name]
        code = hadamard_params(order)
        # Pick Eb/N0 so that the post-despreading SNR equals the target.
        ebn0 = gamma / (code.rate * scheme.bits_per_symbol)
        channel = ChannelModel(h_mag=1.0, ebn0=ebn0, symbol_rate=1e6)
        assert snr_gamma(channel, scheme, code.rate) == pytest.approx(gamma)
        expected = frame_loss_prob(payload_bits, scheme, code, gamma)
        sigma = math.sqrt(expected * (1.0 - expected) / trials)
        frames = [FrameSpec(index=1, start=0, stop=1, payload_bits=payload_bits, importance=1.0)]
        from semlink.adapt import Assignment, McsChoice

        assignment = Assignment(
            choices=(McsChoice(scheme, code),), semantic_loss=0.0, total_delay=0.0
        )
        for mode in worst:
            sim = simulate_frame_erasures(
                frames, assignment, channel, trials, seed=4000 + i, mode=mode
            )
            pull = abs(float(sim.loss_rates[0]) - expected) / sigma
            worst[mode] = max(worst[mode], pull)
    ok = all(pull <= 3.0 for pull in worst.values())
    _report(
        4, ok,
        f"frame-loss bridge at 3 operating points, worst |z|: "
        f"bernoulli {worst['analytic-bernoulli']:.2f}, bit-level {worst['bit-level']:.2f} (limit 3)",
    )


def test_criterion_5_sampled_search_vs_exhaustive():
    """100 random small instances: near-optimality and budget compliance."""
    modulations = [MODULATIONS[m] for m in ("QPSK", "16QAM", "64QAM")]
    codes = [hadamard_params(k) for k in (3, 4)]
    rng = np.random.default_rng(50_001)
    near_optimal = 0
    feasible_returns = 0
    instances = 100
    for _ in range(instances):
        num_frames = int(rng.integers(2, 5))
        frames = [
            FrameSpec(
                index=i + 1, start=i, stop=i + 1,
                payload_bits=int(rng.integers(80, 400)),
                importance=float(rng.uniform(0.05, 1.0)),
            )
            for i in range(num_frames)
        ]
        channel = ChannelModel(h_mag=1.0, ebn0=10 ** (rng.uniform(2.0, 8.0) / 10.0))
        # Budget from a handful of random assignments, so a healthy slice
        # of the space is always feasible.
        probe_delays = []
        for _probe in range(5):
            choices = [
                (modulations[rng.integers(0, len(modulations))],
                 codes[rng.integers(0, len(codes))])
                for _ in range(num_frames)
            ]
            probe_delays.append(sum(
                f.payload_bits / (m.bits_per_symbol * c.rate * channel.symbol_rate)
                for f, (m, c) in zip(frames, choices)
            ))
        budget = max(probe_delays) * 1.05
        optimum = exhaustive_search(frames, channel, budget, modulations, codes)
        sampled = greedy_search(
            frames, channel, budget, modulations, codes,
            num_candidates=1000, seed=int(rng.integers(0, 2 ** 31)),
        )
        if sampled.total_delay <= budget:
            feasible_returns += 1
        if sampled.semantic_loss <= 1.05 * optimum.semantic_loss:
            near_optimal += 1
    ok = near_optimal >= 95 and feasible_returns == instances
    _report(
        5, ok,
        f"sampled search within 1.05x of exhaustive optimum in {near_optimal}/100 "
        f"(need >= 95), budget satisfied in {feasible_returns}/100 (need 100)",
    )


def test_criterion_6_strategy_dominance_with_reference_weights():
    """Reference weights from file: importance-aware never loses to the
    importance-blind baseline, and a perfect corrector zeroes the loss."""
    profiles = {p.caption: p for p in load_profiles(DATA / "profiles" / "with_fill")}
    captions = [tokenize(text) for text in sorted(profiles)]
    config = RunConfig(
        trials=2,
        seed=601,
        strategies=("semantic_aware", "uniform"),
        num_candidates=1000,
    )
    from semlink.semantics import IdentityCorrector

    rows = sweep(
        captions, config, FakeEmbedder(seed=601),
        lambda c: IdentityCorrector(), lambda c: IdentityCorrector(),
        profiles=profiles,
    )
    grid = {}
    for row in rows:
        grid.setdefault(row.ebn0_db, {})[row.strategy] = row.mean_sl
    points = sorted(grid)
    dominated = all(
        grid[p]["semantic_aware"] <= grid[p]["uniform"] for p in points
    )
    strict_somewhere = any(
        grid[p]["semantic_aware"] < grid[p]["uniform"] for p in points
    )

    zero_losses = []
    for caption in captions:
        frames = build_frames(caption, config.words_per_frame, config.header_bytes)
        profile = frame_importance(
            caption, frames, FakeEmbedder(seed=601), OracleCorrector(caption)
        )
        weighted = with_importance(frames, profile.weights)
        result = greedy_search(
            weighted, config.channel(10.0), config.resolved_delay_budget,
            config.modulation_schemes(), config.code_schemes(),
            num_candidates=200, seed=601,
        )
        zero_losses.append(result.semantic_loss)
    all_zero = all(loss == 0.0 for loss in zero_losses)
    ok = dominated and all_zero and len(points) == 10
    _report(
        6, ok,
        f"importance-aware <= baseline at {len(points)}/10 grid points "
        f"(strictly better somewhere: {strict_somewhere}); "
        f"perfect-corrector loss exactly 0.0 on all 3 captions: {all_zero}",
    )


def test_criterion_7_sweep_determinism(tmp_path):
    """The sweep command is byte-reproducible for a fixed config and seed."""
    argv_base = [
        "sweep",
        "--captions", str(DATA / "captions.txt"),
        "--provider", f"file:{DATA / 'profiles' / 'with_fill'}",
        "--ebn0-grid-db", "0,4,8,12,16",
        "--trials", "25",
        "--seed", "7",
    ]
    first = tmp_path / "first.csv"
    second = tmp_path / "second.csv"
    code_a = main(argv_base + ["--out", str(first)])
    code_b = main(argv_base + ["--out", str(second)])
    identical = first.read_bytes() == second.read_bytes()
    ok = code_a == EXIT_OK and code_b == EXIT_OK and identical
    _report(
        7, ok,
        f"two sweep runs, identical bytes: {identical} "
        f"({first.stat().st_size} bytes each)",
    )
