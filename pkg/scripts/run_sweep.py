#!/usr/bin/env python3
"""Sweep the bundled captions at one and two words per frame.

Writes one CSV per framing to the output directory, using the reference
importance weights shipped under data/profiles. The two-word sweep
reuses the one-word weights by pairing them, which keeps the comparison
on identical captions; pass --provider fake to recompute weights from
the offline embedder instead.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from semlink.config import RunConfig
from semlink.framing import load_captions
from semlink.semantics import FakeEmbedder, IdentityCorrector, ImportanceProfile, load_profiles
from semlink.simulate import sweep, write_sweep_csv

ROOT = Path(__file__).resolve().parent.parent


def paired_profile(profile: ImportanceProfile, words_per_frame: int) -> ImportanceProfile:
    """Collapse single-word weights onto wider frames by taking the maximum
    over each frame's words: losing the frame loses its strongest word."""
    weights = profile.weights
    grouped = [
        max(weights[i : i + words_per_frame])
        for i in range(0, len(weights), words_per_frame)
    ]
    return ImportanceProfile(
        caption=profile.caption,
        words_per_frame=words_per_frame,
        provider=f"{profile.provider}|grouped:max",
        weights=grouped,
    )


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default=str(ROOT / "results"), help="output directory")
    parser.add_argument("--trials", type=int, default=200)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument(
        "--provider", choices=["reference", "fake"], default="reference",
        help="weight source: bundled reference profiles or the offline embedder",
    )
    args = parser.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    captions = load_captions(ROOT / "data" / "captions.txt")
    embedder = FakeEmbedder(seed=args.seed)
    reference = {p.caption: p for p in load_profiles(ROOT / "data" / "profiles" / "with_fill")}

    for words_per_frame in (1, 2):
        config = RunConfig(
            words_per_frame=words_per_frame,
            trials=args.trials,
            seed=args.seed,
            strategies=("semantic_aware", "uniform"),
        )
        profiles = None
        if args.provider == "reference":
            profiles = {
                text: (profile if words_per_frame == 1 else paired_profile(profile, words_per_frame))
                for text, profile in reference.items()
            }
        rows = sweep(
            captions, config, embedder,
            lambda c: IdentityCorrector(), lambda c: IdentityCorrector(),
            profiles=profiles,
        )
        target = out_dir / f"sweep_wpf{words_per_frame}.csv"
        with target.open("w", encoding="utf-8") as stream:
            write_sweep_csv(rows, stream)
        print(f"wrote {target} ({len(rows)} rows)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
