#!/usr/bin/env python3
"""Compute per-frame importance profiles for a caption file.

One JSON profile per caption is written to the output directory, named
caption_<n>.json in file order. The corrector choice is what separates
"costly to lose" from "recoverable": the identity corrector leaves mask
tokens in place, a sidecar corrector asks a masked-language-model worker
to fill them.
"""

from __future__ import annotations

import argparse
import sys
from contextlib import ExitStack
from pathlib import Path

from semlink.framing import build_frames, load_captions
from semlink.semantics import FakeEmbedder, IdentityCorrector, OracleCorrector, frame_importance
from semlink.sidecar_client import SidecarCorrector, SidecarEmbedder, SidecarProcess

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("captions", nargs="?", default=str(ROOT / "data" / "captions.txt"))
    parser.add_argument("--out-dir", default=str(ROOT / "results" / "profiles"))
    parser.add_argument("--wpf", type=int, default=1, help="words per frame")
    parser.add_argument("--header-bytes", type=int, default=10)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument(
        "--corrector", default="identity",
        help="identity, oracle, or sidecar:<command>",
    )
    parser.add_argument(
        "--sidecar", metavar="COMMAND",
        help="also use the worker for embeddings, not just mask filling",
    )
    args = parser.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    captions = load_captions(args.captions)

    with ExitStack() as stack:
        process = None
        if args.sidecar:
            process = stack.enter_context(SidecarProcess(args.sidecar))
            embedder = SidecarEmbedder(process)
        else:
            embedder = FakeEmbedder(seed=args.seed)

        def corrector_for(caption):
            if args.corrector == "identity":
                return IdentityCorrector()
            if args.corrector == "oracle":
                return OracleCorrector(caption)
            if args.corrector.startswith("sidecar:"):
                command = args.corrector.split(":", 1)[1]
                if process is not None and command == args.sidecar:
                    return SidecarCorrector(process)
                return SidecarCorrector(stack.enter_context(SidecarProcess(command)))
            raise SystemExit(f"unknown corrector {args.corrector!r}")

        for n, caption in enumerate(captions, start=1):
            frames = build_frames(caption, args.wpf, args.header_bytes)
            profile = frame_importance(caption, frames, embedder, corrector_for(caption))
            target = out_dir / f"caption_{n}.json"
            profile.save(target)
            peak = max(range(len(profile.weights)), key=profile.weights.__getitem__)
            print(
                f"{target}: {len(profile.weights)} frames, "
                f"peak weight {profile.weights[peak]:.4f} on frame {peak + 1}"
            )
    return 0


if __name__ == "__main__":
    sys.exit(main())
