"""Caption tokenization, frame construction, and erasure bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

MASK_TOKEN = "[MASK]"


@dataclass(frozen=True)
class Caption:
    """An ordered word sequence with a set of erased word positions."""

    words: tuple[str, ...]
    erased: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if not self.words:
            raise ValueError("a caption needs at least one word")
        for word in self.words:
            if not word or any(ch.isspace() for ch in word):
                raise ValueError(f"caption words must be non-empty and whitespace-free, got {word!r}")
        if not all(0 <= i < len(self.words) for i in self.erased):
            raise ValueError("erased word index out of range")

    def __len__(self) -> int:
        return len(self.words)

    def text(self) -> str:
        """Render as a single-space-joined string; erased words become the mask token."""
        return " ".join(
            MASK_TOKEN if i in self.erased else word for i, word in enumerate(self.words)
        )


def tokenize(text: str) -> Caption:
    """Split on whitespace runs. Punctuation stays attached to its word."""
    words = text.split()
    if not words:
        raise ValueError("cannot tokenize empty or whitespace-only text")
    return Caption(words=tuple(words))


def load_captions(path: str | Path) -> list[Caption]:
    """One caption per non-blank line of a UTF-8 text file."""
    captions = [
        tokenize(line)
        for line in Path(path).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    if not captions:
        raise ValueError(f"no captions found in {path}")
    return captions


@dataclass(frozen=True)
class FrameSpec:
    """One transmission frame: a contiguous word span plus its payload size.

    `index` is 1-based; `start`/`stop` are a 0-based half-open word range.
    `payload_bits` counts the frame header plus the UTF-8 bytes of the
    frame's words joined by single spaces. `importance` is attached by
    the semantics layer and stays None until then.
    """

    index: int
    start: int
    stop: int
    payload_bits: int
    importance: float | None = None

    def words_of(self, caption: Caption) -> tuple[str, ...]:
        return caption.words[self.start : self.stop]


def build_frames(caption: Caption, words_per_frame: int, header_bytes: int = 10) -> list[FrameSpec]:
    """Partition a caption into frames of `words_per_frame` words.

    The last frame absorbs the remainder when the word count is not a
    multiple of `words_per_frame`, so the frames always cover the whole
    caption exactly once.
    """
    if words_per_frame < 1:
        raise ValueError(f"words per frame must be >= 1, got {words_per_frame}")
    if header_bytes < 0:
        raise ValueError(f"header bytes must be >= 0, got {header_bytes}")
    frames = []
    for number, start in enumerate(range(0, len(caption), words_per_frame), start=1):
        stop = min(start + words_per_frame, len(caption))
        data = " ".join(caption.words[start:stop]).encode("utf-8")
        frames.append(
            FrameSpec(
                index=number,
                start=start,
                stop=stop,
                payload_bits=8 * (header_bytes + len(data)),
            )
        )
    return frames


def with_importance(frames: Sequence[FrameSpec], weights: Sequence[float]) -> list[FrameSpec]:
    """Copies of `frames` with importance weights attached positionally."""
    if len(weights) != len(frames):
        raise ValueError(f"got {len(weights)} weights for {len(frames)} frames")
    return [replace(frame, importance=float(w)) for frame, w in zip(frames, weights)]


def apply_erasures(
    caption: Caption,
    frames: Sequence[FrameSpec],
    erased_frames: Iterable[int],
) -> Caption:
    """Mark every word of each erased frame as lost.

    Frame indices are the 1-based FrameSpec indices. Previously erased
    words stay erased.
    """
    erased = set(erased_frames)
    known = {frame.index for frame in frames}
    unknown = erased - known
    if unknown:
        raise ValueError(f"erased frame indices not present in the framing: {sorted(unknown)}")
    erased_words = set(caption.erased)
    for frame in frames:
        if frame.index in erased:
            erased_words.update(range(frame.start, frame.stop))
    return replace(caption, erased=frozenset(erased_words))
