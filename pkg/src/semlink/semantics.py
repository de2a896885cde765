"""Importance weighting and semantic-loss arithmetic over pluggable providers.

An embedder maps text to a vector; a corrector rewrites masked text.
A frame's importance is one minus the cosine similarity between the
intact caption and the caption with that frame erased and then run
through the corrector: frames the corrector can restore cost nothing
to lose, frames it cannot restore cost up to 2.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from semlink.framing import MASK_TOKEN, Caption, FrameSpec, apply_erasures


class ProviderError(RuntimeError):
    """An embedder or corrector failed. The message names the stage."""


@runtime_checkable
class Embedder(Protocol):
    """Maps non-empty text to a finite, nonzero vector of fixed dimension."""

    fingerprint: str

    def embed(self, text: str) -> np.ndarray: ...


@runtime_checkable
class Corrector(Protocol):
    """Rewrites text containing mask tokens; must preserve determinism."""

    fingerprint: str

    def correct(self, masked_text: str) -> str: ...


def cosine_similarity(u: Sequence[float] | np.ndarray, v: Sequence[float] | np.ndarray) -> float:
    """Cosine of the angle between two equal-shape vectors, clipped to [-1, 1].

    The clip only absorbs float round-off at the ends of the range.
    Zero-norm or non-finite input raises ValueError: a degenerate
    embedding is a provider bug, not a similarity of zero.
    """
    a = np.asarray(u, dtype=float)
    b = np.asarray(v, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"need two equal-length 1-d vectors, got shapes {a.shape} and {b.shape}")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise ValueError("embedding vectors must be finite")
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ValueError("cannot take cosine similarity with a zero-norm vector")
    return float(np.clip(np.dot(a, b) / (norm_a * norm_b), -1.0, 1.0))


@dataclass
class ImportanceProfile:
    """Per-frame importance weights plus enough context to reuse them safely."""

    caption: str
    words_per_frame: int
    provider: str
    weights: list[float]

    def __post_init__(self) -> None:
        if self.words_per_frame < 1:
            raise ValueError(f"words per frame must be >= 1, got {self.words_per_frame}")
        self.weights = [float(w) for w in self.weights]

    def to_dict(self) -> dict:
        return asdict(self)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, raw: dict) -> ImportanceProfile:
        missing = {"caption", "words_per_frame", "provider", "weights"} - raw.keys()
        if missing:
            raise ValueError(f"importance profile is missing fields: {sorted(missing)}")
        return cls(
            caption=str(raw["caption"]),
            words_per_frame=int(raw["words_per_frame"]),
            provider=str(raw["provider"]),
            weights=[float(w) for w in raw["weights"]],
        )

    @classmethod
    def load(cls, path: str | Path) -> ImportanceProfile:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def load_profiles(path: str | Path) -> list[ImportanceProfile]:
    """Load profiles from a JSON file (object or array) or a directory of them."""
    target = Path(path)
    if target.is_dir():
        files = sorted(target.glob("*.json"))
        if not files:
            raise ValueError(f"no profile JSON files in directory {target}")
        return [ImportanceProfile.load(f) for f in files]
    raw = json.loads(target.read_text(encoding="utf-8"))
    if isinstance(raw, list):
        return [ImportanceProfile.from_dict(item) for item in raw]
    return [ImportanceProfile.from_dict(raw)]


def frame_importance(
    caption: Caption,
    frames: Sequence[FrameSpec],
    embedder: Embedder,
    corrector: Corrector,
) -> ImportanceProfile:
    """Weight each frame by the similarity damage its loss would cause.

    For every frame: erase its words, render with mask tokens, let the
    corrector complete the text, and compare embeddings of the original
    and the completion. A completion identical to the original text
    scores exactly 0.0 without calling the embedder.
    """
    if caption.erased:
        raise ValueError("importance weighting needs an intact caption")
    if not frames:
        raise ValueError("importance weighting needs at least one frame")
    original_text = caption.text()
    original_vec: np.ndarray | None = None
    weights: list[float] = []
    for frame in frames:
        masked = apply_erasures(caption, frames, {frame.index})
        try:
            completed = corrector.correct(masked.text())
        except ProviderError:
            raise
        except Exception as exc:
            raise ProviderError(f"corrector failed on frame {frame.index}: {exc}") from exc
        if completed == original_text:
            weights.append(0.0)
            continue
        try:
            if original_vec is None:
                original_vec = np.asarray(embedder.embed(original_text), dtype=float)
            completed_vec = np.asarray(embedder.embed(completed), dtype=float)
        except ProviderError:
            raise
        except Exception as exc:
            raise ProviderError(f"embedder failed on frame {frame.index}: {exc}") from exc
        weights.append(1.0 - cosine_similarity(original_vec, completed_vec))
    words_per_frame = max(frame.stop - frame.start for frame in frames)
    return ImportanceProfile(
        caption=original_text,
        words_per_frame=words_per_frame,
        provider=f"{embedder.fingerprint}+{corrector.fingerprint}",
        weights=weights,
    )


def semantic_loss(weights: Sequence[float], loss_probs: Sequence[float]) -> float:
    """Expected semantic damage: the importance-weighted sum of frame losses."""
    if len(weights) != len(loss_probs):
        raise ValueError(f"got {len(weights)} weights for {len(loss_probs)} loss probabilities")
    for p in loss_probs:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"loss probabilities must be in [0, 1], got {p}")
    return float(sum(w * p for w, p in zip(weights, loss_probs)))


def end_to_end_similarity(original: Caption, recovered: Caption, embedder: Embedder) -> float:
    """Embedding similarity between sent and recovered caption text.

    Identical renderings score exactly 1.0 without calling the embedder.
    """
    sent = original.text()
    got = recovered.text()
    if sent == got:
        return 1.0
    try:
        return cosine_similarity(embedder.embed(sent), embedder.embed(got))
    except ProviderError:
        raise
    except Exception as exc:
        raise ProviderError(f"embedder failed while scoring similarity: {exc}") from exc


class ProfileCache:
    """Memoizes importance profiles per (caption, framing, provider) key."""

    def __init__(self) -> None:
        self._store: dict[tuple[str, tuple[tuple[int, int], ...], str, str], ImportanceProfile] = {}

    def get_or_compute(
        self,
        caption: Caption,
        frames: Sequence[FrameSpec],
        embedder: Embedder,
        corrector: Corrector,
    ) -> ImportanceProfile:
        key = (
            caption.text(),
            tuple((f.start, f.stop) for f in frames),
            embedder.fingerprint,
            corrector.fingerprint,
        )
        profile = self._store.get(key)
        if profile is None:
            profile = frame_importance(caption, frames, embedder, corrector)
            self._store[key] = profile
        return profile


class FakeEmbedder:
    """Deterministic offline stand-in for a sentence encoder.

    Every word hashes to a fixed non-negative direction, and a text maps
    to the sum over its word multiset. Entries are non-negative, so any
    two embeddings have cosine similarity in [0, 1], and texts with the
    same word multiset collide exactly.
    """

    def __init__(self, dim: int = 64, seed: int = 0) -> None:
        if dim < 2:
            raise ValueError(f"embedding dimension must be >= 2, got {dim}")
        self.dim = dim
        self.seed = seed
        self.fingerprint = f"fake-embedder:dim={dim},seed={seed}"
        self._word_cache: dict[str, np.ndarray] = {}

    def _word_vector(self, word: str) -> np.ndarray:
        vec = self._word_cache.get(word)
        if vec is None:
            digest = hashlib.blake2b(f"{self.seed}:{word}".encode("utf-8"), digest_size=8).digest()
            rng = np.random.default_rng(int.from_bytes(digest, "big"))
            # Norms vary per word so that dropping different words moves the
            # sentence vector by visibly different amounts.
            vec = rng.random(self.dim) * rng.uniform(0.3, 3.0)
            self._word_cache[word] = vec
        return vec

    def embed(self, text: str) -> np.ndarray:
        words = text.split()
        if not words:
            raise ProviderError("cannot embed empty text")
        return np.sum([self._word_vector(word) for word in words], axis=0)


class IdentityCorrector:
    """Leaves mask tokens in place: the receiver without semantic correction."""

    fingerprint = "identity"

    def correct(self, masked_text: str) -> str:
        return masked_text


class OracleCorrector:
    """Restores the ground-truth words at masked positions.

    An upper bound on any real mask-filling model; with it every frame's
    importance collapses to exactly zero.
    """

    def __init__(self, original: Caption) -> None:
        self._words = original.words
        self.fingerprint = "oracle"

    def correct(self, masked_text: str) -> str:
        tokens = masked_text.split()
        if len(tokens) != len(self._words):
            raise ProviderError(
                f"oracle corrector saw {len(tokens)} words but its ground truth has {len(self._words)}"
            )
        return " ".join(
            original if token == MASK_TOKEN else token
            for token, original in zip(tokens, self._words)
        )
