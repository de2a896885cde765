"""Engine behaviour: pooling, filling, input validation, checkpoint selection."""

from __future__ import annotations

import re

import pytest

from mlm_sidecar.model import (
    DEFAULT_CHECKPOINT,
    MODEL_ENV_VAR,
    MaskedLMEngine,
    OpError,
    resolve_checkpoint,
)

BEACH = "A beach with palm trees and clear blue water"


def assert_only_masks_changed(original: str, filled: str, mask: str = "[MASK]") -> list[str]:
    """Check `filled` equals `original` with each mask swapped for one word.

    Returns the substituted words. Non-greedy matching keeps each
    substitution as short as the surrounding literal text allows.
    """
    parts = original.split(mask)
    pattern = "(.+?)".join(re.escape(p) for p in parts)
    match = re.fullmatch(pattern, filled, flags=re.DOTALL)
    assert match is not None, f"{filled!r} altered text outside the masks of {original!r}"
    return list(match.groups())


class TestEmbed:
    def test_dimension_matches_config(self, engine):
        vectors = engine.embed([BEACH])
        assert len(vectors) == 1
        assert len(vectors[0]) == engine.dimension

    def test_deterministic(self, engine):
        assert engine.embed([BEACH]) == engine.embed([BEACH])

    def test_vector_independent_of_batch(self, engine):
        alone = engine.embed([BEACH])[0]
        batched = engine.embed([BEACH, "An eagle soaring"])[0]
        assert alone == batched

    def test_distinct_texts_distinct_vectors(self, engine):
        a, b = engine.embed([BEACH, "A dense forest covered in morning fog"])
        assert a != b

    def test_rejects_empty_list(self, engine):
        with pytest.raises(OpError, match="at least one"):
            engine.embed([])

    def test_rejects_blank_text(self, engine):
        with pytest.raises(OpError, match="non-empty"):
            engine.embed([BEACH, "   "])

    def test_rejects_oversize_input(self, engine):
        with pytest.raises(OpError, match="exceeds"):
            engine.embed(["water " * (engine.max_tokens + 10)])


class TestFill:
    def test_single_mask_filled(self, engine):
        filled = engine.fill("A beach with palm [MASK] and clear blue water")
        assert "[MASK]" not in filled
        words = assert_only_masks_changed(
            "A beach with palm [MASK] and clear blue water", filled
        )
        assert len(words) == 1 and words[0].strip()

    def test_multiple_masks_filled(self, engine):
        masked = "A [MASK] with palm [MASK] and clear [MASK] water"
        filled = engine.fill(masked)
        assert "[MASK]" not in filled
        words = assert_only_masks_changed(masked, filled)
        assert len(words) == 3

    def test_deterministic(self, engine):
        masked = "An eagle [MASK] above a snowy [MASK] range"
        assert engine.fill(masked) == engine.fill(masked)

    def test_preserves_case_and_punctuation_outside_masks(self, engine):
        masked = "The Eagle, [MASK]!  (unchanged?)"
        filled = engine.fill(masked)
        assert_only_masks_changed(masked, filled)

    def test_requires_mask(self, engine):
        with pytest.raises(OpError, match="no \\[MASK\\]"):
            engine.fill(BEACH)

    def test_rejects_blank(self, engine):
        with pytest.raises(OpError, match="non-empty"):
            engine.fill("  ")

    def test_rejects_oversize_input(self, engine):
        with pytest.raises(OpError, match="exceeds"):
            engine.fill("[MASK] " + "water " * (engine.max_tokens + 10))


class TestEngineMetadata:
    def test_fingerprint_names_both_strategies(self, engine):
        assert "mean-pool" in engine.fingerprint
        assert "ltr-argmax" in engine.fingerprint

    def test_info_fields(self, engine, tiny_checkpoint):
        info = engine.info()
        assert info["dimension"] == engine.dimension
        assert info["fingerprint"] == engine.fingerprint
        assert info["checkpoint"] == tiny_checkpoint
        assert info["mask_token"] == "[MASK]"
        assert info["max_tokens"] == engine.max_tokens

    def test_rejects_missing_checkpoint(self, tmp_path):
        with pytest.raises(Exception):
            MaskedLMEngine(str(tmp_path / "nowhere"))


class TestResolveCheckpoint:
    def test_explicit_wins(self, monkeypatch):
        monkeypatch.setenv(MODEL_ENV_VAR, "/from/env")
        assert resolve_checkpoint("/explicit") == "/explicit"

    def test_environment_next(self, monkeypatch):
        monkeypatch.setenv(MODEL_ENV_VAR, "/from/env")
        assert resolve_checkpoint(None) == "/from/env"

    def test_default_last(self, monkeypatch):
        monkeypatch.delenv(MODEL_ENV_VAR, raising=False)
        assert resolve_checkpoint(None) == DEFAULT_CHECKPOINT

    def test_empty_env_falls_through(self, monkeypatch):
        monkeypatch.setenv(MODEL_ENV_VAR, "")
        assert resolve_checkpoint(None) == DEFAULT_CHECKPOINT
