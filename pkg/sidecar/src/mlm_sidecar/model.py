"""Checkpoint loading, mean-pooled embeddings, and left-to-right mask filling."""

from __future__ import annotations

import os

import torch
from transformers import AutoModelForMaskedLM, AutoTokenizer

MODEL_ENV_VAR = "MLM_SIDECAR_MODEL"
DEFAULT_CHECKPOINT = "bert-base-uncased"


class OpError(Exception):
    """Request-level failure that must be reported without killing the process."""


def resolve_checkpoint(explicit: str | None = None) -> str:
    """Pick the checkpoint: explicit argument, then the environment, then the default."""
    if explicit:
        return explicit
    return os.environ.get(MODEL_ENV_VAR) or DEFAULT_CHECKPOINT


class MaskedLMEngine:
    """One loaded masked-LM checkpoint answering embed / fill / info operations.

    Embeddings are the mean of the final hidden states over non-padding
    positions.  Multiple masks are filled left to right, re-running the model
    after each substitution so later predictions see earlier choices.  Both
    decisions are part of the fingerprint, so downstream caches keyed on the
    fingerprint stay honest if either rule ever changes.
    """

    def __init__(self, checkpoint: str) -> None:
        self.checkpoint = checkpoint
        self.tokenizer = AutoTokenizer.from_pretrained(checkpoint)
        self.model = AutoModelForMaskedLM.from_pretrained(checkpoint)
        self.model.eval()
        if self.tokenizer.mask_token is None or self.tokenizer.mask_token_id is None:
            raise ValueError(f"checkpoint {checkpoint!r} has no mask token")
        self.mask_token: str = self.tokenizer.mask_token
        self.dimension = int(self.model.config.hidden_size)
        self.max_tokens = int(getattr(self.model.config, "max_position_embeddings", 512))
        self.fingerprint = f"mlm:{checkpoint}:mean-pool:ltr-argmax"
        # Specials ([PAD], [CLS], ...) are excluded from fill predictions: they
        # are not words and several would re-insert a mask or vanish entirely.
        self._banned_ids = sorted(set(self.tokenizer.all_special_ids))

    def _encode(self, text: str) -> dict[str, torch.Tensor]:
        enc = self.tokenizer(text, return_tensors="pt", truncation=False)
        length = int(enc["input_ids"].shape[1])
        if length > self.max_tokens:
            raise OpError(
                f"input of {length} tokens exceeds the model limit of {self.max_tokens}"
            )
        return enc

    def embed(self, texts: list[str]) -> list[list[float]]:
        """Mean-pooled final hidden state for each text, one inference per text.

        Texts are processed individually rather than as a padded batch so a
        text's vector never depends on what it was batched with.
        """
        if not texts:
            raise OpError("embed requires at least one text")
        vectors: list[list[float]] = []
        for text in texts:
            if not isinstance(text, str) or not text.strip():
                raise OpError("embed texts must be non-empty strings")
            enc = self._encode(text)
            with torch.inference_mode():
                out = self.model(**enc, output_hidden_states=True)
            hidden = out.hidden_states[-1][0]
            mask = enc["attention_mask"][0].unsqueeze(-1).to(hidden.dtype)
            pooled = (hidden * mask).sum(dim=0) / mask.sum()
            vectors.append([float(x) for x in pooled])
        return vectors

    def fill(self, text: str) -> str:
        """Replace every mask token with the model's top prediction, left to right.

        Only the mask occurrences themselves are rewritten; every other
        character of the input survives verbatim.
        """
        if not isinstance(text, str) or not text.strip():
            raise OpError("fill requires a non-empty text")
        if self.mask_token not in text:
            raise OpError(f"fill input contains no {self.mask_token} token")
        result = text
        while self.mask_token in result:
            result = result.replace(self.mask_token, self._predict_first_mask(result), 1)
        return result

    def _predict_first_mask(self, text: str) -> str:
        enc = self._encode(text)
        positions = (enc["input_ids"][0] == self.tokenizer.mask_token_id).nonzero()
        if positions.numel() == 0:
            raise OpError("mask token did not survive tokenization")
        with torch.inference_mode():
            logits = self.model(**enc).logits[0, int(positions[0])]
        logits = logits.clone()
        logits[self._banned_ids] = float("-inf")
        token = self.tokenizer.convert_ids_to_tokens(int(logits.argmax()))
        word = token[2:] if token.startswith("##") else token
        if not word or self.mask_token in word:
            raise OpError(f"model predicted an unusable token {token!r}")
        return word

    def info(self) -> dict[str, object]:
        return {
            "fingerprint": self.fingerprint,
            "dimension": self.dimension,
            "checkpoint": self.checkpoint,
            "max_tokens": self.max_tokens,
            "mask_token": self.mask_token,
        }
