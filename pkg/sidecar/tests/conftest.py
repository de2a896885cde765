"""Shared fixtures: a tiny self-built masked-LM checkpoint and a worker command.

The checkpoint is constructed from scratch (WordPiece vocabulary plus a
randomly initialised two-layer encoder) so the suite runs without any
network access or model cache. Its predictions are meaningless; tests
against it assert protocol and shape behaviour, never fill quality.
"""

from __future__ import annotations

import string
import sys

import pytest
import torch
from tokenizers import Tokenizer
from tokenizers.models import WordPiece
from tokenizers.normalizers import BertNormalizer
from tokenizers.pre_tokenizers import BertPreTokenizer
from tokenizers.processors import TemplateProcessing
from transformers import BertConfig, BertForMaskedLM, PreTrainedTokenizerFast

from mlm_sidecar.model import MaskedLMEngine

WORDS = (
    "a an and above beach bird blue clear covered dense eagle fog forest green "
    "hill in is mist morning mountain ocean on over palm rain range sand sea "
    "sky snow snowy soaring stub sun the tree trees under water waves with"
).split()


def build_tiny_checkpoint(path: str) -> str:
    vocab_tokens = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    vocab_tokens += WORDS
    letters = list(string.ascii_lowercase) + list(string.digits)
    vocab_tokens += letters
    vocab_tokens += ["##" + c for c in letters]
    # Single-letter words double as fallback pieces; ids must stay gap-free.
    vocab_tokens = list(dict.fromkeys(vocab_tokens))
    vocab = {token: i for i, token in enumerate(vocab_tokens)}

    tok = Tokenizer(WordPiece(vocab, unk_token="[UNK]"))
    tok.normalizer = BertNormalizer(lowercase=True)
    tok.pre_tokenizer = BertPreTokenizer()
    tok.post_processor = TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B:1 [SEP]:1",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])],
    )
    fast = PreTrainedTokenizerFast(
        tokenizer_object=tok,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
    )
    fast.save_pretrained(path)

    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=4,
        intermediate_size=64,
        max_position_embeddings=128,
        pad_token_id=vocab["[PAD]"],
    )
    torch.manual_seed(0)
    BertForMaskedLM(config).save_pretrained(path)
    return path


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory: pytest.TempPathFactory) -> str:
    return build_tiny_checkpoint(str(tmp_path_factory.mktemp("tiny-mlm")))


@pytest.fixture(scope="session")
def engine(tiny_checkpoint: str) -> MaskedLMEngine:
    return MaskedLMEngine(tiny_checkpoint)


@pytest.fixture(scope="session")
def worker_argv(tiny_checkpoint: str) -> list[str]:
    return [sys.executable, "-m", "mlm_sidecar", "--model", tiny_checkpoint]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    try:
        from test_worker_acceptance import ACCEPTANCE_LINES
    except ImportError:
        return
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria (sidecar)")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
