"""Masked-language-model worker speaking JSON lines over stdio.

The process loads one masked-LM checkpoint, prints a banner carrying its
fingerprint and embedding dimension, then answers ``embed``, ``fill`` and
``info`` requests until stdin closes.  ``mlm_sidecar.model`` owns the
checkpoint; ``mlm_sidecar.protocol`` owns message framing and validation;
``mlm_sidecar.server`` runs the single-threaded request loop.
"""

from mlm_sidecar.model import DEFAULT_CHECKPOINT, MODEL_ENV_VAR, MaskedLMEngine, OpError
from mlm_sidecar.server import StdioServer

__all__ = [
    "DEFAULT_CHECKPOINT",
    "MODEL_ENV_VAR",
    "MaskedLMEngine",
    "OpError",
    "StdioServer",
]

__version__ = "0.1.0"
