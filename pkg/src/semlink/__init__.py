"""Link-level simulation of importance-weighted caption transmission.

The package is organized bottom-up: closed-form error probabilities
(`linkmath`), Hadamard block codes (`codecs`), caption framing
(`framing`), importance weighting over pluggable embedding and
mask-fill providers (`semantics`, `sidecar_client`), delay-constrained
MCS selection (`adapt`), Monte Carlo transmission and parameter sweeps
(`simulate`), and a CLI (`config`, `cli`).
"""

__version__ = "0.1.0"
