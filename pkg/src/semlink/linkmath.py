"""Closed-form error-probability math for the link adaptation layer.

Symbol error probabilities for M-PSK and square M-QAM, the Gray-mapping
bit error approximation, binomial block-success probabilities for
bounded-distance decoding, and the frame-loss composition built on top
of them.

Probabilities are plain floats in [0, 1]. Domain violations raise
ValueError instead of propagating NaNs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

from scipy.integrate import quad

if TYPE_CHECKING:
    from semlink.codecs import CodeScheme

PSK = "PSK"
QAM = "QAM"

_SQRT2 = math.sqrt(2.0)
_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)


@dataclass(frozen=True)
class ModulationScheme:
    """One constellation: display name, order M, and family (PSK or QAM)."""

    name: str
    order: int
    family: str

    def __post_init__(self) -> None:
        if self.order < 2 or self.order & (self.order - 1):
            raise ValueError(f"modulation order must be a power of two >= 2, got {self.order}")
        if self.family not in (PSK, QAM):
            raise ValueError(f"unknown modulation family {self.family!r}")
        if self.family == QAM and math.isqrt(self.order) ** 2 != self.order:
            raise ValueError(f"square QAM needs a perfect-square order, got {self.order}")

    @property
    def bits_per_symbol(self) -> int:
        return self.order.bit_length() - 1


MODULATIONS: dict[str, ModulationScheme] = {
    "BPSK": ModulationScheme("BPSK", 2, PSK),
    "QPSK": ModulationScheme("QPSK", 4, PSK),
    "16QAM": ModulationScheme("16QAM", 16, QAM),
    "64QAM": ModulationScheme("64QAM", 64, QAM),
    "256QAM": ModulationScheme("256QAM", 256, QAM),
}


def default_modulations() -> list[ModulationScheme]:
    """The five-constellation menu the optimizer searches by default."""
    return [MODULATIONS[name] for name in ("BPSK", "QPSK", "16QAM", "64QAM", "256QAM")]


@dataclass(frozen=True)
class ChannelModel:
    """Flat-channel snapshot: coefficient magnitude, Eb/N0, symbol rate.

    `ebn0` is the linear (not dB) energy-per-information-bit to noise
    ratio. The channel coefficient is assumed constant over a frame.
    """

    h_mag: float = 1.0
    ebn0: float = 1.0
    symbol_rate: float = 1e6

    def __post_init__(self) -> None:
        if not (math.isfinite(self.h_mag) and self.h_mag >= 0):
            raise ValueError(f"channel magnitude must be finite and >= 0, got {self.h_mag}")
        if not (math.isfinite(self.ebn0) and self.ebn0 >= 0):
            raise ValueError(f"Eb/N0 must be finite and >= 0, got {self.ebn0}")
        if not (math.isfinite(self.symbol_rate) and self.symbol_rate > 0):
            raise ValueError(f"symbol rate must be finite and > 0, got {self.symbol_rate}")


def q_function(x: float) -> float:
    """Upper-tail probability of the standard normal distribution.

    Computed as erfc(x / sqrt(2)) / 2, which is accurate to double
    precision over the representable range. For x beyond about 38.6 the
    true tail is smaller than the smallest subnormal double and the
    result underflows to 0.0, the nearest representable value.
    """
    if not math.isfinite(x):
        raise ValueError(f"q_function needs a finite argument, got {x}")
    return 0.5 * math.erfc(x / _SQRT2)


def snr_gamma(channel: ChannelModel, scheme: ModulationScheme, code_rate: float) -> float:
    """Received symbol SNR: |h|^2 * (Eb/N0) * R * log2(M).

    Energy per information bit is the fixed reference, so both the code
    rate and the bits carried per symbol scale the per-symbol energy.
    """
    if not (0.0 < code_rate <= 1.0):
        raise ValueError(f"code rate must be in (0, 1], got {code_rate}")
    return channel.h_mag ** 2 * channel.ebn0 * code_rate * scheme.bits_per_symbol


def sep_psk(order: int, gamma: float) -> float:
    """Symbol error probability of M-ary PSK at symbol SNR `gamma`.

    BPSK is exactly Q(sqrt(2 * gamma)). For M >= 4 the same term is the
    leading piece and a Gaussian-weighted correction integral is added,
    evaluated by adaptive quadrature on [sqrt(gamma) - 10, sqrt(gamma) + 10]
    clipped at zero; the exp(-(u - sqrt(gamma))^2) factor makes the
    truncated tails smaller than 1e-12.
    """
    if order < 2 or order & (order - 1):
        raise ValueError(f"PSK order must be a power of two >= 2, got {order}")
    if not (math.isfinite(gamma) and gamma >= 0):
        raise ValueError(f"symbol SNR must be finite and >= 0, got {gamma}")
    lead = q_function(math.sqrt(2.0 * gamma))
    if order == 2:
        return lead
    half_angle_tan = math.tan(math.pi / order)
    center = math.sqrt(gamma)

    def integrand(u: float) -> float:
        return math.exp(-((u - center) ** 2)) * q_function(_SQRT2 * u * half_angle_tan)

    value, abserr = quad(
        integrand,
        max(0.0, center - 10.0),
        center + 10.0,
        epsabs=1e-12,
        epsrel=1e-10,
        limit=200,
    )
    if abserr > 1e-8:
        raise ArithmeticError(
            f"PSK quadrature failed to converge (order={order}, gamma={gamma}, abserr={abserr:.3e})"
        )
    return min(1.0, lead + _TWO_OVER_SQRT_PI * value)


def sep_qam(order: int, gamma: float) -> float:
    """Symbol error probability of Gray-mapped square M-QAM.

    Closed form: with a = (sqrt(M) - 1) / sqrt(M) and
    q = Q(sqrt(3 * gamma / (M - 1))), the SEP is 4*a*q - 4*a^2*q^2.
    """
    if order < 4 or math.isqrt(order) ** 2 != order or order & (order - 1):
        raise ValueError(f"square QAM order must be an even power of two >= 4, got {order}")
    if not (math.isfinite(gamma) and gamma >= 0):
        raise ValueError(f"symbol SNR must be finite and >= 0, got {gamma}")
    amp = (math.sqrt(order) - 1.0) / math.sqrt(order)
    tail = q_function(math.sqrt(3.0 * gamma / (order - 1)))
    return 4.0 * amp * tail - 4.0 * amp * amp * tail * tail


def sep(scheme: ModulationScheme, gamma: float) -> float:
    """Symbol error probability of `scheme` at symbol SNR `gamma`."""
    if scheme.family == PSK:
        return sep_psk(scheme.order, gamma)
    return sep_qam(scheme.order, gamma)


def ber_from_sep(sep_value: float, scheme: ModulationScheme) -> float:
    """Gray-mapping bit error approximation: SEP / log2(M), clamped to [0, 1].

    The division assumes one bit flip per symbol error, which holds for
    Gray labeling at moderate-to-high SNR; it is applied at every SNR
    because the whole frame-loss chain is defined on top of it.
    """
    if not (0.0 <= sep_value <= 1.0):
        raise ValueError(f"symbol error probability must be in [0, 1], got {sep_value}")
    return min(1.0, max(0.0, sep_value / scheme.bits_per_symbol))


def bit_error_prob(scheme: ModulationScheme, gamma: float) -> float:
    """Raw channel bit error rate: sep() composed with ber_from_sep()."""
    return ber_from_sep(sep(scheme, gamma), scheme)


def block_correct_prob(block_len: int, correctable: int, p_bit: float) -> float:
    """Probability that at most `correctable` of `block_len` bits flip.

    Binomial lower-tail sum evaluated with a term-by-term multiplicative
    recurrence, so no binomial coefficients are formed and the sum stays
    exact to double precision for block lengths up to 64.
    """
    if block_len < 1:
        raise ValueError(f"block length must be >= 1, got {block_len}")
    if not (0 <= correctable <= block_len):
        raise ValueError(
            f"correctable bits must be in [0, block_len], got {correctable} for block_len={block_len}"
        )
    if not (0.0 <= p_bit <= 1.0):
        raise ValueError(f"bit error probability must be in [0, 1], got {p_bit}")
    if correctable == block_len or p_bit == 0.0:
        return 1.0
    if p_bit == 1.0:
        return 0.0
    term = (1.0 - p_bit) ** block_len
    total = term
    ratio = p_bit / (1.0 - p_bit)
    for flips in range(correctable):
        term *= (block_len - flips) / (flips + 1.0) * ratio
        total += term
    return min(1.0, total)


def coded_blocks(payload_bits: int, code: CodeScheme) -> int:
    """Number of code blocks needed to carry `payload_bits` message bits."""
    if payload_bits < 1:
        raise ValueError(f"payload must be >= 1 bit, got {payload_bits}")
    return -(-payload_bits // code.dimension)


def frame_loss_from_pbit(payload_bits: int, code: CodeScheme, p_bit: float) -> float:
    """Frame loss probability given the raw channel bit error rate.

    A frame survives only if every one of its blocks decodes, so the
    loss is 1 - P(block ok)^(number of blocks), evaluated through
    expm1/log to keep precision when P(block ok) is close to 1.
    """
    blocks = coded_blocks(payload_bits, code)
    ok = block_correct_prob(code.block_len, code.correctable, p_bit)
    if ok == 0.0:
        return 1.0
    return -math.expm1(blocks * math.log(ok))


def frame_loss_prob(
    payload_bits: int,
    scheme: ModulationScheme,
    code: CodeScheme,
    gamma: float,
) -> float:
    """Analytic frame loss: symbol errors -> Gray-mapped bit errors ->
    block success -> all-blocks survival."""
    return frame_loss_from_pbit(payload_bits, code, bit_error_prob(scheme, gamma))
