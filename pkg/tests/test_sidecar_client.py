"""Client-side protocol handling, exercised against the stub worker."""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

from semlink.semantics import ProviderError
from semlink.sidecar_client import SidecarCorrector, SidecarEmbedder, SidecarProcess

STUB = str(Path(__file__).resolve().parent / "stub_sidecar.py")


def stub_command(*flags: str) -> list[str]:
    return [sys.executable, STUB, *flags]


@pytest.fixture
def process():
    with SidecarProcess(stub_command()) as proc:
        yield proc


def test_banner_carries_fingerprint_and_dimension(process):
    assert process.fingerprint == "stub:1"
    assert process.dimension == 8


def test_embed_batch_shapes_and_determinism(process):
    first = process.embed_batch(["palm trees", "blue water"])
    second = process.embed_batch(["palm trees", "blue water"])
    assert len(first) == 2
    for u, v in zip(first, second):
        assert u.shape == (8,)
        assert np.array_equal(u, v)


def test_fill_replaces_masks(process):
    filled = process.fill("A beach with palm [MASK] and clear blue [MASK]")
    assert filled == "A beach with palm stub and clear blue stub"


def test_info_round_trip(process):
    info = process.info()
    assert info["fingerprint"] == "stub:1"
    assert info["dimension"] == 8


def test_request_ids_are_independent_per_process():
    with SidecarProcess(stub_command()) as a, SidecarProcess(stub_command()) as b:
        assert a.fill("x [MASK]") == "x stub"
        assert b.fill("y [MASK]") == "y stub"
        assert a.fill("z [MASK]") == "z stub"


def test_worker_error_raises_provider_error(process):
    with pytest.raises(ProviderError, match="mask token"):
        process.fill("no masks here")


def test_failed_banner_raises():
    with pytest.raises(ProviderError, match="failed to start"):
        SidecarProcess(stub_command("--fail-banner"))


def test_worker_death_raises():
    proc = SidecarProcess(stub_command("--die-after-banner"))
    with pytest.raises(ProviderError, match="closed its output"):
        proc.fill("a [MASK]")
    proc.close()


def test_garbage_output_raises():
    proc = SidecarProcess(stub_command("--garbage"))
    with pytest.raises(ProviderError, match="non-JSON"):
        proc.fill("a [MASK]")
    proc.close()


def test_missing_command_raises():
    with pytest.raises(ProviderError):
        SidecarProcess(["/nonexistent/worker-binary"])
    with pytest.raises(ProviderError):
        SidecarProcess("")


def test_embedder_facade(process):
    embedder = SidecarEmbedder(process)
    assert embedder.fingerprint == "sidecar:stub:1"
    vec = embedder.embed("palm trees")
    assert vec.shape == (8,)
    assert np.array_equal(vec, process.embed_batch(["palm trees"])[0])


def test_corrector_facade_passes_through_unmasked_text(process):
    corrector = SidecarCorrector(process)
    assert corrector.correct("nothing masked") == "nothing masked"
    assert corrector.correct("one [MASK] here") == "one stub here"
