import numpy as np
import pytest
import scipy.stats

from snowsim.estimation import CsiEstimate
from snowsim.linklevel import ook_ber_noncoherent
from snowsim.modem import ModulationScheme, demodulate, detect_preamble, modulate
from snowsim.packets import preamble_bits
from snowsim.signals import BasebandSignal

FS = 448e3
OOK = ModulationScheme("ook", 11200.0)
BPSK = ModulationScheme("bpsk", 11200.0)


def test_all_zero_ook_is_silence():
    sig = modulate(np.zeros(16, dtype=np.uint8), OOK, 0.0, 39e3, FS)
    assert sig.mean_power() == 0.0


def test_bpsk_antipodal():
    one = modulate([1], BPSK, 0.0, 39e3, FS)
    zero = modulate([0], BPSK, 0.0, 39e3, FS)
    assert np.allclose(one.samples, -zero.samples)
    assert np.allclose(np.abs(one.samples), np.abs(zero.samples))


def test_preamble_duration():
    sig = modulate(preamble_bits(), OOK, 0.0, 39e3, FS)
    assert sig.duration == pytest.approx(32 / 11200.0, rel=1e-9)


def test_rejects_bad_inputs():
    with pytest.raises(ValueError):
        modulate([], OOK, 0.0, 39e3, FS)
    with pytest.raises(ValueError):
        modulate([1], OOK, 0.0, 39e3, 50e3)   # below 2x bandwidth
    with pytest.raises(ValueError):
        ModulationScheme("fsk", 11200.0)


def test_energy_concentrated_in_band():
    rng = np.random.default_rng(0)
    bits = rng.integers(0, 2, 400)
    center = 200e3
    sig = modulate(bits, OOK, center, 39e3, 1.792e6)
    spec = np.fft.fft(sig.samples)
    freqs = np.fft.fftfreq(sig.n_samples, 1 / sig.sample_rate)
    in_band = np.abs(freqs - center) <= 19.5e3
    frac = np.sum(np.abs(spec[in_band]) ** 2) / np.sum(np.abs(spec) ** 2)
    assert frac > 0.85


@pytest.mark.parametrize("scheme", [OOK, BPSK, ModulationScheme("ask", 11200.0)])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_noiseless_round_trip(scheme, seed):
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, 240).astype(np.uint8)
    sig = modulate(bits, scheme, 0.0, 39e3, FS)
    rec, _ = demodulate(sig, scheme)
    assert np.array_equal(rec, bits)


def test_non_integer_sps_round_trip():
    rng = np.random.default_rng(5)
    bits = rng.integers(0, 2, 200).astype(np.uint8)
    sig = modulate(bits, OOK, 0.0, 39e3, 200e3)   # 17.857 samples/symbol
    rec, _ = demodulate(sig, OOK)
    assert np.array_equal(rec, bits)


def test_bpsk_inverted_channel_equalized():
    rng = np.random.default_rng(1)
    bits = rng.integers(0, 2, 64).astype(np.uint8)
    sig = modulate(bits, BPSK, 0.0, 39e3, FS)
    flipped = BasebandSignal(sig.samples * -1.0, FS, 0.0)
    csi = CsiEstimate(gain=-1.0 + 0.0j, noise_var=0.0, n_parts=4)
    rec, _ = demodulate(flipped, BPSK, csi)
    assert np.array_equal(rec, bits)


def test_too_short_signal_errors():
    sig = modulate([1, 0], OOK, 0.0, 39e3, FS)
    short = sig.slice_samples(0, 10)
    with pytest.raises(ValueError):
        demodulate(short, OOK)


def test_ook_ber_matches_noncoherent_oracle():
    """Blind OOK demod BER within 2x of the closed-form optimal noncoherent BER."""
    ebn0_db = 12.0
    ebn0 = 10 ** (ebn0_db / 10)
    es_n0 = 2.0 * ebn0             # half the bits are on
    rng = np.random.default_rng(42)
    sps = FS / OOK.symbol_rate
    sigma2 = sps / es_n0           # per-sample complex noise variance, unit on-amplitude
    n_bits = 200_000
    errors = 0
    chunk = 5000
    for start in range(0, n_bits, chunk):
        bits = rng.integers(0, 2, chunk).astype(np.uint8)
        sig = modulate(bits, OOK, 0.0, 39e3, FS)
        noise = (rng.standard_normal(sig.n_samples)
                 + 1j * rng.standard_normal(sig.n_samples)) * np.sqrt(sigma2 / 2)
        noisy = BasebandSignal(sig.samples + noise, FS, 0.0)
        rec, _ = demodulate(noisy, OOK)
        errors += int(np.sum(rec != bits))
    ber = errors / n_bits
    oracle = ook_ber_noncoherent(es_n0)
    assert oracle / 2 < ber < oracle * 2, (ber, oracle)


def test_detect_preamble_basic():
    rng = np.random.default_rng(2)
    bits = np.concatenate([preamble_bits(), rng.integers(0, 2, 100).astype(np.uint8)])
    sig = modulate(bits, OOK, 0.0, 39e3, FS)
    pad = np.zeros(4000, dtype=complex)
    stream = BasebandSignal(np.concatenate([pad, sig.samples, pad]), FS, 0.0)
    hits = detect_preamble(stream, preamble_bits(), OOK)
    assert any(abs(start - 4000) <= 2 and score > 0.95 for start, score in hits)


def test_detect_preamble_noise_only():
    rng = np.random.default_rng(3)
    noise = (rng.standard_normal(20000) + 1j * rng.standard_normal(20000)) * 0.1
    stream = BasebandSignal(noise, FS, 0.0)
    hits = detect_preamble(stream, preamble_bits(), OOK)
    assert hits == []
