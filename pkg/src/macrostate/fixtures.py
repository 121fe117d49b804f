"""Deterministic synthetic inputs for tests and acceptance runs."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .inputs import wav_bytes

RATE = 48000
NOISE_BAND = (4000.0, 20000.0)
SINE_FIXTURE = "sine200hz_plus_hf_noise.wav"


def random_bytes(n: int, seed: int = 0) -> bytes:
    return np.random.default_rng(seed).integers(0, 256, n, dtype=np.uint8).tobytes()


def band_noise(rng: np.random.Generator, n: int, lo: float, hi: float, rms: float,
               rate: int = RATE) -> np.ndarray:
    """Gaussian noise with every DFT bin outside [lo, hi] exactly zero."""
    spectrum = rng.normal(size=n // 2 + 1) + 1j * rng.normal(size=n // 2 + 1)
    freqs = np.fft.rfftfreq(n, d=1.0 / rate)
    spectrum[(freqs < lo) | (freqs > hi)] = 0.0
    y = np.fft.irfft(spectrum, n)
    return y * (rms / np.sqrt(np.mean(y ** 2)))


def _to_pcm(y: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(y), -32768, 32767).astype(np.int16)


def sine_plus_hf_noise(seed: int = 0, seconds: float = 1.0, tone_hz: float = 200.0,
                       amplitude: float = 8000.0, noise_rms: float = 3000.0,
                       rate: int = RATE) -> np.ndarray:
    rng = np.random.default_rng(seed)
    n = int(round(seconds * rate))
    t = np.arange(n) / rate
    y = amplitude * np.sin(2 * np.pi * tone_hz * t)
    return _to_pcm(y + band_noise(rng, n, *NOISE_BAND, noise_rms, rate))


def two_band_corpus(seed: int = 0, per_class: int = 20, seconds: float = 0.1,
                    snr_db: float = -10.0, amplitude: float = 3000.0,
                    rate: int = RATE) -> dict[str, list[tuple[str, np.ndarray]]]:
    """LOW: 200-400 Hz tones; HIGH: 5-6 kHz tones; both buried in 4-20 kHz noise.

    ``snr_db`` is tone power over noise power. Frequencies and phases are
    drawn uniformly per exemplar.
    """
    rng = np.random.default_rng(seed)
    n = int(round(seconds * rate))
    t = np.arange(n) / rate
    noise_rms = np.sqrt(amplitude ** 2 / 2 / 10 ** (snr_db / 10))
    corpus = {}
    for label, (lo, hi) in (("LOW", (200.0, 400.0)), ("HIGH", (5000.0, 6000.0))):
        items = []
        for i in range(per_class):
            freq = rng.uniform(lo, hi)
            phase = rng.uniform(0, 2 * np.pi)
            y = amplitude * np.sin(2 * np.pi * freq * t + phase)
            y += band_noise(rng, n, *NOISE_BAND, noise_rms, rate)
            items.append((f"{label.lower()}_{i:02d}.wav", _to_pcm(y)))
        corpus[label] = items
    return corpus


def write_sine_fixture(path, seed: int = 0) -> Path:
    path = Path(path)
    path.write_bytes(wav_bytes(sine_plus_hf_noise(seed), RATE))
    return path


def write_two_band_corpus(root, seed: int = 0, **kw) -> Path:
    root = Path(root)
    for label, items in two_band_corpus(seed, **kw).items():
        (root / label).mkdir(parents=True, exist_ok=True)
        for name, samples in items:
            (root / label / name).write_bytes(wav_bytes(samples, RATE))
    return root
