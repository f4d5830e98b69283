"""Seeded synthetic test corpus."""

from __future__ import annotations

from pathlib import Path

import numpy as np

PERIODS = (2, 3, 7, 13, 256, 768)
RASTER_WIDTHS = (64, 256, 500)
PERIODIC_SIZE = 32 * 1024
TEXT_SIZE = 32 * 1024
RANDOM_SIZE = 64 * 1024
DRIFT_RATE = 0.05

_WORDS = (
    "the of and to in is was for on that with as by at from it this be are an or "
    "which have not had but were one all their there been has when who will more "
    "no if out so said what up its about into than them can only other new some "
    "could time these two may then do first any my now such like our over man me "
    "even most made after also did many before must through back years where much"
).split()


def periodic(period: int, size: int = PERIODIC_SIZE, seed: int = 0, drift: float = DRIFT_RATE) -> bytes:
    """A random pattern repeated with slow drift: each period copies the one
    before it, nudging a fraction ``drift`` of its bytes by +-1 (mod 256)."""
    rng = np.random.default_rng([seed, 1, period])
    rows = -(-size // period)
    steps = np.where(rng.random((rows, period)) < drift, rng.choice([-1, 1], (rows, period)), 0)
    steps[0] = rng.integers(0, 256, period)
    return (steps.cumsum(axis=0).ravel()[:size] % 256).astype(np.uint8).tobytes()


def raster(width: int, height: int = 256, channels: int = 3, seed: int = 0) -> bytes:
    """Interleaved image: a smooth random row texture repeated down the
    image, a vertical gradient and mild pixel noise."""
    rng = np.random.default_rng([seed, 2, width])
    walk = rng.normal(size=(width, channels)).cumsum(axis=0)
    walk -= walk.min(axis=0)
    walk *= 120.0 / np.maximum(walk.max(axis=0), 1e-9)
    rows = np.arange(height, dtype=np.float64)[:, None, None] * (60.0 / height)
    img = 40.0 + walk[None, :, :] + rows
    img += rng.normal(scale=2.0, size=img.shape)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8).tobytes()


def markov_text(size: int = TEXT_SIZE, seed: int = 0) -> bytes:
    """First-order word Markov chain over a small vocabulary."""
    rng = np.random.default_rng([seed, 3])
    n = len(_WORDS)
    trans = rng.dirichlet(np.full(n, 0.1), size=n)
    out, state, length = [], 0, 0
    while length < size:
        state = int(rng.choice(n, p=trans[state]))
        w = _WORDS[state]
        if rng.random() < 0.08:
            w += "." if rng.random() < 0.7 else ","
        out.append(w)
        length += len(w) + 1
    return " ".join(out).encode("ascii")[:size]


def uniform_random(size: int = RANDOM_SIZE, seed: int = 0) -> bytes:
    return np.random.default_rng([seed, 4]).integers(0, 256, size, dtype=np.uint8).tobytes()


def generate(seed: int = 0) -> dict[str, bytes]:
    files = {f"periodic_{p}.bin": periodic(p, seed=seed) for p in PERIODS}
    files.update({f"raster_w{w}.rgb": raster(w, seed=seed) for w in RASTER_WIDTHS})
    files["markov.txt"] = markov_text(seed=seed)
    files["random.bin"] = uniform_random(seed=seed)
    return files


def write_corpus(directory, seed: int = 0) -> list[Path]:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, data in generate(seed).items():
        path = d / name
        path.write_bytes(data)
        paths.append(path)
    return paths
