"""Size/time comparison of discovered lags against the adjacent baseline."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass
from pathlib import Path

from .container import compress, decompress
from .contexts import ContextFamilyConfig
from .discovery import DiscoveryConfig
from .errors import AcmixError
from .predictor import DEFAULT_TABLE_BITS

CSV_COLUMNS = ("file", "original", "compressed", "ratio", "enc_ms", "dec_ms", "config")
BASELINES = ("discovered", "adjacent")


class RoundTripError(AcmixError):
    """Decompressed output differs from the input."""


@dataclass(frozen=True)
class BenchRecord:
    file: str
    original: int
    compressed: int
    enc_ms: float
    dec_ms: float
    config: str

    @property
    def ratio(self) -> float:
        return self.compressed / self.original if self.original else 0.0

    def row(self) -> list:
        return [self.file, self.original, self.compressed, f"{self.ratio:.6f}",
                f"{self.enc_ms:.1f}", f"{self.dec_ms:.1f}", self.config]


def config_summary(baseline: str, discovery: DiscoveryConfig, family: ContextFamilyConfig, table_bits: int) -> str:
    parts = [baseline, f"n={discovery.n}", f"mode={discovery.mode.value}", f"pair={family.n_pair}",
             f"triple={family.n_triple}", f"channels={family.channels}", f"table_bits={table_bits}"]
    if family.planar:
        parts.append(f"planar={family.planar_lags}")
    return " ".join(parts)


def bench_bytes(
    name: str,
    data: bytes,
    baseline: str = "discovered",
    discovery: DiscoveryConfig = DiscoveryConfig(),
    family: ContextFamilyConfig = ContextFamilyConfig(),
    table_bits: int = DEFAULT_TABLE_BITS,
) -> BenchRecord:
    """Compress, decompress and check one input. Raises RoundTripError
    rather than report a size for a broken round trip."""
    if baseline not in BASELINES:
        raise ValueError(f"unknown baseline {baseline!r}")
    lags = range(1, discovery.n + 1) if baseline == "adjacent" else None
    t0 = time.perf_counter()
    archive = compress(data, discovery, family, table_bits, lags=lags)
    t1 = time.perf_counter()
    back = decompress(archive)
    t2 = time.perf_counter()
    if back != bytes(data):
        raise RoundTripError(f"{name}: round trip failed under {baseline}")
    return BenchRecord(name, len(data), len(archive), (t1 - t0) * 1e3, (t2 - t1) * 1e3,
                       config_summary(baseline, discovery, family, table_bits))


def bench_directory(directory, baselines=BASELINES, **kwargs) -> list[BenchRecord]:
    records = []
    for path in sorted(p for p in Path(directory).iterdir() if p.is_file()):
        data = path.read_bytes()
        for b in baselines:
            records.append(bench_bytes(path.name, data, b, **kwargs))
    return records


def to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()
