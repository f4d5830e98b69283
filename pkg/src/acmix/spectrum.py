"""Fourier transforms, power spectra and byte-signal autocorrelation.

The fast path computes the linear autocorrelation as the inverse transform of
the power spectrum of the zero-padded signal; the direct path evaluates the
lagged inner products one lag at a time and serves as the O(n^2) oracle.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit

from .errors import InvalidArgument

__all__ = [
    "Mode",
    "AutocorrelationProfile",
    "as_byte_signal",
    "dft_forward",
    "dft_direct",
    "power_spectrum",
    "autocorrelation_wk",
    "autocorrelation_direct",
    "next_pow2",
]


class Mode(str, enum.Enum):
    RAW = "raw"
    CENTERED = "centered"


@dataclass(frozen=True)
class AutocorrelationProfile:
    """R(tau) for tau = 0 .. len(values) - 1."""

    values: np.ndarray
    mode: Mode

    def __len__(self) -> int:
        return len(self.values)

    @property
    def max_lag(self) -> int:
        return len(self.values) - 1


def as_byte_signal(data) -> np.ndarray:
    """Coerce bytes-like or integer sequences to a uint8 array."""
    if isinstance(data, np.ndarray):
        if data.dtype == np.uint8:
            return data
        if data.size and (data.min() < 0 or data.max() > 255):
            raise InvalidArgument("byte signal values must lie in [0, 255]")
        return data.astype(np.uint8)
    if isinstance(data, (bytes, bytearray, memoryview)):
        return np.frombuffer(bytes(data), dtype=np.uint8)
    return as_byte_signal(np.asarray(list(data), dtype=np.int64))


def next_pow2(n: int) -> int:
    return 1 if n <= 1 else 1 << (n - 1).bit_length()


@njit(cache=True)
def _bit_reverse_permute(re, im):
    n = re.shape[0]
    j = 0
    for i in range(1, n):
        bit = n >> 1
        while j & bit:
            j ^= bit
            bit >>= 1
        j |= bit
        if i < j:
            t = re[i]
            re[i] = re[j]
            re[j] = t
            t = im[i]
            im[i] = im[j]
            im[j] = t


@njit(cache=True)
def _dif_stages(re, im, tw_re, tw_im):
    # natural-order input, bit-reversed output
    n = re.shape[0]
    half = n >> 1
    while half > 1:
        size = half << 1
        wr_ = tw_re[half:size]
        wi_ = tw_im[half:size]
        for start in range(0, n, size):
            ar = re[start : start + half]
            ai = im[start : start + half]
            br = re[start + half : start + size]
            bi = im[start + half : start + size]
            for k in range(half):
                dr = ar[k] - br[k]
                di = ai[k] - bi[k]
                ar[k] += br[k]
                ai[k] += bi[k]
                br[k] = dr * wr_[k] - di * wi_[k]
                bi[k] = dr * wi_[k] + di * wr_[k]
        half >>= 1
    if n > 1:
        for i in range(0, n, 2):
            dr = re[i] - re[i + 1]
            di = im[i] - im[i + 1]
            re[i] += re[i + 1]
            im[i] += im[i + 1]
            re[i + 1] = dr
            im[i + 1] = di


@njit(cache=True)
def _dit_stages(re, im, tw_re, tw_im):
    # bit-reversed input, natural-order output
    n = re.shape[0]
    if n > 1:
        for i in range(0, n, 2):
            ur = re[i]
            ui = im[i]
            re[i] = ur + re[i + 1]
            im[i] = ui + im[i + 1]
            re[i + 1] = ur - re[i + 1]
            im[i + 1] = ui - im[i + 1]
    half = 2
    while half < n:
        size = half << 1
        wr_ = tw_re[half:size]
        wi_ = tw_im[half:size]
        for start in range(0, n, size):
            ar = re[start : start + half]
            ai = im[start : start + half]
            br = re[start + half : start + size]
            bi = im[start + half : start + size]
            for k in range(half):
                vr = br[k] * wr_[k] - bi[k] * wi_[k]
                vi = br[k] * wi_[k] + bi[k] * wr_[k]
                ur = ar[k]
                ui = ai[k]
                ar[k] = ur + vr
                ai[k] = ui + vi
                br[k] = ur - vr
                bi[k] = ui - vi
        half = size


@lru_cache(maxsize=32)
def _twiddles(n: int, inverse: bool) -> tuple[np.ndarray, np.ndarray]:
    """Per-stage twiddle tables packed back to back: entry half + k holds
    exp(-/+ 2 pi i k / (2 half))."""
    sign = 1.0 if inverse else -1.0
    tw = np.zeros(max(n, 2), dtype=np.complex128)
    half = 1
    while half < n:
        k = np.arange(half)
        tw[half : 2 * half] = np.exp(sign * 1j * np.pi * k / half)
        half <<= 1
    re, im = np.ascontiguousarray(tw.real), np.ascontiguousarray(tw.imag)
    re.setflags(write=False)
    im.setflags(write=False)
    return re, im


@lru_cache(maxsize=32)
def _bit_reversal(n: int) -> np.ndarray:
    bits = max(n.bit_length() - 1, 0)
    idx = np.arange(n, dtype=np.int32)
    rev = np.zeros(n, dtype=np.int32)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    rev.setflags(write=False)
    return rev


def _transform(re: np.ndarray, im: np.ndarray, inverse: bool) -> None:
    n = re.shape[0]
    if n > 1:
        _bit_reverse_permute(re, im)
        _dit_stages(re, im, *_twiddles(n, inverse))
    if inverse:
        re /= n
        im /= n


def dft_forward(signal, inverse: bool = False) -> np.ndarray:
    """Radix-2 DFT of a power-of-two length vector.

    Forward is unnormalized; the inverse divides by the length so that
    ``dft_forward(dft_forward(x), inverse=True) == x``.
    """
    a = np.asarray(signal, dtype=np.complex128).ravel()
    n = a.shape[0]
    if n == 0 or n & (n - 1):
        raise InvalidArgument(f"transform length must be a power of two, got {n}")
    if not np.all(np.isfinite(a)):
        raise InvalidArgument("transform input must be finite")
    re = np.ascontiguousarray(a.real, dtype=np.float64).copy()
    im = np.ascontiguousarray(a.imag, dtype=np.float64).copy()
    _transform(re, im, inverse)
    return re + 1j * im


def dft_direct(signal, inverse: bool = False) -> np.ndarray:
    """O(n^2) DFT by explicit summation; any length. Used as a test oracle."""
    x = np.asarray(signal, dtype=np.complex128).ravel()
    n = x.shape[0]
    sign = 1.0 if inverse else -1.0
    t = np.arange(n)
    out = np.empty(n, dtype=np.complex128)
    for k in range(n):
        out[k] = np.sum(x * np.exp(sign * 2j * np.pi * k * t / n))
    if inverse:
        out /= n
    return out


def power_spectrum(spectrum) -> np.ndarray:
    z = np.asarray(spectrum, dtype=np.complex128)
    return z.real * z.real + z.imag * z.imag


def _prepare(signal, mode) -> np.ndarray:
    x = as_byte_signal(signal)
    if x.size == 0:
        raise InvalidArgument("autocorrelation of an empty signal")
    x = x.astype(np.float64)
    if Mode(mode) is Mode.CENTERED:
        x = x - x.mean()
    return x


@lru_cache(maxsize=32)
def _unpack_twiddles(size: int) -> tuple[np.ndarray, np.ndarray]:
    w = np.exp(-2j * np.pi * np.arange(size // 2 + 1) / size)
    return np.ascontiguousarray(w.real), np.ascontiguousarray(w.imag)


@njit(cache=True)
def _pack_real(x, zr, zi):
    n = x.shape[0]
    for t in range(n // 2):
        zr[t] = x[2 * t]
        zi[t] = x[2 * t + 1]
    if n & 1:
        zr[n // 2] = x[n - 1]


@njit(cache=True)
def _unpack_real(yr, yi, scale, n):
    out = np.empty(n)
    for t in range(n // 2):
        out[2 * t] = yr[t] * scale
        out[2 * t + 1] = yi[t] * scale
    if n & 1:
        out[n - 1] = yr[n // 2] * scale
    return out


@njit(cache=True)
def _spectrum_bin(zr, zi, a, b, wr, wi):
    # bin k of the full transform from packed bins Z[k] (at a) and Z[half-k] (at b)
    er = 0.5 * (zr[a] + zr[b])
    ei = 0.5 * (zi[a] - zi[b])
    orr = 0.5 * (zi[a] + zi[b])
    oi = -0.5 * (zr[a] - zr[b])
    xr = er + wr * orr - wi * oi
    xi = ei + wr * oi + wi * orr
    return xr * xr + xi * xi


@njit(cache=True)
def _power_from_packed(zr, zi, rev, wr, wi, yr, yi):
    """Turn the half-length transform of packed even/odd samples into the
    packed input of the half-length inverse of the full power spectrum.

    Bins k and half-k depend on the same two packed values, so they are
    produced together. Both z and y are stored bit-reversed.
    """
    half = zr.shape[0]
    for k in range(half // 2 + 1):
        kk = half - k
        a = rev[k]
        b = rev[kk % half]
        pk = _spectrum_bin(zr, zi, a, b, wr[k], wi[k])
        pkk = _spectrum_bin(zr, zi, b, a, wr[kk], wi[kk])
        # packed inverse input: even + i * odd, odd = d * conj(w)
        even = 0.5 * (pk + pkk)
        d = 0.5 * (pk - pkk)
        yr[a] = even + d * wi[k]
        yi[a] = d * wr[k]
        if kk < half and kk != k:
            yr[b] = even - d * wi[kk]
            yi[b] = -d * wr[kk]


def autocorrelation_wk(signal, mode: Mode | str = Mode.CENTERED) -> AutocorrelationProfile:
    """Linear autocorrelation via the power spectrum, O(n log n).

    The signal is zero-padded to at least twice its length so the circular
    correlation computed by the transform equals the lagged inner product.
    Since the input is real, both transforms run at half length on the
    even/odd samples packed as one complex vector. The forward pass leaves
    its output bit-reversed and the inverse consumes bit-reversed input, so
    neither needs a separate reordering pass.
    """
    mode = Mode(mode)
    x = _prepare(signal, mode)
    n = x.shape[0]
    size = next_pow2(2 * n)
    half = size // 2
    zr = np.zeros(half)
    zi = np.zeros(half)
    _pack_real(x, zr, zi)
    _dif_stages(zr, zi, *_twiddles(half, False))
    _power_from_packed(zr, zi, _bit_reversal(half), *_unpack_twiddles(size), zr, zi)
    _dit_stages(zr, zi, *_twiddles(half, True))
    return AutocorrelationProfile(_unpack_real(zr, zi, 1.0 / half, n), mode)


def autocorrelation_direct(signal, mode: Mode | str = Mode.CENTERED) -> AutocorrelationProfile:
    """Lagged inner products evaluated lag by lag, O(n^2)."""
    mode = Mode(mode)
    x = _prepare(signal, mode)
    n = x.shape[0]
    values = np.empty(n, dtype=np.float64)
    for lag in range(n):
        values[lag] = np.dot(x[: n - lag], x[lag:])
    return AutocorrelationProfile(values, mode)
