"""Adaptive bit prediction: hashed probability counters and a logistic mixer.

Everything on the coding path is integer arithmetic so the decoder reproduces
the encoder bit for bit. Probabilities are 12-bit (1..4095 for P(bit=1));
logits are fixed point with 10 fractional bits, clamped to +-8; mixer weights
are 16.16 fixed point.
"""

from __future__ import annotations

import math
from decimal import Decimal, localcontext

import numpy as np
from numba import njit

from .errors import InvalidArgument

PROB_BITS = 12
PROB_ONE = 1 << PROB_BITS
EPS = 1.0 / PROB_ONE

LOGIT_FRAC = 10  # logit resolution 1/1024
LOGIT_MAX = (8 << LOGIT_FRAC) - 1
SQUASH_STEPS = 256  # squash table spacing: 1/256 logit

WEIGHT_ONE = 1 << 16
WEIGHT_LIMIT = 16 * WEIGHT_ONE
WEIGHT_INIT = int(0.3 * WEIGHT_ONE)
# learning rate 3/1024 in the units above: dw = 3 * err12 * stretch >> 16
LR_NUM = 3

COUNTER_LIMIT = 127
COUNTER_INIT = 1 << 15  # 16-bit internal probability, 0.5
SLOT_PROB_MASK = 0xFFFF
SLOT_HITS_SHIFT = 16
SLOT_CHECK_SHIFT = 24
DEFAULT_TABLE_BITS = 22
MIN_TABLE_BITS = 16
MAX_TABLE_BITS = 28


def _build_tables():
    with localcontext() as ctx:
        ctx.prec = 40
        # 4096 intervals of 1/256 logit over [-8, 8], 16-bit outputs
        sq = np.empty(16 * SQUASH_STEPS + 1, dtype=np.int64)
        for i in range(sq.size):
            x = Decimal(i - 8 * SQUASH_STEPS) / SQUASH_STEPS
            v = Decimal(65536) / (1 + (-x).exp())
            sq[i] = int(v.to_integral_value())
        st = np.empty(PROB_ONE, dtype=np.int64)
        for p in range(1, PROB_ONE):
            d = (Decimal(p) / (PROB_ONE - p)).ln() * (1 << LOGIT_FRAC)
            st[p] = max(-LOGIT_MAX, min(LOGIT_MAX, int(d.to_integral_value())))
        st[0] = st[1]
    # 1 / (hits + 1.5) in 16-bit fixed point
    rec = np.array([int(Decimal(65536) / (Decimal(h) + Decimal("1.5")) + Decimal("0.5")) for h in range(COUNTER_LIMIT + 1)], dtype=np.int64)
    for a in (sq, st, rec):
        a.setflags(write=False)
    return sq, st, rec


SQUASH_TABLE, STRETCH_TABLE, RECIPROCALS = _build_tables()


def stretch(p: float) -> float:
    """ln(p / (1 - p)), with p clamped to [EPS, 1 - EPS]."""
    p = min(max(p, EPS), 1.0 - EPS)
    return math.log(p / (1.0 - p))


def squash(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def to_p12(p: float) -> int:
    return min(max(int(round(p * PROB_ONE)), 1), PROB_ONE - 1)


@njit(cache=True, inline="always")
def _squash12(d, table):
    """12-bit probability of a fixed-point logit (interpolated table)."""
    if d > LOGIT_MAX:
        d = LOGIT_MAX
    elif d < -LOGIT_MAX:
        d = -LOGIT_MAX
    j = d + (8 << LOGIT_FRAC)
    i = j >> 2
    f = j & 3
    v = table[i] + (((table[i + 1] - table[i]) * f) >> 2)
    p = (v + 8) >> 4
    if p < 1:
        return 1
    if p > PROB_ONE - 1:
        return PROB_ONE - 1
    return p


def squash_fx(d: int) -> int:
    return int(_squash12(np.int64(d), SQUASH_TABLE))


def stretch_fx(p12: int) -> int:
    return int(STRETCH_TABLE[min(max(int(p12), 0), PROB_ONE - 1)])


# --- counters -------------------------------------------------------------


@njit(cache=True, inline="always")
def _slot_p12(slot_value):
    p = (slot_value & SLOT_PROB_MASK) >> 4
    if p < 1:
        return 1
    if p > PROB_ONE - 1:
        return PROB_ONE - 1
    return p


@njit(cache=True, inline="always")
def _table_lookup(slots, ident, mask):
    """Slot index for a 32-bit id; a slot owned by another check byte is
    reset to the uninformed state first."""
    idx = ident & mask
    check = (ident >> SLOT_CHECK_SHIFT) & 0xFF
    if (slots[idx] >> SLOT_CHECK_SHIFT) != check:
        slots[idx] = (check << SLOT_CHECK_SHIFT) | COUNTER_INIT
    return idx


@njit(cache=True, inline="always")
def _table_update(slots, idx, bit, rec):
    v = np.int64(slots[idx])
    p = v & SLOT_PROB_MASK
    hits = (v >> SLOT_HITS_SHIFT) & 0xFF
    target = 65535 if bit else 0
    p += ((target - p) * rec[hits]) >> 16
    if hits < COUNTER_LIMIT:
        hits += 1
    slots[idx] = (v & (0xFF << SLOT_CHECK_SHIFT)) | (hits << SLOT_HITS_SHIFT) | p


def new_slots(bits: int) -> np.ndarray:
    return np.full(1 << bits, COUNTER_INIT, dtype=np.uint32)


class ContextTable:
    """2**bits adaptive bit counters addressed by 32-bit context ids.

    The low ``bits`` bits of an id select the slot and its top byte is kept
    as a check value; a lookup whose check differs claims the slot afresh.
    """

    def __init__(self, bits: int = DEFAULT_TABLE_BITS):
        if not MIN_TABLE_BITS <= bits <= MAX_TABLE_BITS:
            raise InvalidArgument(f"table bits must be in {MIN_TABLE_BITS}..{MAX_TABLE_BITS}")
        self.bits = bits
        self.mask = (1 << bits) - 1
        self.slots = new_slots(bits)

    def lookup_p12(self, ident: int) -> int:
        idx = _table_lookup(self.slots, np.int64(ident), self.mask)
        return int(_slot_p12(self.slots[idx]))

    def lookup(self, ident: int) -> float:
        return self.lookup_p12(ident) / PROB_ONE

    def update(self, ident: int, bit: int) -> None:
        idx = _table_lookup(self.slots, np.int64(ident), self.mask)
        _table_update(self.slots, idx, int(bit), RECIPROCALS)


def counter_lookup(table: ContextTable, ident: int) -> float:
    return table.lookup(ident)


# --- mixer ----------------------------------------------------------------


@njit(cache=True, inline="always")
def _mix_dot(w, st, n):
    dot = np.int64(0)
    for i in range(n):
        dot += w[i] * st[i]
    return dot >> 16


@njit(cache=True, inline="always")
def _mix_train(w, st, n, err):
    for i in range(n):
        v = w[i] + ((LR_NUM * err * st[i] + 32768) >> 16)
        if v > WEIGHT_LIMIT:
            v = WEIGHT_LIMIT
        elif v < -WEIGHT_LIMIT:
            v = -WEIGHT_LIMIT
        w[i] = v


class Mixer:
    """Single-layer logistic mixer with one weight set per selector value
    (the bit position within the byte by default)."""

    def __init__(self, n_inputs: int, n_sets: int = 8, init_weight: int = WEIGHT_INIT):
        if n_inputs < 1 or n_sets < 1:
            raise InvalidArgument("mixer needs at least one input and one weight set")
        self.n_inputs = n_inputs
        self.weights = np.full((n_sets, n_inputs), init_weight, dtype=np.int64)
        self._st = np.zeros(n_inputs, dtype=np.int64)
        self._set = 0
        self._p = PROB_ONE // 2

    def predict_p12(self, inputs_p12, weight_set: int = 0) -> int:
        st = STRETCH_TABLE[np.clip(np.asarray(inputs_p12, dtype=np.int64), 1, PROB_ONE - 1)]
        if st.shape != (self.n_inputs,):
            raise InvalidArgument(f"expected {self.n_inputs} inputs")
        self._st[:] = st
        self._set = weight_set
        self._p = int(_squash12(_mix_dot(self.weights[weight_set], self._st, self.n_inputs), SQUASH_TABLE))
        return self._p

    def predict(self, inputs, weight_set: int = 0) -> float:
        """Mix probabilities given as floats in [EPS, 1 - EPS]."""
        return self.predict_p12([to_p12(p) for p in inputs], weight_set) / PROB_ONE

    def update(self, bit: int) -> None:
        """Gradient step for the inputs and weight set of the last predict."""
        err = (int(bit) << PROB_BITS) - self._p
        _mix_train(self.weights[self._set], self._st, self.n_inputs, err)

    def weights_float(self, weight_set: int = 0) -> np.ndarray:
        return self.weights[weight_set] / WEIGHT_ONE


class Predictor:
    """Counters feeding a mixer: given the ids active for the next bit,
    predicts it and then learns from the coded value."""

    def __init__(self, n_inputs: int, table_bits: int = DEFAULT_TABLE_BITS, n_sets: int = 8):
        self.table = ContextTable(table_bits)
        self.mixer = Mixer(n_inputs, n_sets)
        self._idx = np.zeros(n_inputs, dtype=np.int64)

    def predict_p12(self, ids, weight_set: int = 0) -> int:
        ps = np.empty(len(ids), dtype=np.int64)
        for i, ident in enumerate(ids):
            self._idx[i] = _table_lookup(self.table.slots, np.int64(ident), self.table.mask)
            ps[i] = _slot_p12(self.table.slots[self._idx[i]])
        return self.mixer.predict_p12(ps, weight_set)

    def predict(self, ids, weight_set: int = 0) -> float:
        return self.predict_p12(ids, weight_set) / PROB_ONE

    def update(self, bit: int) -> None:
        self.mixer.update(bit)
        for idx in self._idx:
            _table_update(self.table.slots, idx, int(bit), RECIPROCALS)
