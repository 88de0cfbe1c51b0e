"""Bit-packed GF(2) linear algebra kernel.

Rows of a matrix over GF(2) are stored packed into ``uint64`` words,
little-endian within each word: column ``c`` lives at bit ``c & 63`` of word
``c >> 6``.  Row addition is word-parallel XOR.

Qubit column convention: qubit ``q`` owns the adjacent column pair
``(2q, 2q+1)`` holding its X- and Z-support, so per-qubit windows are
contiguous.

Clifford gates are represented by their phase-free conjugation action: an
invertible ``2k x 2k`` GF(2) matrix that acts by *right* multiplication on the
restriction of each row to the window columns, ``v -> v @ M``.  Orientation is
pinned by the CNOT rule ``x_target ^= x_control; z_control ^= z_target``.
"""

from __future__ import annotations

import numpy as np
from numba import njit

WORD = 64
_ONE = np.uint64(1)


def n_words(n_cols: int) -> int:
    return (n_cols + WORD - 1) // WORD


def zeros(n_rows: int, n_cols: int) -> np.ndarray:
    """Packed all-zero matrix with ``n_rows`` rows over ``n_cols`` columns."""
    return np.zeros((n_rows, n_words(n_cols)), dtype=np.uint64)


def from_bits(bits) -> np.ndarray:
    """Pack a 2D {0,1} array (rows x cols) into uint64 words."""
    bits = np.atleast_2d(np.asarray(bits, dtype=np.uint8))
    n_rows, n_cols = bits.shape
    pad = n_words(n_cols) * WORD - n_cols
    if pad:
        bits = np.concatenate(
            [bits, np.zeros((n_rows, pad), dtype=np.uint8)], axis=1
        )
    packed = np.packbits(bits, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view(np.uint64)


def to_bits(words: np.ndarray, n_cols: int) -> np.ndarray:
    """Unpack to a 2D uint8 {0,1} array with exactly ``n_cols`` columns."""
    raw = np.unpackbits(
        np.ascontiguousarray(words).view(np.uint8), axis=1, bitorder="little"
    )
    return raw[:, :n_cols]


def get_col(words: np.ndarray, c: int) -> np.ndarray:
    """Column ``c`` as a uint8 vector."""
    return ((words[:, c >> 6] >> np.uint64(c & 63)) & _ONE).astype(np.uint8)


def set_col(words: np.ndarray, c: int, vals: np.ndarray) -> None:
    w, sh = c >> 6, np.uint64(c & 63)
    mask = _ONE << sh
    words[:, w] &= ~mask
    words[:, w] |= vals.astype(np.uint64) << sh


def zero_cols(words: np.ndarray, cols: np.ndarray) -> None:
    """Clear the given columns of every row, in place."""
    cols = np.asarray(cols, dtype=np.int64)
    if cols.size == 0:
        return
    zmask = np.zeros(words.shape[1], dtype=np.uint64)
    np.bitwise_or.at(zmask, cols >> 6, _ONE << (cols & 63).astype(np.uint64))
    words &= ~zmask


def qubit_cols(qubits) -> np.ndarray:
    """Sorted column indices {2q, 2q+1} for a set of qubit indices."""
    q = np.asarray(sorted(qubits), dtype=np.int64)
    if q.size and (q[0] < 0 or len(set(q.tolist())) != q.size):
        raise IndexError("qubit indices must be distinct and nonnegative")
    cols = np.empty(2 * q.size, dtype=np.int64)
    cols[0::2] = 2 * q
    cols[1::2] = 2 * q + 1
    return cols


@njit(cache=True)
def _gauss_jordan(words, cols):  # pragma: no cover - compiled
    """Gauss-Jordan over the given column order, in place.

    Pivot selection: columns in the order given, lowest remaining row index
    first.  The pivot row is XORed into *every* other row with a 1 in the
    pivot column, so afterwards non-pivot rows are zero on all given columns.
    Returns (pivot_rows, pivot_cols) in processing order.
    """
    n = words.shape[0]
    nw = words.shape[1]
    used = np.zeros(n, dtype=np.bool_)
    max_p = min(n, cols.shape[0])
    pivot_rows = np.empty(max_p, dtype=np.int64)
    pivot_cols = np.empty(max_p, dtype=np.int64)
    npiv = 0
    one = np.uint64(1)
    for ci in range(cols.shape[0]):
        c = cols[ci]
        w = c >> 6
        sh = np.uint64(c & 63)
        p = -1
        for r in range(n):
            if not used[r] and (words[r, w] >> sh) & one:
                p = r
                break
        if p < 0:
            continue
        for r in range(n):
            if r != p and (words[r, w] >> sh) & one:
                for k in range(nw):
                    words[r, k] ^= words[p, k]
        used[p] = True
        pivot_rows[npiv] = p
        pivot_cols[npiv] = c
        npiv += 1
        if npiv == max_p:
            break
    return pivot_rows[:npiv], pivot_cols[:npiv]


@njit(cache=True)
def _apply_window_luts(words, luts, starts, wrap_cols):  # pragma: no cover
    """Apply one 8-column lookup table per window to every row, in place.

    Window ``b`` covers columns ``(starts[b] + k) % wrap_cols`` for k=0..7.
    ``luts[b]`` maps the packed 8-bit restriction to its image.
    """
    n = words.shape[0]
    nb = luts.shape[0]
    one = np.uint64(1)
    byte = np.uint64(0xFF)
    cols = np.empty(8, dtype=np.int64)
    for b in range(nb):
        c0 = starts[b] % wrap_cols
        sh = c0 & 63
        if c0 + 8 <= wrap_cols and sh <= 56:
            # whole window inside one word: shift/mask instead of per-bit
            w = c0 >> 6
            shift = np.uint64(sh)
            keep = ~(byte << shift)
            for r in range(n):
                idx = (words[r, w] >> shift) & byte
                new = np.uint64(luts[b, idx])
                words[r, w] = (words[r, w] & keep) | (new << shift)
            continue
        for k in range(8):
            cols[k] = (starts[b] + k) % wrap_cols
        for r in range(n):
            idx = 0
            for k in range(8):
                c = cols[k]
                if (words[r, c >> 6] >> np.uint64(c & 63)) & one:
                    idx |= 1 << k
            new = luts[b, idx]
            for k in range(8):
                c = cols[k]
                w = c >> 6
                sh = np.uint64(c & 63)
                if (new >> k) & 1:
                    words[r, w] |= one << sh
                else:
                    words[r, w] &= ~(one << sh)
    return None


@njit(cache=True)
def _luts_from_gates8(gates):  # pragma: no cover - compiled
    """Packed 256-entry lookup tables for a batch of 8x8 GF(2) matrices.

    By linearity lut[x] = lut[x without lowest bit] ^ image-of-lowest-bit,
    so each table is filled in one pass from the eight basis images.
    """
    nb = gates.shape[0]
    out = np.zeros((nb, 256), dtype=np.uint8)
    basis = np.zeros(8, dtype=np.uint8)
    for b in range(nb):
        for k in range(8):
            v = 0
            for j in range(8):
                if gates[b, k, j]:
                    v |= 1 << j
            basis[k] = v
        for x in range(1, 256):
            low = x & (-x)
            k = 0
            while not (low >> k) & 1:
                k += 1
            out[b, x] = out[b, x ^ low] ^ basis[k]
    return out


@njit(cache=True)
def _extract_cols(words, cols):  # pragma: no cover - compiled
    """Gather the given columns into a new packed matrix."""
    n = words.shape[0]
    m = cols.shape[0]
    out = np.zeros((n, (m + 63) // 64), dtype=np.uint64)
    one = np.uint64(1)
    for j in range(m):
        c = cols[j]
        w = c >> 6
        sh = np.uint64(c & 63)
        ow = j >> 6
        osh = np.uint64(j & 63)
        for r in range(n):
            if (words[r, w] >> sh) & one:
                out[r, ow] |= one << osh
    return out


def extract_cols(words: np.ndarray, cols) -> np.ndarray:
    cols = np.asarray(cols, dtype=np.int64)
    return _extract_cols(words, cols)


def _check_window(n_cols: int, cols: np.ndarray) -> None:
    if cols.size and (cols.min() < 0 or cols.max() >= n_cols):
        raise IndexError("window columns out of range")


def rank(words: np.ndarray, n_cols: int, cols=None) -> int:
    """GF(2) rank of the rows restricted to the window columns.

    ``cols=None`` means all columns.  The input is not modified.
    """
    if cols is None:
        cols = np.arange(n_cols, dtype=np.int64)
    else:
        cols = np.asarray(cols, dtype=np.int64)
    _check_window(n_cols, cols)
    if words.shape[0] == 0 or cols.size == 0:
        return 0
    sub = _extract_cols(words, cols)
    piv, _ = _gauss_jordan(sub, np.arange(cols.size, dtype=np.int64))
    return len(piv)


def row_reduce_window(words: np.ndarray, n_cols: int, cols) -> np.ndarray:
    """Row-reduce in place so the window restrictions are in reduced form.

    Afterwards at most ``len(cols)`` rows have nonzero restriction to the
    window; their restrictions are linearly independent and their indices are
    returned.  Every other row has zero restriction to the window.  The row
    space over all columns is preserved (only row XORs are performed).
    """
    cols = np.asarray(cols, dtype=np.int64)
    _check_window(n_cols, cols)
    if words.shape[0] == 0 or cols.size == 0:
        return np.empty(0, dtype=np.int64)
    piv_rows, _ = _gauss_jordan(words, np.sort(cols))
    return np.sort(piv_rows)


def gauss_jordan(words: np.ndarray, cols) -> tuple[np.ndarray, np.ndarray]:
    """In-place Gauss-Jordan with an explicit column processing order."""
    cols = np.asarray(cols, dtype=np.int64)
    if words.shape[0] == 0 or cols.size == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    return _gauss_jordan(words, cols)


# --- symplectic gates -------------------------------------------------------

def symplectic_form(k: int) -> np.ndarray:
    """Block-diagonal form with [[0,1],[1,0]] per qubit."""
    lam = np.zeros((2 * k, 2 * k), dtype=np.uint8)
    for q in range(k):
        lam[2 * q, 2 * q + 1] = 1
        lam[2 * q + 1, 2 * q] = 1
    return lam


def is_symplectic(gate: np.ndarray) -> bool:
    gate = np.asarray(gate, dtype=np.uint8)
    if gate.ndim != 2 or gate.shape[0] != gate.shape[1] or gate.shape[0] % 2:
        return False
    k = gate.shape[0] // 2
    lam = symplectic_form(k)
    return bool(np.array_equal((gate @ lam @ gate.T) % 2, lam))


def compose(*gates: np.ndarray) -> np.ndarray:
    """Compose gates in application order (rows transform as v @ M)."""
    out = np.asarray(gates[0], dtype=np.uint8)
    for g in gates[1:]:
        out = (out @ np.asarray(g, dtype=np.uint8)) % 2
    return out


def enumerate_single_qubit_symplectics() -> list[np.ndarray]:
    """The six invertible 2x2 GF(2) matrices, ordered lexicographically
    by flattened entries (identity is the third element)."""
    out = []
    for flat in range(16):
        m = np.array(
            [[(flat >> 3) & 1, (flat >> 2) & 1], [(flat >> 1) & 1, flat & 1]],
            dtype=np.uint8,
        )
        if (int(m[0, 0]) * int(m[1, 1]) + int(m[0, 1]) * int(m[1, 0])) % 2:
            out.append(m)
    return out


IDENTITY_2 = np.eye(2, dtype=np.uint8)

# x_target ^= x_control; z_control ^= z_target  (columns: xc zc xt zt)
CNOT = np.array(
    [[1, 0, 1, 0],
     [0, 1, 0, 0],
     [0, 0, 1, 0],
     [0, 1, 0, 1]], dtype=np.uint8)

SWAP = np.array(
    [[0, 0, 1, 0],
     [0, 0, 0, 1],
     [1, 0, 0, 0],
     [0, 1, 0, 0]], dtype=np.uint8)


def gate_lut(gate: np.ndarray) -> np.ndarray:
    """Map every packed window restriction to its image under the gate.

    Bit ``k`` of the index is window column ``k`` (little-endian).
    """
    gate = np.asarray(gate, dtype=np.uint8)
    width = gate.shape[0]
    idx = np.arange(1 << width, dtype=np.uint32)
    bits = ((idx[:, None] >> np.arange(width)) & 1).astype(np.uint8)
    img = (bits @ gate) % 2
    return (img @ (1 << np.arange(width, dtype=np.uint32))).astype(
        np.uint16 if width > 8 else np.uint8
    )


def apply_gate(words: np.ndarray, n_cols: int, gate: np.ndarray, qubits) -> None:
    """Right-multiply every row's window restriction by the gate, in place.

    ``qubits`` is the ordered qubit window; the gate arity must match.
    """
    gate = np.asarray(gate, dtype=np.uint8)
    qubits = list(qubits)
    if gate.shape != (2 * len(qubits), 2 * len(qubits)):
        raise ValueError("gate arity does not match window size")
    if not is_symplectic(gate):
        raise ValueError("gate is not symplectic over GF(2)")
    cols = np.empty(2 * len(qubits), dtype=np.int64)
    for i, q in enumerate(qubits):
        cols[2 * i] = 2 * q
        cols[2 * i + 1] = 2 * q + 1
    _check_window(n_cols, cols)
    if words.shape[0] == 0:
        return
    lut = gate_lut(gate)
    idx = np.zeros(words.shape[0], dtype=np.uint32)
    for i, c in enumerate(cols):
        idx |= get_col(words, int(c)).astype(np.uint32) << i
    new = lut[idx]
    for i, c in enumerate(cols):
        set_col(words, int(c), ((new >> i) & 1).astype(np.uint8))
