"""Memory-efficient stabilizer state for the noisy-transduction circuit.

The state tracks stabilizer generators only on the system (and optional
reference) qubits, as packed GF(2) bit rows.  Generators whose tracked
support has vanished but which still act on the apparatus are folded into a
single counter, so memory stays O(K^2) no matter how many apparatus qubits
the circuit has emitted.

Site layout: site ``s`` owns system qubits ``a = 2s`` and ``b = 2s + 1``.
A transduction event moves qubit ``b`` into the apparatus (kept), discards
qubit ``a`` into the environment, and re-initializes both in |0>.
"""

from __future__ import annotations

import enum

import numpy as np

from . import gf2


class InitialStateKind(enum.Enum):
    PURE_PRODUCT = "product"
    MAXIMALLY_MIXED = "mixed"
    BELL_REFERENCE = "bell"


class TrackedTableau:
    """Tracked generator rows plus apparatus/environment bookkeeping.

    Single-owner mutable object: one trajectory owns one tableau.  Entropy
    queries (see :mod:`qdcsim.observables`) are read-only.
    """

    __slots__ = (
        "words",
        "ignored_count",
        "n_system",
        "n_reference",
        "n_apparatus",
        "n_environment",
    )

    def __init__(self, words: np.ndarray, n_system: int, n_reference: int):
        self.words = words
        self.n_system = n_system
        self.n_reference = n_reference
        self.ignored_count = 0
        self.n_apparatus = 0
        self.n_environment = 0

    # -- construction --------------------------------------------------

    @classmethod
    def new(cls, kind: InitialStateKind, n_system: int) -> "TrackedTableau":
        if n_system <= 0 or n_system % 2:
            raise ValueError("n_system must be positive and even")
        if kind is InitialStateKind.BELL_REFERENCE:
            n_reference = n_system
        else:
            n_reference = 0
        n_cols = 2 * (n_system + n_reference)
        if kind is InitialStateKind.PURE_PRODUCT:
            bits = np.zeros((n_system, n_cols), dtype=np.uint8)
            for q in range(n_system):
                bits[q, 2 * q + 1] = 1
            words = gf2.from_bits(bits)
        elif kind is InitialStateKind.MAXIMALLY_MIXED:
            words = gf2.zeros(0, n_cols)
        else:
            # Bell pair between q and its reference partner q + n_system:
            # generators X_q X_q' and Z_q Z_q'.
            bits = np.zeros((2 * n_system, n_cols), dtype=np.uint8)
            for q in range(n_system):
                qr = q + n_system
                bits[2 * q, 2 * q] = 1
                bits[2 * q, 2 * qr] = 1
                bits[2 * q + 1, 2 * q + 1] = 1
                bits[2 * q + 1, 2 * qr + 1] = 1
            words = gf2.from_bits(bits)
        return cls(words, n_system, n_reference)

    # -- basic queries ---------------------------------------------------

    @property
    def n_tracked(self) -> int:
        """Number of tracked qubits K (system plus reference)."""
        return self.n_system + self.n_reference

    @property
    def n_cols(self) -> int:
        return 2 * self.n_tracked

    @property
    def n_rows(self) -> int:
        return self.words.shape[0]

    def generator_total(self) -> int:
        """Total generator count M, tracked plus ignored."""
        return self.n_rows + self.ignored_count

    def rows_as_bits(self) -> np.ndarray:
        return gf2.to_bits(self.words, self.n_cols)

    # -- mutation --------------------------------------------------------

    def _check_system_qubit(self, q: int) -> None:
        if not 0 <= q < self.n_system:
            raise IndexError(
                f"qubit {q} is not a system qubit (reference qubits never evolve)"
            )

    def apply_two_qubit_gate(self, gate: np.ndarray, q1: int, q2: int) -> None:
        if q1 == q2:
            raise IndexError("gate qubits must differ")
        self._check_system_qubit(q1)
        self._check_system_qubit(q2)
        gf2.apply_gate(self.words, self.n_cols, gate, (q1, q2))

    def _append_single_col_rows(self, cols: np.ndarray) -> None:
        old = self.words
        fresh = np.empty((old.shape[0] + cols.size, old.shape[1]),
                         dtype=np.uint64)
        fresh[: old.shape[0]] = old
        fresh[old.shape[0]:] = 0
        fresh[old.shape[0] + np.arange(cols.size), cols >> 6] = (
            np.uint64(1) << (cols & 63).astype(np.uint64)
        )
        self.words = fresh

    def transduce_site(self, site: int) -> None:
        """Noisy transduction of one site: b to apparatus, a to environment,
        both re-initialized pure.

        Rows whose tracked support vanishes here are transferred to the
        ignored counter by the next :meth:`compact`.
        """
        if not 0 <= site < self.n_system // 2:
            raise IndexError(f"site {site} out of range")
        a = 2 * site
        b = 2 * site + 1
        # (1) b joins the apparatus: its tracked columns are projected out.
        gf2.zero_cols(self.words, np.array([2 * b, 2 * b + 1], dtype=np.int64))
        self.n_apparatus += 1
        # (2) a is traced out into the environment: generators supported on
        # it are eliminated and deleted.
        piv = gf2.row_reduce_window(
            self.words, self.n_cols, np.array([2 * a, 2 * a + 1], dtype=np.int64)
        )
        if piv.size:
            keep = np.ones(self.n_rows, dtype=bool)
            keep[piv] = False
            self.words = self.words[keep]
        self.n_environment += 1
        # (3) both qubits come back in |0>.
        self._append_single_col_rows(np.array([2 * a + 1, 2 * b + 1],
                                              dtype=np.int64))

    def transduce_sites(self, sites: np.ndarray) -> None:
        """Transduce several sites of one layer in a single elimination pass.

        Equivalent to sequential :meth:`transduce_site` over the sites
        followed by :meth:`compact` (the sub-channels act on disjoint qubits
        and commute).  Leaves the tracked rows independent, so the row count
        never exceeds 2K even transiently.
        """
        sites = np.asarray(sites, dtype=np.int64)
        if sites.size == 0:
            return
        if sites.size != np.unique(sites).size:
            raise IndexError("duplicate sites")
        if sites.min() < 0 or sites.max() >= self.n_system // 2:
            raise IndexError("site out of range")
        a_qubits = 2 * sites
        b_qubits = 2 * sites + 1
        gf2.zero_cols(self.words, gf2.qubit_cols(b_qubits))
        a_cols = gf2.qubit_cols(a_qubits)
        in_a = np.zeros(self.n_cols, dtype=bool)
        in_a[a_cols] = True
        order = np.concatenate([a_cols, np.nonzero(~in_a)[0]])
        piv_rows, piv_cols = gf2.gauss_jordan(self.words, order)
        env_pivot = in_a[piv_cols] if piv_cols.size else np.empty(0, dtype=bool)
        keep_rows = np.sort(piv_rows[~env_pivot]) if piv_rows.size else piv_rows
        n_zero = self.n_rows - piv_rows.size
        self.words = self.words[keep_rows]
        self.ignored_count += int(n_zero)
        self.n_apparatus += int(sites.size)
        self.n_environment += int(sites.size)
        z_cols = np.empty(2 * sites.size, dtype=np.int64)
        z_cols[0::2] = 2 * a_qubits + 1
        z_cols[1::2] = 2 * b_qubits + 1
        self._append_single_col_rows(z_cols)

    def compact(self) -> None:
        """Row-reduce over all tracked columns; move all-zero rows into the
        ignored counter.  Idempotent; preserves tracked-plus-ignored count."""
        if self.n_rows == 0:
            return
        piv = gf2.row_reduce_window(
            self.words, self.n_cols, np.arange(self.n_cols, dtype=np.int64)
        )
        n_zero = self.n_rows - piv.size
        if n_zero:
            self.words = self.words[piv]
            self.ignored_count += int(n_zero)

    # -- debug dump ------------------------------------------------------

    def dump(self) -> str:
        """Text form for golden-file tests: header with counters, one
        bitstring row per tracked generator, columns in index order."""
        head = (
            f"K={self.n_tracked} M={self.generator_total()} "
            f"ignored={self.ignored_count} apparatus={self.n_apparatus} "
            f"environment={self.n_environment}"
        )
        rows = ["".join(str(b) for b in row) for row in self.rows_as_bits()]
        return "\n".join([head] + rows)
