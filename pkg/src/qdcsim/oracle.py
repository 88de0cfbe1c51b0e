"""Brute-force validation tableau keeping explicit apparatus and environment.

The full tableau appends two fresh qubits (apparatus, environment) per
transduction event and never discards anything, so any region entropy is
available, at O(qubits^2) memory.  It consumes the identical RNG stream as
the efficient engine, which makes seeded runs comparable snapshot by
snapshot; that exact agreement is the core validation of the efficient
algorithm.

Qubit layout: system qubits 0..n_system-1, reference qubits (Bell runs)
n_system..2*n_system-1, then apparatus/environment qubits appended in event
order (apparatus first within each event).
"""

from __future__ import annotations

import numpy as np

from . import gf2, observables
from .circuit import (
    CircuitConfig,
    apply_brick_layer,
    brick_start_cols,
    sample_brick_layer,
    trajectory_rng,
)
from .stabilizer import InitialStateKind, TrackedTableau


class QubitCapExceeded(RuntimeError):
    """The oracle refuses to grow past its configured qubit cap."""


class FullTableau:
    __slots__ = ("words", "n_system", "n_reference", "n_qubits",
                 "apparatus", "environment")

    def __init__(self, kind: InitialStateKind, n_system: int):
        seed = TrackedTableau.new(kind, n_system)
        self.words = seed.words.copy()
        self.n_system = n_system
        self.n_reference = seed.n_reference
        self.n_qubits = n_system + self.n_reference
        self.apparatus: list[int] = []
        self.environment: list[int] = []

    def copy(self) -> "FullTableau":
        out = object.__new__(FullTableau)
        out.words = self.words.copy()
        out.n_system = self.n_system
        out.n_reference = self.n_reference
        out.n_qubits = self.n_qubits
        out.apparatus = list(self.apparatus)
        out.environment = list(self.environment)
        return out

    @property
    def n_cols(self) -> int:
        return 2 * self.n_qubits

    @property
    def n_tracked(self) -> int:
        return self.n_system + self.n_reference

    @property
    def n_rows(self) -> int:
        return self.words.shape[0]

    def apply_two_qubit_gate(self, gate: np.ndarray, q1: int, q2: int) -> None:
        gf2.apply_gate(self.words, self.n_cols, gate, (q1, q2))

    def add_pure_qubit(self) -> int:
        q = self.n_qubits
        self.n_qubits += 1
        need = gf2.n_words(self.n_cols)
        if need > self.words.shape[1]:
            self.words = np.pad(self.words, ((0, 0), (0, need - self.words.shape[1])))
        row = np.zeros((1, self.words.shape[1]), dtype=np.uint64)
        c = 2 * q + 1
        row[0, c >> 6] = np.uint64(1) << np.uint64(c & 63)
        self.words = np.concatenate([self.words, row], axis=0)
        return q

    def transduce_site(self, site: int) -> None:
        if not 0 <= site < self.n_system // 2:
            raise IndexError(f"site {site} out of range")
        a, b = 2 * site, 2 * site + 1
        app = self.add_pure_qubit()
        env = self.add_pure_qubit()
        self.apply_two_qubit_gate(gf2.SWAP, b, app)
        self.apply_two_qubit_gate(gf2.SWAP, a, env)
        self.apparatus.append(app)
        self.environment.append(env)

    # -- entropies -------------------------------------------------------

    def entropy_region(self, qubits) -> int:
        """S(R) = |R| - (M - rank over the complement columns)."""
        q = np.asarray(sorted(qubits), dtype=np.int64)
        if q.size and (q[0] < 0 or q[-1] >= self.n_qubits):
            raise IndexError("region qubit out of range")
        in_r = np.zeros(self.n_qubits, dtype=bool)
        in_r[q] = True
        comp = gf2.qubit_cols(np.nonzero(~in_r)[0])
        r = gf2.rank(self.words, self.n_cols, comp)
        return int(q.size - (self.n_rows - r))


class ConditionedEntropies:
    """Fast repeated S(X u B) queries for fixed conditioning block B.

    B is the whole apparatus or the whole environment; X ranges over tracked
    (system u reference) qubit subsets.  One elimination over the complement
    block's columns is shared by all queries on the same state.
    """

    def __init__(self, full: FullTableau, condition_on: str):
        if condition_on == "apparatus":
            self.block = full.apparatus
            other = full.environment
        elif condition_on == "environment":
            self.block = full.environment
            other = full.apparatus
        else:
            raise ValueError("condition_on must be 'apparatus' or 'environment'")
        self.n_tracked = full.n_tracked
        self.m_total = full.n_rows
        # The conditioning block's own columns never enter any rank query,
        # so work on the extraction to (other block, tracked) columns only.
        other_cols = gf2.qubit_cols(other)
        tracked_cols = np.arange(2 * self.n_tracked, dtype=np.int64)
        work = gf2.extract_cols(full.words,
                                np.concatenate([other_cols, tracked_cols]))
        piv, _ = gf2.gauss_jordan(work, np.arange(other_cols.size,
                                                  dtype=np.int64))
        self.rank_other = len(piv)
        keep = np.ones(work.shape[0], dtype=bool)
        keep[piv] = False
        resid = gf2.extract_cols(work[keep],
                                 other_cols.size + tracked_cols)
        nz = gf2.row_reduce_window(resid, tracked_cols.size, tracked_cols)
        self.resid = resid[nz]

    def joint(self, region) -> int:
        """S(X u B) for tracked region X."""
        q = np.asarray(sorted(region), dtype=np.int64)
        in_r = np.zeros(self.n_tracked, dtype=bool)
        if q.size:
            in_r[q] = True
        comp_cols = gf2.qubit_cols(np.nonzero(~in_r)[0])
        r = self.rank_other + gf2.rank(self.resid, 2 * self.n_tracked, comp_cols)
        return int(q.size + len(self.block) - (self.m_total - r))

    def conditional(self, region) -> int:
        """S(X | B) = S(X u B) - S(B)."""
        return self.joint(region) - self.joint([])


def oracle_observables(full: FullTableau, names, kind: InitialStateKind) -> dict:
    """Evaluate the engine's named observables with explicit apparatus."""
    cond = ConditionedEntropies(full, "apparatus")
    L = full.n_system // 2
    system = list(range(full.n_system))
    values: dict[str, int] = {}
    for name in names:
        if name == "cond_entropy_quarter":
            values[name] = cond.conditional(observables.region_sites(range(L // 4)))
        elif name == "I3":
            r1 = observables.quarter_region(L, 1)
            r2 = observables.quarter_region(L, 2)
            r3 = observables.quarter_region(L, 3)
            values[name] = (4 * cond.conditional(r1)
                            - 2 * cond.conditional(r1 + r2)
                            - cond.conditional(r1 + r3))
        elif name == "coherent_info":
            if kind is InitialStateKind.MAXIMALLY_MIXED:
                values[name] = cond.conditional(system)
            elif kind is InitialStateKind.BELL_REFERENCE:
                values[name] = cond.joint(system) - cond.joint(
                    list(range(full.n_tracked)))
            else:
                raise ValueError("coherent information undefined for pure runs")
        elif name.startswith("profile:"):
            x = int(name.split(":", 1)[1])
            values[name] = cond.conditional(observables.region_sites(range(x)))
        else:
            raise ValueError(f"unknown observable {name!r}")
    return values


def evolve_full(config: CircuitConfig, trajectory_index: int,
                qubit_cap: int = 2000, on_snapshot=None):
    """Run the identically seeded circuit on the full tableau.

    Returns a list of (layer, result) pairs at the config's snapshot layers,
    where result is ``on_snapshot(layer, full)`` if given, else a copy of the
    tableau.  Refuses to grow past ``qubit_cap`` qubits.
    """
    rng = trajectory_rng(config.master_seed, trajectory_index)
    full = FullTableau(config.initial_state, config.n_system)
    system_cols = 2 * config.n_system
    snap_layers = set(config.snapshot_layers())
    out = []
    for layer in range(1, config.T + 1):
        bricks = sample_brick_layer(
            rng, config.L, config.cnot_prob, config.symmetric_bricks
        )
        apply_brick_layer(full.words, bricks,
                          brick_start_cols(config.L, layer), system_cols)
        mask = rng.random(config.L) < config.p
        for site in np.nonzero(mask)[0]:
            if full.n_qubits + 2 > qubit_cap:
                raise QubitCapExceeded(
                    f"oracle would exceed {qubit_cap} qubits at layer {layer}; "
                    "raise the cap or shrink L/T/p"
                )
            full.transduce_site(int(site))
        if layer in snap_layers:
            out.append((layer, on_snapshot(layer, full) if on_snapshot
                        else full.copy()))
    return out


def _random_site_region(rng, n_sites: int, offset: int = 0) -> list[int]:
    """Random site subset, expanded to both qubits of each chosen site.

    The information-exchange identity holds per realization exactly for
    site-aligned regions: exchanging apparatus and environment is equivalent
    to exchanging the a and b qubit of every site, which maps such regions to
    themselves.  (Single-qubit subsets satisfy only the a<->b-twisted form.)
    """
    mask = rng.random(n_sites) < 0.5
    return [offset + q for s in np.nonzero(mask)[0]
            for q in (2 * int(s), 2 * int(s) + 1)]


def check_ie_symmetry(full: FullTableau, trials: int, rng) -> dict:
    """Check S(P u A) = S(P u E) on random site-aligned regions."""
    cond_a = ConditionedEntropies(full, "apparatus")
    cond_e = ConditionedEntropies(full, "environment")
    n_sites = full.n_system // 2
    violations = []
    for _ in range(trials):
        region = _random_site_region(rng, n_sites)
        if full.n_reference:
            region += _random_site_region(rng, n_sites, offset=full.n_system)
        lhs = cond_a.joint(region)
        rhs = cond_e.joint(region)
        if lhs != rhs:
            violations.append({"region": region, "S_with_A": lhs, "S_with_E": rhs})
    return {"check": "ie_symmetry", "trials": trials, "violations": violations}


def check_complement_symmetry(full: FullTableau, trials: int, rng) -> dict:
    """Check S(P_S, P_S'; A) = S(P_S^c, P_S'^c; A) on Bell-reference states."""
    if full.n_reference != full.n_system:
        raise ValueError("complement symmetry check needs a Bell-reference run")
    cond_a = ConditionedEntropies(full, "apparatus")
    tracked = set(range(full.n_tracked))
    n_sites = full.n_system // 2
    violations = []
    for _ in range(trials):
        region = (_random_site_region(rng, n_sites)
                  + _random_site_region(rng, n_sites, offset=full.n_system))
        comp = sorted(tracked - set(region))
        lhs = cond_a.joint(region)
        rhs = cond_a.joint(comp)
        if lhs != rhs:
            violations.append({"region": region, "S_region": lhs,
                               "S_complement": rhs})
    return {"check": "complement_symmetry", "trials": trials,
            "violations": violations}
