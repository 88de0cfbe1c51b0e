"""Brickwork quantum-data-collection circuit engine.

Each layer applies a row of two-site bricks (odd layers start at site 0,
even layers at site 1, periodic boundary), then transduces each site
independently with probability p, then compacts the tableau.

RNG contract: one generator per trajectory, seeded from
``SeedSequence([master_seed, trajectory_index])``.  Draw order per layer is
fixed: all brick gates left to right (two two-qubit Clifford draws per
brick), then one uniform per site (0..L-1) for the transduction decisions.
The oracle consumes the identical stream, so seeded runs are comparable
snapshot by snapshot.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, asdict

import numpy as np
from numba import njit

from . import gf2, observables
from .stabilizer import InitialStateKind, TrackedTableau

_SINGLES = np.stack(gf2.enumerate_single_qubit_symplectics())

# Window-qubit order inside a brick is (a_i, b_i, a_j, b_j).  A gate applied
# identically to the a-pair and the b-pair is block_diag(U, U) in the
# (a_i, a_j, b_i, b_j) ordering, then permuted into window order:
_PAIR_PERM = np.array([0, 1, 4, 5, 2, 3, 6, 7])
# SWAP(a_i, b_i) * SWAP(a_j, b_j) exchanges window qubits 0<->1 and 2<->3:
_SWAP_PERM = np.array([2, 3, 0, 1, 6, 7, 4, 5])


@dataclass
class CircuitConfig:
    """Run parameters for one circuit realization family."""

    L: int
    p: float
    T: int | None = None
    cnot_prob: float = 0.9
    initial_state: InitialStateKind = InitialStateKind.PURE_PRODUCT
    master_seed: int = 0
    record_every: int = 0
    symmetric_bricks: bool = True  # False = a/b-asymmetric negative control

    def __post_init__(self):
        if isinstance(self.initial_state, str):
            self.initial_state = InitialStateKind(self.initial_state)
        if self.T is None:
            self.T = 4 * self.L
        if self.L < 4 or self.L % 2:
            raise ValueError("L must be even and >= 4")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if not 0.0 <= self.cnot_prob <= 1.0:
            raise ValueError("cnot_prob must lie in [0, 1]")
        if self.T < 1:
            raise ValueError("T must be >= 1")
        if self.record_every < 0:
            raise ValueError("record_every must be >= 0")

    @property
    def n_system(self) -> int:
        return 2 * self.L

    def snapshot_layers(self) -> list[int]:
        if self.record_every > 0:
            layers = list(range(self.record_every, self.T + 1, self.record_every))
            if not layers or layers[-1] != self.T:
                layers.append(self.T)
            return layers
        return [self.T]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["initial_state"] = self.initial_state.value
        return d


@dataclass
class Snapshot:
    layer: int
    values: dict[str, int]


@dataclass
class TrajectoryRecord:
    config: dict
    trajectory_index: int
    snapshots: list[Snapshot] = field(default_factory=list)
    elapsed: float = 0.0


def trajectory_rng(master_seed: int, trajectory_index: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence([int(master_seed), int(trajectory_index)])
    )


def _draw_layer(rng, n_gates: int, cnot_prob: float):
    """Fixed-shape random draws for one layer of two-qubit Cliffords.

    The second pair of single-qubit indices is drawn unconditionally so the
    stream shape does not depend on the CNOT coin flips."""
    s1 = rng.integers(0, 6, size=(n_gates, 2))
    u = rng.random(n_gates)
    s2 = rng.integers(0, 6, size=(n_gates, 2))
    return s1, u < cnot_prob, s2


def sample_layer_gates(rng, n_gates: int, cnot_prob: float = 0.9) -> np.ndarray:
    """Draw ``n_gates`` two-qubit Cliffords as 4x4 symplectic matrices.

    Each gate is S1 (x) S2, followed with probability ``cnot_prob`` by CNOT
    and another pair of random singles.
    """
    s1, with_cnot, s2 = _draw_layer(rng, n_gates, cnot_prob)
    gates = np.zeros((n_gates, 4, 4), dtype=np.uint8)
    gates[:, :2, :2] = _SINGLES[s1[:, 0]]
    gates[:, 2:, 2:] = _SINGLES[s1[:, 1]]
    if np.any(with_cnot):
        tail = np.zeros((n_gates, 4, 4), dtype=np.uint8)
        tail[:, :2, :2] = _SINGLES[s2[:, 0]]
        tail[:, 2:, 2:] = _SINGLES[s2[:, 1]]
        head = (gates[with_cnot] @ gf2.CNOT) % 2
        gates[with_cnot] = (head @ tail[with_cnot]) % 2
    return gates


def sample_two_qubit_clifford(rng, cnot_prob: float = 0.9) -> np.ndarray:
    return sample_layer_gates(rng, 1, cnot_prob)[0]


def layer_pairs(L: int, layer: int) -> list[tuple[int, int]]:
    """Brick site pairs for a 1-indexed layer, periodic boundary."""
    if layer % 2:
        return [(2 * k, 2 * k + 1) for k in range(L // 2)]
    return [(2 * k + 1, (2 * k + 2) % L) for k in range(L // 2)]


def brick_start_cols(L: int, layer: int) -> np.ndarray:
    """Starting tracked column of each brick's 8-column window (mod 4L)."""
    base = np.arange(L // 2, dtype=np.int64) * 8
    return base if layer % 2 else base + 4


def _double_gate(gate_a: np.ndarray, gate_b: np.ndarray) -> np.ndarray:
    """8x8 action of gate_a on the a-pair and gate_b on the b-pair."""
    n = gate_a.shape[0]
    ds = np.zeros((n, 8, 8), dtype=np.uint8)
    ds[:, :4, :4] = gate_a
    ds[:, 4:, 4:] = gate_b
    return ds[:, _PAIR_PERM][:, :, _PAIR_PERM]


def brick_matrices(u1_a, u2_a, u1_b=None, u2_b=None) -> np.ndarray:
    """Compose (nb, 8, 8) brick actions: U1, pairwise a/b swaps, U2."""
    d1 = _double_gate(u1_a, u1_a if u1_b is None else u1_b)
    d2 = _double_gate(u2_a, u2_a if u2_b is None else u2_b)
    sd2 = d2[:, _SWAP_PERM, :]
    return (d1 @ sd2) % 2


def brick_luts(bricks: np.ndarray) -> np.ndarray:
    """Per-brick 256-entry lookup tables for the packed 8-bit restriction."""
    return gf2._luts_from_gates8(np.ascontiguousarray(bricks))


@njit(cache=True)
def _compose_gates4(singles, s1, s2, with_cnot, cnot):  # pragma: no cover
    """Compiled equivalent of :func:`sample_layer_gates` given the draws."""
    n = s1.shape[0]
    out = np.zeros((n, 4, 4), dtype=np.uint8)
    tmp = np.zeros((4, 4), dtype=np.uint8)
    for g in range(n):
        for i in range(2):
            for j in range(2):
                out[g, i, j] = singles[s1[g, 0], i, j]
                out[g, i + 2, j + 2] = singles[s1[g, 1], i, j]
        if with_cnot[g]:
            for i in range(4):
                for j in range(4):
                    v = np.uint8(0)
                    for k in range(4):
                        v ^= out[g, i, k] & cnot[k, j]
                    tmp[i, j] = v
            for i in range(4):
                for j in range(4):
                    v = np.uint8(0)
                    for k in range(2):
                        if j < 2:
                            v ^= tmp[i, k] & singles[s2[g, 0], k, j]
                        else:
                            v ^= tmp[i, k + 2] & singles[s2[g, 1], k, j - 2]
                    out[g, i, j] = v
    return out


@njit(cache=True)
def _assemble_bricks(u1a, u1b, u2a, u2b, pair_perm, swap_perm):  # pragma: no cover
    """Compiled equivalent of :func:`brick_matrices`."""
    nb = u1a.shape[0]
    out = np.zeros((nb, 8, 8), dtype=np.uint8)
    d1 = np.zeros((8, 8), dtype=np.uint8)
    d2 = np.zeros((8, 8), dtype=np.uint8)
    for b in range(nb):
        for i in range(8):
            pi = pair_perm[i]
            for j in range(8):
                pj = pair_perm[j]
                if pi < 4 and pj < 4:
                    d1[i, j] = u1a[b, pi, pj]
                    d2[i, j] = u2a[b, pi, pj]
                elif pi >= 4 and pj >= 4:
                    d1[i, j] = u1b[b, pi - 4, pj - 4]
                    d2[i, j] = u2b[b, pi - 4, pj - 4]
                else:
                    d1[i, j] = 0
                    d2[i, j] = 0
        for i in range(8):
            for j in range(8):
                v = np.uint8(0)
                for k in range(8):
                    v ^= d1[i, k] & d2[swap_perm[k], j]
                out[b, i, j] = v
    return out


def sample_brick_layer(rng, L: int, cnot_prob: float, symmetric: bool) -> np.ndarray:
    """Draw all gates of one layer and compose them into (nb, 8, 8) bricks."""
    nb = L // 2
    s1, wc, s2 = _draw_layer(rng, L, cnot_prob)
    gates = _compose_gates4(_SINGLES, s1, s2, wc, gf2.CNOT).reshape(nb, 2, 4, 4)
    u1, u2 = gates[:, 0], gates[:, 1]
    if symmetric:
        u1b, u2b = u1, u2
    else:
        s1b, wcb, s2b = _draw_layer(rng, L, cnot_prob)
        gates_b = _compose_gates4(_SINGLES, s1b, s2b, wcb,
                                  gf2.CNOT).reshape(nb, 2, 4, 4)
        u1b, u2b = gates_b[:, 0], gates_b[:, 1]
    return _assemble_bricks(u1, u1b, u2, u2b, _PAIR_PERM, _SWAP_PERM)


def apply_brick_layer(words: np.ndarray, bricks: np.ndarray, starts: np.ndarray,
                      system_cols: int) -> None:
    """Apply one layer of bricks to a packed tableau, in place."""
    if words.shape[0] == 0:
        return
    gf2._apply_window_luts(words, brick_luts(bricks), starts, system_cols)


def apply_brick(state, rng, site_i: int, site_j: int, cnot_prob: float = 0.9,
                symmetric: bool = True) -> None:
    """Generic single-brick application via two-qubit gate calls.

    ``state`` needs only ``apply_two_qubit_gate(gate, q1, q2)``; works for
    both the tracked tableau and the full oracle tableau.
    """
    a_i, b_i = 2 * site_i, 2 * site_i + 1
    a_j, b_j = 2 * site_j, 2 * site_j + 1
    u1, u2 = sample_layer_gates(rng, 2, cnot_prob)
    if symmetric:
        u1b, u2b = u1, u2
    else:
        u1b, u2b = sample_layer_gates(rng, 2, cnot_prob)
    state.apply_two_qubit_gate(u1, a_i, a_j)
    state.apply_two_qubit_gate(u1b, b_i, b_j)
    state.apply_two_qubit_gate(gf2.SWAP, a_i, b_i)
    state.apply_two_qubit_gate(gf2.SWAP, a_j, b_j)
    state.apply_two_qubit_gate(u2, a_i, a_j)
    state.apply_two_qubit_gate(u2b, b_i, b_j)


def default_observables(config: CircuitConfig) -> list[str]:
    names = []
    if config.L % 4 == 0:
        names += ["cond_entropy_quarter", "I3"]
    if config.initial_state is not InitialStateKind.PURE_PRODUCT:
        names.append("coherent_info")
    return names


def run_trajectory(config: CircuitConfig, trajectory_index: int,
                   observable_names=None) -> TrajectoryRecord:
    """Run one seeded trajectory and record observables at snapshot layers."""
    if observable_names is None:
        observable_names = default_observables(config)
    t0 = time.perf_counter()
    rng = trajectory_rng(config.master_seed, trajectory_index)
    t = TrackedTableau.new(config.initial_state, config.n_system)
    system_cols = 2 * config.n_system
    max_rows = 2 * t.n_tracked
    record = TrajectoryRecord(config.to_dict(), trajectory_index)
    snap_layers = set(config.snapshot_layers())
    for layer in range(1, config.T + 1):
        bricks = sample_brick_layer(
            rng, config.L, config.cnot_prob, config.symmetric_bricks
        )
        apply_brick_layer(t.words, bricks, brick_start_cols(config.L, layer),
                          system_cols)
        mask = rng.random(config.L) < config.p
        sites = np.nonzero(mask)[0]
        if sites.size:
            t.transduce_sites(sites)
        if t.n_rows > max_rows:
            raise AssertionError("tracked row count exceeded 2K")
        if layer in snap_layers:
            record.snapshots.append(
                Snapshot(layer, observables.evaluate(t, observable_names,
                                                     config.initial_state))
            )
    record.elapsed = time.perf_counter() - t0
    return record
