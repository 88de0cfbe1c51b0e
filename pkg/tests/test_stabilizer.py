"""Tracked-tableau tests: construction, gates, and the transduction channel."""

import numpy as np
import pytest

from qdcsim import gf2, observables
from qdcsim.circuit import CircuitConfig, apply_brick_layer, brick_start_cols, \
    sample_brick_layer, trajectory_rng
from qdcsim.stabilizer import InitialStateKind, TrackedTableau


def make_tableau(bits, n_system, n_reference=0):
    t = TrackedTableau.new(InitialStateKind.MAXIMALLY_MIXED, n_system)
    t.n_reference = n_reference
    t.words = gf2.from_bits(np.asarray(bits, dtype=np.uint8))
    return t


def scrambled_state(L=8, layers=12, seed=3, kind=InitialStateKind.PURE_PRODUCT):
    """A generic mid-circuit state (no transductions) for equivalence tests."""
    config = CircuitConfig(L=L, p=0.0, T=layers, master_seed=seed,
                           initial_state=kind)
    rng = trajectory_rng(seed, 0)
    t = TrackedTableau.new(kind, config.n_system)
    for layer in range(1, layers + 1):
        bricks = sample_brick_layer(rng, L, 0.9, True)
        apply_brick_layer(t.words, bricks, brick_start_cols(L, layer),
                          2 * config.n_system)
        rng.random(L)
    return t


# --- construction -------------------------------------------------------------

def test_new_pure_product():
    t = TrackedTableau.new(InitialStateKind.PURE_PRODUCT, 4)
    assert (t.n_tracked, t.n_rows, t.ignored_count) == (4, 4, 0)
    assert observables.conditional_entropy(t, [0, 1, 2, 3]) == 0


def test_new_maximally_mixed():
    t = TrackedTableau.new(InitialStateKind.MAXIMALLY_MIXED, 4)
    assert (t.n_rows, t.n_reference) == (0, 0)
    assert observables.conditional_entropy(t, [0, 1, 2, 3]) == 4


def test_new_bell_reference():
    t = TrackedTableau.new(InitialStateKind.BELL_REFERENCE, 4)
    assert (t.n_tracked, t.n_rows) == (8, 8)
    # whole tracked state is pure, system half is maximally mixed
    assert observables.conditional_entropy(t, list(range(8))) == 0
    assert observables.conditional_entropy(t, [0, 1, 2, 3]) == 4


@pytest.mark.parametrize("n", [0, -2, 3])
def test_new_invalid_n_system(n):
    with pytest.raises(ValueError):
        TrackedTableau.new(InitialStateKind.PURE_PRODUCT, n)


# --- gates ----------------------------------------------------------------------

def test_gate_rejects_reference_and_repeated_qubits():
    t = TrackedTableau.new(InitialStateKind.BELL_REFERENCE, 4)
    with pytest.raises(IndexError):
        t.apply_two_qubit_gate(gf2.CNOT, 0, 4)  # 4 is a reference qubit
    with pytest.raises(IndexError):
        t.apply_two_qubit_gate(gf2.CNOT, 1, 1)


def test_gate_moves_support():
    t = TrackedTableau.new(InitialStateKind.PURE_PRODUCT, 4)
    t.apply_two_qubit_gate(gf2.SWAP, 0, 3)
    bits = t.rows_as_bits()
    assert bits[0].tolist() == [0, 0, 0, 0, 0, 0, 0, 1]
    assert bits[3].tolist() == [0, 1, 0, 0, 0, 0, 0, 0]


# --- transduce_site hand traces --------------------------------------------------

def test_transduce_product_site():
    t = TrackedTableau.new(InitialStateKind.PURE_PRODUCT, 2)
    t.transduce_site(0)
    t.compact()
    assert t.dump() == (
        "K=2 M=3 ignored=1 apparatus=1 environment=1\n0100\n0001"
    )
    assert observables.joint_entropy_with_apparatus(t, [0, 1]) == 0
    assert observables.joint_entropy_with_apparatus(t, []) == 0


def test_transduce_bell_site():
    # a and b of one site in a Bell pair: X_a X_b, Z_a Z_b
    t = make_tableau([[1, 0, 1, 0], [0, 1, 0, 1]], n_system=2)
    t.transduce_site(0)
    t.compact()
    assert sorted(r.tolist() for r in t.rows_as_bits()) == [
        [0, 0, 0, 1], [0, 1, 0, 0]]
    assert t.ignored_count == 0
    assert t.generator_total() == 2
    assert (t.n_apparatus, t.n_environment) == (1, 1)
    assert observables.joint_entropy_with_apparatus(t, []) == 1  # S(A) = 1
    assert observables.conditional_entropy(t, [0, 1]) == 0


def test_transduce_twice_same_site():
    t = make_tableau([[1, 0, 1, 0], [0, 1, 0, 1]], n_system=2)
    t.transduce_site(0)
    t.compact()
    s_a = observables.joint_entropy_with_apparatus(t, [])
    s_sys = observables.conditional_entropy(t, [0, 1])
    t.transduce_site(0)
    t.compact()
    assert (t.n_apparatus, t.n_environment) == (2, 2)
    assert t.ignored_count == 1
    assert t.generator_total() == 3
    # the second event adds one bit to S(A) but conditional entropies hold
    assert observables.conditional_entropy(t, [0, 1]) == s_sys
    assert observables.joint_entropy_with_apparatus(t, []) == s_a


def test_transduce_site_out_of_range():
    t = TrackedTableau.new(InitialStateKind.PURE_PRODUCT, 4)
    with pytest.raises(IndexError):
        t.transduce_site(2)
    with pytest.raises(IndexError):
        t.transduce_site(-1)


# --- batched channel ---------------------------------------------------------------

@pytest.mark.parametrize("kind", list(InitialStateKind))
@pytest.mark.parametrize("sites", [[0], [3], [0, 1], [1, 5, 6], list(range(8))])
def test_transduce_sites_matches_sequential(kind, sites):
    t1 = scrambled_state(kind=kind)
    t2 = scrambled_state(kind=kind)
    assert t1.dump() == t2.dump()
    t1.transduce_sites(np.array(sites))
    for s in sites:
        t2.transduce_site(s)
    t2.compact()
    assert t1.dump() == t2.dump()


def test_transduce_sites_empty_is_noop():
    t = scrambled_state()
    before = t.dump()
    t.transduce_sites(np.array([], dtype=np.int64))
    assert t.dump() == before


def test_transduce_sites_rejects_bad_input():
    t = TrackedTableau.new(InitialStateKind.PURE_PRODUCT, 8)
    with pytest.raises(IndexError):
        t.transduce_sites(np.array([0, 0]))
    with pytest.raises(IndexError):
        t.transduce_sites(np.array([4]))
    with pytest.raises(IndexError):
        t.transduce_sites(np.array([-1]))


def test_transduce_sites_keeps_rows_independent():
    t = scrambled_state(L=8)
    rs = np.random.default_rng(0)
    for layer in range(1, 21):
        bricks = sample_brick_layer(rs, 8, 0.9, True)
        apply_brick_layer(t.words, bricks, brick_start_cols(8, layer), 32)
        sites = np.nonzero(rs.random(8) < 0.5)[0]
        if sites.size:
            t.transduce_sites(sites)
        assert t.n_rows <= 2 * t.n_tracked
        assert gf2.rank(t.words, t.n_cols) == t.n_rows


# --- compact ------------------------------------------------------------------------

def test_compact_folds_dependent_rows():
    # two copies of Z_0 span one generator; one folds into the counter
    t = make_tableau([[0, 1, 0, 0], [0, 1, 0, 0]], n_system=2)
    t.compact()
    assert (t.n_rows, t.ignored_count, t.generator_total()) == (1, 1, 2)


def test_compact_idempotent():
    t = scrambled_state()
    t.transduce_sites(np.array([0, 2]))
    t.compact()
    before = t.dump()
    t.compact()
    assert t.dump() == before
