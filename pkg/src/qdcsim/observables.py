"""Entropy observables on a tracked tableau.

All entropies are in bits (stabilizer counting S = N - M with log base 2);
every value is an exact integer.  Queries are read-only and reentrant.

Stable observable names used in trajectory records and CSV headers:
``cond_entropy_quarter``, ``I3``, ``coherent_info``, ``profile:<x>``.
"""

from __future__ import annotations

import numpy as np

from . import gf2
from .stabilizer import InitialStateKind, TrackedTableau


def region_sites(sites) -> list[int]:
    """Both qubits of each site, as tracked qubit indices."""
    out: list[int] = []
    for s in sites:
        out.extend((2 * s, 2 * s + 1))
    return out


def quarter_region(L: int, n: int) -> list[int]:
    """Quarter R_n: both qubits of sites in [(n-1)L/4, nL/4)."""
    if L % 4:
        raise ValueError("quarters need L divisible by 4")
    if not 1 <= n <= 4:
        raise ValueError("quarter index must be 1..4")
    lo = (n - 1) * L // 4
    return region_sites(range(lo, lo + L // 4))


def _check_region(t: TrackedTableau, region) -> np.ndarray:
    q = np.asarray(sorted(region), dtype=np.int64)
    if q.size != len(set(int(x) for x in region)):
        raise IndexError("region qubits must be distinct")
    if q.size and (q[0] < 0 or q[-1] >= t.n_tracked):
        raise IndexError("region qubit out of tracked range")
    return q


def _complement_cols(t: TrackedTableau, region_qubits: np.ndarray) -> np.ndarray:
    in_r = np.zeros(t.n_tracked, dtype=bool)
    in_r[region_qubits] = True
    return gf2.qubit_cols(np.nonzero(~in_r)[0])


def joint_entropy_with_apparatus(t: TrackedTableau, region) -> int:
    """S(P; A): entropy of the reduced state on the region plus the whole
    apparatus.  Counts generators fully supported on P u A."""
    q = _check_region(t, region)
    r_out = gf2.rank(t.words, t.n_cols, _complement_cols(t, q))
    supported = t.generator_total() - r_out
    return int(q.size + t.n_apparatus - supported)


def conditional_entropy(t: TrackedTableau, region) -> int:
    """S(P | A) = S(P u A) - S(A); nonnegative by IE symmetry plus
    subadditivity."""
    q = _check_region(t, region)
    r_all = gf2.rank(t.words, t.n_cols)
    r_out = gf2.rank(t.words, t.n_cols, _complement_cols(t, q))
    return int(q.size - r_all + r_out)


def tripartite_I3(t: TrackedTableau) -> int:
    """Conditional tripartite mutual information over quarter regions:
    4*S(R1|A) - 2*S(R1 u R2|A) - S(R1 u R3|A)."""
    L = t.n_system // 2
    r1 = quarter_region(L, 1)
    r2 = quarter_region(L, 2)
    r3 = quarter_region(L, 3)
    return (
        4 * conditional_entropy(t, r1)
        - 2 * conditional_entropy(t, r1 + r2)
        - conditional_entropy(t, r1 + r3)
    )


def coherent_information(t: TrackedTableau, kind: InitialStateKind) -> int:
    """Channel capacity from the initial system state to the final
    system-plus-apparatus.

    Maximally-mixed runs use C = S(S, empty | A); Bell-reference runs use
    C = S(S, empty; A) - S(S, S'; A).  Both are nonnegative integers and
    agree on identically seeded runs.
    """
    system = list(range(t.n_system))
    if kind is InitialStateKind.MAXIMALLY_MIXED:
        if t.n_reference:
            raise ValueError("maximally-mixed path expects no reference qubits")
        return conditional_entropy(t, system)
    if kind is InitialStateKind.BELL_REFERENCE:
        if t.n_reference != t.n_system:
            raise ValueError("bell-reference path expects reference qubits")
        all_tracked = list(range(t.n_tracked))
        return joint_entropy_with_apparatus(t, system) - joint_entropy_with_apparatus(
            t, all_tracked
        )
    raise ValueError("coherent information is undefined for pure-product runs")


def entropy_profile(t: TrackedTableau, xs) -> list[tuple[int, int]]:
    """S(P_x | A) for contiguous prefixes of x sites (anchored at site 0)."""
    L = t.n_system // 2
    out = []
    for x in xs:
        if not 0 <= x <= L:
            raise IndexError(f"profile cut x={x} out of range")
        out.append((int(x), conditional_entropy(t, region_sites(range(x)))))
    return out


def evaluate(t: TrackedTableau, names, kind: InitialStateKind) -> dict[str, int]:
    """Evaluate named observables on one snapshot."""
    L = t.n_system // 2
    values: dict[str, int] = {}
    for name in names:
        if name == "cond_entropy_quarter":
            values[name] = conditional_entropy(t, region_sites(range(L // 4)))
        elif name == "I3":
            values[name] = tripartite_I3(t)
        elif name == "coherent_info":
            values[name] = coherent_information(t, kind)
        elif name.startswith("profile:"):
            x = int(name.split(":", 1)[1])
            values[name] = entropy_profile(t, [x])[0][1]
        else:
            raise ValueError(f"unknown observable {name!r}")
    return values
