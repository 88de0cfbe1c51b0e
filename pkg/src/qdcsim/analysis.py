"""Ensemble orchestration, persistence, and finite-size-scaling analysis.

Raw trajectories are stored as JSON lines, one record per trajectory
snapshot, terminated by a manifest record; aggregates are CSV with a stable
header.  Output content is deterministic for a given master seed regardless
of worker count (trajectories are seeded individually and written in index
order).
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .circuit import CircuitConfig, default_observables, run_trajectory
from .stabilizer import InitialStateKind

AGGREGATE_COLUMNS = ["L", "p", "layer", "observable", "mean", "stderr", "count"]


@dataclass
class EnsembleSpec:
    """A grid of (L, p) points with a sample budget per point."""

    points: list[tuple[int, float, int]]  # (L, p, samples)
    out: str
    initial_state: InitialStateKind = InitialStateKind.PURE_PRODUCT
    T: int | None = None  # None = 4L per point
    cnot_prob: float = 0.9
    master_seed: int = 0
    record_every: int = 0
    observables: list[str] | None = None
    workers: int = 1

    def __post_init__(self):
        if isinstance(self.initial_state, str):
            self.initial_state = InitialStateKind(self.initial_state)
        for L, p, samples in self.points:
            if samples < 1:
                raise ValueError("samples must be >= 1")
            if L % 2:
                raise ValueError("L must be even")

    def config_for(self, L: int, p: float) -> CircuitConfig:
        return CircuitConfig(
            L=L, p=p, T=self.T, cnot_prob=self.cnot_prob,
            initial_state=self.initial_state, master_seed=self.master_seed,
            record_every=self.record_every,
        )


def _run_one(args) -> list[dict]:
    config, traj, names = args
    record = run_trajectory(config, traj, names)
    rows = []
    for snap in record.snapshots:
        rows.append({
            "kind": "snapshot",
            "L": config.L, "p": config.p, "T": config.T,
            "init": config.initial_state.value,
            "cnot_prob": config.cnot_prob,
            "seed": config.master_seed, "traj": traj,
            "layer": snap.layer, "values": snap.values,
        })
    return rows


def run_ensemble(spec: EnsembleSpec) -> str:
    """Run all trajectories of the spec and write JSON-lines to spec.out."""
    jobs = []
    for L, p, samples in spec.points:
        config = spec.config_for(L, p)
        names = spec.observables or default_observables(config)
        jobs.extend((config, traj, names) for traj in range(samples))
    n_rows = 0
    try:
        with open(spec.out, "w") as fh:
            if spec.workers > 1:
                with ProcessPoolExecutor(max_workers=spec.workers) as pool:
                    results = pool.map(_run_one, jobs, chunksize=16)
                    for rows in results:
                        for row in rows:
                            fh.write(json.dumps(row) + "\n")
                            n_rows += 1
            else:
                for job in jobs:
                    for row in _run_one(job):
                        fh.write(json.dumps(row) + "\n")
                        n_rows += 1
            fh.write(json.dumps({"kind": "manifest", "records": n_rows,
                                 "complete": True}) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write ensemble output to {spec.out}: {exc}") from exc
    return spec.out


@dataclass
class AggregatePoint:
    L: int
    p: float
    layer: int
    observable: str
    mean: float
    stderr: float
    count: int


def read_records(paths) -> list[dict]:
    rows = []
    for path in paths if not isinstance(paths, str) else [paths]:
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    row = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ValueError(f"{path}:{lineno}: malformed row: {exc}")
                if row.get("kind") == "snapshot":
                    rows.append(row)
    return rows


def aggregate(paths) -> list[AggregatePoint]:
    """Group snapshot records by (L, p, layer, observable); mean and
    standard error (sample stddev / sqrt(count); 0 for a single sample)."""
    groups: dict[tuple, list[float]] = {}
    for row in read_records(paths):
        for name, value in row["values"].items():
            key = (row["L"], row["p"], row["layer"], name)
            groups.setdefault(key, []).append(float(value))
    out = []
    for (L, p, layer, name) in sorted(groups):
        vals = np.array(groups[(L, p, layer, name)])
        n = len(vals)
        stderr = float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        out.append(AggregatePoint(L, p, layer, name, float(vals.mean()),
                                  stderr, n))
    return out


def write_aggregate_csv(points: list[AggregatePoint], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(AGGREGATE_COLUMNS)
        for pt in points:
            writer.writerow([pt.L, pt.p, pt.layer, pt.observable,
                             repr(pt.mean), repr(pt.stderr), pt.count])


def read_aggregate_csv(path: str) -> list[AggregatePoint]:
    out = []
    with open(path) as fh:
        for row in csv.DictReader(fh):
            out.append(AggregatePoint(
                int(row["L"]), float(row["p"]), int(row["layer"]),
                row["observable"], float(row["mean"]), float(row["stderr"]),
                int(row["count"]),
            ))
    return out


def _final_layer_series(points, L: int, observable: str, layer=None):
    pts = [pt for pt in points if pt.L == L and pt.observable == observable]
    if layer is None and pts:
        layer = max(pt.layer for pt in pts)
    pts = sorted((pt for pt in pts if pt.layer == layer), key=lambda q: q.p)
    return pts


def estimate_crossing(points, L1: int, L2: int, observable: str = "I3",
                      layer=None) -> float:
    """Root of the linear interpolation of obs(L2) - obs(L1) in p.

    The two sizes are compared on their common p grid; raises if the
    difference does not change sign inside it.
    """
    if L1 >= L2:
        raise ValueError("need L1 < L2")
    a = {pt.p: pt.mean for pt in _final_layer_series(points, L1, observable, layer)}
    b = {pt.p: pt.mean for pt in _final_layer_series(points, L2, observable, layer)}
    ps = sorted(set(a) & set(b))
    if len(ps) < 3:
        raise ValueError("need >= 3 common p points for a crossing estimate")
    d = [b[p] - a[p] for p in ps]
    for i in range(len(ps) - 1):
        if d[i] == 0:
            return float(ps[i])
        if d[i] * d[i + 1] < 0:
            frac = d[i] / (d[i] - d[i + 1])
            return float(ps[i] + frac * (ps[i + 1] - ps[i]))
    if d[-1] == 0:
        return float(ps[-1])
    raise ValueError("no crossing in range")


@dataclass
class CollapseFit:
    p_c: float
    nu: float
    cost: float
    n_points_used: int
    trace: list[tuple[float, float, float]] = field(default_factory=list)
    bootstrap: dict | None = None


def _collapse_cost(series, p_c: float, nu: float) -> tuple[float, int]:
    """Leave-one-size-out piecewise-linear collapse cost.

    Each point is mapped to x = (p - p_c) * L**(1/nu); its master-curve value
    is interpolated through the points of all other sizes, and only points
    whose x lies inside the other sizes' x range contribute.
    """
    xs = [(ps - p_c) * L ** (1.0 / nu) for L, ps, _, _ in series]
    total, used = 0.0, 0
    for i, (L, ps, ys, ss) in enumerate(series):
        ox = np.concatenate([xs[j] for j in range(len(series)) if j != i])
        oy = np.concatenate([series[j][2] for j in range(len(series)) if j != i])
        order = np.argsort(ox)
        ox, oy = ox[order], oy[order]
        sel = (xs[i] >= ox[0]) & (xs[i] <= ox[-1])
        if not np.any(sel):
            continue
        master = np.interp(xs[i][sel], ox, oy)
        sigma = np.where(ss[sel] > 0, ss[sel], 1.0)
        total += float((((ys[sel] - master) / sigma) ** 2).sum())
        used += int(sel.sum())
    return (total, used) if used else (math.inf, 0)


def _prepare_series(points, observable, layer, p_window):
    sizes = sorted({pt.L for pt in points if pt.observable == observable})
    if len(sizes) < 3:
        raise ValueError("collapse fit needs >= 3 system sizes")
    series = []
    for L in sizes:
        pts = [pt for pt in _final_layer_series(points, L, observable, layer)
               if p_window[0] <= pt.p <= p_window[1]]
        if len(pts) < 5:
            raise ValueError(f"collapse fit needs >= 5 p points for L={L} "
                             f"inside the p window")
        series.append((L, np.array([pt.p for pt in pts]),
                       np.array([pt.mean for pt in pts]),
                       np.array([pt.stderr for pt in pts])))
    return series


def fit_collapse(points, p_window: tuple[float, float],
                 nu_window: tuple[float, float], fixed_nu: float | None = None,
                 observable: str = "I3", layer=None, grid: tuple[int, int] = (41, 41),
                 refine: int = 3, bootstrap: int = 0,
                 bootstrap_seed: int = 0) -> CollapseFit:
    """Minimize the collapse cost over (p_c, nu) by grid scan plus iterative
    window shrinking around the incumbent; deterministic."""
    series = _prepare_series(points, observable, layer, p_window)
    if nu_window[0] <= 0:
        raise ValueError("nu window must be positive")

    def scan(pw, nw, n1, n2, best):
        pcs = np.linspace(pw[0], pw[1], n1)
        nus = [fixed_nu] if fixed_nu is not None else np.linspace(nw[0], nw[1], n2)
        for pc in pcs:
            for nu in nus:
                cost, used = _collapse_cost(series, float(pc), float(nu))
                if cost < best[2]:
                    best = (float(pc), float(nu), cost, used)
        return best

    best = (math.nan, math.nan, math.inf, 0)
    best = scan(p_window, nu_window, grid[0], grid[1], best)
    if not math.isfinite(best[2]):
        raise ValueError("insufficient x-overlap between sizes after rescaling "
                         "anywhere in the search windows")
    trace = [best[:3]]
    pw, nw = p_window, nu_window
    for _ in range(refine):
        pspan = (pw[1] - pw[0]) / 5
        nspan = (nw[1] - nw[0]) / 5
        pw = (max(p_window[0], best[0] - pspan), min(p_window[1], best[0] + pspan))
        nw = (max(nu_window[0], best[1] - nspan), min(nu_window[1], best[1] + nspan))
        best = scan(pw, nw, 21, 21, best)
        trace.append(best[:3])

    boot = None
    if bootstrap > 0:
        rng = np.random.default_rng(bootstrap_seed)
        pcs, nus = [], []
        for _ in range(bootstrap):
            noisy = [(L, ps, ys + rng.standard_normal(len(ys)) * ss, ss)
                     for (L, ps, ys, ss) in series]

            def scan_b(pw, nw, n1, n2, best, ser):
                pcs_ = np.linspace(pw[0], pw[1], n1)
                nus_ = ([fixed_nu] if fixed_nu is not None
                        else np.linspace(nw[0], nw[1], n2))
                for pc in pcs_:
                    for nu in nus_:
                        cost, used = _collapse_cost(ser, float(pc), float(nu))
                        if cost < best[2]:
                            best = (float(pc), float(nu), cost, used)
                return best

            b = scan_b(p_window, nu_window, grid[0], grid[1],
                       (math.nan, math.nan, math.inf, 0), noisy)
            pcs.append(b[0])
            nus.append(b[1])
        boot = {
            "p_c_interval": [float(np.percentile(pcs, 2.5)),
                             float(np.percentile(pcs, 97.5))],
            "nu_interval": [float(np.percentile(nus, 2.5)),
                            float(np.percentile(nus, 97.5))],
            "resamples": bootstrap,
        }
    return CollapseFit(best[0], best[1], best[2], best[3], trace, boot)
