"""Exact event-skeleton Monte Carlo for MAPs with jump-diffusion components.

Paths are built event by event: phase switches at rate q_{i,-i}, compound
Poisson component jumps, exponential killing, and Brownian increments that
are exact Gaussians on whatever knot set is requested.  Between knots with
no Gaussian part, xi is exactly linear, which downstream clock integrals
exploit.

Randomness comes from counter-based Philox streams keyed by
(seed, path_index), so estimates are reproducible and independent of how
paths are partitioned across workers.  Within a path the draw order is
fixed: switch, jump and kill exponentials (each only if its rate is
positive), then the Gaussian increments of the stretch in time order, then
the event's jump size.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .core import (
    MapSpec,
    dual_spec,
    perron_pair,
    phase_index,
    stationary_distribution,
)
from .errors import AnalyticOnlyComponent
from .parallel import map_chunks

_INF = math.inf
_MASK64 = (1 << 64) - 1
_CHUNK_LEN = 16.0  # internal knot spacing for event-free stretches


def path_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for one path: Philox keyed by (seed, index)."""
    return np.random.Generator(
        np.random.Philox(key=np.array([seed & _MASK64, index & _MASK64], dtype=np.uint64))
    )


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo budget: horizon, Gaussian sub-grid step, seed, path count."""

    horizon: float
    gaussian_substep: float = 1e-3
    seed: int = 0
    n_paths: int = 1
    workers: int = 1

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.gaussian_substep <= 0 or self.gaussian_substep > self.horizon:
            raise ValueError("need 0 < gaussian_substep <= horizon")
        if self.n_paths <= 0:
            raise ValueError("n_paths must be positive")


class Segment(NamedTuple):
    """One continuous stretch of xi, plus the state after the event at its
    right end.

    ``x0`` is the value at the left knot, ``x1`` the continuous value at the
    right knot before the event tagged by ``kind``: 'grid' (sub-grid /
    breakpoint / chunk knot), 'switch', 'jump', or 'kill'.  ``x_after`` and
    ``phase_after`` give the càdlàg state at s1 (meaningless for 'kill',
    where the process is sent to the cemetery).  ``linear`` marks stretches
    where xi is exactly linear (no Gaussian part).
    """

    s0: float
    s1: float
    x0: float
    x1: float
    phase: int
    linear: bool
    kind: str
    x_after: float
    phase_after: int


def _require_simulatable(spec: MapSpec):
    for i in (1, -1):
        if spec.component(i).analytic_only:
            raise AnalyticOnlyComponent(
                f"phase {i:+d} component has no sampleable decomposition"
            )


def iterate_segments(spec, rng, *, breakpoints=(), substep=None, start_phase=1, start_x=0.0):
    """Yield Segments of one path forever (or until killing).

    ``breakpoints`` (sorted, increasing) become exact knots; after the last
    one, knots continue at a fixed internal spacing so consumers always get
    regular control points.  ``substep`` additionally bounds the knot
    spacing wherever the active component has a Gaussian part.
    """
    _require_simulatable(spec)
    t = 0.0
    x = float(start_x)
    phase = start_phase
    bps = [float(b) for b in breakpoints]
    bp_ix = 0
    next_chunk = _CHUNK_LEN

    while True:
        comp = spec.component(phase)
        q = spec.rates.rate_from(phase)
        lam = comp.jump_rate
        kill = comp.killing_rate

        t_switch = t + rng.exponential(1.0 / q) if q > 0 else _INF
        t_jump = t + rng.exponential(1.0 / lam) if lam > 0 else _INF
        t_kill = t + rng.exponential(1.0 / kill) if kill > 0 else _INF
        t_event = min(t_switch, t_jump, t_kill)

        while bp_ix < len(bps) and bps[bp_ix] <= t:
            bp_ix += 1
        next_bp = bps[bp_ix] if bp_ix < len(bps) else _INF
        while next_chunk <= t:
            next_chunk += _CHUNK_LEN
        t_stop = min(t_event, next_bp, next_chunk)

        if t_event <= min(next_bp, next_chunk):
            kind = "switch" if t_event == t_switch else ("jump" if t_event == t_jump else "kill")
        else:
            kind = "grid"

        sigma2 = comp.gaussian_variance
        drift = comp.drift
        sub_knots = [t_stop]
        if sigma2 > 0.0 and substep is not None:
            span = t_stop - t
            n_sub = max(1, int(math.ceil(span / substep - 1e-12)))
            sub_knots = [t + span * (j + 1) / n_sub for j in range(n_sub - 1)] + [t_stop]

        for j, s1 in enumerate(sub_knots):
            last = j == len(sub_knots) - 1
            delta = s1 - t
            if sigma2 > 0.0:
                x1 = x + drift * delta + rng.normal(0.0, math.sqrt(sigma2 * delta))
                lin = False
            else:
                x1 = x + drift * delta
                lin = True
            if last and kind == "jump":
                u = comp.jump_law.sample(rng)
                x_after, phase_after = x1 + u, phase
            elif last and kind == "switch":
                u = spec.transitional(phase).sample(rng)
                x_after, phase_after = x1 + u, -phase
            else:
                x_after, phase_after = x1, phase
            yield Segment(
                t, s1, x, x1, phase, lin, kind if last else "grid", x_after, phase_after
            )
            t, x = s1, x_after if last else x1

        if kind == "kill":
            return
        phase = phase_after


@dataclass
class MapPath:
    """Event skeleton of one (xi, J) path.

    Knot arrays are càdlàg: ``xi[k]`` holds the value at ``t[k]`` after any
    event there, ``xi_left[k]`` the continuous limit from the left.  The
    phase on [t[k], t[k+1]) is ``phase[k]``; ``linear[k]`` says xi is exactly
    linear on that interval.  A killed path ends with kind 'kill' at
    ``killed_at``; the post-kill state (-infinity) is represented only by
    this marker, never numerically.
    """

    t: np.ndarray
    xi: np.ndarray
    xi_left: np.ndarray
    phase: np.ndarray
    linear: np.ndarray
    kind: list
    killed_at: Optional[float]
    horizon: float
    seed: int = 0
    path_index: int = 0

    @property
    def killed(self) -> bool:
        return self.killed_at is not None

    def state_at(self, s: float):
        """(xi(s), J(s)) for 0 <= s <= horizon, or None once killed.

        Exact at knots and on linear segments; inside a Gaussian
        sub-segment the linear interpolant is returned (the package's
        working definition of the realized path between its knots).
        """
        if self.killed_at is not None and s >= self.killed_at:
            return None
        if s <= self.t[0]:
            return float(self.xi[0]), int(self.phase[0])
        k = int(np.searchsorted(self.t, s, side="right") - 1)
        if k >= len(self.t) - 1:
            return float(self.xi[-1]), int(self.phase[-1])
        if self.t[k] == s:
            return float(self.xi[k]), int(self.phase[k])
        w = (s - self.t[k]) / (self.t[k + 1] - self.t[k])
        val = self.xi[k] + w * (self.xi_left[k + 1] - self.xi[k])
        return float(val), int(self.phase[k])

    def rows(self):
        """(time, phase, xi) triples for CSV export."""
        for k in range(len(self.t)):
            yield (float(self.t[k]), int(self.phase[k]), float(self.xi[k]))


def simulate_map(
    spec: MapSpec,
    cfg: SimConfig,
    start=(0.0, 1),
    marker_times=(),
    path_index: int = 0,
) -> MapPath:
    """Simulate one path up to cfg.horizon, exact in law at every knot.

    Identical (spec, cfg, start, path_index) reproduce the path bit for
    bit.  ``marker_times`` become exact knots (useful for evaluating
    functionals at fixed times without interpolation error).
    """
    x0, i0 = start
    rng = path_rng(cfg.seed, path_index)
    bps = sorted({float(m) for m in marker_times if 0.0 < m <= cfg.horizon} | {cfg.horizon})

    ts = [0.0]
    xs = [float(x0)]
    xs_left = [float(x0)]
    phases = [i0]
    linear = []
    kinds = ["start"]
    killed_at = None

    for seg in iterate_segments(
        spec, rng, breakpoints=bps, substep=cfg.gaussian_substep, start_phase=i0, start_x=x0
    ):
        ts.append(seg.s1)
        xs_left.append(seg.x1)
        linear.append(seg.linear)
        if seg.kind == "kill":
            kinds.append("kill")
            xs.append(seg.x1)
            phases.append(seg.phase)
            killed_at = seg.s1
            break
        xs.append(seg.x_after)
        phases.append(seg.phase_after)
        if seg.s1 >= cfg.horizon:
            kinds.append("horizon")
            break
        kinds.append(seg.kind)

    return MapPath(
        t=np.array(ts),
        xi=np.array(xs),
        xi_left=np.array(xs_left),
        phase=np.array(phases, dtype=np.int8),
        linear=np.array(linear, dtype=bool),
        kind=kinds,
        killed_at=killed_at,
        horizon=cfg.horizon,
        seed=cfg.seed,
        path_index=path_index,
    )


class _PathWalker:
    """Incremental càdlàg state of one path at nondecreasing query times."""

    def __init__(self, spec, rng, query_times, substep=None, start_phase=1, start_x=0.0):
        self._gen = iterate_segments(
            spec,
            rng,
            breakpoints=sorted(query_times),
            substep=substep,
            start_phase=start_phase,
            start_x=start_x,
        )
        self.t = 0.0
        self.x = float(start_x)
        self.phase = start_phase
        self.killed = False

    def advance_to(self, s: float):
        """State (xi(s), J(s)) at a query time, or None if killed by then."""
        while not self.killed and self.t < s:
            seg = next(self._gen)
            self.t = seg.s1
            if seg.kind == "kill":
                self.killed = True
                break
            self.x = seg.x_after
            self.phase = seg.phase_after
        if self.killed and self.t <= s:
            return None
        return self.x, self.phase


@dataclass(frozen=True)
class MatrixMoments:
    """Entrywise Monte Carlo estimates of (e^{F(z)t})_{ij} with errors."""

    estimate: np.ndarray
    std_error: np.ndarray
    z: float
    t: float
    n: int


def _emexp_chunk(args, lo, hi):
    spec, z, t, seed = args
    sums = np.zeros((2, 2))
    sums2 = np.zeros((2, 2))
    for p in range(lo, hi):
        for i in (1, -1):
            rng = path_rng(seed, 2 * p + phase_index(i))
            st = _PathWalker(spec, rng, [t], start_phase=i).advance_to(t)
            if st is None:
                continue
            x, j = st
            val = math.exp(z * x)
            r, c = phase_index(i), phase_index(j)
            sums[r, c] += val
            sums2[r, c] += val * val
    return sums, sums2


def empirical_matrix_exponent(spec: MapSpec, z: float, t: float, cfg: SimConfig) -> MatrixMoments:
    """Estimate E_{0,i}[e^{z xi(t)}; J(t)=j, t < k] from n_paths per phase.

    At z = 0 this is the (sub-)transition matrix of J; killed paths
    contribute 0 to every entry.
    """
    spec.check_domain(z)
    if t == 0.0:
        return MatrixMoments(np.eye(2), np.zeros((2, 2)), z, t, cfg.n_paths)
    parts = map_chunks(_emexp_chunk, cfg.n_paths, cfg.workers, args=(spec, z, t, cfg.seed))
    sums = sum(p[0] for p in parts)
    sums2 = sum(p[1] for p in parts)
    n = cfg.n_paths
    mean = sums / n
    var = np.maximum(sums2 / n - mean**2, 0.0)
    return MatrixMoments(mean, np.sqrt(var / n), z, t, n)


@dataclass(frozen=True)
class WaldEstimate:
    t: float
    estimate: float
    std_error: float
    n: int


def _wald_chunk(args, lo, hi):
    spec, gamma, t_list, kappa_g, v, seed = args
    m = len(t_list)
    sums = np.zeros(m)
    sums2 = np.zeros(m)
    for p in range(lo, hi):
        rng = path_rng(seed, p)
        i0 = 1 if (p % 2 == 0) else -1
        w = _PathWalker(spec, rng, t_list, start_phase=i0)
        v0 = v[phase_index(i0)]
        for k, t in enumerate(t_list):
            st = w.advance_to(t)
            if st is None:
                continue  # killed paths contribute 0
            x, j = st
            val = math.exp(gamma * x - kappa_g * t) * v[phase_index(j)] / v0
            sums[k] += val
            sums2[k] += val * val
    return sums, sums2


def wald_martingale_check(spec: MapSpec, gamma: float, t_list, cfg: SimConfig):
    """Sample means of M(t, gamma) = e^{gamma xi(t) - kappa(gamma) t}
    v_{J(t)}(gamma)/v_{J(0)}(gamma); the martingale property makes each
    mean 1, so the estimates should sit within Monte Carlo error of 1."""
    t_list = sorted(float(t) for t in t_list)
    if gamma == 0.0:
        return [WaldEstimate(t, 1.0, 0.0, cfg.n_paths) for t in t_list]
    pp = perron_pair(spec, gamma)
    parts = map_chunks(
        _wald_chunk,
        cfg.n_paths,
        cfg.workers,
        args=(spec, gamma, tuple(t_list), pp.kappa, pp.v, cfg.seed),
    )
    sums = sum(p[0] for p in parts)
    sums2 = sum(p[1] for p in parts)
    n = cfg.n_paths
    mean = sums / n
    var = np.maximum(sums2 / n - mean**2, 0.0)
    se = np.sqrt(var / n)
    return [WaldEstimate(t, float(mean[k]), float(se[k]), n) for k, t in enumerate(t_list)]


@dataclass(frozen=True)
class ReversalPoint:
    s: float
    ks_statistic: float
    p_value: float
    mean_diff: float
    mean_diff_se: float


@dataclass(frozen=True)
class TimeReversalReport:
    t: float
    points: list
    n: int


def _reversal_chunk(args, lo, hi):
    spec, t, s_grid, seed, dual_side = args
    use = dual_spec(spec) if dual_side else spec
    pi = stationary_distribution(spec.rates)
    out = np.empty((hi - lo, len(s_grid)))
    for p in range(lo, hi):
        rng = path_rng(seed, (2 * p + 1) if dual_side else (2 * p))
        i0 = 1 if rng.random() < pi[0] else -1
        if dual_side:
            w = _PathWalker(use, rng, s_grid, start_phase=i0)
            for k, s in enumerate(s_grid):
                out[p - lo, k] = w.advance_to(s)[0]
        else:
            times = sorted({t} | {t - s for s in s_grid})
            w = _PathWalker(use, rng, times, start_phase=i0)
            vals = {q: w.advance_to(q)[0] for q in times}
            for k, s in enumerate(s_grid):
                out[p - lo, k] = vals[t - s] - vals[t]
    return out


def time_reversal_check(spec: MapSpec, t: float, cfg: SimConfig, s_grid=None) -> TimeReversalReport:
    """Compare the law of xi(t-s) - xi(t) under the spec, started from
    (0, pi), with xi(s) under the dual spec, via per-gridpoint two-sample
    Kolmogorov-Smirnov statistics and mean differences."""
    from scipy.stats import ks_2samp

    if not spec.unkilled:
        raise ValueError("time reversal check requires an unkilled spec")
    if s_grid is None:
        s_grid = [0.0, 0.25 * t, 0.5 * t, 0.75 * t, t]
    s_grid = [float(s) for s in s_grid]
    orig = np.vstack(
        map_chunks(_reversal_chunk, cfg.n_paths, cfg.workers, args=(spec, t, tuple(s_grid), cfg.seed, False))
    )
    dual = np.vstack(
        map_chunks(_reversal_chunk, cfg.n_paths, cfg.workers, args=(spec, t, tuple(s_grid), cfg.seed, True))
    )
    points = []
    for k, s in enumerate(s_grid):
        a, b = orig[:, k], dual[:, k]
        if np.ptp(a) == 0.0 and np.ptp(b) == 0.0 and a[0] == b[0]:
            points.append(ReversalPoint(s, 0.0, 1.0, 0.0, 0.0))
            continue
        ks = ks_2samp(a, b)
        se = math.sqrt(a.var(ddof=1) / len(a) + b.var(ddof=1) / len(b))
        points.append(
            ReversalPoint(s, float(ks.statistic), float(ks.pvalue), float(a.mean() - b.mean()), se)
        )
    return TimeReversalReport(t, points, cfg.n_paths)
