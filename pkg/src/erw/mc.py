"""Ensemble simulation, rescaling, and statistical verification.

Ensembles run through the compiled drivers in _kernels; replicate i of a
campaign always uses stream_key(master_seed, i), so results are a pure
function of the master seed.  Accumulation walks the replicates in fixed
blocks in index order, which keeps every reported number independent of
the thread count.  Statistical checks split their replicate budget over
disjoint seed banks and pass only if every bank passes.
"""

from __future__ import annotations

import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import exactdist, theory, walk
from .errors import CapacityError, DomainError
from .lattice import LatticeSpec, WalkType, mean_step
from .rng import bank_seed, stream_keys
from .theory import Regime
from .walk import MEMORY_BOUND, FirstStepMode

BLOCK = 16384
MIN_COV_REPLICATES = 1000
MAX_ENUM_DEPTH = 4
DEFAULT_BANKS = 2
MEAN_SE_MULTIPLE = 4.0
DEFAULT_PAIRS = ((0.5, 1.0), (1.0, 1.0))


def request_threads(threads) -> None:
    """Ask for `threads` compiled-loop threads.

    Honored exactly while the compiled backend has not been imported yet;
    afterwards the count can only be lowered to what the runtime reserved.
    Results never depend on the value, only throughput does.
    """
    if threads is None:
        return
    threads = int(threads)
    if threads < 1:
        raise DomainError(f"thread count must be positive, got {threads!r}")
    if "numba" not in sys.modules:
        os.environ["NUMBA_NUM_THREADS"] = str(threads)
        return
    import numba

    numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))


def _as_grid(grid) -> list:
    out = [float(t) for t in grid]
    if not out:
        raise DomainError("time grid must not be empty")
    for t in out:
        if not 0.0 <= t <= 1.0:
            raise DomainError(f"time grid must lie in [0, 1], got {t!r}")
    if any(b < a for a, b in zip(out, out[1:])):
        raise DomainError(f"time grid must be sorted ascending, got {out!r}")
    return out


def _ensemble_run(spec, p, n, targets, N, master_seed, mode, threads, keys=None):
    """Drive N replicates for 2n steps, recording positions at `targets`."""
    if n < 0:
        raise DomainError(f"horizon must be nonnegative, got {n!r}")
    if N < 1:
        raise DomainError(f"replicate count must be positive, got {N!r}")
    if not 0.0 < p <= 1.0:
        raise DomainError(f"memory parameter must lie in (0, 1], got {p!r}")
    targets = np.asarray(targets, dtype=np.int64)
    steps = 2 * n
    if targets.size and (targets[0] < 0 or targets[-1] > steps):
        raise DomainError(
            f"step targets must lie in [0, {steps}], got {targets.tolist()!r}"
        )
    d = spec.dimension
    footprint = N * (targets.size * d + spec.m + spec.m_prime) * 8
    if footprint > MEMORY_BOUND:
        raise CapacityError(
            f"ensemble of {N} replicates x {targets.size} grid points needs "
            f"about {footprint} bytes, over the {MEMORY_BOUND} byte bound"
        )
    request_threads(threads)
    from . import _kernels

    if keys is None:
        keys = stream_keys(master_seed, N)
    else:
        keys = np.ascontiguousarray(keys, dtype=np.uint64)
        if keys.shape != (N,):
            raise DomainError(f"need exactly {N} stream keys, got {keys.shape!r}")
    uniform_first = mode is FirstStepMode.UNIFORM
    uvec = np.array(spec.u.vectors, dtype=np.float64)
    pos = np.empty((N, targets.size, d), dtype=np.float64)
    if spec.walk_type is WalkType.TYPE1:
        counts = np.empty((N, spec.m), dtype=np.int64)
        _kernels.run_type1(
            keys, uvec, float(p), spec.i0, uniform_first, steps, targets, pos, counts
        )
    else:
        wvec = np.array(spec.w.vectors, dtype=np.float64)
        counts = np.empty((N, spec.m + spec.m_prime), dtype=np.int64)
        _kernels.run_type2(
            keys, uvec, wvec, float(p), spec.i0, spec.j0, uniform_first, steps,
            targets, pos, counts,
        )
    return pos, counts


def _grid_targets(n: int, grid) -> np.ndarray:
    # same floor arithmetic as walk.positions_at, so rows match bitwise
    return np.asarray([int(2 * n * t) for t in grid], dtype=np.int64)


def ensemble_positions(
    spec: LatticeSpec,
    p: float,
    n: int,
    grid,
    N: int,
    master_seed: int,
    mode: FirstStepMode = FirstStepMode.DETERMINISTIC,
    threads=None,
    step_targets=None,
    keys=None,
) -> np.ndarray:
    """Positions S_floor(2nt) for each replicate as an (N, len(grid), d) array.

    `step_targets` overrides the floor map with explicit step indices (the
    critical-regime checks need S at 2 n^t, which a fraction grid cannot
    address exactly)."""
    if step_targets is None:
        targets = _grid_targets(n, _as_grid(grid))
    else:
        targets = np.asarray([int(t) for t in step_targets], dtype=np.int64)
        if any(b < a for a, b in zip(targets, targets[1:])):
            raise DomainError("step targets must be sorted ascending")
    pos, _ = _ensemble_run(spec, p, n, targets, N, master_seed, mode, threads, keys)
    return pos


def ensemble_final_counts(
    spec: LatticeSpec,
    p: float,
    n: int,
    N: int,
    master_seed: int,
    mode: FirstStepMode = FirstStepMode.DETERMINISTIC,
    threads=None,
) -> np.ndarray:
    """Final direction counts per replicate, U family then W family."""
    _, counts = _ensemble_run(
        spec, p, n, np.empty(0, np.int64), N, master_seed, mode, threads
    )
    return counts


class EnsembleStats:
    """Streaming moments of per-replicate position rows on a time grid.

    Keeps the joint first moment, centered second moment, and raw second
    moment of the flattened (grid x dimension) sample vector.  Merging two
    accumulators yields the statistics of the concatenated sample, so
    ensembles accumulate in replicate order blocks and seed banks pool
    exactly.
    """

    __slots__ = ("grid", "dim", "count", "_mean", "_m2", "_raw")

    def __init__(self, grid, dim: int):
        self.grid = tuple(float(t) for t in grid)
        self.dim = int(dim)
        k = len(self.grid) * self.dim
        self.count = 0
        self._mean = np.zeros(k)
        self._m2 = np.zeros((k, k))
        self._raw = np.zeros((k, k))

    def _flat(self, x) -> np.ndarray:
        v = np.asarray(x, dtype=np.float64).reshape(-1)
        if v.size != self._mean.size:
            raise DomainError(
                f"sample has {v.size} entries, accumulator expects {self._mean.size}"
            )
        return v

    def update(self, x) -> None:
        v = self._flat(x)
        self.count += 1
        delta = v - self._mean
        self._mean += delta / self.count
        self._m2 += np.outer(delta, v - self._mean)
        self._raw += np.outer(v, v)

    def update_block(self, xs) -> None:
        X = np.asarray(xs, dtype=np.float64).reshape(len(xs), -1)
        if X.shape[0] == 0:
            return
        if X.shape[1] != self._mean.size:
            raise DomainError(
                f"block rows have {X.shape[1]} entries, accumulator expects "
                f"{self._mean.size}"
            )
        bm = X.mean(axis=0)
        centered = X - bm
        self._absorb(X.shape[0], bm, centered.T @ centered, X.T @ X)

    def merge(self, other: "EnsembleStats") -> "EnsembleStats":
        if self.grid != other.grid or self.dim != other.dim:
            raise DomainError("cannot merge accumulators over different grids")
        out = EnsembleStats(self.grid, self.dim)
        out.count = self.count
        out._mean = self._mean.copy()
        out._m2 = self._m2.copy()
        out._raw = self._raw.copy()
        out._absorb(other.count, other._mean, other._m2, other._raw)
        return out

    def _absorb(self, nb: int, mean_b, m2_b, raw_b) -> None:
        if nb == 0:
            return
        na = self.count
        total = na + nb
        delta = mean_b - self._mean
        self._mean = self._mean + delta * (nb / total)
        self._m2 = self._m2 + m2_b + np.outer(delta, delta) * (na * nb / total)
        self._raw = self._raw + raw_b
        self.count = total

    def _block(self, gi: int) -> slice:
        if not 0 <= gi < len(self.grid):
            raise DomainError(f"grid index {gi!r} out of range")
        return slice(gi * self.dim, (gi + 1) * self.dim)

    def mean_at(self, gi: int) -> np.ndarray:
        return self._mean[self._block(gi)].copy()

    def covariance(self, gi: int, gj=None, ddof: int = 1) -> np.ndarray:
        """Sample covariance block between grid points gi and gj."""
        if self.count <= ddof:
            raise DomainError(
                f"covariance needs more than {ddof} replicates, have {self.count}"
            )
        gj = gi if gj is None else gj
        return self._m2[self._block(gi), self._block(gj)] / (self.count - ddof)

    def cross_moment(self, gi: int, gj: int) -> np.ndarray:
        """Raw (uncentered) moment E[x_gi x_gj^T]."""
        if self.count == 0:
            raise DomainError("no replicates accumulated")
        return self._raw[self._block(gi), self._block(gj)] / self.count

    def standard_error(self, gi: int) -> np.ndarray:
        return np.sqrt(np.diag(self.covariance(gi)) / self.count)


def _stats_from(samples: np.ndarray, grid) -> EnsembleStats:
    stats = EnsembleStats(grid, samples.shape[-1])
    for lo in range(0, samples.shape[0], BLOCK):
        stats.update_block(samples[lo : lo + BLOCK])
    return stats


def run_ensemble(
    spec: LatticeSpec,
    p: float,
    n: int,
    grid,
    N: int,
    master_seed: int,
    mode: FirstStepMode = FirstStepMode.DETERMINISTIC,
    threads=None,
) -> EnsembleStats:
    """Accumulated raw-position statistics of an N-replicate ensemble."""
    if N < 2:
        raise DomainError(f"an ensemble needs at least 2 replicates, got {N!r}")
    grid = _as_grid(grid)
    pos = ensemble_positions(spec, p, n, grid, N, master_seed, mode, threads)
    return _stats_from(pos, grid)


def rescale_diffusive(positions, spec, p, n, grid) -> np.ndarray:
    """(S_floor(2nt) - n t (mean U + mean W)) / sqrt(n), per grid point."""
    report = theory.classify_regime(spec, p)
    if report.regime is not Regime.DIFFUSIVE:
        raise DomainError(
            f"diffusive rescaling needs the diffusive regime, got {report.regime.value}"
        )
    grid = _as_grid(grid)
    pos = np.asarray(positions, dtype=np.float64)
    drift = mean_step(spec.u) + mean_step(spec.w)
    out = np.empty_like(pos)
    root = math.sqrt(n)
    for gi, t in enumerate(grid):
        out[:, gi, :] = (pos[:, gi, :] - n * t * drift) / root
    return out


def rescale_critical(positions, spec, p, n, exponents, eps: float = 0.0) -> np.ndarray:
    """(S_floor(2 n^t) - n^t (mean U + mean W)) / (n^(t/2) sqrt(log n)).

    The grid is exponential: entry t addresses step index 2 n^t, matching
    the critical statement, not 2nt."""
    report = theory.classify_regime(spec, p, eps=eps)
    if report.regime not in (Regime.CRITICAL, Regime.CRITICAL_MIXED):
        raise DomainError(
            f"critical rescaling needs a critical regime, got {report.regime.value}"
        )
    if n < 3:
        raise DomainError(f"critical rescaling needs n >= 3, got {n!r}")
    exponents = _as_grid(exponents)
    pos = np.asarray(positions, dtype=np.float64)
    drift = mean_step(spec.u) + mean_step(spec.w)
    root_log = math.sqrt(math.log(n))
    out = np.empty_like(pos)
    for gi, t in enumerate(exponents):
        horizon = float(n) ** t
        out[:, gi, :] = (pos[:, gi, :] - horizon * drift) / (
            horizon ** 0.5 * root_log
        )
    return out


def critical_step_targets(n: int, exponents) -> np.ndarray:
    if n < 3:
        raise DomainError(f"critical grids need n >= 3, got {n!r}")
    return np.asarray([int(2 * float(n) ** t) for t in _as_grid(exponents)], np.int64)


def rescale_super(positions, spec, p, n) -> np.ndarray:
    """Per-replicate limit estimates at the superdiffusive scale.

    Type 2: (S_2n - n (mean U + mean W)) / n^a over n double steps; type 1
    normalizes by the full step count, (S_N - N mean U) / N^a with N = 2n.
    Accepts p = 1 with exponent 1 (the fixed-direction walk).
    """
    if p == 1.0:
        a = 1.0
    else:
        report = theory.classify_regime(spec, p)
        if report.dominant_exponent is None:
            raise DomainError(
                "superdiffusive rescaling needs a superdiffusive regime, got "
                f"{report.regime.value}"
            )
        a = report.dominant_exponent
    pos = np.asarray(positions, dtype=np.float64)
    if spec.walk_type is WalkType.TYPE1:
        steps = 2 * n
        return (pos - steps * mean_step(spec.u)) / float(steps) ** a
    return (pos - n * (mean_step(spec.u) + mean_step(spec.w))) / float(n) ** a


def _jsonable(x):
    # bool before int: Python bool subclasses int
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


@dataclass(frozen=True)
class VerifyReport:
    check: str
    params: dict
    target: object
    estimate: object
    tolerance: object
    z_scores: object
    rel_error: object
    passed: bool
    seeds: tuple
    banks: tuple = ()
    notes: tuple = ()

    def to_json_dict(self) -> dict:
        return {
            "check": self.check,
            "params": _jsonable(self.params),
            "target": _jsonable(self.target),
            "estimate": _jsonable(self.estimate),
            "tolerance": _jsonable(self.tolerance),
            "z_scores": _jsonable(self.z_scores),
            "rel_error": _jsonable(self.rel_error),
            "pass": bool(self.passed),
            "seeds": [int(s) for s in self.seeds],
            "banks": _jsonable(list(self.banks)),
            "notes": list(self.notes),
            "wall_time_s": None,
        }

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        bits = [f"{verdict} {self.check}"]
        for key in ("preset", "p", "n", "N"):
            if key in self.params:
                bits.append(f"{key}={self.params[key]}")
        if self.z_scores is not None:
            flat = np.asarray(self.z_scores, dtype=float).reshape(-1)
            if flat.size:
                bits.append(f"max|z|={np.max(np.abs(flat)):.3g}")
        if self.rel_error is not None:
            vals = self.rel_error
            if isinstance(vals, dict):
                vals = list(vals.values())
            flat = np.asarray(vals, dtype=float).reshape(-1)
            if flat.size:
                bits.append(f"max_rel_err={np.max(flat):.3g}")
        return " ".join(bits)


def _fro_rel(estimate: np.ndarray, target: np.ndarray) -> float:
    scale = np.linalg.norm(target)
    if scale == 0.0:
        raise DomainError("relative error is undefined against a zero target")
    return float(np.linalg.norm(estimate - target) / scale)


def _bank_sizes(N: int, banks: int) -> list:
    if banks < 1:
        raise DomainError(f"bank count must be positive, got {banks!r}")
    if N < banks:
        raise DomainError(f"cannot split {N} replicates over {banks} seed banks")
    base, rem = divmod(N, banks)
    return [base + (1 if b < rem else 0) for b in range(banks)]


def _bank_seeds(master_seed: int, banks: int) -> list:
    return [bank_seed(master_seed, b) for b in range(banks)]


def _base_params(spec, p, n, N, mode, banks) -> dict:
    return {
        "preset": spec.name,
        "walk_type": spec.walk_type.value,
        "p": float(p),
        "n": int(n),
        "N": int(N),
        "banks": int(banks),
        "mode": mode.value,
    }


def check_lln(
    spec: LatticeSpec,
    p: float,
    n: int,
    N: int,
    master_seed: int,
    mode: FirstStepMode = FirstStepMode.DETERMINISTIC,
    banks: int = DEFAULT_BANKS,
    threads=None,
) -> VerifyReport:
    """Ensemble mean of S/steps against the almost-sure drift.

    A coordinate passes when its bias is within 4 standard errors plus the
    deterministic-start allowance 10 d / sqrt(n); the first-step drift of
    the mean recursion decays like n^(a-1) and does not shrink with N, so
    a pure z-test at large N would reject the true limit.  At p = 1 the
    walk is a fixed ray and the path identity is checked exactly instead.
    """
    if n < 1:
        raise DomainError(f"horizon must be positive, got {n!r}")
    if p == 1.0:
        if mode is not FirstStepMode.DETERMINISTIC:
            raise DomainError(
                "the p = 1 path identity assumes deterministic first steps"
            )
        if spec.walk_type is WalkType.TYPE1:
            target = spec.u.vectors[spec.i0].copy()
            final = walk.simulate(spec, 1.0, n, master_seed)[-1]
            label = "S_n / n"
        else:
            target = spec.u.vectors[spec.i0] + spec.w.vectors[spec.j0]
            final = walk.simulate(spec, 1.0, 2 * n, master_seed)[-1]
            label = "S_2n / n"
        passed = bool(np.array_equal(final, n * target))
        return VerifyReport(
            check="lln",
            params=_base_params(spec, p, n, 1, mode, 0),
            target=target.tolist(),
            estimate=(final / n).tolist(),
            tolerance={"kind": "exact"},
            z_scores=None,
            rel_error=None,
            passed=passed,
            seeds=(int(master_seed),),
            notes=(f"p = 1 fixed-direction walk; checked {label} exactly",),
        )
    target = theory.lln_drift(spec)
    d = spec.dimension
    abs_tol = 10.0 * d / math.sqrt(n)
    sizes = _bank_sizes(N, banks)
    seeds = _bank_seeds(master_seed, banks)
    bank_rows = []
    pooled = None
    all_pass = True
    for size, seed in zip(sizes, seeds):
        pos = ensemble_positions(spec, p, n, [1.0], size, seed, mode, threads)
        stats = _stats_from(pos[:, 0, :] / (2.0 * n), [1.0])
        bias = stats.mean_at(0) - target
        se = stats.standard_error(0)
        ok = bool(np.all(np.abs(bias) <= MEAN_SE_MULTIPLE * se + abs_tol))
        all_pass = all_pass and ok
        bank_rows.append(
            {
                "seed": int(seed),
                "N": int(size),
                "pass": ok,
                "max_abs_bias": float(np.max(np.abs(bias))),
            }
        )
        pooled = stats if pooled is None else pooled.merge(stats)
    bias = pooled.mean_at(0) - target
    se = pooled.standard_error(0)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, bias / se, np.where(bias == 0.0, 0.0, np.inf))
    return VerifyReport(
        check="lln",
        params=_base_params(spec, p, n, N, mode, banks),
        target=target.tolist(),
        estimate=pooled.mean_at(0).tolist(),
        tolerance={
            "kind": "se_multiple_plus_abs",
            "se_multiple": MEAN_SE_MULTIPLE,
            "abs_tol": abs_tol,
        },
        z_scores=z.tolist(),
        rel_error=None,
        passed=all_pass,
        seeds=tuple(int(s) for s in seeds),
        banks=tuple(bank_rows),
    )


def _pair_key(s: float, t: float) -> str:
    return f"{s:g}:{t:g}"


def check_fclt_cov(
    spec: LatticeSpec,
    p: float,
    n: int,
    N: int,
    grid_pairs,
    master_seed: int,
    tol_cov: float = 0.10,
    mode: FirstStepMode = FirstStepMode.DETERMINISTIC,
    banks: int = DEFAULT_BANKS,
    threads=None,
    regime_eps: float = 0.0,
) -> VerifyReport:
    """Cross-moment E[W_s W_t^T] of the rescaled walk against its kernel.

    In the diffusive regime grid values are time fractions of 2n steps; in
    a critical regime they are exponents t addressing step index 2 n^t.
    Pairs are path-coupled: both positions come from the same replicate.
    """
    if N < MIN_COV_REPLICATES:
        raise DomainError(
            f"covariance comparison needs at least {MIN_COV_REPLICATES} "
            f"replicates to mean anything, got {N}"
        )
    pairs = []
    for s, t in grid_pairs:
        s, t = float(s), float(t)
        if not 0.0 < s <= t:
            raise DomainError(f"pairs need 0 < s <= t, got ({s!r}, {t!r})")
        pairs.append((s, t))
    if not pairs:
        raise DomainError("need at least one (s, t) pair")
    report = theory.classify_regime(spec, p, eps=regime_eps)
    grid = sorted({x for pair in pairs for x in pair})
    notes = ()
    if report.regime is Regime.DIFFUSIVE:
        check_name = "fclt"
        step_targets = _grid_targets(n, grid)
        targets = {
            (s, t): theory.diffusive_kernel(spec, p, s, t) for s, t in pairs
        }

        def rescale(pos):
            return rescale_diffusive(pos, spec, p, n, grid)

    elif report.regime in (Regime.CRITICAL, Regime.CRITICAL_MIXED):
        check_name = "critical"
        step_targets = critical_step_targets(n, grid)
        targets = {
            (s, t): theory.critical_kernel(spec, p, s, eps=regime_eps)
            for s, t in pairs
        }

        def rescale(pos):
            return rescale_critical(pos, spec, p, n, grid, eps=regime_eps)

        if report.regime is Regime.CRITICAL_MIXED:
            notes = (
                "mixed critical point: the subcritical family fades only "
                "like 1/log n, so convergence is logarithmically slow",
            )
    else:
        raise DomainError(
            "covariance checks apply in the diffusive or critical regimes, "
            f"got {report.regime.value}"
        )
    index = {g: i for i, g in enumerate(grid)}
    sizes = _bank_sizes(N, banks)
    seeds = _bank_seeds(master_seed, banks)
    bank_rows = []
    pooled = None
    all_pass = True
    for size, seed in zip(sizes, seeds):
        pos = ensemble_positions(
            spec, p, n, grid, size, seed, mode, threads, step_targets=step_targets
        )
        stats = _stats_from(rescale(pos), grid)
        rel = {
            pair: _fro_rel(stats.cross_moment(index[pair[0]], index[pair[1]]), tgt)
            for pair, tgt in targets.items()
        }
        ok = all(r < tol_cov for r in rel.values())
        all_pass = all_pass and ok
        bank_rows.append(
            {
                "seed": int(seed),
                "N": int(size),
                "pass": ok,
                "rel_error": {_pair_key(*pair): r for pair, r in rel.items()},
            }
        )
        pooled = stats if pooled is None else pooled.merge(stats)
    estimates = {
        pair: pooled.cross_moment(index[pair[0]], index[pair[1]]) for pair in targets
    }
    rel = {pair: _fro_rel(estimates[pair], targets[pair]) for pair in targets}
    params = _base_params(spec, p, n, N, mode, banks)
    params["pairs"] = [list(pair) for pair in pairs]
    params["grid_kind"] = "exponential" if check_name == "critical" else "linear"
    return VerifyReport(
        check=check_name,
        params=params,
        target={_pair_key(*pair): mat.tolist() for pair, mat in targets.items()},
        estimate={_pair_key(*pair): mat.tolist() for pair, mat in estimates.items()},
        tolerance={"kind": "relative_frobenius", "value": float(tol_cov)},
        z_scores=None,
        rel_error={_pair_key(*pair): r for pair, r in rel.items()},
        passed=all_pass,
        seeds=tuple(int(s) for s in seeds),
        banks=tuple(bank_rows),
        notes=notes,
    )


def check_super_moments(
    spec: LatticeSpec,
    p: float,
    n: int,
    N: int,
    master_seed: int,
    tol_super: float = 0.10,
    mode: FirstStepMode = FirstStepMode.UNIFORM,
    banks: int = DEFAULT_BANKS,
    threads=None,
) -> VerifyReport:
    """First two moments of the n^a-rescaled endpoint against theory."""
    if mode is not FirstStepMode.UNIFORM:
        raise DomainError(
            "the superdiffusive moment formulas assume first steps chosen "
            "uniformly at random; run with the uniform first-step mode"
        )
    mean_target, second_target = theory.super_second_moment(spec, p)
    sizes = _bank_sizes(N, banks)
    seeds = _bank_seeds(master_seed, banks)
    bank_rows = []
    pooled = None
    all_pass = True
    for size, seed in zip(sizes, seeds):
        pos = ensemble_positions(spec, p, n, [1.0], size, seed, mode, threads)
        limits = rescale_super(pos[:, 0, :], spec, p, n)
        stats = _stats_from(limits, [1.0])
        se = stats.standard_error(0)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(se > 0, stats.mean_at(0) / se, 0.0)
        rel = _fro_rel(stats.cross_moment(0, 0), second_target)
        ok = bool(np.all(np.abs(z) <= MEAN_SE_MULTIPLE)) and rel < tol_super
        all_pass = all_pass and ok
        bank_rows.append(
            {
                "seed": int(seed),
                "N": int(size),
                "pass": ok,
                "max_abs_z": float(np.max(np.abs(z))),
                "rel_error": rel,
            }
        )
        pooled = stats if pooled is None else pooled.merge(stats)
    se = pooled.standard_error(0)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, pooled.mean_at(0) / se, 0.0)
    rel = _fro_rel(pooled.cross_moment(0, 0), second_target)
    return VerifyReport(
        check="super",
        params=_base_params(spec, p, n, N, mode, banks),
        target={
            "mean": mean_target.tolist(),
            "second_moment": second_target.tolist(),
        },
        estimate={
            "mean": pooled.mean_at(0).tolist(),
            "second_moment": pooled.cross_moment(0, 0).tolist(),
        },
        tolerance={
            "kind": "mean_z_and_relative_frobenius",
            "se_multiple": MEAN_SE_MULTIPLE,
            "value": float(tol_super),
        },
        z_scores=z.tolist(),
        rel_error=rel,
        passed=all_pass,
        seeds=tuple(int(s) for s in seeds),
        banks=tuple(bank_rows),
        notes=("finite-horizon bias direction of the second moment is not "
               "characterized; the tolerance absorbs it",),
    )


def check_equivalence(
    spec: LatticeSpec,
    p,
    depth: int = 3,
    mode: FirstStepMode = FirstStepMode.DETERMINISTIC,
) -> VerifyReport:
    """Exact distributional identity between the walk and its urn form.

    Enumerates the law of S_2k for k = 1..depth in rational arithmetic
    under both constructions and requires total-variation distance exactly
    zero.
    """
    if depth < 1:
        raise DomainError(f"depth must be positive, got {depth!r}")
    if depth > MAX_ENUM_DEPTH:
        raise CapacityError(
            f"depth {depth} would enumerate about "
            f"{exactdist.state_count_estimate(spec, depth)} joint count states; "
            f"the exact oracle is capped at depth {MAX_ENUM_DEPTH}"
        )
    tvs = {}
    for k in range(1, depth + 1):
        walk_dist = exactdist.walk_position_distribution(spec, p, k, mode)
        urn_dist = exactdist.urn_position_distribution(spec, p, k, mode)
        tvs[k] = exactdist.total_variation(walk_dist, urn_dist)
    passed = all(tv == 0 for tv in tvs.values())
    params = {
        "preset": spec.name,
        "walk_type": spec.walk_type.value,
        "p": float(p),
        "depth": int(depth),
        "mode": mode.value,
    }
    return VerifyReport(
        check="equiv",
        params=params,
        target=0.0,
        estimate={str(k): float(tv) for k, tv in tvs.items()},
        tolerance={"kind": "exact_total_variation"},
        z_scores=None,
        rel_error=None,
        passed=passed,
        seeds=(),
        notes=("distributions enumerated in exact rational arithmetic",),
    )


def verify_all(
    spec: LatticeSpec,
    p: float,
    n: int,
    N: int,
    master_seed: int,
    depth: int = 3,
    pairs=DEFAULT_PAIRS,
    tol_cov: float = 0.10,
    tol_super: float = 0.10,
    banks: int = DEFAULT_BANKS,
    mode: FirstStepMode = FirstStepMode.DETERMINISTIC,
    threads=None,
    regime_eps: float = 0.0,
):
    """Run every check whose preconditions hold for (spec, p).

    Returns (reports, skipped) where skipped lists {check, reason} entries
    for checks whose regime preconditions fail.  The superdiffusive check
    always uses uniform first steps, which its moment formulas assume.
    """
    reports = []
    skipped = []

    def skip(name: str, reason: str) -> None:
        skipped.append({"check": name, "reason": reason})

    if p == 1.0 and mode is not FirstStepMode.DETERMINISTIC:
        skip("lln", "p = 1 path identity assumes deterministic first steps")
    else:
        reports.append(check_lln(spec, p, n, N, master_seed, mode, banks, threads))
    reports.append(check_equivalence(spec, p, depth, mode))
    if p == 1.0:
        reason = "p = 1 is outside the fluctuation theorems"
        skip("fclt", reason)
        skip("critical", reason)
        skip("super", reason)
        return reports, skipped
    regime = theory.classify_regime(spec, p, eps=regime_eps).regime
    if regime is Regime.DIFFUSIVE:
        reports.append(
            check_fclt_cov(
                spec, p, n, N, pairs, master_seed, tol_cov, mode, banks, threads,
                regime_eps,
            )
        )
    else:
        skip("fclt", f"regime is {regime.value}, not diffusive")
    if regime in (Regime.CRITICAL, Regime.CRITICAL_MIXED):
        reports.append(
            check_fclt_cov(
                spec, p, n, N, pairs, master_seed, tol_cov, mode, banks, threads,
                regime_eps,
            )
        )
    else:
        skip("critical", f"regime is {regime.value}, not critical")
    if regime is Regime.SUPERDIFFUSIVE:
        try:
            reports.append(
                check_super_moments(
                    spec, p, n, N, master_seed, tol_super,
                    FirstStepMode.UNIFORM, banks, threads,
                )
            )
        except DomainError as err:
            skip("super", str(err))
    elif regime in (Regime.SUPER_MIXED_U, Regime.SUPER_MIXED_W):
        skip("super", "no closed-form moments in mixed superdiffusive regimes")
    else:
        skip("super", f"regime is {regime.value}, not superdiffusive")
    return reports, skipped


def campaign_report(reports, skipped, params: dict) -> dict:
    return {
        "params": _jsonable(params),
        "checks": [r.to_json_dict() for r in reports],
        "skipped": _jsonable(list(skipped)),
        "pass": all(r.passed for r in reports),
        "wall_time_s": None,
    }


def report_json(payload: dict) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"
