"""Monte Carlo over CUE spectra and the shifted-moment sum.

Eigenvalue angles are drawn from the Weyl density
``prod_{j<k} |e^{i theta_k} - e^{i theta_j}|^2`` by single-angle Metropolis
updates.  Many independent chains advance together; the inner loop is
compiled with numba, while every random number comes from a numpy
``Generator(PCG64)`` seeded through ``SeedSequence``, so a run is fixed by
``(seed, jobs)``.

Binary sample files: 8-byte magic ``b"CUESMP1\\0"``, then little-endian
uint64 ``N`` and uint64 ``count``, then ``count * N`` little-endian float64
angles, one sample per row.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

import mpmath
import numba
import numpy as np

from . import config
from .errors import InputError, PrecisionError

TWO_PI = 2 * math.pi
STATISTICS = ("lambda_prime", "z_prime")


@dataclass(frozen=True)
class SpectrumSample:
    angles: np.ndarray

    def __post_init__(self):
        a = np.mod(np.asarray(self.angles, dtype=np.float64).ravel(), TWO_PI)
        if a.size < 1:
            raise InputError("a spectrum needs at least one eigenvalue")
        object.__setattr__(self, "angles", a)

    @property
    def N(self) -> int:
        return self.angles.size


@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    stderr: float
    samples: int
    N: int
    k: int
    statistic: str
    # natural logs, always filled; mean/stderr may be inf when they overflow
    log_mean: float = field(default=float("nan"), compare=False)
    log_stderr: float = field(default=float("nan"), compare=False)


@dataclass(frozen=True)
class ShiftVector:
    alphas: tuple

    def __post_init__(self):
        vals = tuple(mpmath.mpmathify(a) for a in self.alphas)
        if len(vals) < 2 or len(vals) % 2:
            raise InputError("need an even number (2k) of shifts")
        for a, b in itertools.combinations(vals, 2):
            if a == b:
                raise InputError(f"shifts must be pairwise distinct (repeated {a})")
        if any(abs(a) >= 1 for a in vals):
            raise InputError("shifts must be smaller than 1 in absolute value")
        object.__setattr__(self, "alphas", vals)

    @property
    def k(self) -> int:
        return len(self.alphas) // 2


# ---------------------------------------------------------------------------
# observables


def _tree_prod(a: np.ndarray) -> np.ndarray:
    """Product along the last axis by pairwise halving."""
    while a.shape[-1] > 1:
        n = a.shape[-1]
        head = a[..., : n // 2 * 2 : 2] * a[..., 1 : n // 2 * 2 : 2]
        a = np.concatenate([head, a[..., n // 2 * 2 :]], axis=-1) if n % 2 else head
    return a[..., 0]


def _prefix_suffix(f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exclusive prefix and suffix products along the last axis."""
    ones = np.ones(f.shape[:-1] + (1,), dtype=f.dtype)
    pre = np.concatenate([ones, np.cumprod(f[..., :-1], axis=-1)], axis=-1)
    suf = np.concatenate([np.cumprod(f[..., :0:-1], axis=-1)[..., ::-1], ones], axis=-1)
    return pre, suf


def batch_observables(angles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``Lambda_A(1)`` and ``Lambda_A'(1)`` for every row of ``angles``."""
    angles = np.atleast_2d(angles)
    e = np.exp(-1j * angles)
    f = 1 - e
    pre, suf = _prefix_suffix(f)
    lam = _tree_prod(f)
    lam_prime = np.sum(-e * pre * suf, axis=-1)
    return lam, lam_prime


def lambda_at_one(s: SpectrumSample) -> complex:
    """``prod_n (1 - e^{-i theta_n})``."""
    return complex(_tree_prod(1 - np.exp(-1j * s.angles)))


def lambda_prime_at_one(s: SpectrumSample) -> complex:
    """Derivative of the characteristic polynomial at 1 (product rule, no division)."""
    return complex(batch_observables(s.angles)[1][0])


def z_prime_abs_at_one(s: SpectrumSample) -> float:
    """``|Z_A'(1)| = |Lambda_A'(1) - (N/2) Lambda_A(1)|``."""
    lam, lp = batch_observables(s.angles)
    return float(abs(lp[0] - s.N / 2 * lam[0]))


def statistic_abs(angles: np.ndarray, statistic: str) -> np.ndarray:
    """``|Lambda'(1)|`` or ``|Z'(1)|`` per row."""
    if statistic not in STATISTICS:
        raise InputError(f"statistic must be one of {STATISTICS}")
    angles = np.atleast_2d(angles)
    lam, lp = batch_observables(angles)
    if statistic == "lambda_prime":
        return np.abs(lp)
    return np.abs(lp - angles.shape[-1] / 2 * lam)


# ---------------------------------------------------------------------------
# Metropolis sampler


@numba.njit(cache=True)
def _metropolis_sweeps(th, xr, xi, width, u_prop, u_acc):  # pragma: no cover - compiled
    sweeps, C, N = u_prop.shape
    accepted = 0
    for c in range(C):
        for s in range(sweeps):
            for i in range(N):
                p = th[c, i] + width * (2.0 * u_prop[s, c, i] - 1.0)
                zr = math.cos(p)
                zi = math.sin(p)
                cr = xr[c, i]
                ci = xi[c, i]
                ratio = 1.0
                for j in range(N):
                    if j != i:
                        dr = zr - xr[c, j]
                        di = zi - xi[c, j]
                        er = cr - xr[c, j]
                        ei = ci - xi[c, j]
                        ratio *= (dr * dr + di * di) / (er * er + ei * ei)
                if u_acc[s, c, i] < ratio:
                    th[c, i] = p % (2.0 * math.pi)
                    xr[c, i] = zr
                    xi[c, i] = zi
                    accepted += 1
    return accepted


class WeylChains:
    """``chains`` independent Metropolis chains for the N-point Weyl density.

    Chains start from equally spaced angles with a random rotation and a
    small jitter, which is already close to the typical CUE configuration.
    """

    BLOCK = 32

    def __init__(self, N: int, chains: int, rng: np.random.Generator, width: float | None = None):
        if N < 1 or chains < 1:
            raise InputError("need N >= 1 and chains >= 1")
        self.N, self.chains, self.rng = N, chains, rng
        base = np.arange(N) * (TWO_PI / N)
        rot = rng.uniform(0, TWO_PI, (chains, 1))
        jitter = rng.uniform(-0.25, 0.25, (chains, N)) * (TWO_PI / N)
        self.theta = np.mod(base[None, :] + rot + jitter, TWO_PI)
        self._xr = np.cos(self.theta)
        self._xi = np.sin(self.theta)
        self.width = min(math.pi, math.pi / N) if width is None else float(width)

    def sweep(self, sweeps: int) -> float:
        """Run ``sweeps`` full sweeps; returns the acceptance fraction."""
        done = acc = 0
        while done < sweeps:
            s = min(self.BLOCK, sweeps - done)
            u_prop = self.rng.random((s, self.chains, self.N))
            u_acc = self.rng.random((s, self.chains, self.N))
            acc += _metropolis_sweeps(self.theta, self._xr, self._xi, self.width, u_prop, u_acc)
            done += s
        return acc / max(1, sweeps * self.chains * self.N)

    def burn_in(self, sweeps: int, block: int = 20) -> None:
        """Burn-in with width tuned towards 30-50% acceptance; frozen afterwards."""
        done = 0
        while done < sweeps:
            s = min(block, sweeps - done)
            rate = self.sweep(s)
            if rate > 0.5:
                self.width = min(math.pi, self.width * 1.25)
            elif rate < 0.3:
                self.width *= 0.8
            done += s

    def snapshot(self) -> np.ndarray:
        return self.theta.copy()


def _rng(seed: int, worker: int = 0, jobs: int = 1) -> np.random.Generator:
    ss = np.random.SeedSequence(seed).spawn(jobs)[worker]
    return np.random.Generator(np.random.PCG64(ss))


def sample_weyl_mcmc(
    N: int,
    burn_in: int = config.MC_BURN_IN,
    thin: int | None = None,
    seed: int = 0,
    chains: int = 1,
) -> Iterator[SpectrumSample]:
    """Endless stream of spectra: after burn-in, one per ``thin`` sweeps per chain.

    ``thin`` defaults to ``N`` sweeps.  With several chains, each round yields
    one sample from every chain in chain order.
    """
    if N < 1:
        raise InputError("N must be >= 1")
    thin = N if thin is None else thin
    if thin < 1 or burn_in < 0:
        raise InputError("need thin >= 1 and burn_in >= 0")
    state = WeylChains(N, chains, _rng(seed))
    state.burn_in(burn_in)
    while True:
        state.sweep(thin)
        for row in state.snapshot():
            yield SpectrumSample(row)


def sample_batches(
    N: int, samples: int, *, burn_in: int, thin: int, chains: int, rng: np.random.Generator
) -> Iterator[np.ndarray]:
    """Same chain dynamics as :func:`sample_weyl_mcmc`, as (rows, N) arrays."""
    chains = max(1, min(chains, samples))
    state = WeylChains(N, chains, rng)
    state.burn_in(burn_in)
    left = samples
    while left > 0:
        state.sweep(thin)
        batch = state.snapshot()[:left]
        left -= batch.shape[0]
        yield batch


def collect_samples(
    N: int, samples: int, seed: int = 0, *, burn_in: int = config.MC_BURN_IN,
    thin: int | None = None, chains: int = config.MC_CHAINS,
) -> np.ndarray:
    """The ``(samples, N)`` angles a single-worker :func:`estimate_moment` run sees."""
    thin = N if thin is None else thin
    return np.concatenate(list(sample_batches(
        N, samples, burn_in=burn_in, thin=thin, chains=chains, rng=_rng(seed)
    )))


# ---------------------------------------------------------------------------
# moment accumulation


class RunningMoments:
    """Count/mean/M2 accumulator with a log-space mode for huge values.

    Batches are merged with the pairwise (Chan et al.) update.  Once any
    value would overflow, the accumulator switches to tracking
    ``log sum v`` and ``log sum v^2`` instead.
    """

    LOG_SWITCH = 600.0

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0
        self.log_mode = False
        self.log_s1 = -math.inf
        self.log_s2 = -math.inf
        # per-chain (sum, count), for the between-chain error estimate
        self.chain_sums = np.zeros(0)
        self.chain_counts = np.zeros(0)

    def add_chain_totals(self, sums: np.ndarray, counts: np.ndarray) -> None:
        self.chain_sums = np.concatenate([self.chain_sums, sums])
        self.chain_counts = np.concatenate([self.chain_counts, counts])

    def _between_chain_stderr(self) -> float:
        S, n = self.chain_sums, self.chain_counts
        C = S.size
        if C < 2 or not np.all(np.isfinite(S)):
            return 0.0
        mu = S.sum() / n.sum()
        return float(math.sqrt(C * np.sum((S - mu * n) ** 2) / (C - 1)) / n.sum())

    def _to_log(self) -> None:
        if self.n:
            s1 = self.mean * self.n
            s2 = self.m2 + self.n * self.mean**2
            self.log_s1 = math.log(s1) if s1 > 0 else -math.inf
            self.log_s2 = math.log(s2) if s2 > 0 else -math.inf
        self.log_mode = True

    def add_logs(self, logv: np.ndarray) -> None:
        """Add values given by their natural logs."""
        logv = np.asarray(logv, dtype=np.float64)
        if logv.size == 0:
            return
        if not self.log_mode and np.max(logv) > self.LOG_SWITCH:
            self._to_log()
        if self.log_mode:
            self.log_s1 = float(np.logaddexp(self.log_s1, np.logaddexp.reduce(logv)))
            self.log_s2 = float(np.logaddexp(self.log_s2, np.logaddexp.reduce(2 * logv)))
            self.n += logv.size
            return
        v = np.exp(logv)
        self.merge_stats(v.size, float(np.mean(v)), float(np.sum((v - np.mean(v)) ** 2)))

    def merge_stats(self, n: int, mean: float, m2: float) -> None:
        if n == 0:
            return
        if self.n == 0:
            self.n, self.mean, self.m2 = n, mean, m2
            return
        tot = self.n + n
        delta = mean - self.mean
        self.mean += delta * n / tot
        self.m2 += m2 + delta * delta * self.n * n / tot
        self.n = tot

    def merge(self, other: "RunningMoments") -> None:
        self.add_chain_totals(other.chain_sums, other.chain_counts)
        if other.log_mode or self.log_mode:
            if not self.log_mode:
                self._to_log()
            if not other.log_mode:
                other = _copy_moments(other)
                other._to_log()
            self.log_s1 = float(np.logaddexp(self.log_s1, other.log_s1))
            self.log_s2 = float(np.logaddexp(self.log_s2, other.log_s2))
            self.n += other.n
        else:
            self.merge_stats(other.n, other.mean, other.m2)

    def result(self) -> tuple[float, float, float, float]:
        """``(mean, stderr, log_mean, log_stderr)``.

        In linear mode the stderr is the larger of ``std/sqrt(n)`` and the
        between-chain estimate (chains as independent replicates), so
        correlation inside a chain is not hidden.  A stderr below the
        rounding resolution of the mean is reported as 0.
        """
        n = self.n
        if n < 2:
            raise InputError("need at least two samples")
        if not self.log_mode:
            var = max(self.m2, 0.0) / (n - 1)
            stderr = max(math.sqrt(var / n), self._between_chain_stderr())
            if stderr <= 16 * np.finfo(float).eps * abs(self.mean):
                stderr = 0.0
            lm = math.log(self.mean) if self.mean > 0 else -math.inf
            ls = math.log(stderr) if stderr > 0 else -math.inf
            return self.mean, stderr, lm, ls
        lm = self.log_s1 - math.log(n)
        # var * (n-1) = s2 - n mean^2 = s2 (1 - exp(2 lm + log n - log s2))
        frac = math.exp(2 * lm + math.log(n) - self.log_s2)
        if frac >= 1:
            ls = -math.inf
        else:
            lvar = self.log_s2 + math.log1p(-frac) - math.log(n - 1)
            ls = 0.5 * (lvar - math.log(n))
        return _safe_exp(lm), _safe_exp(ls), lm, ls


def _copy_moments(m: RunningMoments) -> RunningMoments:
    out = RunningMoments()
    out.__dict__.update(m.__dict__)
    return out


def _safe_exp(x: float) -> float:
    return math.exp(x) if x < 709 else math.inf


def _moment_worker(args) -> RunningMoments:
    N, k, statistic, samples, seed, worker, jobs, burn_in, thin, chains = args
    acc = RunningMoments()
    rng = _rng(seed, worker, jobs)
    C = max(1, min(chains, samples))
    sums, counts = np.zeros(C), np.zeros(C)
    for batch in sample_batches(N, samples, burn_in=burn_in, thin=thin, chains=chains, rng=rng):
        with np.errstate(divide="ignore"):
            logv = 2 * k * np.log(statistic_abs(batch, statistic))
        acc.add_logs(logv)
        if not acc.log_mode:
            rows = logv.size
            sums[:rows] += np.exp(logv)
            counts[:rows] += 1
    if not acc.log_mode:
        acc.add_chain_totals(sums, counts)
    return acc


def estimate_moment(
    N: int,
    k: int,
    statistic: str = "lambda_prime",
    samples: int = 10_000,
    seed: int = 0,
    *,
    burn_in: int = config.MC_BURN_IN,
    thin: int | None = None,
    chains: int = config.MC_CHAINS,
    jobs: int = 1,
) -> MomentEstimate:
    """Monte Carlo mean and standard error of ``|Lambda'(1)|^{2k}`` or ``|Z'(1)|^{2k}``.

    Samples are split evenly over ``jobs`` workers, each with its own
    chains and seed stream; per-worker moments are merged in worker order.
    """
    if N < 1 or k < 1:
        raise InputError("need N >= 1 and k >= 1")
    if samples < 100:
        raise InputError("need at least 100 samples")
    if statistic not in STATISTICS:
        raise InputError(f"statistic must be one of {STATISTICS}")
    thin = N if thin is None else thin
    jobs = max(1, int(jobs))
    shares = [samples // jobs + (1 if w < samples % jobs else 0) for w in range(jobs)]
    tasks = [
        (N, k, statistic, shares[w], seed, w, jobs, burn_in, thin, chains)
        for w in range(jobs)
        if shares[w]
    ]
    if jobs == 1:
        parts = [_moment_worker(tasks[0])]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_moment_worker, tasks))
    total = RunningMoments()
    for part in parts:
        total.merge(part)
    mean, stderr, lm, ls = total.result()
    return MomentEstimate(mean, stderr, total.n, N, k, statistic, lm, ls)


def weyl_trapezoid(N: int, k: int, statistic: str = "lambda_prime", grid: int = 64) -> float:
    """Deterministic Haar average by the periodic trapezoid rule (N <= 3)."""
    if not 1 <= N <= 3:
        raise InputError("trapezoid quadrature is only offered for N <= 3")
    t = np.arange(grid) * (TWO_PI / grid)
    mesh = np.stack(np.meshgrid(*([t] * N), indexing="ij"), axis=-1).reshape(-1, N)
    weight = np.ones(mesh.shape[0])
    for a, b in itertools.combinations(range(N), 2):
        weight *= np.abs(np.exp(1j * mesh[:, a]) - np.exp(1j * mesh[:, b])) ** 2
    vals = statistic_abs(mesh, statistic) ** (2 * k)
    return float(np.sum(weight * vals) / (math.factorial(N) * grid**N))


# ---------------------------------------------------------------------------
# shifted moments


def _z(x):
    return -1 / mpmath.expm1(-x)


class ShiftedValue(NamedTuple):
    value: mpmath.mpf
    # decimal digits lost to cancellation between the terms
    digits_lost: float


def shifted_moment(
    N: int, k: int, shifts: ShiftVector | Sequence, precision: int = config.SHIFT_DIGITS
) -> mpmath.mpf:
    """Haar average of ``prod_j Lambda_A(e^{-a_j}) Lambda_{A*}(e^{a_{j+k}})``.

    Evaluated as the sum over the ``C(2k, k)`` permutations that are
    increasing on both halves: ``sigma(1..k)`` runs over the k-subsets of
    ``1..2k`` and ``sigma(k+1..2k)`` over their complements.  Roughly
    ``precision - digits_lost`` digits of the result are correct; fewer
    than 10 raises :class:`PrecisionError`.
    """
    return shifted_moment_detail(N, k, shifts, precision).value


def shifted_moment_detail(
    N: int, k: int, shifts: ShiftVector | Sequence, precision: int = config.SHIFT_DIGITS
) -> ShiftedValue:
    if not isinstance(shifts, ShiftVector):
        shifts = ShiftVector(tuple(shifts))
    if shifts.k != k:
        raise InputError(f"expected {2 * k} shifts, got {2 * shifts.k}")
    if N < 1:
        raise InputError("N must be >= 1")
    with mpmath.workdps(precision):
        a = [mpmath.mpmathify(x) for x in shifts.alphas]
        idx = range(2 * k)
        total = mpmath.mpf(0)
        biggest = mpmath.mpf(0)
        base = mpmath.fsum(a[:k])
        for first in itertools.combinations(idx, k):
            second = [i for i in idx if i not in first]
            term = mpmath.exp(N * (mpmath.fsum(a[i] for i in first) - base))
            for j in first:
                for i in second:
                    term *= _z(a[j] - a[i])
            total += term
            biggest = max(biggest, abs(term))
        lost = math.inf if total == 0 else float(mpmath.log10(biggest / abs(total)))
        if lost > precision - 10:
            raise PrecisionError(
                f"cancellation ate more than {precision - 10} of {precision} digits; "
                "use larger/less clustered shifts or more digits"
            )
        return ShiftedValue(+total, max(0.0, lost))


# ---------------------------------------------------------------------------
# export


MAGIC = b"CUESMP1\0"


def write_samples_csv(path, samples: Sequence[SpectrumSample]) -> None:
    with open(path, "w") as fh:
        for s in samples:
            fh.write(",".join(repr(float(x)) for x in s.angles) + "\n")


def write_samples_binary(path, samples: Sequence[SpectrumSample]) -> None:
    rows = np.stack([s.angles for s in samples]).astype("<f8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(np.array([rows.shape[1], rows.shape[0]], dtype="<u8").tobytes())
        fh.write(rows.tobytes())


def read_samples_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        if fh.read(8) != MAGIC:
            raise InputError(f"{path}: not a sample file")
        N, count = np.frombuffer(fh.read(16), dtype="<u8")
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != N * count:
        raise InputError(f"{path}: truncated sample file")
    return data.reshape(int(count), int(N))
