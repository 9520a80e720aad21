import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from cuemoments import cue_mc
from cuemoments.cue_mc import (
    RunningMoments,
    ShiftVector,
    SpectrumSample,
    estimate_moment,
    lambda_at_one,
    lambda_prime_at_one,
    sample_weyl_mcmc,
    shifted_moment,
    z_prime_abs_at_one,
)
from cuemoments.errors import InputError, PrecisionError

angles_st = st.lists(st.floats(0, 2 * math.pi, allow_nan=False), min_size=1, max_size=12)


def poly_derivative_at_one(theta):
    """Lambda'(1) from the expanded polynomial coefficients."""
    N = len(theta)
    # prod (1 - s e^{-it}) = (-1)^N prod(e^{-it}) prod(s - e^{it})
    c2 = np.poly(np.exp(1j * np.asarray(theta)))
    pref = (-1) ** N * np.prod(np.exp(-1j * np.asarray(theta)))
    der = np.polyder(c2)
    return pref * np.polyval(der, 1.0)


def test_lambda_examples():
    assert lambda_at_one(SpectrumSample([math.pi])) == pytest.approx(2)
    assert abs(lambda_at_one(SpectrumSample([0.0, 1.0]))) < 1e-15
    assert lambda_at_one(SpectrumSample([math.pi / 2, 3 * math.pi / 2])) == pytest.approx(2)


def test_lambda_prime_examples():
    assert lambda_prime_at_one(SpectrumSample([math.pi])) == pytest.approx(1)
    for t in np.linspace(0, 6, 7):
        assert abs(lambda_prime_at_one(SpectrumSample([t]))) == pytest.approx(1, abs=1e-15)
    assert lambda_prime_at_one(SpectrumSample([math.pi, math.pi])) == pytest.approx(4)


def test_z_prime_examples():
    assert z_prime_abs_at_one(SpectrumSample([math.pi])) == pytest.approx(0, abs=1e-15)
    assert z_prime_abs_at_one(SpectrumSample([math.pi / 2])) == pytest.approx(1 / math.sqrt(2))


@given(angles_st)
def test_lambda_prime_matches_polynomial(theta):
    got = lambda_prime_at_one(SpectrumSample(theta))
    want = poly_derivative_at_one(theta)
    assert abs(got - want) <= 1e-9 * max(1.0, abs(want))


@given(angles_st)
def test_z_prime_real_form(theta):
    # |Z'(1)| = |sum_n cos(t_n/2) prod_{m != n} 2 sin(t_m/2)|
    t = np.asarray(theta)
    s = 2 * np.sin(t / 2)
    want = abs(sum(math.cos(t[n] / 2) * np.prod(np.delete(s, n)) for n in range(len(t))))
    assert z_prime_abs_at_one(SpectrumSample(theta)) == pytest.approx(want, abs=1e-9, rel=1e-9)


def test_rotation_changes_single_sample():
    a = SpectrumSample([0.3, 2.0, 4.0])
    b = SpectrumSample([0.3 + 0.7, 2.0 + 0.7, 4.0 + 0.7])
    assert abs(z_prime_abs_at_one(a) - z_prime_abs_at_one(b)) > 1e-3


def test_spectrum_sample_reduces_angles():
    assert SpectrumSample([7.0]).angles[0] == pytest.approx(7.0 - 2 * math.pi)
    with pytest.raises(InputError):
        SpectrumSample([])


def test_sampler_is_deterministic():
    a = [s.angles for _, s in zip(range(50), sample_weyl_mcmc(5, burn_in=50, seed=11, chains=3))]
    b = [s.angles for _, s in zip(range(50), sample_weyl_mcmc(5, burn_in=50, seed=11, chains=3))]
    c = [s.angles for _, s in zip(range(50), sample_weyl_mcmc(5, burn_in=50, seed=12, chains=3))]
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not all(np.array_equal(x, y) for x, y in zip(a, c))


def chain_stderr(values, chains):
    """Standard error from the spread of per-chain means (rows cycle through chains)."""
    per_chain = np.array([values[c::chains].mean() for c in range(chains)])
    return per_chain.std(ddof=1) / math.sqrt(chains)


def test_n1_uniform():
    rows = cue_mc.collect_samples(1, 20000, seed=3, burn_in=50, thin=1, chains=200)
    z = np.exp(1j * rows[:, 0])
    for part in (z.real, z.imag):
        assert abs(part.mean()) < 3 * chain_stderr(part, 200)


def test_n2_gap_distribution_chi_square():
    rows = cue_mc.collect_samples(2, 40000, seed=5, burn_in=200, thin=2, chains=400)
    gap = np.mod(rows[:, 1] - rows[:, 0], 2 * math.pi)
    edges = np.linspace(0, 2 * math.pi, 17)
    observed, _ = np.histogram(gap, edges)
    # density prop. to sin^2(d/2) = (1 - cos d)/2 integrates to (d - sin d)/2
    cdf = (edges - np.sin(edges)) / (2 * math.pi)
    expected = np.diff(cdf) * gap.size
    assert stats.chisquare(observed, expected).pvalue > 0.05


def test_arc_count_mean():
    N, ell = 6, 1.3
    rows = cue_mc.collect_samples(N, 20000, seed=9, burn_in=200, thin=N, chains=200)
    counts = np.sum(rows < ell, axis=1).astype(float)
    assert abs(counts.mean() - N * ell / (2 * math.pi)) < 3 * chain_stderr(counts, 200)


def test_estimate_n1_exact():
    e = estimate_moment(1, 3, samples=1000)
    assert e.mean == pytest.approx(1, abs=1e-14)
    assert e.stderr == 0


def test_estimate_validates():
    with pytest.raises(InputError):
        estimate_moment(2, 1, samples=50)
    with pytest.raises(InputError):
        estimate_moment(2, 1, statistic="other")


def test_estimate_n2_vs_trapezoid():
    for stat in ("lambda_prime", "z_prime"):
        want = cue_mc.weyl_trapezoid(2, 1, stat)
        e = estimate_moment(2, 1, stat, samples=50000, seed=2)
        assert abs(e.mean - want) < 3 * e.stderr


def test_trapezoid_matches_secular_formula():
    for N in (1, 2, 3):
        assert cue_mc.weyl_trapezoid(N, 1, "lambda_prime", grid=32) == pytest.approx(
            N * (N + 1) * (2 * N + 1) / 6, rel=1e-12
        )
        assert cue_mc.weyl_trapezoid(N, 1, "z_prime", grid=32) == pytest.approx(
            sum((n - N / 2) ** 2 for n in range(N + 1)), rel=1e-12
        )
    with pytest.raises(InputError):
        cue_mc.weyl_trapezoid(4, 1)


def test_jobs_change_stream_but_not_validity():
    a = estimate_moment(3, 1, samples=4000, seed=1, jobs=1, chains=50, burn_in=100)
    b = estimate_moment(3, 1, samples=4000, seed=1, jobs=1, chains=50, burn_in=100)
    assert a == b


@given(st.lists(st.floats(0.1, 100), min_size=4, max_size=60), st.integers(1, 3))
def test_running_moments_merge(values, cut):
    v = np.array(values)
    parts = np.array_split(v, cut + 1)
    total = RunningMoments()
    for p in parts:
        acc = RunningMoments()
        acc.add_logs(np.log(p))
        total.merge(acc)
    mean, se, _, _ = total.result()
    assert mean == pytest.approx(v.mean(), rel=1e-12)
    want = v.std(ddof=1) / math.sqrt(v.size)
    assert se == pytest.approx(want, rel=1e-9, abs=1e-12 * v.mean())


def test_log_mode_matches_linear():
    rng = np.random.default_rng(4)
    logs = rng.normal(0, 1, 1000)
    lin = RunningMoments()
    lin.add_logs(logs)
    big = RunningMoments()
    big.add_logs(logs + 800.0)  # forces log mode
    assert big.log_mode
    m1, s1, lm1, ls1 = lin.result()
    _, _, lm2, ls2 = big.result()
    assert lm2 - 800 == pytest.approx(lm1, abs=1e-10)
    assert ls2 - 800 == pytest.approx(ls1, abs=1e-6)


def test_large_moments_do_not_overflow():
    e = estimate_moment(64, 150, samples=200, thin=1, burn_in=50, chains=20)
    assert math.isfinite(e.log_mean) and e.log_mean > 709
    assert e.mean == math.inf and e.log_stderr <= e.log_mean


def quad_n1(a1, a2):
    f = lambda t: ((1 - mpmath.exp(-a1 - 1j * t)) * (1 - mpmath.exp(a2 + 1j * t))).real
    return mpmath.quad(f, [0, 2 * mpmath.pi]) / (2 * mpmath.pi)


def test_shifted_n1_vs_quadrature():
    got = shifted_moment(1, 1, (0.1, -0.1))
    assert abs(got - quad_n1(0.1, -0.1)) < 1e-8
    with mpmath.workdps(60):
        a = mpmath.mpf(0.1)
        assert abs(got - (1 + mpmath.exp(-2 * a))) < 1e-40


def test_shifted_conjugation_symmetry():
    assert abs(shifted_moment(4, 1, (0.3, -0.1)) - shifted_moment(4, 1, (0.1, -0.3))) < 1e-40
    a = (0.2, 0.05, -0.1, -0.3)
    b = (0.1, 0.3, -0.2, -0.05)
    assert abs(shifted_moment(5, 2, a) - shifted_moment(5, 2, b)) < 1e-35


def test_shifted_k1_closed_form():
    for eps in (1e-2, 1e-4):
        with mpmath.workdps(60):
            want = sum(mpmath.exp(-2 * n * mpmath.mpf(eps)) for n in range(101))
        assert abs(shifted_moment(100, 1, (eps, -eps)) - want) < 1e-30


def test_shifted_confluent_limit_k2():
    N = 12
    exact = (N + 1) * (N + 2) ** 2 * (N + 3) / 12  # E|Lambda(1)|^4
    vals = [shifted_moment(N, 2, (s, 2 * s, -s, -3 * s), precision=80) for s in (1e-3, 1e-5, 1e-7)]
    errs = [abs(v - exact) for v in vals]
    # first order in the shift scale: each 100x shrink cuts the error ~100x
    assert errs[0] > 50 * errs[1] > 2500 * errs[2]
    assert errs[2] < 0.05


def test_shifted_errors():
    with pytest.raises(InputError):
        ShiftVector((0.1, 0.1))
    with pytest.raises(InputError):
        ShiftVector((0.1,))
    with pytest.raises(InputError):
        shifted_moment(1, 2, (0.1, -0.1))
    with pytest.raises(PrecisionError):
        shifted_moment(10, 2, (1e-30, 2e-30, -1e-30, -3e-30))


def test_binary_and_csv_export(tmp_path):
    rows = cue_mc.collect_samples(4, 10, seed=1, burn_in=5)
    samples = [SpectrumSample(r) for r in rows]
    cue_mc.write_samples_binary(tmp_path / "s.bin", samples)
    back = cue_mc.read_samples_binary(tmp_path / "s.bin")
    assert np.array_equal(back, rows)
    raw = (tmp_path / "s.bin").read_bytes()
    assert raw[:8] == b"CUESMP1\0" and len(raw) == 24 + 8 * rows.size
    cue_mc.write_samples_csv(tmp_path / "s.csv", samples)
    parsed = np.loadtxt(tmp_path / "s.csv", delimiter=",")
    assert np.array_equal(parsed, rows)
    (tmp_path / "bad.bin").write_bytes(b"nope")
    with pytest.raises(InputError):
        cue_mc.read_samples_binary(tmp_path / "bad.bin")
