"""Command line interface.

Every command builds a JSON-serializable payload
``{"command", "inputs", "result", "checks"}``; plain text is rendered from
that payload alone, so ``--format json`` and plain output always carry the
same numbers.  Exit codes: 0 success, 1 failed check, 2 usage or input
error, 3 resource limit or insufficient precision.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction

import mpmath

from . import config, cue_mc, tables
from .arith import WHICH, ak, conjectured_leading
from .errors import ConsistencyError, InputError, PrecisionError, ResourceError
from .exactnum import format_factored, format_plain
from .moments_comb import bkprime_comb, fk, hughes_B
from .moments_det import bk_det, bkprime_det

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3
FORMATS = ("plain", "json", "csv")
CSV_COMMANDS = ("table", "mc")
MC_WHICH = {"lambda": "lambda_prime", "z": "z_prime"}


class UsageError(Exception):
    pass


def _exact(q: Fraction, limits: config.Limits) -> dict:
    return {"exact": format_plain(q), "factored": format_factored(q, limits.trial_bound)}


def _check(name: str, passed: bool, detail: str = "") -> dict:
    return {"name": name, "passed": bool(passed), "detail": detail}


def _mp_str(x, digits: int) -> str:
    return mpmath.nstr(x, digits, min_fixed=-math.inf, max_fixed=math.inf)


def _fixed(text: str, decimals: int) -> str:
    with localcontext() as ctx:
        ctx.prec = len(text) + decimals + 10
        return str(Decimal(text).quantize(Decimal(1).scaleb(-decimals), rounding=ROUND_HALF_EVEN))


def _float_str(x: float) -> str:
    """Shortest repr that round-trips; JSON-safe for inf/nan."""
    return repr(float(x))


# ---------------------------------------------------------------------------
# commands


def cmd_bk(args, limits):
    if args.method != "det":
        raise UsageError("bk only supports --method det")
    q = bk_det(args.k, limits.k_max)
    return {"command": "bk", "inputs": {"k": args.k, "method": args.method},
            "result": _exact(q, limits), "checks": []}


def cmd_bkprime(args, limits):
    k = args.k
    if args.method == "det":
        q = bkprime_det(k, limits.k_max)
    elif args.method == "comb":
        q = bkprime_comb(k, limits.k_comb_max, jobs=args.jobs or limits.jobs)
    else:
        if not isinstance(k, int) or k < 1:
            raise InputError(f"k must be a positive integer, got {k!r}")
        if k > limits.hughes_k_max:
            raise ResourceError(
                f"k={k} exceeds the Hughes limit {limits.hughes_k_max}; use --method det"
            )
        q = hughes_B(k, k, k_max=limits.hughes_k_max) * fk(k)
    return {"command": "bkprime", "inputs": {"k": k, "method": args.method},
            "result": _exact(q, limits), "checks": []}


def cmd_table(args, limits):
    if args.kmax < 1:
        raise InputError("--kmax must be >= 1")
    if args.errata and not args.check:
        raise UsageError("--errata only applies together with --check")
    inputs = {"kmax": args.kmax, "check": args.check, "expect": args.expect,
              "errata": args.errata}
    if not args.check:
        rows = []
        for k in range(1, args.kmax + 1):
            for name in tables.NAMES:
                q = tables.compute(name, k) if k <= limits.k_max else None
                if q is None:
                    raise ResourceError(f"k={k} exceeds K_max={limits.k_max}")
                rows.append({"name": name, "k": k, **_exact(q, limits)})
        return {"command": "table", "inputs": inputs, "result": {"rows": rows}, "checks": []}

    if args.kmax > 15 and args.expect is None:
        raise UsageError("--check compares against the embedded values, which end at k=15")
    entries = tables.load_table(args.expect)
    if args.errata:
        entries = tables.apply_errata(entries)
    rows, checks = [], []
    for r in tables.check_table(entries, args.kmax):
        rows.append({"name": r.name, "k": r.k, **_exact(r.computed, limits),
                     "expected": r.expected, "match": r.ok})
        checks.append(_check(f"{r.name} k={r.k}", r.ok, "; ".join(r.problems)))
    return {"command": "table", "inputs": inputs, "result": {"rows": rows}, "checks": checks}


def cmd_ak(args, limits):
    digits = args.digits or limits.ak_digits
    res = ak(args.k, args.tol, prime_cutoff=args.cutoff, digits=digits, prime_cap=limits.prime_cap)
    decimals = max(1, math.ceil(-math.log10(args.tol)))
    # keep only the decimals the error bound supports, plus two guard digits
    sure = int(-mpmath.log10(res.error_bound)) + 2 if res.error_bound > 0 else digits
    with mpmath.workdps(digits):
        value = _fixed(_mp_str(res.value, digits), max(decimals, min(sure, digits)))
    return {
        "command": "ak",
        "inputs": {"k": args.k, "tol": args.tol, "digits": digits, "cutoff": args.cutoff},
        "result": {"value": value, "error_bound": mpmath.nstr(res.error_bound, 3),
                   "decimals": decimals, "prime_cutoff": res.prime_cutoff,
                   "tail_terms": res.per_prime_terms},
        "checks": [],
    }


def cmd_conjecture(args, limits):
    digits = args.digits or limits.ak_digits
    res = conjectured_leading(args.k, args.logT, args.which, args.tol, digits)
    with mpmath.workdps(digits):
        value = _mp_str(res.value, 20)
    return {
        "command": "conjecture",
        "inputs": {"k": args.k, "logT": args.logT, "which": args.which, "tol": args.tol},
        "result": {"value": value, "error_bound": mpmath.nstr(res.error_bound, 3)},
        "checks": [],
    }


def _mc_oracle(N: int, k: int, statistic: str) -> float | None:
    if N <= 3:
        return cue_mc.weyl_trapezoid(N, k, statistic)
    if k == 1:
        # the secular coefficients of a Haar unitary are orthonormal
        if statistic == "lambda_prime":
            return N * (N + 1) * (2 * N + 1) / 6
        return sum((n - N / 2) ** 2 for n in range(N + 1))
    return None


def cmd_mc(args, limits):
    statistic = MC_WHICH[args.which]
    chains = args.chains or limits.mc_chains
    burn_in = limits.mc_burn_in if args.burn_in is None else args.burn_in
    thin = args.N if args.thin is None else args.thin
    jobs = args.jobs or limits.jobs
    if args.k > limits.k_max:
        raise ResourceError(f"k={args.k} exceeds K_max={limits.k_max}")
    oracle = None
    if args.check:
        oracle = _mc_oracle(args.N, args.k, statistic)
        if oracle is None:
            raise UsageError("--check needs N <= 3 (quadrature) or k = 1 (exact formula)")
    est = cue_mc.estimate_moment(
        args.N, args.k, statistic, args.samples, args.seed,
        burn_in=burn_in, thin=thin, chains=chains, jobs=jobs,
    )
    b = bk_det(args.k, limits.k_max) if statistic == "lambda_prime" else bkprime_det(args.k, limits.k_max)
    exponent = args.k * args.k + 2 * args.k
    log_ratio = est.log_mean - math.log(b) - exponent * math.log(args.N)
    ratio = math.exp(log_ratio) if log_ratio < 709 else math.inf

    if args.dump_csv or args.dump_bin:
        rows = cue_mc.collect_samples(args.N, args.samples, args.seed,
                                      burn_in=burn_in, thin=thin, chains=chains)
        spectra = [cue_mc.SpectrumSample(r) for r in rows]
        if args.dump_csv:
            cue_mc.write_samples_csv(args.dump_csv, spectra)
        if args.dump_bin:
            cue_mc.write_samples_binary(args.dump_bin, spectra)

    checks = []
    if oracle is not None:
        diff = abs(est.mean - oracle)
        tol = 3 * est.stderr if est.stderr > 0 else 1e-9 * max(1.0, abs(oracle))
        checks.append(_check("oracle", diff <= tol,
                             f"oracle={_float_str(oracle)} |diff|={diff:.3g} allowed={tol:.3g}"))
    return {
        "command": "mc",
        "inputs": {"N": args.N, "k": args.k, "which": args.which, "samples": args.samples,
                   "seed": args.seed, "burn_in": burn_in, "thin": thin, "chains": chains,
                   "jobs": jobs},
        "result": {"mean": _float_str(est.mean), "stderr": _float_str(est.stderr),
                   "log_mean": _float_str(est.log_mean), "samples": est.samples,
                   "ratio": _float_str(ratio),
                   "reference": f"{'b' if statistic == 'lambda_prime' else 'bprime'}_{args.k}"
                                f"*N^{exponent}"},
        "checks": checks,
    }


def _parse_alphas(text: str) -> list[str]:
    items = [t.strip() for t in text.split(",") if t.strip()]
    for t in items:
        try:
            mpmath.mpf(t)
        except (ValueError, TypeError):
            raise InputError(f"cannot parse shift {t!r}") from None
    return items


def cmd_shifted(args, limits):
    digits = args.digits or limits.shift_digits
    alphas = _parse_alphas(args.alphas)
    with mpmath.workdps(digits):
        shifts = cue_mc.ShiftVector(tuple(mpmath.mpf(a) for a in alphas))
    res = cue_mc.shifted_moment_detail(args.N, args.k, shifts, precision=digits)
    shown = max(1, digits - math.ceil(res.digits_lost) - 5)
    with mpmath.workdps(digits):
        text = _mp_str(res.value, shown)
    return {"command": "shifted",
            "inputs": {"N": args.N, "k": args.k, "alphas": alphas, "digits": digits},
            "result": {"value": text}, "checks": []}


COMMANDS = {
    "bk": cmd_bk, "bkprime": cmd_bkprime, "table": cmd_table, "ak": cmd_ak,
    "conjecture": cmd_conjecture, "mc": cmd_mc, "shifted": cmd_shifted,
}


# ---------------------------------------------------------------------------
# rendering


def render_plain(payload: dict) -> str:
    cmd, res = payload["command"], payload["result"]
    lines = []
    if cmd in ("bk", "bkprime"):
        lines += [res["exact"], res["factored"]]
    elif cmd == "table":
        rows = res["rows"]
        if payload["inputs"]["check"]:
            for r in rows:
                mark = "ok" if r["match"] else "MISMATCH"
                lines.append(f"{r['name']:<6} {r['k']:>2}  {mark:<8} {r['factored']}")
            for c in payload["checks"]:
                if not c["passed"]:
                    lines.append(f"{c['name']}: {c['detail']}")
            good = sum(c["passed"] for c in payload["checks"])
            lines.append(f"{good}/{len(payload['checks'])} exact matches")
        else:
            for r in rows:
                lines.append(f"{r['name']:<6} {r['k']:>2}  {r['factored']}")
    elif cmd == "ak":
        lines.append(f"{_fixed(res['value'], res['decimals'])} ± {res['error_bound']}")
    elif cmd == "conjecture":
        lines.append(f"{res['value']} ± {res['error_bound']}")
    elif cmd == "mc":
        lines += [
            f"mean     {float(res['mean']):.12g}",
            f"stderr   {float(res['stderr']):.6g}",
            f"samples  {res['samples']}",
            f"ratio    {float(res['ratio']):.6g}  (mean / {res['reference']})",
        ]
        for c in payload["checks"]:
            lines.append(f"check {c['name']}: {'pass' if c['passed'] else 'FAIL'}  {c['detail']}")
    elif cmd == "shifted":
        lines.append(res["value"])
    return "\n".join(lines) + "\n"


def render_csv(payload: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    res = payload["result"]
    if payload["command"] == "table":
        check = payload["inputs"]["check"]
        w.writerow(["name", "k", "exact", "factored"] + (["expected", "match"] if check else []))
        for r in res["rows"]:
            extra = [r["expected"], r["match"]] if check else []
            w.writerow([r["name"], r["k"], r["exact"], r["factored"]] + extra)
    else:
        inp = payload["inputs"]
        w.writerow(["N", "k", "which", "samples", "seed", "mean", "stderr", "ratio"])
        w.writerow([inp["N"], inp["k"], inp["which"], res["samples"], inp["seed"],
                    res["mean"], res["stderr"], res["ratio"]])
    return buf.getvalue()


def render(payload: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"
    if fmt == "csv":
        return render_csv(payload)
    return render_plain(payload)


# ---------------------------------------------------------------------------
# argument parsing


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument("--format", choices=FORMATS, default=argparse.SUPPRESS)
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS, help="worker processes")
    for flag in ("k-max", "k-comb-max", "hughes-k-max", "prime-cap", "trial-bound"):
        common.add_argument(f"--{flag}", type=int, default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(
        prog="cuemoments", parents=[common], allow_abbrev=False,
        description="Exact and Monte Carlo moments of CUE characteristic polynomial derivatives.",
        epilog=f"Defaults of the limit flags can be set with {config.ENV_PREFIX}* variables.",
    )
    sub = p.add_subparsers(dest="command", required=True)
    _add = sub.add_parser
    sub.add_parser = lambda *a, **kw: _add(*a, allow_abbrev=False, **kw)

    s = sub.add_parser("bk", parents=[common], help="exact b_k")
    s.add_argument("k", type=int)
    s.add_argument("--method", choices=["det"], default="det")

    s = sub.add_parser("bkprime", parents=[common], help="exact b_k'")
    s.add_argument("k", type=int)
    s.add_argument("--method", choices=["det", "comb", "hughes"], default="det")

    s = sub.add_parser("table", parents=[common], help="b_k and b_k' for k=1..kmax")
    s.add_argument("--kmax", type=int, default=15)
    s.add_argument("--check", action="store_true", help="compare with the reference values")
    s.add_argument("--expect", metavar="FILE", help="alternative expectation file")
    s.add_argument("--errata", action="store_true", help="apply the known transcription fixes")

    s = sub.add_parser("ak", parents=[common], help="arithmetic factor a_k")
    s.add_argument("k", type=int)
    s.add_argument("--tol", type=_positive_float, default=1e-20)
    s.add_argument("--digits", type=int)
    s.add_argument("--cutoff", type=int, help="prime cutoff P")

    s = sub.add_parser("conjecture", parents=[common], help="a_k b_k (log T)^(k^2+2k)")
    s.add_argument("k", type=int)
    s.add_argument("--logT", type=_positive_float, required=True)
    s.add_argument("--which", choices=WHICH, default="zeta_prime")
    s.add_argument("--tol", type=_positive_float, default=1e-30)
    s.add_argument("--digits", type=int)

    s = sub.add_parser("mc", parents=[common], help="Monte Carlo moment over CUE(N)")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--which", choices=sorted(MC_WHICH), default="lambda")
    s.add_argument("--samples", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--burn-in", type=int)
    s.add_argument("--thin", type=int, help="sweeps between samples (default N)")
    s.add_argument("--chains", type=int)
    s.add_argument("--check", action="store_true", help="compare with a deterministic oracle")
    s.add_argument("--dump-csv", metavar="FILE")
    s.add_argument("--dump-bin", metavar="FILE")

    s = sub.add_parser("shifted", parents=[common], help="shifted moment of Lambda_A")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--alphas", required=True, help="comma separated, 2k values")
    s.add_argument("--digits", type=int)
    return p


def _limits(args) -> config.Limits:
    base = config.Limits.from_env()
    over = {}
    for name in ("k_max", "k_comb_max", "hughes_k_max", "prime_cap", "trial_bound", "jobs"):
        if getattr(args, name, None) is not None:
            over[name] = getattr(args, name)
    return config.Limits(**{**base.__dict__, **over})


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fmt = getattr(args, "format", "plain")
    args.jobs = getattr(args, "jobs", None)
    try:
        limits = _limits(args)
        if fmt == "csv" and args.command not in CSV_COMMANDS:
            raise UsageError(f"--format csv is only available for {', '.join(CSV_COMMANDS)}")
        payload = COMMANDS[args.command](args, limits)
    except (UsageError, InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ResourceError, PrecisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ConsistencyError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    sys.stdout.write(render(payload, fmt))
    return EXIT_OK if all(c["passed"] for c in payload["checks"]) else EXIT_CHECK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
