"""Command-line interface and the on-disk profile/result formats.

Exit codes: 0 success, 1 usage error, 2 data error, 3 solver did not converge
(the result is still written).  JSON output is deterministic for a fixed argv:
keys in a fixed order and floats at 17 significant digits, so identical runs
are byte-identical (the compare report's wall_time fields excepted).
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from typing import Optional

import numpy as np

from .core import (
    BoundSpec,
    ConstantPolicy,
    DiscreteDistribution,
    DistanceKind,
    FixedPointConfig,
    InitScheme,
    PacBayesError,
    PosteriorResult,
    RiskProfile,
    make_distribution,
)
from .bounds import evaluate_bound
from .harness import (
    RNG_ALGORITHM,
    ComparisonReport,
    GeneratorSpec,
    ProfileShape,
    compare_all,
    generate_profile,
    gibbs_test_error,
    hhi,
)
from .klinverse import KlRootRequest, kl_lower_root_batch, kl_upper_root_batch
from .optimize import fp_solve, optimal_posterior_linear, prefix_search
from .special_fns import ik_constant

_CSV_HEADER = ("index", "param", "emp_risk", "test_err")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage by default; the contract here is 1
    def error(self, message):
        raise _UsageError(message)


def _fmt17(x: float) -> str:
    if not math.isfinite(x):
        raise PacBayesError(f"non-finite value {x!r} in output", code="NON_FINITE_OUTPUT")
    return format(float(x), ".17g")


def _json_dump(obj, out: list, indent: int = 0):
    pad = "  " * indent
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, float):
        out.append(_fmt17(obj))
    elif isinstance(obj, str):
        out.append('"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"')
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        out.append("[")
        for i, v in enumerate(obj):
            out.append("\n" + pad + "  ")
            _json_dump(v, out, indent + 1)
            if i < len(obj) - 1:
                out.append(",")
        out.append("\n" + pad + "]")
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{")
        items = list(obj.items())
        for i, (k, v) in enumerate(items):
            out.append("\n" + pad + '  "' + k + '": ')
            _json_dump(v, out, indent + 1)
            if i < len(items) - 1:
                out.append(",")
        out.append("\n" + pad + "}")
    else:
        raise PacBayesError(f"cannot serialize {type(obj).__name__}", code="NON_FINITE_OUTPUT")


def to_json(obj) -> str:
    parts: list = []
    _json_dump(obj, parts)
    parts.append("\n")
    return "".join(parts)


def write_profile_csv(profile: RiskProfile, fh, comments: Optional[dict] = None):
    fh.write(f"# sample_size={profile.sample_size}\n")
    for key, val in (comments or {}).items():
        fh.write(f"# {key}={val}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(_CSV_HEADER)
    for e in profile.entries:
        writer.writerow(
            [
                e.id,
                "" if e.param_value is None else repr(float(e.param_value)),
                repr(float(e.emp_risk)),
                "" if e.test_err is None else repr(float(e.test_err)),
            ]
        )


def read_profile_csv(path: str, m_flag: Optional[int] = None) -> RiskProfile:
    """Parse a profile CSV; `# sample_size=` comments win over the --m flag,
    and a conflict between the two is an error."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise PacBayesError(f"cannot read {path}: {exc}", code="IO_ERROR")

    comment_m = None
    data_lines = []
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped.lstrip("#").strip()
            if "=" in body:
                key, _, val = body.partition("=")
                if key.strip() == "sample_size":
                    try:
                        comment_m = int(val.strip())
                    except ValueError:
                        raise PacBayesError(
                            f"bad sample_size comment {val.strip()!r}", code="BAD_SAMPLE_SIZE"
                        )
            continue
        data_lines.append(line)

    if comment_m is not None and m_flag is not None and comment_m != m_flag:
        raise PacBayesError(
            f"sample size given twice and unequal: comment says {comment_m}, flag says {m_flag}",
            code="BAD_SAMPLE_SIZE",
        )
    m = comment_m if comment_m is not None else m_flag
    if m is None:
        raise PacBayesError(
            "no sample size: pass --m or a '# sample_size=' comment", code="BAD_SAMPLE_SIZE"
        )

    rows = list(csv.reader(io.StringIO("\n".join(data_lines))))
    if not rows:
        raise PacBayesError("profile CSV has no rows", code="EMPTY_PROFILE")
    header = [h.strip() for h in rows[0]]
    if "index" not in header or "emp_risk" not in header:
        raise PacBayesError(
            f"profile CSV needs 'index' and 'emp_risk' columns, got {header}", code="BAD_HEADER"
        )
    col = {name: header.index(name) for name in header}

    def cell(row, name):
        if name not in col or col[name] >= len(row):
            return ""
        return row[col[name]].strip()

    ids, params, emps, tests = [], [], [], []
    for row in rows[1:]:
        if not any(c.strip() for c in row):
            continue
        try:
            ids.append(int(cell(row, "index")))
            emps.append(float(cell(row, "emp_risk")))
            p = cell(row, "param")
            params.append(float(p) if p else None)
            t = cell(row, "test_err")
            tests.append(float(t) if t else None)
        except ValueError as exc:
            raise PacBayesError(f"bad CSV row {row!r}: {exc}", code="BAD_ROW")

    from .core import ClassifierEntry, validate_profile

    entries = tuple(
        ClassifierEntry(id=i, emp_risk=e, param_value=p, test_err=t)
        for i, e, p, t in zip(ids, emps, params, tests)
    )
    return validate_profile(RiskProfile(entries=entries, sample_size=m))


def _read_prior(spec: str, n: int) -> DiscreteDistribution:
    if spec == "uniform":
        return DiscreteDistribution.uniform(n)
    try:
        with open(spec, "r", encoding="utf-8") as fh:
            vals = []
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#") or line == "weight":
                    continue
                vals.append(float(line.split(",")[0]))
    except OSError as exc:
        raise PacBayesError(f"cannot read prior {spec}: {exc}", code="IO_ERROR")
    except ValueError as exc:
        raise PacBayesError(f"bad prior file {spec}: {exc}", code="BAD_ROW")
    if len(vals) != n:
        raise PacBayesError(
            f"prior has {len(vals)} weights for {n} classifiers", code="SIZE_MISMATCH"
        )
    return make_distribution(vals)


def _write_text(path: Optional[str], text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _result_json(
    kind: DistanceKind,
    result: PosteriorResult,
    profile: RiskProfile,
    policy: ConstantPolicy,
    delta: float,
    seed: Optional[int],
) -> dict:
    test_err = None
    if profile.test_errors is not None:
        test_err = gibbs_test_error(result.posterior, profile)
    return {
        "phi": kind.value,
        "bound": result.bound,
        "gibbs_emp_risk": result.detail.gibbs_emp_risk,
        "gibbs_test_error": test_err,
        "posterior": [float(w) for w in result.posterior.weights],
        "support_size": result.support_size,
        "iterations": result.iterations,
        "residual": result.residual,
        "converged": result.converged,
        "hhi": hhi(result.posterior),
        "log_ik": result.detail.log_ik,
        "constant_policy": policy.value,
        "delta": delta,
        "m": profile.sample_size,
        "seed": seed,
    }


def _report_json(report: ComparisonReport) -> dict:
    rows = []
    for r in report.rows:
        rows.append(
            {
                "phi": r.kind.value,
                "bound": r.bound,
                "gibbs_emp_risk": r.gibbs_emp_risk,
                "gibbs_test_error": r.gibbs_test_error,
                "hhi": r.hhi,
                "support_size": r.support_size,
                "iterations": r.iterations,
                "residual": r.residual,
                "converged": r.converged,
                "wall_time": r.wall_time,
                "error": r.error,
            }
        )
    return {
        "delta": report.delta,
        "m": report.sample_size,
        "constant_policy": report.constant_policy.value,
        "rows": rows,
    }


def _build_parser() -> _Parser:
    parser = _Parser(prog="pacbayes", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    phis = [k.value for k in DistanceKind]
    policies = [p.value for p in ConstantPolicy]

    p = sub.add_parser("constants", parents=[], help="print a threshold constant")
    p.add_argument("--phi", required=True, choices=phis)
    p.add_argument("--m", required=True, type=int)
    p.add_argument("--policy", default="exact", choices=policies)

    p = sub.add_parser("klroot", help="invert the binary kl at a level")
    p.add_argument("--phat", required=True, type=float)
    p.add_argument("--x", required=True, type=float)
    p.add_argument("--tol", default=1e-12, type=float)
    p.add_argument("--eps", default=1e-12, type=float)

    def add_profile_args(p):
        p.add_argument("--risks", required=True, help="profile CSV path")
        p.add_argument("--m", type=int, default=None, help="sample size if not in the CSV")
        p.add_argument("--delta", required=True, type=float)
        p.add_argument("--policy", default="exact", choices=policies)
        p.add_argument("--out", default=None, help="output path (default stdout)")

    p = sub.add_parser("bound", help="evaluate a bound at a fixed posterior")
    add_profile_args(p)
    p.add_argument("--phi", required=True, choices=phis)
    p.add_argument("--q", default="uniform", help="'uniform' or comma-separated weights")

    p = sub.add_parser("optimize", help="optimize the posterior for one kind")
    add_profile_args(p)
    p.add_argument("--phi", required=True, choices=phis)
    p.add_argument("--prior", default="uniform", help="'uniform' or a weights CSV path")
    p.add_argument("--prefix-search", action="store_true")
    p.add_argument("--tol", default=1e-10, type=float)
    p.add_argument("--max-iters", default=10000, type=int)
    p.add_argument("--damping", default=1.0, type=float)
    p.add_argument("--seed", default=None, type=int, help="random-init seed (default: prior init)")

    p = sub.add_parser("compare", help="optimize all five kinds and report")
    add_profile_args(p)
    p.add_argument("--tol", default=1e-10, type=float)
    p.add_argument("--max-iters", default=10000, type=int)

    p = sub.add_parser("gen", help="generate a synthetic profile CSV")
    p.add_argument("--h", required=True, type=int)
    p.add_argument("--v", required=True, type=int)
    p.add_argument("--shape", required=True, choices=[s.value for s in ProfileShape])
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--test-size", default=None, type=int)
    p.add_argument("--out", default=None, help="output path (default stdout)")

    return parser


def _cmd_constants(args) -> int:
    res = ik_constant(DistanceKind(args.phi), args.m, ConstantPolicy(args.policy))
    argmax = "n/a" if math.isnan(res.argmax_l) else format(res.argmax_l, ".6f")
    value = math.exp(res.log_value) if res.log_value < 700 else math.inf
    value_txt = format(value, ".6e") if math.isfinite(value) else "overflows float64"
    print(
        f"I_{args.phi}(m={args.m}, policy={args.policy}): "
        f"log = {_fmt17(res.log_value)}  value = {value_txt}  argmax_l = {argmax}"
    )
    return 0


def _cmd_klroot(args) -> int:
    req = KlRootRequest(phat=args.phat, x=args.x, tol=args.tol, eps=args.eps)
    lower, lo_sat = kl_lower_root_batch(
        np.array([req.phat]), np.array([req.x]), req.tol, req.eps
    )
    upper, _, up_sat = kl_upper_root_batch(
        np.array([req.phat]), np.array([req.x]), req.tol, req.eps
    )
    lo_note = "  [saturated]" if lo_sat[0] else ""
    up_note = "  [saturated]" if up_sat[0] else ""
    print(f"lower = {_fmt17(float(lower[0]))}{lo_note}")
    print(f"upper = {_fmt17(float(upper[0]))}{up_note}")
    return 0


def _cmd_bound(args) -> int:
    profile = read_profile_csv(args.risks, args.m)
    if args.q == "uniform":
        q = DiscreteDistribution.uniform(len(profile))
    else:
        try:
            q = make_distribution([float(v) for v in args.q.split(",")])
        except ValueError as exc:
            raise PacBayesError(f"bad --q weights: {exc}", code="BAD_ROW")
    spec = BoundSpec(kind=DistanceKind(args.phi), delta=args.delta, constant_policy=args.policy)
    bv = evaluate_bound(spec, q, profile)
    payload = {
        "phi": spec.kind.value,
        "bound": bv.value,
        "gibbs_emp_risk": bv.gibbs_emp_risk,
        "kl_qp": bv.kl_qp,
        "log_ik": bv.log_ik,
        "saturated": bv.saturated,
        "constant_policy": spec.constant_policy.value,
        "delta": args.delta,
        "m": profile.sample_size,
    }
    _write_text(args.out, to_json(payload))
    return 0


def _cmd_optimize(args) -> int:
    profile = read_profile_csv(args.risks, args.m)
    kind = DistanceKind(args.phi)
    policy = ConstantPolicy(args.policy)
    prior = _read_prior(args.prior, len(profile))
    config = FixedPointConfig(
        tol=args.tol,
        max_iters=args.max_iters,
        damping=args.damping,
        init=InitScheme.RANDOM if args.seed is not None else InitScheme.PRIOR,
        seed=args.seed,
    )
    if args.prefix_search:
        result = prefix_search(kind, profile, args.delta, config, policy, prior=prior)
    elif kind is DistanceKind.LIN:
        result = optimal_posterior_linear(profile, prior, args.delta, policy)
    else:
        result = fp_solve(kind, profile, prior, args.delta, config, policy)
    payload = _result_json(kind, result, profile, policy, args.delta, args.seed)
    _write_text(args.out, to_json(payload))
    return 0 if result.converged else 3


def _cmd_compare(args) -> int:
    profile = read_profile_csv(args.risks, args.m)
    config = FixedPointConfig(tol=args.tol, max_iters=args.max_iters)
    report = compare_all(profile, args.delta, config, ConstantPolicy(args.policy))
    _write_text(args.out, to_json(_report_json(report)))
    bad = any(r.error is not None or r.converged is False for r in report.rows)
    return 3 if bad else 0


def _cmd_gen(args) -> int:
    spec = GeneratorSpec(
        h=args.h, v=args.v, shape=ProfileShape(args.shape), seed=args.seed,
        test_size=args.test_size,
    )
    profile = generate_profile(spec)
    comments = {
        "rng": RNG_ALGORITHM,
        "shape": spec.shape.value,
        "seed": spec.seed,
    }
    if spec.test_size is not None:
        comments["test_size"] = spec.test_size
    buf = io.StringIO()
    write_profile_csv(profile, buf, comments)
    _write_text(args.out, buf.getvalue())
    return 0


def run(argv) -> int:
    """Dispatch a CLI invocation; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    handlers = {
        "constants": _cmd_constants,
        "klroot": _cmd_klroot,
        "bound": _cmd_bound,
        "optimize": _cmd_optimize,
        "compare": _cmd_compare,
        "gen": _cmd_gen,
    }
    try:
        return handlers[args.command](args)
    except PacBayesError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error[IO_ERROR]: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
