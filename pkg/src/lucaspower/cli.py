"""Command-line front end: search, cfrac, reduce, bound, prove."""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional

from . import exactreal as er
from . import cfrac, linforms, prover, reduction, sequences
from .errors import LucasPowerError, ReductionError, StageError
from .exactreal import PrecReal

EXIT_OK, EXIT_USAGE, EXIT_PRECISION, EXIT_EPSILON, EXIT_STAGE = 0, 2, 3, 4, 5


@dataclass(frozen=True)
class CliConfig:
    precision_start: int = er.DEFAULT_PREC
    precision_ceiling: int = er.DEFAULT_CEILING
    output_path: Optional[str] = None
    format: str = "human"

    def __post_init__(self):
        if self.precision_start > self.precision_ceiling:
            raise ValueError("--prec must not exceed --prec-max")


class UsageError(ValueError):
    pass


# constant mini-language ----------------------------------------------------------
#   expr  := prod (('+' | '-') prod)*
#   prod  := term (('*' | '/') term)*
#   term  := '-' term | number | name | 'log(' expr ')' | 'sqrt(' expr ')' | '(' expr ')'

_NAMES = {
    "alpha": lambda prec: er.const_eval("alpha", prec),
    "golden": lambda prec: er.const_eval("alpha", prec),
    "beta": lambda prec: er.const_eval("beta", prec),
    "sqrt5": lambda prec: er.const_eval("sqrt5", prec),
}
_TOKEN = re.compile(r"\s*(\d+(?:\.\d+)?(?:/\d+(?![\d.]))?|[A-Za-z_][A-Za-z_0-9]*|[()*/+\-])")


def _tokens(text: str) -> List[str]:
    out, pos = [], 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise UsageError(f"cannot parse constant {text!r} at {text[pos:]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


def parse_constant(text: str) -> er.Source:
    """Turn e.g. ``log(3)/log(alpha)`` or ``0.5`` into a precision-indexed source."""
    toks = _tokens(text)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else None

    def take(expect=None):
        nonlocal pos
        tok = peek()
        if tok is None or (expect is not None and tok != expect):
            raise UsageError(f"malformed constant {text!r}")
        pos += 1
        return tok

    def term() -> Callable[[int], PrecReal]:
        tok = take()
        if tok == "-":
            inner = term()
            return lambda prec: -inner(prec)
        if tok == "(":
            inner = expr()
            take(")")
            return inner
        if tok in ("log", "sqrt"):
            take("(")
            inner = expr()
            take(")")
            fn = er.ln if tok == "log" else er.sqrt
            return lambda prec: fn(inner(prec))
        if tok in _NAMES:
            return _NAMES[tok]
        if tok[0].isdigit():
            value = Fraction(tok)
            return lambda prec: PrecReal.exact(value, prec)
        raise UsageError(f"unknown name {tok!r} in constant {text!r}")

    def chain(sub, ops):
        def parse():
            left = sub()
            while peek() in ops:
                op, right = take(), sub()
                left = (lambda l, r, f: (lambda prec: f(l(prec), r(prec))))(left, right, ops[op])
            return left
        return parse

    prod = chain(term, {"*": er.mul, "/": er.div})
    expr = chain(prod, {"+": er.add, "-": er.sub})

    src = expr()
    if pos != len(toks):
        raise UsageError(f"trailing input in constant {text!r}")
    return src


# output -----------------------------------------------------------------------

def _enc(x: PrecReal) -> dict:
    approx, err = er.to_decimal(x)
    return {"approx": approx, "err": err}


def _emit(cfg: CliConfig, human: List[str], payload: dict, out=None):
    out = out or sys.stdout
    if cfg.format == "json":
        out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        for line in human:
            out.write(line + "\n")


def _spec(name: str, a_param: int = 1) -> sequences.RecurrenceSpec:
    return sequences.RecurrenceSpec(sequences.Kind(name), a_param)


# commands ------------------------------------------------------------------------

def cmd_search(args, cfg: CliConfig) -> int:
    spec = _spec(args.seq, args.a_param)
    sols = sequences.search_solutions(spec, args.p, args.nmax, allow_equal=args.allow_equal,
                                      m_min=args.m_min, a_min=args.a_min, workers=args.workers)
    letter = "L" if spec.kind is sequences.Kind.LUCAS else "F"
    human = [f"{t.n} {t.m} {t.a_exp}  {letter}_{t.n}+{letter}_{t.m}={args.p}^{t.a_exp}" for t in sols]
    payload = {"sequence": args.seq, "p": str(args.p), "n_max": str(args.nmax),
               "solutions": [[str(t.n), str(t.m), str(t.a_exp)] for t in sols]}
    _emit(cfg, human, payload)
    return EXIT_OK


def cmd_cfrac(args, cfg: CliConfig) -> int:
    src = parse_constant(args.x)
    cf = cfrac.expand(src, args.count, max(cfg.precision_start, 512), max(cfg.precision_ceiling, 512))
    convs = cf.convergents()
    if args.index is not None:
        if not 0 <= args.index <= args.count:
            raise UsageError("--index must lie in 0..count")
        convs = [convs[args.index]]
    if args.emit == "a":
        rows = [str(cf.quotients[c.index]) for c in convs] if args.index is not None else \
            [" ".join(map(str, cf.quotients))]
    elif args.emit == "q":
        rows = [str(c.q) for c in convs]
    else:
        rows = [f"{c.index} a={cf.quotients[c.index]} p={c.p} q={c.q}" for c in convs]
    payload = {"x": args.x, "prec_used": str(cf.prec_used),
               "quotients": [str(a) for a in cf.quotients],
               "convergents": [{"k": str(c.index), "p": str(c.p), "q": str(c.q)} for c in convs]}
    _emit(cfg, rows, payload)
    return EXIT_OK


def _reduce_result_payload(res: reduction.ReductionResult, inst) -> dict:
    out = {"method": res.method, "reduced_bound": str(res.reduced_bound), "variable": inst.variable,
           "q": None if res.q_used is None else str(res.q_used),
           "epsilon": None if res.epsilon is None else _enc(res.epsilon),
           "attempts": [[str(q), s] for q, s in res.attempts]}
    if res.a_max_quot is not None:
        out["a_max_quot"] = str(res.a_max_quot)
    return out


def cmd_reduce(args, cfg: CliConfig) -> int:
    prec, ceiling = cfg.precision_start, cfg.precision_ceiling
    if args.case:
        if args.gap is None or args.M is None:
            raise UsageError("--case needs --gap and --M")
        sign = reduction.CaseSign.Z_POSITIVE if args.case == "pos" else reduction.CaseSign.Z_NEGATIVE
        inst = reduction.build_case_instance(sign, args.gap, args.p, int(Fraction(args.M)))
        res = reduction.reduce_instance(inst, prec=prec, ceiling=ceiling)
    else:
        missing = [n for n in ("kappa", "mu", "A", "B", "M") if getattr(args, n) is None]
        if missing:
            raise UsageError("missing " + ", ".join("--" + n for n in missing))
        M = Fraction(args.M)
        if M.denominator != 1:
            raise UsageError("--M must be an integer")
        inst = reduction.ReductionInstance(parse_constant(args.kappa), parse_constant(args.mu),
                                           parse_constant(args.A), parse_constant(args.B), int(M))
        try:
            res = reduction.dujella_petho(inst, prec=prec, ceiling=ceiling)
        except ReductionError as exc:
            _emit(cfg, [f"epsilon failure: {exc}"] + [f"  q={q} {s}" for q, s in exc.attempts],
                  {"error": str(exc), "attempts": [[str(q), s] for q, s in exc.attempts]})
            return EXIT_EPSILON
    payload = _reduce_result_payload(res, inst)
    human = [f"method {res.method}"]
    if res.q_used is not None:
        approx, err = er.to_decimal(res.epsilon)
        human += [f"q {res.q_used}", f"epsilon {approx} +/- {err}"]
    human.append(f"reduced bound {res.reduced_bound}")
    _emit(cfg, human, payload)
    return EXIT_OK


def cmd_bound(args, cfg: CliConfig) -> int:
    cb = linforms.derive_crude_bounds(args.p, args.n_floor, cfg.precision_start)
    encs = {
        "c1": cb.a_coeff, "bprime_coeff": cb.bprime_coeff, "lmn_aggregate": cb.lmn_aggregate,
        "gap_coeff": cb.gap_coeff, "matveev_C": cb.matveev_C, "log_guard": cb.log_guard,
        "three_log_coeff": cb.three_log_coeff, "combined_coeff": cb.combined_coeff,
    }
    ints = {"logA_alpha": cb.logA_alpha, "logA_p": cb.logA_p, "A_p": cb.matveev_A[0],
            "A_alpha": cb.matveev_A[1], "branch_const_bound": cb.branch_const_bound,
            "branch_log_bound": cb.branch_log_bound, "n_upper": cb.n_upper}
    human = [f"{k} {er.to_decimal(v, 12)[0]}" for k, v in encs.items()]
    human += [f"{k} {v}" for k, v in ints.items()]
    payload = {k: _enc(v) for k, v in encs.items()}
    payload.update({k: str(v) for k, v in ints.items()})
    payload["checks"] = {k: bool(v) for k, v in cb.checks.items()}
    _emit(cfg, human, payload)
    return EXIT_OK


def cmd_prove(args, cfg: CliConfig) -> int:
    pcfg = prover.ProverConfig(precision_start=cfg.precision_start,
                               precision_ceiling=cfg.precision_ceiling)
    cert = prover.prove(_spec(args.seq, args.a_param), args.p, args.limit, pcfg)
    doc = cert.to_json()
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            fh.write(prover.dumps(doc))
    ok = cert.valid and prover.verify_certificate(doc)
    sols = ", ".join(f"({t.n},{t.m},{t.a_exp})" for t in cert.conclusion)
    if ok:
        line = f"PROVED: solutions = {{{sols}}}"
    elif cert.status == "partial":
        line = f"PARTIAL: stages S1-S3 only; solutions with n <= {args.limit} = {{{sols}}}"
    else:
        line = f"FAILED at stage {cert.failed_stage or 'verification'}"
        if cert.failure:
            line += f": {cert.failure}"
    payload = {"status": "proved" if ok else cert.status, "summary": line,
               "failed_stage": cert.failed_stage,
               "solutions": [[str(t.n), str(t.m), str(t.a_exp)] for t in cert.conclusion],
               "body_sha256": doc["environment"]["body_sha256"]}
    _emit(cfg, [line], payload)
    return EXIT_OK if ok else EXIT_STAGE


# parser --------------------------------------------------------------------------

def _positive_prime(text: str) -> int:
    p = int(text)
    if p < 2 or any(p % d == 0 for d in range(2, int(p ** 0.5) + 1)):
        raise argparse.ArgumentTypeError(f"{text} is not a prime")
    return p


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument("--format", choices=("human", "json"), default="human")
    common.add_argument("--prec", type=int, default=er.DEFAULT_PREC, help="starting precision in bits")
    common.add_argument("--prec-max", type=int, default=er.DEFAULT_CEILING, help="precision ceiling in bits")

    parser = argparse.ArgumentParser(prog="lucaspower", description=__doc__, allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def seq_flags(p):
        p.add_argument("--seq", choices=("lucas", "fibonacci"), default="lucas")
        p.add_argument("--a-param", type=int, default=1, help="recurrence U_{n+2} = a U_{n+1} + U_n")
        p.add_argument("--p", type=_positive_prime, default=3)

    s = sub.add_parser("search", parents=[common], allow_abbrev=False,
                       help="exhaustive search for small solutions")
    seq_flags(s)
    s.add_argument("--nmax", type=_nonneg, default=200)
    s.add_argument("--allow-equal", action="store_true", help="include n = m")
    s.add_argument("--m-min", type=_nonneg, default=0)
    s.add_argument("--a-min", type=_nonneg, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_search)

    c = sub.add_parser("cfrac", parents=[common], allow_abbrev=False,
                       help="certified continued fraction")
    c.add_argument("--x", default="log(3)/log(alpha)")
    c.add_argument("--count", type=_nonneg, default=14, help="last quotient index")
    c.add_argument("--emit", choices=("a", "q", "all"), default="a")
    c.add_argument("--index", type=int)
    c.set_defaults(func=cmd_cfrac)

    r = sub.add_parser("reduce", parents=[common], allow_abbrev=False,
                       help="Dujella-Petho reduction")
    for name in ("kappa", "mu", "A", "B"):
        r.add_argument(f"--{name}")
    r.add_argument("--M")
    r.add_argument("--case", choices=("pos", "neg"), help="use the built-in gap instance")
    r.add_argument("--gap", type=int)
    r.add_argument("--p", type=_positive_prime, default=3)
    r.set_defaults(func=cmd_reduce)

    b = sub.add_parser("bound", parents=[common], allow_abbrev=False,
                       help="linear-forms bounds")
    b.add_argument("--p", type=_positive_prime, default=3)
    b.add_argument("--n-floor", type=int, default=200)
    b.set_defaults(func=cmd_bound)

    pr = sub.add_parser("prove", parents=[common], allow_abbrev=False,
                       help="run the full pipeline and write a certificate")
    seq_flags(pr)
    pr.add_argument("--limit", type=_nonneg, default=200)
    pr.add_argument("-o", "--output")
    pr.set_defaults(func=cmd_prove)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = CliConfig(args.prec, args.prec_max, getattr(args, "output", None), args.format)
        return args.func(args, cfg)
    except StageError as exc:
        print(f"FAILED at stage {exc}", file=sys.stderr)
        return EXIT_STAGE
    except LucasPowerError as exc:
        kind = {EXIT_PRECISION: "precision error", EXIT_EPSILON: "epsilon failure"}.get(exc.exit_code, "error")
        print(f"{kind}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

if __name__ == "__main__":
    sys.exit(main())
