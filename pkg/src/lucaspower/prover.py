"""The seven-stage proof of U_n + U_m = p^a and its JSON certificate.

Stages::

    S1  exhaustive search for n <= search_limit
    S2  the n = m case
    S3  a < (n + 2) log 2 / log p
    S4  two-logarithm bound on the gap n - m
    S5  three-logarithm bound on n and the bound M >= n + 2 on a
    S6  continued fraction of log p / log alpha and the gap bound G
    S7  reduction sweeps over gaps 1..G, both signs of z
"""

from __future__ import annotations

import copy
import hashlib
import json
import platform
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, List, Optional

import gmpy2

from . import __version__
from . import exactreal as er
from . import cfrac, linforms, reduction, sequences
from .errors import CertificateError, LucasPowerError, StageError
from .exactreal import PrecReal
from .sequences import Kind, RecurrenceSpec, SolutionTriple

CERT_VERSION = 1
STAGE_NAMES = ("S1", "S2", "S3", "S4", "S5", "S6", "S7")
CANONICAL_QUOTIENTS = (1, 2, 3, 1, 1, 2, 3, 2, 4, 2, 1, 11, 2, 1, 11)


@dataclass(frozen=True)
class ProverConfig:
    precision_start: int = er.DEFAULT_PREC
    precision_ceiling: int = er.DEFAULT_CEILING
    cf_precision: int = 512
    bound_M: int = 12 * 10 ** 19
    retries: int = reduction.RETRIES
    cf_count: int = 60

    def __post_init__(self):
        if self.precision_start > self.precision_ceiling:
            raise ValueError("precision_start must not exceed precision_ceiling")


# certificate building blocks ---------------------------------------------------------

def _enc(x: PrecReal) -> Dict[str, str]:
    approx, err = er.to_decimal(x)
    return {"approx": approx, "err": err}


def claim(key: str, description: str, value: Any = None, enclosure: Optional[PrecReal] = None,
          paper_value: Optional[str] = None, check: Optional[tuple] = None) -> Dict[str, Any]:
    out: Dict[str, Any] = {"key": key, "description": description}
    if value is not None:
        out["value"] = _stringify(value)
    if enclosure is not None:
        out["enclosure"] = _enc(enclosure)
    if paper_value is not None:
        out["paper_value"] = paper_value
    if check is not None:
        op, bound = check
        out["check"] = {"op": op, "bound": _stringify(bound)}
    return out


def _stringify(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple)):
        return [_stringify(x) for x in v]
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return str(v)


@dataclass
class Stage:
    name: str
    title: str
    claims: List[Dict[str, Any]] = field(default_factory=list)
    status: str = "certified"

    def add(self, *args, **kwargs):
        self.claims.append(claim(*args, **kwargs))

    def to_json(self):
        return {"name": self.name, "title": self.title, "claims": self.claims, "status": self.status}


@dataclass
class ProofCertificate:
    equation: Dict[str, Any]
    search_limit: int
    stages: List[Stage]
    conclusion: List[SolutionTriple]
    notes: List[str]
    config: ProverConfig
    status: str = "proved"
    failed_stage: Optional[str] = None
    failure: Optional[str] = None

    @property
    def valid(self) -> bool:
        return self.status == "proved"

    def stage(self, name: str) -> Stage:
        for s in self.stages:
            if s.name == name:
                return s
        raise KeyError(name)

    def to_json(self, timestamp: Optional[str] = None) -> Dict[str, Any]:
        doc = {
            "cert_version": CERT_VERSION,
            "equation": self.equation,
            "search_limit": str(self.search_limit),
            "status": self.status,
            "failed_stage": self.failed_stage,
            "failure": self.failure,
            "stages": [s.to_json() for s in self.stages],
            "conclusion": [[str(t.n), str(t.m), str(t.a_exp)] for t in self.conclusion],
            "notes": list(self.notes),
            "environment": {
                "config": {k: str(v) for k, v in asdict(self.config).items()},
                "package_version": __version__,
            },
        }
        doc["environment"]["body_sha256"] = body_hash(doc)
        doc["environment"]["runtime"] = {
            "generated_at": timestamp or datetime.now(timezone.utc).isoformat(),
            "python": platform.python_version(),
            "gmpy2": gmpy2.version(),
            "mpfr": gmpy2.mpfr_version(),
        }
        return doc


def _hashed_view(doc: Dict[str, Any]) -> Dict[str, Any]:
    view = copy.deepcopy(doc)
    env = view.get("environment", {})
    env.pop("runtime", None)
    env.pop("body_sha256", None)
    return view


def certificate_body(doc: Dict[str, Any]) -> bytes:
    """Canonical bytes of everything except wall-clock/runtime data."""
    return json.dumps(_hashed_view(doc), sort_keys=True, separators=(",", ":")).encode()


def body_hash(doc: Dict[str, Any]) -> str:
    return hashlib.sha256(certificate_body(doc)).hexdigest()


def dumps(doc: Dict[str, Any]) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# the stages -----------------------------------------------------------------------

def _ref(canonical: bool, value: str) -> Optional[str]:
    return value if canonical else None


def _stage_search(spec, p, limit) -> (Stage, List[SolutionTriple]):
    st = Stage("S1", "exhaustive search over 0 <= m < n <= search_limit")
    sols = sequences.search_solutions(spec, p, limit)
    st.add("range", "search range n_max", limit)
    st.add("solutions", "all (n, m, a) found", [f"{t.n} {t.m} {t.a_exp}" for t in sols])
    st.add("count", "number of solutions", len(sols))
    return st, sols


def _stage_equal(spec, p) -> Stage:
    st = Stage("S2", "the case n = m")
    if p % 2 == 1:
        st.add("parity", "2*U_n is even and >= 2 while p^a is odd, so 2*U_n = p^a has no solution",
               p % 2 == 1, check=("eq", True))
        st.add("lucas_nonzero", "L_n >= 1 for all n >= 0", True)
    else:
        st.status = "open"
        st.add("parity", "p = 2: the doubled-term equation is not excluded by parity", "even p")
    return st


def _stage_a_bound(p, prec, canonical) -> (Stage, PrecReal):
    st = Stage("S3", "a < (n + 2) c1 with c1 = log 2 / log p")
    c1 = er.const_eval("log2", prec) / er.const_eval("log_p", prec, p=p)
    st.add("c1", "c1 = log 2 / log p", enclosure=c1, paper_value=_ref(canonical, "0.63093"))
    st.add("chain", "p^a = U_n + U_m <= 2 alpha^n + 2 alpha^m < 2^(n+1)(1 + 2^(m-n)) <= 3 * 2^n < 2^(n+2)",
           "corrected exponent m-n")
    return st, c1


def _require(check_ok: bool, what: str, stage: str = "S4"):
    if not check_ok:
        raise StageError(stage, what)


def _stage_lmn(cb: linforms.CrudeBounds, prec, canonical) -> Stage:
    st = Stage("S4", "two-logarithm bound on the gap n - m")
    la = cb.log_alpha
    st.add("h_alpha", "h(alpha) = (1/2) log alpha", enclosure=linforms.height(linforms.golden_ratio(), prec),
           paper_value=_ref(canonical, "0.2406"))
    st.add("h_p", "h(p) = log p", enclosure=linforms.height(linforms.rational_integer(cb.p), prec),
           paper_value=_ref(canonical, "1.09862"))
    st.add("logA1", "log A_1 for alpha", cb.logA_alpha, paper_value=_ref(canonical, "0.5"))
    st.add("logA2", "log A_2 for p", cb.logA_p, paper_value=_ref(canonical, "1.1"))
    st.add("logA_valid", "log A_i >= max{h, |log g|/D, 1/D}", cb.checks["lmn_parameters_valid"],
           check=("eq", True))
    st.add("independent", "alpha and p multiplicatively independent (alpha is a unit of norm -1)",
           cb.checks["independent"], check=("eq", True))
    st.add("bprime_coeff", "b' < bprime_coeff * n for n > n_floor", enclosure=cb.bprime_coeff,
           check=("<", 2))
    st.add("lmn_aggregate", "30.9 * D^4 * logA1 * logA2", enclosure=cb.lmn_aggregate,
           paper_value=_ref(canonical, "272"), check=("<=", 272) if canonical else None)
    st.add("gap_coeff", "(n - m) log alpha < gap_coeff * max{log 2n, 21/2}^2", enclosure=cb.gap_coeff,
           paper_value=_ref(canonical, "276"), check=("<=", 276) if canonical else None)
    st.add("log_alpha", "log alpha", enclosure=la)
    for key in ("lmn_parameters_valid", "independent"):
        _require(cb.checks[key], key)
    _require(cb.checks["bprime_below_2n"], "b' bound")
    return st


def _stage_matveev(cb: linforms.CrudeBounds, M: int, canonical) -> Stage:
    st = Stage("S5", "three-logarithm bound on n")
    st.add("A_p", "A for p: >= max{2 h(p), |log p|, 0.16}", cb.matveev_A[0], paper_value=_ref(canonical, "2.2"))
    st.add("A_alpha", "A for alpha", cb.matveev_A[1], paper_value=_ref(canonical, "0.5"))
    st.add("A3", "A for 1 + alpha^(m-n): 2 + (n - m) log alpha absorbs 2 log 2",
           cb.checks["matveev_A3_absorbs_2log2"], check=("eq", True))
    st.add("C", "1.4 * 30^6 * 3^4.5 * D^2 * (1 + log D)", enclosure=cb.matveev_C,
           paper_value=_ref(canonical, "9.7e11"), check=("<=", "9.7e11") if canonical else None)
    st.add("log_guard", "1 + log(n+1) <= r log n for n > n_floor (decreasing ratio, checked at n_floor+1)",
           enclosure=cb.log_guard, paper_value=_ref(canonical, "2"), check=("<", 2))
    st.add("three_log_coeff", "n log alpha - log 2 < K log n (2 + (n - m) log alpha)", enclosure=cb.three_log_coeff,
           paper_value=_ref(canonical, "1.26e12"))
    st.add("combined_coeff", "n < c log n max{log 2n, 21/2}^2", enclosure=cb.combined_coeff,
           paper_value=_ref(canonical, "7.3e14"), check=("<=", "7.3e14") if canonical else None)
    st.add("branch_const", "n < c' log n when the max is 21/2", cb.branch_const_bound,
           paper_value=_ref(canonical, "3.5e18"), check=("<=", "3.5e18") if canonical else None)
    st.add("branch_log", "fixed point of n = c log n log^2(2n)", cb.branch_log_bound,
           paper_value=_ref(canonical, "7.2e19"), check=("<=", "7.2e19") if canonical else None)
    st.add("n_upper", "certified: every solution with n > n_floor has n <= n_upper", cb.n_upper)
    st.add("bound_M", "a <= n + 2 <= M", M, paper_value=_ref(canonical, "1.2e20"),
           check=(">=", cb.n_upper + 2))
    _require(M >= cb.n_upper + 2, "bound M below n_upper + 2", "S5")
    _require(cb.checks["matveev_A3_absorbs_2log2"] and cb.checks["ratio_decreasing_from"],
             "three-logarithm preconditions", "S5")
    return st


def _stage_cfrac(p, M, config, canonical):
    st = Stage("S6", "continued fraction of kappa = log p / log alpha and the gap bound")
    kappa = lambda prec: er.const_eval("log_p", prec, p=p) / er.const_eval("log_alpha", prec)
    cf = cfrac.expand(kappa, config.cf_count, config.cf_precision, config.precision_ceiling)
    K, cf = cfrac.index_covering(cf, M)
    a_m = cfrac.max_quotient(cf, K)
    prev, cur = cf.convergents()[K - 1], cf.convergents()[K]
    prec = config.precision_start
    st.add("quotients", "certified partial quotients a_0..", list(cf.quotients),
           paper_value=_ref(canonical, " ".join(map(str, CANONICAL_QUOTIENTS))))
    st.add("cf_precision", "working precision of the certified expansion", cf.prec_used)
    st.add("K", "least index with q_K > M", K, paper_value=_ref(canonical, "42"))
    st.add("q_prev", "q_(K-1) <= M", prev.q, paper_value=_ref(canonical, "4977896525362041575"),
           check=("<=", M))
    st.add("q_K", "q_K > M", cur.q, paper_value=_ref(canonical, "805929983250536127817"),
           check=(">", M))
    st.add("a_M", "max a_i for i = 0..K", a_m, paper_value=_ref(canonical, "161"))
    three = PrecReal.exact(3, prec) / er.const_eval("log_alpha", prec)
    st.add("legendre_const", "3 / log alpha <= 7", enclosure=three, check=("<=", 7))
    direct = cfrac.legendre_lower_verified(cf, kappa, a_m, K, config.cf_precision)
    st.add("legendre_direct", "|q_k kappa - p_k| > 1/((a_M + 2) q_k) for k < K", direct, check=("eq", True))
    G, threshold = cfrac.legendre_gap_bound(a_m, M, 7, prec)
    st.add("threshold", "alpha^(n-m) < 7 (a_M + 2) M", enclosure=threshold,
           paper_value=_ref(canonical, "1.3692e23"))
    st.add("G", "n - m <= G", G, paper_value=_ref(canonical, "110"), check=("<", 111) if canonical else None)
    if not (three.upper <= 7 and direct):
        raise StageError("S6", "gap bound preconditions failed")
    return st, G, cf


def _stage_reduction(p, M, G, n_floor, search_limit, config, canonical) -> (Stage, Dict[str, int]):
    st = Stage("S7", "reduction sweeps over gaps 1..G")
    prec = config.precision_start
    la = er.const_eval("log_alpha", prec)
    st.add("absorb_pos", "2 / log alpha <= 5 (z > 0 constant)", enclosure=PrecReal.exact(2, prec) / la,
           check=("<=", 5))
    st.add("absorb_neg", "4 / log p <= A for z < 0", enclosure=PrecReal.exact(4, prec) / er.const_eval("log_p", prec, p=p),
           check=("<=", reduction.negative_case_A(p)))
    _require((PrecReal.exact(2, prec) / la).upper <= 5
             and (4 / er.const_eval("log_p", prec, p=p)).upper <= reduction.negative_case_A(p),
             "reduction constants do not absorb the error terms", "S7")
    st.add("sixM", "convergent threshold 6M", 6 * M)
    st.add("retries", "convergents tried per gap", config.retries)
    maxima = {}
    for case, ref in ((reduction.CaseSign.Z_POSITIVE, "112"), (reduction.CaseSign.Z_NEGATIVE, "111")):
        tag = "pos" if case is reduction.CaseSign.Z_POSITIVE else "neg"
        try:
            sweep = reduction.run_reduction_sweep(case, range(1, G + 1), p, M, prec, config.precision_ceiling)
        except LucasPowerError as exc:
            raise StageError("S7", f"{case.value}: {exc}") from exc
        for rec in sweep.per_gap:
            r = rec.result
            desc = f"{case.value} gap {rec.gap}: {r.method}"
            if r.method == "dujella-petho":
                st.add(f"{tag}_gap_{rec.gap}", f"{desc}, q = {r.q_used}, bound on {'a' if tag == 'pos' else 'n'}",
                       [r.reduced_bound, rec.n_bound], enclosure=r.epsilon, check=(">", 0))
            else:
                st.add(f"{tag}_gap_{rec.gap}", f"{desc}, a_M = {r.a_max_quot}",
                       [r.reduced_bound, rec.n_bound])
        st.add(f"{tag}_max", f"{case.value}: max bound on n over all gaps", sweep.max_n_bound,
               paper_value=_ref(canonical, ref), check=("<=", n_floor))
        maxima[tag] = sweep.max_n_bound
    worst = max(maxima.values())
    closes = worst <= n_floor and n_floor <= search_limit
    st.add("contradiction", "every solution with n > n_floor has n <= max bound <= n_floor",
           closes, check=("eq", True))
    if not closes:
        raise StageError("S7", f"reduced bound {worst} does not close the search limit {search_limit}")
    return st, maxima


def canonical_notes(quotients_differ: bool) -> List[str]:
    """Corrections to the reference derivation that the certified values rely on."""
    notes = [
        "Bound on a: p^a <= 2^(n+1)(1 + 2^(m-n)) < 2^(n+2); the variant with 2^(n-m) does not give a < (n+2) c1.",
        "Three-logarithm bound used with D the field degree throughout and the factor (1 + log B).",
        "Three-logarithm coefficient: 2*1.1*C exceeds the reference 1.26e12; the guard 1+log(n+1) <= 1.19 log n "
        "(n > 200) gives 1.2689e12, and the later roundings 7.3e14, 7.2e19, 1.2e20 remain valid upper bounds.",
        "Gap shift for z < 0 is log rho(n-m)/log p, not rho(n-m)/log p; it is closed by the reduction lemma.",
        "Case z > 0 is reduced in the variable a (B = p, A = 5 alpha^(1-mu)) and converted to n "
        "via n < a*kappa + mu; reducing in a with B = alpha does not close below 200.",
        "Gaps with 1 + alpha^(-u) = p^s alpha^t (u = 1, 4 for p = 3) make mu an integer combination of kappa "
        "and 1, so epsilon <= 0 for every q; they are closed by the homogeneous bound |x kappa - y| > 1/((a_M+2) x).",
        "n = m: excluded by parity (2 L_n even, p^a odd).",
    ]
    if quotients_differ:
        notes.append("The reference partial quotients [1,2,3,1,1,2,3,2,4,2,1,11,2,1,11] do not match the certified "
                     "expansion of log 3/log alpha (a_0 = 2); q_41, q_42 and a_M = 161 agree.")
    return notes


def prove(spec: RecurrenceSpec, p: int, search_limit: int,
          config: Optional[ProverConfig] = None) -> ProofCertificate:
    config = config or ProverConfig()
    prec = config.precision_start
    canonical = spec == sequences.LUCAS and p == 3
    equation = {"sequence": spec.kind.value, "a_param": str(spec.a_param), "p": str(p)}
    stages: List[Stage] = []
    notes: List[str] = []
    cert = ProofCertificate(equation, search_limit, stages, [], notes, config)

    def fail(stage, exc):
        cert.status = "invalid"
        cert.failed_stage = stage
        cert.failure = getattr(exc, "detail", str(exc))
        return cert

    st, sols = _stage_search(spec, p, search_limit)
    stages.append(st)
    cert.conclusion = sols
    stages.append(_stage_equal(spec, p))
    st3, _ = _stage_a_bound(p, prec, canonical)
    stages.append(st3)

    template = spec.kind is Kind.LUCAS and spec.a_param == 1 and p % 2 == 1
    if not template:
        cert.status = "partial"
        notes.append("The two-term linear-form template is only instantiated for Lucas numbers and odd p; "
                     "stages S4-S7 were not run.")
        return cert

    n_floor = max(search_limit, 200)
    try:
        cb = linforms.derive_crude_bounds(p, n_floor, prec)
        stages.append(_stage_lmn(cb, prec, canonical))
    except LucasPowerError as exc:
        return fail("S4", exc)
    M = config.bound_M
    if M < cb.n_upper + 2:
        M = linforms.round_up_2sf(cb.n_upper + 2)
        notes.append(f"Configured bound M is below n_upper + 2; using M = {M}.")
    try:
        stages.append(_stage_matveev(cb, M, canonical))
    except LucasPowerError as exc:
        return fail("S5", exc)
    try:
        st6, G, cf = _stage_cfrac(p, M, config, canonical)
        stages.append(st6)
    except LucasPowerError as exc:
        return fail("S6", exc)
    try:
        st7, _ = _stage_reduction(p, M, G, n_floor, search_limit, config, canonical)
        stages.append(st7)
    except StageError as exc:
        return fail(exc.stage, exc)
    except LucasPowerError as exc:
        return fail("S7", exc)
    if canonical:
        notes.extend(canonical_notes(tuple(cf.quotients[:15]) != CANONICAL_QUOTIENTS))
    return cert


# verification ------------------------------------------------------------------------

def _config_from(env: Dict[str, Any]) -> ProverConfig:
    raw = env["config"]
    return ProverConfig(**{k: int(raw[k]) for k in raw})


@lru_cache(maxsize=32)
def _replay(kind: str, a_param: int, p: int, limit: int, config: ProverConfig) -> bytes:
    spec = RecurrenceSpec(Kind(kind), a_param)
    doc = prove(spec, p, limit, config).to_json(timestamp="replay")
    return certificate_body(doc)


def _check_holds(value: Fraction, op: str, bound: Fraction) -> bool:
    ops = {"<": Fraction.__lt__, "<=": Fraction.__le__, ">": Fraction.__gt__,
           ">=": Fraction.__ge__, "eq": Fraction.__eq__}
    return ops[op](value, bound)


def _num(s: str) -> Fraction:
    if s in ("true", "false"):
        return Fraction(int(s == "true"))
    return Fraction(s)


def _recorded_checks_hold(doc) -> bool:
    """Re-check every recorded inequality from the document's own numbers."""
    for st in doc["stages"]:
        for c in st["claims"]:
            chk = c.get("check")
            if not chk:
                continue
            bound = _num(chk["bound"])
            if "enclosure" in c:
                a, e = Fraction(c["enclosure"]["approx"]), Fraction(c["enclosure"]["err"])
                if e < 0:
                    return False
                lo, hi = a - e, a + e
                op = chk["op"]
                side = hi if op in ("<", "<=") else lo
                if op == "eq":
                    if not (lo == hi == bound):
                        return False
                elif not _check_holds(side, op, bound):
                    return False
            else:
                val = c["value"]
                val = val[-1] if isinstance(val, list) else val
                if not _check_holds(_num(val), chk["op"], bound):
                    return False
    return True


def _chain_holds(doc) -> bool:
    stages = {s["name"]: s for s in doc["stages"]}
    get = lambda st, key: next(c for c in stages[st]["claims"] if c["key"] == key)
    p = int(doc["equation"]["p"])
    spec = RecurrenceSpec(Kind(doc["equation"]["sequence"]), int(doc["equation"]["a_param"]))
    limit = int(doc["search_limit"])
    triples = [tuple(int(x) for x in t) for t in doc["conclusion"]]
    if [f"{n} {m} {a}" for n, m, a in triples] != get("S1", "solutions")["value"]:
        return False
    if any(not SolutionTriple(*t).holds(spec, p) or t[0] > limit for t in triples):
        return False
    M = int(get("S5", "bound_M")["value"])
    if M < int(get("S5", "n_upper")["value"]) + 2:
        return False
    q_prev, q_k = int(get("S6", "q_prev")["value"]), int(get("S6", "q_K")["value"])
    if not q_prev <= M < q_k:
        return False
    quotients = [int(x) for x in get("S6", "quotients")["value"]]
    K = int(get("S6", "K")["value"])
    if max(quotients[: K + 1]) != int(get("S6", "a_M")["value"]):
        return False
    G = int(get("S6", "G")["value"])
    for tag in ("pos", "neg"):
        gaps = sorted(int(c["key"].rsplit("_", 1)[1]) for c in stages["S7"]["claims"]
                      if c["key"].startswith(f"{tag}_gap_"))
        if gaps != list(range(1, G + 1)):
            return False
        worst = max(int(get("S7", f"{tag}_gap_{g}")["value"][1]) for g in gaps)
        if worst != int(get("S7", f"{tag}_max")["value"]) or worst > limit:
            return False
    return True


def verify_certificate(doc: Dict[str, Any]) -> bool:
    """Independently re-check a certificate document; True iff it proves its conclusion."""
    if isinstance(doc, ProofCertificate):
        doc = doc.to_json()
    for key in ("cert_version", "equation", "stages", "conclusion", "notes", "environment"):
        if key not in doc:
            raise CertificateError(f"missing top-level key {key!r}")
    names = [s.get("name") for s in doc["stages"]]
    if doc.get("status") != "proved":
        return False
    if names != list(STAGE_NAMES):
        raise CertificateError(f"stages must be {STAGE_NAMES}, got {names}")
    try:
        if doc["environment"].get("body_sha256") != body_hash(doc):
            return False
        if not _recorded_checks_hold(doc) or not _chain_holds(doc):
            return False
        eq = doc["equation"]
        config = _config_from(doc["environment"])
        replay = _replay(eq["sequence"], int(eq["a_param"]), int(eq["p"]), int(doc["search_limit"]), config)
    except (ValueError, KeyError, TypeError, StopIteration, ZeroDivisionError, IndexError):
        return False
    return replay == certificate_body(doc)
