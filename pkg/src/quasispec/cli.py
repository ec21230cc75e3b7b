"""Command-line front end.

Exit codes: 0 success, 2 usage or model error, 3 numerical resolution error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import pickle
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import MomentEvaluator, build_box, delta_state, moment_curve, transport_exponent
from .errors import (CertificateError, ConsistencyError, ContaminatedError, DomainError,
                     PreconditionError, ResolutionError, SiteRangeError,
                     UnsupportedSubstitutionError)
from .gordon import (CUBE, SQUARE, THREE_BLOCK, TWO_BLOCK, certify, find_powers,
                     frequency_lower_bound, scan_gordon_scales)
from .operator import Coding, Potential, lyapunov_estimate
from .spectrum import approx_bands, nested_spectrum, periodic_bands, substitution_bands
from .symbolic.contfrac import ContinuedFraction, continued_fraction, parse_alpha
from .symbolic.factors import FactorIndex
from .symbolic.sturmian import circle_map_word, kaminaga_condition, sturmian_prefix
from .symbolic.words import BUILTIN_RULES, SubstitutionRule, fixed_point_prefix
from .tracemap import c_lambda, classify_orbit, sturmian_trace_table, sturmian_traces, substitution_traces

USAGE_ERRORS = (DomainError, SiteRangeError, PreconditionError, ConsistencyError,
                UnsupportedSubstitutionError, CertificateError)
NUMERIC_ERRORS = (ResolutionError,)
SCHEMA_DIR = Path(__file__).parent / "schemas"
MODELS = ("sturmian", "circle", "free", "substitution", *BUILTIN_RULES)
CF_DEPTH = 40


@dataclass
class ModelSpec:
    kind: str                   # "sturmian", "circle", "substitution", "free"
    name: str
    lam: float
    coding: Coding
    cf: ContinuedFraction | None = None
    alpha: object = None
    beta: object = None
    theta: float = 0.0
    rule: SubstitutionRule | None = None

    def word(self, length: int, first: int = 1) -> str:
        """Symbols on sites ``first .. first + length - 1``."""
        if self.kind == "sturmian" and first == 1:
            return sturmian_prefix(self.cf, length)
        if self.kind in ("sturmian", "circle"):
            return circle_map_word(self.alpha, self.beta, self.theta, (first, first + length - 1))
        if self.kind == "free":
            return "a" * length
        seed = self.rule.alphabet.symbols[0]
        return fixed_point_prefix(self.rule, seed, length)[:length]

    def potential(self, lo: int, hi: int) -> Potential:
        """Two-sided for rotation models; substitution windows place a fixed-point prefix on ``lo..hi``."""
        return Potential.from_word(self.word(hi - lo + 1, lo), self.coding, lo)

    def describe(self) -> dict:
        out = {"model": self.name, "lambda": self.lam, "coding": self.coding.as_dict()}
        if self.cf is not None:
            out["quotients"] = list(self.cf.quotients[:12])
        return out


def _parse_real(text: str | None, default):
    """A float, or an exact value from the alpha grammar."""
    if text is None:
        return default
    try:
        return float(text)
    except ValueError:
        pass
    x = parse_alpha(text)
    if hasattr(x, "sign"):
        return x
    cf = continued_fraction(x, CF_DEPTH)
    return cf.value if cf.value is not None else cf.approx()


def resolve_model(args) -> ModelSpec:
    name = args.model
    lam = args.lam
    if name in ("sturmian", "circle"):
        spec = parse_alpha(args.alpha)
        cf = continued_fraction(spec, CF_DEPTH)
        alpha = cf.value if cf.value is not None else cf.approx()
        beta = _parse_real(args.beta, alpha) if name == "circle" else alpha
        theta = _parse_real(args.theta, 0)
        coding = Coding.parse(args.coding) if args.coding else Coding.sturmian(lam)
        kind = "sturmian" if name == "sturmian" and not theta else "circle"
        return ModelSpec(kind, name, lam, coding, cf, alpha, beta, theta)
    if name == "free":
        return ModelSpec("free", name, 0.0, Coding.from_mapping({"a": 0.0}, 0.0))
    if name == "substitution":
        if not args.rule:
            raise DomainError("--model substitution needs --rule, e.g. 'a->ab,b->a'")
        rule = SubstitutionRule.parse(args.rule)
    elif name in BUILTIN_RULES:
        rule = BUILTIN_RULES[name]
    else:
        raise DomainError(f"unknown model {name!r}")
    coding = Coding.parse(args.coding) if args.coding else Coding.linear(rule.alphabet.symbols, lam)
    coding = Coding(coding.table, lam)
    coding.encode("".join(rule.alphabet))  # every letter needs a value
    return ModelSpec("substitution", name, lam, coding, rule=rule)


# --- output -----------------------------------------------------------------

def validate(payload: dict, schema_name: str) -> None:
    """Validate against a shipped schema when ``jsonschema`` is importable."""
    try:
        import jsonschema
    except ImportError:
        return
    schema = json.loads((SCHEMA_DIR / f"{schema_name}.json").read_text())
    jsonschema.validate(payload, schema)


def emit(args, payload: dict, header: list[str], rows, schema: str) -> None:
    if args.format == "json":
        validate(payload, schema)
        text = json.dumps(payload, indent=2) + "\n"
    else:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(header)
        wr.writerows(rows)
        text = buf.getvalue()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _pool(args):
    return ThreadPoolExecutor(max_workers=max(1, args.threads or os.cpu_count() or 1))


# --- commands -----------------------------------------------------------------

def cmd_generate(args) -> int:
    m = resolve_model(args)
    w = m.word(args.length)
    V = Potential.from_word(w, m.coding, 1)
    payload = {**m.describe(), "length": len(w), "word": w,
               "potential": [[s, v] for s, v in V.to_rows()]}
    rows = [(s, w[s - 1], v) for s, v in V.to_rows()]
    emit(args, payload, ["site", "symbol", "value"], rows, "generate")
    return 0


def _factor_index(w: str) -> FactorIndex:
    cache = os.environ.get("QUASISPEC_CACHE")
    if not cache:
        return FactorIndex(w)
    path = Path(cache) / (hashlib.sha256(w.encode()).hexdigest()[:32] + ".pkl")
    if path.exists():
        with path.open("rb") as fh:
            return pickle.load(fh)
    idx = FactorIndex(w)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as fh:
        pickle.dump(idx, fh)
    return idx


def cmd_complexity(args) -> int:
    m = resolve_model(args)
    n_max = args.n_max
    length = args.length or 20 * n_max
    if n_max > length:
        raise DomainError("--n-max exceeds --length")
    p = _factor_index(m.word(length)).complexity(n_max)
    p2 = _factor_index(m.word(2 * length)).complexity(n_max)
    stable = p == p2
    if not stable:
        note(f"warning: complexity up to n={n_max} changed when the prefix was doubled to "
             f"{2 * length}; the prefix is too short")
    payload = {**m.describe(), "prefix_length": length, "n": list(range(1, n_max + 1)),
               "p": p, "stable": stable}
    emit(args, payload, ["n", "p"], zip(payload["n"], p), "complexity")
    return 0


def _bands(m: ModelSpec, level: int, tol: float):
    if m.kind == "sturmian":
        return approx_bands(m.lam, m.cf, level, tol)
    if m.kind == "substitution":
        return substitution_bands(m.rule, m.coding, level, tol)
    if m.kind == "free":
        return periodic_bands("a", m.coding, tol, level)
    raise DomainError("spectrum needs a sturmian, substitution or free model (theta = 0)")


def cmd_spectrum(args) -> int:
    m = resolve_model(args)
    if args.nested is not None:
        if m.kind != "sturmian":
            raise DomainError("--nested is available for sturmian models")
        st = nested_spectrum(m.lam, m.cf, args.level, args.nested, args.tol)
        payload = {**m.describe(), "stage": st.to_json()}
        rows = [("outer", l, r) for l, r in st.outer] + [("inner", l, r) for l, r in st.inner]
        emit(args, payload, ["set", "l", "r"], rows, "stage")
        return 0
    b = _bands(m, args.level, args.tol)
    payload = {**m.describe(), **b.to_json(), "model": m.name}
    emit(args, payload, ["l", "r"], b.to_rows(), "bands")
    return 0


def cmd_tracemap(args) -> int:
    m = resolve_model(args)
    if m.kind == "sturmian":
        orbit = sturmian_traces(args.energy, m.lam, m.cf, args.level)
        cls = classify_orbit(orbit, "sturmian")
    elif m.kind == "substitution":
        bound = args.bound if args.bound is not None else 2.0
        orbit = substitution_traces(args.energy, m.coding, m.rule, args.level, bound)
        cls = classify_orbit(orbit, "subsequence")
    else:
        raise DomainError("tracemap needs a sturmian or two-letter substitution model")
    rows = orbit.to_rows()
    payload = {**m.describe(), "energy": args.energy, "bound": orbit.bound_used,
               "saturated": orbit.saturated, "escape_index": orbit.escape_index,
               "classification": cls.status.value, "soundness": cls.soundness,
               "orbit": [{"n": n, "x": x, "escaped": e} for n, x, e in rows]}
    emit(args, payload, ["n", "x_n", "escaped"], rows, "tracemap")
    return 0


def _spectrum_energies(m: ModelSpec, level: int, count: int, rng, C: float | None) -> np.ndarray:
    """Energies drawn uniformly from the level bands; for Sturmian models only those
    with ``|x_k| <= C`` for every computed ``k <= level`` are kept."""
    b = _bands(m, level, 1e-10)
    widths = b.intervals[:, 1] - b.intervals[:, 0]
    idx = rng.choice(len(widths), size=4 * count, p=widths / widths.sum())
    E = rng.uniform(b.intervals[idx, 0], b.intervals[idx, 1])
    if m.kind == "sturmian":
        tab, _ = sturmian_trace_table(E, m.lam, m.cf, level)
        E = E[np.all(np.abs(tab) <= C, axis=0)]
    return np.sort(E[:count])


def cmd_gordon(args) -> int:
    m = resolve_model(args)
    rng = np.random.default_rng(args.seed)
    certs, verdicts = [], []
    payload = m.describe()
    if m.kind == "sturmian":
        C = args.bound if args.bound is not None else c_lambda(m.lam)
        n_max = args.n_max or 8
        level = args.level or n_max
        w = m.word(4 * m.cf.q(n_max + 2))
        V = Potential.from_word(w, m.coding, 1)
        energies = _spectrum_energies(m, level, args.energies, rng, C)
        scales = scan_gordon_scales(w, m.cf, n_max)
        payload["kaminaga"] = kaminaga_condition(m.cf)
        with _pool(args) as pool:
            jobs = []
            for n in range(1, n_max + 1):
                sq = next((s for s in scales if s.level == n and s.kind == SQUARE), None)
                if sq is not None:
                    jobs.append(pool.submit(certify, V, TWO_BLOCK, m.cf.q(n), sq.offset,
                                            energies, C, n, args.seed))
                cu = next((s for s in scales if s.level == n and s.kind == CUBE), None)
                if cu is not None:
                    jobs.append(pool.submit(certify, V, THREE_BLOCK, m.cf.q(n), cu.offset,
                                            energies, None, n, args.seed))
            certs = [j.result() for j in jobs]
        for c in certs:
            name = "two-block" if c.kind == TWO_BLOCK else "three-block"
            state = "holds" if c.holds else f"fails at {len(c.failures)}"
            verdicts.append(f"level {c.level}: {name} criterion {state} for "
                            f"{len(c.verified_energies) + len(c.failures)} sampled spectrum energies")
        payload["trace_bound"] = C
    elif m.kind == "substitution":
        level = args.level or 8
        w = m.word(args.length or 10 ** 5)
        max_len = args.max_len or 64
        energies = _spectrum_energies(m, level, args.energies, rng, None)
        V = Potential.from_word(w, m.coding, 1)
        freq = []
        for k in (4, 3):
            for L in range(1, max_len + 1):
                hits = find_powers(w, k, L)
                if not hits:
                    continue
                pos, v = hits[0]
                if k == 4:
                    fb = frequency_lower_bound(w, v, 4)
                    freq.append({"base": v, "k": 4, "value": fb.value})
                if any(c.scale == L for c in certs):
                    continue
                if pos - 1 < 0 or pos - 1 + 3 * L > len(w):
                    continue
                certs.append(certify(V, THREE_BLOCK, L, pos - 1 + L, energies, None, None,
                                     args.seed))
        payload["fourth_powers"] = freq
        for c in certs:
            state = "holds" if c.holds else f"fails at {len(c.failures)}"
            verdicts.append(f"length {c.scale}: three-block criterion {state} for "
                            f"{len(c.verified_energies) + len(c.failures)} sampled spectrum energies")
        if not certs:
            verdicts.append(f"no power structure found up to scanned length {max_len}")
    else:
        raise DomainError("gordon needs a sturmian or substitution model")
    payload["no_structure"] = not certs
    payload["energies"] = len(energies)
    payload["certificates"] = [c.to_json() for c in certs]
    payload["verdicts"] = verdicts
    for v in verdicts:
        note(v)
    rows = [(c.kind, c.level if c.level is not None else "", c.scale, c.offset, c.holds,
             min((a for _, a in c.verified_energies), default=math.nan)) for c in certs]
    emit(args, payload, ["kind", "level", "scale", "offset", "holds", "min_attained"], rows,
         "gordon")
    return 0


def _energy_grid(args) -> np.ndarray:
    if args.energy_list:
        return np.array([float(x) for x in args.energy_list.split(",")])
    return np.linspace(args.emin, args.emax, args.count)


def cmd_lyapunov(args) -> int:
    m = resolve_model(args)
    n = args.length
    V = m.potential(1, n)
    E = _energy_grid(args)
    with _pool(args) as pool:
        gam = list(pool.map(lambda e: lyapunov_estimate(e, V, n), E))
    payload = {**m.describe(), "n": n,
               "estimates": [{"E": float(e), "gamma": float(g)} for e, g in zip(E, gam)]}
    emit(args, payload, ["E", "gamma"], zip(E.tolist(), gam), "lyapunov")
    return 0


def cmd_dynamics(args) -> int:
    m = resolve_model(args)
    N = args.N
    H = build_box(m.potential(-N, N), N)
    psi0 = delta_state(H, args.site)
    T = np.geomspace(args.tmin, args.tmax, args.samples)
    ev = MomentEvaluator(H, psi0)
    curve = moment_curve(H, psi0, args.p, T, f"delta_{args.site}", ev)
    fit = None
    try:
        fit = transport_exponent(curve, min_decades=args.min_decades)
    except ContaminatedError as exc:
        note(f"warning: {exc}; no exponent reported")
    except DomainError as exc:
        note(f"warning: {exc}; no exponent reported")
    payload = {**m.describe(), **curve.to_json(),
               "exponent": None if fit is None else fit.exponent,
               "fit_residual": None if fit is None else fit.residual}
    emit(args, payload, ["T", "value"], curve.to_rows(), "dynamics")
    return 0


# --- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", default="sturmian", choices=MODELS)
    common.add_argument("--alpha", default="golden",
                        help="golden | silver | quad:p,q,d,r | cf:a1,a2,...[,(period)]")
    common.add_argument("--beta", default=None, help="interval length (circle model; default alpha)")
    common.add_argument("--theta", default=None, help="phase (default 0)")
    common.add_argument("--lambda", dest="lam", type=float, default=1.0)
    common.add_argument("--coding", default=None, help="symbol values, e.g. a=0,b=4")
    common.add_argument("--rule", default=None, help="custom substitution, e.g. 'a->ab,b->a'")
    common.add_argument("--level", type=int, default=None)
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--out", default=None)
    common.add_argument("--format", choices=("json", "csv"), default="json")

    p = argparse.ArgumentParser(prog="quasispec", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="symbol word and potential")
    g.add_argument("--length", type=int, default=64)
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("complexity", parents=[common], help="factor complexity p(n)")
    c.add_argument("--n-max", type=int, default=50)
    c.add_argument("--length", type=int, default=None, help="prefix length (default 20 n_max)")
    c.set_defaults(func=cmd_complexity)

    s = sub.add_parser("spectrum", parents=[common], help="periodic-approximant band set")
    s.add_argument("--nested", type=int, default=None, metavar="K",
                   help="report stage sets over levels K..level instead")
    s.set_defaults(func=cmd_spectrum)

    t = sub.add_parser("tracemap", parents=[common], help="trace orbit and classification")
    t.add_argument("--energy", type=float, required=True)
    t.add_argument("--bound", type=float, default=None)
    t.set_defaults(func=cmd_tracemap)

    go = sub.add_parser("gordon", parents=[common], help="repetition scan and Gordon bounds")
    go.add_argument("--n-max", type=int, default=None)
    go.add_argument("--energies", type=int, default=50)
    go.add_argument("--bound", type=float, default=None, help="trace bound C")
    go.add_argument("--length", type=int, default=None)
    go.add_argument("--max-len", type=int, default=None)
    go.set_defaults(func=cmd_gordon)

    ly = sub.add_parser("lyapunov", parents=[common], help="finite-n Lyapunov estimates")
    ly.add_argument("--length", type=int, default=10 ** 4)
    ly.add_argument("--energy-list", default=None)
    ly.add_argument("--emin", type=float, default=-3.0)
    ly.add_argument("--emax", type=float, default=3.0)
    ly.add_argument("--count", type=int, default=61)
    ly.set_defaults(func=cmd_lyapunov)

    d = sub.add_parser("dynamics", parents=[common], help="time-averaged moments")
    d.add_argument("--N", type=int, default=1500)
    d.add_argument("--p", type=float, default=2.0)
    d.add_argument("--tmin", type=float, default=30.0)
    d.add_argument("--tmax", type=float, default=300.0)
    d.add_argument("--samples", type=int, default=10)
    d.add_argument("--site", type=int, default=0)
    d.add_argument("--min-decades", type=float, default=1.0)
    d.set_defaults(func=cmd_dynamics)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "spectrum" and args.level is None:
        args.level = 8
    if args.command == "tracemap" and args.level is None:
        args.level = 12
    try:
        return args.func(args)
    except USAGE_ERRORS as exc:
        note(f"error: {exc}")
        return 2
    except NUMERIC_ERRORS as exc:
        note(f"numerical error: {exc}")
        return 3
