"""Command-line front end.

Exit codes: 0 success, 2 bad input, 3 enumeration cap exceeded, 4 a proved
statement failed its audit.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import corpus
from .bias import bias_exact, bias_rank_audit, prk_lower_from_bias
from .descent import cramer_audit, mod_p_descent_report, scaling_lemma_audit
from .fields import CapExceeded, FiniteField, ring_from_json
from .forms import FormCollection, HomogeneousForm, MultilinearForm, form_from_json, load_form, polarize
from .geometry import (birch_rank_estimate, geometry_inequality_audit, gradient_locus_count,
                       singular_locus_count)
from .rank import ConstantsTable, main_theorem_audit, prk_upper, rank_bounds
from .report import AuditReport, write_csv
from .universality import build_system, solve_embedding, universality_audit

log = logging.getLogger("polyrank")

EXIT_PARSE, EXIT_CAP, EXIT_VIOLATION = 2, 3, 4


class InputError(ValueError):
    pass


def _load(path, ring=None):
    if not path:
        raise InputError("an input file is required")
    if not os.path.exists(path):
        raise InputError(f"{path}: no such file")
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: {exc}") from exc
    if ring is not None:
        data = dict(data, ring=ring)
    try:
        return form_from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _ident(path):
    return os.path.splitext(os.path.basename(path))[0] if path else ""


def _emit(text, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _ring_override(args):
    if getattr(args, "ring", None):
        try:
            return json.loads(args.ring)
        except json.JSONDecodeError:
            return args.ring
    return None


def _constants(args):
    return ConstantsTable.from_json(args.constants) if getattr(args, "constants", None) else ConstantsTable()


def _seeds(args):
    if args.seeds is not None:
        return range(args.seed, args.seed + args.seeds)
    return [args.seed]


# ---------------------------------------------------------------------------
# commands


def cmd_rank(args):
    P = _load(args.form, _ring_override(args))
    if isinstance(P, HomogeneousForm):
        P = polarize(P)
    b = rank_bounds(P, budget=args.budget, bias_cap=args.bias_cap)
    row = {"instance_id": _ident(args.form), "lower": b.lower, "lower_source": b.lower_source,
           "upper": b.upper, "upper_source": b.upper_source,
           "status": b.certificate.status if b.certificate else ""}
    _emit(write_csv([row]), args.out)
    if args.certificate and b.certificate is not None:
        with open(args.certificate, "w") as fh:
            json.dump(b.certificate.to_json(), fh, sort_keys=True)
            fh.write("\n")
    return 0


def cmd_bias(args):
    P = _load(args.form, _ring_override(args))
    res = bias_exact(P, cap=args.bias_cap)
    row = {"instance_id": _ident(args.form), "q": res.q, "bias": res.exact, "value": res.value,
           "analytic_rank": res.analytic_rank, "prk_lower": prk_lower_from_bias(P, cap=args.bias_cap)}
    _emit(write_csv([row]), args.out)
    return 0


def cmd_geometry(args):
    P = _load(args.form, _ring_override(args))
    if isinstance(P, HomogeneousForm) or (isinstance(P, FormCollection) and not P.is_multilinear):
        lc = birch_rank_estimate(P, cap=args.cap)
        kind = "gradient"
    else:
        lc = singular_locus_count(P, cap=args.cap)
        kind = "singular"
    row = {"instance_id": _ident(args.form), "locus": kind, "q": lc.q, "points": lc.total_points,
           "ambient_dim": lc.ambient_dim, "codim_estimate": lc.codim_estimate, "confidence": lc.confidence}
    _emit(write_csv([row]), args.out)
    return 0


def _primes(args):
    if not args.primes:
        raise InputError("--primes is required")
    try:
        return [int(p) for p in args.primes.split(",") if p.strip()]
    except ValueError as exc:
        raise InputError(f"bad prime list {args.primes!r}") from exc


def cmd_descent(args):
    P = _load(args.form)
    report, rows = mod_p_descent_report(P, _primes(args), budget=args.budget, cap=args.bias_cap,
                                        instance_id=_ident(args.form))
    for r in rows:
        r["ceiling_min"] = report.rhs
        r["q_upper"] = report.lhs
    _emit(write_csv(rows), args.out)
    return EXIT_VIOLATION if report.violated else 0


def cmd_embed(args):
    coll = _load(args.collection)
    tgt = _load(args.targets)
    res = solve_embedding(build_system(coll, tgt), args.strategy, seed=args.seed, budget=args.budget)
    out = {"status": res.status, "certified": res.certified, "nodes": res.nodes, "strategy": res.strategy,
           "embedding": res.embedding.to_json() if res.embedding is not None else None}
    _emit(json.dumps(out, sort_keys=True) + "\n", args.out)
    return 0


def _audit_rows(args):
    kind = args.kind
    reports: list[AuditReport] = []
    if kind == "scaling":
        for seed in _seeds(args):
            system, R, L, mod = corpus.scaling_instance(seed)
            reports.append(scaling_lemma_audit(system, R, L, mod, instance_id=f"scaling-{seed}"))
    elif kind == "cramer":
        for seed in _seeds(args):
            reports.append(cramer_audit(corpus.cramer_instance(seed), instance_id=f"cramer-{seed}"))
    elif kind == "polarization":
        from fractions import Fraction
        import math
        for seed in _seeds(args):
            Q = corpus.polarization_instance(seed)
            Pt = polarize(Q)
            rng = np.random.default_rng(seed)
            bad = 0
            for _ in range(20):
                x = [Fraction(int(a), int(b)) for a, b in zip(rng.integers(-9, 10, Q.s), rng.integers(1, 10, Q.s))]
                if Pt.evaluate([x] * Q.d) != math.factorial(Q.d) * Q(x):
                    bad += 1
            reports.append(AuditReport("polarization", f"polarization-{seed}", bad, 0,
                                       "holds" if bad == 0 else "violated", {}, {"d": Q.d, "s": Q.s}))
    elif kind == "kz":
        from fractions import Fraction
        for seed in _seeds(args):
            P = corpus.smallfield_multilinear(seed)
            cert = prk_upper(P, args.budget)
            b = bias_exact(P, cap=args.bias_cap).exact
            rhs = Fraction(1, P.ring.order ** cert.rank)
            reports.append(AuditReport("kz-direction", f"kz-{seed}", b, rhs, "holds" if b >= rhs else "violated",
                                       {}, {"prk_upper": cert.rank, "q": P.ring.order}))
    elif kind == "bias-rank":
        for seed in _seeds(args):
            P = corpus.smallfield_multilinear(seed, qs=(2,))
            for r in (1, 2):
                reports.append(bias_rank_audit(P, r, 2, _constants(args), args.budget, args.bias_cap,
                                               instance_id=f"bias-rank-{seed}-r{r}"))
    elif kind == "geometry":
        from .forms import random_homogeneous
        for seed in _seeds(args):
            Q = random_homogeneous(5, 3, 3, seed)
            reports.append(geometry_inequality_audit(Q, args.budget, args.cap, instance_id=f"geometry-{seed}"))
    elif kind == "universality":
        if args.form:
            coll = _load(args.form)
            reports.append(universality_audit(coll, args.t, _constants(args), budget=args.budget,
                                              instance_id=_ident(args.form)))
        else:
            from .forms import diagonal_form
            for seed in _seeds(args):
                P = diagonal_form(2, 3, 2) if seed % 2 == 0 else diagonal_form(2, 1, 2)
                reports.append(universality_audit(P, 1, _constants(args), budget=args.budget,
                                                  instance_id=f"universality-{seed}"))
    elif kind == "main":
        if args.form:
            coll = _load(args.form)
            reports.append(main_theorem_audit(coll, _constants(args), budget=args.budget,
                                              instance_id=_ident(args.form)))
        else:
            from .forms import random_form
            for seed in _seeds(args):
                coll = FormCollection([random_form(2, 2, (2, 2), seed * 2 + i) for i in range(2)])
                reports.append(main_theorem_audit(coll, _constants(args), budget=args.budget,
                                                  instance_id=f"main-{seed}"))
    else:
        raise InputError(f"unknown audit {kind!r}")
    return reports


def cmd_audit(args):
    reports = _audit_rows(args)
    _emit(write_csv(reports), args.out)
    return EXIT_VIOLATION if any(r.proved_failure for r in reports) else 0


def cmd_corpus(args):
    if not args.out:
        raise InputError("--out DIR is required for corpus generation")
    kw = {}
    if args.primes:
        kw["primes"] = _primes(args)
    manifest = corpus.generate(args.profile, args.out, seed=args.seed, **kw)
    log.info("wrote %d instances to %s", len(manifest["instances"]), args.out)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="report path (stdout when omitted)")
    common.add_argument("--cap", type=int, default=10**7, help="enumeration cap for point counts")
    common.add_argument("--bias-cap", type=int, default=10**7, help="enumeration cap for bias sums")
    common.add_argument("--budget", type=int, default=10**6, help="search budget in nodes")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--seeds", type=int, default=None, help="run seeds seed..seed+N-1")
    common.add_argument("--workers", type=int, default=1, help="accepted for compatibility; results never depend on it")
    common.add_argument("--constants", help="JSON file overriding the constants table")
    common.add_argument("--ring", help='override the ring of the input, e.g. \'{"p": 3}\'')
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="polyrank", description="Rank, bias and point-count toolkit for forms.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("rank", parents=[common], help="partition-rank bounds")
    s.add_argument("--form", required=True)
    s.add_argument("--certificate", help="write the certificate JSON here")
    s.set_defaults(func=cmd_rank)

    s = sub.add_parser("bias", parents=[common], help="exact bias")
    s.add_argument("--form", required=True)
    s.set_defaults(func=cmd_bias)

    s = sub.add_parser("geometry", parents=[common], help="singular or gradient locus counts")
    s.add_argument("--form", required=True)
    s.set_defaults(func=cmd_geometry)

    s = sub.add_parser("descent", parents=[common], help="mod-p descent report")
    s.add_argument("--form", required=True)
    s.add_argument("--primes", "--prime", dest="primes", required=True, help="comma-separated primes")
    s.set_defaults(func=cmd_descent)

    s = sub.add_parser("embed", parents=[common], help="solve for an embedding")
    s.add_argument("--collection", "--form", dest="collection", required=True)
    s.add_argument("--targets", required=True)
    s.add_argument("--strategy", choices=("exhaustive", "randomized"), default="exhaustive")
    s.set_defaults(func=cmd_embed)

    s = sub.add_parser("audit", parents=[common], help="run an audit family")
    s.add_argument("kind", choices=("scaling", "cramer", "polarization", "kz", "bias-rank", "geometry",
                                    "universality", "main"))
    s.add_argument("--form", "--collection", dest="form")
    s.add_argument("--t", type=int, default=1)
    s.set_defaults(func=cmd_audit)

    s = sub.add_parser("corpus", parents=[common], help="generate a corpus directory")
    s.add_argument("profile", choices=corpus.PROFILES)
    s.add_argument("--primes", "--prime", dest="primes")
    s.set_defaults(func=cmd_corpus)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except CapExceeded as exc:
        log.error("cap exceeded: %s", exc)
        return EXIT_CAP
    except (InputError, KeyError, ValueError) as exc:
        log.error("input error: %s", exc)
        return EXIT_PARSE


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
