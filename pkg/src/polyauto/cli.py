"""Batch command-line surface over the package.

Exit codes: 0 all checks pass, 1 mathematical failure, 2 parse error.
Reports are line-oriented "key: value" text; repeated runs on identical
input are byte-identical.
"""

import argparse
import sys

from .polyring import QQ, PolyParseError, parse_poly, poly_to_str
from .automorphism import (Affine, AutoWord, WordParseError, classify,
                           parse_endo, parse_word, try_invert_endo,
                           word_to_str)
from .lnd import parse_derivation
from .degeneracy import NotDegenerate, factorize_td, td_test
from .cotame_engine import (EngineError, ReductionTrace, reduce_3triangular,
                            reduce_biparabolic, reduce_exp, reduce_parabolic,
                            reduce_td, reduce_triangular, verify_trace)
from .filtration import verify_theorem_noncotame

PARSE_ERRORS = (PolyParseError, WordParseError, ValueError, OSError)


def _read(path):
    with open(path) as fh:
        return fh.read()


def _sections(text):
    """Blocks separated by lines consisting of dashes."""
    out, cur = [], []
    for line in text.splitlines():
        if line.strip() and set(line.strip()) == {"-"}:
            out.append("\n".join(cur))
            cur = []
        else:
            cur.append(line)
    out.append("\n".join(cur))
    return out


def _parse_input_word(text, n):
    """A word file: token lines, or a single endomorphism tuple."""
    body = text.strip()
    if body.startswith("("):
        return AutoWord([]), parse_endo(body, n)
    w = parse_word(body, n)
    return w, None


def _as_word_or_endo(text, n):
    w, e = _parse_input_word(text, n)
    return e if e is not None else w


def _cmd_compose(args, out):
    lines = [s for s in _read(args.input).splitlines() if s.strip()]
    if not lines:
        raise WordParseError("empty input")
    e = parse_endo(lines[0], args.n)
    for line in lines[1:]:
        e = e.compose(parse_endo(line, args.n))
    out("result: %s" % e.canonical_str())
    return 0


def _cmd_invert(args, out):
    e = parse_endo(_read(args.input), args.n)
    inv = try_invert_endo(e)
    if inv is None:
        out("error: not an automorphism of the supported shape")
        return 1
    out("result: %s" % inv.canonical_str())
    return 0


def _cmd_classify(args, out):
    e = _as_word_or_endo(_read(args.input), args.n)
    if isinstance(e, AutoWord):
        e = e.flatten()
    labels = classify(e)
    out("class: %s" % (" ".join(sorted(labels)) if labels else "general"))
    return 0


def _cmd_exp(args, out):
    parts = _sections(_read(args.input))
    if len(parts) != 2:
        raise WordParseError("expected derivation and exponent blocks")
    d = parse_derivation(parts[0], args.n)
    f = parse_poly(parts[1].split("=", 1)[-1], args.n)
    from .lnd import exponential
    out("result: %s" % exponential(d, f).canonical_str())
    return 0


def _cmd_td_test(args, out):
    w = _as_word_or_endo(_read(args.input), args.n)
    res = td_test(w, args.var)
    out("td: %s" % ("true" if res else "false"))
    return 0


def _cmd_ttd_factor(args, out):
    w = _as_word_or_endo(_read(args.input), args.n)
    try:
        fac = factorize_td(w, args.var)
    except NotDegenerate as ex:
        out("error: %s" % ex)
        return 1
    out("lambda: %s" % fac.lam.canonical_str())
    out("tau: %s" % fac.tau.canonical_str())
    out("gamma: %s" % fac.gamma.canonical_str())
    out("mu: %s" % fac.mu.canonical_str())
    out("rho: %s" % fac.rho.canonical_str())
    return 0


def _cmd_reduce(args, out):
    text = _read(args.input)
    fam = args.family
    if fam == "triangular":
        trace = reduce_triangular(parse_endo(text, args.n))
    elif fam == "parabolic":
        trace = reduce_parabolic(parse_endo(text, args.n))
    elif fam == "biparabolic":
        parts = _sections(text)
        if len(parts) != 3:
            raise WordParseError("expected three blocks separated by --")
        trace = reduce_biparabolic(
            parse_endo(parts[0], args.n),
            Affine.from_endo(parse_endo(parts[1], args.n)),
            parse_endo(parts[2], args.n))
    elif fam == "3triangular":
        trace = reduce_3triangular(_as_word_or_endo(text, args.n))
    elif fam == "exp":
        parts = _sections(text)
        if len(parts) != 4:
            raise WordParseError("expected four blocks separated by --")
        trace = reduce_exp(
            parse_endo(parts[0], args.n),
            parse_derivation(parts[1], args.n),
            parse_poly(parts[2].split("=", 1)[-1], args.n),
            parse_endo(parts[3], args.n))
    elif fam == "td":
        trace = reduce_td(_as_word_or_endo(text, args.n), args.var)
    else:
        raise WordParseError("unknown family %r" % fam)
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write(trace.to_json(indent=1))
    out("family: %s" % fam)
    out("steps: %d" % len(trace.steps))
    out("terminal: %s" % trace.terminal["kind"])
    if not verify_trace(trace):
        out("verified: false")
        return 1
    out("verified: true")
    return 0


def _cmd_verify_trace(args, out):
    trace = ReductionTrace.from_json(_read(args.input))
    ok = verify_trace(trace)
    out("verified: %s" % ("true" if ok else "false"))
    return 0 if ok else 1


def _cmd_verify_non_cotame(args, out):
    rep = verify_theorem_noncotame(N=args.N, M=args.M,
                                   samples=args.samples, seed=args.seed)
    out(rep.text())
    out("summary: %s (%d checks)" % ("pass" if rep.ok else "fail",
                                     len(rep.lines)))
    return 0 if rep.ok else 1


def build_parser():
    p = argparse.ArgumentParser(prog="polyauto")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, needs_input=True, var=False):
        sp = sub.add_parser(name)
        sp.set_defaults(fn=fn)
        if needs_input:
            sp.add_argument("input")
            sp.add_argument("--n", type=int, default=3)
        if var:
            sp.add_argument("--var", type=int, default=1)
        return sp

    add("compose", _cmd_compose)
    add("invert", _cmd_invert)
    add("classify", _cmd_classify)
    add("exp", _cmd_exp)
    add("td-test", _cmd_td_test, var=True)
    add("ttd-factor", _cmd_ttd_factor, var=True)
    sp = add("reduce", _cmd_reduce, var=True)
    sp.add_argument("--family", required=True,
                    choices=["triangular", "parabolic", "biparabolic",
                             "3triangular", "exp", "td"])
    sp.add_argument("--trace", default=None)
    add("verify-trace", _cmd_verify_trace)
    sp = sub.add_parser("verify-non-cotame")
    sp.set_defaults(fn=_cmd_verify_non_cotame)
    sp.add_argument("--N", type=int, default=2)
    sp.add_argument("--M", type=int, default=8)
    sp.add_argument("--samples", type=int, default=0)
    sp.add_argument("--seed", type=int, default=0)
    return p


def main(argv=None, stdout=None):
    stdout = stdout if stdout is not None else sys.stdout
    out = lambda s: print(s, file=stdout)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as ex:
        return 2 if ex.code else 0
    try:
        return args.fn(args, out)
    except (EngineError, NotDegenerate) as ex:
        out("error: %s" % ex)
        return 1
    except PARSE_ERRORS as ex:
        out("error: %s" % ex)
        return 2


if __name__ == "__main__":
    sys.exit(main())
