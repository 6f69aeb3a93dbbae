"""Command line: kurinum {build,scan,structure,verify}.

Configuration precedence is flags > environment > defaults; the resolved
values, each with its source, head every output.
"""

import argparse
import json
import os
import sys
import time

from . import __version__
from .forms import load_descriptor
from .pipeline import (StageError, prepare, report_from, run_scan, scan_meta,
                       scan_records)
from .selmer import ASSUMPTIONS, Inconclusive, IntegrityError

ENV = {
    "cache": "KURINUM_CACHE",
    "workers": "KURINUM_WORKERS",
    "bound": "KURINUM_BOUND",
    "data": "KURINUM_DATA",
}

DEFAULTS = {
    "cache": os.path.join(os.path.expanduser("~"), ".cache", "kurinum"),
    "workers": 1,
    "bound": 200,
    "full_bound": 10000,
    "m": 1,
    "strata": "0,1,2",
    "normalization": "global",
    "eta_seed": 0,
}


def _ints(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _products(text):
    out = set()
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        n = 1
        for f in part.split("*"):
            n *= int(f)
        out.add(n)
    return out


def resolve(args, env=None):
    """Merge flags, environment and defaults; every entry is (value, source)."""
    env = os.environ if env is None else env
    cfg = {"command": (args.command, "flag")}

    def pick(name, conv=str, default_key=None):
        flag = getattr(args, name, None)
        if flag is not None:
            cfg[name] = (conv(flag), "flag")
        elif name in ENV and env.get(ENV[name]):
            try:
                cfg[name] = (conv(env[ENV[name]]), "env:" + ENV[name])
            except ValueError:
                raise SystemExit("bad value %r in %s" % (env[ENV[name]], ENV[name]))
        else:
            cfg[name] = (DEFAULTS.get(default_key or name), "default")

    if args.command in ("build", "scan"):
        cfg["descriptor"] = (args.descriptor, "flag")
        cfg["p"] = (args.p, "flag" if args.p is not None else "descriptor")
        cfg["r"] = (args.r, "flag" if args.r is not None else "default (k/2)")
        pick("cache")
        if args.no_cache:
            cfg["cache"] = (None, "flag")
        pick("normalization")
        pick("data")
    if args.command == "scan":
        pick("workers", int)
        if args.full and args.bound is None and not env.get(ENV["bound"]):
            cfg["bound"] = (DEFAULTS["full_bound"], "default (--full)")
        else:
            pick("bound", int)
        pick("m", int)
        pick("strata")
        pick("eta_seed", int)
        cfg["full"] = (bool(args.full), "flag")
        cfg["include_predicted_zero"] = (bool(args.include_predicted_zero), "flag")
        cfg["only"] = (args.only, "flag")
        cfg["extra_primes"] = (args.extra_primes, "flag")
        cfg["escalate"] = (not args.no_escalate, "flag")
        cfg["esc_bound"] = (args.esc_bound, "flag")
        cfg["esc_only"] = (args.esc_only, "flag")
        cfg["esc_extra"] = (args.esc_extra, "flag")
        cfg["out"] = (args.out, "flag")
        _validate(cfg)
    return cfg


def _validate(cfg):
    v = {k: x[0] for k, x in cfg.items()}
    if v["bound"] < 2:
        raise SystemExit("bound must be at least 2")
    if v["m"] < 1:
        raise SystemExit("m must be positive")
    if v["workers"] < 1:
        raise SystemExit("workers must be positive")
    try:
        strata = _ints(v["strata"])
    except ValueError:
        raise SystemExit("strata must be a comma separated list of integers")
    if not strata or min(strata) < 0:
        raise SystemExit("strata must be non-negative")
    if v["normalization"] not in ("global", "per-r"):
        raise SystemExit("normalization is 'global' or 'per-r'")
    for key in ("only", "esc_only"):
        if v[key]:
            try:
                _products(v[key])
            except ValueError:
                raise SystemExit("--%s takes products like 79*109,7*13" % key.replace("_", "-"))
    for key in ("extra_primes", "esc_extra"):
        if v[key]:
            try:
                _ints(v[key])
            except ValueError:
                raise SystemExit("--%s takes a comma separated list of primes" % key.replace("_", "-"))


def plain(cfg):
    return {k: v for k, (v, _) in cfg.items()}


def config_record(cfg):
    return {"config": {k: {"value": v, "source": s} for k, (v, s) in sorted(cfg.items())},
            "version": __version__}


def _log(*a):
    print(*a, file=sys.stderr)


def _load(cfg):
    c = plain(cfg)
    try:
        return load_descriptor(c["descriptor"], c.get("data"))
    except (OSError, ValueError) as exc:
        raise SystemExit("descriptor: %s" % exc)


def _prepare(cfg):
    c = plain(cfg)
    form = _load(cfg)
    return prepare(form, c["p"], c["r"], c["cache"], c["normalization"], log=_log)


def cmd_build(args):
    cfg = resolve(args)
    t = time.time()
    prep = _prepare(cfg)
    sym = prep["phi"]
    base = getattr(sym, "base", sym)
    space = base.space
    out = config_record(cfg)
    out["build"] = {
        "label": prep["form"].label, "level": prep["form"].level, "weight": prep["form"].weight,
        "p": prep["L"].p, "e": prep["L"].e, "f": prep["L"].f_res, "r": prep["r"], "w": prep["w"],
        "base_space": {"N": space.N, "k": space.k, "sign": space.sign,
                       "dimension": space.dimension},
        "shift_m": prep["info"].get("shift_m"),
        "cache": prep["info"].get("cache", "off"),
        "cache_path": prep["info"].get("cache_path"),
        "seconds": round(time.time() - t, 2),
    }
    print(json.dumps(out, sort_keys=True))
    return 0


def cmd_scan(args):
    cfg = resolve(args)
    c = plain(cfg)
    prep = _prepare(cfg)
    t = time.time()
    scans = run_scan(
        prep, c["m"], _ints(c["strata"]), c["bound"], c["workers"], c["eta_seed"] or None,
        c["include_predicted_zero"],
        _products(c["only"]) if c["only"] else None,
        _ints(c["extra_primes"]) if c["extra_primes"] else (),
        c["escalate"], c["esc_bound"],
        _products(c["esc_only"]) if c["esc_only"] else None,
        _ints(c["esc_extra"]) if c["esc_extra"] else (),
        log=_log)
    records = scan_records(scans)
    meta = scan_meta(prep, scans)
    meta["seconds"] = round(time.time() - t, 2)
    lines = [json.dumps(config_record(cfg), sort_keys=True)]
    lines += [json.dumps(r, sort_keys=True) for r in records]
    lines.append(json.dumps({"meta": meta}, sort_keys=True))
    text = "\n".join(lines) + "\n"
    if c["out"]:
        with open(c["out"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for key, summ in meta["summary"].items():
        for nu, s in summ.items():
            _log("%s  %s  nu=%s  %s" % (prep["form"].label, key, nu, s))
    if args.report:
        _emit_report(records, meta, None, sys.stdout if c["out"] else sys.stderr)
    return 0


def read_scan(path):
    """(records, meta) from a scan output file."""
    records, meta = [], None
    with open(path) as fh:
        for i, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SystemExit("%s: parse error at line %d column %d: %s"
                                 % (path, i, exc.colno, exc.msg))
            if "config" in obj:
                continue
            if "meta" in obj:
                meta = obj["meta"]
            else:
                records.append(obj)
    if meta is None:
        raise SystemExit("%s: no meta line; the scan did not finish" % path)
    return records, meta


def report_dict(records, meta, confirm=None):
    try:
        inv, rep = report_from(records, meta, confirm)
    except Inconclusive as exc:
        return {"conclusive": False, "structure": None, "caveats": [str(exc)],
                "assumptions": list(ASSUMPTIONS), "form": meta["form"]}, None
    d = rep.to_dict()
    d["form"] = meta["form"]
    d["partial_bounds"] = {str(k): v for k, v in inv.partial_bounds.items()}
    d["d_infinity_bound"] = inv.d_infinity_bound
    d["ord"] = inv.ord
    row = "%s | p=%d | %s | corank %d | e=%s | %s" % (
        meta["form"], meta["p"], d["structure"], d["corank"], d["e"],
        "; ".join("%s nu=%s: %s" % (m, nu, s) for m, summ in sorted(meta["summary"].items())
                  for nu, s in sorted(summ.items())))
    return d, row


def _emit_report(records, meta, confirm, stream):
    try:
        d, row = report_dict(records, meta, confirm)
    except IntegrityError as exc:
        print(json.dumps({"error": "integrity", "detail": str(exc)}), file=stream)
        return 2
    print(json.dumps({"report": d}, sort_keys=True), file=stream)
    if row:
        print(row, file=stream)
    return 0


def cmd_structure(args):
    records, meta = read_scan(args.scan)
    confirm = read_scan(args.confirm) if args.confirm else None
    return _emit_report(records, meta, confirm, sys.stdout)


def cmd_verify(args):
    from .checks import run_suite
    ok = run_suite(full=args.full, out=print)
    print("verify:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


def parser():
    ap = argparse.ArgumentParser(prog="kurinum", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("descriptor", help="descriptor JSON path or bundled label (e.g. 389.a1)")
        p.add_argument("--p", type=int, help="the prime p (default: from the descriptor)")
        p.add_argument("--r", type=int, help="critical point r (default k/2)")
        p.add_argument("--cache", help="cache directory [env KURINUM_CACHE]")
        p.add_argument("--no-cache", action="store_true")
        p.add_argument("--normalization", choices=("global", "per-r"))
        p.add_argument("--data", help="directory searched for descriptors [env KURINUM_DATA]")

    b = sub.add_parser("build", help="build, cut and normalize the eigensymbol")
    common(b)
    b.set_defaults(func=cmd_build)

    s = sub.add_parser("scan", help="Kurihara numbers over admissible moduli")
    common(s)
    s.add_argument("--m", type=int, help="admissibility level (primes in P_m)")
    s.add_argument("--strata", help="comma separated nu values (default 0,1,2)")
    s.add_argument("--bound", type=int, help="prime bound [env KURINUM_BOUND]")
    s.add_argument("--workers", type=int, help="worker processes [env KURINUM_WORKERS]")
    s.add_argument("--eta-seed", type=int, dest="eta_seed", help="skip this many primitive roots")
    s.add_argument("--include-predicted-zero", action="store_true")
    s.add_argument("--only", help="restrict to these n, e.g. 79*109,7*13")
    s.add_argument("--extra-primes", dest="extra_primes", help="admissible primes beyond the bound")
    s.add_argument("--no-escalate", action="store_true")
    s.add_argument("--esc-bound", type=int, dest="esc_bound", help="prime bound of the m+1 rerun")
    s.add_argument("--esc-only", dest="esc_only", help="restrict the m+1 rerun to these n")
    s.add_argument("--esc-extra", dest="esc_extra", help="extra primes for the m+1 rerun")
    s.add_argument("--out", help="write JSON lines here instead of stdout")
    s.add_argument("--report", action="store_true", help="also print the structure report")
    s.add_argument("--full", action="store_true", help="prime bound 10000 for the large published counts (long)")
    s.set_defaults(func=cmd_scan)

    st = sub.add_parser("structure", help="structure report from a scan file")
    st.add_argument("scan")
    st.add_argument("--confirm", help="a rerun at a larger bound, needed for a conclusive report")
    st.set_defaults(func=cmd_structure)

    v = sub.add_parser("verify", help="run the invariant suites")
    v.add_argument("--full", action="store_true", help="include the slower levels")
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv=None):
    args = parser().parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        print("error in stage %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
