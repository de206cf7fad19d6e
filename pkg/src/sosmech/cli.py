"""Command line front door: run, verify, generate, lb.

Every command prints (or writes) a JSON report.  Reports are deterministic
given the same inputs and seed, apart from the ``timing`` field.  The exit
status is 1 when a requested check fails and 2 on invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import json
import math
import os
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import __version__
from .errors import CapExceeded, InvalidParams, SosMechError
from .instance import Instance, welfare
from .instances import (
    FAMILIES,
    NAMED,
    gen_random,
    make_named,
    parse_family,
    verify_lb_deterministic,
    verify_lb_dsos,
    verify_lb_sos2,
    verify_lb_ud_rand,
)
from .io import SCHEMA_VERSION, dumps, instance_from_dict, instance_to_dict, jsonable, rat
from .mechanisms import BUCKET, SAMPLING, THRESHOLD, CoinRealization, Kind, MechanismSpec, deterministic, grid_k, log2_exact
from .oracle import PARTITION_CAP, coin_space, exact_expected_welfare, opt_welfare
from .sabotage import SABOTAGES
from .valuation import Setting, check_all, check_separable, tightest_d
from .verifier import (
    audit_downward_closure,
    audit_ic_ir,
    audit_monotone,
    certify_ratio,
    compare_characterizations,
    realization_rule,
)

CHECKS = ("sos", "strong_sos", "separable", "closure", "ic_ir", "monotone", "cycles", "ratio")
DEFAULT_CAP_M = 5
SKIP_CLOSURE = "skip_closure"


def default_seed() -> int:
    return int(os.environ.get("IDV_SEED", "0"))


def parse_value(text: str):
    """'3' -> 3, '1/100' or '0.01' -> Fraction, anything else stays a string."""
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return Fraction(text)
    except ValueError:
        return text


def parse_params(pairs) -> dict:
    out = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise InvalidParams(f"expected key=value, got {pair!r}")
        out[key.strip()] = parse_value(value.strip())
    return out


def parse_profile(text: str):
    raw = json.loads(text)

    def tup(x):
        return tuple(tup(y) for y in x) if isinstance(x, list) else x

    return tup(raw)


def _mechanism_spec(args, instance: Instance | None = None) -> MechanismSpec:
    k = getattr(args, "k", None)
    if instance is not None and k is not None and instance.setting is Setting.COMB_SINGLE_SIGNAL:
        if instance.valuation.k != k:
            raise InvalidParams(f"--k {k} does not match the instance grid size {instance.valuation.k}")
    return MechanismSpec(Kind(args.mechanism.upper()), d=Fraction(args.d or 1), k=k)


def _sabotage(name):
    if name is None or name == SKIP_CLOSURE:
        return None, None
    try:
        return SABOTAGES[name]
    except KeyError:
        raise InvalidParams(f"unknown sabotage {name!r}; choose from {sorted(SABOTAGES) + [SKIP_CLOSURE]}") from None


def load_target(target: str, params: dict, *, check_closure: bool = True) -> Instance:
    """A JSON instance file, or a named instance id built from ``params``."""
    path = Path(target)
    if path.exists():
        data = json.loads(path.read_text())
        return instance_from_dict(data, check_closure=check_closure)
    if target.upper() in NAMED:
        return make_named(target, **params).instance
    raise InvalidParams(f"{target!r} is neither an instance file nor a named instance")


def enforce_caps(instance: Instance, cap_n: int, cap_m: int) -> None:
    if instance.m > cap_m:
        raise CapExceeded(f"m = {instance.m} exceeds --cap-m {cap_m}")
    if instance.n > cap_n:
        raise CapExceeded(f"n = {instance.n} exceeds --cap-n {cap_n}")


# Monte Carlo


def sample_realization(spec: MechanismSpec, instance: Instance, rng: random.Random) -> CoinRealization:
    """Draw one realization without enumerating the coin space."""
    n = instance.n

    def partition(branch=None):
        return CoinRealization(branch=branch, partition=frozenset(i for i in range(n) if rng.random() < 0.5))

    kind = spec.kind
    if kind in (Kind.RS_V, Kind.RS_VCG, Kind.RANDOM_SAMPLING_COMB):
        return partition()
    k = grid_k(instance)
    if kind is Kind.RANDOM_THRESHOLD:
        return CoinRealization(threshold=rng.randint(1, k - 1))
    if kind is Kind.RANDOM_BUCKET:
        return CoinRealization(threshold=rng.randint(1, log2_exact(k)))
    p = spec.mixing_probability(k)
    if rng.random() < p:
        if kind is Kind.K_HL:
            return CoinRealization(branch=THRESHOLD, threshold=rng.randint(1, k - 1))
        return CoinRealization(branch=BUCKET, threshold=rng.randint(1, log2_exact(k)))
    return partition(SAMPLING)


def mc_estimate(spec, instance, profile, samples: int, seed: int, run) -> tuple[Fraction, float]:
    """Sample mean of welfare and its standard error."""
    rng = random.Random(f"{seed}|{profile!r}")
    cache: dict = {}
    total = Fraction(0)
    sq = 0.0
    values = []
    for _ in range(samples):
        r = sample_realization(spec, instance, rng)
        w = cache.get(r)
        if w is None:
            w = cache[r] = welfare(instance, run(r, instance, profile, with_payments=False).allocation, profile)
        total += w
        values.append(float(w))
    mean = total / samples
    if samples > 1:
        mf = float(mean)
        sq = sum((x - mf) ** 2 for x in values) / (samples - 1)
    return mean, math.sqrt(sq / samples)


def _profile_row(job):
    spec, sabotage, instance, profile, mode, samples, seed, cap_n = job
    run = deterministic(spec) if sabotage is None else SABOTAGES[sabotage][1]
    _, opt = opt_welfare(instance, profile)
    row = {"profile": profile, "opt": opt}
    exact = None
    if mode == "exact" or instance.n <= cap_n:
        coins = coin_space(spec, instance, cap_n=cap_n)
        exact = exact_expected_welfare(spec, instance, profile, coins=coins, mechanism=run)
        row["expected_welfare"] = exact
        row["ratio"] = Fraction(1) if opt == 0 else exact / opt
    if mode == "mc":
        mean, se = mc_estimate(spec, instance, profile, samples, seed, run)
        row["mc_mean"] = mean
        row["mc_se"] = repr(se)
        row["mc_ratio"] = Fraction(1) if opt == 0 else mean / opt
        if exact is not None:
            row["mc_within_5se"] = abs(float(mean - exact)) <= 5 * se + 1e-12
    return row


def _map(fn, jobs, workers: int):
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def cmd_run(args) -> dict:
    params = parse_params(args.param)
    instance = load_target(args.instance, params)
    enforce_caps(instance, 10**9, args.cap_m)
    spec = _mechanism_spec(args, instance)
    sabotage = args.sabotage
    sab_spec, _ = _sabotage(sabotage)
    if sab_spec is not None:
        spec = sab_spec
    # surface KNotPowerOfTwo / CapExceeded before any work is farmed out
    if args.exact:
        coin_space(spec, instance, cap_n=args.cap_n)
    else:
        sample_realization(spec, instance, random.Random(0))
    if args.profile is not None:
        profiles = [instance.valuation.validate_profile(parse_profile(args.profile))]
    else:
        profiles = list(instance.valuation.profiles())
    mode = "exact" if args.exact else "mc"
    jobs = [(spec, sabotage, instance, p, mode, args.mc, args.seed, args.cap_n) for p in profiles]
    rows = _map(_profile_row, jobs, args.jobs)
    key = "ratio" if mode == "exact" else "mc_ratio"
    min_ratio = min(r[key] for r in rows)
    results = {
        "instance": instance.name,
        "mechanism": {"kind": spec.kind.value, "d": spec.d, "k": spec.k},
        "mode": mode,
        "profiles": rows,
        "min_ratio": min_ratio,
        "min_ratio_float": float(min_ratio),
    }
    if mode == "mc":
        results["samples"] = args.mc
        checked = [r["mc_within_5se"] for r in rows if "mc_within_5se" in r]
        results["mc_agrees_with_exact"] = all(checked) if checked else None
        if checked and not all(checked):
            results["ok"] = False
    if args.csv:
        write_csv(args.csv, rows)
    return results


def write_csv(path, rows) -> None:
    buf = _stdio.StringIO()
    cols = [c for c in ("profile", "opt", "expected_welfare", "ratio", "mc_mean", "mc_se", "mc_ratio") if c in rows[0]]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([json.dumps(jsonable(r[c])) if c == "profile" else jsonable(r[c]) for c in cols])
    Path(path).write_text(buf.getvalue())


# verify


def parse_checks(text: str):
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        name, _, arg = item.partition(":")
        if name not in CHECKS:
            raise InvalidParams(f"unknown check {name!r}; choose from {', '.join(CHECKS)}")
        if name == "ratio" and not arg:
            raise InvalidParams("ratio needs a bound, e.g. ratio:1/4")
        if arg and name in ("ratio", "sos", "strong_sos"):
            arg = Fraction(arg)
        out.append((name, arg or None))
    return out


def _corpus(args, params) -> list[Instance]:
    if args.instance is not None:
        return [load_target(args.instance, params, check_closure=args.sabotage != SKIP_CLOSURE)]
    if args.family is None:
        raise InvalidParams("verify needs an instance or --family")
    return [
        gen_random(args.family, args.n, args.m, args.k or 4, args.seed + j, d=args.d)
        for j in range(args.count)
    ]


def _check_one(name, arg, instance: Instance, spec, run, d) -> dict:
    val = instance.valuation
    if name in ("sos", "strong_sos"):
        rep = check_all(val, arg or d, strong=name == "strong_sos")
        out = {"ok": rep.holds, "tightest_d": rep.tightest_d}
        if rep.witness is not None:
            out["witness"] = {"agent": rep.agent, "bundle": rep.bundle, **vars(rep.witness)}
        return out
    if name == "separable":
        return {"ok": check_separable(val) is not None}
    if name == "closure":
        rep = audit_downward_closure(instance)
        return {"ok": rep.ok, "witness": rep.witness}
    if name == "ic_ir":
        rep = audit_ic_ir(spec, instance, mechanism=run, max_violations=5)
        out = {"ok": rep.ok, "deviations_checked": rep.checked}
        if not rep.ok:
            out["violations"] = [
                {
                    "kind": v.kind,
                    "realization": v.realization.describe(),
                    "agent": v.agent,
                    "true_profile": v.true_profile,
                    "misreport": v.misreport,
                    "utility_truth": v.utility_truth,
                    "utility_lie": v.utility_lie,
                }
                for v in rep.violations
            ]
        return out
    if name == "monotone":
        if not instance.single_param:
            return {"ok": True, "skipped": "monotonicity applies to single-parameter instances"}
        for realization, _ in coin_space(spec, instance):
            rep = audit_monotone(realization_rule(spec, realization, instance, run), instance)
            if not rep.ok:
                agent, lo, hi = rep.witness
                return {"ok": False, "realization": realization.describe(), "agent": agent, "wins_at": lo, "loses_at": hi}
        return {"ok": True}
    if name == "cycles":
        graphs = agree = neg = 0
        synth_bad = 0
        first = None
        for realization, _ in coin_space(spec, instance):
            for g in compare_characterizations(run, realization, instance):
                graphs += 1
                neg += not g.no_negative_cycle
                if g.synthesized_ok is False:
                    synth_bad += 1
                if g.audit_ok == g.no_negative_cycle:
                    agree += 1
                elif first is None:
                    first = {"realization": realization.describe(), "agent": g.agent, "others": g.others}
        out = {
            "ok": agree == graphs and synth_bad == 0 and neg == 0,
            "graphs": graphs,
            "characterizations_agree": agree == graphs,
            "negative_cycles": neg,
            "synthesis_failures": synth_bad,
        }
        if first:
            out["disagreement"] = first
        return out
    raise InvalidParams(f"unhandled check {name}")


def cmd_verify(args) -> dict:
    params = parse_params(args.param)
    checks = parse_checks(args.checks)
    sab_spec, run = _sabotage(args.sabotage)
    corpus = _corpus(args, params)
    for inst in corpus:
        enforce_caps(inst, args.cap_n, args.cap_m)
    spec = sab_spec if sab_spec is not None else _mechanism_spec(args)
    run = run if run is not None else deterministic(spec)
    d = Fraction(args.d) if args.d is not None else Fraction(1)
    results = {"mechanism": spec.kind.value, "sabotage": args.sabotage, "instances": len(corpus), "checks": {}}
    ok = True
    for name, arg in checks:
        if name == "ratio":
            rep = certify_ratio(spec, corpus, arg, mechanism=run)
            entry = {"ok": rep.passed, "bound": rep.bound, "min_ratio": rep.min_ratio, "profiles": rep.checked}
            if rep.worst is not None:
                entry["worst"] = {"instance": corpus[rep.worst[0]].name, "profile": rep.worst[1]}
            results["checks"][f"ratio:{rat(arg)}"] = entry
            ok &= rep.passed
            continue
        per = []
        for inst in corpus:
            entry = _check_one(name, arg, inst, spec, run, d)
            entry["instance"] = inst.name
            per.append(entry)
        passed = all(e["ok"] for e in per)
        failing = [e for e in per if not e["ok"]]
        results["checks"][name] = {"ok": passed, "failed": len(failing), "first_failure": failing[0] if failing else None}
        ok &= passed
    results["ok"] = ok
    return results


# generate


def family_claims(family: str, d) -> list[str]:
    name, d = parse_family(family, d)
    suffix = "" if d == 1 else f":{rat(d)}"
    return {
        "SOS_CONCAVE_SUM": ["sos"],
        "SEPARABLE": ["separable"],
        "STRONG_SOS": ["strong_sos"],
        "D_SOS": ["sos" + suffix],
        "D_STRONG_SOS": ["strong_sos" + suffix],
    }[name]


def cmd_generate(args) -> tuple[dict, str]:
    params = parse_params(args.param)
    target = args.target
    if target.upper() in NAMED:
        instance = make_named(target, **params).instance
        td = tightest_d(instance.valuation)
        claims = [] if td is None else ["sos" if td == 1 else f"sos:{rat(td)}"]
    else:
        name, _ = parse_family(target, args.d)
        if name not in FAMILIES:
            raise InvalidParams(f"unknown family or instance {target!r}")
        instance = gen_random(target, args.n, args.m, args.k, args.seed, d=args.d)
        claims = family_claims(target, args.d)
        td = tightest_d(instance.valuation)
    text = dumps(instance_to_dict(instance, claims))
    reloaded = dumps(instance_to_dict(instance_from_dict(json.loads(text)), claims))
    results = {
        "instance": instance.name,
        "claims": claims,
        "tightest_d": td,
        "round_trip_identical": reloaded == text,
        "out": args.out,
        "ok": reloaded == text,
    }
    return results, text


# lb


def cmd_lb(args) -> dict:
    params = parse_params(args.param)
    ident = args.id.upper()
    named = make_named(ident, **{k: v for k, v in params.items() if k not in ("grid_step", "max_profiles", "max_outcomes")})
    if ident == "LB_SOS_2":
        res = verify_lb_sos2(**params)
    elif ident == "UD_RAND":
        res = verify_lb_ud_rand(**params)
    elif ident == "LB_DSOS":
        res = verify_lb_dsos(**params)
    elif ident in ("LB_DC_N1", "UD_DET", "EX_1_2"):
        res = verify_lb_deterministic(ident, **params)
    else:
        raise InvalidParams(f"no lower-bound search for {args.id!r}")
    claim = named.expected_claim
    if claim.direction == "<=":
        ok = res.best_ratio <= claim.bound
    elif claim.direction == "~":
        ok = abs(res.best_ratio - claim.bound) <= Fraction(1, 100)
    else:
        ok = True
    return {
        "id": ident,
        "params": params,
        "best_ratio": res.best_ratio,
        "best_ratio_float": float(res.best_ratio),
        "target": {"quantity": claim.quantity, "direction": claim.direction, "bound": claim.bound, "float": float(claim.bound)},
        "argmax": res.argmax,
        "evaluated": res.evaluated,
        "details": res.details,
        "ok": ok,
    }


# plumbing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sosmech", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, mechanism=True):
        sp.add_argument("--seed", type=int, default=default_seed(), help="default from IDV_SEED, else 0")
        sp.add_argument("--param", action="append", metavar="KEY=VALUE", help="named-instance or search parameter")
        sp.add_argument("--out", help="write the report here instead of stdout")
        if mechanism:
            sp.add_argument("--mechanism", default="RS_V", type=str.upper, choices=[k.value for k in Kind])
            sp.add_argument("--d", type=Fraction)
            sp.add_argument("--k", type=int)
            sp.add_argument("--sabotage", help="swap in a deliberately broken variant")
            sp.add_argument("--cap-n", type=int, default=PARTITION_CAP)
            sp.add_argument("--cap-m", type=int, default=DEFAULT_CAP_M)

    run = sub.add_parser("run", help="expected welfare and ratio per profile")
    run.add_argument("instance", help="instance JSON file or named instance id")
    common(run)
    mode = run.add_mutually_exclusive_group(required=True)
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--mc", type=int, metavar="N", help="Monte Carlo samples per profile")
    run.add_argument("--profile", help="JSON signal profile, e.g. [1,2]")
    run.add_argument("--csv", help="also write per-profile ratios as CSV")
    run.add_argument("--jobs", type=int, default=1)

    ver = sub.add_parser("verify", help="structure checks, audits and ratio certification")
    ver.add_argument("instance", nargs="?", help="instance JSON file or named instance id")
    common(ver)
    ver.add_argument("--checks", required=True, help=f"comma list of {', '.join(CHECKS)} (ratio:BOUND)")
    ver.add_argument("--family", help="generate a corpus from this family instead")
    ver.add_argument("--count", type=int, default=10)
    ver.add_argument("--n", type=int, default=3)
    ver.add_argument("--m", type=int, default=0)

    gen = sub.add_parser("generate", help="write an instance file")
    gen.add_argument("target", help="family name (e.g. D_SOS(2)) or named instance id")
    common(gen, mechanism=False)
    gen.add_argument("--n", type=int, default=3)
    gen.add_argument("--m", type=int, default=0)
    gen.add_argument("--k", type=int, default=4)
    gen.add_argument("--d", type=Fraction)

    lb = sub.add_parser("lb", help="lower-bound grid searches")
    lb.add_argument("id")
    common(lb, mechanism=False)
    return p


def _echo(args) -> dict:
    return {k: (str(v) if isinstance(v, Fraction) else v) for k, v in sorted(vars(args).items()) if k != "func"}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    instance_text = None
    try:
        if args.command == "run":
            results = cmd_run(args)
        elif args.command == "verify":
            results = cmd_verify(args)
        elif args.command == "generate":
            results, instance_text = cmd_generate(args)
        else:
            results = cmd_lb(args)
    except (SosMechError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    elapsed = time.perf_counter() - start

    if args.command == "generate":
        if args.out:
            Path(args.out).write_text(instance_text)
            print(dumps({"schema_version": SCHEMA_VERSION, "command": _echo(args), "results": results}), end="")
        else:
            sys.stdout.write(instance_text)
        return 0 if results["ok"] else 1

    report = {
        "schema_version": SCHEMA_VERSION,
        "command": _echo(args),
        "seed": args.seed,
        "results": results,
        "timing": {"seconds": round(elapsed, 3)},
    }
    text = dumps(report)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if results.get("ok", True) else 1


if __name__ == "__main__":
    sys.exit(main())
