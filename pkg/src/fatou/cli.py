"""Command-line surface: reproducible experiments with CSV/JSON outputs.

Subcommands: iterate, invariance, limit, curve, coverage, linearize, sweep,
diophantine, sector.  A config file (INI key=value sections) supplies
defaults; every flag overrides its config key.  Each output embeds the
effective config and the package version; numbers are written with 17
significant digits so reruns are byte-identical apart from the
generated_at stamp.  FATOU_PRECISION=double-double switches the
linearization recursion to extended precision.
"""

from __future__ import annotations

import argparse
import cmath
import configparser
import json
import math
import os
import sys
from datetime import datetime, timezone
from fractions import Fraction

import numpy as np

from . import __version__
from .algebra import jet_from_json
from .diophantine import (
    GOLDEN,
    SILVER,
    QuadraticIrrational,
    check_sector_lemma,
    check_siegel,
    continued_fraction,
    max_c_detail,
)
from .dynamics import (
    EMPIRICAL_MIN_N,
    Grid2D,
    ORBIT_CSV_HEADER,
    RegionUNM,
    check_equivariance,
    estimate_limit_map,
    from_transformed,
    invariant_curve,
    iterate,
    orbit_csv_rows,
    verify_forward_invariance,
    waxis_coverage,
)
from .linearization import (
    linear_family,
    majorant_split,
    parameter_sweep,
    quadratic_test_family,
    result_to_json,
    solve_psi,
)
from .maps import four_map_composite, map_from_json, rank0_map, rank1_map, rotation_map


def _f17(x: float) -> str:
    return format(float(x), ".17g")


def parse_complex(text: str) -> complex:
    """Accept '1+2i', '-0.5i', '3', '1e-3-2e4i'."""
    return complex(text.strip().replace(" ", "").replace("i", "j"))


def parse_point(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"expected 'z,w', got {text!r}")
    return parse_complex(parts[0]), parse_complex(parts[1])


def parse_theta(spec: str):
    """golden | silver | p/q | float | quad:P,D,Q -> rotation-number object."""
    s = spec.strip().lower()
    if s == "golden":
        return GOLDEN
    if s == "silver":
        return SILVER
    if s.startswith("quad:"):
        p, d, q = (int(x) for x in s[5:].split(","))
        return QuadraticIrrational(p, d, q)
    if "/" in s:
        num, den = s.split("/")
        return Fraction(int(num), int(den))
    return float(s)


def theta_float(theta) -> float:
    if isinstance(theta, QuadraticIrrational):
        return theta.value()
    return float(theta)


def build_map(args):
    preset = args.map
    if preset is None:
        raise ValueError("--map is required (rank0|rank1|rotation|four|<json file>)")
    if preset == "rank0":
        return rank0_map(int(args.l or 2))
    if preset == "rank1":
        return rank1_map()
    if preset == "rotation":
        if args.theta is None:
            raise ValueError("rotation preset requires --theta (multiple of 2*pi)")
        th = parse_theta(args.theta)
        frac = th if isinstance(th, Fraction) else None
        return rotation_map(2 * math.pi * theta_float(th), theta_frac=frac)
    if preset == "four":
        return four_map_composite()
    if os.path.exists(preset):
        with open(preset) as fh:
            return map_from_json(fh.read())
    raise ValueError(f"unknown map preset or missing file: {preset!r}")


# -- config and output plumbing ----------------------------------------------


CONFIG_KEYS = {
    "map": ("map", "preset"),
    "l": ("map", "l"),
    "theta": ("map", "theta"),
    "region": ("region", "nm"),
    "seed": ("iteration", "seed"),
    "seed_transformed": ("iteration", "seed_transformed"),
    "n": ("iteration", "n"),
    "record_every": ("iteration", "record_every"),
    "tol": ("iteration", "tol"),
    "n_max": ("iteration", "n_max"),
    "samples": ("sampling", "samples"),
    "steps": ("sampling", "steps"),
    "seed_offset": ("sampling", "seed_offset"),
    "grid": ("grid", "shape"),
    "grid_origin": ("grid", "origin"),
    "grid_step": ("grid", "step"),
    "r": ("linearize", "r"),
    "order": ("linearize", "order"),
    "c": ("diophantine", "c"),
    "N": ("diophantine", "n_exponent"),
    "kmax": ("diophantine", "kmax"),
    "eps": ("curve", "eps"),
    "segments": ("curve", "segments"),
    "target": ("curve", "target"),
    "R": ("coverage", "radius"),
    "z0": ("coverage", "z0_transformed"),
    "ring_samples": ("coverage", "ring_samples"),
    "targets": ("coverage", "targets"),
    "precision": ("precision", "mode"),
    "out": ("output", "path"),
}


def apply_config(args: argparse.Namespace) -> argparse.Namespace:
    if not getattr(args, "config", None):
        return args
    cp = configparser.ConfigParser()
    if not cp.read(args.config):
        raise ValueError(f"cannot read config file {args.config!r}")
    for attr, (section, key) in CONFIG_KEYS.items():
        if getattr(args, attr, None) is None and cp.has_option(section, key):
            setattr(args, attr, cp.get(section, key))
    return args


def effective_config(args: argparse.Namespace) -> dict:
    # "out" is plumbing, not experiment semantics: identical experiments
    # written to different paths must stay byte-identical
    skip = {"func", "config", "out"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip or v is None:
            continue
        out[k] = v if isinstance(v, (int, float, str, bool)) else str(v)
    return out


def _meta(args) -> dict:
    return {
        "artifact": "fatou",
        "version": __version__,
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "config": effective_config(args),
    }


def write_json(args, payload: dict) -> None:
    doc = {"meta": _meta(args), "data": _sanitize(payload)}
    text = json.dumps(doc, indent=1)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _sanitize(obj):
    """Strict-JSON form: complex -> [re, im], arrays -> lists, non-finite -> None."""
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        c = complex(obj)
        return [_sanitize(c.real), _sanitize(c.imag)]
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, Fraction):
        return [obj.numerator, obj.denominator]
    return obj


def write_csv(args, header, rows) -> None:
    lines = []
    meta = _meta(args)
    lines.append(f"# artifact=fatou version={meta['version']}")
    lines.append(f"# generated_at={meta['generated_at']}")
    for k, v in meta["config"].items():
        lines.append(f"# {k}={v}")
    lines.append(",".join(header))
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, float):
                cells.append(_f17(cell))
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _precision(args) -> str:
    mode = getattr(args, "precision", None) or os.environ.get("FATOU_PRECISION", "double")
    if mode not in ("double", "double-double"):
        raise ValueError("FATOU_PRECISION must be 'double' or 'double-double'")
    return mode


def _region(args) -> RegionUNM | None:
    if getattr(args, "region", None) is None:
        return None
    n, m = (float(x) for x in str(args.region).split(","))
    return RegionUNM(n, m)


# -- subcommands -----------------------------------------------------------------


def cmd_iterate(args) -> int:
    m = build_map(args)
    region = _region(args)
    if args.seed_transformed is not None:
        seed = parse_point(str(args.seed_transformed))
        transformed = True
    elif args.seed is not None:
        seed = parse_point(str(args.seed))
        transformed = False
    else:
        raise ValueError("iterate needs --seed or --seed-transformed")
    n = int(args.n or 1000)
    rec = iterate(m, seed, n, record_every=int(args.record_every or 1),
                  transformed=transformed, region=region,
                  stop_tol=float(args.tol) if args.tol is not None else 1e-12)
    write_csv(args, ORBIT_CSV_HEADER, orbit_csv_rows(rec))
    return 2 if rec.escaped else 0


def cmd_invariance(args) -> int:
    m = build_map(args)
    region = _region(args)
    if region is None:
        raise ValueError("invariance needs --region N,M")
    rep = verify_forward_invariance(
        m, region, int(args.samples or 1000), int(args.steps or 1000),
        offset=int(args.seed_offset or 0))
    write_json(args, {
        "region": {"N": region.N, "M": region.M},
        "samples": rep.samples,
        "n_steps": rep.n_steps,
        "ok": rep.ok,
        "violations": [
            {"sample": i, "step": s, "zhat": [z.real, z.imag], "w": [w.real, w.imag]}
            for i, s, z, w in rep.violations[:100]
        ],
        "violation_count": len(rep.violations),
        "recorded_sufficient_N": EMPIRICAL_MIN_N,
    })
    return 0


def cmd_limit(args) -> int:
    m = build_map(args)
    shape = str(args.grid or "10x10").lower().split("x")
    nz, nw = int(shape[0]), int(shape[1])
    origin = parse_point(str(args.grid_origin)) if args.grid_origin else None
    if origin is None:
        region = _region(args)
        if region is None:
            raise ValueError("limit needs --grid-origin or --region")
        origin = (region.N + 1.0, 0.5)
    grid = Grid2D(origin[0], origin[1], nz, nw, float(args.grid_step or 1e-3))
    est = estimate_limit_map(
        m, grid, tol=float(args.tol) if args.tol is not None else 1e-12,
        n_max=int(args.n_max or 10**6))
    payload = {
        "grid": {"zhat0": origin[0], "w0": origin[1], "nz": nz, "nw": nw,
                 "step": grid.step},
        "iterations_used": est.iterations_used,
        "sup_step_delta": est.sup_step_delta,
        "stop_reason": est.stop_reason,
        "numerical_rank": est.numerical_rank,
        "rotation_order": est.rotation_order,
        "limits_z": est.limits_z,
        "limits_w": est.limits_w,
        "singular_values": None if est.s1 is None else {"s1": est.s1, "s2": est.s2},
        "oscillation": est.oscillation,
    }
    if est.numerical_rank is not None and est.stop_reason != "no_limit_full_sequence":
        payload["equivariance_defect"] = check_equivariance(
            m, est, tol=float(args.tol) if args.tol is not None else 1e-12,
            n_max=2 * (int(args.n_max or 10**6)))
    write_json(args, payload)
    return 0


def cmd_curve(args) -> int:
    m = build_map(args)
    if args.seed_transformed is None:
        raise ValueError("curve needs --seed-transformed")
    zh, w0 = parse_point(str(args.seed_transformed))
    p = (complex(from_transformed(np.complex128(zh))), w0)
    target = parse_point(str(args.target)) if args.target else (0.0, 0.0)
    cur = invariant_curve(m, p, target, int(args.segments or 16),
                          int(args.n_max or 1000), float(args.eps or 1e-2))
    write_json(args, {
        "seed_transformed": [zh.real, zh.imag, w0.real, w0.imag],
        "eps": float(args.eps or 1e-2),
        "hit_count": len(cur.sphere_hits),
        "hits": [[z.real, z.imag, w.real, w.imag] for z, w in cur.sphere_hits],
        "hit_params": [[int(n), float(t)] for n, t in cur.hit_params],
        "invariance_defect": cur.invariance_defect,
    })
    return 0


def cmd_coverage(args) -> int:
    m = build_map(args)
    zh = parse_complex(str(args.z0 or "200"))
    z0 = complex(from_transformed(np.complex128(zh)))
    cov = waxis_coverage(m, float(args.R or 1.0), z0,
                         ring_samples=int(args.ring_samples or 256),
                         targets=int(args.targets or 20),
                         tol=float(args.tol) if args.tol is not None else 1e-8,
                         n_max=int(args.n_max or 10**5))
    write_json(args, {
        "R": cov.R,
        "z0": [cov.z0.real, cov.z0.imag],
        "covered": cov.covered,
        "windings": cov.windings,
        "precondition_sup": cov.precondition_sup,
    })
    return 0


def cmd_linearize(args) -> int:
    if args.theta is None:
        raise ValueError("linearize needs --theta")
    th = parse_theta(args.theta)
    r = float(args.r or 1.0)
    lam = r * cmath.exp(2j * math.pi * theta_float(th))
    D = int(args.order or 20)
    preset = args.map or "quadratic"
    if preset == "quadratic":
        jet = quadratic_test_family(lam)
    elif preset == "linear":
        jet = linear_family(lam)
    elif os.path.exists(preset):
        with open(preset) as fh:
            jet = jet_from_json(fh.read())
    else:
        raise ValueError(f"unknown jet preset or missing file: {preset!r}")
    mode = _precision(args)
    res = solve_psi(jet, lam, D,
                    precision="dd" if mode == "double-double" else "double")
    split = None
    if res.M > 0 and not isinstance(th, Fraction):
        n_exp = float(args.N or 1.0)
        c = float(args.c) if args.c is not None else max_c_detail(th, n_exp, max(D, 64))[0]
        split = majorant_split(res.M, th, c, n_exp, D)
    doc = json.loads(result_to_json(res, split))
    write_json(args, doc)
    return 0


def cmd_sweep(args) -> int:
    if args.theta is None or args.r is None:
        raise ValueError("sweep needs --theta and --r r1,r2,...")
    th = parse_theta(args.theta)
    r_values = [float(x) for x in str(args.r).split(",")]
    D = int(args.order or 20)
    family = quadratic_test_family if (args.map or "quadratic") == "quadratic" \
        else linear_family
    sw = parameter_sweep(family, th, r_values, D)
    write_json(args, {
        "r_values": sw.r_values,
        "smoothness_ok": sw.smoothness_ok,
        "smoothness_ratios": {str(k): v for k, v in sw.smoothness_ratios.items()},
        "failures": sw.failures,
        "residuals": {str(r): res.residual for r, res in sw.results.items()},
        "psi_norm_rates": {
            str(r): float(np.max(res.psi_norms()[2:])) for r, res in sw.results.items()
        },
    })
    return 0


def cmd_diophantine(args) -> int:
    if args.theta is None:
        raise ValueError("diophantine needs --theta")
    th = parse_theta(args.theta)
    if isinstance(th, Fraction):
        cf = continued_fraction(th, 64)
        write_json(args, {
            "theta": float(th),
            "rational": cf.rational,
            "partial_quotients": cf.partial_quotients,
        })
        return 0
    n_exp = float(args.N or 1.0)
    kmax = int(args.kmax or 10**5)
    c_open, c_min, argmin, running = max_c_detail(th, n_exp, kmax)
    c = float(args.c) if args.c is not None else c_open
    cert = check_siegel(th, c, n_exp, kmax)
    cf = continued_fraction(th, 40)
    write_json(args, {
        "theta": theta_float(th),
        "c": c,
        "N": n_exp,
        "k_max": kmax,
        "ok": cert.ok,
        "violations": cert.violations[:50],
        "max_c": c_open,
        "minimizing_k": argmin,
        "running_minima_k": [k for k, _ in running],
        "partial_quotients": cf.partial_quotients[:40],
        "rational_flag": cf.rational,
        "convergent_denominators": [q for _, q in cf.convergents[:20]],
    })
    return 0


def cmd_sector(args) -> int:
    if args.theta is None or args.r is None:
        raise ValueError("sector needs --theta and --r r1,r2,...")
    th = parse_theta(args.theta)
    r_values = [float(x) for x in str(args.r).split(",")]
    rep = check_sector_lemma(th, r_values, int(args.kmax or 1000),
                             N=float(args.N or 1.0))
    write_json(args, {
        "theta": rep.theta,
        "c_prime": rep.c_prime,
        "ok": rep.ok,
        "per_r": {
            str(r): {
                "sector_violations": len(res["sector_violations"]),
                "complement_violations": len(res["complement_violations"]),
                "final_violations": len(res["final_violations"]),
                "chained_violations": len(res["chained_violations"]),
                "drift_count": len(res["drift"]),
                "drift_first": res["drift"][0] if res["drift"] else None,
            }
            for r, res in rep.results.items()
        },
    })
    return 0


# -- parser -----------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI config file; flags override its keys")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--map", help="rank0|rank1|rotation|four or a map JSON file")
    p.add_argument("--l", help="Bl conjugation order for rank0 (default 2)")
    p.add_argument("--theta", help="golden|silver|p/q|float|quad:P,D,Q")
    p.add_argument("--tol", help="stopping tolerance")
    p.add_argument("--n-max", dest="n_max", help="iteration cap")
    p.add_argument("--precision", choices=["double", "double-double"])
    p.add_argument("--seed-offset", dest="seed_offset", help="low-discrepancy offset")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fatou",
        description="numerical experiments on invariant Fatou components of "
                    "C^2 automorphisms",
    )
    sub = ap.add_subparsers(dest="command")

    p = sub.add_parser("iterate", help="orbit CSV for one seed")
    _add_common(p)
    p.add_argument("--seed", help="original coordinates 'a+bi,c+di'")
    p.add_argument("--seed-transformed", dest="seed_transformed",
                   help="transformed chart seed 'a+bi,c+di'")
    p.add_argument("--n", help="number of steps")
    p.add_argument("--record-every", dest="record_every")
    p.add_argument("--region", help="N,M for membership flags")
    p.set_defaults(func=cmd_iterate)

    p = sub.add_parser("invariance", help="forward-invariance sampling report")
    _add_common(p)
    p.add_argument("--region", help="N,M")
    p.add_argument("--samples")
    p.add_argument("--steps")
    p.set_defaults(func=cmd_invariance)

    p = sub.add_parser("limit", help="limit-map estimate with rank verdict")
    _add_common(p)
    p.add_argument("--grid", help="NZxNW, e.g. 10x10")
    p.add_argument("--grid-origin", dest="grid_origin", help="'zhat0,w0' transformed")
    p.add_argument("--grid-step", dest="grid_step")
    p.add_argument("--region", help="N,M used to place the default grid")
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser("curve", help="invariant curve and sphere crossings")
    _add_common(p)
    p.add_argument("--seed-transformed", dest="seed_transformed")
    p.add_argument("--target", help="'z,w' center of the sphere (default origin)")
    p.add_argument("--segments", help="samples per curve step")
    p.add_argument("--eps", help="sphere radius")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("coverage", help="argument-principle w-axis coverage")
    _add_common(p)
    p.add_argument("--R", help="target disk radius")
    p.add_argument("--z0", help="Re(-1/z0) transformed value, e.g. 200")
    p.add_argument("--ring-samples", dest="ring_samples")
    p.add_argument("--targets")
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("linearize", help="solve the conjugation recursion")
    _add_common(p)
    p.add_argument("--r", help="|lambda| (default 1)")
    p.add_argument("--order", help="truncation degree D")
    p.add_argument("--c", help="certificate constant (default max_c)")
    p.add_argument("--N", help="certificate exponent (default 1)")
    p.set_defaults(func=cmd_linearize)

    p = sub.add_parser("sweep", help="parameter sweep over r with FD smoothness")
    _add_common(p)
    p.add_argument("--r", help="comma list of r values")
    p.add_argument("--order")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("diophantine", help="small-divisor certificate")
    _add_common(p)
    p.add_argument("--c")
    p.add_argument("--N")
    p.add_argument("--kmax")
    p.set_defaults(func=cmd_diophantine)

    p = sub.add_parser("sector", help="sector bound sweep off the unit circle")
    _add_common(p)
    p.add_argument("--r", help="comma list of r values")
    p.add_argument("--N")
    p.add_argument("--kmax")
    p.set_defaults(func=cmd_sector)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if not getattr(args, "command", None):
        ap.print_usage(sys.stderr)
        return 1
    try:
        args = apply_config(args)
        return args.func(args)
    except (ValueError, OSError, ArithmeticError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        if "--help" not in (argv or []):
            sys.stderr.write(f"run 'fatou {args.command} --help' for usage\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
