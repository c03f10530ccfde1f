"""Command-line front end: ``ptasep <command> [options]``.

Exit codes: 0 success, 1 verification failure, 2 invalid input,
3 numerical non-convergence.  JSON numbers carry 17 significant digits and
every output embeds a run manifest.  Set ``SOURCE_DATE_EPOCH`` to pin the
manifest timestamp, which makes repeated runs byte-identical.
"""
from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bethe import BetheRootSet, RingGeometry, RootSolverError, solve_bethe_roots
from .finite import (FiniteQuery, InitialCondition, joint_cdf_general, joint_cdf_step,
                     mixed_event_prob_finite)
from .limit import ScaledQuery, eval_F, eval_F_mixed, limit_roots
from .numerics import DEFAULTS, ContourScheme
from .sim import SimConfig, exact_cdf_small, mc_joint_cdf, simulate_path

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NONCONV = 0, 1, 2, 3
CACHE_ENV = "PTASEP_CACHE_DIR"


class InputError(ValueError):
    pass


# ---------------------------------------------------------------------------
# serialization

def _enc(obj):
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return format(v, ".17g") if math.isfinite(v) else "null"
    if isinstance(obj, (complex, np.complexfloating)):
        return _enc([obj.real, obj.imag])
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_enc(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_enc(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON with every float written to 17 significant digits."""
    return _enc(obj) + "\n"


def _timestamp():
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        t = datetime.datetime.fromtimestamp(int(epoch), datetime.timezone.utc)
    else:
        t = datetime.datetime.now(datetime.timezone.utc)
    return t.strftime("%Y-%m-%dT%H:%M:%SZ")


def manifest(args, config: dict) -> dict:
    return {"command": args.command, "config": config, "tolerances": json.loads(DEFAULTS.to_json()),
            "version": __version__, "timestamp": _timestamp()}


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv(man: dict, header, rows) -> str:
    lines = ["# manifest: " + dumps(man).strip(), ",".join(header)]
    lines += [",".join(format(float(v), ".17g") for v in r) for r in rows]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# argument helpers

def _floats(s):
    return [float(v) for v in str(s).split(",")] if s not in (None, "") else []


def _ints(s):
    return [int(v) for v in str(s).split(",")] if s not in (None, "") else []


def _load_query(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read query file {path}: {e}") from e


def _geom(L, N):
    if L is None or N is None:
        raise InputError("--L and --N are required")
    try:
        return RingGeometry(int(L), int(N))
    except ValueError as e:
        raise InputError(str(e)) from e


def _signs(s, m):
    if not s:
        return None
    s = list(s)
    if len(s) != m or any(c not in "+-" for c in s):
        raise InputError(f"--signs needs {m} characters from '+-'")
    if s[-1] != "-":
        raise InputError("the last event must be '-' (x >= a, or height <= x in the limit)")
    return s


def _scheme(args, radii):
    if radii is None:
        return None
    return ContourScheme(radii, args.nodes, adaptive=not args.fixed, workers=args.threads)


# ---------------------------------------------------------------------------
# roots

def _cache_path(geom, z):
    d = os.environ.get(CACHE_ENV)
    if not d:
        return None
    key = f"{geom.L}:{geom.N}:{z.real!r}:{z.imag!r}:{DEFAULTS.root_residual!r}"
    return Path(d) / f"roots-{hashlib.sha256(key.encode()).hexdigest()[:20]}.json"


def cmd_roots(args):
    z = complex(args.z_re, args.z_im)
    if args.limit:
        if not 0 < abs(z) <= DEFAULTS.finite_power_ceiling:
            raise InputError(f"limit roots need 0 < |z| <= {DEFAULTS.finite_power_ceiling}")
        rs = limit_roots(z, args.dtau, args.dgamma, args.dx, kmax=args.kmax)
        cfg = {"z": z, "limit": True, "dtau": args.dtau, "dgamma": args.dgamma, "dx": args.dx,
               "kmax": rs.kmax}
        table = [{"k": int(k), "left": l, "right": r}
                 for k, l, r in zip(range(-rs.kmax, rs.kmax + 1), rs.left, rs.right)]
        body = {"manifest": manifest(args, cfg), "kmax": rs.kmax, "residual": rs.residual(),
                "lattice": table}
        _emit(dumps(body), args.out)
        return EXIT_OK
    geom = _geom(args.L, args.N)
    if not 0 < abs(z) < geom.r0:
        raise InputError(f"need 0 < |z| < r0 = {geom.r0:.17g}, got |z| = {abs(z):.17g}")
    cache = _cache_path(geom, z)
    if cache is not None and cache.exists():
        rs = BetheRootSet.from_json(cache.read_text())
    else:
        rs = solve_bethe_roots(geom, z)
        if cache is not None:
            cache.parent.mkdir(parents=True, exist_ok=True)
            cache.write_text(rs.to_json())
    cfg = {"L": geom.L, "N": geom.N, "z": z}
    body = {"manifest": manifest(args, cfg), "r0": geom.r0, "z": z, "left": list(rs.left),
            "right": list(rs.right), "residual": rs.residual}
    _emit(dumps(body), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# finite-time distribution

def _finite_inputs(args):
    d = _load_query(args.query) if args.query else {}
    L, N = d.get("L", args.L), d.get("N", args.N)
    geom = _geom(L, N)
    k, a, t = (d.get(key) or parse(getattr(args, key))
               for key, parse in (("k", _ints), ("a", _ints), ("t", _floats)))
    try:
        q = FiniteQuery(k, a, t)
    except ValueError as e:
        raise InputError(str(e)) from e
    y = d.get("y") or _ints(args.y)
    Y = None
    if y:
        try:
            Y = InitialCondition(y).check(geom)
        except ValueError as e:
            raise InputError(f"initial condition: {e}") from e
    signs = _signs(d.get("signs") or args.signs, q.m)
    radii = d.get("radii") or _floats(getattr(args, "radii", None)) or None
    return geom, q, Y, signs, radii


def cmd_finite_cdf(args):
    geom, q, Y, signs, radii = _finite_inputs(args)
    scheme = _scheme(args, radii)
    if scheme is None and (args.fixed or args.nodes != 64 or args.threads > 1):
        from .finite import _signed_radii, default_finite_radii
        r = _signed_radii(geom, signs) if signs else default_finite_radii(geom, q.m)
        scheme = ContourScheme(r, args.nodes, adaptive=not args.fixed, workers=args.threads)
    try:
        if signs and "+" in signs:
            if Y is not None:
                raise InputError("mixed events are supported for the step initial condition only")
            res = mixed_event_prob_finite(geom, q, signs, scheme)
        elif Y is not None:
            res = joint_cdf_general(geom, Y, q, scheme)
        else:
            res = joint_cdf_step(geom, q, scheme)
    except ValueError as e:
        raise InputError(str(e)) from e
    cfg = {"L": geom.L, "N": geom.N, "query": q.to_dict(), "signs": signs,
           "y": None if Y is None else list(Y.y), "scheme": scheme.to_dict() if scheme else None}
    rec = res.to_dict()
    rec.update({"geom": {"L": geom.L, "N": geom.N}, "query": q.to_dict(), "seedless": True})
    body = {"manifest": manifest(args, cfg), "result": rec}
    Yc = Y or InitialCondition.step(geom.N)
    if args.exact:
        body["exact"] = exact_cdf_small(geom, Yc, q.canonical() if not signs else q, signs)
    if args.mc:
        cfg["mc"] = {"samples": args.mc, "seed": args.seed}
        mc = mc_joint_cdf(SimConfig(geom, Yc, max(q.t), args.seed, args.mc), q, signs)
        body["mc"] = mc.to_dict()
        body["mc"]["z_score"] = (res.value - mc.estimate) / mc.stderr if mc.stderr else None
    _emit(dumps(body), args.out)
    return EXIT_OK if res.converged else EXIT_NONCONV


# ---------------------------------------------------------------------------
# limit distribution

def _limit_query(args):
    d = _load_query(args.query) if args.query else {}
    gamma = d.get("gamma") or _floats(args.gamma)
    tau = d.get("tau") or _floats(args.tau)
    x = d.get("x") or _floats(args.x)
    if args.grid and not x:
        x = [0.0] * len(tau)
    try:
        q = ScaledQuery(gamma, tau, x)
    except ValueError as e:
        raise InputError(str(e)) from e
    signs = _signs(d.get("signs") or args.signs, q.m)
    radii = d.get("radii") or _floats(args.radii) or None
    return q, signs, radii


def _grid(spec):
    try:
        lo, hi, n = spec.split(":")
        return np.linspace(float(lo), float(hi), int(n))
    except ValueError as e:
        raise InputError("--grid expects start:stop:count") from e


def cmd_limit_F(args):
    q, signs, radii = _limit_query(args)
    scheme = _scheme(args, radii)
    if scheme is None and (args.fixed or args.nodes != 64 or args.threads > 1 or q.m > 1):
        from .limit import default_limit_radii, signed_limit_radii
        r = signed_limit_radii(signs) if signs else default_limit_radii(q.m)
        scheme = ContourScheme(r, args.nodes, adaptive=q.m == 1 and not args.fixed,
                               workers=args.threads)

    def one(qq):
        try:
            if signs and "+" in signs:
                return eval_F_mixed(qq, signs=signs, scheme=scheme)
            return eval_F(qq, scheme=scheme)
        except ValueError as e:
            raise InputError(str(e)) from e

    cfg = {"query": q.to_dict(), "signs": signs, "scheme": scheme.to_dict() if scheme else None}
    if args.grid:
        xs = _grid(args.grid)
        cfg["grid"] = {"sweep": "last x", "values": list(xs)}
        rows, ok = [], True
        for x in xs:
            r = one(q.with_x(list(q.x[:-1]) + [float(x)]))
            ok &= r.converged
            rows.append((x, r.value, r.im_residue, r.nodes))
        _emit(_csv(manifest(args, cfg), ["x", "F", "im_residue", "nodes"], rows), args.out)
        return EXIT_OK if ok else EXIT_NONCONV
    r = one(q)
    rec = r.to_dict()
    rec.update({"query": q.to_dict(), "seedless": True})
    _emit(dumps({"manifest": manifest(args, cfg), "result": rec}), args.out)
    return EXIT_OK if r.converged else EXIT_NONCONV


# ---------------------------------------------------------------------------
# simulation

def cmd_simulate(args):
    geom, q, Y, signs, _ = _finite_inputs(args)
    Y = Y or InitialCondition.step(geom.N)
    horizon = args.horizon if args.horizon is not None else max(q.t)
    try:
        cfg = SimConfig(geom, Y, horizon, args.seed, args.samples)
    except ValueError as e:
        raise InputError(str(e)) from e
    if args.trajectory:
        traj = simulate_path(cfg)
        Path(args.trajectory).write_text(
            "# manifest: " + dumps(manifest(args, cfg.to_dict())).strip() + "\n" + traj.to_csv())
    try:
        est = mc_joint_cdf(cfg, q, signs)
    except ValueError as e:
        raise InputError(str(e)) from e
    body = {"manifest": manifest(args, {**cfg.to_dict(), "query": q.to_dict(), "signs": signs}),
            "estimate": est.to_dict()}
    _emit(dumps(body), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verification

def cmd_verify(args):
    from .verify import run_suite

    if args.threads > 1:
        os.environ.setdefault("OMP_NUM_THREADS", str(args.threads))
    try:
        checks = run_suite(args.suite, quick=args.quick)
    except ValueError as e:
        raise InputError(str(e)) from e
    failed = [c for c in checks if not c.passed]
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"[{status}] {c.suite}: {c.name}: error {c.error:.3e} (tol {c.tol:.1e}, "
              f"{c.seconds:.1f} s)", file=sys.stderr)
    body = {"manifest": manifest(args, {"suite": args.suite, "quick": args.quick}),
            "passed": not failed, "checks": [c.to_dict() for c in checks]}
    _emit(dumps(body), args.out)
    return EXIT_FAIL if failed else EXIT_OK


# ---------------------------------------------------------------------------

def _common(p):
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--threads", type=int, default=1, help="worker cap for quadrature nodes")


def _quad(p):
    p.add_argument("--radii", help="comma-separated contour radii |z_j|")
    p.add_argument("--nodes", type=int, default=64, help="nodes per circle (start value)")
    p.add_argument("--fixed", action="store_true", help="disable adaptive node doubling")


def _finite_args(p):
    p.add_argument("--query", help="JSON file with L, N, k, a, t and optional y, signs, radii")
    p.add_argument("--L", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--k", help="particle labels, comma-separated")
    p.add_argument("--a", help="thresholds, comma-separated")
    p.add_argument("--t", help="times, comma-separated")
    p.add_argument("--y", help="initial positions (default: step x_i = i - N)")
    p.add_argument("--signs", help="'-' for x >= a, '+' for x < a, one per point")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ptasep", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("roots", help="Bethe roots for a ring or the limiting root lattice")
    _common(p)
    p.add_argument("--L", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--z-re", type=float, required=True)
    p.add_argument("--z-im", type=float, default=0.0)
    p.add_argument("--limit", action="store_true", help="roots of exp(-zeta^2/2) = z")
    p.add_argument("--dtau", type=float, default=1.0)
    p.add_argument("--dgamma", type=float, default=0.0)
    p.add_argument("--dx", type=float, default=0.0)
    p.add_argument("--kmax", type=int)
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("finite-cdf", help="finite-time joint distribution on the ring")
    _common(p)
    _quad(p)
    _finite_args(p)
    p.add_argument("--exact", action="store_true", help="also report the uniformization value")
    p.add_argument("--mc", type=int, default=0, help="also run a simulation with this many samples")
    p.add_argument("--seed", type=int, default=20171009)
    p.set_defaults(func=cmd_finite_cdf)

    p = sub.add_parser("limit-F", help="large-time limit distribution F")
    _common(p)
    _quad(p)
    p.add_argument("--query", help="JSON file with gamma, tau, x and optional signs, radii")
    p.add_argument("--gamma")
    p.add_argument("--tau")
    p.add_argument("--x")
    p.add_argument("--signs")
    p.add_argument("--grid", help="start:stop:count sweep of the last x; writes CSV")
    p.set_defaults(func=cmd_limit_F)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of a joint event")
    _common(p)
    _finite_args(p)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=20171009)
    p.add_argument("--horizon", type=float)
    p.add_argument("--trajectory", help="write one sample path as an event CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run verification suites")
    _common(p)
    p.add_argument("suite", choices=["identities", "oracles", "limit-props", "l-independence",
                                     "all"])
    p.add_argument("--quick", action="store_true", help="smaller trial counts")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except InputError as e:
        print(f"ptasep: invalid input: {e}", file=sys.stderr)
        return EXIT_INPUT
    except RootSolverError as e:
        print(f"ptasep: root solver failed: {e}", file=sys.stderr)
        return EXIT_NONCONV
    except (ArithmeticError, np.linalg.LinAlgError) as e:
        print(f"ptasep: numerical failure: {e}", file=sys.stderr)
        return EXIT_NONCONV


if __name__ == "__main__":
    sys.exit(main())
