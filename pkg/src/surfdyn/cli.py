"""Command-line entry point: ``surfdyn {spectral,orbit,scan,mobius}``.

Exit codes: 0 success, 2 bad input (parse error, singular matrix),
3 zero entropy, 4 point not on the surface, 5 degenerate fiber (partial
output is still written and flagged), 6 periodic center or orbit too short.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import dynamics, heights, mobius, presets, spectral
from .errors import (DegenerateFiber, InsufficientOrbit, InvalidPoint, NotInvertible,
                     NotOnSurface, NullEntropy, PeriodicCenter, SurfDynError)
from .exact_arith import QuadNum, normalize
from .surfaces import SurfacePoint, find_points, surface_from_json

EXIT_OK, EXIT_INPUT, EXIT_ENTROPY, EXIT_OFF_SURFACE, EXIT_DEGENERATE, EXIT_ORBIT = 0, 2, 3, 4, 5, 6


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    preset: str | None = None
    surface: str | None = None
    lattice: str | None = None
    curves: str | None = None
    point: str | None = None
    matrix: str | None = None
    depth: int = 5
    precision: int = 128
    height_bound: float = 3.0
    max_period: int = 12
    tmin: int = 4
    tmax: int = 12
    format: str = "json"
    out: str | None = None
    stdout: bool = False
    threads: int = 1
    forward_only: bool = False

    def validate(self):
        for name in ("depth", "precision", "max_period", "threads"):
            if getattr(self, name) < 1:
                raise InputError(f"--{name.replace('_', '-')} must be positive")
        if self.height_bound <= 0:
            raise InputError("--height-bound must be positive")
        if self.tmin > self.tmax:
            raise InputError("--tmin must not exceed --tmax")
        if self.format not in ("json", "csv"):
            raise InputError(f"unknown format {self.format!r}")


def _default_precision() -> int:
    raw = os.environ.get("SURFDYN_PRECISION")
    if raw is None:
        return 128
    try:
        return int(raw)
    except ValueError:
        return 128


def _load_json(arg: str):
    """JSON given inline or as a path to a file."""
    p = Path(arg)
    try:
        text = p.read_text() if p.is_file() else arg
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot parse JSON from {arg!r}: {exc}") from None


def _surface(cfg: RunConfig):
    if cfg.surface:
        try:
            return surface_from_json(_load_json(cfg.surface))
        except (KeyError, ValueError, TypeError) as exc:
            raise InputError(f"bad surface file: {exc}") from None
    if cfg.preset:
        return presets.surface(cfg.preset)
    raise InputError("give --preset or --surface")


def _point(cfg: RunConfig) -> SurfacePoint:
    if not cfg.point:
        raise InputError("--point is required")
    try:
        return SurfacePoint.from_json(_load_json(cfg.point))
    except (TypeError, ValueError, InvalidPoint) as exc:
        raise InputError(f"bad point: {exc}") from None


def _emit(cfg: RunConfig, text: str):
    if not text.endswith("\n"):
        text += "\n"
    if cfg.out and not cfg.stdout:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2)


def _note(msg: str):
    print(msg, file=sys.stderr)


def _q(x):
    return x.to_json() if isinstance(x, QuadNum) else str(x)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_spectral(cfg: RunConfig) -> int:
    if cfg.lattice:
        data = _load_json(cfg.lattice)
        try:
            lat = spectral.NSLattice(tuple(map(tuple, data["gram"])),
                                     tuple(data.get("labels", [f"e{i}" for i in range(len(data["gram"]))])),
                                     ample=tuple(data["ample"]) if data.get("ample") else None)
            pb = spectral.PullbackMap(tuple(map(tuple, data["pullback"])), lat)
        except (KeyError, ValueError, TypeError) as exc:
            raise InputError(f"bad lattice file: {exc}") from None
        curves = data.get("curves", [])
    elif cfg.preset:
        lat = presets.lattice_for(cfg.preset)
        pb = presets.composite_pullback(cfg.preset)
        curves = []
    else:
        raise InputError("give --preset or --lattice")
    if cfg.curves:
        curves = _load_json(cfg.curves)
    ent = spectral.entropy(pb)
    out = {"charpoly": list(ent.charpoly), "lambda": _q(ent.lam), "lambda_float": f"{ent.lam_float:.17g}",
           "h_top": f"{ent.h_top:.17g}", "exact": ent.exact}
    eig = spectral.nef_eigenclasses(pb, lat)
    out.update({"nu_plus": [_q(c) for c in eig.nu_plus.coeffs],
                "nu_minus": [_q(c) for c in eig.nu_minus.coeffs],
                "nu": [_q(c) for c in eig.nu.coeffs], "nu_square": _q(eig.nu_square)})
    if ent.exact:
        out["nu_integral"] = [str(c) for c in spectral.integral_nu(eig).coeffs]
    tests = []
    for c in curves:
        v = spectral.periodic_curve_test(eig, tuple(c))
        tests.append({"class": list(c), "periodic": v.periodic, "pairing_nu": _q(v.pairing_nu)})
    out["curve_tests"] = tests
    null = [tuple(t["class"]) for t in tests if t["periodic"]]
    if null:
        try:
            out["ample_perturbation"] = spectral.ample_perturbation(eig.nu, null, lat).to_json()
        except SurfDynError as exc:
            out["ample_perturbation"] = {"error": str(exc)}
    else:
        out["ample_perturbation"] = None
    _emit(cfg, _dumps(out))
    return EXIT_OK


def cmd_orbit(cfg: RunConfig) -> int:
    surf = _surface(cfg)
    pt = _point(cfg)
    if not surf.on_surface(pt):
        raise NotOnSurface(f"{pt!r} is not on the surface")
    grid = tuple(range(cfg.tmin, cfg.tmax + 1))
    rec = dynamics.orbit(surf, pt, -cfg.depth, cfg.depth)
    if rec.degenerate_hit and (rec.truncated_at[0] == 0 or rec.truncated_at[1] == 0):
        _emit(cfg, _dumps({"partial": True, "orbit": rec.to_json()}))
        _note(f"degenerate fiber: {rec.degenerate_hit}")
        return EXIT_DEGENERATE
    rep = dynamics.counting_report(surf, pt, cfg.depth, grid, cfg.forward_only,
                                   cfg.precision, record=rec)
    partial = rep.canonical.partial
    if cfg.format == "csv":
        _emit(cfg, rep.to_csv())
    else:
        obj = rep.to_json()
        obj["partial"] = partial
        _emit(cfg, _dumps(obj))
    c = rep.canonical
    _note(f"h_plus={float(c.h_plus):.12g} h_minus={float(c.h_minus):.12g} "
          f"h_D={float(c.h_D):.12g} error_bound={float(c.error_bound):.3g} "
          f"depth={c.depth_used} orbit_invariant={float(rep.invariant):.12g}")
    if partial:
        _note(f"partial result: degenerate fiber at {rec.degenerate_hit}")
        return EXIT_DEGENERATE
    return EXIT_OK


def cmd_scan(cfg: RunConfig) -> int:
    surf = _surface(cfg)
    pts = find_points(surf, cfg.height_bound, threads=cfg.threads)
    res = dynamics.periodic_scan(surf, cfg.height_bound, cfg.max_period, threads=cfg.threads,
                                 depth=cfg.depth, precision=cfg.precision, points=pts)
    obj = {"points": [{"point": p.to_json(), "h_H": f"{dynamics.ample_height(p):.17g}"} for p in pts],
           "scan": res.to_json()}
    _emit(cfg, _dumps(obj))
    mph = res.max_periodic_height
    _note(f"{len(pts)} points, {len(res.hits)} periodic, {len(res.indeterminate)} unresolved; "
          f"max periodic height {'n/a' if mph is None else f'{mph:.6g}'}")
    return EXIT_OK


def cmd_mobius(cfg: RunConfig) -> int:
    if not cfg.matrix:
        raise InputError("--matrix is required")
    F = _load_json(cfg.matrix)
    try:
        m = mobius.MobiusMap.of(F)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad matrix: {exc}") from None
    ty = mobius.classify(m)
    fps = mobius.fixed_points(m)

    def fp_json(p):
        if isinstance(p, tuple):
            return [p[0].to_json(), "1"]
        return p.to_json()

    out = {"matrix": m.to_json(), "type": ty.value,
           "fixed_points": None if fps is None else [fp_json(p) for p in fps]}
    if ty is mobius.MobiusType.I_periodic:
        out["order"] = mobius.order(m)
    rows = None
    if cfg.point and ty is not mobius.MobiusType.I_periodic:
        x = normalize([int(c) for c in _load_json(cfg.point)])
        grid = list(range(cfg.tmin, cfg.tmax + 1))
        fit = mobius.growth_regime(m, x, grid)
        rows = list(zip(grid, fit.counts))
        out["point"] = x.to_json()
        out["counts"] = [{"T": t, "N": n} for t, n in rows]
        out["regime"] = fit.regime
        out["residual_linear"] = f"{fit.residual_linear:.17g}"
        out["residual_exponential"] = f"{fit.residual_exponential:.17g}"
    if cfg.format == "csv":
        if rows is None:
            raise InputError("csv output needs --point and a non-periodic map")
        _emit(cfg, "T,N\n" + "".join(f"{t},{n}\n" for t, n in rows))
    else:
        _emit(cfg, _dumps(out))
    return EXIT_OK


COMMANDS = {"spectral": cmd_spectral, "orbit": cmd_orbit, "scan": cmd_scan, "mobius": cmd_mobius}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="surfdyn", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, surface=True):
        if surface:
            p.add_argument("--preset", choices=("wehler", "triple"))
            p.add_argument("--surface", help="surface JSON file or inline JSON")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", help="write data here instead of stdout")
        p.add_argument("--stdout", action="store_true", help="write data to stdout")
        p.add_argument("--precision", type=int, default=_default_precision())
        p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("spectral", help="entropy and nef eigenclasses of a pullback")
    p.add_argument("--preset", choices=("wehler", "triple"))
    p.add_argument("--lattice", help="JSON with gram, pullback, optional ample, labels, curves")
    p.add_argument("--curves", help="JSON list of classes to test against nu")
    common(p, surface=False)

    p = sub.add_parser("orbit", help="canonical heights and orbit counts of a point")
    common(p)
    p.add_argument("--point", required=True, help='e.g. [["0","1","0"],["1","0","0"]]')
    p.add_argument("--depth", type=int, default=5)
    p.add_argument("--tmin", type=int, default=4, help="smallest log T on the grid")
    p.add_argument("--tmax", type=int, default=12, help="largest log T on the grid")
    p.add_argument("--forward-only", action="store_true")

    p = sub.add_parser("scan", help="rational points and periodic points up to a height bound")
    common(p)
    p.add_argument("--height-bound", type=float, default=3.0)
    p.add_argument("--max-period", type=int, default=12)
    p.add_argument("--depth", type=int, default=5)

    p = sub.add_parser("mobius", help="classify a 2x2 integer matrix acting on P^1")
    common(p, surface=False)
    p.add_argument("--matrix", required=True, help="e.g. [[2,0],[0,1]]")
    p.add_argument("--point", help="e.g. [1,1]")
    p.add_argument("--tmin", type=int, default=2)
    p.add_argument("--tmax", type=int, default=8)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    fields = {k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__}
    cfg = RunConfig(**fields)
    try:
        cfg.validate()
        return COMMANDS[cfg.command](cfg)
    except (InputError, NotInvertible) as exc:
        _note(f"error: {exc}")
        return EXIT_INPUT
    except NullEntropy as exc:
        _note(f"error: zero entropy: {exc}")
        return EXIT_ENTROPY
    except NotOnSurface as exc:
        _note(f"error: {exc}")
        return EXIT_OFF_SURFACE
    except DegenerateFiber as exc:
        _note(f"error: degenerate fiber (axis {exc.axis}, step {exc.step}): {exc}")
        return EXIT_DEGENERATE
    except (PeriodicCenter, InsufficientOrbit) as exc:
        _note(f"error: {exc}")
        return EXIT_ORBIT


if __name__ == "__main__":
    sys.exit(main())
