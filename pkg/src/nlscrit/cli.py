"""Command-line interface: every module writes CSV/JSON into --out-dir plus a manifest."""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import harness, multiscale, nls, painleve
from .hodograph import initial_data, local, potentials, solve


def _write_csv(path, header, columns):
    def w(tmp):
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in zip(*columns):
                fh.write(",".join(f"{float(v):.17g}" for v in row) + "\n")
    return str(harness.atomic_write(path, w))


def _write_json(path, obj):
    def w(tmp):
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(obj, fh, indent=2, default=harness._json_default)
            fh.write("\n")
    return str(harness.atomic_write(path, w))


def _via_atomic(path, method):
    return str(harness.atomic_write(path, method))


def _floats(text):
    return [float(s) for s in text.split(",") if s.strip()]


def _params(args) -> dict:
    if args.ic == "satsuma_yajima":
        return {"A0": args.A0}
    if args.ic == "symmetric_mu":
        return {"A0": args.A0, "mu": args.mu}
    if args.ic == "nonsymmetric":
        return {"alpha": args.alpha}
    return {}


def _potential(args):
    return potentials.catalog_f(args.ic, **_params(args))


# ---------------------------------------------------------------------------
# painleve

def cmd_painleve_series(args, out):
    s = painleve.series_coefficients(args.K)
    k = np.arange(1, s.K + 1)
    ratios = np.concatenate([s.ratios(), [math.nan]])
    files = [_write_csv(out / "series.csv", ("k", "a_k", "ode_coefficient", "ratio_next"),
                        (k, s.coefficients[1:], s.ode_coefficients[1:], ratios))]
    if args.zeta:
        z = np.array([complex(t) for t in args.zeta.split(",")])
        w = painleve.evaluate_series(s, z)
        kst, om = painleve.series_error_estimate(s, z)
        files.append(_write_csv(out / "series_values.csv",
                                ("re_zeta", "im_zeta", "re_omega", "im_omega", "k_star", "omitted"),
                                (z.real, z.imag, np.real(w), np.imag(w), kst, om)))
    return files


def cmd_painleve_line(args, out):
    line = painleve.ComplexLine(complex(args.a), complex(args.b), args.y0, args.n_points)
    sol = painleve.solve_line(line, tol=args.tol)
    print(f"max residual {sol.residual_norm:.3e}, interior {sol.interior_residual:.3e}")
    return [_via_atomic(out / "line.csv", sol.to_csv)]


def cmd_painleve_sector(args, out):
    sec = painleve.solve_sector(R=args.R, phi_max=args.phi_max, n_r=args.n_r, n_phi=args.n_phi)
    RR, PP = np.meshgrid(sec.r, sec.phi, indexing="ij")
    print(f"max |Omega| {sec.max_abs():.6g}, Laplace residual {sec.laplace_residual:.2e}")
    return [_write_csv(out / "sector.csv", ("r", "phi", "re_omega", "im_omega"),
                       (RR.ravel(), PP.ravel(), sec.omega.real.ravel(), sec.omega.imag.ravel())),
            _write_json(out / "sector_provenance.json", sec.boundary_provenance)]


def cmd_painleve_pole(args, out):
    rep = painleve.locate_first_real_pole(start=args.start, threshold=args.threshold)
    print(f"first real pole {rep.pole_location:.10f}")
    return [_write_json(out / "pole.json", dict(pole_location=rep.pole_location,
                                                bracket=list(rep.bracket), crossing=rep.crossing,
                                                blowup_threshold=rep.blowup_threshold,
                                                start=rep.start))]


# ---------------------------------------------------------------------------
# hodograph

def cmd_hodograph_critical(args, out):
    cp = solve.find_critical_point(_potential(args))
    print(json.dumps(cp.to_dict()))
    return [_write_json(out / "critical_point.json", cp.to_dict())]


def cmd_hodograph_initdata(args, out):
    f = _potential(args)
    curve = initial_data.reconstruct_initial_data(f, n=args.n)
    x = np.linspace(args.x_min, args.x_max, args.points)
    return [_via_atomic(out / "initial_data.csv", lambda p: curve.to_csv(p, x))]


def cmd_hodograph_solve(args, out):
    f = _potential(args)
    curve = initial_data.reconstruct_initial_data(f)
    x = np.linspace(args.x_min, args.x_max, args.points)
    cp = solve.find_critical_point(f)
    if args.t > cp.t0:
        raise SystemExit(f"t = {args.t} is past the catastrophe time {cp.t0:.6g}")
    u, v = multiscale.semiclassical_on(f, curve, cp, x, args.t)
    return [_write_csv(out / "hodograph.csv", ("x", "u", "v"), (x, u, v))]


def cmd_hodograph_local(args, out):
    f = _potential(args)
    cp = solve.find_critical_point(f)
    t = cp.t0 + args.tbar
    x = cp.x0 + cp.v0 * args.tbar + np.linspace(-args.width, args.width, args.points)
    u, v = local.local_solution(cp, x, cp.s0, t)
    return [_write_csv(out / "local.csv", ("x", "u", "v"), (x, u, v))]


# ---------------------------------------------------------------------------
# nls, compare, scaling

def cmd_nls_evolve(args, out):
    f = _potential(args)
    curve = initial_data.reconstruct_initial_data(f)
    eps = args.epsilon
    wf = nls.from_madelung(curve, eps, N=args.N, filter_threshold=args.filter)
    t_end = args.t_end
    if t_end is None:
        t_end = solve.find_critical_point(f).t0
    conf = nls.EvolutionConfig.for_epsilon(eps, t_end, dt=args.dt, order=args.order,
                                           filter_threshold=args.filter,
                                           allow_small_epsilon=args.allow_small_epsilon)
    snaps = _floats(args.snap_times) if args.snap_times else []
    res = nls.evolve(wf, conf, snap_times=snaps)
    files = [_via_atomic(out / "trace.csv", res.trace_to_csv)]
    for t, w in sorted(res.snapshots.items()):
        files.append(_via_atomic(out / f"snapshot_t{t:.6f}.csv", w.to_csv))
    m0, m1 = res.trace[0, 1], res.trace[-1, 1]
    print(f"relative mass drift {abs(m1 - m0) / m0:.2e}")
    return files


def cmd_compare_window(args, out):
    f = _potential(args)
    cp = solve.find_critical_point(f)
    curve = initial_data.reconstruct_initial_data(f)
    eps = args.epsilon
    t = cp.t0 if args.t is None else args.t
    wf = nls.from_madelung(curve, eps, N=args.N)
    res = nls.evolve(wf, nls.EvolutionConfig.for_epsilon(eps, t, dt=args.dt))
    chart = multiscale.ConjectureChart(cp, eps)
    semi = (f, curve) if t <= cp.t0 else None
    rep = multiscale.compare_window(res.field, chart, gamma=args.gamma, semiclassical=semi)
    print(f"window L_inf: u {rep.linf_u:.4e}, v {rep.linf_v:.4e}")
    return [_via_atomic(out / "window.csv", rep.to_csv),
            _write_json(out / "window.json", rep.to_dict())]


def cmd_scaling_run(args, out):
    cfg = harness.SweepConfig(N=args.N, dt=args.dt, gamma=args.gamma, beta=args.beta,
                              half_width=args.half_width)
    res = harness.run_experiment(args.experiment, ic=args.ic, params=_params(args),
                                 epsilons=_floats(args.epsilons), config=cfg, out_dir=out,
                                 threads=args.threads, command=args.argv)
    fit = res.fit
    print(f"{args.experiment}: a = {fit.exponent:.4f}, r = {fit.correlation:.6f}, "
          f"std err {fit.std_error:.2e}")
    for eps, why in res.failures.items():
        print(f"  eps = {eps}: {why}")
    return res.manifest.outputs


# ---------------------------------------------------------------------------

def _add_ic(p):
    p.add_argument("--ic", default="satsuma_yajima", choices=potentials.CATALOG)
    p.add_argument("--A0", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--alpha", type=float, default=0.1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nlscrit", description=__doc__)
    ap.add_argument("--out-dir", default=".", help="directory for CSV/JSON outputs")
    ap.add_argument("--manifest", default=None, help="manifest path (default OUT_DIR/manifest.json)")
    ap.add_argument("--threads", type=int, default=1, help="worker processes for eps sweeps")
    top = ap.add_subparsers(dest="group", required=True)

    pg = top.add_parser("painleve").add_subparsers(dest="cmd", required=True)
    p = pg.add_parser("series")
    p.add_argument("--K", type=int, default=40)
    p.add_argument("--zeta", default="", help="comma-separated complex points, e.g. 10,12+3j")
    p.set_defaults(func=cmd_painleve_series)
    p = pg.add_parser("line")
    p.add_argument("--a", default="1j")
    p.add_argument("--b", default="0")
    p.add_argument("--y0", type=float, default=10.0)
    p.add_argument("--n-points", type=int, default=8000)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_painleve_line)
    p = pg.add_parser("sector")
    p.add_argument("--R", type=float, default=20.0)
    p.add_argument("--phi-max", type=float, default=painleve.SECTOR_HALF_ANGLE - 0.05)
    p.add_argument("--n-r", type=int, default=48)
    p.add_argument("--n-phi", type=int, default=48)
    p.set_defaults(func=cmd_painleve_sector)
    p = pg.add_parser("pole")
    p.add_argument("--start", type=float, default=12.0)
    p.add_argument("--threshold", type=float, default=1e6)
    p.set_defaults(func=cmd_painleve_pole)

    hg = top.add_parser("hodograph").add_subparsers(dest="cmd", required=True)
    p = hg.add_parser("critical")
    _add_ic(p)
    p.set_defaults(func=cmd_hodograph_critical)
    p = hg.add_parser("initdata")
    _add_ic(p)
    p.add_argument("--n", type=int, default=513)
    p.add_argument("--x-min", type=float, default=-10.0)
    p.add_argument("--x-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=1001)
    p.set_defaults(func=cmd_hodograph_initdata)
    p = hg.add_parser("solve")
    _add_ic(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--x-min", type=float, default=-3.0)
    p.add_argument("--x-max", type=float, default=3.0)
    p.add_argument("--points", type=int, default=601)
    p.set_defaults(func=cmd_hodograph_solve)
    p = hg.add_parser("local")
    _add_ic(p)
    p.add_argument("--tbar", type=float, default=-0.05, help="t - t0 (negative)")
    p.add_argument("--width", type=float, default=0.1)
    p.add_argument("--points", type=int, default=401)
    p.set_defaults(func=cmd_hodograph_local)

    p = top.add_parser("nls").add_subparsers(dest="cmd", required=True).add_parser("evolve")
    _add_ic(p)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--t-end", type=float, default=None, help="default: catastrophe time")
    p.add_argument("--snap-times", default="", help="comma-separated times")
    p.add_argument("--filter", type=float, default=1e-13)
    p.add_argument("--order", type=int, default=4, choices=(2, 4))
    p.add_argument("--allow-small-epsilon", action="store_true")
    p.set_defaults(func=cmd_nls_evolve)

    p = top.add_parser("compare").add_subparsers(dest="cmd", required=True).add_parser("window")
    _add_ic(p)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--t", type=float, default=None, help="default: catastrophe time")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.set_defaults(func=cmd_compare_window)

    p = top.add_parser("scaling").add_subparsers(dest="cmd", required=True).add_parser("run")
    _add_ic(p)
    p.add_argument("--experiment", required=True, choices=harness.EXPERIMENTS)
    p.add_argument("--epsilons", default=",".join(str(e) for e in harness.DEFAULT_EPSILONS))
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.1)
    p.add_argument("--half-width", type=float, default=3.0)
    p.set_defaults(func=cmd_scaling_run)
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args.argv = argv
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    files = args.func(args, out)
    config = {k: v for k, v in vars(args).items() if k not in ("func", "argv")}
    man = harness.RunManifest(command=argv, config=config, outputs=list(files),
                              wall_time=time.perf_counter() - t0)
    man.write(args.manifest or out / "manifest.json")
    return 0


def replay(manifest_path) -> int:
    """Re-run the command stored in a manifest."""
    return main(harness.RunManifest.read(manifest_path).command)


if __name__ == "__main__":
    raise SystemExit(main())
