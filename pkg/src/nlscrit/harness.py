"""Epsilon sweeps, log-log scaling fits and run manifests."""

from __future__ import annotations

import json
import math
import os
import platform
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .hodograph.initial_data import InitialDataCurve, reconstruct_initial_data
from .hodograph.potentials import FOracle, catalog_f
from .hodograph.solve import CriticalPoint, find_critical_point
from .multiscale import ConjectureChart, compare_window, semiclassical_on, t_schedule
from .nls import (EPSILON_FLOOR, EvolutionConfig, WaveField, default_N, evolve,
                  fourier_interpolate, from_madelung, to_madelung)

EXPERIMENTS = ("semiclassical_halftime", "critical_time", "multiscale_window",
               "before_breakup", "after_breakup")
DEFAULT_EPSILONS = (0.05, 0.06, 0.07, 0.08, 0.09, 0.1)


def code_version() -> str:
    try:
        from importlib.metadata import version
        return version("artifact")
    except Exception:
        return "unknown"


# ---------------------------------------------------------------------------
# fits

@dataclass(frozen=True)
class ScalingFit:
    """error ~ C eps^a by least squares on (ln eps, ln error)."""

    exponent: float
    intercept: float
    correlation: float
    std_error: float
    epsilons: tuple
    errors: tuple

    def predict(self, eps):
        return np.exp(self.intercept) * np.asarray(eps, dtype=float) ** self.exponent

    def to_dict(self) -> dict:
        d = asdict(self)
        d["epsilons"] = list(self.epsilons)
        d["errors"] = list(self.errors)
        return d


def fit_scaling(epsilons, errors) -> ScalingFit:
    e = np.asarray(epsilons, dtype=float)
    r = np.asarray(errors, dtype=float)
    if e.shape != r.shape or e.ndim != 1:
        raise ValueError("epsilons and errors must be 1-D and of equal length")
    if len(e) < 3:
        raise ValueError("a scaling fit needs at least 3 points")
    if np.any(~(e > 0)) or np.any(~(r > 0)):
        raise ValueError("epsilons and errors must be positive")
    res = stats.linregress(np.log(e), np.log(r))
    return ScalingFit(float(res.slope), float(res.intercept), float(res.rvalue),
                      float(abs(res.stderr)), tuple(e.tolist()), tuple(r.tolist()))


def slope_std_error(epsilons, errors, slope: float, intercept: float) -> float:
    """Standard error of the slope from the residuals (independent of linregress)."""
    x = np.log(np.asarray(epsilons, dtype=float))
    y = np.log(np.asarray(errors, dtype=float))
    resid = y - (slope * x + intercept)
    n = len(x)
    return float(math.sqrt(np.sum(resid ** 2) / (n - 2) / np.sum((x - x.mean()) ** 2)))


# ---------------------------------------------------------------------------
# file plumbing

def atomic_write(path, writer) -> Path:
    """Call ``writer(tmp_path)`` then move the result onto ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)
    return path


@dataclass
class RunManifest:
    command: list
    config: dict
    outputs: list = field(default_factory=list)
    wall_time: float = 0.0
    version: str = field(default_factory=code_version)
    platform: str = field(default_factory=platform.platform)
    numpy: str = np.__version__

    def write(self, path) -> Path:
        def w(tmp):
            with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
                json.dump(asdict(self), fh, indent=2, default=_json_default)
                fh.write("\n")
        return atomic_write(path, w)

    @classmethod
    def read(cls, path) -> "RunManifest":
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
        return cls(**d)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not serializable: {type(o).__name__}")


# ---------------------------------------------------------------------------
# studies

@dataclass(frozen=True)
class SweepConfig:
    L: float = 10 * math.pi
    N: int | None = None
    dt: float | None = None
    order: int = 4
    filter_threshold: float = 1e-13
    gamma: float = 1.0
    beta: float = 0.1
    half_width: float = 3.0

    def grid_size(self, eps: float) -> int:
        return self.N or default_N(eps)


def _simulate(ic: str, params: tuple, eps: float, times: tuple, cfg: SweepConfig):
    # top-level so worker processes can run it
    f = catalog_f(ic, **dict(params))
    curve = reconstruct_initial_data(f)
    wf = from_madelung(curve, eps, L=cfg.L, N=cfg.grid_size(eps),
                       filter_threshold=cfg.filter_threshold)
    conf = EvolutionConfig.for_epsilon(eps, max(times), dt=cfg.dt, order=cfg.order,
                                       filter_threshold=cfg.filter_threshold)
    res = evolve(wf, conf, snap_times=times)
    return {t: res.snapshots[t].psi for t in times}, res.trace


class Study:
    """One initial condition with its hodograph data and a cache of NLS runs."""

    def __init__(self, ic: str = "satsuma_yajima", params: dict | None = None,
                 config: SweepConfig | None = None):
        self.ic = ic
        self.params = dict(params or {})
        self.config = config or SweepConfig()
        self.f: FOracle = catalog_f(ic, **self.params)
        self.curve: InitialDataCurve = reconstruct_initial_data(self.f)
        self.cp: CriticalPoint = find_critical_point(self.f)
        self._runs: dict[float, dict[float, WaveField]] = {}
        self.traces: dict[float, np.ndarray] = {}

    def times(self, name: str, eps: float) -> float:
        cp = self.cp
        if name == "semiclassical_halftime":
            return cp.t0 / 2
        if name in ("critical_time", "multiscale_window"):
            return cp.t0
        tp, tm = t_schedule(cp, eps, self.config.beta)
        # the plus root lies before the catastrophe and the minus root after it
        if name == "before_breakup":
            return tp
        if name == "after_breakup":
            return tm
        raise ValueError(f"unknown experiment {name!r}; expected one of {EXPERIMENTS}")

    def prepare(self, epsilons, names=EXPERIMENTS, threads: int = 1, skip_errors: bool = True):
        """Run every needed evolution once, with all requested snapshot times."""
        todo = {}
        for eps in epsilons:
            want = set(self._runs.get(eps, {}))
            for n in names:
                try:
                    want.add(self.times(n, eps))
                except ValueError:
                    if not skip_errors:
                        raise
            if want and not want <= set(self._runs.get(eps, {})):
                todo[eps] = tuple(sorted(want))
        key = tuple(sorted(self.params.items()))
        if threads > 1 and len(todo) > 1:
            with ProcessPoolExecutor(max_workers=threads) as ex:
                futs = {eps: ex.submit(_simulate, self.ic, key, eps, ts, self.config)
                        for eps, ts in todo.items()}
                out = {eps: fu.result() for eps, fu in futs.items()}
        else:
            out = {eps: _simulate(self.ic, key, eps, ts, self.config) for eps, ts in todo.items()}
        for eps, (snaps, trace) in out.items():
            self._runs[eps] = {t: WaveField(eps, psi, self.config.L, t) for t, psi in snaps.items()}
            self.traces[eps] = trace

    def snapshot(self, eps: float, t: float) -> WaveField:
        if eps not in self._runs or t not in self._runs[eps]:
            existing = set(self._runs.get(eps, {}))
            snaps, trace = _simulate(self.ic, tuple(sorted(self.params.items())), eps,
                                     tuple(sorted(existing | {t})), self.config)
            self._runs[eps] = {tt: WaveField(eps, p, self.config.L, tt) for tt, p in snaps.items()}
            self.traces[eps] = trace
        return self._runs[eps][t]

    def semiclassical_gap(self, field: WaveField):
        """sup |u_nls - u_hodograph| over |x - x0| <= half_width.

        The grid is augmented with x0 and a few points around it (Fourier
        interpolated) since the catastrophe need not sit on a node.
        Returns (error, x at the maximum, columns for CSV).
        """
        cp = self.cp
        hw = self.config.half_width
        x = field.x
        sel = np.abs(x - cp.x0) <= hw
        u, v = to_madelung(field)
        extra = cp.x0 + field.dx * np.linspace(-1, 1, 9)
        # nodes already on the grid would give repeated abscissae
        gap = np.min(np.abs(extra[:, None] - x[sel][None, :]), axis=1)
        extra = extra[gap > 1e-9 * field.dx]
        pe = fourier_interpolate(field, extra)
        ue = np.abs(pe) ** 2
        xs = np.concatenate([x[sel], extra])
        un = np.concatenate([u[sel], ue])
        order = np.argsort(xs, kind="stable")
        xs, un = xs[order], un[order]
        us, vs = semiclassical_on(self.f, self.curve, cp, xs, field.t)
        err = np.abs(un - us)
        i = int(np.argmax(err))
        vn = np.interp(xs, x[sel], v[sel])
        cols = dict(x=xs, u_nls=un, v_nls=vn, u_semicl=us, v_semicl=vs)
        return float(err[i]), float(xs[i]), cols


@dataclass
class ExperimentResult:
    name: str
    fit: ScalingFit | None
    records: list
    failures: dict
    manifest: RunManifest | None = None


_STUDIES: dict[tuple, Study] = {}


def get_study(ic: str = "satsuma_yajima", params: dict | None = None,
              config: SweepConfig | None = None) -> Study:
    config = config or SweepConfig()
    key = (ic, tuple(sorted((params or {}).items())), config)
    if key not in _STUDIES:
        _STUDIES[key] = Study(ic, params, config)
    return _STUDIES[key]


def _write_columns(path, cols: dict):
    names = ("x", "u_nls", "v_nls", "u_conj", "v_conj", "u_semicl", "v_semicl")
    n = len(cols["x"])
    data = [np.asarray(cols.get(k, np.full(n, np.nan))) for k in names]

    def w(tmp):
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(names) + "\n")
            for row in zip(*data):
                fh.write(",".join(f"{val:.17g}" for val in row) + "\n")
    return atomic_write(path, w)


def run_experiment(name: str, ic: str = "satsuma_yajima", epsilons=DEFAULT_EPSILONS,
                   params: dict | None = None, config: SweepConfig | None = None,
                   out_dir=None, threads: int = 1, study: Study | None = None,
                   command=None) -> ExperimentResult:
    """One scaling experiment; errors at an eps-point are recorded, not raised."""
    if name not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {name!r}; expected one of {EXPERIMENTS}")
    eps_list = sorted(float(e) for e in epsilons)
    for e in eps_list:
        if not EPSILON_FLOOR <= e <= 0.1:
            raise ValueError(f"epsilon {e} outside [{EPSILON_FLOOR}, 0.1]")
    t_wall = time.perf_counter()
    study = study or get_study(ic, params, config)
    cfg = study.config
    study.prepare(eps_list, (name,), threads=threads)
    records, failures, outputs = [], {}, []
    out = Path(out_dir) if out_dir is not None else None
    for eps in eps_list:
        try:
            t = study.times(name, eps)
            wf = study.snapshot(eps, t)
            rec = dict(epsilon=eps, t=t)
            if name in ("semiclassical_halftime", "critical_time"):
                err, xmax, cols = study.semiclassical_gap(wf)
                rec.update(error=err, x_at_max=xmax)
            else:
                chart = ConjectureChart(study.cp, eps)
                semi = (study.f, study.curve) if t <= study.cp.t0 else None
                rep = compare_window(wf, chart, gamma=cfg.gamma, semiclassical=semi)
                rec.update(error=rep.linf_u, error_v=rep.linf_v, min_u_gap=rep.min_u_gap,
                           window=list(rep.window), error_semiclassical=rep.linf_u_semiclassical)
                cols = rep.columns
            records.append(rec)
            if out is not None:
                stem = f"{name}_{study.ic}_eps{eps:.4f}"
                outputs.append(str(_write_columns(out / f"{stem}.csv", cols)))
        except Exception as exc:  # recorded, the fit uses the survivors
            failures[eps] = f"{type(exc).__name__}: {exc}"
    fit = None
    if len(records) >= 3:
        fit = fit_scaling([r["epsilon"] for r in records], [r["error"] for r in records])
    manifest = RunManifest(
        command=list(command) if command is not None else ["scaling", "run", name],
        config=dict(experiment=name, ic=study.ic, params=study.params, epsilons=eps_list,
                    sweep=asdict(cfg), critical_point=study.cp.to_dict()),
    )
    result = ExperimentResult(name, fit, records, failures, manifest)
    if out is not None:
        summary = dict(fit=fit.to_dict() if fit else None, records=records,
                       failures={str(k): v for k, v in failures.items()})

        def w(tmp):
            with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
                json.dump(summary, fh, indent=2, default=_json_default)
                fh.write("\n")
        outputs.append(str(atomic_write(out / f"{name}_{study.ic}_fit.json", w)))
    manifest.outputs = outputs
    manifest.wall_time = time.perf_counter() - t_wall
    if out is not None:
        manifest.write(out / f"{name}_{study.ic}_manifest.json")
    if fit is None:
        raise RuntimeError(f"fewer than 3 surviving eps-points: {failures}")
    return result
