"""Command-line interface: one executable exposing every module.

Artifact-producing runs write a manifest first, then each artifact through
a temp file and an atomic rename; a failure leaves ``FAILED`` next to the
manifest instead of partial artifacts.  Exit codes: 0 success, 1 invalid
arguments or config, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__, dynamics, eigenflow, eigensolver, geometry
from . import quasimodes, spectral_approx, specfun
from .config import RunConfig, dump_config, load_config
from .density import DensityInstance, HypothesisError, assemble
from .svgplot import render_plot


class _Out:
    """Collects named artifacts; writes atomically under an output dir."""

    def __init__(self, out_dir: str | None):
        self.dir = Path(out_dir) if out_dir else None
        self.artifacts: dict[str, str] = {}

    def emit(self, name: str, text: str):
        self.artifacts[name] = text
        if self.dir is None:
            sys.stdout.write(text)
            if not text.endswith("\n"):
                sys.stdout.write("\n")

    def flush(self, manifest: dict):
        if self.dir is None:
            return
        self.dir.mkdir(parents=True, exist_ok=True)
        payload = dict(manifest)
        payload["artifacts"] = {
            name: hashlib.sha256(text.encode()).hexdigest()
            for name, text in self.artifacts.items()
        }
        mtext = json.dumps(payload, indent=2, sort_keys=True) + "\n"
        self._atomic("manifest.json", mtext)
        for name, text in self.artifacts.items():
            self._atomic(name, text)

    def mark_failed(self, message: str):
        if self.dir is None:
            return
        self.dir.mkdir(parents=True, exist_ok=True)
        self._atomic("FAILED", message + "\n")

    def _atomic(self, name: str, text: str):
        fd, tmp = tempfile.mkstemp(dir=self.dir, suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, self.dir / name)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(float(v))  # shortest round-trip representation
    return str(v)


def _zero_cache(cfg: RunConfig) -> specfun.ZeroCache:
    base = Path(cfg.cache_dir) if cfg.cache_dir else specfun.default_cache_dir()
    return specfun.ZeroCache(base / "bessel_zeros.csv")


def _eig_cache(cfg: RunConfig) -> eigensolver.EigenCache:
    base = Path(cfg.cache_dir) if cfg.cache_dir else specfun.default_cache_dir()
    return eigensolver.EigenCache(base / "eig")


# ---------------------------------------------------------------------------
# subcommand implementations


def cmd_geom(cfg: RunConfig, args, out: _Out):
    g = cfg.geometry()
    out.emit("area.txt", f"area={g.area():.10g}\n")
    segs = geometry.boundary_segments(g)
    rows = []
    for s in segs:
        p0 = s.point(0.0)
        p1 = s.point(s.length)
        rows.append((s.kind, s.length, s.s0, p0[0], p0[1], p1[0], p1[1]))
    out.emit("segments.csv", _csv(
        rows, ["kind", "length", "s0", "x_start", "y_start", "x_end", "y_end"]))


def cmd_dyn_classify(cfg, args, out):
    g = cfg.geometry()
    z = dynamics.PhasePoint.of(args.x, args.y, args.dx, args.dy)
    cls = dynamics.classify(g, z)
    out.emit("classify.txt",
             f"class={cls.value} impact_parameter={z.impact_parameter:.12g}\n")


def cmd_dyn_mc(cfg, args, out):
    g = cfg.geometry()
    n = args.samples or cfg.mc_samples
    est, se = dynamics.integrable_fraction_mc(g, n, seed=cfg.seed)
    closed = dynamics.integrable_fraction(g)
    out.emit("mc.txt",
             f"estimate={est:.10g}\nstderr={se:.6g}\nclosed_form={closed:.12g}\n"
             f"samples={n}\nseed={cfg.seed}\n")


def cmd_dyn_trace(cfg, args, out):
    g = cfg.geometry()
    z = dynamics.PhasePoint.of(args.x, args.y, args.dx, args.dy)
    traj = dynamics.evolve(g, z, max_bounces=args.bounces,
                           max_time=args.max_time or math.inf)
    rows = [(i, traj.points[i, 0], traj.points[i, 1],
             traj.directions[i, 0], traj.directions[i, 1], traj.walls[i])
            for i in range(len(traj))]
    out.emit("trace.csv", _csv(rows, ["index", "x", "y", "dx", "dy", "wall-kind"]))
    out.emit("trace_summary.txt",
             f"bounces={len(traj)}\ntotal_time={traj.total_time:.10g}\n"
             f"termination={traj.termination}\n")


def cmd_specfun_zeros(cfg, args, out):
    cache = _zero_cache(cfg)
    alphas = cache.zeros(args.n, args.kmax)
    resid = cache.residuals(args.n, args.kmax)
    rows = [(args.n, k + 1, alphas[k], resid[k]) for k in range(args.kmax)]
    out.emit("zeros.csv", _csv(rows, ["n", "k", "alpha", "residual"]))


def cmd_quasi_count(cfg, args, out):
    g = cfg.geometry()
    eps = args.eps or cfg.eps
    lam_max = args.lambda_max or cfg.lambda_max
    cache = _zero_cache(cfg)
    const = quasimodes.counting_bound_constant(g)
    rows = []
    for lam in (lam_max / 4, lam_max / 2, lam_max):
        N = quasimodes.counting(g, eps, lam, cache=cache)
        rows.append((lam, N, N / lam ** 2, const))
    out.emit("quasi_count.csv", _csv(rows, ["lambda", "count", "ratio", "constant"]))


def cmd_quasi_residual(cfg, args, out):
    g = cfg.geometry()
    eps = args.eps or cfg.eps
    zero = specfun.bessel_zero(args.n, args.k, cache=_zero_cache(cfg))
    q = quasimodes.Quasimode(n=args.n, k=args.k, alpha=zero.alpha, eps=eps)
    val = quasimodes.residual_norm(q, g)
    out.emit("residual.txt",
             f"n={args.n}\nk={args.k}\neps={eps}\nalpha={zero.alpha:.12g}\n"
             f"residual_norm={val:.10g}\n")


def cmd_quasi_overlap(cfg, args, out):
    g = cfg.geometry()
    eps = args.eps or cfg.eps
    cache = _zero_cache(cfg)
    z1 = specfun.bessel_zero(args.n, args.k1, cache=cache)
    z2 = specfun.bessel_zero(args.m, args.k2, cache=cache)
    q1 = quasimodes.Quasimode(n=args.n, k=args.k1, alpha=z1.alpha, eps=eps)
    q2 = quasimodes.Quasimode(n=args.m, k=args.k2, alpha=z2.alpha, eps=eps)
    val = quasimodes.overlap(q1, q2, g)
    out.emit("overlap.txt", f"overlap={val:.10g}\n")


def cmd_eig_solve(cfg, args, out):
    g = cfg.geometry()
    spec = eigensolver.DiscretizationSpec(h=args.h or cfg.h,
                                          symmetry=cfg.symmetry)
    count = args.count or cfg.count
    basis = eigensolver.solve(g, spec, count=count, keep_vectors=False)
    eigensolver.EigenCache(
        (Path(cfg.cache_dir) if cfg.cache_dir else specfun.default_cache_dir())
        / "eig").store(
        eigensolver._cache_key("mushroom", (g.r1, g.r2, g.t), spec.h, count,
                               spec.symmetry),
        basis.energies, basis.residuals)
    par = basis.parities if basis.parities is not None else np.zeros(count)
    rows = [(j + 1, basis.energies[j], basis.residuals[j], int(par[j]))
            for j in range(count)]
    out.emit("eigenvalues.csv", _csv(rows, ["j", "energy", "residual", "parity"]))


def cmd_eig_weyl(cfg, args, out):
    g = cfg.geometry()
    spec = eigensolver.DiscretizationSpec(h=args.h or cfg.h,
                                          symmetry=cfg.symmetry)
    count = args.count or cfg.count
    energies = eigensolver.solve_energies_cached(g, spec, count,
                                                 cache=_eig_cache(cfg))
    if args.lambda_grid:
        grid = [float(s) for s in args.lambda_grid.split(",")]
    else:
        top = energies[-1]
        grid = [top / 4, top / 2, top]
    rows = []
    for lam in grid:
        N = eigensolver.counting(energies, lam)
        rows.append((lam, N, eigensolver.weyl_ratio(g, energies, lam)))
    out.emit("weyl.csv", _csv(rows, ["Lambda", "N", "ratio"]))


def _read_spectrum_file(path: str):
    """Self-describing text: dim, eigenvalues, eigenvectors, quasi block."""
    tokens: list[str] = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    it = iter(tokens)

    def expect(word):
        tok = next(it)
        if tok != word:
            raise ValueError(f"expected {word!r}, found {tok!r}")

    expect("dim")
    N = int(next(it))
    expect("eigenvalues")
    ev = np.array([float(next(it)) for _ in range(N)])
    expect("eigenvectors")
    U = np.array([float(next(it)) for _ in range(N * N)]).reshape(N, N)
    expect("quasi_eigenvalues")
    n = int(next(it))
    vals = np.array([float(next(it)) for _ in range(n)])
    expect("quasimodes")
    V = np.array([float(next(it)) for _ in range(N * n)]).reshape(N, n)
    return ev, U, spectral_approx.QuasiSpectrum(values=vals, vectors=V)


def cmd_approx_run(cfg, args, out):
    ev, U, quasi = _read_spectrum_file(args.input)
    try:
        rep = spectral_approx.approx_eigenvectors(ev, U, quasi, c=args.c,
                                                  eps=args.eps,
                                                  delta=args.delta)
    except spectral_approx.HypothesisViolation as exc:
        out.emit("approx_report.json", json.dumps(
            {"accepted": False, "violation": exc.name, "detail": exc.detail},
            indent=2) + "\n")
        return
    out.emit("approx_report.json", json.dumps({
        "accepted": True,
        "n": rep.n, "m": rep.m, "c": rep.c, "eps": rep.eps, "delta": rep.delta,
        "eps1_measured": rep.eps1_measured,
        "eps2_measured": rep.eps2_measured,
        "gram_deviation": rep.gram_deviation,
        "a_deviation": rep.a_deviation,
        "series_agreement": rep.series_agreement,
        "bound": rep.bound,
        "window_eigen_indices": rep.window_eigen_indices.tolist(),
        "certified": rep.certified.tolist(),
        "distances": rep.distances.tolist(),
    }, indent=2) + "\n")


def cmd_flow_hadamard(cfg, args, out):
    g = cfg.geometry()
    spec = eigensolver.DiscretizationSpec(h=args.h or cfg.h,
                                          symmetry=cfg.symmetry)
    recs = eigenflow.flow_table(g, spec, js=[args.j - 1], dt=cfg.dt)
    r = recs[0]
    out.emit("hadamard.txt",
             f"t={r.t}\nj={args.j}\nenergy={r.energy:.10g}\n"
             f"dE_numeric={r.dE_numeric:.10g}\n"
             f"dE_boundary={r.dE_boundary:.10g}\n"
             f"dE_interior={r.dE_interior:.10g}\n"
             f"interior_verbatim={r.interior_verbatim:.10g}\n"
             f"speed_bound={r.speed_bound:.10g}\n")


def cmd_flow_sweep(cfg, args, out):
    g0 = cfg.geometry()
    spec = eigensolver.DiscretizationSpec(h=args.h or cfg.h,
                                          symmetry=cfg.symmetry)
    t0 = args.t0 or cfg.t0
    t1 = args.t1 or cfg.t1
    n_t = args.samples or cfg.samples
    jmax = args.jmax or cfg.jmax
    ts = np.linspace(t0, t1, n_t)
    table = np.empty((n_t, jmax))
    rows = []
    for i, t in enumerate(ts):
        g = geometry.MushroomGeometry(g0.r1, g0.r2, t)
        basis = eigensolver.solve(g, spec, count=jmax)
        table[i] = basis.energies[:jmax]
        bound = eigenflow.flow_speed_bound(g)
        try:
            qop = eigenflow.QOperator(t=t, profile=eigenflow.PhiProfile())
        except ValueError:
            qop = None  # pullback family degenerate at small t
        for j in range(jmax):
            dE_b = eigenflow.hadamard_boundary(g, basis, j)
            dE_i = (eigenflow.hadamard_interior(g, basis, j, qop=qop)
                    if qop is not None else math.nan)
            rows.append((t, j + 1, table[i, j], math.nan, dE_b, dE_i, bound))
    # centered differences along sorted-index branches fill the numeric column
    for i in range(1, n_t - 1):
        for j in range(jmax):
            dE = (table[i + 1, j] - table[i - 1, j]) / (ts[i + 1] - ts[i - 1])
            row = rows[i * jmax + j]
            rows[i * jmax + j] = row[:3] + (dE,) + row[4:]
    out.emit("flow_sweep.csv",
             _csv(rows, ["t", "j", "energy", "dE_numeric", "dE_boundary",
                         "dE_interior", "bound"]))
    speed_c = eigenflow.crude_speed_constant(ts, table)
    flags = eigensolver.track_branches(ts, table)
    out.emit("flow_summary.txt",
             f"crude_speed_constant={speed_c:.10g}\n"
             f"suspected_branch_crossings={int(flags.sum())}\n")


def cmd_flow_occupancy(cfg, args, out):
    g0 = cfg.geometry()
    spec = eigensolver.DiscretizationSpec(h=args.h or cfg.h,
                                          symmetry=cfg.symmetry)
    c = args.c or cfg.c
    t0 = args.t0 or cfg.t0
    t1 = args.t1 or cfg.t1
    n_t = max(args.samples or cfg.samples, 20)
    jmax = args.jmax or cfg.jmax
    quasi = quasimodes.quasi_eigenvalues(g0, cfg.eps, cfg.lambda_max,
                                         cache=_zero_cache(cfg))
    js = list(range(1, jmax + 1))
    q = eigenflow.occupancy(g0, spec, t0, t1, n_t, quasi, c, js,
                            cache=_eig_cache(cfg))
    rows = [(j, qv) for j, qv in zip(js, q)]
    out.emit("occupancy.csv", _csv(rows, ["j", "q_j"]))
    # diagnostic only: the integrable fraction is the asymptotic ceiling for
    # the mean occupancy, but full-density caveats keep this a report
    d0 = dynamics.integrable_fraction(
        geometry.MushroomGeometry(g0.r1, g0.r2, t0))
    out.emit("occupancy_summary.txt",
             f"mean_q={float(np.mean(q)):.6g}\n"
             f"integrable_fraction_at_t0={d0:.6g}\n")


def cmd_density_assemble(cfg, args, out):
    with open(args.input) as fh:
        data = json.load(fh)
    inst = DensityInstance(
        g=data["g"], subsets=[set(s) for s in data["subsets"]],
        eps=data["eps"], eps_prime=data["eps_prime"],
        d=data["d"], n_max=data["n_max"],
        tail_start=data.get("tail_start"))
    try:
        res = assemble(inst)
    except HypothesisError as exc:
        out.emit("density_result.json", json.dumps(
            {"accepted": False, "violation": str(exc),
             "j": exc.j, "n": exc.n}, indent=2) + "\n")
        return
    runs = []
    for k in sorted(res.S):
        if runs and k == runs[-1][1] + 1:
            runs[-1][1] = k
        else:
            runs.append([k, k])
    out.emit("density_result.json", json.dumps({
        "accepted": True,
        "S_runs": runs,
        "N": res.N,
        "tail_start": res.tail_start,
        "audit": {"B_sizes": [len(b) for b in res.B]},
    }, indent=2) + "\n")


def cmd_report_percival(cfg, args, out):
    g = cfg.geometry()
    zcache = _zero_cache(cfg)
    d_closed = dynamics.integrable_fraction(g)
    mc, mc_se = dynamics.integrable_fraction_mc(g, cfg.mc_samples, cfg.seed)
    const = quasimodes.counting_bound_constant(g)
    n_quasi = quasimodes.counting(g, cfg.eps, cfg.lambda_max, cache=zcache)
    spec = eigensolver.DiscretizationSpec(h=cfg.h, symmetry=cfg.symmetry)
    energies = eigensolver.solve_energies_cached(g, spec, cfg.count,
                                                 cache=_eig_cache(cfg))
    top = float(energies[-1])
    weyl = eigensolver.weyl_ratio(g, energies, top)
    quasi = quasimodes.quasi_eigenvalues(g, cfg.eps, cfg.lambda_max,
                                         cache=zcache)
    n_good = 0
    for n in range(len(quasi), 0, -1):
        if quasi[n - 1] + cfg.c <= top:
            n_good = n
            break
    gtr = (spectral_approx.good_time_ratio(energies, quasi, cfg.c, n_good)
           if n_good else None)
    recs = eigenflow.flow_table(g, spec, js=range(min(cfg.jmax, 5)), dt=cfg.dt)
    out.emit("percival_report.json", json.dumps({
        "geometry": {"r1": g.r1, "r2": g.r2, "t": g.t, "area": g.area()},
        "liouville_fraction": {"closed_form": d_closed,
                               "mc_estimate": mc, "mc_stderr": mc_se,
                               "mc_samples": cfg.mc_samples},
        "quasimode_counting": {"lambda": cfg.lambda_max, "count": n_quasi,
                               "ratio": n_quasi / cfg.lambda_max ** 2,
                               "constant": const},
        "weyl": {"Lambda": top, "count": len(energies), "ratio": weyl},
        "good_time_ratio": {"c": cfg.c, "n": n_good, "ratio": gtr},
        "flow": [{"j": r.j + 1, "energy": r.energy,
                  "dE_numeric": r.dE_numeric,
                  "dE_boundary": r.dE_boundary,
                  "dE_interior": r.dE_interior,
                  "speed_bound": r.speed_bound} for r in recs],
    }, indent=2) + "\n")


def cmd_plot(cfg, args, out):
    rows = []
    with open(args.input) as fh:
        header = fh.readline().strip().split(",")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(header):
                raise ValueError(f"malformed CSV row: {line!r}")
            rows.append(parts)
    if args.x not in header:
        raise ValueError(f"x column {args.x!r} not in {header}")
    ycols = args.y.split(":") if args.y else [header[1]]
    for yc in ycols:
        if yc not in header:
            raise ValueError(f"y column {yc!r} not in {header}")
    xi = header.index(args.x)
    xs = [float(r[xi]) for r in rows]
    ys_list = [[float(r[header.index(yc)]) for r in rows] for yc in ycols]
    svg = render_plot(xs, ys_list, ycols, kind=args.kind,
                      xlabel=args.x, ylabel=",".join(ycols),
                      hline=args.hline)
    out.emit(args.out_name, svg)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file")
    common.add_argument("--out-dir", help="artifact directory (default: stdout)")
    common.add_argument("--cache-dir", help="cache directory override")
    common.add_argument("--seed", type=int, help="RNG seed override")

    ap = argparse.ArgumentParser(
        prog="mushroom",
        description="Mushroom billiard spectral toolkit",
        allow_abbrev=False)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def leaf(parent, name, **kw):
        kw.setdefault("parents", [common])
        kw.setdefault("allow_abbrev", False)
        return parent.add_parser(name, **kw)

    p = leaf(sub, "geom", help="area and boundary segment table")
    for name in ("--r1", "--r2", "--t"):
        p.add_argument(name, type=float)
    p.set_defaults(func=cmd_geom)

    dyn = sub.add_parser("dyn", help="billiard flow").add_subparsers(
        dest="sub", required=True)
    p = leaf(dyn, "classify")
    for name in ("--x", "--y", "--dx", "--dy"):
        p.add_argument(name, type=float, required=True)
    p.set_defaults(func=cmd_dyn_classify)
    p = leaf(dyn, "mc")
    p.add_argument("--samples", type=int)
    p.set_defaults(func=cmd_dyn_mc)
    p = leaf(dyn, "trace")
    for name in ("--x", "--y", "--dx", "--dy"):
        p.add_argument(name, type=float, required=True)
    p.add_argument("--bounces", type=int, default=100)
    p.add_argument("--max-time", type=float)
    p.set_defaults(func=cmd_dyn_trace)

    sf = sub.add_parser("specfun", help="special functions").add_subparsers(
        dest="sub", required=True)
    p = leaf(sf, "zeros")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--kmax", type=int, required=True)
    p.set_defaults(func=cmd_specfun_zeros)

    q = sub.add_parser("quasi", help="quasimodes").add_subparsers(
        dest="sub", required=True)
    p = leaf(q, "count")
    p.add_argument("--eps", type=float)
    p.add_argument("--lambda-max", type=float)
    p.set_defaults(func=cmd_quasi_count)
    p = leaf(q, "residual")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps", type=float)
    p.set_defaults(func=cmd_quasi_residual)
    p = leaf(q, "overlap")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k1", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k2", type=int, required=True)
    p.add_argument("--eps", type=float)
    p.set_defaults(func=cmd_quasi_overlap)

    e = sub.add_parser("eig", help="Dirichlet spectra").add_subparsers(
        dest="sub", required=True)
    p = leaf(e, "solve")
    p.add_argument("--t", type=float)
    p.add_argument("--h", type=float)
    p.add_argument("--count", type=int)
    p.set_defaults(func=cmd_eig_solve)
    p = leaf(e, "weyl")
    p.add_argument("--t", type=float)
    p.add_argument("--h", type=float)
    p.add_argument("--count", type=int)
    p.add_argument("--lambda-grid", help="comma-separated Lambda values")
    p.set_defaults(func=cmd_eig_weyl)

    asub = sub.add_parser(
        "approx", help="quasimode-eigenvector approximation").add_subparsers(
        dest="sub", required=True)
    p = leaf(asub, "run")
    p.add_argument("--input", required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.set_defaults(func=cmd_approx_run)

    f = sub.add_parser("flow", help="eigenvalue flow").add_subparsers(
        dest="sub", required=True)
    p = leaf(f, "hadamard")
    p.add_argument("--t", type=float)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--h", type=float)
    p.set_defaults(func=cmd_flow_hadamard)
    p = leaf(f, "sweep")
    p.add_argument("--t0", type=float)
    p.add_argument("--t1", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--jmax", type=int)
    p.add_argument("--h", type=float)
    p.set_defaults(func=cmd_flow_sweep)
    p = leaf(f, "occupancy")
    p.add_argument("--t0", type=float)
    p.add_argument("--t1", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--jmax", type=int)
    p.add_argument("--h", type=float)
    p.set_defaults(func=cmd_flow_occupancy)

    dsub = sub.add_parser("density", help="density lemma").add_subparsers(
        dest="sub", required=True)
    p = leaf(dsub, "assemble")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_density_assemble)

    rsub = sub.add_parser("report", help="bundled reports").add_subparsers(
        dest="sub", required=True)
    p = leaf(rsub, "percival")
    p.add_argument("--t", type=float)
    p.set_defaults(func=cmd_report_percival)

    p = leaf(sub, "plot", help="render a CSV table to SVG")
    p.add_argument("--input", required=True)
    p.add_argument("--kind", choices=("line", "scatter"), default="line")
    p.add_argument("--x", required=True)
    p.add_argument("--y", help="y column, or several joined by ':'")
    p.add_argument("--hline", type=float)
    p.add_argument("--out-name", default="plot.svg")
    p.set_defaults(func=cmd_plot)
    return ap


_NUMERICAL_ERRORS = (eigensolver.SolverError, ArithmeticError,
                     quasimodes.QuadratureError, dynamics.DynamicsError,
                     specfun.RangeError)


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = load_config(args.config)
        for name in ("r1", "r2", "t"):
            ov = getattr(args, name, None)
            if ov is not None:
                setattr(cfg, name, ov)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.cache_dir:
            cfg.cache_dir = args.cache_dir
        if args.out_dir:
            cfg.out_dir = args.out_dir
        cfg.validate()
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = _Out(cfg.out_dir)
    # hash only the computational inputs: artifact/cache locations do not
    # change results, and identical (config, seed, version) must give
    # identical manifests
    hcfg = copy.copy(cfg)
    hcfg.out_dir = None
    hcfg.cache_dir = None
    manifest = {
        "command": args.command,
        "subcommand": getattr(args, "sub", None),
        "version": __version__,
        "seed": cfg.seed,
        "config_sha256": hashlib.sha256(dump_config(hcfg).encode()).hexdigest(),
    }
    try:
        args.func(cfg, args, out)
        out.flush(manifest)
    except _NUMERICAL_ERRORS as exc:
        out.mark_failed(f"{type(exc).__name__}: {exc}")
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, FileNotFoundError) as exc:
        out.mark_failed(f"{type(exc).__name__}: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
