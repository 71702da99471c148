"""Command-line front end: ``symcon <command> NETWORK [options]``.

Commands run the pipeline up to a stage and write JSON/CSV artifacts plus a
``manifest.json`` into the output directory (``--out``, else ``$SYMCON_OUT``,
else ``./symcon_out``).  Exit status: 0 success, 2 invalid input, 3 numerical
failure.

``NETWORK`` is a network file.  A missing path whose stem is a bundled
example (``net8``, ``net48``) resolves to the bundled copy.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import platform
import sys
from pathlib import Path
from typing import Optional

import numpy as np
import scipy

from . import __version__
from .control import ControlPlan
from .drivers import pbh_check, reduce_inputs, select_drivers
from .errors import NumericalError, SymconError, ValidationError
from .fixtures import FIXTURES, X0_SEED, fixture_text, make_x0
from .irr import build_decomposition, quotient_pair
from .netmodel import parse_network, write_trajectory
from .pipeline import run_pipeline
from .sim import SimConfig, consensus_error, simulate
from .spectral import transverse_spectrum
from .symmetry import DEFAULT_MAX_BACKTRACK, OrbitalPartition, orbital_partition

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


def _csv_matrix(M: np.ndarray) -> str:
    M = np.atleast_2d(M)
    return "".join(",".join(format(float(v), ".17g") for v in row) + "\n" for row in M)


def _fmt_num(v: float) -> str:
    return f"{v:.6g}"


class _Run:
    """Output directory, artifact list and manifest for one invocation."""

    def __init__(self, args, command: str):
        self.args = args
        self.command = command
        out = args.out or os.environ.get("SYMCON_OUT") or "symcon_out"
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.artifacts: list = []
        self.inputs: dict = {}

    def read_input(self, label: str, path: str) -> str:
        p = Path(path)
        if p.is_file():
            data = p.read_bytes()
        elif p.stem in FIXTURES and not p.exists():
            data = fixture_text(p.stem).encode("utf-8")
            path = f"bundled:{p.stem}"
        else:
            raise ValidationError(f"cannot read {label} file {path!r}")
        self.inputs[label] = {"path": str(path), "sha256": hashlib.sha256(data).hexdigest()}
        return data.decode("utf-8")

    def write(self, name: str, text: str) -> None:
        (self.out / name).write_text(text, encoding="utf-8")
        self.artifacts.append(name)

    def write_json(self, name: str, obj) -> None:
        self.write(name, json.dumps(obj, indent=2, sort_keys=False) + "\n")

    def finish(self) -> None:
        params = {
            k: v for k, v in sorted(vars(self.args).items())
            if k not in ("func", "out", "command") and v is not None
        }
        manifest = {
            "command": self.command,
            "inputs": self.inputs,
            "parameters": params,
            "artifacts": sorted(self.artifacts) + ["manifest.json"],
            "versions": {
                "symcon": __version__,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "python": platform.python_version(),
            },
        }
        (self.out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _parse_targets(items) -> object:
    """``--target -2`` for every group, or repeated ``--target G=T``.

    ``G`` counts the non-stable groups from 1 in ascending eigenvalue order.
    """
    if not items:
        return None
    out = _parse_target_items(items)
    values = [out] if isinstance(out, float) else list(out.values())
    if any(not v < 0 for v in values):
        raise ValidationError(f"targets must be negative, got {items}")
    return out


def _parse_target_items(items):
    plain = [s for s in items if "=" not in s]
    pairs = [s for s in items if "=" in s]
    if plain and pairs:
        raise ValidationError("use either one plain --target value or group=target pairs")
    try:
        if plain:
            if len(plain) > 1:
                raise ValidationError("give a single plain --target value")
            return float(plain[0])
        out = {}
        for s in pairs:
            g, t = s.split("=", 1)
            out[int(g) - 1] = float(t)
        return out
    except ValueError:
        raise ValidationError(f"malformed --target values {items}") from None


def _parse_values(text: Optional[str], what: str):
    if text is None:
        return None
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise ValidationError(f"malformed {what}: {text!r}") from None


def _load_x0(run: _Run, path: Optional[str]):
    if path is None:
        return None
    text = run.read_input("x0", path)
    lines = (ln.strip() for ln in text.splitlines())
    try:
        return np.array([float(v) for ln in lines if ln and not ln.startswith("#") for v in ln.replace(",", " ").split()])
    except ValueError:
        raise ValidationError(f"x0 file {path!r} must hold one real per entry") from None


# -- stages ------------------------------------------------------------------


def _stage_orbits(run, net):
    p = orbital_partition(net, max_backtrack=run.args.max_backtrack)
    run.write_json("orbits.json", {**p.to_json_dict(), "sizes": list(p.sizes)})
    print(f"K = {p.n_clusters} clusters, sizes {list(p.sizes)}")
    for j, c in enumerate(p.clusters):
        print(f"  C{j + 1}: {[i + 1 for i in c]}")
    return p


def _stage_decompose(run, net, p):
    d = build_decomposition(net, p, tol=run.args.tol)
    a_par, b_par, rank = quotient_pair(d)
    run.write("a_parallel.csv", _csv_matrix(a_par))
    run.write("b_parallel.csv", _csv_matrix(b_par))
    run.write("a_perp.csv", _csv_matrix(d.a_perp))
    run.write("t_or.csv", _csv_matrix(d.t_or))
    run.write_json("decomposition.json", {
        "a_parallel": a_par.tolist(),
        "b_parallel": b_par.tolist(),
        "quotient_controllability_rank": rank,
        "residuals": d.residuals(net),
        "tol": d.tol,
    })
    print(f"quotient pair: K = {d.n_clusters}, controllability rank {rank}")
    return d


def _stage_spectrum(run, d):
    s = transverse_spectrum(d, group_tol=run.args.group_tol)
    rep = s.report()
    run.write_json("spectrum.json", rep)
    lam = ", ".join(_fmt_num(v) for v in rep["lambda_perp"])
    print(f"non-stable transverse eigenvalues: {{{lam}}}, total multiplicity {rep['sum_mu_lambda_perp']}")
    return s


def _stage_drivers(run, d, s):
    sel = select_drivers(s)
    if run.args.reduce:
        sel = reduce_inputs(sel, s)
    rep = pbh_check(d.a_perp, d.t_perp @ sel.d_matrix, s.group_tol)
    run.write("d_matrix.csv", _csv_matrix(sel.d_matrix) if sel.n_columns else "")
    run.write_json("drivers.json", {
        **sel.to_json_dict(),
        "pbh": {"ok": rep.ok, "eigenvalues": [
            {"lambda": lam, "multiplicity": mu, "rank": r, "passed": ok}
            for lam, mu, r, ok in rep.eigenvalues
        ]},
    })
    print(
        f"drivers: {sel.n_columns} input columns, {len(sel.driver_nodes)} driver nodes "
        f"{[i + 1 for i in sel.driver_nodes]}; bounds {tuple(sel.bounds)}; PBH {'ok' if rep.ok else 'FAILED'}"
    )
    return sel


def _stage_plan(run, net, x0):
    args = run.args
    targets = _parse_targets(args.target)
    res = run_pipeline(
        net,
        targets=-2.0 if targets is None else targets,
        tf=args.tf if args.tf is not None else 5.0,
        x0=x0,
        consensus=_parse_values(args.consensus, "--consensus"),
        tol=args.tol,
        group_tol=args.group_tol,
        max_backtrack=args.max_backtrack,
        reduce=args.reduce,
        seed=args.seed if args.seed is not None else X0_SEED,
    )
    plan = res.plan
    pl = res.placement
    run.write_json("plan.json", {
        **plan.to_json_dict(),
        "placement": {
            "schur_residual": pl.schur_residual,
            "closed_loop_eigenvalues_real": np.real(pl.eigenvalues).tolist(),
            "closed_loop_eigenvalues_imag": np.imag(pl.eigenvalues).tolist(),
            "eigenvalue_scatter": pl.closed_loop_scatter,
            "chain_sizes": {str(k): v for k, v in pl.chain_sizes.items()},
        },
    })
    run.write("gain.csv", _csv_matrix(plan.gain))
    run.write("gramian.csv", _csv_matrix(plan.gramian))
    modes = ", ".join(
        f"{_fmt_num(c)}*exp({_fmt_num(r)}(tf-t))" for r, c in zip(plan.u.rates, plan.u.coefficients[0])
    )
    print(f"consensus input u(t) = {modes}")
    print(
        f"feedback: |G| = {np.linalg.norm(plan.gain):.4g}, Schur residual {pl.schur_residual:.2e}, "
        f"eigenvalue scatter {pl.closed_loop_scatter:.2e}"
    )
    return res


def _stage_simulate(run, net, plan: ControlPlan, x0):
    args = run.args
    tf = args.tf if args.tf is not None else plan.tf
    cfg = SimConfig(dt=args.dt, tf=tf, x0=x0, record_stride=args.stride)
    traj = simulate(net, plan, cfg)
    p = OrbitalPartition(plan.clusters, net.n_nodes)
    states_csv, means_csv = write_trajectory(traj, p)
    run.write("trajectory.csv", states_csv)
    run.write("cluster_means.csv", means_csv)
    ce = consensus_error(traj, p)
    header = "t," + ",".join(f"spread_{j + 1}" for j in range(p.n_clusters)) + ",z_perp_norm\n"
    body = "".join(
        ",".join(format(float(v), ".15g") for v in (t, *sp, zn)) + "\n"
        for t, sp, zn in zip(ce.times, ce.spread, ce.z_perp_norm)
    )
    run.write("consensus_error.csv", header + body)
    xf = traj.final_state
    means = [float(np.mean(xf[list(c)])) for c in p.clusters]
    print(
        f"x({_fmt_num(tf)}) cluster means {[round(m, 6) for m in means]}, "
        f"max spread {float(ce.spread[-1].max()):.3e}"
    )
    if args.plot:
        _plot(run, traj, p)
    return traj


def _plot(run, traj, p):
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib is not installed; skipping the plot", file=sys.stderr)
        return
    matplotlib.rcParams["svg.hashsalt"] = "symcon"
    fig, ax = plt.subplots(figsize=(7, 4))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for j, c in enumerate(p.clusters):
        for k, i in enumerate(c):
            ax.plot(traj.times, traj.states[:, i], color=colors[j % len(colors)], lw=0.8,
                    label=f"cluster {j + 1}" if k == 0 else None)
    ax.set_xlabel("t")
    ax.set_ylabel("x_i(t)")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(run.out / "trajectory.svg", metadata={"Date": None})
    plt.close(fig)
    run.artifacts.append("trajectory.svg")


# -- commands ----------------------------------------------------------------


def _network(run):
    return parse_network(run.read_input("network", run.args.network))


def cmd_orbits(run):
    _stage_orbits(run, _network(run))


def cmd_decompose(run):
    net = _network(run)
    _stage_decompose(run, net, _stage_orbits(run, net))


def cmd_spectrum(run):
    net = _network(run)
    _stage_spectrum(run, _stage_decompose(run, net, _stage_orbits(run, net)))


def cmd_drivers(run):
    net = _network(run)
    d = _stage_decompose(run, net, _stage_orbits(run, net))
    _stage_drivers(run, d, _stage_spectrum(run, d))


def cmd_plan(run):
    net = _network(run)
    _stage_plan(run, net, _load_x0(run, run.args.x0))


def cmd_simulate(run):
    net = _network(run)
    plan = ControlPlan.from_json(run.read_input("plan", run.args.plan))
    _stage_simulate(run, net, plan, _load_x0(run, run.args.x0))


def cmd_all(run):
    net = _network(run)
    d = _stage_decompose(run, net, _stage_orbits(run, net))
    _stage_drivers(run, d, _stage_spectrum(run, d))
    x0 = _load_x0(run, run.args.x0)
    res = _stage_plan(run, net, x0)
    # the trajectory starts from the plan's own x0 unless --x0 overrides it
    _stage_simulate(run, net, res.plan, None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="symcon", description="Group consensus control of symmetric networks.")
    ap.add_argument("--version", action="version", version=f"symcon {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("network", help="network file (or bundled example name)")
        p.add_argument("--out", help="output directory (default $SYMCON_OUT or ./symcon_out)")
        p.add_argument("--tol", type=float, help="block-structure tolerance (default 1e-9 max(1, max|A|))")
        p.add_argument("--group-tol", type=float, help="eigenvalue grouping tolerance")
        p.add_argument("--max-backtrack", type=int, default=DEFAULT_MAX_BACKTRACK,
                       help="search-node budget of the automorphism search")
        p.add_argument("--reduce", action="store_true", help="merge driver columns acting on disjoint clusters")

    def control(p):
        p.add_argument("--target", action="append",
                       help="closed-loop pole: one value for all groups, or repeated G=T where G counts the non-stable groups from 1")
        p.add_argument("--tf", type=float, help="horizon in seconds (default 5)")
        p.add_argument("--consensus", help="per-cluster consensus values, comma separated (default 1..K)")
        p.add_argument("--seed", type=int, help=f"seed of the default initial state (default {X0_SEED})")
        p.add_argument("--x0", help="initial state file, one value per line")

    def sim(p):
        p.add_argument("--dt", type=float, default=1e-3, help="RK4 step (default 1e-3)")
        p.add_argument("--stride", type=int, default=1, help="record every k-th step")
        p.add_argument("--plot", action="store_true", help="also write trajectory.svg (needs matplotlib)")

    for name, fn, extra in (
        ("orbits", cmd_orbits, ()),
        ("decompose", cmd_decompose, ()),
        ("spectrum", cmd_spectrum, ()),
        ("drivers", cmd_drivers, ()),
        ("plan", cmd_plan, (control,)),
        ("all", cmd_all, (control, sim)),
    ):
        p = sub.add_parser(name, help=(fn.__doc__ or name))
        common(p)
        for e in extra:
            e(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("simulate", help="integrate the closed loop of a plan")
    common(p)
    p.add_argument("--plan", required=True, help="plan.json written by 'symcon plan'")
    p.add_argument("--tf", type=float, help="horizon (default: the plan's)")
    p.add_argument("--x0", help="initial state file (default: the plan's)")
    sim(p)
    p.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        run = _Run(args, args.command)
        args.func(run)
        run.finish()
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SymconError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
