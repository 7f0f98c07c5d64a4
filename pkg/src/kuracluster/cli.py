"""Command line interface.

Exit codes: 0 success (``check``: stable cluster formation), 1 failure
(``check``: existence conditions fail), 2 existence holds but stability
fails or ``jacobian`` refuses, 64 unusable configuration.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from kuracluster import analysis, conditions, io
from kuracluster.config import ConfigError, load_config
from kuracluster.integrate import integrate
from kuracluster.spectral import eig

EXIT_OK, EXIT_FAIL, EXIT_UNSTABLE, EXIT_CONFIG = 0, 1, 2, 64

log = logging.getLogger("kuracluster")


def _parse_grid(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad mu grid {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty mu grid")
    return sorted(vals)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kuracluster",
                                 description="Cluster synchronization in adaptive Kuramoto networks.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="verify existence and stability conditions")
    c.add_argument("config")
    c.add_argument("--json", metavar="FILE", help="also write the report as JSON")
    c.add_argument("--format", choices=["text", "json", "both"], default="both")
    c.add_argument("--relaxed-a1", action="store_true",
                   help="compare frequencies with relative tolerance 1e-12")
    c.add_argument("--margin", type=float, default=0.0, help="Hurwitz margin for A4")

    s = sub.add_parser("simulate", help="integrate the network and write CSV/JSON (and SVG)")
    s.add_argument("config")
    s.add_argument("--out", default="out", metavar="DIR")
    s.add_argument("--svg", action="store_true", help="write errors.svg and couplings.svg")
    s.add_argument("--dt", type=float)
    s.add_argument("--t-end", type=float)
    s.add_argument("--sample-every", type=int)

    j = sub.add_parser("jacobian", help="analytic error Jacobian on the manifold, checked by finite differences")
    j.add_argument("config")
    j.add_argument("--fd-step", type=float, default=1e-6)

    w = sub.add_parser("sweep", help="classify inter-cluster plasticity values by simulation")
    w.add_argument("config")
    w.add_argument("--mu-grid", type=_parse_grid, required=True, metavar="A,B,C")
    w.add_argument("--out", metavar="FILE", help="CSV destination (default stdout)")
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--dt", type=float)
    w.add_argument("--horizon", type=float, help="fixed simulation length instead of 20/rate")
    return ap


def cmd_check(args) -> int:
    cfg = load_config(args.config)
    mode = "relaxed" if args.relaxed_a1 else cfg.a1_mode
    rep = conditions.check_all(cfg.spec, a1_mode=mode, margin=args.margin)
    payload = conditions.report_to_dict(rep)
    if args.format in ("text", "both"):
        print(conditions.report_to_text(rep))
    if args.format in ("json", "both"):
        print(io.dump_json(payload))
    if args.json:
        io.dump_json(payload, Path(args.json))
    return rep.exit_code


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if cfg.initial is None:
        raise ConfigError("simulate needs an 'initial' block", source=args.config)
    dt = args.dt if args.dt is not None else cfg.sim["dt"]
    t_end = args.t_end if args.t_end is not None else cfg.sim["t_end"]
    every = args.sample_every if args.sample_every is not None else cfg.sim["sample_every"]
    spec, p = cfg.spec, cfg.partition

    traj = integrate(spec, p, cfg.initial, t_end, dt, sample_every=every)
    structure = analysis.structure_of(spec)
    target = analysis.manifold_target(spec, structure)
    metrics = analysis.convergence_metrics(traj, target)
    rep = conditions.check_all(spec, a1_mode=cfg.a1_mode)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_trajectory_csv(out / "trajectory.csv", traj)
    io.write_metrics_csv(out / "metrics.csv", metrics)
    report = {
        "config": cfg.name or args.config,
        "dt": dt, "t_end": t_end, "sample_every": every,
        "completed": traj.completed, "message": traj.message,
        "final": metrics.final(),
        "target": {"k_intra_star": target.k_intra_star, "intra_bound": target.intra_bound,
                   "inter_bound": target.inter_bound},
        "conditions": conditions.report_to_dict(rep),
    }
    io.dump_json(report, out / "report.json")
    if args.svg:
        from kuracluster import plotting

        plotting.plot_errors(traj, out / "errors.svg")
        plotting.plot_couplings(traj, out / "couplings.svg", target.k_intra_star)
    fin = metrics.final()
    print(f"t={fin['t']:.6g} max|e|={fin['max_abs_error']:.3e} "
          f"intra residual={fin['intra_residual']:.3e} inter norm={fin['inter_norm']:.3e} "
          f"-> {out}")
    if not traj.completed:
        print(traj.message, file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_jacobian(args) -> int:
    cfg = load_config(args.config)
    spec, p = cfg.spec, cfg.partition
    a1 = conditions.check_A1(spec, p, cfg.a1_mode)
    a2 = conditions.check_A2(spec.graph, p)
    if not (a1.passed and a2.passed):
        failed = [name for name, r in (("A1", a1), ("A2", a2)) if not r.passed]
        print(f"refusing: {' and '.join(failed)} fail, so the cluster-synchronous manifold "
              "is not defined for this partition", file=sys.stderr)
        return EXIT_UNSTABLE
    blocks = analysis.intra_jacobian_blocks(spec, p)
    analytic = analysis.intra_jacobian(spec, p)
    fd = analysis.fd_error_jacobian(spec, p, h=args.fd_step)
    dev = float(np.abs(analytic - fd).max()) if fd.size else 0.0
    payload = {
        "scale": analysis.jacobian_scale(spec),
        "blocks": [{"cluster": s + 1, "representative": p.representatives[s] + 1,
                    "matrix": b.tolist(),
                    "eigenvalues": [[z.real, z.imag] for z in eig(b).eigenvalues]}
                   for s, b in enumerate(blocks)],
        "fd_step": args.fd_step,
        "fd_max_deviation": dev,
    }
    print(io.dump_json(payload))
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    dt = args.dt if args.dt is not None else cfg.sim["dt"]
    phi0 = None
    if cfg.initial is not None:
        phi0 = cfg.initial.theta[list(cfg.partition.representatives)]
    res = analysis.bracket_mu0(cfg.spec, cfg.partition, args.mu_grid, seed=args.seed, dt=dt,
                               phi0=phi0, horizon=args.horizon, a1_mode=cfg.a1_mode)
    header = ["mu", "A1", "A2", "A3", "A4", "existence", "stability", "status",
              "frequency_margin", "smallness", "t_end", "final_max_abs_error", "convergent"]
    fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in res.rows:
            c = r.conditions
            small = "" if c.a3.smallness is None else io.FMT % c.a3.smallness
            w.writerow([io.FMT % r.mu, int(c.a1.passed), int(c.a2.passed), int(c.a3.passed),
                        int(c.a4.passed), int(c.existence), int(c.stability), r.label,
                        io.FMT % c.a3.frequency_margin, small, io.FMT % r.t_end,
                        io.FMT % r.final_max_abs_error, int(r.convergent)])
    finally:
        if fh is not sys.stdout:
            fh.close()
    largest = res.largest_convergent
    print(f"largest convergent mu (empirical): {largest}", file=sys.stderr)
    return EXIT_OK


COMMANDS = {"check": cmd_check, "simulate": cmd_simulate, "jacobian": cmd_jacobian,
            "sweep": cmd_sweep}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
