"""Command-line front end.

One binary with subcommands; every run writes its resolved configuration,
a machine-readable summary, CSV data files, and SVG plots into the output
directory.  Plots are a derived convenience layer: each one is regenerated
from its CSV alone (the ``report`` subcommand does exactly that), and all
numeric output is full-precision decimal text.  File writes go through a
temp-then-rename so partially written sweeps never leave truncated files.

Exit codes: 0 when the requested checks pass, 1 on a failed check or
runtime error, 2 on a configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import analysis, simulation
from .config import ConfigError, RunConfig, load_params, resolve_run_config
from .errors import PiezoBeamError
from .fem import element_matrices
from .mfem import q_matrix_report
from .statespace import energy_skewness_defect, save_model
from .analysis import _assemble

_FMT = "%.17g"


def _write_text(path, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_csv(path, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_FMT % v if isinstance(v, float) else v for v in row])
    _write_text(path, buf.getvalue())


def _read_csv(path):
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    return header, rows


def _summary(out_dir, payload: dict) -> None:
    _write_text(os.path.join(out_dir, "summary.json"),
                json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")


def _prepare(cfg: RunConfig):
    os.makedirs(cfg.out_dir, exist_ok=True)
    _write_text(os.path.join(cfg.out_dir, "resolved_config.json"), cfg.to_json())
    return load_params(cfg.config_path)


# ---------------------------------------------------------------------------
# plotting (matplotlib, headless, SVG; always driven from the CSV files)

def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def plot_spectrum(csv_path, out_path):
    plt = _pyplot()
    _, rows = _read_csv(csv_path)
    re = np.array([float(r[1]) for r in rows])
    im = np.array([float(r[2]) for r in rows])
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(re, im, ".", ms=3)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title("eigenvalues")
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def plot_sweep(csv_path, out_path):
    plt = _pyplot()
    _, rows = _read_csv(csv_path)
    fig, ax = plt.subplots(figsize=(6, 4))
    series: dict[tuple, list] = {}
    for scheme, n, _variant, k, im in rows:
        series.setdefault((scheme, int(k)), []).append((int(n), float(im)))
    for (scheme, k), pts in sorted(series.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts],
                marker="o", ms=3, label=f"{scheme} mode {k}")
    ax.set_xlabel("segments N")
    ax.set_ylabel("Im(lambda)")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def plot_trajectory(csv_path, out_path):
    plt = _pyplot()
    _, rows = _read_csv(csv_path)
    t = np.array([float(r[0]) for r in rows])
    cols = np.array([[float(v) for v in r[1:]] for r in rows])
    fig, axes = plt.subplots(3, 1, figsize=(6, 7), sharex=True)
    axes[0].plot(t, cols[:, 0], lw=0.7)
    axes[0].set_ylabel("v(L, t)")
    axes[1].plot(t, cols[:, 1], lw=0.7)
    axes[1].set_ylabel("w(L, t)")
    axes[2].plot(t, cols[:, 2], lw=0.7)
    axes[2].set_ylabel("H(t)")
    axes[2].set_xlabel("t")
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


_PLOTTERS = {
    "spectrum.csv": (plot_spectrum, "spectrum.svg"),
    "sweep.csv": (plot_sweep, "sweep.svg"),
    "trajectory.csv": (plot_trajectory, "trajectory.svg"),
    "trajectory_open.csv": (plot_trajectory, "trajectory_open.svg"),
    "trajectory_closed.csv": (plot_trajectory, "trajectory_closed.svg"),
}


# ---------------------------------------------------------------------------
# subcommands

def cmd_assemble(cfg: RunConfig) -> int:
    params = _prepare(cfg)
    for scheme in cfg.schemes:
        for n in cfg.n_list:
            model = _assemble(params, scheme, n, cfg.variant)
            name = f"model_{scheme}_n{n}.txt"
            save_model(model, os.path.join(cfg.out_dir, name))
            if scheme == "fem":
                elem = element_matrices(n, params, cfg.variant)
                dump = io.StringIO()
                dump.write(f"% element matrices, variant={cfg.variant}, n={n}, h={_FMT % elem.h}\n")
                for label, mat in (("M1", elem.m1), ("K1", elem.k1), ("K2", elem.k2),
                                   ("B1", elem.b1.reshape(-1, 1))):
                    dump.write(f"% matrix {label} {mat.shape[0]} {mat.shape[1] if mat.ndim==2 else 1}\n")
                    for row in np.atleast_2d(mat):
                        dump.write(" ".join(_FMT % v for v in row) + "\n")
                _write_text(os.path.join(cfg.out_dir, f"elements_{scheme}_n{n}.txt"),
                            dump.getvalue())
            else:
                _write_text(os.path.join(cfg.out_dir, "q_matrix_report.txt"),
                            q_matrix_report(params))
    _summary(cfg.out_dir, {"command": "assemble", "schemes": list(cfg.schemes),
                           "n": list(cfg.n_list), "variant": cfg.variant, "ok": True})
    return 0


def cmd_spectrum(cfg: RunConfig) -> int:
    """Spectrum of a single model (first scheme / first n of the config)."""
    params = _prepare(cfg)
    scheme, n = cfg.schemes[0], cfg.n_list[0]
    model = _assemble(params, scheme, n, cfg.variant)
    rep = analysis.spectrum(model)
    rows = [(i, float(ev.real), float(ev.imag), float(res))
            for i, (ev, res) in enumerate(zip(rep.eigenvalues, rep.residuals))]
    _write_csv(os.path.join(cfg.out_dir, "spectrum.csv"),
               ("idx", "re", "im", "residual"), rows)
    plot_spectrum(os.path.join(cfg.out_dir, "spectrum.csv"),
                  os.path.join(cfg.out_dir, "spectrum.svg"))
    ok = bool(rep.residuals.max() <= 1e-9)
    _summary(cfg.out_dir, {
        "command": "spectrum", "scheme": scheme, "n": n, "variant": model.variant,
        "first_modes": [float(v) for v in rep.mode_frequencies(4)],
        "max_residual": float(rep.residuals.max()), "ok": ok,
    })
    return 0 if ok else 1


def cmd_sweep(cfg: RunConfig) -> int:
    params = _prepare(cfg)
    csv_path = os.path.join(cfg.out_dir, "sweep.csv")
    rows_out = []
    # flush partial results per (scheme, N) so an interrupted sweep keeps data
    for scheme in cfg.schemes:
        for n in cfg.n_list:
            for row in analysis.convergence_sweep(
                    params, schemes=(scheme,), n_values=(n,), variant=cfg.variant):
                rows_out.append((row.scheme, row.segments, row.variant, row.mode, row.im_lambda))
            _write_csv(csv_path, ("scheme", "N", "variant", "k", "im_lambda"), rows_out)
    plot_sweep(csv_path, os.path.join(cfg.out_dir, "sweep.svg"))
    wide = {}
    for scheme, n, _v, k, im in rows_out:
        wide.setdefault(n, {})[f"{scheme}_k{k}"] = im
    _summary(cfg.out_dir, {"command": "sweep", "rows": len(rows_out),
                           "table": wide, "ok": True})
    return 0


def cmd_control(cfg: RunConfig) -> int:
    params = _prepare(cfg)
    rows = []
    ok = True
    for scheme in cfg.schemes:
        for n in cfg.n_list:
            model = _assemble(params, scheme, n, cfg.variant)
            rep = analysis.control_report(model)
            rows.append((rep.scheme, rep.segments, rep.n, rep.kalman_rank,
                         rep.brockett_rank, rep.tol, rep.sv_gap))
            ok = ok and rep.brockett_passed
            line = (f"{scheme} n={n}: kalman_rank={rep.kalman_rank} "
                    f"brockett={'pass' if rep.brockett_passed else 'fail'}")
            print(line)
    _write_csv(os.path.join(cfg.out_dir, "control.csv"),
               ("scheme", "N", "n", "kalman_rank", "brockett_rank", "tol", "sv_gap"), rows)
    _summary(cfg.out_dir, {"command": "control", "rows": rows, "ok": ok})
    return 0 if ok else 1


def _traj_rows(traj):
    return [(float(t), float(v), float(w), float(h), float(y))
            for t, v, w, h, y in zip(traj.t[traj.stored_steps],
                                     traj.v_tip[traj.stored_steps],
                                     traj.w_tip[traj.stored_steps],
                                     traj.energy[traj.stored_steps],
                                     traj.y[traj.stored_steps])]


def cmd_simulate(cfg: RunConfig) -> int:
    params = _prepare(cfg)
    scheme, n = cfg.schemes[0], cfg.n_list[0]
    model = _assemble(params, scheme, n, cfg.variant)
    u = simulation.default_burst(model)
    rng = np.random.default_rng(cfg.seed)
    x0 = np.zeros(model.n) if cfg.seed == 0 else rng.standard_normal(model.n)
    traj = simulation.integrate(model, x0, (0.0, cfg.t_end), dt=cfg.dt, u=u,
                                store_every=10)
    csv_path = os.path.join(cfg.out_dir, "trajectory.csv")
    _write_csv(csv_path, ("t", "v_tip", "w_tip", "energy", "y"), _traj_rows(traj))
    plot_trajectory(csv_path, os.path.join(cfg.out_dir, "trajectory.svg"))
    _summary(cfg.out_dir, {
        "command": "simulate", "scheme": scheme, "n": n, "seed": cfg.seed,
        "dt": traj.dt, "t_end": cfg.t_end,
        "energy_final": float(traj.energy[-1]), "ok": True,
    })
    return 0


def cmd_closedloop(cfg: RunConfig) -> int:
    params = _prepare(cfg)
    scheme, n = cfg.schemes[0], cfg.n_list[0]
    model = _assemble(params, scheme, n, cfg.variant)
    result = simulation.run_snapshot_protocol(
        model, kappa=cfg.gain, t_snapshot=cfg.snapshot_t,
        dt=cfg.dt if cfg.dt is not None else 5e-3)
    for tag, traj in (("open", result.open_loop), ("closed", result.closed_loop)):
        csv_path = os.path.join(cfg.out_dir, f"trajectory_{tag}.csv")
        _write_csv(csv_path, ("t", "v_tip", "w_tip", "energy", "y"), _traj_rows(traj))
        plot_trajectory(csv_path, os.path.join(cfg.out_dir, f"trajectory_{tag}.svg"))
    simulation.save_snapshot(result.snapshot, os.path.join(cfg.out_dir, "snapshot.txt"))
    closed = result.closed_loop
    head = max(1, len(closed.t) // 10)
    v_decay = _envelope_decay(closed.v_tip, head)
    w_decay = _envelope_decay(closed.w_tip, head)
    monotone = closed.max_energy_step_increase <= 1e-9 * closed.energy[0]
    dissipation = float(closed.dissipation_residuals().max())
    ok = monotone and dissipation <= 1e-8
    _summary(cfg.out_dir, {
        "command": "closedloop", "scheme": scheme, "n": n, "gain": cfg.gain,
        "snapshot_t": result.snapshot.t,
        "v_envelope_decay": v_decay, "w_envelope_decay": w_decay,
        "energy_monotone": bool(monotone),
        "max_dissipation_residual": dissipation, "ok": bool(ok),
    })
    return 0 if ok else 1


def _envelope_decay(series: np.ndarray, window: int) -> float:
    start = float(np.abs(series[:window]).max())
    end = float(np.abs(series[-window:]).max())
    return 1.0 - end / start if start > 0 else 0.0


def cmd_report(cfg: RunConfig) -> int:
    regenerated = []
    for name, (plotter, out_name) in _PLOTTERS.items():
        path = os.path.join(cfg.out_dir, name)
        if os.path.exists(path):
            plotter(path, os.path.join(cfg.out_dir, out_name))
            regenerated.append(out_name)
    _summary(cfg.out_dir, {"command": "report", "plots": regenerated, "ok": True})
    return 0


def cmd_skewness(cfg: RunConfig) -> int:
    """Energy-skewness defects, one line per requested model."""
    params = _prepare(cfg)
    rows = []
    for scheme in cfg.schemes:
        for n in cfg.n_list:
            model = _assemble(params, scheme, n, cfg.variant)
            defect = energy_skewness_defect(model)
            rows.append((scheme, n, model.variant, float(defect)))
            print(f"{scheme} n={n} variant={model.variant}: skewness defect {defect:.3e}")
    _write_csv(os.path.join(cfg.out_dir, "skewness.csv"),
               ("scheme", "N", "variant", "defect"), rows)
    _summary(cfg.out_dir, {"command": "skewness", "rows": rows, "ok": True})
    return 0


_COMMANDS = {
    "assemble": cmd_assemble,
    "spectrum": cmd_spectrum,
    "sweep": cmd_sweep,
    "control": cmd_control,
    "simulate": cmd_simulate,
    "closedloop": cmd_closedloop,
    "report": cmd_report,
    "skewness": cmd_skewness,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="piezobeam",
        description="FEM / mixed-FEM laboratory for the current-driven piezoelectric composite",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--scheme", help="fem, mfem, or a comma list")
        p.add_argument("--n", help="segment count or comma list")
        p.add_argument("--variant", help="standard or paper (fem element matrices)")
        p.add_argument("--gain", type=float, help="collocated feedback gain kappa")
        p.add_argument("--dt", type=float, help="integration step")
        p.add_argument("--t-end", dest="t_end", type=float, help="simulation end time")
        p.add_argument("--snapshot-t", dest="snapshot_t", type=float,
                       help="open-loop snapshot time for the closed-loop restart")
        p.add_argument("--config", help="beam description file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="seed for randomized initial states")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_run_config(args)
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PiezoBeamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
