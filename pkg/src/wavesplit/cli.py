"""Command-line front end: one subcommand per experiment, CSV out.

Every command writes its tables and a ``<command>.resolved.cfg`` sidecar
into the output directory.  Files are first written under a temporary
name and only renamed once the whole command has succeeded, so a failed
run leaves nothing behind.
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from .config import RunConfig, config_hash, emit, load_config
from .core import Grid, TrapParams
from .errors import AdiabaticityWarning, ConfigError, WavesplitError
from .propagator import PropagationConfig

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def format_value(x, precision: int = 12) -> str:
    """Fixed significant-digit text for floats; ints and strings verbatim."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.{precision - 1}e}"
    return str(x)


class OutputSet:
    """Stage files next to their final names; commit renames, discard deletes."""

    def __init__(self, directory, cfg: RunConfig, command: str):
        self.directory = Path(directory)
        self.cfg = cfg
        self.command = command
        self.digest = config_hash(cfg)
        self._staged: list[tuple[Path, Path]] = []

    def _stage(self, name: str) -> tuple[Path, object]:
        final = self.directory / name
        tmp = final.with_name(final.name + ".part")
        self._staged.append((tmp, final))
        return tmp, open(tmp, "w", encoding="utf-8", newline="")

    def write_text(self, name: str, text: str):
        _, fh = self._stage(name)
        with fh:
            fh.write(text)

    def write_csv(self, name: str, columns, rows, comments=(), footer=()):
        precision = self.cfg.output.precision
        _, fh = self._stage(name)
        with fh:
            fh.write(f"# schema: wavesplit/{self.command}/v{SCHEMA_VERSION}\n")
            fh.write(f"# config-sha256: {self.digest}\n")
            for line in comments:
                fh.write(f"# {line}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([format_value(x, precision) for x in row])
            for line in footer:
                fh.write(f"# {line}\n")

    def commit(self) -> list[Path]:
        for tmp, final in self._staged:
            os.replace(tmp, final)
        return [final for _, final in self._staged]

    def discard(self):
        for tmp, _ in self._staged:
            try:
                tmp.unlink()
            except FileNotFoundError:
                pass

    def __enter__(self):
        self.directory.mkdir(parents=True, exist_ok=True)
        self.write_text(f"{self.command}.resolved.cfg", emit(self.cfg))
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            self.commit()
        else:
            self.discard()
        return False


# config -> library objects ---------------------------------------------------

def trap_from_config(cfg: RunConfig) -> TrapParams:
    return TrapParams(cfg.trap.sigma, cfg.trap.depth)


def protocol_from_config(cfg: RunConfig, v: float | None = None, n_grid: int | None = None):
    from .protocol import RampSchedule, SplitProtocol

    p, pr = cfg.protocol, cfg.propagation
    prop = PropagationConfig(dt=pr.dt, method=pr.method, observe_every=pr.observe_every,
                             snapshot_every=pr.snapshot_every, edge_tol=pr.edge_tol)
    return SplitProtocol(trap=trap_from_config(cfg), d_start=p.d_start, d_end=p.d_end,
                         v=p.v if v is None else v, frame=p.frame,
                         ramp=RampSchedule(p.ramp) if p.ramp else None, cfg=prop,
                         n_grid=cfg.grid.n if n_grid is None else n_grid,
                         z_max=cfg.grid.z_max, mirror=p.mirror, tail_tol=p.tail_tol)


def _warn_ratio(cfg: RunConfig, ratio: float, label: str):
    if ratio > cfg.diagnose.ratio_warn:
        warnings.warn(f"{label}: adiabaticity ratio {ratio:.3f} exceeds {cfg.diagnose.ratio_warn:g}",
                      AdiabaticityWarning, stacklevel=2)
    elif ratio > cfg.diagnose.ratio_notice:
        print(f"notice: {label}: adiabaticity ratio {ratio:.3f} above {cfg.diagnose.ratio_notice:g}",
              file=sys.stderr)


# commands --------------------------------------------------------------------

def cmd_spectrum(cfg: RunConfig, out: OutputSet):
    from .eigensolver import Parity, adiabatic_spectrum

    s = cfg.spectrum
    d = np.array(s.d_list) if s.d_list else np.linspace(s.d_min, s.d_max, s.count)
    d = np.sort(d)
    table = adiabatic_spectrum(trap_from_config(cfg), d, s.k, Grid(cfg.grid.z_max, cfg.grid.n))
    labels = [(n, p) for n in range((s.k + 1) // 2) for p in (Parity.EVEN, Parity.ODD)]
    series = [table.energy(n, p) for n, p in labels]
    columns = ["d"] + [f"E{n}_{p.value}" for n, p in labels]
    rows = [[float(di)] + [float(e[i]) for e in series] for i, di in enumerate(d)]
    out.write_csv("spectrum.csv", columns, rows,
                  comments=[f"levels: lowest {s.k} at each d; nan where a level is not among them"])


def cmd_phase(cfg: RunConfig, out: OutputSet):
    from .phase import phase_grid, predicted_populations, splitting_phase

    trap, p = trap_from_config(cfg), cfg.protocol
    grid = phase_grid(trap, p.d_start, p.d_end)
    rows = []
    for v in cfg.sweep.v_list:
        res = splitting_phase(trap, v, p.d_start, p.d_end, grid, cfg.phase.n_quad, p.tail_tol)
        p_transfer, p_stay = predicted_populations(res.theta_c)
        rows.append([v, 1.0 / v, res.theta_c, res.area, p_transfer, p_stay])
    out.write_csv("phase.csv", ["v", "inv_v", "theta_c", "area", "p_transfer_pred", "p_stay_pred"], rows)


SUMMARY_COLUMNS = ["p_stay", "p_transfer", "p_lost", "theta_tdse", "theta_predicted",
                   "max_adiabaticity_ratio", "p_stay_pred", "max_parity_leak",
                   "halfspace_stay", "halfspace_transfer"]


def cmd_split(cfg: RunConfig, out: OutputSet):
    from .protocol import com_trajectory

    sp = protocol_from_config(cfg)
    tr = com_trajectory(sp)
    r = tr.result
    _warn_ratio(cfg, r.max_adiabaticity_ratio, f"v={sp.v:g}")
    summary = [r.p_stay, r.p_transfer, r.p_lost, r.theta_tdse, r.theta_predicted,
               r.max_adiabaticity_ratio, r.p_stay_predicted, r.max_parity_leak,
               r.halfspace[0], r.halfspace[1]]
    out.write_csv("split_summary.csv", SUMMARY_COLUMNS, [summary])
    odd = tr.norm ** 2 - tr.parity_even
    rows = zip(tr.t, tr.d, tr.mean_z, tr.midpoint, tr.atom_trap, tr.empty_trap,
               tr.norm, tr.parity_even, odd)
    out.write_csv("split_trajectory.csv",
                  ["t", "d", "mean_z", "midpoint", "atom_trap", "empty_trap", "norm",
                   "parity_even", "parity_odd"], rows)
    snaps = [rec for rec in r.trajectory if rec.density_snapshot is not None]
    if snaps:
        z = r.final_state.grid.z
        rows = ([rec.t, zi, di] for rec in snaps for zi, di in zip(z, rec.density_snapshot))
        out.write_csv("split_density.csv", ["t", "z", "density"], rows)


def cmd_sweep(cfg: RunConfig, out: OutputSet):
    from .protocol import sweep_velocity

    rows = []
    for n in cfg.sweep.grid_n:
        template = protocol_from_config(cfg, n_grid=n)
        for row in sweep_velocity(template, cfg.sweep.v_list, cfg.sweep.workers):
            _warn_ratio(cfg, row.max_ratio, f"v={row.v:g}")
            rows.append([row.v, row.inv_v, row.p_stay, row.p_stay_pred, row.theta_tdse,
                         row.theta_predicted, row.max_ratio, row.grid_n, row.p_lost])
    out.write_csv("sweep.csv", ["v", "inv_v", "p_stay_tdse", "p_stay_pred", "theta_tdse",
                                "theta_pred", "max_ratio", "grid_n", "p_lost"], rows)


def cmd_diagnose(cfg: RunConfig, out: OutputSet):
    from .diagnostics import scan_adiabaticity

    trap, p, dg = trap_from_config(cfg), cfg.protocol, cfg.diagnose
    d = np.linspace(p.d_start, p.d_end, dg.count)
    grid = Grid.for_separation(trap, float(np.max(np.abs(d))))
    rep = scan_adiabaticity(trap, p.v, d, dg.k, grid)
    footer = [f"global_worst: d={format_value(rep.worst_d, cfg.output.precision)}, "
              f"worst_ratio={format_value(rep.worst_ratio, cfg.output.precision)}, "
              f"worst_pair_i={rep.worst_pair[0]}, worst_pair_j={rep.worst_pair[1]}"]
    out.write_csv("diagnose.csv", ["d", "worst_ratio", "worst_pair_i", "worst_pair_j"],
                  rep.per_d_curve, comments=[f"v: {format_value(p.v, cfg.output.precision)}"],
                  footer=footer)
    _warn_ratio(cfg, rep.worst_ratio, f"v={p.v:g}")


COMMANDS = {
    "spectrum": cmd_spectrum,
    "phase": cmd_phase,
    "split": cmd_split,
    "sweep": cmd_sweep,
    "diagnose": cmd_diagnose,
}


def run_command(command: str, cfg: RunConfig) -> list[Path]:
    with OutputSet(cfg.output.directory, cfg, command) as out:
        COMMANDS[command](cfg, out)
    return [final for _, final in out._staged]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wavesplit",
                                 description="Adiabatic splitting of an atom by two moving traps.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="line-oriented section.key = value file")
    ap.add_argument("--out", help="output directory (overrides output.directory)")
    ap.add_argument("--grid-n", type=int, help="grid points (overrides grid.n and sweep.grid_n)")
    ap.add_argument("--v", type=float, help="velocity (overrides protocol.v and sweep.v_list)")
    return ap


def _overrides(args) -> dict[str, str]:
    out = {}
    if args.out is not None:
        out["output.directory"] = args.out
    if args.grid_n is not None:
        out["grid.n"] = str(args.grid_n)
        out["sweep.grid_n"] = str(args.grid_n)
    if args.v is not None:
        out["protocol.v"] = repr(args.v)
        out["sweep.v_list"] = repr(args.v)
    return out


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"wavesplit: {category.__name__}: {message}", file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, _overrides(args))
    except (ConfigError, OSError, UnicodeDecodeError) as exc:
        print(f"wavesplit: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sys.stdout.write(emit(cfg))
    try:
        with warnings.catch_warnings():
            warnings.showwarning = _show_warning
            paths = run_command(args.command, cfg)
    except (WavesplitError, ValueError, ArithmeticError, OSError) as exc:
        print(f"wavesplit: {args.command} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for path in paths:
        print(f"wrote {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
