"""Command-line entry points and table/metadata writers.

Data tables are tab-delimited text with a `# columns:` schema header and
17-significant-digit floats, so repeat runs with the same configuration
are byte-identical. The JSON metadata sidecar records every input, the
package version, wall time, and quadrature diagnostics; wall time is the
only field expected to differ between identical runs.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict
from typing import Dict, List, Tuple

import numpy as np

from . import __version__
from .config import MODES, RunConfig, parse_config
from .kernels import kernel_set
from .oracle import extract_ladder_crossed
from .params import AtomFieldParams
from .transport import compute_cbs, default_grid

__all__ = ["run", "main"]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_table(path: str, columns: List[str], rows) -> None:
    lines = ["# columns: " + "\t".join(columns)]
    for row in rows:
        lines.append("\t".join(_fmt(v) for v in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _normalize(values: np.ndarray, how: str) -> np.ndarray:
    if how != "unit-peak":
        return values
    peak = float(np.max(np.abs(values))) if np.size(values) else 0.0
    return values / peak if peak > 0 else values


def _grid_for(cfg: RunConfig, params: AtomFieldParams):
    return default_grid(params, n_points=cfg.grid_points,
                        span_mult=cfg.grid_span)


def _run_kernels(cfg: RunConfig, out: Dict) -> List[str]:
    params = cfg.atom_params()
    grid = _grid_for(cfg, params)
    ks = kernel_set(params)
    z = grid.points
    p0 = _normalize(ks.p0_smooth(z), cfg.normalization)
    p1 = ks.p1_smooth(0.0, z)
    p1 = _normalize(p1, cfg.normalization)
    p2 = _normalize(ks.p2_smooth(0.0, z), cfg.normalization)
    path = cfg.output_prefix + "_kernels.tsv"
    _write_table(path, ["omega_D_offset_over_gamma", "p0_inel",
                        "p1_re", "p1_im", "p2"],
                 zip(z, p0, p1.real, p1.imag, p2))
    out["diagnostics"] = {"w0": ks.w0(),
                          "excited_population": ks.excited_population()}
    return [path]


def _cbs_tables(cfg: RunConfig, res, suffix: str = "") -> List[str]:
    lv = _normalize(res.ladder_values, cfg.normalization)
    cv = _normalize(res.crossed_values, cfg.normalization)
    spath = cfg.output_prefix + f"_spectra{suffix}.tsv"
    _write_table(spath, ["omega_D_offset_over_gamma", "ladder_inel",
                         "crossed_inel"],
                 zip(res.grid.points, lv, cv))
    positions = sorted({p for p, _ in res.ladder.lines}
                       | {p for p, _ in res.crossed.lines})
    rows = [(p, res.ladder.line_weight(p).real, res.crossed.line_weight(p).real)
            for p in positions]
    lpath = cfg.output_prefix + f"_lines{suffix}.tsv"
    _write_table(lpath, ["position", "ladder_weight", "crossed_weight"], rows)
    return [spath, lpath]


def _run_spectra(cfg: RunConfig, out: Dict) -> List[str]:
    params = cfg.atom_params()
    res = compute_cbs(params, _grid_for(cfg, params), quad_tol=cfg.quad_tol,
                      pair_multiplicity=cfg.pair_multiplicity)
    out["diagnostics"] = res.diagnostics
    out["converged"] = bool(res.diagnostics["converged"])
    return _cbs_tables(cfg, res)


def _run_totals(cfg: RunConfig, out: Dict) -> List[str]:
    params = cfg.atom_params()
    res = compute_cbs(params, _grid_for(cfg, params), quad_tol=cfg.quad_tol,
                      pair_multiplicity=cfg.pair_multiplicity, with_totals=True)
    out["diagnostics"] = res.diagnostics
    out["converged"] = bool(res.diagnostics["converged"])
    t = res.totals
    contrast = t["I_C"] / t["I_L"] if t["I_L"] > 0 else float("nan")
    path = cfg.output_prefix + "_totals.tsv"
    _write_table(path, ["I_L", "I_L_elastic", "I_L_inelastic",
                        "I_C", "I_C_elastic", "I_C_inelastic",
                        "contrast", "total_error"],
                 [(t["I_L"], t["I_L_elastic"], t["I_L_inelastic"],
                   t["I_C"], t["I_C_elastic"], t["I_C_inelastic"],
                   contrast, t["total_error"])])
    out["totals"] = t
    return [path]


def _run_verify(cfg: RunConfig, out: Dict) -> List[str]:
    params = cfg.atom_params()
    grid = _grid_for(cfg, params)
    res = compute_cbs(params, grid, quad_tol=cfg.quad_tol,
                      pair_multiplicity=cfg.pair_multiplicity)
    orc = extract_ladder_crossed(params, grid.points, g1=cfg.oracle_g1,
                                 n_coupling_phases=cfg.oracle_phases,
                                 n_drive_phases=cfg.oracle_phases,
                                 pair_multiplicity=cfg.pair_multiplicity)

    def rel_l2(a, b):
        scale = np.linalg.norm(b)
        return float(np.linalg.norm(a - b) / scale) if scale > 0 else 0.0

    lv = _normalize(res.ladder_values, cfg.normalization)
    cv = _normalize(res.crossed_values, cfg.normalization)
    ol = _normalize(orc.ladder, cfg.normalization)
    oc = _normalize(orc.crossed, cfg.normalization)
    path = cfg.output_prefix + "_spectra.tsv"
    _write_table(path, ["omega_D_offset_over_gamma", "ladder_inel",
                        "crossed_inel", "oracle_ladder_inel",
                        "oracle_crossed_inel"],
                 zip(grid.points, lv, cv, ol, oc))
    out["diagnostics"] = dict(res.diagnostics)
    out["diagnostics"].update(
        {"oracle_" + k: v for k, v in orc.diagnostics.items()})
    out["rel_l2_ladder"] = rel_l2(res.ladder_values, orc.ladder)
    out["rel_l2_crossed"] = rel_l2(res.crossed_values, orc.crossed)
    out["converged"] = bool(res.diagnostics["converged"])
    return [path]


def _run_sweep(cfg: RunConfig, out: Dict) -> List[str]:
    rows = []
    all_converged = True
    for om in cfg.sweep_rabi:
        for de in cfg.sweep_detuning:
            params = AtomFieldParams(rabi=om, detuning=de, gamma=cfg.gamma,
                                     coupling_mod2=cfg.coupling_mod2)
            res = compute_cbs(params, _grid_for(cfg, params),
                              quad_tol=cfg.quad_tol,
                              pair_multiplicity=cfg.pair_multiplicity,
                              with_totals=True)
            t = res.totals
            contrast = t["I_C"] / t["I_L"] if t["I_L"] > 0 else float("nan")
            rows.append((om, de, t["I_L"], t["I_C"], contrast,
                         1.0 if res.diagnostics["converged"] else 0.0))
            all_converged &= bool(res.diagnostics["converged"])
    path = cfg.output_prefix + "_sweep.tsv"
    _write_table(path, ["rabi", "detuning", "I_L", "I_C", "contrast",
                        "converged"], rows)
    out["converged"] = all_converged
    return [path]


_MODE_RUNNERS = {
    "kernels": _run_kernels,
    "ladder-crossed": _run_spectra,
    "totals": _run_totals,
    "verify-oracle": _run_verify,
    "sweep": _run_sweep,
}


def run(cfg: RunConfig) -> Tuple[int, Dict]:
    """Execute one configured run; returns (exit_code, metadata)."""
    t0 = time.perf_counter()
    meta: Dict = {"mode": cfg.mode, "version": __version__,
                  "config": asdict(cfg), "converged": True}
    outputs = _MODE_RUNNERS[cfg.mode](cfg, meta)
    meta["wall_time_s"] = time.perf_counter() - t0
    meta["outputs"] = outputs
    mpath = cfg.output_prefix + "_meta.json"
    with open(mpath, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    return (0 if meta["converged"] else 2), meta


_SUBCOMMANDS = {
    "kernels": "kernels",
    "spectra": "ladder-crossed",
    "totals": "totals",
    "verify": "verify-oracle",
    "sweep": "sweep",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="atomcbs",
        description="Backscattering interference spectra of two driven "
                    "two-level atoms")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, mode in _SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"run in {mode} mode")
        p.add_argument("--config", help="path to a key=value config file")
        p.add_argument("--rabi", type=float)
        p.add_argument("--detuning", type=float)
        p.add_argument("--gamma", type=float)
        p.add_argument("--coupling-mod2", dest="coupling_mod2", type=float)
        p.add_argument("--grid-points", dest="grid_points", type=int)
        p.add_argument("--grid-span", dest="grid_span", type=float)
        p.add_argument("--quad-tol", dest="quad_tol", type=float)
        p.add_argument("--pair-multiplicity", dest="pair_multiplicity", type=int)
        p.add_argument("--normalization", choices=("none", "unit-peak"))
        p.add_argument("--output-prefix", dest="output_prefix")
        p.add_argument("--oracle-g1", dest="oracle_g1", type=float)
        p.add_argument("--oracle-phases", dest="oracle_phases", type=int)
        p.add_argument("--sweep-rabi", dest="sweep_rabi",
                       help="comma-separated values")
        p.add_argument("--sweep-detuning", dest="sweep_detuning",
                       help="comma-separated values")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    overrides = {}
    for key in ("rabi", "detuning", "gamma", "coupling_mod2", "grid_points",
                "grid_span", "quad_tol", "pair_multiplicity", "normalization",
                "output_prefix", "oracle_g1", "oracle_phases"):
        val = getattr(args, key, None)
        if val is not None:
            overrides[key] = val
    for key in ("sweep_rabi", "sweep_detuning"):
        val = getattr(args, key, None)
        if val is not None:
            overrides[key] = tuple(float(p) for p in val.split(","))
    overrides["mode"] = _SUBCOMMANDS[args.command]
    try:
        text = ""
        if args.config:
            with open(args.config, "r", encoding="utf-8") as fh:
                text = fh.read()
        cfg = parse_config(text, overrides)
        code, _ = run(cfg)
    except OSError as exc:
        print(f"atomcbs: I/O error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"atomcbs: {exc}", file=sys.stderr)
        return 1
    return code


if __name__ == "__main__":
    sys.exit(main())
