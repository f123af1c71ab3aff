"""End-to-end acceptance criteria; one printed pass/fail line per criterion.

The lines are written with capture temporarily disabled so every run of the
suite shows them, pass or fail.
"""
import time

import numpy as np
import pytest

from atomcbs import (AtomFieldParams, compute_cbs, default_grid,
                     extract_ladder_crossed, kernel_set, p0_spectrum)
from atomcbs.transport import integrate_total

from oracles import (elastic_weight_closed, excited_population_closed,
                     mollow_inelastic)

FIG2_WEAK = AtomFieldParams(rabi=0.1, detuning=-5.0)
FIG2_STRONG = AtomFieldParams(rabi=10.0, detuning=-5.0)

_CACHE = {}


def _cbs(params, n_points=2001, with_totals=False):
    """Memoized timed pipeline run (walls are reported by criterion 1)."""
    key = (params, n_points, with_totals)
    if key not in _CACHE:
        t0 = time.perf_counter()
        res = compute_cbs(params, grid=default_grid(params, n_points=n_points),
                          with_totals=with_totals)
        _CACHE[key] = (res, time.perf_counter() - t0)
    return _CACHE[key]


def _report(capsys, tag: str, ok: bool, detail: str) -> None:
    # one visible line per criterion, emitted past the capture machinery
    with capsys.disabled():
        print(f"{tag} {'PASS' if ok else 'FAIL'}: {detail}", flush=True)
    assert ok, f"{tag}: {detail}"


def _rel_l2(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def _unit(v):
    return v / np.max(np.abs(v))


def test_criterion_1_oracle_equivalence(capsys):
    # normalized inelastic spectra from the kernel pipeline vs the coupled
    # two-atom solution, both named parameter sets plus seeded random draws
    rng = np.random.default_rng(20260814)
    cases = [FIG2_WEAK, FIG2_STRONG] + [
        AtomFieldParams(rabi=float(rng.uniform(0.05, 10.0)),
                        detuning=float(rng.uniform(-6.0, 6.0)))
        for _ in range(3)]
    worst = 0.0
    worst_pipe = 0.0
    worst_oracle = 0.0
    for p in cases:
        res, wall_pipe = _cbs(p)
        t0 = time.perf_counter()
        orc = extract_ladder_crossed(p, res.grid.points)
        wall_oracle = time.perf_counter() - t0
        rl = _rel_l2(_unit(res.ladder_values), _unit(orc.ladder))
        rc = _rel_l2(_unit(res.crossed_values), _unit(orc.crossed))
        worst = max(worst, rl, rc)
        worst_pipe = max(worst_pipe, wall_pipe)
        worst_oracle = max(worst_oracle, wall_oracle)
    ok = worst <= 1e-3 and worst_pipe < 5.0 and worst_oracle < 300.0
    _report(capsys, "criterion 1 (oracle equivalence)", ok,
            f"max rel L2 {worst:.3e} (tol 1e-3) over {len(cases)} parameter "
            f"sets; pipeline <= {worst_pipe:.2f} s (budget 5 s), "
            f"oracle <= {worst_oracle:.2f} s (budget 300 s)")


def test_criterion_2_emission_closed_form(capsys):
    worst = 0.0
    wall = 0.0
    for p in (FIG2_WEAK, FIG2_STRONG):
        z = default_grid(p).points
        t0 = time.perf_counter()
        got = kernel_set(p).p0_smooth(z)
        wall += time.perf_counter() - t0
        ref = mollow_inelastic(z, p.rabi, p.detuning)
        worst = max(worst, float(np.max(np.abs(got - ref) / np.abs(ref))))
    ok = worst <= 1e-10 and wall < 1.0
    _report(capsys, "criterion 2 (inelastic emission closed form)", ok,
            f"max pointwise rel {worst:.3e} (tol 1e-10), eval {wall:.3f} s "
            f"(budget 1 s)")


def test_criterion_3_sum_rules(capsys):
    worst_el = 0.0
    worst_inel = 0.0
    for om in (0.01, 0.1, 1.0, 3.0, 10.0):
        for de in (0.0, 2.0, -2.0, 5.0, -5.0):
            p = AtomFieldParams(rabi=om, detuning=de)
            _, elastic, inelastic, _ = integrate_total(p0_spectrum(p), p)
            w0 = elastic_weight_closed(om, de)
            connected = excited_population_closed(om, de) - w0
            worst_el = max(worst_el, abs(elastic - w0))
            worst_inel = max(worst_inel, abs(inelastic - connected))
    ok = worst_el <= 1e-8 and worst_inel <= 1e-8
    _report(capsys, "criterion 3 (sum rules)", ok,
            f"5x5 sweep: max |elastic - |<s->|^2| {worst_el:.3e}, "
            f"max |integral - connected population| {worst_inel:.3e} "
            f"(tol 1e-8 absolute)")


def test_criterion_4_weak_field_full_contrast(capsys):
    res, _ = _cbs(AtomFieldParams(rabi=0.01, detuning=0.0), n_points=41,
                  with_totals=True)
    ratio = (res.crossed.line_weight(0.0).real /
             res.ladder.line_weight(0.0).real)
    elastic_ok = abs(ratio - 1.0) <= 1e-6
    # the totals ratio approaches 1 from below as the drive weakens; the
    # limit is verified by the quadratic convergence of the deviation and
    # its magnitude at the smallest drive
    devs = []
    for om in (0.01, 0.005, 0.0025):
        p = AtomFieldParams(rabi=om, detuning=0.0)
        r, _ = _cbs(p, n_points=41, with_totals=True)
        devs.append(abs(r.totals["I_C"] / r.totals["I_L"] - 1.0))
    ratios = [devs[0] / devs[1], devs[1] / devs[2]]
    totals_ok = devs[-1] <= 1e-4 and all(3.0 <= r <= 5.0 for r in ratios)
    ok = elastic_ok and totals_ok
    _report(capsys, "criterion 4 (weak-field full contrast)", ok,
            f"elastic ratio - 1 = {ratio - 1.0:.2e} (tol 1e-6); totals "
            f"|I_C/I_L - 1| = {devs[0]:.3e} -> {devs[1]:.3e} -> {devs[2]:.3e} "
            f"at rabi 0.01 -> 0.0025 (quadratic in rabi, final <= 1e-4)")


def test_criterion_5_negative_ladder_feature(capsys):
    res, _ = _cbs(FIG2_STRONG)
    mn = float(np.min(res.ladder_values))
    tol = res.diagnostics["ladder_quad_error"] + 1e-10
    ok = mn < -tol
    _report(capsys, "criterion 5 (negative ladder regions)", ok,
            f"min inelastic ladder {mn:.3e} at rabi 10, detuning -5 "
            f"(quadrature tolerance {tol:.1e})")


def test_criterion_6_distributional_structure(capsys):
    checks = []
    for p in (FIG2_WEAK, FIG2_STRONG):
        res, _ = _cbs(p)
        positions = {pos for pos, _ in res.ladder.lines} | {
            pos for pos, _ in res.crossed.lines}
        checks.append(positions == {0.0})
        checks.append(res.diagnostics["crossed_imag_residue"] <= 1e-10)
        checks.append(max(abs(w.imag) for _, w in
                          res.ladder.lines + res.crossed.lines) <= 1e-10)
        checks.append(bool(np.all(np.isfinite(res.ladder_values))
                           and np.all(np.isfinite(res.crossed_values))))
        # reversed-path pairing is Hermitian: f(z - nu) = conj(f(nu))
        ks = kernel_set(p)
        z = 1.3
        nus = np.array([-3.0, -0.4, 0.8, 2.9])
        f = ks.p1_smooth(nus, z) * np.conj(ks.p1_smooth(z - nus, z))
        g = ks.p1_smooth(z - nus, z) * np.conj(ks.p1_smooth(nus, z))
        checks.append(bool(np.all(np.abs(g - np.conj(f))
                                  <= 1e-12 * np.abs(f) + 1e-18)))
    ok = all(checks)
    _report(capsys, "criterion 6 (distributional structure)", ok,
            "elastic positions exactly {0}; imaginary residues <= 1e-10; "
            "Hermitian reversed-path symmetry <= 1e-12 relative")


def test_criterion_7_numerical_robustness(capsys):
    base, _ = _cbs(FIG2_STRONG)
    fine = compute_cbs(FIG2_STRONG, grid=default_grid(FIG2_STRONG,
                                                      n_points=4001))
    mask = np.isin(np.round(fine.grid.points, 12),
                   np.round(base.grid.points, 12))
    d_grid = max(float(np.max(np.abs(fine.ladder_values[mask]
                                     - base.ladder_values))),
                 float(np.max(np.abs(fine.crossed_values[mask]
                                     - base.crossed_values))))
    tight = compute_cbs(FIG2_STRONG, quad_tol=1e-9)
    d_tol = max(float(np.max(np.abs(tight.ladder_values - base.ladder_values))),
                float(np.max(np.abs(tight.crossed_values
                                    - base.crossed_values))))
    omegas = np.linspace(-15.0, 15.0, 201)
    orc = extract_ladder_crossed(FIG2_WEAK, omegas)
    d_pair = 0.0
    d_phase = 0.0
    alt = extract_ladder_crossed(FIG2_WEAK, omegas, g1=0.005)
    d_pair = max(_rel_l2(alt.ladder, orc.ladder),
                 _rel_l2(alt.crossed, orc.crossed))
    alt = extract_ladder_crossed(FIG2_WEAK, omegas, n_coupling_phases=12,
                                 n_drive_phases=12)
    d_phase = max(_rel_l2(alt.ladder, orc.ladder),
                  _rel_l2(alt.crossed, orc.crossed))
    ok = d_grid <= 1e-8 and d_tol <= 1e-8 and d_pair <= 1e-3 and d_phase <= 1e-3
    _report(capsys, "criterion 7 (numerical robustness)", ok,
            f"grid x2 max change {d_grid:.1e}, tolerance /10 max change "
            f"{d_tol:.1e} (declared 1e-8); coupling-pair change {d_pair:.1e}, "
            f"phase-grid change {d_phase:.1e} (tol 1e-3 relative)")
