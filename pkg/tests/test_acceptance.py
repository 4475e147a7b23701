"""Acceptance gate: one check per headline criterion, at stated tolerances.

Each test prints a single PASS/FAIL line (visible with pytest -s) and then
asserts, so the suite both reports and enforces.  Tolerances are pinned
here, not configurable.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np
import pytest

from quasilab import families
from quasilab.analysis import (INF_P, contact_delta, fit_scaling, lp_norm,
                               oscillation_axes, shell_mask, sogge_delta)
from quasilab.cli import main
from quasilab.experiments import (EXIT_CONFIG, EXIT_OK, EXIT_REFUSED,
                                  EXIT_VERDICT_FAIL)
from quasilab.fio import (FlatteningOp, aligned_position_axes, apply_W,
                          flattening_reports, transform_quasimode)
from quasilab.grids import FORWARD, AxisSpec, GridField, POSITION, semiclassical_ft
from quasilab.oscint import (OscIntegrand, dyadic_amplitude, dyadic_loss,
                             power_loss, quadratic_phase, resonant_amplitude,
                             ttstar_kernel, vdc_check)
from quasilab.quasimode import Quasimode, build_cutoff, support_volume, \
    verify_joint_quasimode
from quasilab.symbols import (mixed_partials_check, contact_profile, graph_factor,
                              parse_symbol, sample_directions)
from quasilab.wavelets import decay_diagnostic

F = Fraction


def report(criterion: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} {criterion}: {detail}")
    assert ok, f"{criterion}: {detail}"


def bar(p):
    return graph_factor(p).a


class TestCriterion1Exponents:
    def test_exponent_formulas(self):
        points = [
            (2, 2, 1, F(0)), (2, 6, 1, F(1, 6)), (2, INF_P, 1, F(1, 4)),
            (2, INF_P, 3, F(3, 8)), (2, 8, 1, F(3, 16)), (2, 8, 3, F(7, 32)),
            (3, 2, 1, F(0)), (3, 4, 5, F(1, 4)), (3, INF_P, 1, F(1, 2)),
            (3, INF_P, 3, F(3, 4)), (3, 8, 3, F(1, 2)), (4, INF_P, 1, F(3, 4)),
            (4, F(10, 3), 3, F(3, 10)), (3, 5, 3, F(7, 20)), (2, 4, 7, F(1, 8)),
        ]
        mismatches = [pt for pt in points
                      if contact_delta(pt[0], pt[1], pt[2]) != pt[3]]
        kink_exact = True
        low_branch_match = True
        for n in (2, 3, 4):
            p0 = F(2 * (n + 1), n - 1)
            for k in (1, 3, 5):
                low = F(n - 1, 4) - F(n - 1, 2) / p0
                kink_exact &= contact_delta(n, p0, k) == low
                for i in range(8):
                    p = 2 + (p0 - 2) * F(i, 7)
                    low_branch_match &= (contact_delta(n, p, k)
                                         == sogge_delta(n, p))
        ok = (not mismatches and kink_exact and low_branch_match
              and contact_delta(3, INF_P, 1) == F(1, 2))
        report("criterion 1 (exponent formulas)", ok,
               f"{len(points)} hand-evaluated points exact, kink agreement "
               f"exact, low branch equals the unconditional exponent")


class TestCriterion2Contact:
    def test_contact_geometry(self):
        ok = True
        details = []
        for n in (2, 3):
            for k in (1, 3, 5):
                p1, p2 = families.paraboloid_pair(n, k)
                prof = contact_profile(bar(p1), bar(p2))
                uniform_k = prof.uniform and set(prof.orders()) == {k}
                claim = mixed_partials_check(bar(p1), bar(p2), k).ok
                past = not mixed_partials_check(bar(p1), bar(p2), k + 1).ok
                ok &= uniform_k and claim and past
                details.append(f"n={n},k={k}:{'ok' if uniform_k else 'BAD'}")
        a1, a2 = families.plane_vs_bowl_graphs()
        prof = contact_profile(a1, a2, sample_directions(2, 64))
        orders = {tuple(r.direction): r.order for r in prof.reports}
        on_axis = {o for d, o in orders.items() if d[0] == 0}
        off_axis = {o for d, o in orders.items() if d[0] != 0}
        split_ok = on_axis == {5} and off_axis == {1} and not prof.uniform
        ok &= split_ok
        report("criterion 2 (contact geometry)", ok,
               f"uniform pairs {details}; surface pair orders "
               f"off-axis={sorted(off_axis)}, on-axis={sorted(on_axis)}")


CUTOFFS_C3 = [
    ("large-p pair n=2 k=3", lambda: families.paraboloid_cutoff(2, 3), 2.0 ** -6),
    ("slab pair n=3", lambda: families.slab_cutoff(3, 3), 2.0 ** -5),
    ("axis pair k=3", lambda: families.axis_contact_cutoff(3), 2.0 ** -6),
    ("valley pair", lambda: families.valley_cutoff(), 2.0 ** -6),
]


class TestCriterion3QuasimodeExactness:
    def test_normalization_peak_and_ratios(self):
        worst_t0 = 0.0
        worst_ratio = 0.0
        for name, spec_fn, h in CUTOFFS_C3:
            cut = build_cutoff(spec_fn(), h)
            qm = Quasimode(cut, h)
            assert qm.l2norm == 1.0
            t0 = abs(abs(qm.values(np.zeros((1, cut.dim)))[0]) - qm.peak())
            worst_t0 = max(worst_t0, t0 / qm.peak())
            for m1 in range(4):
                for m2 in range(4):
                    worst_ratio = max(worst_ratio,
                                      verify_joint_quasimode(qm, m1, m2))
        ok = worst_t0 <= 1e-10 and worst_ratio <= 1.0 + 1.0 / 16.0
        report("criterion 3 (quasimode exactness)", ok,
               f"peak identity rel err {worst_t0:.2e} <= 1e-10; "
               f"max joint ratio {worst_ratio:.6f} <= 1 + 1/16")


class TestCriterion4Volumes:
    def test_volume_bands(self):
        hs = [2.0 ** -e for e in range(4, 13)]
        cases = [
            ("large-p n=2 k=1", families.paraboloid_cutoff(2, 1), 1 + 1 / 2),
            ("large-p n=3 k=3", families.paraboloid_cutoff(3, 3), 1 + 2 / 4),
            ("slab n=3", families.slab_cutoff(3, 3), 1 + 1.0),
            ("axis k=3", families.axis_contact_cutoff(3), 1 + 1 / 2 + 1 / 4),
            ("valley", families.valley_cutoff(), 1 + 1 / 2 + 1 / 20),
        ]
        bands = {}
        for name, spec, gamma in cases:
            ratios = [support_volume(build_cutoff(spec, h)) / h ** gamma
                      for h in hs]
            bands[name] = max(ratios) / min(ratios)
        ok = all(b <= 4.0 for b in bands.values())
        report("criterion 4 (volume scaling)", ok,
               "factor-4 bands over h in 2^-4..2^-12: " +
               ", ".join(f"{k}={v:.3f}" for k, v in bands.items()))


def _lp_sweep(spec, hs, ps, dim):
    norms = {p: [] for p in ps}
    for h in hs:
        cut = build_cutoff(spec, h)
        qm = Quasimode(cut, h)
        exts = [cut.extent(i) for i in range(dim)]
        g = qm.on_axes(oscillation_axes(exts, h))
        m0 = shell_mask(g.data.shape, 0)
        m1 = shell_mask(g.data.shape, 1)
        for p in ps:
            if p == 2:
                norms[p].append(1.0)  # exact frequency-side normalization
            else:
                norms[p].append(lp_norm(g.data, g.cell_volume, p, m0, m1).value)
    return norms


class TestCriterion5Sharpness:
    def test_fitted_slopes(self):
        hs = [2.0 ** -e for e in range(4, 11)]
        lines = []
        ok = True
        for k in (1, 3):
            norms = _lp_sweep(families.paraboloid_cutoff(2, k), hs,
                              [INF_P, 8], 2)
            for p in (INF_P, 8):
                predicted = -float(contact_delta(2, p, k))
                rep = fit_scaling(hs, norms[p], predicted, 0.1)
                ok &= rep.passed
                lines.append(f"k={k},p={'inf' if p is INF_P else p}:"
                             f"{rep.slope:+.4f} vs {predicted:+.4f}")
        norms = _lp_sweep(families.slab_cutoff(2, 3), hs, [2, 4, 6], 2)
        for p in (2, 4, 6):
            predicted = -0.5 * (0.5 - 1.0 / p)
            rep = fit_scaling(hs, norms[p], predicted, 0.1)
            ok &= rep.passed
            lines.append(f"slab p={p}:{rep.slope:+.4f} vs {predicted:+.4f}")
        hs12 = [2.0 ** -e for e in range(4, 13)]
        peaks = [Quasimode(build_cutoff(families.valley_cutoff(), h), h).peak()
                 for h in hs12]
        predicted = -(3.0 / 4.0 - 1.0 / 40.0)
        rep = fit_scaling(hs12, peaks, predicted, 0.1)
        ok &= rep.passed
        lines.append(f"valley peak:{rep.slope:+.4f} vs {predicted:+.4f}")
        report("criterion 5 (sharpness slopes)", ok, "; ".join(lines))


class TestCriterion6Flattening:
    def test_unitarity_quasimode_and_transported_symbol(self):
        rng = np.random.default_rng(41)
        ax = AxisSpec(0.0, 2.0, 256)
        slice_field = GridField(2.0 ** -5, POSITION, [ax],
                                rng.standard_normal(256)
                                + 1j * rng.standard_normal(256))
        a1 = bar(families.paraboloid_pair(2, 1)[0])
        op = FlatteningOp(a1, 2.0 ** -5)
        w = apply_W(op, slice_field, 0.41)
        unit_err = abs(w.l2_norm() - slice_field.l2_norm()) / slice_field.l2_norm()
        back = apply_W(op, w, 0.41, adjoint=True)
        inv_err = (np.abs(back.data - slice_field.data).max()
                   / np.abs(slice_field.data).max())

        ratio_ok = True
        ratios = []
        for h in (2.0 ** -4, 2.0 ** -5):
            cut = build_cutoff(families.paraboloid_cutoff(2, 1, pow2=True), h)
            u = Quasimode(cut, h).on_axes(aligned_position_axes(cut, 8.0, h / 8))
            for rep in flattening_reports(FlatteningOp(a1, h), u, (1, 2)):
                ratio_ok &= rep.ratio <= 1.0 + rep.slack
                ratios.append(f"h={h},M={rep.order}:{rep.ratio:.3f}")

        from quasilab.fio import egorov_symbol
        p1, p2 = families.paraboloid_pair(2, 3)
        e1 = egorov_symbol(bar(p1), bar(p2)) == parse_symbol("x1^4", dim=1)
        q1, q2 = families.valley_pair()
        x2, x3 = parse_symbol("x1", dim=2), parse_symbol("x2", dim=2)
        e2 = egorov_symbol(bar(q1), bar(q2)) == (x2 - x3 ** 2) ** 2 + x2 ** 10
        ok = unit_err < 1e-12 and inv_err < 1e-12 and ratio_ok and e1 and e2
        report("criterion 6 (flattening/transport)", ok,
               f"unitarity {unit_err:.1e}, inverse {inv_err:.1e}, "
               f"x1-quasimode ratios {ratios}, transported symbols exact")


class TestCriterion7WaveletDecay:
    def test_flat_model_diagnostic(self, flat_model_field, mother_wavelet):
        diag = decay_diagnostic(flat_model_field, mother_wavelet, 1, 3)
        worst_j = max((r for _, r in diag.j_ratios), default=0.0)
        ok = (diag.small_a_slope >= 1.4
              and abs(diag.large_a_slope) <= 0.1
              and worst_j <= 2.0 ** -4)
        report("criterion 7 (wavelet decay)", ok,
               f"a-exponents: small {diag.small_a_slope:.3f} >= 1.4, "
               f"large {diag.large_a_slope:+.3f} in [-0.1, 0.1]; "
               f"j-ratio {worst_j:.4f} <= 2^-4")


class TestCriterion8VanDerCorput:
    def test_decay_and_kernel(self, mother_wavelet):
        hs = [2.0 ** -e for e in range(6, 13)]
        d1 = vdc_check(OscIntegrand(quadratic_phase(1.0, 1),
                                    dyadic_amplitude(3, 2), 1,
                                    ((-1.5, 1.5),), dyadic_loss(3, 2)), hs, 1.0)
        d2 = vdc_check(OscIntegrand(quadratic_phase(1.0, 2),
                                    dyadic_amplitude(3, 1), 2,
                                    ((-1.5, 1.5),) * 2, dyadic_loss(3, 1)),
                       [2.0 ** -e for e in range(3, 9)], 1.0)
        phase = quadratic_phase(1.0, 1)
        bad = vdc_check(OscIntegrand(phase, resonant_amplitude(phase, 0.8),
                                     1, ((-1.0, 1.0),), power_loss(0.8)),
                        hs, 1.0)
        a1 = parse_symbol("x1^2", dim=1)
        sep = 2.0 ** -3
        r_osc, r_triv = [], []
        for h in [2.0 ** -e for e in range(8, 13)]:
            kv = ttstar_kernel(a1, mother_wavelet, 0.5, 0, h, 3,
                               x1=sep / 2, z1=-sep / 2, xbar=[0.0], zbar=[0.0])
            r_osc.append(abs(kv.value) * h ** 0.5 * sep ** 0.5 / 0.5)
            kv2 = ttstar_kernel(a1, mother_wavelet, 0.5, 0, h, 3,
                                x1=h / 2, z1=-h / 2, xbar=[0.0], zbar=[0.0])
            r_triv.append(abs(kv2.value) / (0.5 * h ** -0.75))
        band_osc = max(r_osc) / min(r_osc)
        band_triv = max(r_triv) / min(r_triv)
        ok = (d1.verdict == "PASS" and abs(d1.fitted_exponent - 0.5) <= 0.1
              and d2.verdict == "PASS" and abs(d2.fitted_exponent - 1.0) <= 0.1
              and bad.verdict == "FAIL" and bad.fitted_exponent < 0.4
              and band_osc <= 4.0 and band_triv <= 4.0)
        report("criterion 8 (stationary-phase bound)", ok,
               f"d=1 slope {d1.fitted_exponent:.3f}, d=2 slope "
               f"{d2.fitted_exponent:.3f}, inadmissible slope "
               f"{bad.fitted_exponent:.3f} < 0.4; kernel bands "
               f"osc {band_osc:.2f}, trivial {band_triv:.2f} <= 4")


class TestCriterion9Infrastructure:
    def test_determinism_exit_codes_and_properties(
            self, tmp_path, reconstruction_error):
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text("""
[experiment]
id = det-check
kind = sharpness-sweep
seed = 99

[params]
family = paraboloid
n = 2
k = 1
h_start = 2^-4
h_stop = 2^-8
p_list = inf
joint_orders = 1
""")
        assert main(["run", str(cfg), "--out", str(tmp_path / "a")]) == EXIT_OK
        assert main(["run", str(cfg), "--out", str(tmp_path / "b")]) == EXIT_OK
        identical = ((tmp_path / "a" / "sweep.csv").read_bytes()
                     == (tmp_path / "b" / "sweep.csv").read_bytes())
        identical &= ((tmp_path / "a" / "report.json").read_bytes()
                      == (tmp_path / "b" / "report.json").read_bytes())

        bad_cfg = tmp_path / "bad.cfg"
        bad_cfg.write_text(cfg.read_text().replace("p_list = inf",
                                                   "p_list = 1"))
        code2 = main(["run", str(bad_cfg)]) == EXIT_CONFIG

        fail_cfg = tmp_path / "fail.cfg"
        fail_cfg.write_text("""
[experiment]
id = fail-check
kind = contact-profile
seed = 99

[params]
n = 3
k = 3
family = paraboloid
expect_uniform = false
expect_orders = 3
""")
        code1 = main(["run", str(fail_cfg),
                      "--out", str(tmp_path / "f")]) == EXIT_VERDICT_FAIL

        refuse_cfg = tmp_path / "refuse.cfg"
        refuse_cfg.write_text("""
[experiment]
id = refuse-check
kind = vdc
seed = 99

[params]
d = 1
mu = 1
amplitude = dyadic
k = 3
j = 0
box_half_width = 400
h_start = 2^-8
h_stop = 2^-12
expect = pass
""")
        code3 = main(["run", str(refuse_cfg),
                      "--out", str(tmp_path / "r")]) == EXIT_REFUSED

        # Property basket: linearity, Parseval, translation covariance,
        # reconstruction.
        rng = np.random.default_rng(43)
        ax = AxisSpec(0.0, 1.0, 128)
        f1 = rng.standard_normal(128) + 1j * rng.standard_normal(128)
        f2 = rng.standard_normal(128) + 1j * rng.standard_normal(128)
        h = 2.0 ** -5
        ft = lambda d: semiclassical_ft(GridField(h, POSITION, [ax], d), FORWARD)
        lin = np.abs(ft(2 * f1 - 1j * f2).data
                     - (2 * ft(f1).data - 1j * ft(f2).data)).max() < 1e-12
        parseval = abs(ft(f1).l2_norm()
                       - GridField(h, POSITION, [ax], f1).l2_norm()) < 1e-10

        from quasilab.grids import FREQUENCY, direct_synthesis
        axes = [AxisSpec(0.0, 4 * h, 32), AxisSpec(0.0, 4 * h, 32)]
        data = np.zeros((32, 32), complex)
        data[8:16, 10:20] = 1.0
        field = GridField(h, FREQUENCY, axes, data)
        shifted = GridField(h, FREQUENCY, axes, np.roll(data, 5, axis=1))
        targets = rng.standard_normal((16, 2))
        base = direct_synthesis(field, targets)
        moved = direct_synthesis(shifted, targets)
        phase = np.exp(1j * targets[:, 1] * 5 * axes[1].spacing / h)
        covariant = np.abs(moved - base * phase).max() <= 1e-10 * np.abs(base).max()

        ok = (identical and code1 and code2 and code3 and lin and parseval
              and covariant and reconstruction_error < 1e-3)
        report("criterion 9 (infrastructure)", ok,
               f"bit-identical reruns {identical}; exit codes 1/2/3 "
               f"{code1}/{code2}/{code3}; linearity {lin}, parseval "
               f"{parseval}, covariance {covariant}, reconstruction "
               f"{reconstruction_error:.2e} < 1e-3")
