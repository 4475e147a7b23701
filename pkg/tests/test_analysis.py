"""Exponent formulas (exact), Lp norms, and scaling fits."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from quasilab.analysis import (INF_P, ExponentQuery, contact_delta, exponent,
                               fit_scaling, lp_norm, oscillation_axes,
                               parse_p, shell_mask, sogge_delta,
                               submanifold_delta, transverse_delta)
from quasilab.errors import TailDominanceError
from quasilab.grids import FORWARD, AxisSpec, GridField, POSITION, semiclassical_ft

F = Fraction

# Hand-evaluated points covering both branches and the kink p0 = 2(n+1)/(n-1).
CONTACT_POINTS = [
    (2, 2, 1, F(0)),
    (2, 6, 1, F(1, 6)),          # kink for n = 2
    (2, INF_P, 1, F(1, 4)),
    (2, INF_P, 3, F(3, 8)),
    (2, 8, 1, F(3, 16)),
    (2, 8, 3, F(7, 32)),
    (3, 2, 1, F(0)),
    (3, 4, 5, F(1, 4)),          # kink for n = 3
    (3, 4, 3, F(1, 4)),
    (3, INF_P, 1, F(1, 2)),
    (3, INF_P, 3, F(3, 4)),
    (3, 8, 3, F(1, 2)),
    (4, INF_P, 1, F(3, 4)),
    (4, F(10, 3), 3, F(3, 10)),  # kink for n = 4
    (3, 5, 3, F(7, 20)),
    (2, 4, 7, F(1, 8)),
]


class TestContactExponent:
    @pytest.mark.parametrize("n,p,k,expected", CONTACT_POINTS)
    def test_hand_evaluated_points(self, n, p, k, expected):
        assert contact_delta(n, p, k) == expected

    def test_kink_branch_agreement_exact(self):
        for n in (2, 3, 4, 5):
            p0 = F(2 * (n + 1), n - 1)
            for k in (1, 3, 5, 9):
                low = F(n - 1, 4) - F(n - 1, 2) / p0
                high = (F(n - 1, 2) - n / p0
                        - F(1, k + 1) * (F(n - 1, 2) - (n + 1) / p0))
                assert low == high == contact_delta(n, p0, k)

    def test_continuity_near_kink(self):
        for n in (2, 3, 5):
            p0 = F(2 * (n + 1), n - 1)
            for k in (1, 3):
                eps = F(1, 10 ** 6)
                below = contact_delta(n, p0 - eps, k)
                above = contact_delta(n, p0 + eps, k)
                assert abs(below - above) < F(1, 10 ** 4)

    def test_agrees_with_sogge_on_low_branch(self):
        for n in (2, 3, 4):
            p0 = F(2 * (n + 1), n - 1)
            for i in range(12):
                p = 2 + (p0 - 2) * F(i, 11)
                for k in (1, 3, 7):
                    assert contact_delta(n, p, k) == sogge_delta(n, p)

    def test_never_exceeds_sogge(self):
        for n in (2, 3, 4):
            for i in range(25):
                s = F(i, 48)  # 1/p in [0, 1/2]
                p = INF_P if s == 0 else 1 / s
                for k in (1, 3, 5):
                    assert contact_delta(n, p, k) <= sogge_delta(n, p)

    def test_large_k_limit_bound(self):
        # |delta_contact - delta_sogge| <= (n-1)/(2(k+1)) above the kink.
        for n in (2, 3):
            p0 = F(2 * (n + 1), n - 1)
            for k in (1, 5, 25, 99):
                for i in range(8):
                    s = F(i, 16) * F(n - 1, n + 1) / 2
                    p = INF_P if s == 0 else 1 / s
                    if p is not INF_P and p < p0:
                        continue
                    gap = sogge_delta(n, p) - contact_delta(n, p, k)
                    assert 0 <= gap <= F(n - 1, 2 * (k + 1))

    def test_validation(self):
        with pytest.raises(ValueError):
            contact_delta(1, 4, 1)
        with pytest.raises(ValueError):
            contact_delta(3, 1, 1)
        with pytest.raises(ValueError):
            contact_delta(3, 4, 0)


class TestOtherFamilies:
    def test_sogge_values(self):
        assert sogge_delta(3, INF_P) == F(1)
        assert sogge_delta(2, 6) == F(1, 6)
        assert sogge_delta(3, 2) == F(0)

    def test_transverse_reduces_to_sogge(self):
        for n in (2, 3, 5):
            for i in range(10):
                s = F(i, 20)
                p = INF_P if s == 0 else 1 / s
                assert transverse_delta(n, p, 1) == sogge_delta(n, p)

    def test_transverse_value(self):
        assert transverse_delta(3, INF_P, 1) == F(1)
        assert transverse_delta(4, INF_P, 2) == F(1)

    def test_submanifold_continuity_at_branch(self):
        for n in (3, 4, 5):
            p0 = F(2 * n, n - 1)
            d = n - 1
            low = F(n - 1, 4) - F(d - 1, 2) / p0
            high = F(n - 1, 2) - d / p0
            assert low == high == submanifold_delta(n, p0, d)

    def test_submanifold_out_of_range(self):
        with pytest.raises(ValueError):
            submanifold_delta(4, 2, 2)  # d = n-2 needs p > 2
        with pytest.raises(ValueError):
            submanifold_delta(3, 4, 3)  # d must be <= n-1

    def test_dispatch(self):
        q = ExponentQuery("contact", 3, INF_P, k=1)
        assert exponent(q) == F(1, 2)
        with pytest.raises(ValueError):
            exponent(ExponentQuery("unknown", 3, 4))

    def test_parse_p(self):
        assert parse_p("inf") is INF_P
        assert parse_p("5/2") == F(5, 2)
        assert parse_p(4) == F(4)


class TestLpNorm:
    def test_unit_box_indicator(self):
        values = np.ones(100)
        for p in (1, 2, 4, "inf"):
            out = lp_norm(values, 0.01, p)
            assert out.value == pytest.approx(1.0, rel=1e-12)

    def test_matches_parseval(self):
        rng = np.random.default_rng(37)
        ax = AxisSpec(0.0, 2.0, 128)
        data = rng.standard_normal(128) + 1j * rng.standard_normal(128)
        f = GridField(2.0 ** -4, POSITION, [ax], data)
        hat = semiclassical_ft(f, FORWARD)
        norm = lp_norm(f.data, f.cell_volume, 2).value
        assert norm == pytest.approx(hat.l2_norm(), rel=1e-6)

    def test_sup_norm_includes_peak(self):
        values = np.zeros((8, 8))
        values[3, 4] = 7.0
        assert lp_norm(values, 1.0, "inf").value == 7.0

    def test_sup_norm_of_synthesis_dominates_peak(self):
        # A target set containing 0 puts the exact maximum in the sup norm.
        from quasilab import families
        from quasilab.quasimode import Quasimode, build_cutoff

        h = 2.0 ** -6
        qm = Quasimode(build_cutoff(families.paraboloid_cutoff(2, 1), h), h)
        rng = np.random.default_rng(51)
        targets = np.vstack([[0.0, 0.0], rng.standard_normal((30, 2)) * 0.1])
        vals = qm.values(targets)
        assert lp_norm(vals, 1.0, "inf").value >= qm.peak() * (1 - 1e-12)

    def test_sup_norm_boundary_maximizer_refused(self):
        values = np.zeros((8, 8))
        values[0, 4] = 7.0
        with pytest.raises(TailDominanceError):
            lp_norm(values, 1.0, "inf", shell_mask((8, 8)))

    def test_tail_refusal_on_heavy_boundary(self):
        values = np.ones((16, 16))
        with pytest.raises(TailDominanceError):
            lp_norm(values, 1.0, 2, shell_mask((16, 16)), shell_mask((16, 16), 1))

    def test_decaying_field_accepted(self):
        x = np.linspace(-8, 8, 129)
        vals = np.exp(-(x[:, None] ** 2 + x[None, :] ** 2) / 8.0)
        out = lp_norm(vals, 0.1, 4, shell_mask(vals.shape),
                      shell_mask(vals.shape, 1))
        assert out.tail_estimate < 0.01 * out.value

    def test_no_mask_no_policing(self):
        assert lp_norm(np.ones(4), 1.0, 2).tail_estimate == 0.0


class TestFitScaling:
    def test_exact_power_law(self):
        hs = [2.0 ** -e for e in range(4, 10)]
        norms = [3.7 * h ** -0.625 for h in hs]
        rep = fit_scaling(hs, norms, -0.625, 0.1)
        assert rep.passed and abs(rep.slope + 0.625) < 1e-10
        assert rep.slope_stderr < 1e-10

    def test_verdict_fails_outside_tolerance(self):
        hs = [2.0 ** -e for e in range(4, 10)]
        norms = [h ** -0.5 for h in hs]
        rep = fit_scaling(hs, norms, -0.7, 0.1)
        assert not rep.passed

    def test_requires_five_points(self):
        with pytest.raises(ValueError):
            fit_scaling([0.5, 0.25], [1, 2], 0.0, 0.1)

    def test_requires_positive_norms(self):
        hs = [2.0 ** -e for e in range(4, 10)]
        with pytest.raises(ValueError):
            fit_scaling(hs, [0.0] * len(hs), 0.0, 0.1)


class TestHelpers:
    def test_shell_mask_layers(self):
        m0 = shell_mask((5, 5))
        m1 = shell_mask((5, 5), 1)
        assert m0.sum() == 16 and m1.sum() == 8
        assert not (m0 & m1).any()

    def test_oscillation_axes(self):
        axes = oscillation_axes([0.5, 0.25], 2.0 ** -5, margin=8,
                                points_per_scale=8)
        assert all(a.points == 128 for a in axes)
        assert axes[0].half_width == pytest.approx(8 * 2.0 ** -5 / 0.5)
