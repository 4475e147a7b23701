"""Flattening conjugation: unitarity, intertwining, quasimode transport."""

from __future__ import annotations

import numpy as np
import pytest

from quasilab import families
from quasilab.fio import (FlatteningOp, aligned_position_axes, apply_W,
                          apply_multiplier_bar, egorov_symbol,
                          flattening_reports, hd_x1, transform_quasimode)
from quasilab.grids import (FORWARD, FREQUENCY, POSITION, AxisSpec, GridField,
                            ft_axis, semiclassical_ft)
from quasilab.quasimode import Quasimode, build_cutoff
from quasilab.symbols import format_symbol, graph_factor, parse_symbol


def _a1(n=2, k=1):
    return graph_factor(families.paraboloid_pair(n, k)[0]).a


def _random_slice(h=2.0 ** -5, n=256, seed=3, space=POSITION):
    rng = np.random.default_rng(seed)
    ax = AxisSpec(0.1, 2.0, n)
    data = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return GridField(h, space, [ax], data)


class TestApplyW:
    def test_identity_at_zero(self):
        u = _random_slice()
        out = apply_W(FlatteningOp(_a1(), u.h), u, 0.0)
        assert np.abs(out.data - u.data).max() < 1e-12 * np.abs(u.data).max()

    def test_unitary(self):
        u = _random_slice()
        out = apply_W(FlatteningOp(_a1(), u.h), u, 0.37)
        assert abs(out.l2_norm() - u.l2_norm()) < 1e-12 * u.l2_norm()

    def test_adjoint_inverts(self):
        op = FlatteningOp(_a1(), 2.0 ** -5)
        u = _random_slice()
        w = apply_W(op, u, 0.37)
        back = apply_W(op, w, 0.37, adjoint=True)
        assert np.abs(back.data - u.data).max() < 1e-12 * np.abs(u.data).max()

    def test_frequency_slice_multiplies(self):
        op = FlatteningOp(_a1(), 2.0 ** -5)
        u = _random_slice(space=FREQUENCY)
        out = apply_W(op, u, 0.5)
        xi = u.axes[0].nodes()
        mult = np.exp(-1j * 0.5 * xi ** 2 / u.h)
        assert np.abs(out.data - u.data * mult).max() < 1e-12


class TestTransformQuasimode:
    @pytest.fixture()
    def setup(self):
        h, n, k = 2.0 ** -4, 2, 1
        cut = build_cutoff(families.paraboloid_cutoff(n, k, pow2=True), h)
        axes = aligned_position_axes(cut, 8.0, h / 8.0)
        u = Quasimode(cut, h).on_axes(axes)
        return FlatteningOp(_a1(n, k), h), u

    def test_frequency_side_intertwining(self, setup):
        # F_bar[v](x1, xi) = exp(-i x1 a1(xi)/h) F_bar[u](x1, xi), node by node.
        op, u = setup
        v = transform_quasimode(op, u)
        u_hat, dual = ft_axis(u.data, u.axes[1], u.h, 1)
        v_hat, _ = ft_axis(v.data, v.axes[1], v.h, 1)
        xi = dual.nodes()[None, :]
        x1 = u.axes[0].nodes()[:, None]
        a_vals = op.a1.eval_grid([xi])
        expected = u_hat * np.exp(-1j * x1 * a_vals / u.h)
        assert np.abs(v_hat - expected).max() < 1e-11 * np.abs(u_hat).max()

    def test_unitarity_per_slice(self, setup):
        op, u = setup
        v = transform_quasimode(op, u)
        nu = np.sqrt(np.sum(np.abs(u.data) ** 2, axis=1))
        nv = np.sqrt(np.sum(np.abs(v.data) ** 2, axis=1))
        keep = nu > 1e-12 * nu.max()
        assert np.abs(nv[keep] / nu[keep] - 1).max() < 1e-12

    def test_plane_wave_exact_characteristic(self):
        h = 2.0 ** -4
        cut = build_cutoff(families.paraboloid_cutoff(2, 1, pow2=True), h)
        axes = aligned_position_axes(cut, 8.0, h / 8.0)
        a1 = _a1()
        op = FlatteningOp(a1, h)
        xi0 = cut.axes[1].nodes()[cut.axes[1].points // 2 + 3]
        a_val = float(a1.eval([xi0]))
        x1 = axes[0].nodes()[:, None]
        x2 = axes[1].nodes()[None, :]
        u = GridField(h, POSITION, axes,
                      np.exp(1j * (x1 * a_val + x2 * xi0) / h))
        dv = hd_x1(transform_quasimode(op, u), 1)
        assert np.abs(dv).max() < 1e-12

    def test_quasimode_ratios(self, setup):
        op, u = setup
        for rep in flattening_reports(op, u, orders=(1, 2)):
            assert rep.ratio <= 1.0 + rep.slack
            if rep.order == 1:
                assert rep.identity_residual <= rep.identity_bound

    def test_multiplier_commutes_with_W(self, setup):
        # ||q(hD_bar) v|| = ||(a1-a2)(hD_bar) u|| when q = a1 - a2.
        op, u = setup
        _, p2 = families.paraboloid_pair(2, 1)
        q = egorov_symbol(op.a1, graph_factor(p2).a)
        v = transform_quasimode(op, u)
        qu = apply_multiplier_bar(FlatteningOp(q, u.h), u)
        qv = apply_multiplier_bar(FlatteningOp(q, u.h), v)
        assert qv.l2_norm() == pytest.approx(qu.l2_norm(), rel=1e-10)


class TestEgorov:
    def test_uniform_pair(self):
        p1, p2 = families.paraboloid_pair(2, 3)
        q = egorov_symbol(graph_factor(p1).a, graph_factor(p2).a)
        assert format_symbol(q) == "x1^4"

    def test_equal_graphs(self):
        a = _a1(3, 1)
        assert egorov_symbol(a, a).is_zero()

    def test_valley_pair(self):
        q1, q2 = families.valley_pair()
        q = egorov_symbol(graph_factor(q1).a, graph_factor(q2).a)
        x2 = parse_symbol("x1", dim=2)
        x3 = parse_symbol("x2", dim=2)
        assert q == (x2 - x3 ** 2) ** 2 + x2 ** 10
