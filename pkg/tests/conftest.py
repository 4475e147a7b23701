"""Shared fixtures: expensive artifacts built once per session."""

from __future__ import annotations

import numpy as np
import pytest

from quasilab import families
from quasilab.fio import aligned_position_axes
from quasilab.grids import AxisSpec, GridField, POSITION
from quasilab.quasimode import Quasimode, build_cutoff
from quasilab.wavelets import cwt, make_mother_wavelet, reconstruct


@pytest.fixture(scope="session")
def mother_wavelet():
    return make_mother_wavelet()


@pytest.fixture(scope="session")
def reconstruction_error(mother_wavelet):
    """Relative L2 error of the truncated-grid inversion formula.

    The test signal is spectrally confined to the scale band the a-grid
    covers; the budget below reaches a few 1e-4.
    """
    ax = AxisSpec(0.0, 8.0, 2048)
    x = ax.nodes()
    sig = np.exp(-x ** 2 / 2.0) * np.sin(4.0 * x)
    v = GridField(2.0 ** -4, POSITION, [ax], sig.astype(complex))
    a_grid = np.geomspace(2.0 ** -7, 2.0 ** 6, 105)
    coeffs = cwt(v, mother_wavelet, a_grid, b_step_factor=16.0, x1_scale=0.25)
    rec = reconstruct(coeffs, mother_wavelet, x)
    return float(np.sqrt(np.sum(np.abs(rec - sig) ** 2) / np.sum(sig ** 2)))


@pytest.fixture(scope="session")
def flat_model_field():
    """Flat-model quasimode for the wavelet decay diagnostics (n=2, k=3)."""
    h = 2.0 ** -8
    cut = build_cutoff(families.flat_cutoff(2, 3, pow2=True), h)
    axes = aligned_position_axes(cut, 6.0, 2.0 ** -9)
    return Quasimode(cut, h).on_axes(axes)
