"""Anisotropic grids, semiclassical Fourier transforms, and direct synthesis.

Grids use a midpoint convention: an axis with N cells over
[center-hw, center+hw] samples at the N cell centers, so a uniform weight
of one cell volume per sample is the quadrature rule everywhere.  With the
dual axis chosen so that dx * dxi = 2*pi*h / N, the discrete transform is
exactly unitary for that quadrature (Parseval holds to rounding) and
inverse(forward) is the identity.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatchError
from .symbols import PolySymbol

POSITION = "position"
FREQUENCY = "frequency"
FORWARD = "forward"
INVERSE = "inverse"

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class AxisSpec:
    """One grid axis: N cell midpoints over [center-hw, center+hw]."""

    center: float
    half_width: float
    points: int

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        if self.points < 2:
            raise ValueError("points must be >= 2")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points

    @property
    def start(self) -> float:
        """Left edge of the first cell."""
        return self.center - self.half_width

    def nodes(self) -> np.ndarray:
        return self.start + (np.arange(self.points) + 0.5) * self.spacing


def dual_axis(axis: AxisSpec, h: float) -> AxisSpec:
    """Dual axis for the h-scaled transform: dxi = 2*pi*h/(N*dx), centered at 0."""
    dxi = _TWO_PI * h / (axis.points * axis.spacing)
    return AxisSpec(0.0, 0.5 * axis.points * dxi, axis.points)


@dataclass
class GridField:
    """Complex samples over a product grid, tagged position- or frequency-side."""

    h: float
    space: str
    axes: list[AxisSpec]
    data: np.ndarray

    def __post_init__(self):
        if not 0 < self.h <= 1:
            raise ValueError("h must lie in (0, 1]")
        if self.space not in (POSITION, FREQUENCY):
            raise ValueError(f"unknown space tag {self.space!r}")
        shape = tuple(a.points for a in self.axes)
        if self.data.shape != shape:
            raise DimensionMismatchError(
                f"data shape {self.data.shape} does not match axes {shape}")

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def cell_volume(self) -> float:
        vol = 1.0
        for a in self.axes:
            vol *= a.spacing
        return vol

    def node_arrays(self) -> list[np.ndarray]:
        """Per-axis node coordinates shaped for broadcasting."""
        out = []
        for i, a in enumerate(self.axes):
            shape = [1] * self.dim
            shape[i] = a.points
            out.append(a.nodes().reshape(shape))
        return out

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.data) ** 2) * self.cell_volume))


def mesh_points(axes: Sequence[AxisSpec]) -> np.ndarray:
    """All grid nodes as an (N_total, n) array, C-order."""
    grids = np.meshgrid(*[a.nodes() for a in axes], indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


# -- transforms ---------------------------------------------------------------

def _require_pow2(n: int) -> None:
    if n & (n - 1):
        raise ValueError(f"transform axes need a power-of-two point count, got {n}")


def ft_axis(data: np.ndarray, axis_spec: AxisSpec, h: float, axis: int,
            inverse: bool = False, out_axis: AxisSpec | None = None
            ) -> tuple[np.ndarray, AxisSpec]:
    """h-scaled Fourier transform along one axis of an ndarray.

    Forward maps a position axis onto its (centered) dual frequency axis;
    inverse maps a frequency axis onto ``out_axis`` (default: centered dual).
    The FFT carries explicit boundary phases so arbitrary axis offsets are
    exact, and inverse(forward) cancels to rounding.
    """
    n = axis_spec.points
    _require_pow2(n)
    dual = out_axis if out_axis is not None else dual_axis(axis_spec, h)
    if dual.points != n:
        raise DimensionMismatchError("dual axis point count mismatch")
    shape = [1] * data.ndim
    shape[axis] = n
    ar = np.arange(n)
    if not inverse:
        x0 = axis_spec.start + 0.5 * axis_spec.spacing
        pre = np.exp(-1j * (ar * axis_spec.spacing) * (dual.start + 0.5 * dual.spacing) / h)
        post = np.exp(-1j * x0 * dual.nodes() / h) * (
            axis_spec.spacing / np.sqrt(_TWO_PI * h))
        out = np.fft.fft(data * pre.reshape(shape), axis=axis) * post.reshape(shape)
    else:
        xi0 = axis_spec.start + 0.5 * axis_spec.spacing
        x0 = dual.start + 0.5 * dual.spacing
        pre = np.exp(1j * x0 * (ar * axis_spec.spacing) / h)
        post = np.exp(1j * dual.nodes() * xi0 / h) * (
            n * axis_spec.spacing / np.sqrt(_TWO_PI * h))
        out = np.fft.ifft(data * pre.reshape(shape), axis=axis) * post.reshape(shape)
    return out, dual


def semiclassical_ft(f: GridField, direction: str,
                     out_axes: Sequence[AxisSpec] | None = None) -> GridField:
    """Discrete h-scaled Fourier transform of a full field (all axes).

    FORWARD requires a POSITION field and produces the FREQUENCY field on
    the dual grid; INVERSE is the exact algebraic inverse (pass out_axes to
    land on a specific position grid, e.g. for round trips).
    """
    if direction == FORWARD:
        if f.space != POSITION:
            raise ValueError("FORWARD transform expects a POSITION field")
    elif direction == INVERSE:
        if f.space != FREQUENCY:
            raise ValueError("INVERSE transform expects a FREQUENCY field")
    else:
        raise ValueError(f"unknown direction {direction!r}")
    data = f.data
    new_axes: list[AxisSpec] = []
    for i, ax in enumerate(f.axes):
        target = out_axes[i] if out_axes is not None else None
        data, dual = ft_axis(data, ax, f.h, i, inverse=direction == INVERSE,
                             out_axis=target)
        new_axes.append(dual)
    return GridField(f.h, FREQUENCY if direction == FORWARD else POSITION,
                     new_axes, data)


def apply_multiplier(f: GridField, m: PolySymbol | Callable) -> GridField:
    """Apply the frequency multiplier m(xi), i.e. the operator m(hD).

    A FREQUENCY field is multiplied pointwise; a POSITION field is
    transformed, multiplied, and brought back onto its own axes.
    """
    if f.space == POSITION:
        hat = semiclassical_ft(f, FORWARD)
        hat = apply_multiplier(hat, m)
        return semiclassical_ft(hat, INVERSE, out_axes=f.axes)
    coords = f.node_arrays()
    if isinstance(m, PolySymbol):
        if m.dim != f.dim:
            raise DimensionMismatchError(
                f"multiplier dim {m.dim} vs field dim {f.dim}")
        values = m.eval_grid(coords)
    else:
        values = m(*coords)
    return GridField(f.h, FREQUENCY, list(f.axes), f.data * values)


# -- direct nonuniform synthesis ----------------------------------------------

def nufft_direct(points: np.ndarray, weights: np.ndarray, h: float,
                 targets: np.ndarray, chunk: int = 1 << 21) -> np.ndarray:
    """sum_s weights[s] * exp(i <x, points[s]> / h) for each target x.

    Deterministic reduction order (fixed chunking, numpy pairwise sums).
    """
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if targets.shape[1] != points.shape[1]:
        raise DimensionMismatchError("targets and points disagree on dimension")
    ns = points.shape[0]
    out = np.empty(targets.shape[0], dtype=complex)
    rows = max(1, chunk // max(ns, 1))
    for lo in range(0, targets.shape[0], rows):
        tt = targets[lo:lo + rows]
        phase = tt[:, 0:1] * points[None, :, 0] if points.shape[1] == 1 else None
        if phase is None:
            phase = np.zeros((tt.shape[0], ns))
            for d in range(points.shape[1]):
                phase += tt[:, d:d + 1] * points[None, :, d]
        out[lo:lo + rows] = np.sum(np.exp(1j * phase / h) * weights[None, :], axis=1)
    return out


def direct_synthesis(cutoff_field: GridField, targets) -> np.ndarray:
    """Quadrature of (2*pi*h)^(-n/2) * integral exp(i<x,xi>/h) chi(xi) dxi.

    Sums over the nonzero cells of a FREQUENCY field at each target point;
    the midpoint rule in xi keeps this the exact discrete counterpart of
    the FFT inverse on shared nodes.
    """
    if cutoff_field.space != FREQUENCY:
        raise ValueError("direct_synthesis expects a FREQUENCY field")
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    if targets.size == 0:
        raise ValueError("empty target list")
    idx = np.nonzero(cutoff_field.data)
    nodes = [ax.nodes() for ax in cutoff_field.axes]
    points = np.stack([nodes[d][idx[d]] for d in range(cutoff_field.dim)], axis=-1)
    weights = cutoff_field.data[idx] * cutoff_field.cell_volume
    scale = (_TWO_PI * cutoff_field.h) ** (-cutoff_field.dim / 2)
    return scale * nufft_direct(points, weights, cutoff_field.h, targets)


# -- serialization --------------------------------------------------------------

_MAGIC = b"QLGF"
_VERSION = 1


def write_gridfield(path, f: GridField) -> None:
    """Binary container: little-endian header + interleaved re/im float64."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, f.dim))
        fh.write(struct.pack("<B", 0 if f.space == POSITION else 1))
        fh.write(struct.pack("<d", f.h))
        for a in f.axes:
            fh.write(struct.pack("<ddQ", a.center, a.half_width, a.points))
        inter = np.empty(f.data.size * 2, dtype="<f8")
        flat = f.data.ravel()
        inter[0::2] = flat.real
        inter[1::2] = flat.imag
        fh.write(inter.tobytes())


def read_gridfield(path) -> GridField:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError("not a GridField container")
        version, dim = struct.unpack("<II", fh.read(8))
        if version != _VERSION:
            raise ValueError(f"unsupported container version {version}")
        space = POSITION if struct.unpack("<B", fh.read(1))[0] == 0 else FREQUENCY
        h = struct.unpack("<d", fh.read(8))[0]
        axes = []
        for _ in range(dim):
            c, hw, n = struct.unpack("<ddQ", fh.read(24))
            axes.append(AxisSpec(c, hw, int(n)))
        count = int(np.prod([a.points for a in axes]))
        inter = np.frombuffer(fh.read(count * 16), dtype="<f8")
        data = (inter[0::2] + 1j * inter[1::2]).reshape([a.points for a in axes])
    return GridField(h, space, axes, data.copy())


def gridfield_to_csv(path, f: GridField) -> None:
    """Plain CSV (x1..xn, re, im) for small fields."""
    pts = mesh_points(f.axes)
    flat = f.data.ravel()
    with open(path, "w") as fh:
        fh.write(",".join(f"x{i+1}" for i in range(f.dim)) + ",re,im\n")
        for row, val in zip(pts, flat):
            coords = ",".join("%.17g" % c for c in row)
            fh.write(f"{coords},{'%.17g' % val.real},{'%.17g' % val.imag}\n")
