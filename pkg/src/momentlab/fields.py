"""Nonnegative test functions on voxel grids, and the sharpness-example sets.

Voxel i along an axis covers [lo + i*h, lo + (i+1)*h); a field is read as the
piecewise-constant function with those cells, and zero outside its box.
Indicator sets mark a voxel when its center is within the radius of a curve.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .curves import MomentCurve, gamma_tail, tube_membership_rows, vertical_constant, within_tube
from .errors import InvalidExponent, InvalidInput, ResolutionError

GRID_BUDGET = 2 * 10**8
I1 = (-0.25, 0.25)
I2 = (0.5, 2.0)


@dataclass(frozen=True)
class Grid:
    lo: tuple
    spacing: tuple
    shape: tuple

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "spacing", tuple(float(v) for v in self.spacing))
        object.__setattr__(self, "shape", tuple(int(v) for v in self.shape))
        if not (len(self.lo) == len(self.spacing) == len(self.shape)):
            raise InvalidInput("grid lo, spacing and shape must have equal length")
        if min(self.spacing) <= 0 or min(self.shape) <= 0:
            raise InvalidInput("grid spacing and shape must be positive")

    @classmethod
    def from_box(cls, lo, hi, spacing=None, shape=None, align: bool = False) -> "Grid":
        """Grid over [lo, hi]. With a spacing the box is grown to whole voxels;
        align=True also snaps lo down to a multiple of the spacing."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if np.any(hi <= lo):
            raise InvalidInput("empty box")
        if (spacing is None) == (shape is None):
            raise InvalidInput("give exactly one of spacing and shape")
        if shape is not None:
            shape = np.broadcast_to(np.asarray(shape, dtype=int), lo.shape)
            return cls(lo, (hi - lo) / shape, shape)
        h = np.broadcast_to(np.asarray(spacing, dtype=float), lo.shape)
        if align:
            lo = np.floor(lo / h + 1e-9) * h
        shape = np.ceil((hi - lo) / h - 1e-9).astype(int)
        return cls(lo, h, shape)

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64))

    @property
    def h(self) -> np.ndarray:
        return np.asarray(self.spacing)

    @property
    def lo_arr(self) -> np.ndarray:
        return np.asarray(self.lo)

    @property
    def hi(self) -> np.ndarray:
        return self.lo_arr + self.h * np.asarray(self.shape)

    @property
    def voxel_volume(self) -> float:
        return float(np.prod(self.spacing))

    def centers(self, axis: int) -> np.ndarray:
        return self.lo[axis] + (np.arange(self.shape[axis]) + 0.5) * self.spacing[axis]

    def coords_of(self, points) -> np.ndarray:
        return np.floor((np.asarray(points, dtype=float) - self.lo_arr) / self.h).astype(np.int64)

    def flat_of(self, coords) -> tuple[np.ndarray, np.ndarray]:
        """(flat index, inside mask); flat index is 0 where outside."""
        coords = np.asarray(coords)
        inside = np.all((coords >= 0) & (coords < np.asarray(self.shape)), axis=-1)
        safe = np.where(inside[..., None], coords, 0)
        return np.ravel_multi_index(tuple(np.moveaxis(safe, -1, 0)), self.shape), inside

    def voxel_centers(self, flat) -> np.ndarray:
        coords = np.stack(np.unravel_index(np.asarray(flat), self.shape), axis=-1)
        return self.lo_arr + (coords + 0.5) * self.h

    def check_resolution(self, delta: float):
        if max(self.spacing) > delta / 2 * (1 + 1e-9):
            raise ResolutionError(
                f"grid spacing {max(self.spacing):.4g} exceeds delta/2 = {delta / 2:.4g}")


class _Field:
    grid: Grid

    @property
    def dim(self) -> int:
        return self.grid.dim

    def lookup(self, points) -> np.ndarray:
        raise NotImplementedError

    def nonzero(self) -> tuple[np.ndarray, np.ndarray]:
        """(flat indices, values) of the positive voxels, flat indices sorted."""
        raise NotImplementedError

    def max(self) -> float:
        _, v = self.nonzero()
        return float(v.max()) if v.size else 0.0


@dataclass(frozen=True, eq=False)
class ScalarField(_Field):
    """Dense field; ``values`` has shape grid.shape (uint8 is fine for indicators)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        if tuple(self.values.shape) != self.grid.shape:
            raise InvalidInput(f"values shape {self.values.shape} does not match grid {self.grid.shape}")
        if self.values.dtype.kind == "f" and (np.any(self.values < 0) or not np.all(np.isfinite(self.values))):
            raise InvalidInput("field values must be finite and nonnegative")
        self.values.setflags(write=False)

    def lookup(self, points) -> np.ndarray:
        flat, inside = self.grid.flat_of(self.grid.coords_of(points))
        return np.where(inside, self.values.reshape(-1)[flat], 0).astype(float)

    def nonzero(self):
        flat = np.flatnonzero(self.values)
        return flat, self.values.reshape(-1)[flat].astype(float)

    def to_sparse(self) -> "SparseField":
        flat, vals = self.nonzero()
        return SparseField(self.grid, flat, vals)


@dataclass(frozen=True, eq=False)
class SparseField(_Field):
    """Coordinate-list field: sorted flat voxel indices with their positive values."""

    grid: Grid
    flat: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        flat = np.asarray(self.flat, dtype=np.int64)
        vals = np.asarray(self.values, dtype=float)
        if flat.shape != vals.shape:
            raise InvalidInput("flat indices and values differ in length")
        if flat.size > 1 and np.any(np.diff(flat) <= 0):
            order = np.argsort(flat, kind="stable")
            flat, vals = flat[order], vals[order]
            if np.any(np.diff(flat) == 0):
                raise InvalidInput("duplicate voxel indices")
        if np.any(vals < 0):
            raise InvalidInput("field values must be nonnegative")
        flat.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "flat", flat)
        object.__setattr__(self, "values", vals)

    def lookup(self, points) -> np.ndarray:
        flat, inside = self.grid.flat_of(self.grid.coords_of(points))
        if self.flat.size == 0:
            return np.zeros(inside.shape)
        pos = np.minimum(np.searchsorted(self.flat, flat), self.flat.size - 1)
        hit = inside & (self.flat[pos] == flat)
        return np.where(hit, self.values[pos], 0.0)

    def nonzero(self):
        return self.flat, self.values

    def to_dense(self) -> ScalarField:
        if self.grid.size > GRID_BUDGET:
            raise ResolutionError("grid exceeds the dense voxel budget")
        v = np.zeros(self.grid.size)
        v[self.flat] = self.values
        return ScalarField(self.grid, v.reshape(self.grid.shape))


def field_lp_norm(f: _Field, p: float) -> float:
    if not p >= 1:
        raise InvalidExponent(f"p must be >= 1, got {p}")
    _, v = f.nonzero()
    if math.isinf(p):
        return float(v.max()) if v.size else 0.0
    return float((np.sum(v**p) * f.grid.voxel_volume) ** (1.0 / p))


def constant_field(grid: Grid, value: float = 1.0) -> ScalarField:
    return ScalarField(grid, np.full(grid.shape, float(value)))


# -- rasterization -------------------------------------------------------------


def _curve_cells(c: MomentCurve, rho: float, grid: Grid, block: int = 2**21) -> np.ndarray:
    """Integer voxel coordinates (N, d) whose centers lie within rho of c.

    Only the first axis is clipped to the grid; the others may run outside it so
    callers can translate the cells before clipping.
    """
    d, r = c.dim, c.scale
    h = grid.h
    lo = grid.lo_arr
    X = grid.centers(0)
    u = (X - c.center[0]) / r
    slices = np.flatnonzero(np.abs(u) <= 1.0 + rho / r)
    if slices.size == 0:
        return np.zeros((0, d), dtype=np.int64)
    cmax = vertical_constant(d, min(np.abs(u[slices]).max(), 1.0) + rho / r) * rho
    K = np.ceil(cmax / h[1:]).astype(int) + 1
    offs = np.stack(np.meshgrid(*[np.arange(-k, k + 1) for k in K], indexing="ij"), axis=-1).reshape(-1, d - 1)
    per = max(1, block // len(offs))
    out = []
    for s0 in range(0, slices.size, per):
        sl = slices[s0:s0 + per]
        us = u[sl]
        vc = c.points(us)[:, 1:]
        j0 = np.floor((vc - lo[1:]) / h[1:]).astype(np.int64)
        cand = j0[:, None, :] + offs[None, :, :]
        pts_t = lo[1:] + (cand + 0.5) * h[1:]
        v2 = ((pts_t - vc[:, None, :]) ** 2).sum(axis=-1)
        cl = vertical_constant(d, np.abs(us) + rho / r) * rho
        keep = v2 <= (cl[:, None] ** 2) * (1 + 1e-12)
        si, oi = np.nonzero(keep)
        pts = np.empty((si.size, d))
        pts[:, 0] = X[sl[si]]
        pts[:, 1:] = pts_t[si, oi]
        m = within_tube(pts, c, rho)
        coords = np.empty((int(m.sum()), d), dtype=np.int64)
        coords[:, 0] = sl[si[m]]
        coords[:, 1:] = cand[si[m], oi[m]]
        out.append(coords)
    return np.concatenate(out) if out else np.zeros((0, d), dtype=np.int64)


def _clip_flat(coords: np.ndarray, grid: Grid) -> np.ndarray:
    flat, inside = grid.flat_of(coords)
    return flat[inside]


def _emit(grid: Grid, flat_chunks, sparse: bool):
    if sparse:
        flat = np.unique(np.concatenate(flat_chunks)) if flat_chunks else np.zeros(0, np.int64)
        return SparseField(grid, flat, np.ones(flat.size))
    if grid.size > GRID_BUDGET:
        raise ResolutionError(f"{grid.size} voxels exceed the dense budget {GRID_BUDGET}; use sparse=True")
    v = np.zeros(grid.size, dtype=np.uint8)
    for fl in flat_chunks:
        v[fl] = 1
    return ScalarField(grid, v.reshape(grid.shape))


def _default_spacing(delta: float) -> float:
    return delta / 2


def tube_indicator_field(c: MomentCurve, delta: float, box=None, shape=None, spacing=None,
                         sparse: bool = False) -> _Field:
    """1 on voxels whose center is within delta of c, else 0."""
    if box is None:
        from .tubes import bounding_box

        blo, bhi = bounding_box(c, delta)
        h = spacing if spacing is not None else _default_spacing(delta)
        grid = Grid.from_box(blo - h, bhi + h, spacing=h, align=True)
    else:
        if shape is None and spacing is None:
            spacing = _default_spacing(delta)
        grid = Grid.from_box(box[0], box[1], spacing=spacing, shape=shape)
    grid.check_resolution(delta)
    return _emit(grid, [_clip_flat(_curve_cells(c, delta, grid), grid)], sparse)


def parameter_net(s_prime: int, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """delta-spaced net of I1^(s'-1) (as an array of tails) and of I2."""
    n1 = int(round((I1[1] - I1[0]) / delta))
    n2 = int(round((I2[1] - I2[0]) / delta))
    t1 = I1[0] + (I1[1] - I1[0]) * np.arange(n1 + 1) / n1
    rs = I2[0] + (I2[1] - I2[0]) * np.arange(n2 + 1) / n2
    if s_prime == 1:
        tails = np.zeros((1, 0))
    else:
        tails = np.stack(np.meshgrid(*[t1] * (s_prime - 1), indexing="ij"), axis=-1).reshape(-1, s_prime - 1)
    return tails, rs


def union_set_box(s_prime: int, d: int, pad: float) -> tuple[np.ndarray, np.ndarray]:
    i = np.arange(1, d + 1)
    lo = np.where(i % 2 == 1, -I2[1], 0.0)
    hi = np.full(d, I2[1])
    s = d + 1 - s_prime
    lo[s:] += I1[0]
    hi[s:] += I1[1]
    return lo - pad, hi + pad


def union_set_field(s_prime: int, delta: float, d: int = 3, box=None, shape=None, spacing=None,
                    inflation: Optional[float] = None, sparse: bool = False) -> _Field:
    """Indicator of the union of rho-tubes, rho = inflation * delta, around the curves
    H((0, x_tail), r) for (x_tail, r) on a delta-net of I1^(s'-1) x I2.

    The first s = d + 1 - s' center coordinates are zero. Default inflation is 10 d.
    """
    if not (1 <= s_prime <= d):
        raise InvalidInput(f"need 1 <= s' <= d, got s'={s_prime}, d={d}")
    rho = (10 * d if inflation is None else inflation) * delta
    s = d + 1 - s_prime
    h = spacing if spacing is not None else _default_spacing(delta)
    if box is None:
        blo, bhi = union_set_box(s_prime, d, rho + h)
        grid = Grid.from_box(blo, bhi, spacing=h, align=True)
    else:
        grid = Grid.from_box(box[0], box[1], spacing=spacing if shape is None else None, shape=shape)
    grid.check_resolution(delta)
    if not sparse and grid.size > GRID_BUDGET:
        raise ResolutionError(f"{grid.size} voxels exceed the dense budget {GRID_BUDGET}; use sparse=True")
    tails, rs = parameter_net(s_prime, delta)
    # tail translations are whole voxels when the grid is aligned with the net
    shift = tails / grid.h[s:] if tails.shape[1] else tails
    base_tail = np.zeros(s_prime - 1)
    lattice = tails.shape[1] == 0 or np.allclose(shift, np.round(shift), atol=1e-9)
    shift = np.round(shift).astype(np.int64)

    def cells_for(r, tail):
        return _curve_cells(MomentCurve(np.concatenate([np.zeros(s), tail]), r), rho, grid)

    if lattice:
        base = [cells_for(r, base_tail) for r in rs]
    else:
        base = None

    if not sparse:
        v = np.zeros(grid.size, dtype=np.uint8)
        for k, r in enumerate(rs):
            if lattice:
                for sh in shift:
                    cc = base[k].copy()
                    cc[:, s:] += sh
                    v[_clip_flat(cc, grid)] = 1
            else:
                for tail in tails:
                    v[_clip_flat(cells_for(r, tail), grid)] = 1
        return ScalarField(grid, v.reshape(grid.shape))

    # sparse: assemble slab by slab along the first axis, which translations never move
    if not lattice:
        chunks = [_clip_flat(cells_for(r, tail), grid) for r in rs for tail in tails]
        return _emit(grid, chunks, True)
    slab_vox = max(1, GRID_BUDGET // 4 // max(1, grid.size // grid.shape[0]))
    order = [np.argsort(b[:, 0], kind="stable") for b in base]
    base = [b[o] for b, o in zip(base, order)]
    out = []
    for a0 in range(0, grid.shape[0], slab_vox):
        a1 = min(grid.shape[0], a0 + slab_vox)
        sub = Grid(grid.lo, grid.spacing, (a1 - a0,) + grid.shape[1:])
        v = np.zeros(sub.size, dtype=bool)
        for b in base:
            i0, i1 = np.searchsorted(b[:, 0], [a0, a1])
            if i0 == i1:
                continue
            part = b[i0:i1].copy()
            part[:, 0] -= a0
            for sh in shift:
                cc = part.copy()
                cc[:, s:] += sh
                v[_clip_flat(cc, sub)] = True
        out.append(np.flatnonzero(v) + a0 * (grid.size // grid.shape[0]))
    flat = np.concatenate(out)
    return SparseField(grid, flat, np.ones(flat.size))


def union_membership(points, s_prime: int, delta: float, d: int = 3,
                     inflation: Optional[float] = None, chunk: int = 2**15) -> np.ndarray:
    """Exact test of y in the union of rho-tubes used by union_set_field, without voxels.

    For each net scale r the first coordinate fixes the parameter u = y_1 / r and
    the vertical offset w = y~ - r gamma~(u); the tail translations only move w
    inside a product lattice, whose nearest point is found coordinate-wise. An
    offset <= rho over the arc accepts, an offset > vertical_constant * rho rejects
    for every lattice point, and the remaining (y, r) pairs are settled by exact
    distance checks against every lattice tail within reach.
    """
    Y = np.atleast_2d(np.asarray(points, dtype=float))
    rho = (10 * d if inflation is None else inflation) * delta
    s = d + 1 - s_prime
    tails, rs = parameter_net(s_prime, delta)
    t1 = np.unique(tails[:, 0]) if tails.shape[1] else np.zeros(0)
    n1 = t1.size
    step = t1[1] - t1[0] if n1 > 1 else 1.0
    cmax = vertical_constant(d, 1.0 + 2.0 * rho / rs.min())
    K = int(math.ceil(cmax * rho / step)) if n1 else 0
    offs = (np.stack(np.meshgrid(*[np.arange(-K, K + 1)] * (s_prime - 1), indexing="ij"), axis=-1)
            .reshape(-1, s_prime - 1) if s_prime > 1 else np.zeros((1, 0), dtype=int))
    out = np.zeros(Y.shape[0], dtype=bool)
    for c0 in range(0, Y.shape[0], chunk):
        y = Y[c0:c0 + chunk]
        m = y.shape[0]
        sure = np.zeros(m, dtype=bool)
        poss = np.zeros((m, rs.size), dtype=bool)
        near = np.zeros((m, rs.size, s_prime - 1), dtype=np.int64)
        for k, r in enumerate(rs):
            u = y[:, 0] / r
            ok = np.abs(u) <= 1.0 + rho / r
            w = y[:, 1:] - r * gamma_tail(u, d)
            d2 = (w[:, :s - 1] ** 2).sum(axis=1)
            if n1:
                q = np.clip(np.round((w[:, s - 1:] - t1[0]) / step), 0, n1 - 1).astype(np.int64)
                near[:, k] = q
                d2 = d2 + ((w[:, s - 1:] - t1[q]) ** 2).sum(axis=1)
            sure |= ok & (np.abs(u) <= 1.0) & (d2 <= rho * rho)
            cl = vertical_constant(d, np.abs(u) + rho / r) * rho
            poss[:, k] = ok & (d2 <= cl * cl * (1 + 1e-12))
        poss[sure] = False
        rows, ks = np.nonzero(poss)
        if rows.size:
            hit = np.zeros(m, dtype=bool)
            per = max(1, 2**20 // len(offs))
            for p0 in range(0, rows.size, per):
                rr, kk = rows[p0:p0 + per], ks[p0:p0 + per]
                live = ~hit[rr]
                rr, kk = rr[live], kk[live]
                if rr.size == 0:
                    continue
                idx = np.clip(near[rr, kk][:, None, :] + offs[None], 0, max(n1 - 1, 0))
                R = np.repeat(rs[kk], len(offs))
                X = np.zeros((R.size, d))
                if n1:
                    X[:, s:] = t1[idx].reshape(-1, s_prime - 1)
                P = np.repeat(y[rr], len(offs), axis=0)
                mem = tube_membership_rows(P, X, R, rho).reshape(rr.size, len(offs)).any(axis=1)
                hit[rr[mem]] = True
            sure |= hit
        out[c0:c0 + chunk] = sure
    return out


def union_set_mass(s_prime: int, delta: float, d: int = 3, inflation: Optional[float] = None,
                   n: int = 2 * 10**5, seed: int = 0, workers: int = 1):
    """Monte Carlo volume of the union_set_field set, using union_membership.

    Uniform samples over the padded bounding box; the same underlying uniforms are
    reused for every delta (common random numbers), which steadies ladder slopes.
    """
    from .sampling import map_chunks
    from .tubes import BOX, _finish

    rho = (10 * d if inflation is None else inflation) * delta
    lo, hi = union_set_box(s_prime, d, rho)
    vol = float(np.prod(hi - lo))

    def work(rng, size):
        y = lo + (hi - lo) * rng.random((size, d))
        k = int(union_membership(y, s_prime, delta, d, inflation).sum())
        return [vol * k, vol * vol * k, k, vol * size]

    totals = map_chunks(work, n, seed, f"union-mass-{s_prime}-{d}", workers).sum(axis=0)
    return _finish(totals, n, BOX)


def focusing_field(delta: float, d: int = 3, box=None, shape=None, spacing=None,
                   c_f: float = 10.0, sparse: bool = False) -> _Field:
    """Indicator of H_delta(0, 1) restricted to the ball of radius c_f * sqrt(delta)."""
    radius = c_f * math.sqrt(delta)
    h = spacing if spacing is not None else _default_spacing(delta)
    if box is None:
        ext = min(radius, 1.0) + delta + h
        grid = Grid.from_box(np.full(d, -ext), np.full(d, ext), spacing=h, align=True)
    else:
        grid = Grid.from_box(box[0], box[1], spacing=spacing if shape is None else None, shape=shape)
    grid.check_resolution(delta)
    cells = _curve_cells(MomentCurve.unit(d), delta, grid)
    flat = _clip_flat(cells, grid)
    ctr = grid.voxel_centers(flat)
    flat = flat[np.einsum("ij,ij->i", ctr, ctr) <= radius * radius]
    return _emit(grid, [flat], sparse)


def segment_field(grid: Grid, a, b, radius: float) -> ScalarField:
    """Voxels whose center is within radius of the segment [a, b] (a box-counting control)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ab = b - a
    axes = [grid.centers(k) for k in range(grid.dim)]
    rest = np.stack(np.meshgrid(*axes[1:], indexing="ij"), axis=-1).reshape(-1, grid.dim - 1)
    out = np.zeros(grid.shape, dtype=np.uint8)
    # one slab along the first axis at a time keeps memory at a single slice
    for i, x0 in enumerate(axes[0]):
        pts = np.concatenate([np.full((rest.shape[0], 1), x0), rest], axis=1)
        t = np.clip(((pts - a) @ ab) / (ab @ ab), 0, 1)
        dist = np.linalg.norm(pts - (a + t[:, None] * ab), axis=-1)
        out[i] = (dist <= radius).reshape(grid.shape[1:])
    return ScalarField(grid, out)


# -- serialization ---------------------------------------------------------------

def save_field(f: _Field, path) -> None:
    """Flat little-endian layout: int64 d, int64 shape[d], float64 lo[d],
    float64 hi[d], float64 spacing[d], then float64 values in row-major order."""
    dense = f if isinstance(f, ScalarField) else f.to_dense()
    g = dense.grid
    with open(path, "wb") as fh:
        fh.write(struct.pack("<q", g.dim))
        fh.write(struct.pack(f"<{g.dim}q", *g.shape))
        fh.write(struct.pack(f"<{g.dim}d", *g.lo))
        fh.write(struct.pack(f"<{g.dim}d", *g.hi))
        fh.write(struct.pack(f"<{g.dim}d", *g.spacing))
        fh.write(np.ascontiguousarray(dense.values, dtype="<f8").tobytes())


def load_field(path) -> ScalarField:
    data = Path(path).read_bytes()
    (d,) = struct.unpack_from("<q", data, 0)
    off = 8
    shape = struct.unpack_from(f"<{d}q", data, off)
    off += 8 * d
    lo = struct.unpack_from(f"<{d}d", data, off)
    off += 16 * d  # lo and hi; hi is implied by lo, spacing and shape
    spacing = struct.unpack_from(f"<{d}d", data, off)
    off += 8 * d
    values = np.frombuffer(data, dtype="<f8", offset=off).reshape(shape).astype(float)
    return ScalarField(Grid(lo, spacing, shape), values)
