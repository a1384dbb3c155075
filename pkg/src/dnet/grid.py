"""Box domains in Z^N.

A :class:`Grid` enumerates the vertices, oriented edges and oriented
quadrilaterals of an axis-aligned box ``[0, d0) x ... x [0, d_{N-1})``.
Such domains (and their one-level stacks ``{0,1} x Sigma``) are simply
connected by construction, which is what makes the two integration
routines in this module (:func:`integrate_one_form`,
:func:`trivialize_connection`) well defined.

Conventions
-----------
* Vertices are indexed row-major; ``strides[a]`` is the index step of a
  unit move along axis ``a``.
* Edges are keyed ``(tail vertex, axis)`` and stored on the canonical
  orientation tail -> tail + e_a.
* Quads are keyed ``(corner vertex, axis pair (a, b) with a < b)``; the
  canonical cyclic order of a quad is ``(i, j, k, l)`` with
  ``j = i + e_a``, ``k = i + e_a + e_b``, ``l = i + e_b``.

Grids and their cached enumerations are immutable after construction,
so instances can be shared freely between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ClosednessError, FlatnessError


@dataclass(frozen=True)
class OrientedEdge:
    """Oriented edge from ``tail`` to ``head`` along ``axis``.

    ``index`` is the canonical storage slot; ``sign`` is +1 when the
    orientation agrees with the stored (canonical) one.
    """

    tail: int
    head: int
    axis: int
    index: int
    sign: int = 1

    def reversed(self) -> "OrientedEdge":
        return OrientedEdge(self.head, self.tail, self.axis, self.index, -self.sign)


@dataclass(frozen=True)
class OrientedQuad:
    """Oriented quadrilateral with cyclically ordered vertices.

    ``vertices`` is the cycle ``(i, j, k, l)``; rotating it denotes the
    same oriented quad, reversing to ``(i, l, k, j)`` flips the sign.
    """

    vertices: tuple
    axes: tuple
    index: int
    sign: int = 1

    def reversed(self) -> "OrientedQuad":
        i, j, k, l = self.vertices
        return OrientedQuad((i, l, k, j), self.axes, self.index, -self.sign)

    def rotated(self, steps: int = 1) -> "OrientedQuad":
        v = self.vertices
        s = steps % 4
        return OrientedQuad(v[s:] + v[:s], self.axes, self.index, self.sign)

    def same_oriented(self, other: "OrientedQuad") -> bool:
        """True when the two quads agree up to cyclic rotation."""
        if set(self.vertices) != set(other.vertices):
            return False
        for s in range(4):
            if self.rotated(s).vertices == other.vertices:
                return True
        return False


class Grid:
    """Axis-aligned box domain in Z^N."""

    def __init__(self, dims, stacked: bool = False):
        dims = tuple(int(d) for d in dims)
        if not dims:
            raise ValueError("dims must be nonempty")
        if any(d < 1 for d in dims):
            raise ValueError(f"all extents must be >= 1, got {dims}")
        if stacked and dims[0] != 2:
            raise ValueError("a stacked grid must have extent 2 along axis 0")
        self.dims = dims
        self.stacked = bool(stacked)
        self.ndim = len(dims)
        self.nverts = math.prod(dims)

        strides = np.ones(self.ndim, dtype=int)
        for a in range(self.ndim - 2, -1, -1):
            strides[a] = strides[a + 1] * dims[a + 1]
        self.strides = strides

        self.vertex_coords = np.indices(dims).reshape(self.ndim, -1).T
        self.vertex_coords.setflags(write=False)

        # Canonical edges, grouped by axis.
        tails, axes = [], []
        for a in range(self.ndim):
            mask = self.vertex_coords[:, a] < dims[a] - 1
            idx = np.nonzero(mask)[0]
            tails.append(idx)
            axes.append(np.full(len(idx), a, dtype=int))
        self.edge_tail = np.concatenate(tails) if tails else np.zeros(0, int)
        self.edge_axis = np.concatenate(axes) if axes else np.zeros(0, int)
        self.edge_head = self.edge_tail + strides[self.edge_axis]
        self.nedges = len(self.edge_tail)
        self._edge_slot = {
            (int(t), int(a)): e
            for e, (t, a) in enumerate(zip(self.edge_tail, self.edge_axis))
        }

        # Canonical quads, grouped by axis pair (a, b), a < b.
        corners, qaxes = [], []
        for a in range(self.ndim):
            for b in range(a + 1, self.ndim):
                mask = (self.vertex_coords[:, a] < dims[a] - 1) & (
                    self.vertex_coords[:, b] < dims[b] - 1
                )
                idx = np.nonzero(mask)[0]
                corners.append(idx)
                qaxes.append(np.tile([a, b], (len(idx), 1)))
        if corners:
            self.quad_corner = np.concatenate(corners)
            self.quad_axes = np.concatenate(qaxes, axis=0)
        else:
            self.quad_corner = np.zeros(0, int)
            self.quad_axes = np.zeros((0, 2), int)
        self.nquads = len(self.quad_corner)

        sa = strides[self.quad_axes[:, 0]] if self.nquads else np.zeros(0, int)
        sb = strides[self.quad_axes[:, 1]] if self.nquads else np.zeros(0, int)
        i = self.quad_corner
        self.quad_vertices = np.stack([i, i + sa, i + sa + sb, i + sb], axis=1)
        # Boundary edges in canonical slots: bottom (i,a), right (j,b),
        # top (l,a), left (i,b).  The oriented boundary of (i,j,k,l) is
        # bottom + right - top - left.
        self.quad_edges = np.zeros((self.nquads, 4), dtype=int)
        for n in range(self.nquads):
            a, b = self.quad_axes[n]
            vi, vj, _, vl = self.quad_vertices[n]
            self.quad_edges[n] = (
                self._edge_slot[(int(vi), int(a))],
                self._edge_slot[(int(vj), int(b))],
                self._edge_slot[(int(vl), int(a))],
                self._edge_slot[(int(vi), int(b))],
            )
        for arr in (self.edge_tail, self.edge_head, self.edge_axis,
                    self.quad_corner, self.quad_axes, self.quad_vertices,
                    self.quad_edges):
            arr.setflags(write=False)

        self._trees: dict = {}

    # -- bookkeeping -------------------------------------------------

    def __repr__(self):
        tag = ", stacked" if self.stacked else ""
        return f"Grid({list(self.dims)}{tag})"

    def vertex_index(self, coords) -> int:
        coords = tuple(int(c) for c in coords)
        if len(coords) != self.ndim:
            raise ValueError("coordinate length mismatch")
        for c, d in zip(coords, self.dims):
            if not 0 <= c < d:
                raise ValueError(f"vertex {coords} outside dims {self.dims}")
        return int(np.dot(coords, self.strides))

    def coords(self, vertex: int):
        return tuple(int(c) for c in self.vertex_coords[vertex])

    def edge_slot(self, tail: int, axis: int) -> int:
        return self._edge_slot[(int(tail), int(axis))]

    def oriented_edge(self, tail: int, head: int) -> OrientedEdge:
        """The oriented edge from ``tail`` to ``head`` (must be adjacent)."""
        diff = head - tail
        for a in range(self.ndim):
            if diff == self.strides[a]:
                return OrientedEdge(tail, head, a, self._edge_slot[(tail, a)], 1)
            if diff == -self.strides[a]:
                return OrientedEdge(tail, head, a, self._edge_slot[(head, a)], -1)
        raise ValueError(f"vertices {tail}, {head} are not adjacent")

    def edges(self):
        """Canonical oriented edges, one per unoriented edge."""
        return [
            OrientedEdge(int(t), int(h), int(a), e, 1)
            for e, (t, h, a) in enumerate(
                zip(self.edge_tail, self.edge_head, self.edge_axis)
            )
        ]

    def quads(self):
        """Canonical oriented quads, one per unoriented quad."""
        return [
            OrientedQuad(tuple(int(v) for v in self.quad_vertices[n]),
                         tuple(int(a) for a in self.quad_axes[n]), n, 1)
            for n in range(self.nquads)
        ]

    def counts(self):
        return self.nverts, self.nedges, self.nquads

    def locate_edge(self, e: int) -> dict:
        return {
            "kind": "edge",
            "index": int(e),
            "tail": self.coords(int(self.edge_tail[e])),
            "axis": int(self.edge_axis[e]),
        }

    def locate_quad(self, q: int) -> dict:
        return {
            "kind": "quad",
            "index": int(q),
            "corner": self.coords(int(self.quad_corner[q])),
            "axes": tuple(int(a) for a in self.quad_axes[q]),
        }

    # -- staircase spanning tree -------------------------------------

    def staircase_tree(self, base: int = 0):
        """Steps ``(vertex, parent, edge_slot, step_sign)`` of the canonical tree.

        The tree is the lexicographic staircase rooted at ``base``: the
        parent of ``v`` differs in the largest axis where ``v`` and the
        base disagree, one step toward the base.  ``step_sign`` is +1
        when the walk parent -> vertex runs along the canonical edge
        orientation.  Parents always precede children.
        """
        if base in self._trees:
            return self._trees[base]
        if not 0 <= base < self.nverts:
            raise ValueError(f"base vertex {base} out of range")
        bc = self.vertex_coords[base]
        order = sorted(
            range(self.nverts),
            key=lambda v: tuple(
                abs(int(self.vertex_coords[v][a]) - int(bc[a]))
                for a in range(self.ndim - 1, -1, -1)
            ),
        )
        steps = []
        for v in order:
            if v == base:
                continue
            vc = self.vertex_coords[v]
            a = max(ax for ax in range(self.ndim) if vc[ax] != bc[ax])
            if vc[a] > bc[a]:
                parent = v - int(self.strides[a])
                slot = self._edge_slot[(parent, a)]
                steps.append((v, parent, slot, 1))
            else:
                parent = v + int(self.strides[a])
                slot = self._edge_slot[(v, a)]
                steps.append((v, parent, slot, -1))
        self._trees[base] = tuple(steps)
        return self._trees[base]


def stack(grid: Grid) -> Grid:
    """Two copies of the grid stacked along a new axis 0."""
    if grid.stacked:
        raise ValueError("grid is already stacked; only one stack level is supported")
    return Grid((2,) + grid.dims, stacked=True)


def stack_vertex(grid: Grid, stacked: Grid, level: int, vertex: int) -> int:
    """Index in the stacked grid of ``vertex`` on the given level."""
    if level not in (0, 1):
        raise ValueError("level must be 0 or 1")
    return level * int(stacked.strides[0]) + vertex


def _d_one_form(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Quad sums of an edge array on canonical orientations."""
    qe = grid.quad_edges
    return values[qe[:, 0]] + values[qe[:, 1]] - values[qe[:, 2]] - values[qe[:, 3]]


def closedness_residual(grid: Grid, values: np.ndarray):
    """Max relative quad residual of an edge-valued 1-form array."""
    values = np.asarray(values, float)
    if values.ndim == 1:
        values = values[:, None]
    if grid.nquads == 0:
        return 0.0, None
    dvals = _d_one_form(grid, values)
    scale = max(float(np.linalg.norm(values, axis=-1).max(initial=0.0)), 1e-300)
    res = np.linalg.norm(dvals, axis=-1) / scale
    worst = int(np.argmax(res))
    return float(res[worst]), worst


def integrate_one_form(grid: Grid, alpha, base: int = 0, seed=None,
                       check_closed: bool = True, tol: float = 1e-10):
    """Integrate a closed 1-form to the potential with ``f(base) = seed``.

    ``alpha`` may be a :class:`dnet.forms.Form1` or a raw ``(nedges, d)``
    array on canonical orientations.  Integration runs along the
    canonical staircase tree; when ``check_closed`` is set, the quad
    residual of ``alpha`` is verified first and an offending quad is
    reported via :class:`ClosednessError`.
    """
    from .forms import Form0, Form1

    values = alpha.values if isinstance(alpha, Form1) else np.asarray(alpha, float)
    if values.ndim == 1:
        values = values[:, None]
    if len(values) != grid.nedges:
        raise ValueError("one-form carrier size mismatch")
    if check_closed and grid.nquads:
        dvals = _d_one_form(grid, values)
        scale = max(float(np.abs(values).max(initial=0.0)), 1.0)
        res = np.linalg.norm(dvals, axis=-1) / scale
        worst = int(np.argmax(res))
        if res[worst] > tol:
            raise ClosednessError(
                f"one-form is not closed: quad residual {res[worst]:.3e} > {tol:.1e}",
                where=grid.locate_quad(worst), residual=float(res[worst]))
    dim = values.shape[1]
    out = np.zeros((grid.nverts, dim))
    out[base] = 0.0 if seed is None else np.asarray(seed, float)
    for v, parent, slot, sign in grid.staircase_tree(base):
        out[v] = out[parent] + sign * values[slot]
    return Form0(grid, out)


def trivialize_connection(grid: Grid, gamma, base: int = 0, tol: float = 1e-8):
    """Trivialize a flat connection: find T with ``Gamma_ji = T_j^-1 T_i``.

    ``gamma`` is an ``(nedges, k, k)`` array of the forward transports
    along canonical orientations (fiber at tail -> fiber at head).
    ``T[base]`` is the identity.  Flatness is checked on every quad
    first; the returned array satisfies the reconstruction identity on
    all edges up to the flatness residual.
    """
    gamma = np.asarray(gamma, float)
    if gamma.shape[0] != grid.nedges or gamma.shape[1] != gamma.shape[2]:
        raise ValueError("gamma must be (nedges, k, k)")
    if grid.nquads:
        qe = grid.quad_edges
        lhs = gamma[qe[:, 1]] @ gamma[qe[:, 0]]   # i -> j -> k
        rhs = gamma[qe[:, 2]] @ gamma[qe[:, 3]]   # i -> l -> k
        num = np.linalg.norm(lhs - rhs, axis=(1, 2))
        den = np.maximum(np.linalg.norm(lhs, axis=(1, 2)), 1e-300)
        res = num / den
        worst = int(np.argmax(res))
        if res[worst] > tol:
            raise FlatnessError(
                f"connection is not flat: quad residual {res[worst]:.3e} > {tol:.1e}",
                where=grid.locate_quad(worst), residual=float(res[worst]))
    k = gamma.shape[1]
    T = np.empty((grid.nverts, k, k))
    Tinv = np.empty_like(T)
    T[base] = np.eye(k)
    Tinv[base] = np.eye(k)
    for v, parent, slot, sign in grid.staircase_tree(base):
        if sign > 0:
            step = gamma[slot]              # Gamma_{v, parent}
        else:
            step = np.linalg.inv(gamma[slot])
        T[v] = T[parent] @ np.linalg.inv(step)
        Tinv[v] = step @ Tinv[parent]
    return T, Tinv
