"""Discrete exterior calculus of vector-valued forms of degree <= 2.

A k-form assigns a value in R^d to every oriented k-cube of a grid and
changes sign under orientation reversal.  Values are stored on the
canonical orientations only; the opposite orientation is always derived
by negation, never stored, so the sign rule holds bitwise.

The exterior derivative acts by

* ``(df)_{ji} = f_j - f_i`` on 0-forms,
* ``(da)_{lkji} = a_{il} + a_{lk} + a_{kj} + a_{ji}`` on 1-forms,

and satisfies ``d(d(f)) = 0``.  Products of forms with values in
different spaces are taken through a :class:`BilinearRule`; for two
1-forms the quad value is the quarter formula

    1/4 ( B(a_ji + a_kl, b_li + b_kj) - B(a_li + a_kj, b_ji + b_kl) ).

The product is graded commutative for symmetric ``B`` and graded
anticommutative for antisymmetric ``B``.  It is not associative, so no
chained product helper is offered; parenthesize explicitly.

Bivector-valued forms (values in Lambda^2 R^d) store their coefficients
in the lexicographic basis ``e_a ^ e_b``, ``a < b``; see
:func:`lam2_pairs`, :func:`pack_bivector`, :func:`unpack_bivector`.
"""

from __future__ import annotations

import numpy as np

from .grid import Grid

__all__ = [
    "Form0", "Form1", "Form2", "BilinearRule",
    "exterior_derivative", "wedge", "curly_wedge", "mixed_area",
    "lam2_dim", "lam2_pairs", "pack_bivector", "unpack_bivector", "wedge_vec",
]


# -- Lambda^2 coefficient helpers -------------------------------------

def lam2_dim(d: int) -> int:
    """Dimension of Lambda^2 R^d."""
    return d * (d - 1) // 2


def lam2_pairs(d: int):
    """Index pairs (a, b), a < b, in lexicographic order."""
    a, b = np.triu_indices(d, k=1)
    return a, b


def pack_bivector(matrix: np.ndarray) -> np.ndarray:
    """Lexicographic coefficients of an antisymmetric matrix (batched)."""
    matrix = np.asarray(matrix, float)
    d = matrix.shape[-1]
    a, b = lam2_pairs(d)
    return matrix[..., a, b]


def unpack_bivector(packed: np.ndarray, d: int) -> np.ndarray:
    """Antisymmetric coefficient matrix from packed coefficients (batched)."""
    packed = np.asarray(packed, float)
    a, b = lam2_pairs(d)
    out = np.zeros(packed.shape[:-1] + (d, d))
    out[..., a, b] = packed
    out[..., b, a] = -packed
    return out


def wedge_vec(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Packed coefficients of ``x ^ y`` (batched over leading axes)."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    a, b = lam2_pairs(x.shape[-1])
    return x[..., a] * y[..., b] - x[..., b] * y[..., a]


# -- bilinear rules ----------------------------------------------------

class BilinearRule:
    """A bilinear map B: R^dl x R^dr -> R^do used to multiply form values.

    ``fn`` must accept two arrays of shape (n, dl), (n, dr) and return
    (n, do).  The symmetry tag (``"symmetric"``, ``"antisymmetric"`` or
    None) is probed on random inputs at construction time.
    """

    def __init__(self, fn, dim_left, dim_right, dim_out, symmetry=None,
                 name="custom", check: bool = True):
        if symmetry not in (None, "symmetric", "antisymmetric"):
            raise ValueError(f"unknown symmetry tag {symmetry!r}")
        if symmetry is not None and dim_left != dim_right:
            raise ValueError("a symmetry tag requires equal value dimensions")
        self.fn = fn
        self.dim_left = int(dim_left)
        self.dim_right = int(dim_right)
        self.dim_out = int(dim_out)
        self.symmetry = symmetry
        self.name = name
        if check and symmetry is not None:
            rng = np.random.default_rng(20240902)
            u = rng.standard_normal((8, dim_left))
            v = rng.standard_normal((8, dim_right))
            uv, vu = self(u, v), self(v, u)
            flip = 1.0 if symmetry == "symmetric" else -1.0
            if not np.allclose(uv, flip * vu, atol=1e-12 * max(1.0, np.abs(uv).max())):
                raise ValueError(f"rule {name!r} does not match its symmetry tag")

    def __call__(self, u, v):
        u = np.atleast_2d(np.asarray(u, float))
        v = np.atleast_2d(np.asarray(v, float))
        if u.shape[1] != self.dim_left or v.shape[1] != self.dim_right:
            raise ValueError(
                f"rule {self.name!r} expects dims ({self.dim_left}, {self.dim_right}), "
                f"got ({u.shape[1]}, {v.shape[1]})")
        return self.fn(u, v)

    @classmethod
    def scalar(cls):
        return cls(lambda u, v: u * v, 1, 1, 1, "symmetric", name="scalar")

    @classmethod
    def dot(cls, dim: int, signs=None):
        """Inner product, optionally with a diagonal metric ``signs``."""
        if signs is None:
            signs = np.ones(dim)
        signs = np.asarray(signs, float)

        def fn(u, v):
            return np.sum(u * signs * v, axis=1, keepdims=True)

        return cls(fn, dim, dim, 1, "symmetric", name="dot")

    @classmethod
    def wedge_product(cls, dim: int):
        """Exterior product R^d x R^d -> Lambda^2 R^d (packed)."""
        return cls(wedge_vec, dim, dim, lam2_dim(dim), "antisymmetric",
                   name="wedge")

    @classmethod
    def from_tensor(cls, tensor, symmetry=None, name="tensor"):
        """Structure constants ``T[o, l, r]``."""
        tensor = np.asarray(tensor, float)
        do, dl, dr = tensor.shape

        def fn(u, v):
            return np.einsum("olr,nl,nr->no", tensor, u, v)

        return cls(fn, dl, dr, do, symmetry, name=name)


# -- forms -------------------------------------------------------------

class _FormBase:
    degree = None
    carrier = None

    def __init__(self, grid: Grid, values):
        values = np.array(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise ValueError("form values must be a (carrier, dim) array")
        n = {"vertex": grid.nverts, "edge": grid.nedges, "quad": grid.nquads}[self.carrier]
        if len(values) != n:
            raise ValueError(
                f"{type(self).__name__} expects {n} values, got {len(values)}")
        self.grid = grid
        self.values = values
        self.values.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def norm(self) -> float:
        if self.values.size == 0:
            return 0.0
        return float(np.linalg.norm(self.values, axis=1).max())

    def __repr__(self):
        return (f"{type(self).__name__}(dim={self.dim}, "
                f"carrier={len(self.values)} {self.carrier}s)")


class Form0(_FormBase):
    degree = 0
    carrier = "vertex"

    def at(self, vertex: int) -> np.ndarray:
        return self.values[vertex]

    @classmethod
    def from_function(cls, grid: Grid, fn):
        """Sample ``fn(coords) -> value`` on every vertex."""
        vals = [np.atleast_1d(np.asarray(fn(tuple(c)), float))
                for c in grid.vertex_coords]
        return cls(grid, np.array(vals))


class Form1(_FormBase):
    degree = 1
    carrier = "edge"

    def on_edge(self, tail: int, head: int) -> np.ndarray:
        """Value on the oriented edge from ``tail`` to ``head``."""
        e = self.grid.oriented_edge(tail, head)
        return e.sign * self.values[e.index]


class Form2(_FormBase):
    degree = 2
    carrier = "quad"

    def on_quad(self, quad) -> np.ndarray:
        """Value on an :class:`dnet.grid.OrientedQuad`."""
        return quad.sign * self.values[quad.index]


def exterior_derivative(form):
    """d of a 0-form or 1-form.  ``d(d(f))`` vanishes identically."""
    grid = form.grid
    if form.degree == 0:
        return Form1(grid, form.values[grid.edge_head] - form.values[grid.edge_tail])
    if form.degree == 1:
        qe = grid.quad_edges
        vals = (form.values[qe[:, 0]] + form.values[qe[:, 1]]
                - form.values[qe[:, 2]] - form.values[qe[:, 3]])
        return Form2(grid, vals)
    raise ValueError("exterior derivative is implemented for degrees 0 and 1 only")


def _quad_vertex_sum(grid: Grid, values: np.ndarray) -> np.ndarray:
    qv = grid.quad_vertices
    return values[qv[:, 0]] + values[qv[:, 1]] + values[qv[:, 2]] + values[qv[:, 3]]


def wedge(a, b, rule: BilinearRule):
    """Exterior product of two forms through a bilinear rule.

    Supported degree pairs: (0,0), (0,1), (1,0), (0,2), (2,0), (1,1).
    """
    if a.grid is not b.grid:
        raise ValueError("forms live on different grids")
    if a.dim != rule.dim_left or b.dim != rule.dim_right:
        raise ValueError(
            f"value dimensions ({a.dim}, {b.dim}) do not match rule "
            f"({rule.dim_left}, {rule.dim_right})")
    grid = a.grid
    k, m = a.degree, b.degree
    if k + m > 2:
        raise ValueError("products are implemented for total degree <= 2")

    if (k, m) == (0, 0):
        return Form0(grid, rule(a.values, b.values))
    if (k, m) == (0, 1):
        avg = a.values[grid.edge_tail] + a.values[grid.edge_head]
        return Form1(grid, 0.5 * rule(avg, b.values))
    if (k, m) == (1, 0):
        avg = b.values[grid.edge_tail] + b.values[grid.edge_head]
        return Form1(grid, 0.5 * rule(a.values, avg))
    if (k, m) == (0, 2):
        return Form2(grid, 0.25 * rule(_quad_vertex_sum(grid, a.values), b.values))
    if (k, m) == (2, 0):
        return Form2(grid, 0.25 * rule(a.values, _quad_vertex_sum(grid, b.values)))

    # two 1-forms: bottom/right/top/left canonical boundary edges give
    # a_ji = bottom, a_kl = top, a_li = left, a_kj = right
    qe = grid.quad_edges
    a_b, a_r, a_t, a_l = (a.values[qe[:, n]] for n in range(4))
    b_b, b_r, b_t, b_l = (b.values[qe[:, n]] for n in range(4))
    vals = 0.25 * (rule(a_b + a_t, b_l + b_r) - rule(a_l + a_r, b_b + b_t))
    return Form2(grid, vals)


def curly_wedge(a, b):
    """Product with the exterior product of the value space as the rule.

    For two 1-forms this is symmetric: ``a ^~ b == b ^~ a``.
    """
    if a.dim != b.dim:
        raise ValueError("curly wedge requires equal value dimensions")
    return wedge(a, b, BilinearRule.wedge_product(a.dim))


def mixed_area(x: Form0, y: Form0) -> Form2:
    """Mixed area ``A(x, y) = 1/2 dx ^~ dy`` of two vertex maps.

    For edge-parallel ``x``, ``y`` this is the polarization of the quad
    area; the formula is evaluated for arbitrary inputs regardless.
    ``A(x, x)`` per quad equals ``1/2 (x_i - x_k) ^ (x_j - x_l)``.
    """
    dx = exterior_derivative(x)
    dy = exterior_derivative(y)
    out = curly_wedge(dx, dy)
    return Form2(out.grid, 0.5 * out.values)
