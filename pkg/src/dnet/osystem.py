"""Combescure pairs and O-systems.

A Combescure pair is two edge-parallel nets whose differences pair to a
vanishing scalar 2-form, ``(dx ^ dx*) = 0``; on non-collinear quads this
is equivalent to circularity of either net.  A family of mutually
Combescure nets ``x^a`` assembles into a single map
``Phi = sum_a x^a (x) w_a`` whose edge differences are decomposable;
reading ``Phi`` against a basis of R^{p,q} produces the dual
edge-parallel family ``y^m``, and the family is an O-system (dual family
mutually Combescure for a metric ``g`` on the weight space) exactly when
the weighted sum ``sum g_ab dx^a ^~ dx^b`` vanishes, or equivalently
when the bracket ``[dPhi ^ dPhi]`` of the assembled map vanishes in
``Lambda^2 (R^{p,q} + W)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forms import (BilinearRule, Form0, curly_wedge,
                    exterior_derivative, lam2_dim, wedge, wedge_vec)
from .grid import Grid
from .pseudo_euclidean import Signature, stereo_lift

__all__ = ["ParallelFamily", "check_combescure", "dual_family", "check_osystem"]


@dataclass
class ParallelFamily:
    """Mutually edge-parallel vertex maps into R^{p,q}.

    ``members`` is a list of (nverts, p+q) arrays.  Validation finds the
    common edge direction and per-member stretch factors; near-vanishing
    edges are excluded from the direction test and reported.
    """

    grid: Grid
    members: list
    signature: Signature

    def __post_init__(self):
        self.members = [np.asarray(m, float) for m in self.members]
        if not self.members:
            raise ValueError("a family needs at least one member")
        d = self.signature.dim
        for m in self.members:
            if m.shape != (self.grid.nverts, d):
                raise ValueError("member shape mismatch")

    @property
    def size(self) -> int:
        return len(self.members)

    def differences(self) -> np.ndarray:
        """(size, nedges, d) edge differences."""
        t, h = self.grid.edge_tail, self.grid.edge_head
        return np.stack([m[h] - m[t] for m in self.members])

    def phi(self) -> np.ndarray:
        """(nverts, d, size) assembled map."""
        return np.stack(self.members, axis=2)

    def validate(self, tol: float = 1e-9, floor: float = 1e-12) -> dict:
        diffs = self.differences()
        norms = np.linalg.norm(diffs, axis=2)
        scale = norms.max(initial=0.0)
        active = norms > floor * max(scale, 1.0)
        worst = 0.0
        for e in range(self.grid.nedges):
            live = [a for a in range(self.size) if active[a, e]]
            if len(live) < 2:
                continue
            ref = diffs[live[0], e]
            for a in live[1:]:
                w = wedge_vec(diffs[a, e], ref)
                worst = max(worst, float(
                    np.linalg.norm(w)
                    / (np.linalg.norm(diffs[a, e]) * np.linalg.norm(ref))))
        # decomposability of dPhi through its 2x2 minors
        t, h = self.grid.edge_tail, self.grid.edge_head
        phi = self.phi()
        dphi = phi[h] - phi[t]
        minor = 0.0
        for e in range(self.grid.nedges):
            sv = np.linalg.svd(dphi[e], compute_uv=False)
            if sv[0] > floor:
                minor = max(minor, float(sv[1] / sv[0]))
        dead = int(np.sum(~active))
        return {
            "edge_parallel": worst,
            "dphi_decomposable": minor,
            "excluded_edge_slots": dead,
            "passed": bool(worst <= tol and minor <= max(tol, 1e-10)),
        }


def check_combescure(grid: Grid, x, x_star, signature: Signature,
                     tol: float = 1e-9) -> dict:
    """Residual of ``(dx ^ dx*) = 0`` plus circularity of both nets.

    The scalar 2-form uses the ambient inner product as the bilinear
    rule; circularity is the rank test of the lifted quads, and on a
    quad with non-constant stretch the two vanish together.
    """
    x = np.asarray(x, float)
    x_star = np.asarray(x_star, float)
    rule = BilinearRule.dot(signature.dim, signature.signs)
    dx = exterior_derivative(Form0(grid, x))
    dxs = exterior_derivative(Form0(grid, x_star))
    pairing = wedge(dx, dxs, rule).values[:, 0] if grid.nquads else np.zeros(0)
    scale = max(float(np.abs(dx.values).max(initial=0.0)
                      * np.abs(dxs.values).max(initial=0.0)), 1e-300)
    res = float(np.abs(pairing).max(initial=0.0)) / scale

    big = Signature(signature.p + 1, signature.q + 1)
    frame = big.standard_frame()

    def circularity(values):
        vals = np.zeros((grid.nverts, big.dim))
        vals[:, :signature.p] = values[:, :signature.p]
        vals[:, signature.p + 1:big.dim - 1] = values[:, signature.p:]
        lifts = stereo_lift(vals, frame)
        worst = 0.0
        for n in range(grid.nquads):
            sv = np.linalg.svd(lifts[grid.quad_vertices[n]], compute_uv=False)
            worst = max(worst, float(sv[3] / max(sv[0], 1e-300)))
        return worst

    out = {
        "pairing": res,
        "circular_x": circularity(x),
        "circular_x_star": circularity(x_star),
    }
    out["passed"] = bool(res <= tol and out["circular_x"] <= 1e-8
                         and out["circular_x_star"] <= 1e-8)
    return out


def dual_family(fam: ParallelFamily) -> tuple:
    """Dual edge-parallel family ``y^m`` read off the assembled map.

    Returns ``(members, report)``: the m-th dual member collects the
    m-th ambient coordinate of every family member, the report checks
    that the duals share edge directions and that reassembly reproduces
    ``Phi`` exactly.
    """
    phi = fam.phi()                           # (nv, d, N)
    duals = [phi[:, m, :] for m in range(fam.signature.dim)]
    t, h = fam.grid.edge_tail, fam.grid.edge_head
    worst = 0.0
    for e in range(fam.grid.nedges):
        dvs = [y[h[e]] - y[t[e]] for y in duals]
        norms = [np.linalg.norm(v) for v in dvs]
        if max(norms, default=0.0) <= 1e-14:
            continue
        ref = dvs[int(np.argmax(norms))]
        for v, nv in zip(dvs, norms):
            if nv <= 1e-12 * max(norms):
                continue
            w = wedge_vec(v, ref)
            worst = max(worst, float(np.linalg.norm(w) / (nv * np.linalg.norm(ref))))
    reassembled = np.stack(duals, axis=1)
    exact = bool(np.array_equal(reassembled, phi))
    return duals, {"dual_edge_parallel": worst, "reassembly_exact": exact,
                   "passed": bool(worst <= 1e-9 and exact)}


def check_osystem(fam: ParallelFamily, metric, tol_equal: float = 1e-11,
                  tol_zero: float = 1e-9) -> dict:
    """Both O-system characterizations, compared and tested for zero.

    Computes (a) the weighted curly-wedge sum
    ``sum g_ab dx^a ^~ dx^b`` per quad and (b) the bracket
    ``[dPhi ^ dPhi]`` with the direct-sum commutator as the bilinear
    rule, asserting that the ``Lambda^2 R^{p,q}`` component of (b)
    equals (a) to ``tol_equal`` and that the full bracket vanishes to
    ``tol_zero`` relative to the family scale.
    """
    metric = np.asarray(metric, float)
    N = fam.size
    if metric.shape != (N, N):
        raise ValueError("metric shape must match the family size")
    if np.abs(metric - metric.T).max(initial=0.0) > 1e-14:
        raise ValueError("metric must be symmetric")
    cond = np.linalg.cond(metric)
    g = fam.grid
    d = fam.signature.dim
    signs = fam.signature.signs

    # (a) weighted curly-wedge sum
    forms = [Form0(g, m) for m in fam.members]
    dxs = [exterior_derivative(f) for f in forms]
    weighted = np.zeros((g.nquads, lam2_dim(d)))
    for a in range(N):
        for b in range(N):
            if metric[a, b] != 0.0:
                weighted += metric[a, b] * curly_wedge(dxs[a], dxs[b]).values

    # (b) bracket of the assembled map: values are d x N matrices,
    # [A, B] = (A' G_w B - B' G_w A  in Lambda^2 W) + (A G_w B' - B G_w A'
    # in Lambda^2 R^{p,q}) with the ambient metric pairing the first slot
    phi_flat = Form0(g, fam.phi().reshape(g.nverts, d * N))

    def bracket(u, v):
        A = u.reshape(-1, d, N)
        B = v.reshape(-1, d, N)
        Ag = A * signs[None, :, None]
        amb = np.einsum("nxa,ab,nyb->nxy", A, metric, B)
        amb = amb - np.swapaxes(amb, 1, 2)
        wpart = np.einsum("nxa,nxb->nab", Ag, B)
        wpart = wpart - np.swapaxes(wpart, 1, 2)
        ia, ib = np.triu_indices(d, k=1)
        ja, jb = np.triu_indices(N, k=1)
        return np.concatenate([amb[:, ia, ib], wpart[:, ja, jb]], axis=1)

    rule = BilinearRule(bracket, d * N, d * N,
                        lam2_dim(d) + lam2_dim(N), "antisymmetric",
                        name="direct-sum bracket")
    dphi = exterior_derivative(phi_flat)
    full = wedge(dphi, dphi, rule).values
    amb_part = full[:, :lam2_dim(d)]
    w_part = full[:, lam2_dim(d):]

    scale = max(float(np.abs(dphi.values).max(initial=0.0)) ** 2, 1e-300)
    equality = float(np.abs(amb_part - weighted).max(initial=0.0)) / scale
    vanish = float(np.abs(full).max(initial=0.0)) / scale
    combescure = float(np.abs(w_part).max(initial=0.0)) / scale
    out = {
        "characterization_equality": equality,
        "bracket_vanishes": vanish,
        "mutual_combescure": combescure,
        "metric_condition": float(cond),
        "passed": bool(equality <= tol_equal and vanish <= tol_zero),
    }
    return out
