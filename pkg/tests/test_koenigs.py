import numpy as np
import pytest

from dnet.errors import (ChartError, NotDualError, NotKoenigsError,
                         SeedDegeneracyError)
from dnet.forms import wedge_vec
from dnet.grid import Grid
from dnet.koenigs import (LineCongruence, christoffel_ratio, extract_pair,
                          g_map, g_map_inverse, km_pair_check, koenigs_dual,
                          moutard_lift_from_eta, pluecker_residual,
                          quad_holonomy_residual, random_moutard_net)
from dnet.pseudo_euclidean import line_distance, projective_cross_ratio


@pytest.fixture(scope="module")
def moutard_net():
    rng = np.random.default_rng(42)
    net, mu = random_moutard_net(Grid([4, 4]), 4, rng)
    return net, mu


@pytest.fixture(scope="module")
def dual_congruence(moutard_net):
    """Applicable congruence spanned by an affine lift and its dual."""
    net, mu = moutard_net
    rng = np.random.default_rng(43)
    alpha = rng.standard_normal(4)
    alpha /= np.linalg.norm(alpha)
    F, Fd, rep = koenigs_dual(net, alpha)
    assert rep["passed"]
    Fd = Fd + rng.standard_normal(4)      # generic translate off degeneracy
    g = net.grid
    dsm = Fd[g.edge_head] - Fd[g.edge_tail]
    eta = wedge_vec(dsm, 0.5 * (F[g.edge_head] + F[g.edge_tail]))
    return LineCongruence(g, F, Fd, eta), F, Fd


def test_single_edge_lift_recovery():
    g = Grid([2, 1])
    a = np.array([1.0, 0.0, 0.0])
    b = np.array([0.0, 1.0, 0.5])
    from dnet.koenigs import ProjectiveNet
    eta = wedge_vec(b, a)[None, :]
    net = ProjectiveNet(g, np.stack([a, 2 * b]), eta)
    mu = moutard_lift_from_eta(net, a)
    assert np.abs(mu[1] - b).max() <= 1e-14


def test_lift_seed_rescale_alternates(moutard_net):
    net, mu = moutard_net
    mu1 = moutard_lift_from_eta(net, mu[0])
    mu2 = moutard_lift_from_eta(net, 2.0 * mu[0])
    g = net.grid
    for v in range(g.nverts):
        parity = int(g.vertex_coords[v].sum()) % 2
        factor = 2.0 if parity == 0 else 0.5
        assert np.abs(mu2[v] - factor * mu1[v]).max() <= 1e-12 * np.abs(mu1[v]).max()


def test_lift_roundtrip_from_known_moutard(moutard_net):
    net, mu = moutard_net
    rec = moutard_lift_from_eta(net, mu[0])
    assert np.abs(rec - mu).max() <= 1e-10 * np.abs(mu).max()


def test_non_koenigs_rejected():
    g = Grid([3, 3])
    rng = np.random.default_rng(1)
    from dnet.koenigs import ProjectiveNet
    lifts = rng.standard_normal((g.nverts, 4))
    eta = rng.standard_normal((g.nedges, 6))
    # project eta onto the edge line pairs so tree propagation succeeds
    t, h = g.edge_tail, g.edge_head
    w = wedge_vec(lifts[h], lifts[t])
    coef = np.sum(eta * w, axis=1) / np.sum(w * w, axis=1)
    net = ProjectiveNet(g, lifts, coef[:, None] * w)
    with pytest.raises(NotKoenigsError):
        moutard_lift_from_eta(net, lifts[0])


def test_koenigs_dual_parallel_diagonals(moutard_net):
    net, mu = moutard_net
    rng = np.random.default_rng(2)
    alpha = rng.standard_normal(4)
    F, Fd, rep = koenigs_dual(net, alpha)
    assert rep["passed"]
    g = net.grid
    # oracle: opposite diagonals parallel via the wedge
    for n in range(g.nquads):
        i, j, k, l = g.quad_vertices[n]
        d1, d2 = F[k] - F[i], Fd[l] - Fd[j]
        w = wedge_vec(d1, d2)
        assert np.linalg.norm(w) <= 1e-9 * np.linalg.norm(d1) * np.linalg.norm(d2)
        d3, d4 = F[l] - F[j], Fd[k] - Fd[i]
        assert np.linalg.norm(wedge_vec(d3, d4)) <= 1e-9 * np.linalg.norm(d3) * np.linalg.norm(d4)


def test_koenigs_dual_scales_with_eta(moutard_net):
    net, mu = moutard_net
    from dnet.koenigs import ProjectiveNet
    rng = np.random.default_rng(3)
    alpha = rng.standard_normal(4)
    F1, Fd1, _ = koenigs_dual(net, alpha)
    scaled = ProjectiveNet(net.grid, net.lifts, 2.5 * net.eta)
    F2, Fd2, _ = koenigs_dual(scaled, alpha)
    assert np.abs(Fd2 - 2.5 * Fd1).max() <= 1e-10 * max(1.0, np.abs(Fd1).max())


def test_koenigs_dual_chart_error(moutard_net):
    net, mu = moutard_net
    # a chart through one of the points is degenerate
    alpha = np.linalg.svd(net.lifts[3][None])[2][-1]
    with pytest.raises(ChartError):
        koenigs_dual(net, alpha)


def test_km_pair_by_grid_shift():
    rng = np.random.default_rng(5)
    net, mu = random_moutard_net(Grid([5, 4]), 4, rng)
    g = Grid([4, 4])
    # shift by one step along axis 0: mu_minus(a, b) = mu(a + 1, b)
    big = net.grid
    idx0 = [big.vertex_index((a, b)) for a in range(4) for b in range(4)]
    idx1 = [big.vertex_index((a + 1, b)) for a in range(4) for b in range(4)]
    ok, tau, rep = km_pair_check(g, mu[idx0], mu[idx1])
    assert ok, rep
    assert np.abs(tau).max() > 0


def test_km_pair_generic_failure():
    rng = np.random.default_rng(6)
    g = Grid([4, 4])
    _, mu1 = random_moutard_net(g, 4, rng)
    _, mu2 = random_moutard_net(g, 4, rng)
    ok, _, rep = km_pair_check(g, mu1, mu2)
    assert not ok
    assert rep["vertical_moutard"] > 1e-3


def test_congruence_validates(dual_congruence):
    cong, F, Fd = dual_congruence
    rep = cong.validate()
    assert rep["passed"], rep
    assert pluecker_residual(cong.eta, 4).max() <= 1e-10


def test_gmap_r_zero_hits_intersection(dual_congruence):
    cong, F, Fd = dual_congruence
    g = cong.grid
    e = g.edges()[3]
    out = g_map(cong, e.head, e.tail, (1.0, 0.0))    # [tau, 0] -> s_ij
    v = out[0] * cong.sigma1[e.tail] + out[1] * cong.sigma2[e.tail]
    s_line = cong.intersection_line(e.index)
    assert line_distance(v, s_line) <= 1e-9


def test_gmap_inverse_roundtrip(dual_congruence):
    cong, F, Fd = dual_congruence
    g = cong.grid
    e = g.edges()[4]
    rng = np.random.default_rng(8)
    for _ in range(5):
        pt = rng.standard_normal(2)
        img = g_map(cong, e.head, e.tail, pt)
        back = g_map_inverse(cong, e.tail, e.head, img)
        cr = abs(pt[0] * back[1] - pt[1] * back[0])
        assert cr <= 1e-9 * np.linalg.norm(pt) * np.linalg.norm(back)


def test_gmap_preserves_cross_ratios(dual_congruence):
    cong, F, Fd = dual_congruence
    g = cong.grid
    e = g.edges()[6]
    rng = np.random.default_rng(9)
    pts = rng.standard_normal((4, 2))
    images = [g_map(cong, e.head, e.tail, p) for p in pts]
    cr_in = projective_cross_ratio(*pts)
    cr_out = projective_cross_ratio(*images)
    assert cr_out == pytest.approx(cr_in, rel=1e-9)


def test_bipartite_connections_flat(dual_congruence):
    cong, F, Fd = dual_congruence
    rng = np.random.default_rng(10)
    pts = [rng.standard_normal(2) for _ in range(5)]
    for quad in (0, 3, 7):
        assert quad_holonomy_residual(cong, True, quad, pts) <= 1e-9
        assert quad_holonomy_residual(cong, False, quad, pts) <= 1e-9


def test_extract_pair_roundtrip(dual_congruence):
    cong, F, Fd = dual_congruence
    g = cong.grid
    pair = extract_pair(cong, seeds_plus=((1, 0), (1, 0)),
                        seeds_minus=((0, 1), (0, 1)))
    assert pair.report["passed"], pair.report
    for v in range(g.nverts):
        assert line_distance(pair.net_plus.lifts[v], F[v]) <= 1e-9
        assert line_distance(pair.net_minus.lifts[v], Fd[v]) <= 1e-9


def test_extract_pair_two_seeds_give_two_pairs(dual_congruence):
    cong, F, Fd = dual_congruence
    p1 = extract_pair(cong, seed=1)
    p2 = extract_pair(cong, seed=2)
    assert p1.report["passed"] and p2.report["passed"]
    d = max(line_distance(p1.net_plus.lifts[v], p2.net_plus.lifts[v])
            for v in range(cong.grid.nverts))
    assert d > 1e-3          # genuinely different valid pairs


def test_extract_pair_gauge_relation(dual_congruence):
    cong, F, Fd = dual_congruence
    pair = extract_pair(cong, seed=3)
    g = cong.grid
    t, h = g.edge_tail, g.edge_head
    tau = wedge_vec(pair.mu_minus, pair.mu_plus)
    lhs = pair.net_minus.eta - pair.net_plus.eta - (tau[h] - tau[t])
    assert np.abs(lhs).max() <= 1e-10 * np.abs(pair.net_plus.eta).max()


def test_extract_pair_seed_on_intersection_fails(dual_congruence):
    cong, F, Fd = dual_congruence
    g = cong.grid
    base_b = 0
    e = next(e for e in g.edges() if e.tail == base_b or e.head == base_b)
    s_line = cong.intersection_line(e.index)
    coords, *_ = np.linalg.lstsq(
        np.stack([cong.sigma1[base_b], cong.sigma2[base_b]], axis=1),
        s_line, rcond=None)
    with pytest.raises(SeedDegeneracyError):
        extract_pair(cong, seeds_plus=(coords, (1.0, 0.0)),
                     seeds_minus=((0.0, 1.0), (0.0, 1.0)))


def test_christoffel_ratio_constant_scale():
    g = Grid([4, 4])
    rng = np.random.default_rng(11)
    sp = rng.standard_normal((g.nverts, 4))
    sm = 2.56 * sp + rng.standard_normal(4)
    r, rep = christoffel_ratio(g, sp, sm)
    assert rep["passed"]
    assert np.abs(r - np.sqrt(2.56)).max() <= 1e-10


def test_factorization_recovers_planted_field():
    from dnet.koenigs import factor_edge_ratios
    g = Grid([4, 4])
    planted = np.array([1.0 + 0.1 * (c[0] + 2 * c[1]) for c in g.vertex_coords])
    lam = planted[g.edge_tail] * planted[g.edge_head]
    r, quad_res, fact_res, _ = factor_edge_ratios(g, lam)
    assert quad_res <= 1e-12
    assert fact_res <= 1e-12
    # recovery up to the global alternating scale pattern
    scale = r[0] / planted[0]
    parities = np.array([(-1.0) ** (c.sum() % 2) for c in g.vertex_coords])
    adjusted = r / (scale ** parities)
    assert np.abs(adjusted - planted).max() <= 1e-10


def test_christoffel_quad_product(dual_congruence):
    cong, F, Fd = dual_congruence
    r, rep = christoffel_ratio(cong.grid, F, Fd)
    assert rep["quad_product"] <= 1e-10
    assert rep["factorization"] <= 1e-9


def test_christoffel_rejects_non_parallel():
    g = Grid([3, 3])
    rng = np.random.default_rng(13)
    sp = rng.standard_normal((g.nverts, 4))
    sm = rng.standard_normal((g.nverts, 4))
    with pytest.raises(NotDualError):
        christoffel_ratio(g, sp, sm)
