import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dnet.errors import ClosednessError, FlatnessError
from dnet.forms import Form0, exterior_derivative
from dnet.grid import Grid, integrate_one_form, stack, trivialize_connection


def brute_force_counts(dims):
    """Counting oracle: enumerate all index pairs directly."""
    verts = list(itertools.product(*[range(d) for d in dims]))
    edges = set()
    quads = set()
    for v in verts:
        for a in range(len(dims)):
            w = list(v)
            w[a] += 1
            if w[a] < dims[a]:
                edges.add((v, tuple(w)))
            for b in range(a + 1, len(dims)):
                u = list(v)
                u[a] += 1
                u[b] += 1
                if u[a] < dims[a] and u[b] < dims[b]:
                    quads.add((v, a, b))
    return len(verts), len(edges), len(quads)


def test_unit_square_counts():
    assert Grid([2, 2]).counts() == (4, 4, 1)


def test_path_graph_counts():
    assert Grid([3, 1]).counts() == (3, 2, 0)


@pytest.mark.parametrize("dims", [[3, 3], [4, 2], [2, 3, 4], [5], [2, 2, 2, 2]])
def test_counts_match_brute_force(dims):
    assert Grid(dims).counts() == brute_force_counts(dims)


def test_bad_extent_rejected():
    with pytest.raises(ValueError):
        Grid([3, 0])
    with pytest.raises(ValueError):
        Grid([])


def test_stack_line():
    s = stack(Grid([4]))
    assert s.dims == (2, 4)
    assert int((s.edge_axis == 0).sum()) == 4


def test_stack_square_counts():
    s = stack(Grid([3, 3]))
    assert s.dims == (2, 3, 3)
    assert s.counts() == brute_force_counts([2, 3, 3])
    assert int((s.edge_axis == 0).sum()) == 9
    assert int((s.quad_axes[:, 0] == 0).sum()) == 12


def test_stack_of_interval_has_one_vertical_quad():
    s = stack(Grid([2]))
    assert sum(1 for q in s.quads() if q.axes[0] == 0) == 1


def test_double_stack_rejected():
    with pytest.raises(ValueError):
        stack(stack(Grid([3])))


def test_edge_reversal_involution():
    g = Grid([3, 2])
    for e in g.edges():
        assert e.reversed().reversed() == e
        assert e.reversed().sign == -e.sign


def test_quad_reversal_involution_and_rotation():
    g = Grid([3, 3])
    for q in g.quads():
        assert q.reversed().reversed().same_oriented(q)
        assert q.reversed().reversed().sign == q.sign
        assert q.rotated(1).same_oriented(q)
        assert not q.reversed().same_oriented(q)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 5), st.integers(2, 5), st.integers(0, 10**6))
def test_integrate_recovers_potential(d0, d1, seed):
    g = Grid([d0, d1])
    rng = np.random.default_rng(seed)
    f = Form0(g, rng.standard_normal((g.nverts, 3)))
    rec = integrate_one_form(g, exterior_derivative(f), base=0, seed=f.values[0])
    assert np.abs(rec.values - f.values).max() <= 1e-12 * max(
        1.0, np.abs(f.values).max())


def test_integrate_zero_form_gives_constant():
    g = Grid([4, 4])
    alpha = np.zeros((g.nedges, 2))
    out = integrate_one_form(g, alpha, base=5, seed=[3.0, -1.0])
    assert np.abs(out.values - [3.0, -1.0]).max() == 0.0


def test_coordinate_sum_potential():
    g = Grid([3, 3])
    f = Form0.from_function(g, lambda c: float(sum(c)))
    rec = integrate_one_form(g, exterior_derivative(f), base=0,
                             seed=f.values[0])
    assert np.abs(rec.values - f.values).max() == 0.0


def brute_force_paths(dims, start, end):
    """All monotone staircase paths between two vertices."""
    g = Grid(dims)
    sc = g.vertex_coords[start]
    ec = g.vertex_coords[end]
    steps = []
    for a in range(g.ndim):
        steps += [a] * abs(int(ec[a]) - int(sc[a]))
    paths = set(itertools.permutations(steps))
    out = []
    for p in paths:
        verts = [tuple(sc)]
        for a in p:
            nxt = list(verts[-1])
            nxt[a] += 1 if ec[a] > sc[a] else -1
            verts.append(tuple(nxt))
        out.append([g.vertex_index(v) for v in verts])
    return out


def test_path_independence_on_3x3():
    g = Grid([3, 3])
    rng = np.random.default_rng(11)
    f = Form0(g, rng.standard_normal((g.nverts, 2)))
    alpha = exterior_derivative(f)
    end = g.vertex_index((2, 2))
    values = []
    for path in brute_force_paths([3, 3], 0, end):
        total = np.zeros(2)
        for a, b in zip(path, path[1:]):
            total = total + alpha.on_edge(a, b)
        values.append(total)
    values = np.array(values)
    assert len(values) == 6
    assert np.abs(values - values[0]).max() <= 1e-12


def test_integrate_rejects_non_closed():
    g = Grid([3, 3])
    rng = np.random.default_rng(0)
    alpha = rng.standard_normal((g.nedges, 1))
    with pytest.raises(ClosednessError) as err:
        integrate_one_form(g, alpha, base=0)
    assert err.value.where["kind"] == "quad"


def random_orthogonal(rng, k):
    return np.linalg.qr(rng.standard_normal((k, k)))[0]


def test_trivialize_identity():
    g = Grid([3, 3])
    gamma = np.tile(np.eye(4), (g.nedges, 1, 1))
    T, Tinv = trivialize_connection(g, gamma)
    assert np.abs(T - np.eye(4)).max() == 0.0


def test_trivialize_reconstructs_gauge():
    g = Grid([4, 3])
    rng = np.random.default_rng(3)
    gs = np.array([random_orthogonal(rng, 4) for _ in range(g.nverts)])
    gamma = np.array([np.linalg.inv(gs[h]) @ gs[t]
                      for t, h in zip(g.edge_tail, g.edge_head)])
    T, Tinv = trivialize_connection(g, gamma)
    # oracle: reconstruct the connection edge by edge
    for e, (t, h) in enumerate(zip(g.edge_tail, g.edge_head)):
        assert np.abs(Tinv[h] @ T[t] - gamma[e]).max() <= 1e-10
    expected = np.einsum("ij,njk->nik", np.linalg.inv(gs[0]), gs)
    assert np.abs(T - expected).max() <= 1e-10


def test_trivialize_rejects_non_flat():
    g = Grid([3, 3])
    rng = np.random.default_rng(1)
    gamma = np.tile(np.eye(3), (g.nedges, 1, 1))
    bad = g.quad_edges[2][0]
    gamma[bad] = random_orthogonal(rng, 3)
    with pytest.raises(FlatnessError) as err:
        trivialize_connection(g, gamma)
    assert err.value.where["kind"] == "quad"
    assert err.value.where["index"] == 2
