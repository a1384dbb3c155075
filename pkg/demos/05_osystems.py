#!/usr/bin/env python3
"""O-systems: the zero-curvature view of all the dualities.

Assembles the isothermic pair, the Guichard triple and the Omega
quadruple into single maps and checks both characterizations of the
O-system property: the weighted curly-wedge sum and the vanishing of
the bracket of the assembled differential.
"""

import numpy as np

from dnet import Grid, Signature, random_isothermic
from dnet.isothermic import christoffel_dual
from dnet.lie_sphere import associates, guichard_generate, omega_from_darboux_pair
from dnet.osystem import ParallelFamily, check_combescure, check_osystem, dual_family

SIG3 = Signature(3, 0)


def show(name, rep):
    print(f"{name}: equality {rep['characterization_equality']:.1e}, "
          f"bracket {rep['bracket_vanishes']:.1e} -> "
          f"{'PASS' if rep['passed'] else 'FAIL'}")


rng = np.random.default_rng(21)
net = random_isothermic(Grid([5, 5]), Signature(4, 1), rng)
data = christoffel_dual(net)
x, xd = data.x[:, :3], data.x_dual[:, :3]
print(f"combescure check of the dual pair: "
      f"{check_combescure(net.grid, x, xd, SIG3)['pairing']:.1e}")
fam = ParallelFamily(net.grid, [x, xd], SIG3)
_, drep = dual_family(fam)
print(f"dual edge-parallel family: {drep['dual_edge_parallel']:.1e}, "
      f"reassembly exact: {drep['reassembly_exact']}")
show("isothermic pair, metric [[0,1],[1,0]]",
     check_osystem(fam, [[0, 1], [1, 0]]))

gn = guichard_generate([5, 5], seed=1)
fam3 = ParallelFamily(gn.pn.grid, [gn.pn.x, gn.x_dual, gn.pn.n], SIG3)
show("guichard triple, split metric",
     check_osystem(fam3, [[0, 0.5, 0], [0.5, 0, 0], [0, 0, 1]]))

rng = np.random.default_rng(5)
net42 = random_isothermic(Grid([5, 5]), Signature(4, 2), rng)
om = omega_from_darboux_pair(net42, rng=rng)
a = associates(om)
fam4 = ParallelFamily(om.grid, [a.x, a.x_dual, a.n, a.n_dual], SIG3)
show("omega quadruple, neutral metric",
     check_osystem(fam4, [[0, 1, 0, 0], [1, 0, 0, 0],
                          [0, 0, 0, 1], [0, 0, 1, 0]]))
