"""Parallel transport and the transport formulation of projectability.

A vector transported upstairs projects onto the downstairs transport of its
projection exactly when the connection is projectable; on a metric violating
the linear-fiber criterion the two transports drift apart at O(1).
"""

import numpy as np

from walkergeom import (
    ChartSplit,
    CurveSpec,
    DistributionSpec,
    MetricField,
    SymbolicConnection,
    build_pullback_extension,
    christoffel,
    euler_transport,
    parallel_transport,
    parse_expression,
    projection_commutes_residual,
    restrict_connection,
)
from walkergeom.corpus import random_curve, random_extension_spec

# transport accuracy: dw/dt + w = 0 along x(t) = t gives w(1) = exp(-1)
decay = SymbolicConnection(1, {(1, 1, 1): 1.0})
curve = CurveSpec((parse_expression("x1", 1),), (0.0, 1.0), 1e-3)
res = parallel_transport(decay, curve, np.array([1.0]))
print("w(1) =", res.final[0], " error:", abs(res.final[0] - np.exp(-1)))
print("first-order reference:", euler_transport(decay, curve, np.array([1.0]), step=1e-4)[0])

# norm preservation along a metric connection
rng = np.random.default_rng(5)
spec = random_extension_spec(rng, 1, 1)
g = build_pullback_extension(spec)
conn = christoffel(g)
c = random_curve(rng, g.n)
w0 = np.array([1.0, -0.4, 0.3])
out = parallel_transport(conn, c, w0)
gs = g.value(c.positions(out.times))
norms = np.einsum("...ij,...i,...j->...", gs, out.vectors, out.vectors)
print("norm drift along the curve:", np.max(np.abs(norms - norms[0])))

# commuting projections: pass on a built extension ...
V = DistributionSpec.orthocomplement(g.chart)
print("built extension:",
      projection_commutes_residual(g, spec.base_connection, V, c, w0, conn=conn))

# ... fail on a non-projectable adapted metric
bad = MetricField(ChartSplit.three_block(4, 1),
                  {(1, 1): "3*x2*x4", (1, 4): 1.0, (2, 2): 1.0, (3, 3): 1.0})
bad_conn = christoffel(bad)
Vb = DistributionSpec.orthocomplement(bad.chart)
D = restrict_connection(bad_conn, Vb)
cb = random_curve(rng, 4)
print("engineered failure:",
      projection_commutes_residual(bad, D, Vb, cb, np.array([1.0, 0.5, -0.5, 0.8]),
                                   conn=bad_conn))
