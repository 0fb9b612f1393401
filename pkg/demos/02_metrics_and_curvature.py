"""Metrics, Christoffel symbols and curvature under the sign convention

    R_ijk^l = d_j Gamma^l_ik - d_i Gamma^l_jk
              + Gamma^l_jp Gamma^p_ik - Gamma^l_ip Gamma^p_jk.
"""

import numpy as np

from walkergeom import (
    ChartSplit,
    MetricField,
    christoffel,
    covariant_derivative_metric_residual,
    curvature,
    lower_curvature,
)

chart = ChartSplit.two_block(2, 1)

# polar-type metric diag(1, x1^2)
polar = MetricField(chart, {(1, 1): 1.0, (2, 2): "x1^2"})
conn = christoffel(polar)
x = np.array([2.0, 0.7])
G = conn.gamma(x)
print("polar Gamma^1_22 =", G[0, 1, 1], " Gamma^2_12 =", G[1, 0, 1])
print("metric compatibility residual:", covariant_derivative_metric_residual(polar, conn, x))

# round-sphere-type metric diag(1, sin^2 x1)
sphere = MetricField(chart, {(1, 1): 1.0, (2, 2): "sin(x1)^2"})
R = curvature(christoffel(sphere), np.array([np.pi / 2, 0.0]))
print("sphere R_121^2 at the equator:", R.components[0, 1, 0, 1])

low = lower_curvature(R, sphere)
print("pair-interchange residual:", np.max(np.abs(low - np.einsum("klij->ijkl", low))))

# the inverse metric is solved per point, never symbolically
print("det g on a batch:", sphere.determinant(np.array([[0.4, 0.0], [1.2, 0.3]])))
