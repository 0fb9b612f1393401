"""Builders and verifiers for extension metrics on three-block charts.

Given a torsion-free base connection ``D`` on an r-dimensional chart,
section data ``lambda`` and a vertical metric ``h`` on the middle block, the
pullback-extension metric on the ``n = 2r + m`` chart has the components

    g_jk = lambda_jk - 2 g_ia x^a Gamma^i_jk,   g_ip = lambda_ip,
    g_pq = h_pq,                                g_pa = g_ab = 0,

with ``[g_ia]`` a fixed nonsingular r x r matrix of constants (identity by
default).  ``m = 0`` recovers the classical cotangent construction.  The
companion operations implement the Killing operator of ``D`` (extended by
the middle-block partials), fiber translations by a one-form section, the
transformation rule they satisfy, and the canonical identifications of the
trailing block with base covectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Tuple

import numpy as np

from .chart import ChartSplit
from .distributions import CheckResult, _family_max, _points2d, _reduced
from .expr import ScalarField, as_field, coordinate, evaluate_fields
from .tensor import (
    ConnectionField,
    MetricField,
    SingularMetricError,
    SymbolicConnection,
    christoffel,
)

__all__ = [
    "OneFormSection",
    "ExtensionSpec",
    "build_riemann_extension",
    "build_pullback_extension",
    "killing_operator",
    "fiber_translate_pullback",
    "transformation_rule_residual",
    "recover_vertical_metric",
    "vertical_metric_fields",
    "canonical_vertical_field",
    "canonical_field_parallelism",
]


@dataclass(frozen=True)
class OneFormSection:
    """Base covector components ``omega_1..omega_r`` as functions on the
    leading+middle chart (independence of the trailing block is structural)."""

    r: int
    m: int
    components: Tuple[ScalarField, ...]

    def __post_init__(self):
        if len(self.components) != self.r:
            raise ValueError(f"need {self.r} components, got {len(self.components)}")
        lifted = tuple(as_field(c, self.r + self.m) for c in self.components)
        object.__setattr__(self, "components", lifted)

    @classmethod
    def from_values(cls, r: int, m: int, values: Sequence) -> "OneFormSection":
        return cls(r, m, tuple(as_field(v, r + m) for v in values))

    def zero_like(self) -> "OneFormSection":
        return OneFormSection.from_values(self.r, self.m, [0.0] * self.r)


@dataclass
class ExtensionSpec:
    """Input data of a pullback extension.

    ``lam`` holds the full symmetric section tensor on the leading+middle
    chart, keyed by 1-based pairs with ``mu <= nu``; its middle-middle block
    *is* the vertical metric, so consistency is structural.  The base
    connection's components are functions of the leading coordinates only.
    """

    r: int
    m: int
    base_connection: SymbolicConnection
    lam: Mapping[Tuple[int, int], ScalarField] = field(default_factory=dict)
    g_ia: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.r < 1 or self.m < 0:
            raise ValueError("need r >= 1 and m >= 0")
        if self.base_connection.n != self.r:
            raise ValueError(
                f"base connection lives on dimension {self.base_connection.n}, expected {self.r}"
            )
        q = self.r + self.m
        lam = {}
        for (mu, nu), value in dict(self.lam).items():
            if not (1 <= mu <= q and 1 <= nu <= q):
                raise IndexError(f"section index ({mu},{nu}) out of range 1..{q}")
            key = (mu, nu) if mu <= nu else (nu, mu)
            f = as_field(value, q)
            if key in lam and not lam[key].same_expression(f):
                raise ValueError(f"conflicting entries for symmetric component lambda_{key}")
            lam[key] = f
        zero = ScalarField.constant(0.0, q)
        for mu in range(1, q + 1):
            for nu in range(mu, q + 1):
                lam.setdefault((mu, nu), zero)
        self.lam = lam
        if self.g_ia is None:
            self.g_ia = np.eye(self.r)
        self.g_ia = np.asarray(self.g_ia, dtype=float)
        if self.g_ia.shape != (self.r, self.r):
            raise ValueError(f"[g_ia] must be {self.r}x{self.r}")
        if abs(np.linalg.det(self.g_ia)) < 1e-12:
            raise SingularMetricError("the constant block [g_ia] is singular")

    @property
    def n(self) -> int:
        return 2 * self.r + self.m

    def lam_component(self, mu: int, nu: int) -> ScalarField:
        key = (mu, nu) if mu <= nu else (nu, mu)
        return self.lam[key]

    def h_component(self, p: int, q: int) -> ScalarField:
        """Vertical-metric component; p, q are 1-based middle indices r+1..r+m."""
        if not (self.r < p <= self.r + self.m and self.r < q <= self.r + self.m):
            raise IndexError(f"vertical index ({p},{q}) outside middle block")
        return self.lam_component(p, q)


def build_pullback_extension(spec: ExtensionSpec) -> MetricField:
    """The unique extension metric determined by the given input data.

    The section data is placed on the zero section (trailing coordinates
    vanish); restricting the result there returns ``lam`` exactly, and the
    middle-middle block reuses the vertical-metric expressions unchanged.
    """
    r, m, n = spec.r, spec.m, spec.n
    chart = ChartSplit.three_block(n, r)
    comps = {}
    D = spec.base_connection
    for j in range(1, r + 1):
        for k in range(j, r + 1):
            f = spec.lam_component(j, k).with_dimension(n)
            for i in range(1, r + 1):
                gamma = D.component(i, j, k)
                if gamma.is_zero:
                    continue
                for a in range(1, r + 1):
                    coeff = spec.g_ia[i - 1, a - 1]
                    if coeff == 0.0:
                        continue
                    term = (-2.0 * coeff) * coordinate(r + m + a, n) * gamma.with_dimension(n)
                    f = f + term
            comps[(j, k)] = f
    for i in range(1, r + 1):
        for p in range(r + 1, r + m + 1):
            comps[(i, p)] = spec.lam_component(i, p).with_dimension(n)
    for p in range(r + 1, r + m + 1):
        for q in range(p, r + m + 1):
            comps[(p, q)] = spec.lam_component(p, q).with_dimension(n)
    for i in range(1, r + 1):
        for a in range(1, r + 1):
            comps[(i, r + m + a)] = ScalarField.constant(spec.g_ia[i - 1, a - 1], n)
    return MetricField(chart, comps)


def build_riemann_extension(
    D: SymbolicConnection,
    lam: Mapping[Tuple[int, int], object] = (),
    g_ia: Optional[np.ndarray] = None,
) -> MetricField:
    """Classical extension metric on dimension 2r (the ``m = 0`` case)."""
    spec = ExtensionSpec(r=D.n, m=0, base_connection=D, lam=dict(lam), g_ia=g_ia)
    return build_pullback_extension(spec)


# ---------------------------------------------------------------------------
# Killing operator and fiber translations
# ---------------------------------------------------------------------------


def killing_operator(D: SymbolicConnection, omega: OneFormSection, x) -> np.ndarray:
    """Symmetrized covariant derivative of a one-form section.

    Returns the (r+m) x (r+m) matrix with blocks

        L_ij = d_j omega_i + d_i omega_j - 2 Gamma^k_ij omega_k,
        L_ip = L_pi = d_p omega_i,
        L_pq = 0,

    evaluated at ``x`` (a single point or batch; leading+middle coordinates
    are used, so full-chart points are accepted too).
    """
    r, m = omega.r, omega.m
    q = r + m
    pts = _points2d(x)
    if pts.shape[-1] < q:
        raise ValueError(f"points must carry at least the first {q} coordinates")
    pts = pts[:, :q]
    single = np.asarray(x, dtype=float).ndim == 1
    om = evaluate_fields(list(omega.components), pts)
    dom = evaluate_fields(
        [[omega.components[i].partial(mu) for i in range(r)] for mu in range(1, q + 1)], pts
    )  # [..., mu, i] = d_mu omega_i
    G = D.gamma(pts[:, :r])
    out = np.zeros(pts.shape[:-1] + (q, q))
    lead = slice(0, r)
    out[:, lead, lead] = (
        dom[:, :r, :]
        + np.einsum("...ij->...ji", dom[:, :r, :])
        - 2.0 * np.einsum("...kij,...k->...ij", G, om)
    )
    if m > 0:
        out[:, lead, r:q] = np.einsum("...pi->...ip", dom[:, r:q, :])
        out[:, r:q, lead] = dom[:, r:q, :]
    return out[0] if single else out


def fiber_translate_pullback(
    g: MetricField, omega: OneFormSection, g_ia: np.ndarray, x
) -> np.ndarray:
    """Pullback of ``g`` under the fiber translation by ``omega``.

    The translation acts on the trailing coordinates as
    ``x^a -> x^a + g^{ai} omega_i`` and fixes the rest; the pullback is
    computed by the chain rule with exact partials of ``omega``.
    """
    chart = g.chart
    if chart.mode != "three_block":
        raise ValueError("fiber translation requires a three-block chart")
    r, m, n = chart.r, chart.middle_size, chart.n
    if (omega.r, omega.m) != (r, m):
        raise ValueError("one-form section does not match the chart blocks")
    q = r + m
    ginv = np.linalg.inv(np.asarray(g_ia, dtype=float))  # [a, i]
    pts = _points2d(x)
    if pts.shape[-1] != n:
        raise ValueError(f"points must have dimension {n}")
    single = np.asarray(x, dtype=float).ndim == 1

    om = evaluate_fields(list(omega.components), pts[:, :q])
    dom = evaluate_fields(
        [[omega.components[i].partial(mu) for i in range(r)] for mu in range(1, q + 1)],
        pts[:, :q],
    )  # [..., mu, i]

    shifted = pts.copy()
    shifted[:, q:] += np.einsum("ai,...i->...a", ginv, om)

    jac = np.zeros(pts.shape[:-1] + (n, n))
    jac[:, np.arange(n), np.arange(n)] = 1.0
    jac[:, q:, :q] = np.einsum("ai,...mi->...am", ginv, dom)

    g_at = g.value(shifted)
    out = np.einsum("...ab,...am,...bn->...mn", g_at, jac, jac)
    return out[0] if single else out


def transformation_rule_residual(
    g: MetricField, spec: ExtensionSpec, omega: OneFormSection, points
) -> CheckResult:
    """Residual of ``omega*g = g + pi*(L omega)`` at the sampled points.

    ``pi*(L omega)`` places the Killing matrix in the leading+middle block
    and is zero in any slot with a trailing index.
    """
    pts = _points2d(points)
    n, q = spec.n, spec.r + spec.m
    pulled = fiber_translate_pullback(g, omega, spec.g_ia, pts)
    base = g.value(pts)
    L = killing_operator(spec.base_connection, omega, pts)
    pi_L = np.zeros(pts.shape[:-1] + (n, n))
    pi_L[:, :q, :q] = L
    diff = pulled - base - pi_L
    return _reduced("transformation_rule", _family_max(diff), pts)


# ---------------------------------------------------------------------------
# vertical metric and canonical trailing fields
# ---------------------------------------------------------------------------


def recover_vertical_metric(g: MetricField, x, det_floor: float = 1e-12) -> np.ndarray:
    """Middle-middle block of ``g``: the vertical metric of the middle bundle.

    Raises :class:`SingularMetricError` when the block is degenerate at ``x``.
    """
    chart = g.chart
    if chart.mode != "three_block":
        raise ValueError("vertical-metric recovery requires a three-block chart")
    mid = chart.middle
    block = g.value(x)[..., mid, mid]
    if chart.middle_size > 0 and np.any(np.abs(np.linalg.det(block)) < det_floor):
        raise SingularMetricError("the middle block is degenerate at a requested point")
    return block


def vertical_metric_fields(g: MetricField):
    """The ScalarField components of the middle-middle block, as a nested list."""
    chart = g.chart
    mid = range(chart.middle.start + 1, chart.middle.stop + 1)
    return [[g.component(p, q) for q in mid] for p in mid]


def canonical_vertical_field(xi, g_ia) -> np.ndarray:
    """Trailing components ``v^a`` with ``v^a g_{a i} = xi_i``.

    The constant-component field ``(0,..,0,v^a)`` then represents the base
    covector ``xi`` via ``g(v, .) = pi* xi`` on any adapted-form metric with
    leading-trailing block ``g_ia``.
    """
    C = np.asarray(g_ia, dtype=float)
    if abs(np.linalg.det(C)) < 1e-12:
        raise SingularMetricError("the constant block [g_ia] is singular")
    return np.linalg.solve(C, np.asarray(xi, dtype=float))


def canonical_field_parallelism(
    g: MetricField, v_trailing, points, conn: Optional[ConnectionField] = None
) -> CheckResult:
    """Residual of parallelism of a constant trailing field along the
    middle+trailing leaves: max over leading mu of |Gamma^mu_{nu a} v^a| with
    nu ranging over the middle and trailing directions."""
    chart = g.chart
    if chart.mode != "three_block":
        raise ValueError("canonical fields require a three-block chart")
    pts = _points2d(points)
    conn = conn if conn is not None else christoffel(g)
    G = conn.gamma(pts)
    v = np.asarray(v_trailing, dtype=float)
    leaf_dirs = slice(chart.r, chart.n)  # middle + trailing
    contracted = np.einsum("...lva,a->...lv", G[:, chart.leading, leaf_dirs, chart.trailing], v)
    return _reduced("canonical_field_parallelism", _family_max(contracted), pts)
