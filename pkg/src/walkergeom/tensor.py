"""Metric, connection and curvature fields on a single chart.

Components are :class:`~walkergeom.expr.ScalarField` expressions, so all
coordinate partials entering Christoffel symbols and curvature are exact;
floating point enters only through point evaluation and through the inverse
metric, which is solved densely per evaluation point rather than symbolically.

Index conventions: component accessors take 1-based indices matching the
coordinate names ``x1..xn``; evaluated numpy arrays are 0-based.  Connection
arrays are indexed ``[l, j, k]`` for ``Gamma^l_{jk}`` and curvature arrays
``[i, j, k, l]`` for ``R_{ijk}{}^l`` with the sign fixed by

    R_{ijk}{}^l = d_j Gamma^l_{ik} - d_i Gamma^l_{jk}
                  + Gamma^l_{jp} Gamma^p_{ik} - Gamma^l_{ip} Gamma^p_{jk}

(the negative of the most common textbook convention).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Tuple, Union

import numpy as np

from .chart import ChartSplit
from .expr import ScalarField, as_field, evaluate_fields

__all__ = [
    "SingularMetricError",
    "MetricField",
    "ConnectionField",
    "SymbolicConnection",
    "LeviCivitaConnection",
    "RestrictedConnection",
    "CurvatureValue",
    "christoffel",
    "curvature",
    "curvature_components",
    "lower_curvature",
    "covariant_derivative_metric_residual",
]


class SingularMetricError(ValueError):
    """The metric determinant fell below the floor at an evaluation point."""


def _zero(n: int) -> ScalarField:
    return ScalarField.constant(0.0, n)


class MetricField:
    """Symmetric 2-tensor with ScalarField components; only mu <= nu stored.

    Components are immutable after construction.  The tables of symbolic
    first/second partials are derived data, built lazily on first use;
    construct (or touch ``partial_value`` once) before fanning evaluation
    out to concurrent workers.
    """

    def __init__(self, chart: ChartSplit, components: Mapping[Tuple[int, int], object]):
        self.chart = chart
        self.n = chart.n
        comps = {}
        for (mu, nu), value in components.items():
            if not (1 <= mu <= self.n and 1 <= nu <= self.n):
                raise IndexError(f"metric index ({mu},{nu}) out of range 1..{self.n}")
            key = (mu, nu) if mu <= nu else (nu, mu)
            f = as_field(value, self.n)
            if key in comps and not comps[key].same_expression(f):
                raise ValueError(f"conflicting entries for symmetric component g_{key}")
            comps[key] = f
        zero = _zero(self.n)
        for mu in range(1, self.n + 1):
            for nu in range(mu, self.n + 1):
                comps.setdefault((mu, nu), zero)
        self._comps = comps
        self._pairs = [(mu, nu) for mu in range(1, self.n + 1) for nu in range(mu, self.n + 1)]
        self._d1 = None
        self._d2 = None

    def component(self, mu: int, nu: int) -> ScalarField:
        """g_{mu nu} (1-based, symmetric access)."""
        key = (mu, nu) if mu <= nu else (nu, mu)
        return self._comps[key]

    # -- evaluation ------------------------------------------------------------

    def value(self, x) -> np.ndarray:
        """Component matrix, shape ``x.shape[:-1] + (n, n)``."""
        x = np.asarray(x, dtype=float)
        vals = evaluate_fields([self._comps[p] for p in self._pairs], x)
        out = np.empty(x.shape[:-1] + (self.n, self.n))
        for k, (mu, nu) in enumerate(self._pairs):
            out[..., mu - 1, nu - 1] = vals[..., k]
            out[..., nu - 1, mu - 1] = vals[..., k]
        return out

    def _first_partials(self):
        if self._d1 is None:
            self._d1 = {
                (i, p): self._comps[p].partial(i)
                for i in range(1, self.n + 1)
                for p in self._pairs
            }
        return self._d1

    def _second_partials(self):
        if self._d2 is None:
            d1 = self._first_partials()
            self._d2 = {
                (i, j, p): d1[(i, p)].partial(j)
                for i in range(1, self.n + 1)
                for j in range(i, self.n + 1)
                for p in self._pairs
            }
        return self._d2

    def partial_value(self, x) -> np.ndarray:
        """All first partials; ``[..., i, mu, nu] = d_i g_{mu nu}`` (0-based)."""
        x = np.asarray(x, dtype=float)
        d1 = self._first_partials()
        n = self.n
        fields = [d1[(i, p)] for i in range(1, n + 1) for p in self._pairs]
        vals = evaluate_fields(fields, x)
        out = np.empty(x.shape[:-1] + (n, n, n))
        k = 0
        for i in range(n):
            for (mu, nu) in self._pairs:
                out[..., i, mu - 1, nu - 1] = vals[..., k]
                out[..., i, nu - 1, mu - 1] = vals[..., k]
                k += 1
        return out

    def second_partial_value(self, x) -> np.ndarray:
        """All second partials; ``[..., i, j, mu, nu] = d_i d_j g_{mu nu}``."""
        x = np.asarray(x, dtype=float)
        d2 = self._second_partials()
        n = self.n
        keys = [(i, j) for i in range(1, n + 1) for j in range(i, n + 1)]
        fields = [d2[(i, j, p)] for (i, j) in keys for p in self._pairs]
        vals = evaluate_fields(fields, x)
        out = np.empty(x.shape[:-1] + (n, n, n, n))
        k = 0
        for (i, j) in keys:
            for (mu, nu) in self._pairs:
                v = vals[..., k]
                out[..., i - 1, j - 1, mu - 1, nu - 1] = v
                out[..., i - 1, j - 1, nu - 1, mu - 1] = v
                out[..., j - 1, i - 1, mu - 1, nu - 1] = v
                out[..., j - 1, i - 1, nu - 1, mu - 1] = v
                k += 1
        return out

    def determinant(self, x) -> np.ndarray:
        return np.linalg.det(self.value(x))

    def inverse_value(self, x, det_floor: float = 1e-12) -> np.ndarray:
        g = self.value(x)
        det = np.linalg.det(g)
        bad = np.abs(det) < det_floor
        if np.any(bad):
            where = np.asarray(x, dtype=float).reshape(-1, self.n)[np.argmax(bad.reshape(-1))]
            raise SingularMetricError(
                f"metric singular (|det| < {det_floor:g}) at point {where.tolist()}"
            )
        return np.linalg.inv(g)

    def __repr__(self):
        nonzero = {k: str(v) for k, v in self._comps.items() if not v.is_zero}
        return f"MetricField(n={self.n}, {nonzero})"


# ---------------------------------------------------------------------------
# connections
# ---------------------------------------------------------------------------


class ConnectionField:
    """Torsion-free connection on an n-chart, evaluated pointwise.

    Subclasses provide ``gamma`` (component values ``Gamma^l_{jk}``) and
    ``gamma_partial`` (their exact coordinate partials ``d_mu Gamma^l_{jk}``).
    All implementations are symmetric in the lower index pair.
    """

    n: int

    def gamma(self, x) -> np.ndarray:
        """Values, shape ``x.shape[:-1] + (n, n, n)`` indexed ``[l, j, k]``."""
        raise NotImplementedError

    def gamma_partial(self, x) -> np.ndarray:
        """Partials, shape ``x.shape[:-1] + (n, n, n, n)``, ``[mu, l, j, k]``."""
        raise NotImplementedError


class SymbolicConnection(ConnectionField):
    """Connection with explicit ScalarField components, e.g. a base connection."""

    def __init__(self, n: int, components: Mapping[Tuple[int, int, int], object] = ()):
        self.n = n
        comps = {}
        for (l, j, k), value in dict(components).items():
            if not all(1 <= idx <= n for idx in (l, j, k)):
                raise IndexError(f"connection index ({l},{j},{k}) out of range 1..{n}")
            key = (l, j, k) if j <= k else (l, k, j)
            f = as_field(value, n)
            if key in comps and not comps[key].same_expression(f):
                raise ValueError(f"conflicting entries for symmetric pair {key}")
            comps[key] = f
        zero = _zero(n)
        for l in range(1, n + 1):
            for j in range(1, n + 1):
                for k in range(j, n + 1):
                    comps.setdefault((l, j, k), zero)
        self._comps = comps
        self._keys = sorted(comps)
        self._d1 = None

    @classmethod
    def zero(cls, n: int) -> "SymbolicConnection":
        return cls(n, {})

    def component(self, l: int, j: int, k: int) -> ScalarField:
        key = (l, j, k) if j <= k else (l, k, j)
        return self._comps[key]

    def gamma(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        vals = evaluate_fields([self._comps[k] for k in self._keys], x)
        out = np.empty(x.shape[:-1] + (self.n,) * 3)
        for idx, (l, j, k) in enumerate(self._keys):
            out[..., l - 1, j - 1, k - 1] = vals[..., idx]
            out[..., l - 1, k - 1, j - 1] = vals[..., idx]
        return out

    def gamma_partial(self, x) -> np.ndarray:
        if self._d1 is None:
            self._d1 = {
                (mu, key): self._comps[key].partial(mu)
                for mu in range(1, self.n + 1)
                for key in self._keys
            }
        x = np.asarray(x, dtype=float)
        fields = [self._d1[(mu, key)] for mu in range(1, self.n + 1) for key in self._keys]
        vals = evaluate_fields(fields, x)
        out = np.empty(x.shape[:-1] + (self.n,) * 4)
        idx = 0
        for mu in range(self.n):
            for (l, j, k) in self._keys:
                out[..., mu, l - 1, j - 1, k - 1] = vals[..., idx]
                out[..., mu, l - 1, k - 1, j - 1] = vals[..., idx]
                idx += 1
        return out

    def substitute(self, assignments) -> "SymbolicConnection":
        comps = {key: f.substitute(assignments) for key, f in self._comps.items()}
        return SymbolicConnection(self.n, comps)

    def max_abs(self, x) -> float:
        return float(np.max(np.abs(self.gamma(x))))


class LeviCivitaConnection(ConnectionField):
    """Levi-Civita connection of a metric.

    Component values come from the standard formula

        Gamma^l_{jk} = (1/2) g^{lm} (d_j g_{mk} + d_k g_{jm} - d_m g_{jk}),

    with the partials of g taken symbolically first and the inverse metric
    solved numerically at each point.  ``gamma_partial`` differentiates the
    same formula exactly, using d(g^{-1}) = -g^{-1} (dg) g^{-1} and the
    symbolic second partials of g.
    """

    def __init__(self, metric: MetricField, det_floor: float = 1e-12):
        self.metric = metric
        self.n = metric.n
        self.det_floor = det_floor

    def _lowered(self, dg: np.ndarray) -> np.ndarray:
        # Gamma_{m,jk} = (1/2)(d_j g_{mk} + d_k g_{jm} - d_m g_{jk})
        t1 = np.einsum("...jmk->...mjk", dg)
        t2 = np.einsum("...kjm->...mjk", dg)
        return 0.5 * (t1 + t2 - dg)

    def gamma(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        ginv = self.metric.inverse_value(x, self.det_floor)
        dg = self.metric.partial_value(x)
        return np.einsum("...lm,...mjk->...ljk", ginv, self._lowered(dg))

    def gamma_partial(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        ginv = self.metric.inverse_value(x, self.det_floor)
        dg = self.metric.partial_value(x)
        d2g = self.metric.second_partial_value(x)
        low = self._lowered(dg)
        dlow = 0.5 * (
            np.einsum("...ujmk->...umjk", d2g)
            + np.einsum("...ukjm->...umjk", d2g)
            - d2g
        )
        dginv = -np.einsum("...ls,...ust,...tm->...ulm", ginv, dg, ginv)
        return np.einsum("...ulm,...mjk->...uljk", dginv, low) + np.einsum(
            "...lm,...umjk->...uljk", ginv, dlow
        )


class RestrictedConnection(ConnectionField):
    """A connection on the leaf space of a trailing-coordinate span.

    Evaluates the parent's leading components with the trailing coordinates
    pinned to fixed values (zero by default); only meaningful when the parent
    passes the projectability check, which makes the choice immaterial.
    """

    def __init__(self, parent: ConnectionField, keep: int, trailing_values=None):
        if not 0 < keep < parent.n:
            raise ValueError("leaf dimension must satisfy 0 < keep < n")
        self.parent = parent
        self.n = keep
        pad = np.zeros(parent.n - keep) if trailing_values is None else np.asarray(trailing_values, float)
        if pad.shape != (parent.n - keep,):
            raise ValueError("trailing_values must have length n - keep")
        self.pad = pad

    def _embed(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        pad = np.broadcast_to(self.pad, y.shape[:-1] + self.pad.shape)
        return np.concatenate([y, pad], axis=-1)

    def gamma(self, y) -> np.ndarray:
        m = self.n
        return self.parent.gamma(self._embed(y))[..., :m, :m, :m]

    def gamma_partial(self, y) -> np.ndarray:
        m = self.n
        return self.parent.gamma_partial(self._embed(y))[..., :m, :m, :m, :m]


def christoffel(g: MetricField, det_floor: float = 1e-12) -> LeviCivitaConnection:
    """Levi-Civita connection of ``g`` (torsion-free, metric-compatible)."""
    return LeviCivitaConnection(g, det_floor)


# ---------------------------------------------------------------------------
# curvature
# ---------------------------------------------------------------------------


@dataclass
class CurvatureValue:
    """Curvature components at one point; ``components[i,j,k,l] = R_{ijk}{}^l``."""

    point: np.ndarray
    components: np.ndarray
    lowered: Optional[np.ndarray] = None


def curvature_components(conn: ConnectionField, x) -> np.ndarray:
    """R_{ijk}{}^l at batched points, shape ``x.shape[:-1] + (n,n,n,n)``."""
    G = conn.gamma(x)
    dG = conn.gamma_partial(x)
    # A[i,j,k,l] = d_j Gamma^l_{ik} + Gamma^l_{jp} Gamma^p_{ik}
    A = np.einsum("...jlik->...ijkl", dG) + np.einsum("...ljp,...pik->...ijkl", G, G)
    return A - np.einsum("...ijkl->...jikl", A)


def curvature(conn: ConnectionField, x) -> CurvatureValue:
    """Curvature of a torsion-free connection at the point ``x``."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("curvature() takes a single point; use curvature_components for batches")
    return CurvatureValue(point=x, components=curvature_components(conn, x))


def lower_curvature(value: CurvatureValue, g: Union[MetricField, np.ndarray]) -> np.ndarray:
    """(0,4) form ``R_{ijkl} = R_{ijk}{}^m g_{ml}`` at the value's point."""
    gmat = g.value(value.point) if isinstance(g, MetricField) else np.asarray(g, dtype=float)
    lowered = np.einsum("ijkm,ml->ijkl", value.components, gmat)
    value.lowered = lowered
    return lowered


def covariant_derivative_vector(conn: ConnectionField, w, v, x) -> np.ndarray:
    """Components of ``nabla_v w`` at batched points.

    ``w`` and ``v`` are length-n sequences of ScalarFields (vector-field
    components in chart coordinates); the result has shape
    ``x.shape[:-1] + (n,)`` with entries ``v^mu (d_mu w^lam + Gamma^lam_{mu nu} w^nu)``.
    """
    x = np.asarray(x, dtype=float)
    n = conn.n
    wv = evaluate_fields(list(w), x)
    vv = evaluate_fields(list(v), x)
    dw = evaluate_fields([[comp.partial(mu) for comp in w] for mu in range(1, n + 1)], x)
    G = conn.gamma(x)
    return np.einsum("...m,...ml->...l", vv, dw) + np.einsum(
        "...m,...lmn,...n->...l", vv, G, wv
    )


def covariant_derivative_metric_residual(g: MetricField, conn: ConnectionField, x):
    """max |d_mu g_{nu rho} - Gamma^s_{mu nu} g_{s rho} - Gamma^s_{mu rho} g_{nu s}|.

    Vanishes identically for the Levi-Civita connection of ``g``; accepts a
    single point (returns float) or a batch (returns per-point array).
    """
    x = np.asarray(x, dtype=float)
    dg = g.partial_value(x)
    gv = g.value(x)
    G = conn.gamma(x)
    grad = (
        dg
        - np.einsum("...smn,...sr->...mnr", G, gv)
        - np.einsum("...smr,...ns->...mnr", G, gv)
    )
    res = np.max(np.abs(grad), axis=(-1, -2, -3))
    return float(res) if res.ndim == 0 else res
