"""Chart-level tensor calculus for adapted (Walker) metrics, extension
metrics on cotangent-type bundles, and projectability verification."""

from .chart import ChartSplit
from .distributions import (
    CheckReport,
    CheckResult,
    DistributionSpec,
    NotProjectableError,
    check_field_projectable,
    check_null,
    check_parallel,
    check_projectable,
    check_walker_form,
    curvature_condition,
    projectability_parts,
    projected_connection,
    restrict_connection,
    walker_projectability,
)
from .expr import (
    EvaluationError,
    ExpressionError,
    ExpressionSyntaxError,
    ScalarField,
    VariableRangeError,
    constant,
    coordinate,
    evaluate,
    parse_expression,
    partial,
)
from .extensions import (
    ExtensionSpec,
    OneFormSection,
    build_pullback_extension,
    build_riemann_extension,
    canonical_field_parallelism,
    canonical_vertical_field,
    fiber_translate_pullback,
    killing_operator,
    recover_vertical_metric,
    transformation_rule_residual,
    vertical_metric_fields,
)
from .sampling import sample_points
from .tensor import (
    ConnectionField,
    CurvatureValue,
    LeviCivitaConnection,
    MetricField,
    RestrictedConnection,
    SingularMetricError,
    SymbolicConnection,
    christoffel,
    covariant_derivative_metric_residual,
    covariant_derivative_vector,
    curvature,
    curvature_components,
    lower_curvature,
)
from .transport import (
    CurveSpec,
    TransportResult,
    euler_transport,
    parallel_transport,
    projection_commutes_residual,
)

__version__ = "0.1.0"
