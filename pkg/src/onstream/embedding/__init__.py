from .sampler import OnlineRowSampler, RowRecord, ridge_parameter, sampling_rate
from .sensitivity import (
    WeightedRowSet,
    online_sensitivity,
    ridge_leverage_closed_form,
    sensitivity_by_ascent,
)
from .span import IntegerRowBasis, float_span_residual
from .verify import (
    EmbeddingReport,
    SensitivityAuditReport,
    online_condition_number,
    sensitivity_sum_audit,
    verify_embedding,
)

__all__ = [
    "OnlineRowSampler",
    "RowRecord",
    "ridge_parameter",
    "sampling_rate",
    "WeightedRowSet",
    "online_sensitivity",
    "ridge_leverage_closed_form",
    "sensitivity_by_ascent",
    "IntegerRowBasis",
    "float_span_residual",
    "EmbeddingReport",
    "SensitivityAuditReport",
    "online_condition_number",
    "sensitivity_sum_audit",
    "verify_embedding",
]
