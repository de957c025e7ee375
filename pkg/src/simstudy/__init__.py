"""Distributed Monte Carlo simulation studies on top of transactional SQL storage.

Declare a parameter space and a simulation function, run replications from
any number of workers against a shared SQLite file or PostgreSQL server,
then aggregate the stored rows into mean/standard-error tables, rejection
rates, and p-value ECDFs.
"""

from .analysis import (
    AggregateSummary,
    EcdfCurve,
    RejectionRateRow,
    aggregate,
    ecdf,
    export,
    rejection_rate,
    rejection_rows,
)
from .paramspace import (
    Configuration,
    InvalidSpaceError,
    ParamSpace,
    apply_filter,
    cartesian_product,
)
from .runner import (
    ReplicationError,
    RunOptions,
    RunReport,
    default_worker_id,
    derive_seed,
    run_replication,
    run_study,
)
from .storage import (
    FieldDef,
    RecordMeta,
    Reservation,
    ResultRecord,
    ResultSchema,
    RetryPolicy,
    SchemaMismatchError,
    StorageError,
    StoreHandle,
    StoreUnavailableError,
    TransientStorageError,
    connect,
)
from .studies import StudyDefinition, density_study, get_study, hypothesis_study, regression_study

__version__ = "0.1.0"

__all__ = [
    "AggregateSummary",
    "Configuration",
    "EcdfCurve",
    "FieldDef",
    "InvalidSpaceError",
    "ParamSpace",
    "RecordMeta",
    "RejectionRateRow",
    "ReplicationError",
    "Reservation",
    "ResultRecord",
    "ResultSchema",
    "RetryPolicy",
    "RunOptions",
    "RunReport",
    "SchemaMismatchError",
    "StorageError",
    "StoreHandle",
    "StoreUnavailableError",
    "StudyDefinition",
    "TransientStorageError",
    "aggregate",
    "apply_filter",
    "cartesian_product",
    "connect",
    "default_worker_id",
    "density_study",
    "derive_seed",
    "ecdf",
    "export",
    "get_study",
    "hypothesis_study",
    "regression_study",
    "rejection_rate",
    "rejection_rows",
    "run_replication",
    "run_study",
]
