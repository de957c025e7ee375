"""Transactional SQL persistence for simulation results.

Two interchangeable engines: an embedded single-file database (SQLite,
always available) and a networked relational server (PostgreSQL, driver
loaded lazily).  Correctness under concurrent workers relies only on the
engine's transactional guarantees; a row is either fully stored or absent.

DSN forms:
  results.db                      embedded file (also sqlite:///path form)
  postgresql://user@host/dbname   server backend
"""

from __future__ import annotations

import re
import sqlite3
import time
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Optional

from .blob import deserialize_blob, serialize_blob
from .paramspace import Configuration, ParamSpace

__all__ = [
    "ConstraintViolationError",
    "FieldDef",
    "Reservation",
    "ResultRecord",
    "ResultSchema",
    "RecordMeta",
    "RetryPolicy",
    "SchemaMismatchError",
    "StorageError",
    "StoreHandle",
    "StoreUnavailableError",
    "TransientStorageError",
    "connect",
]

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_FIELD_KINDS = ("text", "float", "integer", "blob")
_FIELD_ROLES = ("config", "outcome")
_META_COLUMNS = ("seed", "worker_id", "elapsed_time", "created_at")
_RESERVED_COLUMNS = set(_META_COLUMNS) | {"id"}
_U64 = 2**64


class StorageError(Exception):
    """Base class for storage failures."""


class TransientStorageError(StorageError):
    """A failure worth retrying (connection dropped, lock contention)."""


class StoreUnavailableError(StorageError):
    """Retries exhausted; ``pending_record`` carries any unsaved record."""

    def __init__(self, message, pending_record=None):
        super().__init__(message)
        self.pending_record = pending_record


class SchemaMismatchError(StorageError):
    """An existing table does not match the declared schema."""


class ConstraintViolationError(StorageError):
    """The engine rejected a row (NOT NULL, bad value); not retryable."""


@dataclass(frozen=True)
class FieldDef:
    name: str
    kind: str  # text | float | integer | blob
    role: str  # config | outcome

    def __post_init__(self):
        if not _IDENT_RE.match(self.name):
            raise ValueError(f"field name {self.name!r} is not a valid identifier")
        if self.name in _RESERVED_COLUMNS:
            raise ValueError(f"field name {self.name!r} collides with a metadata column")
        if self.kind not in _FIELD_KINDS:
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.role not in _FIELD_ROLES:
            raise ValueError(f"unknown field role {self.role!r}")
        if self.role == "config" and self.kind == "blob":
            raise ValueError(f"config field {self.name!r} cannot be a blob")


@dataclass(frozen=True)
class ResultSchema:
    """Typed declaration of one result table."""

    table_name: str
    fields: tuple[FieldDef, ...]

    def __post_init__(self):
        if not _IDENT_RE.match(self.table_name):
            raise ValueError(f"table name {self.table_name!r} is not a valid identifier")
        names = [f.name for f in self.fields]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate field names in schema: {names}")
        if not any(f.role == "outcome" for f in self.fields):
            raise ValueError("schema needs at least one outcome field")

    @classmethod
    def build(cls, table_name: str, config: Mapping[str, str], outcomes: Mapping[str, str]):
        """Shorthand: ``build("results", config={"method": "text"}, outcomes={"score": "float"})``."""
        fields = [FieldDef(n, k, "config") for n, k in config.items()]
        fields += [FieldDef(n, k, "outcome") for n, k in outcomes.items()]
        return cls(table_name=table_name, fields=tuple(fields))

    @property
    def config_fields(self) -> tuple[FieldDef, ...]:
        return tuple(f for f in self.fields if f.role == "config")

    @property
    def outcome_fields(self) -> tuple[FieldDef, ...]:
        return tuple(f for f in self.fields if f.role == "outcome")

    def field(self, name: str) -> FieldDef:
        for f in self.fields:
            if f.name == name:
                return f
        raise KeyError(name)

    @property
    def reservations_table(self) -> str:
        return f"{self.table_name}_rsv"

    def validate_space(self, space: ParamSpace) -> None:
        """Every axis must appear as a config field of matching kind."""
        by_name = {f.name: f for f in self.config_fields}
        for name, values in space.axes:
            f = by_name.get(name)
            if f is None:
                raise SchemaMismatchError(f"axis {name!r} has no config field in the schema")
            expected = _kind_for_value(values[0])
            if f.kind != expected:
                raise SchemaMismatchError(
                    f"axis {name!r} holds {expected} values but the schema declares {f.kind}"
                )


def _kind_for_value(v) -> str:
    if isinstance(v, bool):
        return "integer"
    if isinstance(v, int):
        return "integer"
    if isinstance(v, float):
        return "float"
    if isinstance(v, str):
        return "text"
    raise ValueError(f"no storable kind for {type(v).__name__}")


@dataclass(frozen=True)
class RecordMeta:
    seed: int
    elapsed_time: float
    worker_id: str
    created_at: datetime

    def __post_init__(self):
        if not 0 <= self.seed < _U64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if not self.elapsed_time >= 0.0:
            raise ValueError(f"elapsed_time must be >= 0, got {self.elapsed_time}")


@dataclass(frozen=True)
class ResultRecord:
    """One completed replication: configuration, outcomes, audit metadata."""

    config: Configuration
    outcomes: dict
    meta: RecordMeta


@dataclass(frozen=True)
class RetryPolicy:
    base_backoff: float = 0.5
    max_backoff: float = 30.0
    max_wait: float = 3600.0

    def __post_init__(self):
        if self.base_backoff <= 0.0:
            raise ValueError("base_backoff must be > 0")


@dataclass(frozen=True)
class Reservation:
    """Transactional lease on one replication slot (reserve mode)."""

    config: Configuration
    holder: str
    lease_expiry: float  # epoch seconds, UTC
    row_id: int


def validate_record(schema: ResultSchema, record: ResultRecord) -> None:
    expected = {f.name for f in schema.outcome_fields}
    got = set(record.outcomes)
    if got != expected:
        raise ValueError(
            f"outcome fields {sorted(got)} do not match schema outcomes {sorted(expected)}"
        )
    for f in schema.outcome_fields:
        v = record.outcomes[f.name]
        if f.kind == "text":
            if not isinstance(v, str):
                raise ValueError(f"outcome {f.name!r} must be text, got {type(v).__name__}")
        elif f.kind == "integer":
            if not isinstance(v, int) or isinstance(v, bool):
                raise ValueError(f"outcome {f.name!r} must be an integer, got {v!r}")
        elif f.kind == "float":
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ValueError(f"outcome {f.name!r} must be numeric, got {v!r}")
            if v != v or v in (float("inf"), float("-inf")):
                raise ValueError(f"outcome {f.name!r} must be finite, got {v!r}")
        # blob values are validated by serialize_blob at write time


def _to_signed64(u: int) -> int:
    return u - _U64 if u >= _U64 // 2 else u


def _to_unsigned64(s: int) -> int:
    return s + _U64 if s < 0 else s


def _normalize_config_value(kind: str, v):
    if kind == "integer":
        return int(v)
    if kind == "float":
        return float(v)
    if kind == "text":
        return str(v)
    raise ValueError(f"config fields cannot be {kind}")


class _SqliteBackend:
    """Embedded single-file engine."""

    name = "sqlite"
    placeholder = "?"
    pk_decl = "id INTEGER PRIMARY KEY AUTOINCREMENT"

    _TYPES = {"text": "TEXT", "float": "REAL", "integer": "INTEGER", "blob": "BLOB"}
    _META_TYPES = {"seed": "BIGINT", "worker_id": "TEXT", "elapsed_time": "REAL",
                   "created_at": "TIMESTAMP"}
    _PERMANENT_MARKERS = (
        "syntax error", "no such table", "no such column", "has no column",
        "readonly database", "datatype mismatch", "unable to open database file",
    )

    def __init__(self, path: str):
        self.path = path

    def connect(self):
        # a file that cannot be opened is a configuration problem, not an
        # outage worth waiting out, so this fails fast
        try:
            conn = sqlite3.connect(self.path, timeout=30.0, check_same_thread=False)
            conn.isolation_level = None  # explicit transaction control
            conn.execute("PRAGMA journal_mode=WAL")
            conn.execute("PRAGMA synchronous=NORMAL")
            conn.execute("PRAGMA busy_timeout=30000")
            return conn
        except sqlite3.Error as exc:
            raise StorageError(f"cannot open database file {self.path!r}: {exc}") from exc

    def is_transient(self, exc: Exception) -> bool:
        if isinstance(exc, sqlite3.IntegrityError):
            return False
        if isinstance(exc, sqlite3.OperationalError):
            msg = str(exc).lower()
            return not any(marker in msg for marker in self._PERMANENT_MARKERS)
        return isinstance(exc, (sqlite3.InterfaceError, sqlite3.DatabaseError))

    def is_constraint(self, exc: Exception) -> bool:
        return isinstance(exc, sqlite3.IntegrityError)

    def column_type(self, kind: str) -> str:
        return self._TYPES[kind]

    def meta_column_type(self, column: str) -> str:
        return self._META_TYPES[column]

    def table_columns(self, conn, table: str) -> list[tuple[str, str]]:
        rows = conn.execute(f"PRAGMA table_info({table})").fetchall()
        return [(r[1], str(r[2]).upper()) for r in rows]

    def begin_exclusive(self, conn, tables) -> None:
        conn.execute("BEGIN IMMEDIATE")

    def begin(self, conn) -> None:
        conn.execute("BEGIN")


class _PostgresBackend:
    """Networked relational server engine (driver imported lazily)."""

    name = "postgres"
    placeholder = "%s"
    pk_decl = "id BIGSERIAL PRIMARY KEY"

    _TYPES = {"text": "TEXT", "float": "DOUBLE PRECISION", "integer": "BIGINT", "blob": "BYTEA"}
    _META_TYPES = {"seed": "BIGINT", "worker_id": "TEXT", "elapsed_time": "DOUBLE PRECISION",
                   "created_at": "TIMESTAMPTZ"}

    def __init__(self, dsn: str):
        self.dsn = dsn
        try:
            import psycopg2  # noqa: F401
            import psycopg2.errors
            self._driver = psycopg2
        except ImportError as exc:
            raise StorageError(
                "the server backend needs the psycopg2 driver "
                "(install the 'postgres' extra)"
            ) from exc

    def connect(self):
        try:
            conn = self._driver.connect(self.dsn)
            conn.autocommit = True
            return conn
        except self._driver.Error as exc:
            raise TransientStorageError(f"cannot reach server: {exc}") from exc

    def is_transient(self, exc: Exception) -> bool:
        if isinstance(exc, self._driver.errors.lookup("40001")):  # serialization failure
            return True
        return isinstance(exc, (self._driver.OperationalError, self._driver.InterfaceError))

    def is_constraint(self, exc: Exception) -> bool:
        return isinstance(exc, self._driver.IntegrityError)

    def column_type(self, kind: str) -> str:
        return self._TYPES[kind]

    def meta_column_type(self, column: str) -> str:
        return self._META_TYPES[column]

    def table_columns(self, conn, table: str) -> list[tuple[str, str]]:
        cur = conn.cursor()
        cur.execute(
            "SELECT column_name, data_type FROM information_schema.columns "
            "WHERE table_name = %s ORDER BY ordinal_position",
            (table.lower(),),
        )
        normalize = {
            "double precision": "DOUBLE PRECISION", "bigint": "BIGINT", "text": "TEXT",
            "bytea": "BYTEA", "timestamp with time zone": "TIMESTAMPTZ",
        }
        return [(r[0], normalize.get(r[1], r[1].upper())) for r in cur.fetchall()]

    def begin_exclusive(self, conn, tables) -> None:
        cur = conn.cursor()
        cur.execute("BEGIN")
        for t in tables:
            cur.execute(f"LOCK TABLE {t} IN EXCLUSIVE MODE")

    def begin(self, conn) -> None:
        conn.cursor().execute("BEGIN")


def connect(dsn: str, retry_policy: RetryPolicy | None = None, *,
            clock: Callable[[], float] = time.time,
            sleep: Callable[[float], None] = time.sleep) -> "StoreHandle":
    """Open a store handle for a DSN (file path, sqlite:// URL, or postgres URL)."""
    if not dsn:
        raise ValueError("empty DSN")
    if dsn.startswith(("postgres://", "postgresql://")):
        backend = _PostgresBackend(dsn)
    elif dsn.startswith("sqlite:///"):
        backend = _SqliteBackend(dsn[len("sqlite:///"):])
    elif dsn.startswith("sqlite://"):
        backend = _SqliteBackend(dsn[len("sqlite://"):])
    else:
        backend = _SqliteBackend(dsn)
    return StoreHandle(backend, dsn, retry_policy or RetryPolicy(), clock=clock, sleep=sleep)


class StoreHandle:
    """One connection to a result store; use from one thread at a time.

    All public operations retry transient connection failures with
    exponential backoff (``retry_policy``), so a computed result held in
    memory survives a temporary server outage.
    """

    def __init__(self, backend, dsn: str, retry_policy: RetryPolicy, *,
                 clock=time.time, sleep=time.sleep):
        self.backend = backend
        self.dsn = dsn
        self.retry_policy = retry_policy
        self._clock = clock
        self._sleep = sleep
        self._conn = None

    # -- connection plumbing ------------------------------------------------

    def _connection(self):
        if self._conn is None:
            self._conn = self.backend.connect()
        return self._conn

    def _reset_connection(self):
        if self._conn is not None:
            try:
                self._conn.close()
            except Exception:
                pass
            self._conn = None

    def close(self):
        self._reset_connection()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- retry loop ----------------------------------------------------------

    def with_retry(self, action: Callable[[], object]):
        """Run ``action`` now, retrying transient failures with exponential backoff.

        The action must be idempotent or transactional.  Backoff starts at
        ``base_backoff`` seconds and doubles up to ``max_backoff``; after
        ``max_wait`` seconds of waiting the last transient error is raised
        as :class:`StoreUnavailableError`.
        """
        deadline = self._clock() + self.retry_policy.max_wait
        backoff = self.retry_policy.base_backoff
        while True:
            try:
                return action()
            except Exception as exc:
                if not self._is_transient(exc):
                    raise
                self._reset_connection()
                now = self._clock()
                if now >= deadline:
                    raise StoreUnavailableError(
                        f"store still unavailable after {self.retry_policy.max_wait}s: {exc}"
                    ) from exc
                self._sleep(min(backoff, deadline - now))
                backoff = min(backoff * 2.0, self.retry_policy.max_backoff)

    def _is_transient(self, exc: Exception) -> bool:
        if isinstance(exc, TransientStorageError):
            return True
        if isinstance(exc, StorageError):
            return False
        return self.backend.is_transient(exc)

    def _run(self, fn):
        """Retry wrapper that maps constraint violations to a fatal error."""
        def attempt():
            try:
                return fn(self._connection())
            except Exception as exc:
                if not isinstance(exc, StorageError) and self.backend.is_constraint(exc):
                    raise ConstraintViolationError(str(exc)) from exc
                raise
        return self.with_retry(attempt)

    # -- DDL -----------------------------------------------------------------

    def init_table(self, schema: ResultSchema) -> None:
        """Create the result and reservation tables; verify them if they exist."""
        self._run(lambda conn: self._init_tables(conn, schema))

    def _expected_columns(self, schema: ResultSchema) -> list[tuple[str, str]]:
        cols = [("id", None)]
        cols += [(f.name, self.backend.column_type(f.kind)) for f in schema.fields]
        cols += [(m, self.backend.meta_column_type(m)) for m in _META_COLUMNS]
        return cols

    def _init_tables(self, conn, schema: ResultSchema) -> None:
        existing = self.backend.table_columns(conn, schema.table_name)
        if existing:
            self._verify_columns(schema.table_name, existing, self._expected_columns(schema))
        else:
            decls = [self.backend.pk_decl]
            decls += [
                f"{f.name} {self.backend.column_type(f.kind)} NOT NULL" for f in schema.fields
            ]
            decls += [
                f"{m} {self.backend.meta_column_type(m)} NOT NULL" for m in _META_COLUMNS
            ]
            conn_execute(conn, f"CREATE TABLE IF NOT EXISTS {schema.table_name} ({', '.join(decls)})")

        rsv = schema.reservations_table
        if not self.backend.table_columns(conn, rsv):
            decls = [self.backend.pk_decl]
            decls += [
                f"{f.name} {self.backend.column_type(f.kind)} NOT NULL"
                for f in schema.config_fields
            ]
            decls += ["holder TEXT NOT NULL",
                      f"lease_expiry {self.backend.column_type('float')} NOT NULL"]
            conn_execute(conn, f"CREATE TABLE IF NOT EXISTS {rsv} ({', '.join(decls)})")

    def _verify_columns(self, table, existing, expected) -> None:
        have = {name: type_ for name, type_ in existing}
        for name, type_ in expected:
            if name not in have:
                raise SchemaMismatchError(f"table {table!r} is missing column {name!r}")
            if type_ is not None and have[name] != type_:
                raise SchemaMismatchError(
                    f"table {table!r} column {name!r} is {have[name]}, expected {type_}"
                )
        extra = set(have) - {name for name, _ in expected}
        if extra:
            raise SchemaMismatchError(f"table {table!r} has unexpected columns {sorted(extra)}")

    def table_exists(self, table_name: str) -> bool:
        return bool(self._run(lambda conn: self.backend.table_columns(conn, table_name)))

    # -- writes ----------------------------------------------------------------

    def insert_result(self, schema: ResultSchema, record: ResultRecord) -> None:
        """Durably store one record in a single transaction (all columns or none)."""
        validate_record(schema, record)
        sql, params = self._insert_statement(schema, record)
        try:
            self._run(lambda conn: conn_execute(conn, sql, params))
        except StoreUnavailableError as exc:
            exc.pending_record = record
            raise

    def _insert_statement(self, schema: ResultSchema, record: ResultRecord):
        names = [f.name for f in schema.fields] + list(_META_COLUMNS)
        params = []
        for f in schema.config_fields:
            params.append(_normalize_config_value(f.kind, record.config[f.name]))
        for f in schema.outcome_fields:
            v = record.outcomes[f.name]
            if f.kind == "blob":
                params.append(serialize_blob(v))
            elif f.kind == "float":
                params.append(float(v))
            else:
                params.append(v)
        meta = record.meta
        params += [_to_signed64(meta.seed), meta.worker_id, float(meta.elapsed_time),
                   meta.created_at.isoformat()]
        ph = ", ".join([self.backend.placeholder] * len(names))
        sql = f"INSERT INTO {schema.table_name} ({', '.join(names)}) VALUES ({ph})"
        return sql, params

    # -- reads -----------------------------------------------------------------

    def count_results(self, schema: ResultSchema, config: Configuration) -> int:
        """Completed replications stored for one configuration."""
        where, params = self._config_where(schema, config.as_dict())
        sql = f"SELECT COUNT(*) FROM {schema.table_name}{where}"
        return int(self._run(lambda conn: conn_fetch(conn, sql, params))[0][0])

    def count_all(self, schema: ResultSchema, configs: list[Configuration], *,
                  include_reservations: bool = False) -> dict[Configuration, int]:
        """Completed counts per configuration (optionally plus live reservations).

        Rows whose config columns match none of ``configs`` are ignored, so
        a store shared with a wider parameter space only counts its own grid.
        """
        cols = [f.name for f in schema.config_fields]
        col_list = ", ".join(cols)
        sql = f"SELECT {col_list}, COUNT(*) FROM {schema.table_name} GROUP BY {col_list}"
        rows = self._run(lambda conn: conn_fetch(conn, sql, []))
        table = {tuple(r[:-1]): int(r[-1]) for r in rows}
        if include_reservations:
            now = self._clock()
            rsql = (
                f"SELECT {col_list}, COUNT(*) FROM {schema.reservations_table} "
                f"WHERE lease_expiry > {self.backend.placeholder} GROUP BY {col_list}"
            )
            for r in self._run(lambda conn: conn_fetch(conn, rsql, [now])):
                key = tuple(r[:-1])
                table[key] = table.get(key, 0) + int(r[-1])
        out = {}
        for config in configs:
            key = tuple(
                _normalize_config_value(f.kind, config[f.name]) for f in schema.config_fields
            )
            out[config] = table.get(key, 0)
        return out

    def read_results(self, schema: ResultSchema,
                     where: Optional[Mapping | Configuration] = None) -> list[ResultRecord]:
        """All stored records (insertion order), blob fields deserialized.

        ``where`` may be a partial mapping of config fields to values.
        """
        names = [f.name for f in schema.fields] + list(_META_COLUMNS)
        filt = where.as_dict() if isinstance(where, Configuration) else where
        clause, params = self._config_where(schema, filt) if filt else ("", [])
        sql = f"SELECT {', '.join(names)} FROM {schema.table_name}{clause} ORDER BY id"
        rows = self._run(lambda conn: conn_fetch(conn, sql, params))
        out = []
        for row in rows:
            values = dict(zip(names, row))
            config = Configuration(tuple(
                (f.name, values[f.name]) for f in schema.config_fields
            ))
            outcomes = {}
            for f in schema.outcome_fields:
                v = values[f.name]
                outcomes[f.name] = deserialize_blob(v) if f.kind == "blob" else v
            created = values["created_at"]
            if isinstance(created, str):
                created = datetime.fromisoformat(created)
            meta = RecordMeta(
                seed=_to_unsigned64(int(values["seed"])),
                elapsed_time=float(values["elapsed_time"]),
                worker_id=values["worker_id"],
                created_at=created,
            )
            out.append(ResultRecord(config=config, outcomes=outcomes, meta=meta))
        return out

    def _config_where(self, schema: ResultSchema, filt: Mapping) -> tuple[str, list]:
        clauses = []
        params = []
        for f in schema.config_fields:
            if f.name in filt:
                clauses.append(f"{f.name} = {self.backend.placeholder}")
                params.append(_normalize_config_value(f.kind, filt[f.name]))
        unknown = set(filt) - {f.name for f in schema.config_fields}
        if unknown:
            raise ValueError(f"unknown config fields in filter: {sorted(unknown)}")
        if not clauses:
            return "", []
        return " WHERE " + " AND ".join(clauses), params

    # -- reservations (reserve mode) --------------------------------------------

    def try_reserve(self, schema: ResultSchema, config: Configuration, *,
                    holder: str, lease_seconds: float, max_count: int) -> Reservation | None:
        """Atomically claim one replication slot; None when the slot race is lost.

        Inside one exclusive transaction: count completed rows plus live
        reservations; insert a lease only if the total is below max_count.
        """
        return self._run(lambda conn: self._try_reserve(
            conn, schema, config, holder, lease_seconds, max_count))

    def _try_reserve(self, conn, schema, config, holder, lease_seconds, max_count):
        rsv = schema.reservations_table
        cols = [f.name for f in schema.config_fields]
        values = [_normalize_config_value(f.kind, config[f.name]) for f in schema.config_fields]
        match = " AND ".join(f"{c} = {self.backend.placeholder}" for c in cols)
        now = self._clock()
        self.backend.begin_exclusive(conn, (rsv,))
        try:
            done = conn_fetch(
                conn, f"SELECT COUNT(*) FROM {schema.table_name} WHERE {match}", values
            )[0][0]
            live = conn_fetch(
                conn,
                f"SELECT COUNT(*) FROM {rsv} WHERE {match} "
                f"AND lease_expiry > {self.backend.placeholder}",
                values + [now],
            )[0][0]
            if int(done) + int(live) >= max_count:
                conn_execute(conn, "ROLLBACK")
                return None
            # clear any stale leases for this config while we hold the lock
            conn_execute(
                conn,
                f"DELETE FROM {rsv} WHERE {match} AND lease_expiry <= {self.backend.placeholder}",
                values + [now],
            )
            expiry = now + lease_seconds
            ph = ", ".join([self.backend.placeholder] * (len(cols) + 2))
            cur = conn_execute(
                conn,
                f"INSERT INTO {rsv} ({', '.join(cols)}, holder, lease_expiry) VALUES ({ph})",
                values + [holder, expiry],
            )
            row_id = self._last_insert_id(conn, cur, rsv)
            conn_execute(conn, "COMMIT")
            return Reservation(config=config, holder=holder, lease_expiry=expiry, row_id=row_id)
        except Exception:
            try:
                conn_execute(conn, "ROLLBACK")
            except Exception:
                pass
            raise

    def _last_insert_id(self, conn, cur, table: str) -> int:
        if self.backend.name == "sqlite":
            return int(cur.lastrowid)
        return int(conn_fetch(conn, f"SELECT MAX(id) FROM {table}", [])[0][0])

    def release_reservation(self, schema: ResultSchema, reservation: Reservation) -> None:
        sql = f"DELETE FROM {schema.reservations_table} WHERE id = {self.backend.placeholder}"
        self._run(lambda conn: conn_execute(conn, sql, [reservation.row_id]))

    def insert_and_release(self, schema: ResultSchema, record: ResultRecord,
                           reservation: Reservation) -> None:
        """Store the completed row and drop its lease in one transaction."""
        validate_record(schema, record)
        sql, params = self._insert_statement(schema, record)
        drop = f"DELETE FROM {schema.reservations_table} WHERE id = {self.backend.placeholder}"

        def txn(conn):
            self.backend.begin(conn)
            try:
                conn_execute(conn, sql, params)
                conn_execute(conn, drop, [reservation.row_id])
                conn_execute(conn, "COMMIT")
            except Exception:
                try:
                    conn_execute(conn, "ROLLBACK")
                except Exception:
                    pass
                raise

        try:
            self._run(txn)
        except StoreUnavailableError as exc:
            exc.pending_record = record
            raise

    # -- maintenance -------------------------------------------------------------

    def purge_table(self, schema: ResultSchema) -> None:
        """Delete all rows for the schema; missing tables are a no-op."""
        for table in (schema.table_name, schema.reservations_table):
            if self._run(lambda conn, t=table: self.backend.table_columns(conn, t)):
                self._run(lambda conn, t=table: conn_execute(conn, f"DELETE FROM {t}"))


def conn_execute(conn, sql: str, params=()):
    cur = conn.cursor()
    cur.execute(sql, tuple(params))
    return cur


def conn_fetch(conn, sql: str, params=()) -> list[tuple]:
    cur = conn.cursor()
    cur.execute(sql, tuple(params))
    return [tuple(r) for r in cur.fetchall()]


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


# exported for studies that want the default metadata filled in
def make_meta(seed: int, elapsed_time: float, worker_id: str) -> RecordMeta:
    return RecordMeta(seed=seed, elapsed_time=elapsed_time, worker_id=worker_id,
                      created_at=utc_now())
