"""Replication loop: pick an unsaturated configuration at random, simulate, persist.

Any number of workers (threads or processes, across machines) can run the
same study against one store; the database is the only shared state.  Two
claim disciplines:

  check-then-run  re-check counts before every replication; concurrent
                  workers can overshoot by at most (workers - 1) rows per
                  configuration, and extra rows are valid replications.
  reserve         take a transactional lease on a replication slot first;
                  final counts are exact as long as leases outlive the
                  simulation call.
"""

from __future__ import annotations

import hashlib
import socket
import os
import threading
import time
from collections.abc import Callable
from dataclasses import dataclass, field

from .paramspace import Configuration, ParamSpace, apply_filter, cartesian_product
from .statlib import Rng
from .storage import (
    Reservation,
    ResultRecord,
    ResultSchema,
    StoreHandle,
    make_meta,
)

__all__ = [
    "ReplicationError",
    "RunOptions",
    "RunReport",
    "SimulationFn",
    "default_worker_id",
    "derive_seed",
    "next_config",
    "run_replication",
    "run_study",
]

# A simulation function maps (configuration, seed) to outcome values.  It
# must be deterministic given both arguments and may include an
# "elapsed_time" entry to report its own fit/score timing.
SimulationFn = Callable[[Configuration, int], dict]

_MODES = ("check", "reserve")


class ReplicationError(RuntimeError):
    """A simulation call failed; carries (config, seed) so the run is reproducible."""

    def __init__(self, config: Configuration, seed: int, cause: BaseException):
        super().__init__(f"replication failed for {config} with seed {seed}: {cause!r}")
        self.config = config
        self.seed = seed


def default_worker_id() -> str:
    return f"{socket.gethostname()}-{os.getpid()}"


@dataclass(frozen=True)
class RunOptions:
    """Knobs for one worker's run."""

    max_count: int
    mode: str = "check"
    worker_id: str = field(default_factory=default_worker_id)
    master_seed: int = 0
    max_passes: int | None = None
    lease_seconds: float = 600.0

    def __post_init__(self):
        if self.max_count < 0:
            raise ValueError(f"max_count must be >= 0, got {self.max_count}")
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}, got {self.mode!r}")
        if self.lease_seconds <= 0.0:
            raise ValueError("lease_seconds must be > 0")


@dataclass
class RunReport:
    replications_done: int
    per_config_counts: dict[Configuration, int]


def derive_seed(master_seed: int, worker_id: str, counter: int, purpose: str = "replication") -> int:
    """Keyed 64-bit seed for one replication.

    Streams for distinct (worker_id, counter, purpose) tuples collide with
    probability 2^-64 per pair, so workers never need to coordinate seeds.
    """
    key = (master_seed & (2**64 - 1)).to_bytes(8, "big")
    h = hashlib.blake2b(digest_size=8, key=key)
    h.update(f"{purpose}\x00{worker_id}\x00{counter}".encode())
    return int.from_bytes(h.digest(), "big")


def next_config(store: StoreHandle, schema: ResultSchema, configs: list[Configuration],
                opts: RunOptions, rng: Rng) -> Configuration | None:
    """A uniformly random configuration still below max_count, or None when saturated.

    In reserve mode, live leases count toward saturation so workers spread
    across the remaining open slots.
    """
    counts = store.count_all(
        schema, configs, include_reservations=(opts.mode == "reserve")
    )
    open_configs = [c for c in configs if counts[c] < opts.max_count]
    if not open_configs:
        return None
    return open_configs[rng.randbelow(len(open_configs))]


def run_replication(fn: SimulationFn, config: Configuration, seed: int,
                    worker_id: str = "") -> ResultRecord:
    """Run one simulation call and wrap its outcome map into a record.

    ``elapsed_time`` reported by the function wins (it can time just the
    fit/score section); otherwise the whole call is timed.
    """
    start = time.perf_counter()
    try:
        outcomes = fn(config, seed)
    except Exception as exc:
        raise ReplicationError(config, seed, exc) from exc
    elapsed = time.perf_counter() - start
    if not isinstance(outcomes, dict):
        raise ReplicationError(
            config, seed, TypeError(f"simulation returned {type(outcomes).__name__}, expected dict")
        )
    outcomes = dict(outcomes)
    reported = outcomes.pop("elapsed_time", None)
    if reported is not None:
        elapsed = float(reported)
    return ResultRecord(
        config=config,
        outcomes=outcomes,
        meta=make_meta(seed=seed, elapsed_time=elapsed, worker_id=worker_id),
    )


def run_study(space: ParamSpace, schema: ResultSchema, fn: SimulationFn,
              store: StoreHandle, opts: RunOptions, *,
              config_filter: Callable[[Configuration], bool] | None = None,
              stop_event: threading.Event | None = None) -> RunReport:
    """Drive replications until every configuration reaches max_count.

    Each pass draws a random open configuration, runs the simulation with a
    fresh derived seed, and stores the result in one transaction.  Workers
    sharing the store need distinct ``worker_id`` values for their seed
    streams to be disjoint.
    """
    schema.validate_space(space)
    configs = cartesian_product(space)
    if config_filter is not None:
        configs = apply_filter(configs, config_filter)

    sched_rng = Rng(derive_seed(opts.master_seed, opts.worker_id, 0, purpose="scheduling"))
    counter = 0
    done = 0
    passes = 0
    while configs:
        if stop_event is not None and stop_event.is_set():
            break
        if opts.max_passes is not None and passes >= opts.max_passes:
            break
        passes += 1
        config = next_config(store, schema, configs, opts, sched_rng)
        if config is None:
            break

        reservation: Reservation | None = None
        if opts.mode == "reserve":
            reservation = store.try_reserve(
                schema, config, holder=opts.worker_id,
                lease_seconds=opts.lease_seconds, max_count=opts.max_count,
            )
            if reservation is None:
                continue  # lost the race for this slot; draw again

        seed = derive_seed(opts.master_seed, opts.worker_id, counter)
        counter += 1
        try:
            record = run_replication(fn, config, seed, worker_id=opts.worker_id)
        except Exception:
            if reservation is not None:
                store.release_reservation(schema, reservation)
            raise

        if reservation is not None:
            store.insert_and_release(schema, record, reservation)
        else:
            store.insert_result(schema, record)
        done += 1

    return RunReport(
        replications_done=done,
        per_config_counts=store.count_all(schema, configs) if configs else {},
    )
