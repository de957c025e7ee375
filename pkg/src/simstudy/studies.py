"""Built-in example studies: regression scoring, two-sample tests, density estimation."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .paramspace import Configuration, ParamSpace
from .runner import SimulationFn
from .statlib import (
    BetaMixture,
    Rng,
    beta_mixture_pdf,
    integrated_squared_loss,
    kde_fit,
    kde_pdf,
    ks_test,
    lasso_fit,
    mann_whitney_test,
    ols_fit,
    predict,
    r2_score,
    sample_beta_mixture,
    select_bandwidth,
    welch_t_test,
)
from .storage import ResultSchema

__all__ = [
    "StudyDefinition",
    "density_study",
    "get_study",
    "hypothesis_study",
    "regression_study",
    "study_names",
]

REGRESSION_TEST_ROWS = 10_000
REGRESSION_COLUMNS = 10
LASSO_PENALTY = 0.1

DENSITY_GRID_POINTS = 2048
DENSITY_MIXTURE = BetaMixture(components=(
    (1.3, 1.3, 0.20),
    (1.1, 3.0, 0.25),
    (5.0, 1.0, 0.35),
    (1.5, 4.0, 0.20),
))


@dataclass(frozen=True)
class StudyDefinition:
    """A ready-to-run study: grid, table schema, simulation function, defaults."""

    name: str
    space: ParamSpace
    schema: ResultSchema
    fn: SimulationFn
    default_max_count: int

    def __post_init__(self):
        self.schema.validate_space(self.space)


# ---------------------------------------------------------------------------
# regression: ordinary least squares vs lasso on a Gaussian linear model


def _regression_fn(config: Configuration, seed: int) -> dict:
    rng = Rng(seed)
    n = config["no_instances"]
    total = n + REGRESSION_TEST_ROWS
    x = rng.normal(0.0, 2.0, (total, REGRESSION_COLUMNS))
    beta = rng.normal(0.0, 2.0, REGRESSION_COLUMNS)
    eps = rng.normal(0.0, 5.0, total)
    if config["data_distribution"] == "complete":
        y = x @ beta + eps
    elif config["data_distribution"] == "sparse":
        y = x[:, :5] @ beta[:5] + eps
    else:
        raise ValueError(f"unknown data_distribution {config['data_distribution']!r}")

    x_train, x_test = x[:n], x[n:]
    y_train, y_test = y[:n], y[n:]

    start = time.perf_counter()
    if config["method"] == "ols":
        fit = ols_fit(x_train, y_train)
    elif config["method"] == "lasso":
        fit = lasso_fit(x_train, y_train, LASSO_PENALTY)
    else:
        raise ValueError(f"unknown method {config['method']!r}")
    score = r2_score(y_test, predict(fit, x_test))
    elapsed = time.perf_counter() - start

    return {"score": score, "elapsed_time": elapsed}


def regression_study(include_large_n: bool = False) -> StudyDefinition:
    """Gaussian linear data; compares OLS and lasso test-set R-squared.

    ``include_large_n`` adds the slow no_instances=10000 grid row.
    """
    sizes = [100, 1000, 10_000] if include_large_n else [100, 1000]
    space = ParamSpace({
        "data_distribution": ["complete", "sparse"],
        "no_instances": sizes,
        "method": ["ols", "lasso"],
    })
    schema = ResultSchema.build(
        "regression_results",
        config={"data_distribution": "text", "no_instances": "integer", "method": "text"},
        outcomes={"score": "float"},
    )
    return StudyDefinition("regression", space, schema, _regression_fn, default_max_count=200)


# ---------------------------------------------------------------------------
# hypothesis: type-I error and power of three two-sample tests


_TESTS = {
    "welch": welch_t_test,
    "mwhitney": mann_whitney_test,
    "ks": ks_test,
}

HYPOTHESIS_SHIFT = 0.1


def _hypothesis_fn(config: Configuration, seed: int) -> dict:
    rng = Rng(seed)
    n = config["n_instances"]
    x = rng.lognormal(n)
    y = rng.lognormal(n)
    if config["hypothesis"] == "alternative":
        y = y + HYPOTHESIS_SHIFT
    elif config["hypothesis"] != "null":
        raise ValueError(f"unknown hypothesis {config['hypothesis']!r}")
    result = _TESTS[config["method"]](x, y)
    return {"p_value": result.p_value}


def hypothesis_study() -> StudyDefinition:
    """Two standard log-normal samples; the alternative shifts one by 0.1."""
    space = ParamSpace({
        "method": ["welch", "mwhitney", "ks"],
        "n_instances": [1000, 2000],
        "hypothesis": ["null", "alternative"],
    })
    schema = ResultSchema.build(
        "hypothesis_results",
        config={"method": "text", "n_instances": "integer", "hypothesis": "text"},
        outcomes={"p_value": "float"},
    )
    return StudyDefinition("hypothesis", space, schema, _hypothesis_fn, default_max_count=1000)


# ---------------------------------------------------------------------------
# density: Gaussian KDE against a four-component Beta mixture


def _density_fn(config: Configuration, seed: int) -> dict:
    rng = Rng(seed)
    n = config["no_instances"]
    if config["method"] != "kde":
        raise ValueError(f"unknown method {config['method']!r}")
    data = sample_beta_mixture(rng, DENSITY_MIXTURE, n)

    start = time.perf_counter()
    bandwidth = select_bandwidth(data, rng)
    model = kde_fit(data, bandwidth)
    grid = np.linspace(0.0, 1.0, DENSITY_GRID_POINTS)
    loss = integrated_squared_loss(
        beta_mixture_pdf(DENSITY_MIXTURE, grid), kde_pdf(model, grid), grid
    )
    elapsed = time.perf_counter() - start

    return {"loss": loss, "elapsed_time": elapsed}


def density_study() -> StudyDefinition:
    """Integrated squared loss of a split-sample-tuned KDE on Beta-mixture data."""
    space = ParamSpace({
        "no_instances": [100, 200],
        "method": ["kde"],
    })
    schema = ResultSchema.build(
        "density_results",
        config={"no_instances": "integer", "method": "text"},
        outcomes={"loss": "float"},
    )
    return StudyDefinition("density", space, schema, _density_fn, default_max_count=300)


_REGISTRY = {
    "regression": regression_study,
    "hypothesis": hypothesis_study,
    "density": density_study,
}


def study_names() -> list[str]:
    return sorted(_REGISTRY)


def get_study(name: str, **options) -> StudyDefinition:
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown study {name!r}; available: {', '.join(study_names())}") from None
    return factory(**options)
