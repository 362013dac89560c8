"""Linear interference predictor y_hat = w.x + b with offline OLS, online
SGD, and online RLS training, plus prequential evaluation."""

from __future__ import annotations

import copy
import logging
from dataclasses import dataclass, field

import numpy as np

from .colocation import Sample
from .metrics import percentile

log = logging.getLogger(__name__)

N_FEATURES = 6
RIDGE_EPS = 1e-8
P_RESET_DELTA = 100.0


class PredictError(RuntimeError):
    """Raised on numerically invalid predictor state."""


@dataclass
class LinearModel:
    w: np.ndarray  # (6,)
    b: float

    def copy(self) -> "LinearModel":
        return LinearModel(w=self.w.copy(), b=self.b)

    def check_finite(self, context: str = "") -> None:
        if not (np.all(np.isfinite(self.w)) and np.isfinite(self.b)):
            raise PredictError(f"non-finite model parameters {context}")


def zero_model(n_features: int = N_FEATURES) -> LinearModel:
    return LinearModel(w=np.zeros(n_features), b=0.0)


def predict(model: LinearModel, x) -> float:
    return float(model.w @ np.asarray(x, dtype=float) + model.b)


def _design(samples: list[Sample]) -> tuple[np.ndarray, np.ndarray]:
    X = np.array([s.x for s in samples], dtype=float)
    y = np.array([s.y for s in samples], dtype=float)
    return X, y


def fit_ols_xy(X: np.ndarray, y: np.ndarray) -> LinearModel:
    """Least-squares fit with intercept; falls back to a tiny ridge when the
    design matrix is rank-deficient (degenerate single-model scenarios)."""
    n, d = X.shape
    Z = np.column_stack([X, np.ones(n)])
    if np.linalg.matrix_rank(Z) < d + 1:
        log.warning("rank-deficient design matrix (n=%d), using ridge fallback", n)
        G = Z.T @ Z + RIDGE_EPS * np.eye(d + 1)
        params = np.linalg.solve(G, Z.T @ y)
    else:
        params, *_ = np.linalg.lstsq(Z, y, rcond=None)
    model = LinearModel(w=params[:d], b=float(params[d]))
    model.check_finite("after OLS fit")
    return model


def fit_ols(samples: list[Sample]) -> LinearModel:
    if len(samples) < N_FEATURES + 1:
        raise PredictError(f"need >= {N_FEATURES + 1} samples, got {len(samples)}")
    return fit_ols_xy(*_design(samples))


@dataclass
class SgdState:
    model: LinearModel
    eta: float = 0.01

    def __post_init__(self):
        if not self.eta > 0:
            raise PredictError("eta must be positive")

    def copy(self) -> "SgdState":
        return SgdState(model=self.model.copy(), eta=self.eta)


def sgd_update(state: SgdState, sample: Sample) -> SgdState:
    """One LMS step on the squared prediction error."""
    x = np.asarray(sample.x, dtype=float)
    e = sample.y - predict(state.model, x)
    state.model.w += state.eta * e * x
    state.model.b += state.eta * e
    state.model.check_finite(f"after SGD step (eta={state.eta})")
    return state


@dataclass
class RlsState:
    model: LinearModel
    P: np.ndarray  # (7, 7) inverse-covariance of [x; 1]
    lam: float = 0.99

    def __post_init__(self):
        if not (0.0 < self.lam <= 1.0):
            raise PredictError("forgetting factor must lie in (0, 1]")

    def copy(self) -> "RlsState":
        return RlsState(model=self.model.copy(), P=self.P.copy(), lam=self.lam)


def rls_init(
    model: LinearModel,
    lam: float = 0.99,
    X_train: np.ndarray | None = None,
    delta: float = P_RESET_DELTA,
) -> RlsState:
    """RLS state warm-started from a fitted model.

    With training features given, P starts from the inverse of the training
    normal-equations matrix, making lambda=1 streaming exactly equivalent to
    refitting OLS on the union of old and new data. Otherwise P = delta*I.
    """
    d = model.w.shape[0] + 1
    if X_train is not None:
        Z = np.column_stack([X_train, np.ones(len(X_train))])
        G = Z.T @ Z
        try:
            P = np.linalg.inv(G)
        except np.linalg.LinAlgError:
            P = np.linalg.inv(G + RIDGE_EPS * np.eye(d))
    else:
        P = delta * np.eye(d)
    return RlsState(model=model.copy(), P=P, lam=lam)


def rls_update(state: RlsState, sample: Sample) -> RlsState:
    x = np.asarray(sample.x, dtype=float)
    z = np.append(x, 1.0)
    Pz = state.P @ z
    denom = state.lam + z @ Pz
    if denom <= 0 or not np.isfinite(denom):
        log.warning("RLS gain matrix lost positive-definiteness; resetting P")
        state.P = P_RESET_DELTA * np.eye(len(z))
        Pz = state.P @ z
        denom = state.lam + z @ Pz
    k = Pz / denom
    e = sample.y - predict(state.model, x)
    state.model.w += k[:-1] * e
    state.model.b += float(k[-1]) * e
    state.P = (state.P - np.outer(k, Pz)) / state.lam
    state.P = 0.5 * (state.P + state.P.T)  # re-enforce symmetry
    state.model.check_finite("after RLS step")
    return state


def score_and_update(predictor, sample: Sample) -> float:
    """Atomic prequential step: return the pre-update prediction, then learn.

    A frozen LinearModel only scores; SGD and RLS states score then update.
    """
    if isinstance(predictor, LinearModel):
        return predict(predictor, sample.x)
    if isinstance(predictor, SgdState):
        y_hat = predict(predictor.model, sample.x)
        sgd_update(predictor, sample)
        return y_hat
    if isinstance(predictor, RlsState):
        y_hat = predict(predictor.model, sample.x)
        rls_update(predictor, sample)
        return y_hat
    raise TypeError(f"unknown predictor type {type(predictor)!r}")


@dataclass(frozen=True)
class EvalReport:
    mse: float
    rel_p25: float
    rel_p50: float
    rel_p75: float
    rel_p95: float
    n_samples: int


def evaluate(predictor, samples: list[Sample], online: bool = False) -> EvalReport:
    """Score samples in order; online mode updates the predictor after each
    prediction (prequential), offline mode leaves it untouched."""
    if not samples:
        raise PredictError("evaluate on empty sample list")
    if online:
        preds = [score_and_update(predictor, s) for s in samples]
    else:
        model = predictor if isinstance(predictor, LinearModel) else predictor.model
        preds = [predict(model, s.x) for s in samples]
    y = np.array([s.y for s in samples])
    y_hat = np.array(preds)
    rel = np.abs(y_hat - y) / y
    return EvalReport(
        mse=float(np.mean((y_hat - y) ** 2)),
        rel_p25=float(percentile(rel, 25)),
        rel_p50=float(percentile(rel, 50)),
        rel_p75=float(percentile(rel, 75)),
        rel_p95=float(percentile(rel, 95)),
        n_samples=len(samples),
    )


EVAL_CSV_HEADER = [
    "dataset",
    "method",
    "mse",
    "rel_p25",
    "rel_p50",
    "rel_p75",
    "rel_p95",
    "n_samples",
]


def save_model(model: LinearModel, path) -> None:
    import json
    from pathlib import Path

    Path(path).write_text(
        json.dumps({"w": model.w.tolist(), "b": model.b}, indent=2) + "\n",
        encoding="utf-8",
    )


def load_model(path) -> LinearModel:
    import json
    from pathlib import Path

    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return LinearModel(w=np.array(data["w"], dtype=float), b=float(data["b"]))
