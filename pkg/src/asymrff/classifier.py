"""L2-regularized squared-hinge linear classification with cross-validation.

The binary objective is

    F(w, b) = 0.5 ||w||^2 + C * sum_i max(0, 1 - y_i (x_i.w + b))^2

with an unregularized bias, minimized by deterministic Newton-CG (exact
generalized-Hessian products) to gradient tolerance 1e-6.  Multiclass goes
one-vs-rest with argmax over decision values.  The squared hinge is smooth,
so doubling every training row is exactly equivalent to doubling C.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .dataio import kfold_split

__all__ = [
    "LinearModel",
    "OneVsRestModel",
    "train",
    "fit",
    "decision_values",
    "predict",
    "evaluate",
    "cv_select",
    "squared_hinge_objective",
    "save_model",
    "load_model",
]

_GRAD_TOL = 1e-6


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    C: float


@dataclass
class OneVsRestModel:
    classes: np.ndarray
    models: list
    C: float


def squared_hinge_objective(z, X, y, C):
    """Objective and gradient at packed parameters z = [w, b]."""
    w, b = z[:-1], z[-1]
    margins = 1.0 - y * (X @ w + b)
    h = np.maximum(margins, 0.0)
    f = 0.5 * w @ w + C * h @ h
    coef = -2.0 * C * y * h
    grad = np.concatenate([w + X.T @ coef, [coef.sum()]])
    return f, grad


def _hessp(z, v, X, y, C):
    w, _ = z[:-1], z[-1]
    act = (1.0 - y * (X @ w + z[-1])) > 0
    t = 2.0 * C * act * (X @ v[:-1] + v[-1])
    return np.concatenate([v[:-1] + X.T @ t, [t.sum()]])


# explicit Hessian solves below this parameter count, Newton-CG above
_DENSE_NEWTON_MAX = 2048


def _newton_exact(X, y, C, gtol):
    """Damped Newton with the explicit generalized Hessian (small p only).

    The objective is piecewise quadratic and strongly convex in w, so exact
    Newton steps with Armijo backtracking settle on the active piece in a
    handful of iterations.
    """
    p = X.shape[1]
    z = np.zeros(p + 1)
    f, g = squared_hinge_objective(z, X, y, C)
    for _ in range(100):
        if np.max(np.abs(g)) <= gtol:
            break
        act = (1.0 - y * (X @ z[:-1] + z[-1])) > 0
        Xa = X[act]
        H = np.zeros((p + 1, p + 1))
        H[:p, :p] = 2.0 * C * Xa.T @ Xa
        H[np.arange(p), np.arange(p)] += 1.0
        col = 2.0 * C * Xa.sum(axis=0)
        H[:p, p] = col
        H[p, :p] = col
        H[p, p] = 2.0 * C * act.sum() + 1e-12
        step = np.linalg.solve(H, -g)
        slope = g @ step
        t = 1.0
        accepted = False
        for _ in range(60):
            f_new, g_new = squared_hinge_objective(z + t * step, X, y, C)
            if f_new <= f + 1e-4 * t * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break  # numerically flat; gradient check decides below
        z = z + t * step
        f, g = f_new, g_new
    return z, g


def train(X, y, C, tol: float = _GRAD_TOL) -> LinearModel:
    """Fit a binary model on labels in {-1, +1}; both classes required.

    Converges the gradient inf-norm below tol, measured relative to the
    gradient scale at the zero vector (with tol itself as the absolute
    floor), so the stopping rule is invariant to n and C rescaling.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be (n, p) with one label per row")
    if X.shape[0] < 2:
        raise ValueError("need at least 2 training rows")
    classes = np.unique(y)
    if not np.all(np.isin(classes, (-1, 1))):
        raise ValueError(f"binary labels must be -1/+1, got {classes}")
    if classes.size < 2:
        raise ValueError("training data contains a single class")
    if not C > 0:
        raise ValueError(f"C must be positive, got {C}")
    y = y.astype(float)

    _, g0 = squared_hinge_objective(np.zeros(X.shape[1] + 1), X, y, C)
    gtol = tol * max(1.0, float(np.max(np.abs(g0))))

    if X.shape[1] + 1 <= _DENSE_NEWTON_MAX:
        z, grad = _newton_exact(X, y, C, 0.01 * gtol)
    else:
        res = minimize(
            squared_hinge_objective, np.zeros(X.shape[1] + 1), args=(X, y, C),
            jac=True, hessp=lambda z, v, *a: _hessp(z, v, *a),
            method="Newton-CG", options={"xtol": 1e-12, "maxiter": 500},
        )
        z = res.x
        _, grad = squared_hinge_objective(z, X, y, C)
        if np.max(np.abs(grad)) > gtol:
            res = minimize(
                squared_hinge_objective, z, args=(X, y, C), jac=True,
                method="L-BFGS-B",
                options={"maxiter": 5000, "gtol": gtol / 10, "ftol": 1e-16},
            )
            z = res.x
            _, grad = squared_hinge_objective(z, X, y, C)
    if np.max(np.abs(grad)) > gtol:
        raise RuntimeError(
            f"solver stalled at gradient norm {np.max(np.abs(grad)):.2e} "
            f"(target {gtol:.2e})"
        )
    return LinearModel(weights=z[:-1], bias=float(z[-1]), C=float(C))


def fit(X, y, C):
    """Train a binary model for two classes, one-vs-rest otherwise."""
    classes = np.unique(y)
    if classes.size == 2 and np.all(np.isin(classes, (-1, 1))):
        return train(X, y, C)
    if classes.size < 2:
        raise ValueError("training data contains a single class")
    models = [train(X, np.where(y == c, 1, -1), C) for c in classes]
    return OneVsRestModel(classes=classes, models=models, C=float(C))


def decision_values(model, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if isinstance(model, OneVsRestModel):
        return np.column_stack([decision_values(m, X) for m in model.models])
    if X.shape[1] != model.weights.shape[0]:
        raise ValueError(
            f"feature width {X.shape[1]} does not match model "
            f"({model.weights.shape[0]})"
        )
    return X @ model.weights + model.bias


def predict(model, X) -> np.ndarray:
    scores = decision_values(model, X)
    if isinstance(model, OneVsRestModel):
        return model.classes[np.argmax(scores, axis=1)]
    return np.where(scores >= 0, 1, -1)


def evaluate(model, X, y) -> float:
    """Fraction of correct predictions on (X, y)."""
    return float(np.mean(predict(model, X) == np.asarray(y)))


def cv_select(X, y, grid, seed: int, n_folds: int = 5):
    """Pick C by mean validation accuracy over shuffled k-folds.

    Returns (best_C, table) where table[i, j] is the accuracy of grid[i] on
    fold j.  Ties go to the smaller C.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("C grid must be non-empty")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    folds = kfold_split(X.shape[0], n_folds, seed)
    table = np.zeros((len(grid), n_folds))
    for i, C in enumerate(grid):
        for j, (tr, va) in enumerate(folds):
            model = fit(X[tr], y[tr], C)
            table[i, j] = evaluate(model, X[va], y[va])
    means = table.mean(axis=1)
    best = means.max()
    best_c = min(c for c, m in zip(grid, means) if m == best)
    return best_c, table


def _model_json(model):
    if isinstance(model, OneVsRestModel):
        return {
            "type": "one_vs_rest",
            "C": model.C,
            "classes": [int(c) for c in model.classes],
            "models": [_model_json(m) for m in model.models],
        }
    return {
        "type": "binary",
        "C": model.C,
        "weights": list(map(float, model.weights)),
        "bias": model.bias,
    }


def save_model(model, path, feature_layout: dict | None = None) -> None:
    obj = _model_json(model)
    if feature_layout is not None:
        obj["feature_layout"] = feature_layout
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)


def _model_from_json(obj):
    if obj["type"] == "one_vs_rest":
        return OneVsRestModel(
            classes=np.asarray(obj["classes"]),
            models=[_model_from_json(m) for m in obj["models"]],
            C=float(obj["C"]),
        )
    return LinearModel(
        weights=np.asarray(obj["weights"], dtype=float),
        bias=float(obj["bias"]),
        C=float(obj["C"]),
    )


def load_model(path):
    with open(path) as fh:
        obj = json.load(fh)
    model = _model_from_json(obj)
    return (model, obj.get("feature_layout"))
