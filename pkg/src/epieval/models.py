"""Small linear-model core: feature expansion, scaled least squares, logistic IRLS."""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np


class DegenerateDesignError(ValueError):
    pass


class SeparationWarning(UserWarning):
    pass


def polynomial_features(x: np.ndarray, degree: int, include_interactions: bool = True) -> np.ndarray:
    """All monomials of the columns of x up to total degree, plus an intercept.

    Ordering is deterministic: intercept, then total degree 1, 2, ... with
    exponent patterns from combinations-with-replacement of column indices.
    Without interactions, only pure powers of single columns are kept.
    """
    if degree < 1:
        raise ValueError("degree must be at least 1")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n, k = x.shape
    columns = [np.ones(n)]
    for total in range(1, degree + 1):
        for combo in itertools.combinations_with_replacement(range(k), total):
            if not include_interactions and len(set(combo)) > 1:
                continue
            columns.append(np.prod(x[:, combo], axis=1))
    return np.column_stack(columns)


@dataclass
class FeatureScaler:
    """Center/scale non-constant columns; the intercept column is left alone."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, x: np.ndarray) -> "FeatureScaler":
        mean = x.mean(axis=0)
        scale = x.std(axis=0)
        constant = scale < 1e-12 * (1.0 + np.abs(mean))
        mean = np.where(constant, 0.0, mean)
        scale = np.where(constant, 1.0, scale)
        return cls(mean=mean, scale=scale)

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.scale

    def restore_coef(self, coef: np.ndarray, intercept_col: int = 0) -> np.ndarray:
        """Map coefficients fit on scaled features back to the raw feature scale."""
        out = coef / self.scale
        out[intercept_col] = coef[intercept_col] - np.sum(
            np.delete(coef * self.mean / self.scale, intercept_col)
        )
        return out


def solve_least_squares(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """OLS via QR, falling back to a trace-scaled ridge on rank deficiency."""
    q, r = np.linalg.qr(x)
    diag = np.abs(np.diag(r))
    if diag.min() > 1e-12 * max(diag.max(), 1.0):
        return np.linalg.solve(r, q.T @ y)
    gram = x.T @ x
    penalty = 1e-8 * np.trace(gram) / x.shape[1]
    return np.linalg.solve(gram + penalty * np.eye(x.shape[1]), x.T @ y)


@dataclass
class LinearFit:
    """Least-squares fit with feature scaling handled internally."""

    coef: np.ndarray  # on the raw feature scale
    scaler: FeatureScaler

    @classmethod
    def fit(cls, x: np.ndarray, y: np.ndarray) -> "LinearFit":
        if x.shape[0] != y.shape[0]:
            raise DegenerateDesignError(
                f"design has {x.shape[0]} rows but response has {y.shape[0]}"
            )
        if x.shape[0] < x.shape[1]:
            raise DegenerateDesignError(
                f"{x.shape[0]} observations cannot identify {x.shape[1]} coefficients"
            )
        scaler = FeatureScaler.fit(x)
        coef = solve_least_squares(scaler.transform(x), y)
        return cls(coef=scaler.restore_coef(coef), scaler=scaler)

    def predict(self, x: np.ndarray) -> np.ndarray:
        return x @ self.coef


@dataclass
class LogisticFit:
    """Maximum-likelihood logistic regression fit by IRLS."""

    coef: np.ndarray  # on the raw feature scale
    converged: bool
    n_iter: int
    separation: bool

    PROB_FLOOR = 1e-6

    @classmethod
    def fit(cls, x: np.ndarray, d: np.ndarray, tol: float = 1e-8, max_iter: int = 100) -> "LogisticFit":
        d = np.asarray(d, dtype=float)
        if d.min() == d.max():
            raise DegenerateDesignError("both treatment classes must be present")
        if x.shape[0] <= x.shape[1]:
            raise DegenerateDesignError(
                f"{x.shape[0]} observations cannot identify {x.shape[1]} coefficients"
            )
        scaler = FeatureScaler.fit(x)
        z = scaler.transform(x)
        beta = np.zeros(x.shape[1])
        converged = False
        n_iter = 0
        for n_iter in range(1, max_iter + 1):
            eta = z @ beta
            p = 1.0 / (1.0 + np.exp(-np.clip(eta, -35, 35)))
            w = np.clip(p * (1.0 - p), 1e-10, None)
            # weighted least squares on the working response
            zw = z * np.sqrt(w)[:, None]
            target = np.sqrt(w) * (eta + (d - p) / w)
            new_beta = solve_least_squares(zw, target)
            delta = np.max(np.abs(new_beta - beta))
            beta = new_beta
            if delta < tol:
                converged = True
                break
        p_hat = 1.0 / (1.0 + np.exp(-np.clip(z @ beta, -35, 35)))
        separation = bool(
            np.any(p_hat[d == 1] > 1 - cls.PROB_FLOOR) or np.any(p_hat[d == 0] < cls.PROB_FLOOR)
        )
        if not converged:
            warnings.warn(
                "IRLS did not converge; fitted probabilities are capped",
                SeparationWarning,
            )
        return cls(
            coef=scaler.restore_coef(beta),
            converged=converged,
            n_iter=n_iter,
            separation=separation,
        )

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        eta = np.clip(x @ self.coef, -35, 35)
        p = 1.0 / (1.0 + np.exp(-eta))
        return np.clip(p, self.PROB_FLOOR, 1.0 - self.PROB_FLOOR)
