"""Weighted logistic regression and a Metropolis Bayesian logit."""

from __future__ import annotations

import math

import numpy as np
from scipy import optimize

from .trees import sigmoid


def _design(X):
    X = np.asarray(X, dtype=np.float64)
    return np.hstack([np.ones((X.shape[0], 1)), X])


def logistic_loss_grad(theta, X, y, w, l2=0.0):
    """Weighted mean log-loss plus ``l2/2 * |coef|^2`` and its gradient.

    ``theta`` is ``[intercept, coef...]``; the mean divides by ``sum(w)`` so an
    integer weight is interchangeable with duplicating the row.
    """
    A = _design(X)
    z = A @ theta
    W = np.sum(w)
    loss = np.sum(w * (np.logaddexp(0.0, z) - y * z)) / W
    grad = A.T @ (w * (sigmoid(z) - y)) / W
    coef = theta[1:]
    loss += 0.5 * l2 * coef @ coef
    grad[1:] += l2 * coef
    return loss, grad


def fit_logistic_gd(X, y, w, *, learning_rate=0.1, epochs=500, l2=1e-4, theta0=None, return_path=False):
    """Full-batch gradient descent from zero (or ``theta0``)."""
    X = np.asarray(X, dtype=np.float64)
    theta = np.zeros(X.shape[1] + 1) if theta0 is None else np.array(theta0, dtype=np.float64)
    path = [theta.copy()] if return_path else None
    loss = math.nan
    for _ in range(epochs):
        loss, grad = logistic_loss_grad(theta, X, y, w, l2)
        theta = theta - learning_rate * grad
        if return_path:
            path.append(theta.copy())
    loss, _ = logistic_loss_grad(theta, X, y, w, l2)
    if return_path:
        return theta, loss, path
    return theta, loss


def fit_logistic_lbfgs(X, y, w, *, l2=1e-4, theta0=None, max_iter=500, tol=1e-10):
    X = np.asarray(X, dtype=np.float64)
    theta0 = np.zeros(X.shape[1] + 1) if theta0 is None else np.asarray(theta0, dtype=np.float64)
    res = optimize.minimize(
        logistic_loss_grad, theta0, args=(X, y, w, l2), jac=True, method="L-BFGS-B",
        options={"maxiter": max_iter, "gtol": tol, "ftol": 1e-14},
    )
    return res.x, float(res.fun)


# --------------------------------------------------------------------------
# Bayesian logit
# --------------------------------------------------------------------------


def _log_posterior(beta, A, y, w, prior_prec):
    z = A @ beta
    return -np.sum(w * (np.logaddexp(0.0, z) - y * z)) - 0.5 * np.sum(prior_prec * beta * beta), z


def sample_bayes_logit(X, y, w, *, prior_scale=2.5, burn_in=2000, n_keep=8000, thin=4, target_accept=0.30,
                       seed=0):
    """Random-walk Metropolis over a logit with independent normal priors.

    Columns are standardized first; priors apply to the standardized
    coefficients (intercept included). The chain starts at the posterior
    mode and proposes Gaussian steps shaped by the inverse Hessian there; the
    global step scale is adapted during burn-in towards ``target_accept`` and
    frozen afterwards.

    Returns a dict with draws on the standardized scale, the standardization,
    and the post-burn-in acceptance rate.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    mean = X.mean(axis=0) if X.shape[0] else np.zeros(X.shape[1])
    scale = X.std(axis=0) if X.shape[0] else np.ones(X.shape[1])
    scale = np.where(scale > 0, scale, 1.0)
    A = _design((X - mean) / scale)
    D = A.shape[1]
    prior_prec = np.full(D, 1.0 / prior_scale**2)

    def neg(beta):
        lp, z = _log_posterior(beta, A, y, w, prior_prec)
        g = A.T @ (w * (y - sigmoid(z))) - prior_prec * beta
        return -lp, -g

    res = optimize.minimize(neg, np.zeros(D), jac=True, method="L-BFGS-B",
                            options={"maxiter": 1000, "gtol": 1e-8})
    mode = res.x
    p = sigmoid(A @ mode)
    H = A.T @ (A * (w * p * (1 - p))[:, None]) + np.diag(prior_prec)
    cov = np.linalg.inv(H)
    cov = 0.5 * (cov + cov.T)
    L = np.linalg.cholesky(cov + 1e-12 * np.eye(D))

    rng = np.random.default_rng(seed)
    log_step = math.log(2.38 / math.sqrt(D))
    beta = mode.copy()
    lp, z = _log_posterior(beta, A, y, w, prior_prec)
    total = burn_in + n_keep
    kept = []
    accepted = 0
    window_acc = 0
    for it in range(total):
        step = math.exp(log_step)
        delta = step * (L @ rng.standard_normal(D))
        z_new = z + A @ delta
        beta_new = beta + delta
        lp_new = -np.sum(w * (np.logaddexp(0.0, z_new) - y * z_new)) - 0.5 * np.sum(prior_prec * beta_new * beta_new)
        if math.log(rng.random()) < lp_new - lp:
            beta, z, lp = beta_new, z_new, lp_new
            ok = 1
        else:
            ok = 0
        if it < burn_in:
            window_acc += ok
            if (it + 1) % 50 == 0:
                rate = window_acc / 50
                # Robbins-Monro on the log step, decaying with the window index
                log_step += (rate - target_accept) / math.sqrt((it + 1) / 50)
                window_acc = 0
        else:
            accepted += ok
            if (it - burn_in) % thin == 0:
                kept.append(beta.copy())
    draws = np.array(kept) if kept else mode[None, :]
    return {
        "draws": draws,
        "mean": mean,
        "scale": scale,
        "acceptance_rate": accepted / n_keep if n_keep else 0.0,
        "mode": mode,
        "step": math.exp(log_step),
    }


def unstandardize(draws, mean, scale):
    """Map standardized draws ``[b0, b...]`` to the original column scale."""
    coef = draws[:, 1:] / scale
    intercept = draws[:, 0] - coef @ mean
    return np.column_stack([intercept, coef])
