"""Fully connected ReLU network with a sigmoid output, trained with Adam."""

from __future__ import annotations

import numpy as np


def init_params(sizes, rng):
    """He-initialised weights for layer sizes ``[d_in, h1, ..., 1]``."""
    params = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        W = rng.standard_normal((fan_in, fan_out)) * np.sqrt(2.0 / max(fan_in, 1))
        params.append([W, np.zeros(fan_out)])
    return params


def forward(params, X):
    acts = [X]
    h = X
    for W, b in params[:-1]:
        h = np.maximum(h @ W + b, 0.0)
        acts.append(h)
    W, b = params[-1]
    logit = (h @ W + b)[:, 0]
    return logit, acts


def loss_and_grad(params, X, y, w):
    """Weighted mean binary cross-entropy and its gradient by backprop."""
    logit, acts = forward(params, X)
    W_sum = np.sum(w)
    loss = np.sum(w * (np.logaddexp(0.0, logit) - y * logit)) / W_sum
    p = 0.5 * (1.0 + np.tanh(0.5 * logit))
    delta = ((w * (p - y)) / W_sum)[:, None]
    grads = [None] * len(params)
    for layer in range(len(params) - 1, -1, -1):
        W, _ = params[layer]
        a = acts[layer]
        grads[layer] = [a.T @ delta, delta.sum(axis=0)]
        if layer > 0:
            delta = (delta @ W.T) * (acts[layer] > 0)
    return loss, grads


def predict_logit(params, X):
    return forward(params, np.asarray(X, dtype=np.float64))[0]


def fit_mlp(X, y, w, *, hidden=(64, 32), epochs=100, learning_rate=1e-3, batch_size=128, seed=0,
            beta1=0.9, beta2=0.999, eps=1e-8):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    rng = np.random.default_rng(seed)
    params = init_params([X.shape[1], *hidden, 1], rng)
    m = [[np.zeros_like(p) for p in layer] for layer in params]
    v = [[np.zeros_like(p) for p in layer] for layer in params]
    n = X.shape[0]
    t = 0
    losses = []
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            _, grads = loss_and_grad(params, X[idx], y[idx], w[idx])
            t += 1
            for layer, glayer in enumerate(grads):
                for k, g in enumerate(glayer):
                    m[layer][k] = beta1 * m[layer][k] + (1 - beta1) * g
                    v[layer][k] = beta2 * v[layer][k] + (1 - beta2) * g * g
                    mhat = m[layer][k] / (1 - beta1**t)
                    vhat = v[layer][k] / (1 - beta2**t)
                    params[layer][k] = params[layer][k] - learning_rate * mhat / (np.sqrt(vhat) + eps)
        losses.append(loss_and_grad(params, X, y, w)[0])
    return params, losses
