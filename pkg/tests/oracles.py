"""Brute-force reference implementations used only by the tests.

None of these import the code paths they check; they follow the defining
formulas directly and trade speed for transparency.
"""

import math

import numpy as np

TOL = 1e-12


def cdf(support, masses, s):
    return sum(w for x, w in zip(support, masses) if x <= s)


def quantile(support, masses, beta):
    return min(s for s in support if cdf(support, masses, s) >= beta - TOL)


def quantile_lb(support, masses, beta):
    q = quantile(support, masses, beta)
    mq = sum(w for x, w in zip(support, masses) if x == q)
    cands = [-math.inf] + list(support)
    ok = [s for s in cands
          if cdf(support, masses, s) < beta - TOL and cdf(support, masses, s) + mq >= beta - TOL]
    return min(ok) if ok else None


def lb_probability(support, masses, beta):
    q = quantile(support, masses, beta)
    lb = quantile_lb(support, masses, beta)
    qf, lf = cdf(support, masses, q), cdf(support, masses, lb)
    if qf - beta <= TOL:
        return 0.0
    return (qf - beta) / (qf - lf)


def ridge_coef(X, y, gamma):
    X = np.asarray(X, float)
    return np.linalg.inv(X.T @ X + gamma * np.eye(X.shape[1])) @ X.T @ np.asarray(y, float)


def refit_prediction(X, Y, i, x_test, y, gamma):
    """Ridge on Z_{-i} + (x_test, y), evaluated at X_i."""
    Xa = np.vstack([np.delete(X, i, axis=0), x_test])
    Ya = np.append(np.delete(Y, i), y)
    return float(ridge_coef(Xa, Ya, gamma) @ X[i])


def boltzmann_ratio(X_all, beta, lam, x):
    logits = lam * (X_all @ beta)
    m = logits.max()
    return math.exp(lam * float(x @ beta) - m) / np.exp(logits - m).sum() * X_all.shape[0]


def naive_fcs(X, Y, x_test, ys, alpha, gamma, lam, X_all):
    """(n+1) x |ys| refits; returns scores, weights and flags."""
    n = len(Y)
    scores = np.zeros((n + 1, len(ys)))
    weights = np.zeros_like(scores)
    beta_full = ridge_coef(X, Y, gamma)
    v_test = boltzmann_ratio(X_all, beta_full, lam, x_test)
    flags = []
    for j, y in enumerate(ys):
        v = []
        for i in range(n):
            Xa = np.vstack([np.delete(X, i, axis=0), x_test])
            Ya = np.append(np.delete(Y, i), y)
            b = ridge_coef(Xa, Ya, gamma)
            scores[i, j] = abs(Y[i] - b @ X[i])
            v.append(boltzmann_ratio(X_all, b, lam, X[i]))
        v.append(v_test)
        scores[n, j] = abs(y - beta_full @ x_test)
        weights[:, j] = np.array(v) / sum(v)
        q = quantile(list(scores[:, j]), list(weights[:, j]), 1 - alpha)
        flags.append(scores[n, j] <= q)
    return scores, weights, np.array(flags)


def unweighted_full_conformal(X, Y, x_test, ys, alpha, gamma):
    """Exchangeable full conformal: rank test against ceil((1-alpha)(n+1))."""
    n = len(Y)
    k = math.ceil((1 - alpha) * (n + 1))
    flags = []
    for y in ys:
        Xa = np.vstack([X, x_test])
        Ya = np.append(Y, y)
        scores = []
        for i in range(n + 1):
            b = ridge_coef(np.delete(Xa, i, 0), np.delete(Ya, i), gamma)
            scores.append(abs(Ya[i] - b @ Xa[i]))
        # k-th smallest of all n + 1 scores
        if k > n + 1:
            flags.append(True)
        else:
            flags.append(scores[n] <= sorted(scores)[k - 1])
    return np.array(flags)


def randomized_split_label_probability(cal_scores, cal_w, w_test, s, beta):
    """P(s <= randomized quantile) with the test mass placed at score s."""
    support = list(cal_scores) + [s]
    masses = list(cal_w) + [w_test]
    q = quantile(support, masses, beta)
    lb = quantile_lb(support, masses, beta)
    p_lb = lb_probability(support, masses, beta)
    inc_q = s <= q
    inc_lb = lb is not None and s <= lb
    return (1 - p_lb) * inc_q + p_lb * inc_lb


def literal_staircase_probabilities(cal_scores, cal_w, w_test, beta):
    """Band inclusion probabilities by the uncorrected band rule: deterministic
    when cumulative calibration mass plus test mass is below beta, randomized
    at the quantile against the first lower bound."""
    order = np.argsort(cal_scores)
    S = np.concatenate([[0.0], np.asarray(cal_scores, float)[order]])
    m = len(cal_scores)
    probs = []
    lb_set, LF = False, None
    for i in range(m):
        cum = sum(w for s, w in zip(cal_scores, cal_w) if s <= S[i]) if i > 0 else 0.0
        if cum + w_test < beta:
            probs.append(1.0)
        elif cum + w_test >= beta and cum < beta:
            if not lb_set:
                lb_set, LF = True, cum
            F = (cum + w_test - beta) / (cum + w_test - LF)
            probs.append(1 - F)
        else:
            probs.append(0.0)
    total = float(np.sum(cal_w))
    if total < beta:
        if not lb_set:
            LF = total
        probs.append(1 - (1 - beta) / (1 - LF))
    else:
        probs.append(0.0)
    return np.array(probs)
