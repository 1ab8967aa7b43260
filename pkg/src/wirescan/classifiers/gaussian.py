"""Moment-based generative classifiers: Gaussian naive Bayes and a
regularized diagonal quadratic discriminant.

Both estimate per-class sample moments in closed form; QDA shrinks the
per-class diagonal covariance toward its spherical mean to stay
well-posed with 10 000 features and ~32 samples per class.
"""

import numpy as np


def _log_softmax_pair(log0, log1):
    top = np.maximum(log0, log1)
    z = top + np.log(np.exp(log0 - top) + np.exp(log1 - top))
    return log1 - z  # log posterior of class 1


class GaussianNaiveBayes:
    kind = "gnb"
    score_convention = "probability"

    def __init__(self, var_smoothing=1e-9):
        self.var_smoothing = float(var_smoothing)

    def fit(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=int)
        self.epsilon = self.var_smoothing * x.var(axis=0).max()
        self.means = np.stack([x[y == c].mean(axis=0) for c in (0, 1)])
        self.variances = np.stack([x[y == c].var(axis=0) for c in (0, 1)]) + self.epsilon
        counts = np.array([(y == 0).sum(), (y == 1).sum()], dtype=float)
        self.log_priors = np.log(counts / counts.sum())
        self.iterations = 0
        self.converged = True
        self.final_objective = 0.0
        return self

    def _class_log_likelihood(self, x, c):
        diff = x - self.means[c]
        return self.log_priors[c] - 0.5 * np.sum(
            np.log(2.0 * np.pi * self.variances[c]) + diff * diff / self.variances[c],
            axis=1)

    def scores(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        log0 = self._class_log_likelihood(x, 0)
        log1 = self._class_log_likelihood(x, 1)
        return np.exp(_log_softmax_pair(log0, log1))

    def predict(self, x):
        return (self.scores(x) > 0.5).astype(int)


class QuadraticDiscriminant:
    kind = "qda"
    score_convention = "probability"

    def __init__(self, shrinkage=0.1):
        self.shrinkage = float(shrinkage)

    def fit(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=int)
        self.means = np.stack([x[y == c].mean(axis=0) for c in (0, 1)])
        r = self.shrinkage
        variances = []
        for c in (0, 1):
            diag = x[y == c].var(axis=0)
            variances.append((1.0 - r) * diag + r * diag.mean())
        self.variances = np.stack(variances)
        counts = np.array([(y == 0).sum(), (y == 1).sum()], dtype=float)
        self.log_priors = np.log(counts / counts.sum())
        self.iterations = 0
        self.converged = True
        self.final_objective = 0.0
        return self

    def _discriminant(self, x, c):
        diff = x - self.means[c]
        return self.log_priors[c] - 0.5 * np.sum(
            np.log(2.0 * np.pi * self.variances[c]) + diff * diff / self.variances[c],
            axis=1)

    def scores(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.exp(_log_softmax_pair(self._discriminant(x, 0),
                                        self._discriminant(x, 1)))

    def predict(self, x):
        return (self.scores(x) > 0.5).astype(int)
