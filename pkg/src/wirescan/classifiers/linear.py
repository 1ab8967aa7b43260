"""Linear classifier trained by stochastic gradient descent on hinge loss.

L2 regularization, inverse-scaling step size eta0 / t^power, seeded
per-epoch shuffling.
"""

import numpy as np


class SGDHingeClassifier:
    kind = "sgd"
    score_convention = "margin"

    def __init__(self, alpha=1e-4, epochs=1000, eta0=0.01, power=0.25, seed=0):
        self.alpha = float(alpha)
        self.epochs = int(epochs)
        self.eta0 = float(eta0)
        self.power = float(power)
        self.seed = int(seed)

    def fit(self, x, y):
        x = np.asarray(x, dtype=float)
        t = np.where(np.asarray(y) == 1, 1.0, -1.0)
        n, d = x.shape
        rng = np.random.default_rng(self.seed)
        w = np.zeros(d)
        b = 0.0
        step = 1
        for _ in range(self.epochs):
            for i in rng.permutation(n):
                eta = self.eta0 / step ** self.power
                w *= 1.0 - eta * self.alpha
                if t[i] * (x[i] @ w + b) < 1.0:
                    w += eta * t[i] * x[i]
                    b += eta * t[i]
                step += 1
        self.w = w
        self.b = b
        self.iterations = step - 1
        margins = 1.0 - t * (x @ w + b)
        self.final_objective = float(np.mean(np.maximum(margins, 0.0))
                                     + 0.5 * self.alpha * (w @ w))
        self.converged = True
        return self

    def scores(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return x @ self.w + self.b

    def predict(self, x):
        return (self.scores(x) > 0).astype(int)
