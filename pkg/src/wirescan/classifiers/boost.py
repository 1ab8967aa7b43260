"""AdaBoost with the discrete SAMME weight updates on depth-1 stumps."""

import numpy as np

from .tree import DecisionTreeClassifier


class AdaBoostSamme:
    kind = "adaboost"
    score_convention = "margin"

    def __init__(self, rounds=50, seed=0):
        self.rounds = int(rounds)
        self.seed = int(seed)

    def fit(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=int)
        n = len(y)
        w = np.full(n, 1.0 / n)
        self.stumps = []
        self.alphas = []
        for r in range(self.rounds):
            stump = DecisionTreeClassifier(max_depth=1,
                                           seed=np.random.default_rng([self.seed, r]))
            stump.fit(x, y, sample_weight=w)
            pred = stump.predict(x)
            miss = pred != y
            err = float(w[miss].sum())
            if err >= 0.5 and self.stumps:
                break  # SAMME stopping rule: no better than chance
            err = min(max(err, 1e-12), 1.0 - 1e-12)
            alpha = float(np.log((1.0 - err) / err))  # + log(K-1) = 0 for K=2
            self.stumps.append(stump)
            self.alphas.append(alpha)
            if err <= 1e-12:
                break  # perfect stump, further rounds are no-ops
            w = w * np.exp(alpha * miss)
            w = w / w.sum()
        self.alphas = np.array(self.alphas)
        self.iterations = len(self.stumps)
        self.converged = True
        self.final_objective = 0.0
        return self

    def scores(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        tally = np.zeros(len(x))
        for stump, alpha in zip(self.stumps, self.alphas):
            tally += alpha * (2.0 * stump.predict(x) - 1.0)
        return tally / self.alphas.sum()

    def predict(self, x):
        return (self.scores(x) > 0).astype(int)

    def staged_training_error(self, x, y):
        """Ensemble training error after each boosting round."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=int)
        tally = np.zeros(len(y))
        errors = []
        for stump, alpha in zip(self.stumps, self.alphas):
            tally += alpha * (2.0 * stump.predict(x) - 1.0)
            errors.append(float(np.mean((tally > 0).astype(int) != y)))
        return errors
