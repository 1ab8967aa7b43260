"""Binary SVM with an RBF kernel, trained by sequential minimal optimization.

Deterministic variant of Platt's SMO: the second-choice heuristic picks
the maximum |E1 - E2| partner (ties to the lower index) and the
fallback sweeps start at index 0 instead of a random offset, so a fit
is reproducible without any seed.
"""

import numpy as np


def rbf_kernel(a, b, gamma):
    sq = (np.sum(a * a, axis=1)[:, None] + np.sum(b * b, axis=1)[None, :]
          - 2.0 * (a @ b.T))
    return np.exp(-gamma * np.maximum(sq, 0.0))


class SupportVectorMachine:
    kind = "svm"
    score_convention = "margin"

    def __init__(self, c=1.0, gamma=0.001, tol=1e-3, max_steps=100_000):
        self.c = float(c)
        self.gamma = float(gamma)
        self.tol = float(tol)
        self.max_steps = int(max_steps)

    def fit(self, x, y):
        self.x = np.asarray(x, dtype=float)
        self.t = np.where(np.asarray(y) == 1, 1.0, -1.0)
        n = len(self.t)
        self.kernel = rbf_kernel(self.x, self.x, self.gamma)
        self.alpha = np.zeros(n)
        self.bias = 0.0
        self._errors = self._decision_train() - self.t

        steps = 0
        examine_all = True
        changed = 0
        while steps < self.max_steps:
            changed = 0
            targets = range(n) if examine_all else np.nonzero(self._nonbound())[0]
            for i2 in targets:
                took, used = self._examine(int(i2), steps)
                changed += took
                steps += used
                if steps >= self.max_steps:
                    break
            if examine_all:
                examine_all = False
                if changed == 0:
                    break
            elif changed == 0:
                examine_all = True
        self.iterations = steps
        self.converged = steps < self.max_steps
        self.final_objective = float(
            np.sum(self.alpha) - 0.5 * (self.alpha * self.t) @ self.kernel @ (self.alpha * self.t))
        return self

    def _nonbound(self):
        return (self.alpha > 0) & (self.alpha < self.c)

    def _decision_train(self):
        return (self.alpha * self.t) @ self.kernel + self.bias

    def _examine(self, i2, steps_so_far):
        e2 = self._errors[i2]
        r2 = e2 * self.t[i2]
        if not ((r2 < -self.tol and self.alpha[i2] < self.c)
                or (r2 > self.tol and self.alpha[i2] > 0)):
            return 0, 0
        nonbound = np.nonzero(self._nonbound())[0]
        if len(nonbound) > 1:
            gaps = np.abs(self._errors[nonbound] - e2)
            i1 = int(nonbound[int(np.argmax(gaps))])
            if self._take_step(i1, i2):
                return 1, 1
        for i1 in nonbound:
            if self._take_step(int(i1), i2):
                return 1, 1
        for i1 in range(len(self.t)):
            if self._take_step(i1, i2):
                return 1, 1
        return 0, 1

    def _take_step(self, i1, i2):
        if i1 == i2:
            return False
        a1, a2 = self.alpha[i1], self.alpha[i2]
        t1, t2 = self.t[i1], self.t[i2]
        e1, e2 = self._errors[i1], self._errors[i2]
        if t1 == t2:
            lo, hi = max(0.0, a1 + a2 - self.c), min(self.c, a1 + a2)
        else:
            lo, hi = max(0.0, a2 - a1), min(self.c, self.c + a2 - a1)
        if lo >= hi:
            return False
        k11, k22, k12 = self.kernel[i1, i1], self.kernel[i2, i2], self.kernel[i1, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta <= 0:
            return False  # RBF Gram is PSD; degenerate direction, skip
        a2_new = np.clip(a2 + t2 * (e1 - e2) / eta, lo, hi)
        if abs(a2_new - a2) < 1e-12 * (a2_new + a2 + 1e-12):
            return False
        a1_new = a1 + t1 * t2 * (a2 - a2_new)

        b1 = self.bias - e1 - t1 * (a1_new - a1) * k11 - t2 * (a2_new - a2) * k12
        b2 = self.bias - e2 - t1 * (a1_new - a1) * k12 - t2 * (a2_new - a2) * k22
        if 0.0 < a1_new < self.c:
            self.bias = b1
        elif 0.0 < a2_new < self.c:
            self.bias = b2
        else:
            self.bias = 0.5 * (b1 + b2)
        self.alpha[i1], self.alpha[i2] = a1_new, a2_new
        self._errors = self._decision_train() - self.t
        return True

    @property
    def support_mask(self):
        return self.alpha > 1e-12

    def decision(self, x):
        k = rbf_kernel(np.atleast_2d(np.asarray(x, dtype=float)), self.x, self.gamma)
        return k @ (self.alpha * self.t) + self.bias

    def scores(self, x):
        return self.decision(x)

    def predict(self, x):
        return (self.decision(x) > 0).astype(int)

    def kkt_violation(self):
        """Worst KKT residual over the training set (0 when satisfied)."""
        margins = self.t * self._decision_train()
        viol = np.zeros_like(margins)
        free = self._nonbound()
        viol[free] = np.abs(margins[free] - 1.0)
        at_zero = self.alpha <= 1e-12
        viol[at_zero] = np.maximum(viol[at_zero], 1.0 - margins[at_zero])
        at_c = self.alpha >= self.c - 1e-12
        viol[at_c] = np.maximum(viol[at_c], margins[at_c] - 1.0)
        return float(np.maximum(viol, 0.0).max())
