"""One-hidden-layer perceptron trained with Adam on full batches.

100 rectified hidden units, softmax output, cross-entropy loss, seeded
initialization; float32 internals keep the 10 000-pixel matmuls cheap.
"""

import numpy as np


class MultilayerPerceptron:
    kind = "mlp"
    score_convention = "probability"

    def __init__(self, hidden=100, epochs=500, learning_rate=1e-3, seed=0):
        self.hidden = int(hidden)
        self.epochs = int(epochs)
        self.learning_rate = float(learning_rate)
        self.seed = int(seed)

    def fit(self, x, y):
        x = np.asarray(x, dtype=np.float32)
        y = np.asarray(y, dtype=int)
        n, d = x.shape
        rng = np.random.default_rng(self.seed)
        w1 = (rng.standard_normal((d, self.hidden)) * np.sqrt(2.0 / d)).astype(np.float32)
        b1 = np.zeros(self.hidden, dtype=np.float32)
        w2 = (rng.standard_normal((self.hidden, 2)) * np.sqrt(1.0 / self.hidden)).astype(np.float32)
        b2 = np.zeros(2, dtype=np.float32)
        onehot = np.zeros((n, 2), dtype=np.float32)
        onehot[np.arange(n), y] = 1.0

        params = [w1, b1, w2, b2]
        moments = [np.zeros_like(p) for p in params]
        velocities = [np.zeros_like(p) for p in params]
        beta1, beta2, eps = 0.9, 0.999, 1e-8

        loss = np.inf
        for step in range(1, self.epochs + 1):
            hidden_pre = x @ w1 + b1
            hidden = np.maximum(hidden_pre, 0.0)
            logits = hidden @ w2 + b2
            shifted = logits - logits.max(axis=1, keepdims=True)
            expl = np.exp(shifted)
            probs = expl / expl.sum(axis=1, keepdims=True)
            loss = float(-np.mean(np.sum(onehot * (shifted - np.log(expl.sum(axis=1, keepdims=True))), axis=1)))

            dlogits = (probs - onehot) / n
            dw2 = hidden.T @ dlogits
            db2 = dlogits.sum(axis=0)
            dhidden = (dlogits @ w2.T) * (hidden_pre > 0)
            dw1 = x.T @ dhidden
            db1 = dhidden.sum(axis=0)

            for p, m, v, g in zip(params, moments, velocities, [dw1, db1, dw2, db2]):
                m += (1.0 - beta1) * (g - m)
                v += (1.0 - beta2) * (g * g - v)
                m_hat = m / (1.0 - beta1 ** step)
                v_hat = v / (1.0 - beta2 ** step)
                p -= (self.learning_rate * m_hat / (np.sqrt(v_hat) + eps)).astype(np.float32)

        self.w1, self.b1, self.w2, self.b2 = params
        self.iterations = self.epochs
        self.final_objective = loss
        self.converged = True
        return self

    def scores(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=np.float32))
        hidden = np.maximum(x @ self.w1 + self.b1, 0.0)
        logits = hidden @ self.w2 + self.b2
        shifted = logits - logits.max(axis=1, keepdims=True)
        expl = np.exp(shifted)
        return (expl[:, 1] / expl.sum(axis=1)).astype(float)

    def predict(self, x):
        return (self.scores(x) > 0.5).astype(int)
