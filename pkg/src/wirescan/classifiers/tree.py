"""CART decision trees (Gini impurity) and the bagged random forest.

Trees grow until every leaf is pure unless a depth cap is set, support
sample weights (for boosting) and per-split random feature subsets
(for the forest).  Ties between equal-gain splits resolve by position
in a seeded feature-order shuffle, then by the lower threshold, which
reproduces the seed sensitivity of the classifier.
"""

import numpy as np


class DecisionTreeClassifier:
    kind = "dtc"
    score_convention = "probability"

    def __init__(self, max_depth=None, max_features=None, seed=0):
        self.max_depth = max_depth
        self.max_features = max_features
        self.seed = seed

    def fit(self, x, y, sample_weight=None):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=int)
        n, d = x.shape
        w = np.full(n, 1.0 / n) if sample_weight is None else np.asarray(sample_weight, float)
        rng = np.random.default_rng(self.seed)
        self._shuffle = rng.permutation(d)  # tie-break priority order
        self._rng = rng
        self.feature = []
        self.threshold = []
        self.left = []
        self.right = []
        self.value = []
        self._grow(x, y, w, np.arange(n), depth=0)
        self.n_nodes = len(self.feature)
        self.iterations = self.n_nodes
        self.converged = True
        self.final_objective = 0.0
        del self._rng
        return self

    def _new_node(self):
        for arr in (self.feature, self.threshold, self.left, self.right, self.value):
            arr.append(-1)
        return len(self.feature) - 1

    def _grow(self, x, y, w, idx, depth):
        node = self._new_node()
        labels = y[idx]
        weights = w[idx]
        w1 = weights[labels == 1].sum()
        w0 = weights[labels == 0].sum()
        self.value[node] = 1 if w1 > w0 else 0  # weight ties -> label 0
        if w1 == 0.0 or w0 == 0.0:
            return node
        if self.max_depth is not None and depth >= self.max_depth:
            return node

        candidates = self._candidate_features(len(self._shuffle))
        split = _best_split(x[idx][:, candidates], labels, weights)
        if split is None and self.max_features is not None:
            split = _best_split(x[idx][:, self._shuffle], labels, weights)
            candidates = self._shuffle
        if split is None:
            return node
        col, thr = split
        feat = int(candidates[col])
        mask = x[idx, feat] <= thr
        self.feature[node] = feat
        self.threshold[node] = thr
        self.left[node] = self._grow(x, y, w, idx[mask], depth + 1)
        self.right[node] = self._grow(x, y, w, idx[~mask], depth + 1)
        return node

    def _candidate_features(self, d):
        if self.max_features is None or self.max_features >= d:
            return self._shuffle
        return self._rng.choice(d, size=self.max_features, replace=False)

    def apply(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.zeros(len(x), dtype=int)
        for i, row in enumerate(x):
            node = 0
            while self.feature[node] >= 0:
                node = self.left[node] if row[self.feature[node]] <= self.threshold[node] \
                    else self.right[node]
            out[i] = node
        return out

    def predict(self, x):
        leaves = self.apply(x)
        return np.array([self.value[n] for n in leaves], dtype=int)

    def scores(self, x):
        return self.predict(x).astype(float)

    def leaf_is_pure(self, x, y):
        """True when every training point lands in a single-class leaf."""
        leaves = self.apply(x)
        for leaf in np.unique(leaves):
            if len(set(np.asarray(y)[leaves == leaf])) > 1:
                return False
        return True


def _best_split(xsub, labels, weights):
    """Greatest weighted-Gini gain over the given feature columns.

    Columns are scanned in the order supplied, so priority ordering is
    the caller's responsibility; within a feature the lowest threshold
    wins.  Returns (column, threshold) or None when nothing splits.
    """
    m, n_feat = xsub.shape
    order = np.argsort(xsub, axis=0, kind="stable")
    sorted_x = np.take_along_axis(xsub, order, axis=0)
    sorted_w = weights[order]
    sorted_w1 = np.where(labels[order] == 1, sorted_w, 0.0)

    cum_w = np.cumsum(sorted_w, axis=0)
    cum_w1 = np.cumsum(sorted_w1, axis=0)
    total_w = cum_w[-1]
    total_w1 = cum_w1[-1]

    left_w = cum_w[:-1]
    left_w1 = cum_w1[:-1]
    right_w = total_w - left_w
    right_w1 = total_w1 - left_w1

    valid = sorted_x[1:] > sorted_x[:-1]
    if not np.any(valid):
        return None

    with np.errstate(divide="ignore", invalid="ignore"):
        p1l = np.where(left_w > 0, left_w1 / left_w, 0.0)
        p1r = np.where(right_w > 0, right_w1 / right_w, 0.0)
        gini_l = 2.0 * p1l * (1.0 - p1l)
        gini_r = 2.0 * p1r * (1.0 - p1r)
    p1 = total_w1 / total_w
    parent = 2.0 * p1 * (1.0 - p1)
    gain = parent - (left_w * gini_l + right_w * gini_r) / total_w
    gain = np.where(valid, gain, -np.inf)

    best_per_feat = gain.max(axis=0)
    if best_per_feat.max() <= 1e-15:
        return None
    col = int(np.argmax(best_per_feat))          # first feature in priority order
    row = int(np.argmax(gain[:, col]))           # lowest qualifying threshold
    thr = 0.5 * (sorted_x[row, col] + sorted_x[row + 1, col])
    return col, thr


class RandomForestClassifier:
    kind = "rf"
    score_convention = "probability"

    def __init__(self, n_trees=100, max_features=100, seed=0):
        self.n_trees = int(n_trees)
        self.max_features = int(max_features)
        self.seed = int(seed)

    def fit(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=int)
        n, d = x.shape
        self.trees = []
        self.bootstrap_indices = []
        for i in range(self.n_trees):
            rng = np.random.default_rng([self.seed, i])
            boot = rng.integers(0, n, size=n)
            tree = DecisionTreeClassifier(
                max_features=min(self.max_features, d), seed=rng)
            tree.fit(x[boot], y[boot])
            self.trees.append(tree)
            self.bootstrap_indices.append(boot)
        self.iterations = self.n_trees
        self.converged = True
        self.final_objective = 0.0
        return self

    def scores(self, x):
        votes = np.stack([t.predict(x) for t in self.trees])
        return votes.mean(axis=0)

    def predict(self, x):
        return (self.scores(x) > 0.5).astype(int)
