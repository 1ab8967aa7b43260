"""Distance-based classifiers: k-nearest neighbors and nearest centroid."""

import numpy as np


def euclidean_distances(queries, points):
    sq = (np.sum(queries * queries, axis=1)[:, None]
          + np.sum(points * points, axis=1)[None, :]
          - 2.0 * (queries @ points.T))
    return np.sqrt(np.maximum(sq, 0.0))


class KNearestNeighbors:
    kind = "knn"
    score_convention = "probability"

    def __init__(self, k=3):
        self.k = int(k)

    def fit(self, x, y):
        self.x = np.asarray(x, dtype=float)
        self.y = np.asarray(y, dtype=int)
        self.iterations = 0
        self.converged = True
        self.final_objective = 0.0
        return self

    def scores(self, x):
        d = euclidean_distances(np.atleast_2d(np.asarray(x, dtype=float)), self.x)
        votes = np.empty(len(d))
        idx = np.arange(len(self.y))
        for row, dist in enumerate(d):
            # stable ordering: distance first, training index breaks ties
            order = np.lexsort((idx, dist))[:self.k]
            votes[row] = np.mean(self.y[order] == 1)
        return votes

    def predict(self, x):
        return (self.scores(x) > 0.5).astype(int)


class NearestCentroid:
    kind = "centroid"
    score_convention = "margin"

    def __init__(self):
        pass

    def fit(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=int)
        self.centroids = np.stack([x[y == 0].mean(axis=0), x[y == 1].mean(axis=0)])
        self.iterations = 0
        self.converged = True
        self.final_objective = 0.0
        return self

    def scores(self, x):
        d = euclidean_distances(np.atleast_2d(np.asarray(x, dtype=float)), self.centroids)
        # positive when closer to the open-wire centroid; exact tie -> 0 -> label 0
        return d[:, 0] - d[:, 1]

    def predict(self, x):
        return (self.scores(x) > 0).astype(int)
