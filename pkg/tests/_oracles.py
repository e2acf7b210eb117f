"""Independent brute-force oracles.

Everything here is written as literal loops straight from the definitions,
sharing no code with the package, so agreement is meaningful evidence.
"""

import math

import numpy as np


# -- fuzzy measures ----------------------------------------------------------

def brute_similarity(col, radius):
    n = len(col)
    out = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            gap = abs(col[i] - col[j])
            out[i][j] = 1.0 - gap if gap <= radius else 0.0
        out[i][i] = 1.0
    return np.array(out)


def brute_ce(mat):
    n = len(mat)
    acc = 0.0
    for i in range(n):
        card = sum(mat[i][j] for j in range(n))
        acc += 1.0 - card / n
    return acc / n


def brute_cje(a, b):
    n = len(a)
    acc = 0.0
    for i in range(n):
        card = sum(min(a[i][j], b[i][j]) for j in range(n))
        acc += 1.0 - card / n
    return acc / n


def brute_cce(a, b):
    n = len(a)
    acc = 0.0
    for i in range(n):
        card_b = sum(b[i][j] for j in range(n))
        card_ab = sum(min(a[i][j], b[i][j]) for j in range(n))
        acc += (card_b - card_ab) / n
    return acc / n


def brute_cmi(a, b):
    n = len(a)
    acc = 0.0
    for i in range(n):
        card_a = sum(a[i][j] for j in range(n))
        card_b = sum(b[i][j] for j in range(n))
        card_ab = sum(min(a[i][j], b[i][j]) for j in range(n))
        acc += 1.0 - (card_a + card_b - card_ab) / n
    return acc / n


def brute_lower(rel, memb):
    n = len(rel)
    return np.array([min(max(1.0 - rel[i][j], memb[j]) for j in range(n))
                     for i in range(n)])


def brute_upper(rel, memb):
    n = len(rel)
    return np.array([max(min(rel[i][j], memb[j]) for j in range(n))
                     for i in range(n)])


# -- relevance ---------------------------------------------------------------

def brute_label_similarity(labels):
    labels = np.asarray(labels, dtype=float)
    s, n_lab = labels.shape
    sim = np.zeros((s, s))
    flagged = [False] * s
    centered = []
    for i in range(s):
        mean = sum(labels[i]) / n_lab
        c = [labels[i][t] - mean for t in range(n_lab)]
        norm = math.sqrt(sum(v * v for v in c))
        centered.append((c, norm))
        flagged[i] = norm == 0.0
    for i in range(s):
        for j in range(s):
            ci, ni = centered[i]
            cj, nj = centered[j]
            if ni == 0.0 or nj == 0.0:
                sim[i][j] = 0.0
            else:
                dot = sum(a * b for a, b in zip(ci, cj))
                sim[i][j] = max(-1.0, min(1.0, dot / (ni * nj)))
    return sim, flagged


def brute_neighbor_sets(sim, flagged, k):
    """Same documented semantics, written independently: nonnegative pool
    feeds ST (flagged rows excluded), negative pool feeds DT, shortfalls
    take the best unclaimed candidates."""
    s = len(sim)
    k_eff = min(k, s - 1)
    st_all, dt_all = [], []
    for i in range(s):
        cands = [j for j in range(s) if j != i]
        st_pool = [j for j in cands if sim[i][j] >= 0.0 and not flagged[j]]
        st_pool.sort(key=lambda j: (-sim[i][j], j))
        dt_pool = [j for j in cands if sim[i][j] < 0.0]
        dt_pool.sort(key=lambda j: (sim[i][j], j))
        st, dt = st_pool[:k_eff], dt_pool[:k_eff]
        spare = [j for j in cands if j not in st and j not in dt]
        if len(st) < k_eff:
            spare.sort(key=lambda j: (-sim[i][j], j))
            take = spare[:k_eff - len(st)]
            st = st + take
            spare = [j for j in spare if j not in take]
        if len(dt) < k_eff:
            spare.sort(key=lambda j: (sim[i][j], j))
            dt = dt + spare[:k_eff - len(dt)]
        st_all.append(st)
        dt_all.append(dt)
    return st_all, dt_all


def brute_dependency_vector(features, labels, radii, k):
    """Label similarity -> DT sets -> per-feature mean lower approximation."""
    features = np.asarray(features, dtype=float)
    s, d = features.shape
    sim, flagged = brute_label_similarity(labels)
    _, dt_all = brute_neighbor_sets(sim, flagged, k)
    deps = []
    for p in range(d):
        rel = brute_similarity(features[:, p], radii[p])
        acc = 0.0
        for i in range(s):
            acc += sum(1.0 - rel[i][j] for j in dt_all[i]) / len(dt_all[i])
        deps.append(acc / s)
    return np.array(deps)


# -- graph -------------------------------------------------------------------

def pagerank_solve(vertex_weights, edge_weights, damping):
    """Direct dense solve of the weighted fixed point."""
    w = np.asarray(vertex_weights, dtype=float)
    e = np.asarray(edge_weights, dtype=float)
    d = w.size
    a = np.zeros((d, d))
    for j in range(d):
        total = sum(e[j][z] for z in range(d))
        if total > 0.0:
            for i in range(d):
                a[i][j] = e[i][j] / total
    return np.linalg.solve(np.eye(d) - damping * a, (1.0 - damping) * w)


# -- evaluation --------------------------------------------------------------

def brute_mlknn(train_x, train_y, test_x, k, smooth):
    train_x = np.asarray(train_x, dtype=float)
    train_y = np.asarray(train_y, dtype=int)
    test_x = np.asarray(test_x, dtype=float)
    n, n_lab = train_y.shape

    def dist(a, b):
        return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))

    def knn(point, exclude=None):
        order = sorted((j for j in range(n) if j != exclude),
                       key=lambda j: (dist(point, train_x[j]), j))
        return order[:k]

    prior1 = [(smooth + sum(train_y[i][lab] for i in range(n)))
              / (2 * smooth + n) for lab in range(n_lab)]
    prior0 = [1.0 - p for p in prior1]

    counts = [[sum(train_y[j][lab] for j in knn(train_x[i], exclude=i))
               for lab in range(n_lab)] for i in range(n)]
    c1 = [[smooth] * n_lab for _ in range(k + 1)]
    c0 = [[smooth] * n_lab for _ in range(k + 1)]
    for i in range(n):
        for lab in range(n_lab):
            if train_y[i][lab] == 1:
                c1[counts[i][lab]][lab] += 1
            else:
                c0[counts[i][lab]][lab] += 1
    for lab in range(n_lab):
        tot1 = sum(c1[j][lab] for j in range(k + 1))
        tot0 = sum(c0[j][lab] for j in range(k + 1))
        for j in range(k + 1):
            c1[j][lab] /= tot1
            c0[j][lab] /= tot0

    scores = np.zeros((len(test_x), n_lab))
    for t, point in enumerate(test_x):
        nb = knn(point)
        for lab in range(n_lab):
            c = sum(train_y[j][lab] for j in nb)
            p1 = prior1[lab] * c1[c][lab]
            p0 = prior0[lab] * c0[c][lab]
            scores[t][lab] = p1 / (p1 + p0)
    return scores


def brute_ranks(score_row):
    n_lab = len(score_row)
    order = sorted(range(n_lab), key=lambda lab: (-score_row[lab], lab))
    ranks = [0] * n_lab
    for pos, lab in enumerate(order, start=1):
        ranks[lab] = pos
    return ranks


def brute_average_precision(scores, truth):
    vals = []
    for i in range(len(scores)):
        ranks = brute_ranks(scores[i])
        true = [lab for lab in range(len(ranks)) if truth[i][lab]]
        if not true:
            continue
        acc = 0.0
        for lab in true:
            better = sum(1 for other in true if ranks[other] <= ranks[lab])
            acc += better / ranks[lab]
        vals.append(acc / len(true))
    return sum(vals) / len(vals)


def brute_coverage(scores, truth):
    vals = []
    for i in range(len(scores)):
        ranks = brute_ranks(scores[i])
        true = [lab for lab in range(len(ranks)) if truth[i][lab]]
        if not true:
            continue
        vals.append(max(ranks[lab] for lab in true) - 1)
    return sum(vals) / len(vals)


def brute_ranking_loss(scores, truth):
    vals = []
    for i in range(len(scores)):
        ranks = brute_ranks(scores[i])
        true = [lab for lab in range(len(ranks)) if truth[i][lab]]
        false = [lab for lab in range(len(ranks)) if not truth[i][lab]]
        if not true or not false:
            continue
        bad = sum(1 for a in true for b in false if ranks[a] > ranks[b])
        vals.append(bad / (len(true) * len(false)))
    return sum(vals) / len(vals)


def pooled_std(chunks):
    return float(np.std(np.concatenate(chunks), ddof=1))
