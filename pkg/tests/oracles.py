"""Brute-force reference implementations used as test oracles.

Pure Python, no numpy, and no imports from the package's algorithm modules,
so they stay independent of the code they check.
"""

import math


def mean(xs):
    return sum(xs) / len(xs)


def pop_std(xs):
    m = mean(xs)
    return math.sqrt(sum((x - m) ** 2 for x in xs) / len(xs))


def flow_stats(times, sizes, payload_lens):
    n = len(times)
    duration = times[-1] - times[0]
    gaps = [times[i + 1] - times[i] for i in range(n - 1)]
    byte_count = sum(sizes)
    return {
        "duration_s": duration,
        "bandwidth_bps": byte_count / max(duration, 1e-6),
        "mean_pkt_size": mean(sizes),
        "std_pkt_size": pop_std(sizes),
        "mean_iat": mean(gaps) if gaps else 0.0,
        "std_iat": pop_std(gaps) if gaps else 0.0,
        "payload_ratio": sum(payload_lens) / max(byte_count, 1),
        "pkt_count": float(n),
    }


def pearson(x, y):
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    num = sum((x[i] - mx) * (y[i] - my) for i in range(n))
    vx = sum((v - mx) ** 2 for v in x)
    vy = sum((v - my) ** 2 for v in y)
    if vx == 0 or vy == 0:
        return 0.0
    return num / math.sqrt(vx * vy)


def bin_counts(times, bin_width, t0, t1):
    length = math.ceil((t1 - t0) / bin_width)
    out = [0] * max(length, 0)
    for ts in times:
        for k in range(len(out)):
            if t0 + k * bin_width <= ts < t0 + (k + 1) * bin_width and ts < t1:
                out[k] += 1
                break
    return out


def bucket(sizes, edges):
    nb = len(edges) - 1
    out = [0.0] * nb
    for s in sizes:
        chosen = nb - 1
        for k in range(nb):
            if edges[k] <= s < edges[k + 1]:
                chosen = k
                break
        out[chosen] += 1
    return [c / len(sizes) for c in out]


def cosine(u, v):
    dot = sum(a * b for a, b in zip(u, v))
    nu = math.sqrt(sum(a * a for a in u))
    nv = math.sqrt(sum(b * b for b in v))
    if nu == 0 or nv == 0:
        return 0.0
    return dot / (nu * nv)


def correlate(times1, sizes1, times2, sizes2, bin_width, w_t, w_s, min_bins, edges):
    """Full formula chain for one pair: returns (temporal, size_similarity, combined)."""
    t0 = max(times1[0], times2[0])
    t1 = min(times1[-1], times2[-1])
    temporal = 0.0
    if t1 > t0 and math.ceil((t1 - t0) / bin_width) >= min_bins:
        temporal = pearson(bin_counts(times1, bin_width, t0, t1), bin_counts(times2, bin_width, t0, t1))
    sim = cosine(bucket(sizes1, edges), bucket(sizes2, edges))
    return temporal, sim, w_t * max(temporal, 0.0) + w_s * sim


def dfs_components(nodes, edges, min_size=2):
    adj = {n: set() for n in nodes}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen = set()
    comps = []
    for start in sorted(nodes):
        if start in seen:
            continue
        stack, comp = [start], []
        seen.add(start)
        while stack:
            cur = stack.pop()
            comp.append(cur)
            for nxt in adj[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        if len(comp) >= min_size:
            comps.append(sorted(comp))
    return sorted(comps, key=lambda c: c[0])


def gini_counts(labels):
    if not labels:
        return 0.0
    n = len(labels)
    return 1.0 - sum((labels.count(c) / n) ** 2 for c in set(labels))


def exhaustive_root_split(X, y, min_leaf=1, tol=1e-12):
    """Try every (feature, midpoint) pair; ties resolved by feature, then threshold."""
    n = len(y)
    best = None
    for f in range(len(X[0])):
        values = sorted(set(row[f] for row in X))
        for lo, hi in zip(values, values[1:]):
            thr = (lo + hi) / 2.0
            left = [y[i] for i in range(n) if X[i][f] <= thr]
            right = [y[i] for i in range(n) if X[i][f] > thr]
            if len(left) < min_leaf or len(right) < min_leaf:
                continue
            score = (len(left) * gini_counts(left) + len(right) * gini_counts(right)) / n
            if best is None or score < best[0] - tol:
                best = (score, f, thr)
    return best


def tree_walk(nodes, x):
    """Walk a TreeModel.to_dict()['nodes'] list."""
    i = 0
    while nodes[i]["kind"] == "split":
        n = nodes[i]
        i = n["left"] if x[n["feature"]] <= n["threshold"] else n["right"]
    return nodes[i]["label"]


def lloyd_step(X, labels, k):
    """Recompute means and reassign once; returns new labels."""
    dims = len(X[0])
    cents = []
    for c in range(k):
        members = [X[i] for i in range(len(X)) if labels[i] == c]
        cents.append([sum(m[d] for m in members) / len(members) for d in range(dims)] if members else None)
    out = []
    for x in X:
        best, best_d = None, None
        for c, cent in enumerate(cents):
            if cent is None:
                continue
            d = sum((x[j] - cent[j]) ** 2 for j in range(dims))
            if best_d is None or d < best_d:
                best, best_d = c, d
        out.append(best)
    return out


def wcss(X, labels, k):
    total = 0.0
    dims = len(X[0])
    for c in range(k):
        members = [X[i] for i in range(len(X)) if labels[i] == c]
        if not members:
            continue
        cent = [sum(m[d] for m in members) / len(members) for d in range(dims)]
        total += sum(sum((m[d] - cent[d]) ** 2 for d in range(dims)) for m in members)
    return total
