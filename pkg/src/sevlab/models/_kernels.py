# Numba kernels for histogram trees. Columns are pre-binned to small integer
# codes (binary columns get exactly two bins), so split search is a scan over
# per-node histograms.

import numpy as np
from numba import njit

GINI = 0
ENTROPY = 1


@njit(cache=True)
def _impurity(w0, w1, criterion):
    tot = w0 + w1
    if tot <= 0.0:
        return 0.0
    p0 = w0 / tot
    p1 = w1 / tot
    if criterion == GINI:
        return 1.0 - p0 * p0 - p1 * p1
    out = 0.0
    if p0 > 0.0:
        out -= p0 * np.log2(p0)
    if p1 > 0.0:
        out -= p1 * np.log2(p1)
    return out


@njit(cache=True)
def build_class_tree(Xb, y, w, rows, n_bins, max_depth, min_samples_leaf, max_features, criterion, random_split, seed):
    """Grow one impurity-based classification tree, depth first.

    ``rows`` lists the participating row indices (it is permuted in place);
    ``w`` carries sample (and bootstrap) weights. Returns node arrays plus the
    per-feature weighted impurity decrease.
    """
    np.random.seed(seed)
    n = rows.shape[0]
    d = Xb.shape[1]
    cap = 2 * n + 1
    feature = np.full(cap, -1, np.int64)
    split_bin = np.zeros(cap, np.int64)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    value = np.zeros(cap, np.float64)
    node_weight = np.zeros(cap, np.float64)
    node_imp = np.zeros(cap, np.float64)
    importance = np.zeros(d, np.float64)

    max_b = 0
    for f in range(d):
        if n_bins[f] > max_b:
            max_b = n_bins[f]
    h0 = np.zeros(max_b, np.float64)
    h1 = np.zeros(max_b, np.float64)
    hc = np.zeros(max_b, np.int64)
    order = np.arange(d)

    st_node = np.zeros(cap, np.int64)
    st_start = np.zeros(cap, np.int64)
    st_end = np.zeros(cap, np.int64)
    st_depth = np.zeros(cap, np.int64)
    sp = 0
    st_node[0] = 0
    st_start[0] = 0
    st_end[0] = n
    st_depth[0] = 0
    sp = 1
    n_nodes = 1

    while sp > 0:
        sp -= 1
        node = st_node[sp]
        start = st_start[sp]
        end = st_end[sp]
        depth = st_depth[sp]

        w0 = 0.0
        w1 = 0.0
        for i in range(start, end):
            r = rows[i]
            if y[r] > 0.5:
                w1 += w[r]
            else:
                w0 += w[r]
        wt = w0 + w1
        value[node] = w1 / wt if wt > 0 else 0.0
        node_weight[node] = wt
        imp = _impurity(w0, w1, criterion)
        node_imp[node] = imp
        count = end - start
        if (max_depth >= 0 and depth >= max_depth) or count < 2 * min_samples_leaf or w0 <= 0.0 or w1 <= 0.0:
            continue

        best_f = -1
        best_t = -1
        best_child = np.inf
        visited = 0
        # lazy Fisher-Yates over features
        for k in range(d):
            j = k + np.random.randint(d - k)
            tmp = order[k]
            order[k] = order[j]
            order[j] = tmp
            f = order[k]
            nb = n_bins[f]
            for b in range(nb):
                h0[b] = 0.0
                h1[b] = 0.0
                hc[b] = 0
            for i in range(start, end):
                r = rows[i]
                b = Xb[r, f]
                hc[b] += 1
                if y[r] > 0.5:
                    h1[b] += w[r]
                else:
                    h0[b] += w[r]
            lo = -1
            hi = -1
            for b in range(nb):
                if hc[b] > 0:
                    if lo < 0:
                        lo = b
                    hi = b
            if lo == hi:
                continue
            visited += 1
            if random_split:
                t0 = lo + np.random.randint(hi - lo)
                t1 = t0 + 1
            else:
                t0 = lo
                t1 = hi
            l0 = 0.0
            l1 = 0.0
            lc = 0
            for b in range(lo, t0):
                l0 += h0[b]
                l1 += h1[b]
                lc += hc[b]
            for t in range(t0, t1):
                l0 += h0[t]
                l1 += h1[t]
                lc += hc[t]
                rc = count - lc
                if lc < min_samples_leaf or rc < min_samples_leaf:
                    continue
                r0 = w0 - l0
                r1 = w1 - l1
                child = (l0 + l1) * _impurity(l0, l1, criterion) + (r0 + r1) * _impurity(r0, r1, criterion)
                if child < best_child:
                    best_child = child
                    best_f = f
                    best_t = t
            if visited >= max_features and best_f >= 0:
                break

        if best_f < 0:
            continue
        gain = wt * imp - best_child
        if gain <= 1e-12 * wt:
            continue

        # partition rows[start:end] so that bin <= best_t comes first
        i = start
        jj = end - 1
        while i <= jj:
            if Xb[rows[i], best_f] <= best_t:
                i += 1
            else:
                tmp = rows[i]
                rows[i] = rows[jj]
                rows[jj] = tmp
                jj -= 1
        mid = i
        feature[node] = best_f
        split_bin[node] = best_t
        importance[best_f] += gain
        lnode = n_nodes
        rnode = n_nodes + 1
        n_nodes += 2
        left[node] = lnode
        right[node] = rnode
        st_node[sp] = rnode
        st_start[sp] = mid
        st_end[sp] = end
        st_depth[sp] = depth + 1
        sp += 1
        st_node[sp] = lnode
        st_start[sp] = start
        st_end[sp] = mid
        st_depth[sp] = depth + 1
        sp += 1

    return (
        feature[:n_nodes],
        split_bin[:n_nodes],
        left[:n_nodes],
        right[:n_nodes],
        value[:n_nodes],
        node_weight[:n_nodes],
        node_imp[:n_nodes],
        importance,
    )


@njit(cache=True)
def _best_gradient_split(Xb, g, h, rows, start, end, n_bins, lam, min_child_weight, min_samples_leaf, random_split, hg, hh, hc):
    # one row-major pass fills every feature histogram (Xb is C-ordered here)
    d = Xb.shape[1]
    G = 0.0
    H = 0.0
    for f in range(d):
        for b in range(n_bins[f]):
            hg[f, b] = 0.0
            hh[f, b] = 0.0
            hc[f, b] = 0
    for i in range(start, end):
        r = rows[i]
        gr = g[r]
        hr = h[r]
        G += gr
        H += hr
        for f in range(d):
            b = Xb[r, f]
            hg[f, b] += gr
            hh[f, b] += hr
            hc[f, b] += 1
    parent = G * G / (H + lam)
    count = end - start
    best_gain = 0.0
    best_f = -1
    best_t = -1
    for f in range(d):
        nb = n_bins[f]
        lo = -1
        hi = -1
        for b in range(nb):
            if hc[f, b] > 0:
                if lo < 0:
                    lo = b
                hi = b
        if lo == hi:
            continue
        if random_split:
            t0 = lo + np.random.randint(hi - lo)
            t1 = t0 + 1
        else:
            t0 = lo
            t1 = hi
        GL = 0.0
        HL = 0.0
        CL = 0
        for b in range(lo, t0):
            GL += hg[f, b]
            HL += hh[f, b]
            CL += hc[f, b]
        for t in range(t0, t1):
            GL += hg[f, t]
            HL += hh[f, t]
            CL += hc[f, t]
            GR = G - GL
            HR = H - HL
            CR = count - CL
            if CL < min_samples_leaf or CR < min_samples_leaf:
                continue
            if HL < min_child_weight or HR < min_child_weight:
                continue
            gain = 0.5 * (GL * GL / (HL + lam) + GR * GR / (HR + lam) - parent)
            if gain > best_gain:
                best_gain = gain
                best_f = f
                best_t = t
    return best_f, best_t, best_gain, -G / (H + lam)


@njit(cache=True)
def build_gradient_tree(Xb, g, h, rows, n_bins, max_depth, max_leaves, leaf_wise, lam, min_child_weight, min_samples_leaf, random_split, seed):
    """Grow one second-order boosting tree.

    Level-wise growth expands every splittable leaf above ``max_depth``;
    leaf-wise growth repeatedly expands the open leaf with the largest gain
    until ``max_leaves`` leaves exist. Leaf values are Newton steps
    ``-G / (H + lam)`` (learning rate applied by the caller).
    """
    np.random.seed(seed)
    n = rows.shape[0]
    cap = 2 * max(max_leaves, 1) + 1
    feature = np.full(cap, -1, np.int64)
    split_bin = np.zeros(cap, np.int64)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    value = np.zeros(cap, np.float64)

    max_b = 0
    for f in range(Xb.shape[1]):
        if n_bins[f] > max_b:
            max_b = n_bins[f]
    d = Xb.shape[1]
    hg = np.zeros((d, max_b), np.float64)
    hh = np.zeros((d, max_b), np.float64)
    hc = np.zeros((d, max_b), np.int64)

    # open leaves
    o_node = np.zeros(cap, np.int64)
    o_start = np.zeros(cap, np.int64)
    o_end = np.zeros(cap, np.int64)
    o_depth = np.zeros(cap, np.int64)
    o_f = np.zeros(cap, np.int64)
    o_t = np.zeros(cap, np.int64)
    o_gain = np.zeros(cap, np.float64)
    n_open = 0

    f0, t0, gain0, v0 = _best_gradient_split(Xb, g, h, rows, 0, n, n_bins, lam, min_child_weight, min_samples_leaf, random_split, hg, hh, hc)
    value[0] = v0
    o_node[0] = 0
    o_start[0] = 0
    o_end[0] = n
    o_depth[0] = 0
    o_f[0] = f0
    o_t[0] = t0
    o_gain[0] = gain0
    n_open = 1
    n_nodes = 1
    n_leaves = 1

    while n_open > 0 and n_leaves < max_leaves:
        pick = -1
        if leaf_wise:
            best = 0.0
            for k in range(n_open):
                ok = o_f[k] >= 0 and (max_depth < 0 or o_depth[k] < max_depth)
                if ok and o_gain[k] > best:
                    best = o_gain[k]
                    pick = k
        else:
            for k in range(n_open):
                if o_f[k] >= 0 and (max_depth < 0 or o_depth[k] < max_depth):
                    pick = k
                    break
        if pick < 0:
            break
        node = o_node[pick]
        start = o_start[pick]
        end = o_end[pick]
        depth = o_depth[pick]
        bf = o_f[pick]
        bt = o_t[pick]
        # drop from open list, keeping FIFO order
        for k in range(pick, n_open - 1):
            o_node[k] = o_node[k + 1]
            o_start[k] = o_start[k + 1]
            o_end[k] = o_end[k + 1]
            o_depth[k] = o_depth[k + 1]
            o_f[k] = o_f[k + 1]
            o_t[k] = o_t[k + 1]
            o_gain[k] = o_gain[k + 1]
        n_open -= 1

        i = start
        jj = end - 1
        while i <= jj:
            if Xb[rows[i], bf] <= bt:
                i += 1
            else:
                tmp = rows[i]
                rows[i] = rows[jj]
                rows[jj] = tmp
                jj -= 1
        mid = i
        feature[node] = bf
        split_bin[node] = bt
        lnode = n_nodes
        rnode = n_nodes + 1
        n_nodes += 2
        n_leaves += 1
        left[node] = lnode
        right[node] = rnode
        for child, cs, ce in ((lnode, start, mid), (rnode, mid, end)):
            cf, ct, cg, cv = _best_gradient_split(Xb, g, h, rows, cs, ce, n_bins, lam, min_child_weight, min_samples_leaf, random_split, hg, hh, hc)
            value[child] = cv
            o_node[n_open] = child
            o_start[n_open] = cs
            o_end[n_open] = ce
            o_depth[n_open] = depth + 1
            o_f[n_open] = cf
            o_t[n_open] = ct
            o_gain[n_open] = cg
            n_open += 1

    return feature[:n_nodes], split_bin[:n_nodes], left[:n_nodes], right[:n_nodes], value[:n_nodes]


@njit(cache=True)
def predict_tree(X, feature, threshold, left, right, value):
    m = X.shape[0]
    out = np.empty(m, np.float64)
    for i in range(m):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]
    return out


@njit(cache=True)
def apply_bins(X, thresholds, n_bins):
    """Bin index per cell: the first threshold that is >= the value."""
    n, d = X.shape
    out = np.empty((n, d), np.uint8)
    for f in range(d):
        nt = n_bins[f] - 1
        for i in range(n):
            v = X[i, f]
            lo = 0
            hi = nt
            while lo < hi:
                mid = (lo + hi) // 2
                if thresholds[f, mid] < v:
                    lo = mid + 1
                else:
                    hi = mid
            out[i, f] = lo
    return out
