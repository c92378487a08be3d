"""Independent reference implementations used as test oracles.

Each one is written with plain loops and no code shared with the package, so a
bug in the production path cannot hide in both places at once.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

import numpy as np


# ---------------------------------------------------------------- neural

def relu(v):
    return [max(0.0, a) for a in v]


def matvec(W, v):
    return [sum(W[i][j] * v[j] for j in range(len(v))) for i in range(len(W))]


def dense_stream_forward(x, stroke_edges, kinds, owners, p, stream, layers):
    """Straight-loop forward pass of one encoder stream; list of per-layer outputs."""
    n = len(x)
    h = [list(map(float, row)) for row in x]
    outs = []
    for k in range(1, layers):
        W, b = p[f"W{k}"].tolist(), p[f"b{k}"].tolist()
        h = [relu([a + c for a, c in zip(matvec(W, h[i]), b)]) for i in range(n)]
        outs.append(h)
    last = []
    bL = p[f"b{layers}"].tolist()
    for i in range(n):
        if stream == "stroke":
            nbrs = [j for a, b in stroke_edges for j in ((b,) if a == i else (a,) if b == i else ())]
            agg = ([sum(h[j][d] for j in nbrs) / len(nbrs) for d in range(len(h[i]))]
                   if nbrs else [0.0] * len(h[i]))
            z = [s + t + c for s, t, c in zip(matvec(p["Wself"].tolist(), h[i]),
                                              matvec(p["Wnbr"].tolist(), agg), bL)]
        else:
            group = [j for j in range(n) if j == i or (kinds[j] == kinds[i] and owners[j] != owners[i])]
            agg = [sum(h[j][d] for j in group) / len(group) for d in range(len(h[i]))]
            z = [s + c for s, c in zip(matvec(p[f"W{layers}"].tolist(), agg), bL)]
        last.append(relu(z))
    outs.append(last)
    return [np.array(o) for o in outs]


def dense_classify(emb, W1, b1, W2, b2, W3, b3):
    out = []
    for row in np.asarray(emb).tolist():
        a1 = relu([s + c for s, c in zip(matvec(W1.tolist(), row), b1.tolist())])
        a2 = relu([s + c for s, c in zip(matvec(W2.tolist(), a1), b2.tolist())])
        z = [s + c for s, c in zip(matvec(W3.tolist(), a2), b3.tolist())]
        m = max(z)
        e = [math.exp(v - m) for v in z]
        out.append([v / sum(e) for v in e])
    return np.array(out)


def gradient_check(loss_fn, params: dict, analytic: dict, eps: float = 1e-4,
                   max_entries: int | None = None, seed: int = 0) -> dict:
    """Max relative error per tensor between analytic and central-difference gradients.

    ``loss_fn`` re-evaluates the loss from the (mutated in place) ``params``.
    Relative error is |a - n| / max(|a|, |n|, 1e-8) taken over checked entries;
    entries where both are below 1e-8 count as agreeing.
    """
    rng = np.random.default_rng(seed)
    report = {}
    for name, arr in params.items():
        flat = arr.reshape(-1)
        idx = np.arange(flat.size)
        if max_entries is not None and flat.size > max_entries:
            g = np.abs(analytic[name].reshape(-1))
            top = np.argsort(-g)[: max_entries // 2]
            rest = rng.choice(flat.size, size=max_entries - len(top), replace=False)
            idx = np.unique(np.concatenate([top, rest]))
        worst = 0.0
        for i in idx:
            old = flat[i]
            flat[i] = old + eps
            up = loss_fn()
            flat[i] = old - eps
            down = loss_fn()
            flat[i] = old
            num = (up - down) / (2 * eps)
            a = analytic[name].reshape(-1)[i]
            den = max(abs(a), abs(num))
            if den < 1e-8:
                continue
            worst = max(worst, abs(a - num) / den)
        report[name] = worst
    return report


# ---------------------------------------------------------------- metrics

def _area(b):
    return max(0.0, b[2]) * max(0.0, b[3])


def _iou(a, b):
    ix = max(0.0, min(a[0] + a[2], b[0] + b[2]) - max(a[0], b[0]))
    iy = max(0.0, min(a[1] + a[3], b[1] + b[3]) - max(a[1], b[1]))
    inter = ix * iy
    union = _area(a) + _area(b) - inter
    return inter / union if union > 0 else 0.0


def brute_force_ap(dets, gts, class_id, thr):
    """dets: (chart, (x,y,w,h), cls, conf); gts: (chart, box, cls).

    Greedy matching in rank order, then enumerate every PR point and integrate
    the interpolated precision p(r) = max precision at recall >= r.
    """
    G = [g for g in gts if g[2] == class_id]
    if not G:
        return None
    D = sorted([d for d in dets if d[2] == class_id],
               key=lambda d: (-d[3], d[0], tuple(d[1])))
    taken = set()
    tp_flags = []
    for d in D:
        best, best_v = None, -1.0
        for k, g in enumerate(G):
            if k in taken or g[0] != d[0]:
                continue
            v = _iou(d[1], g[1])
            if v >= thr and v > best_v:
                best, best_v = k, v
        if best is None:
            tp_flags.append(False)
        else:
            taken.add(best)
            tp_flags.append(True)
    points = []  # (recall, precision) after each detection
    tp = 0
    for k, f in enumerate(tp_flags, start=1):
        tp += f
        points.append((Fraction(tp, len(G)), Fraction(tp, k)))
    recalls = sorted({r for r, _ in points})
    ap = Fraction(0)
    prev = Fraction(0)
    for r in recalls:
        p = max(pp for rr, pp in points if rr >= r)
        ap += (r - prev) * p
        prev = r
    return float(ap)


# ---------------------------------------------------------------- insights

def oracle_extreme(vals):
    hi = lo = 0
    for i, v in enumerate(vals):
        if v > vals[hi]:
            hi = i
        if v < vals[lo]:
            lo = i
    return hi, lo


def oracle_rank(vals, top):
    idx = list(range(len(vals)))
    # insertion sort, descending, stable
    for i in range(1, len(idx)):
        j = i
        while j > 0 and vals[idx[j - 1]] < vals[idx[j]]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            j -= 1
    return idx[:top]


def oracle_aggregation(vals):
    exact = sum(Fraction(v) for v in vals)
    total = float(exact)
    return total / len(vals), total, float(len(vals))


def _exact_percentile(vals, q):
    s = sorted(Fraction(v) for v in vals)
    pos = Fraction(q, 100) * (len(s) - 1)
    lo = math.floor(pos)
    hi = min(lo + 1, len(s) - 1)
    return s[lo] + (s[hi] - s[lo]) * (pos - lo)


def oracle_outliers(vals, k=1.5):
    q1, q3 = _exact_percentile(vals, 25), _exact_percentile(vals, 75)
    iqr = q3 - q1
    kk = Fraction(k)
    return [i for i, v in enumerate(vals)
            if Fraction(v) < q1 - kk * iqr or Fraction(v) > q3 + kk * iqr]


def oracle_trend(vals, slope_min=0.05, strong=0.9, weak=0.3):
    n = len(vals)
    slope, intercept = np.polyfit(np.arange(n, dtype=float), np.asarray(vals, dtype=float), 1)
    if max(vals) == min(vals):
        return "fluctuate"
    mean = sum(vals) / n
    ss_tot = sum((v - mean) ** 2 for v in vals)
    ss_res = sum((v - (intercept + slope * i)) ** 2 for i, v in enumerate(vals))
    r2 = max(0.0, 1 - ss_res / ss_tot)
    m = slope * (n - 1) / (max(vals) - min(vals))
    if abs(m) < slope_min or r2 < weak:
        return "fluctuate"
    direction = "increase" if m > 0 else "decrease"
    return direction if r2 >= strong else "fluctuate_" + direction


# ---------------------------------------------------------------- WebVTT

_CUE_TIME = re.compile(r"^(\d{2}):(\d{2}):(\d{2})\.(\d{3}) --> (\d{2}):(\d{2}):(\d{2})\.(\d{3})$")


def read_vtt(text: str):
    """Minimal WebVTT reader: list of (start_ms, end_ms, text). Raises ValueError."""
    lines = text.split("\n")
    if not lines or lines[0] != "WEBVTT":
        raise ValueError("missing WEBVTT header")
    cues = []
    i = 1
    while i < len(lines):
        line = lines[i]
        if not line.strip():
            i += 1
            continue
        m = _CUE_TIME.match(line)
        if not m:
            raise ValueError(f"bad cue timing line {line!r}")
        g = [int(x) for x in m.groups()]
        start = ((g[0] * 60 + g[1]) * 60 + g[2]) * 1000 + g[3]
        end = ((g[4] * 60 + g[5]) * 60 + g[6]) * 1000 + g[7]
        i += 1
        body = []
        while i < len(lines) and lines[i].strip():
            body.append(lines[i])
            i += 1
        if not body:
            raise ValueError("cue without text")
        cues.append((start, end, "\n".join(body)))
    return cues
