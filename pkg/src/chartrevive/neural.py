"""Dual-stream graph encoders, element pooling, MLP classifier and Adam training.

Everything runs on dense numpy matrices with hand-written backward passes.
Row-vector convention throughout: node features are ``(N, d)`` and a layer
computes ``H @ W.T + b``.
"""

from __future__ import annotations

import hashlib
import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    ChecksumMismatch,
    DimMismatch,
    LabelOutOfRange,
    NonFiniteLoss,
    VersionMismatch,
)
from .graph import FEATURE_DIM, ChartGraph

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
HIDDEN = 64
LAYERS = 2
MLP_DIMS = (512, 256)
STREAMS = ("stroke", "element")


# --------------------------------------------------------------------------
# weights

@dataclass
class EncoderWeights:
    """Per-stream layer parameters.

    ``stroke`` holds ``W1, b1, ..., W{L-1}, b{L-1}`` then ``Wself, Wnbr, bL``;
    ``element`` holds ``W1, b1, ..., WL, bL``.  A stream that is switched off
    (ablation) is ``None``.
    """

    stroke: Optional[dict[str, np.ndarray]]
    element: Optional[dict[str, np.ndarray]]
    layers: int = LAYERS
    hidden: int = HIDDEN

    @property
    def streams(self) -> tuple[str, ...]:
        return tuple(s for s in STREAMS if getattr(self, s) is not None)

    @property
    def fused_dim(self) -> int:
        return self.layers * self.hidden * len(self.streams)


@dataclass
class ClassifierWeights:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    W3: np.ndarray
    b3: np.ndarray

    @property
    def in_dim(self) -> int:
        return self.W1.shape[1]

    @property
    def num_classes(self) -> int:
        return self.W3.shape[0]


@dataclass
class ModelWeights:
    encoder: EncoderWeights
    classifier: ClassifierWeights
    taxonomy: list[str]
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        if not self.taxonomy:
            raise ValueError("taxonomy must be nonempty")
        if self.classifier.num_classes != len(self.taxonomy):
            raise DimMismatch("classifier output size differs from taxonomy length")

    def tensors(self) -> dict[str, np.ndarray]:
        """All parameter arrays, in declaration order, keyed by qualified name."""
        out: dict[str, np.ndarray] = {}
        for s in self.encoder.streams:
            for k, v in getattr(self.encoder, s).items():
                out[f"{s}.{k}"] = v
        for k in ("W1", "b1", "W2", "b2", "W3", "b3"):
            out[f"mlp.{k}"] = getattr(self.classifier, k)
        return out

    def copy(self) -> "ModelWeights":
        enc = EncoderWeights(
            {k: v.copy() for k, v in self.encoder.stroke.items()} if self.encoder.stroke else None,
            {k: v.copy() for k, v in self.encoder.element.items()} if self.encoder.element else None,
            self.encoder.layers, self.encoder.hidden)
        c = self.classifier
        return ModelWeights(enc, ClassifierWeights(*(getattr(c, k).copy() for k in
                                                     ("W1", "b1", "W2", "b2", "W3", "b3"))),
                            list(self.taxonomy), self.format_version)


def _uniform(rng, out_dim, in_dim):
    bound = np.sqrt(1.0 / in_dim)
    return (rng.uniform(-bound, bound, size=(out_dim, in_dim)),
            rng.uniform(-bound, bound, size=out_dim))


def init_weights(taxonomy: Sequence[str], seed: int = 0,
                 streams: Sequence[str] = STREAMS, layers: int = LAYERS,
                 hidden: int = HIDDEN, mlp_dims: Sequence[int] = MLP_DIMS) -> ModelWeights:
    """Uniform(-sqrt(1/fan_in), +sqrt(1/fan_in)) initialisation from ``seed``."""
    rng = np.random.default_rng(seed)
    stroke = element = None
    for s in STREAMS:
        if s not in streams:
            continue
        p: dict[str, np.ndarray] = {}
        in_dim = FEATURE_DIM
        for k in range(1, layers):
            p[f"W{k}"], p[f"b{k}"] = _uniform(rng, hidden, in_dim)
            in_dim = hidden
        if s == "stroke":
            p["Wself"], p[f"b{layers}"] = _uniform(rng, hidden, in_dim)
            p["Wnbr"], _ = _uniform(rng, hidden, in_dim)
            stroke = p
        else:
            p[f"W{layers}"], p[f"b{layers}"] = _uniform(rng, hidden, in_dim)
            element = p
    enc = EncoderWeights(stroke, element, layers, hidden)
    d1, d2 = mlp_dims
    W1, b1 = _uniform(rng, d1, enc.fused_dim)
    W2, b2 = _uniform(rng, d2, d1)
    W3, b3 = _uniform(rng, len(taxonomy), d2)
    return ModelWeights(enc, ClassifierWeights(W1, b1, W2, b2, W3, b3), list(taxonomy))


# --------------------------------------------------------------------------
# graph operators

@dataclass
class GraphOps:
    """Sparse linear operators derived once per graph."""

    x: np.ndarray
    stroke_mean: sp.csr_matrix       # (N, N), rows average stroke neighbours
    kind_onehot: sp.csr_matrix       # (N, K)
    elem_onehot: sp.csr_matrix       # (N, E)
    elem_inv_count: np.ndarray       # (N, 1), 1/|N_e(i) ∪ {i}|
    pool: sp.csr_matrix              # (E, N) mean over element nodes
    elements: list[int]              # element index per pooled row

    def element_mean(self, h: np.ndarray) -> np.ndarray:
        return self.elem_inv_count * self._element_sum(h)

    def element_mean_T(self, g: np.ndarray) -> np.ndarray:
        return self._element_sum(self.elem_inv_count * g)

    def _element_sum(self, h):
        # same-kind nodes of other elements, plus the node itself
        K, E = self.kind_onehot, self.elem_onehot
        return K @ (K.T @ h) - E @ (E.T @ h) + h


def graph_ops(g: ChartGraph) -> GraphOps:
    n = g.num_nodes
    rows, cols = [], []
    for i, j in g.stroke_edges:
        rows += [i, j]
        cols += [j, i]
    A = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    deg = np.asarray(A.sum(axis=1)).ravel()
    inv = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
    stroke_mean = sp.diags(inv) @ A

    kinds = g.kinds
    K = sp.csr_matrix((np.ones(n), (np.arange(n), kinds)), shape=(n, int(kinds.max(initial=0)) + 1))
    elements = [e for e in g.element_order() if g.element_nodes[e]]
    col = {e: c for c, e in enumerate(elements)}
    owner_col = np.array([col[o] for o in g.owners], dtype=np.int64)
    E = sp.csr_matrix((np.ones(n), (np.arange(n), owner_col)), shape=(n, len(elements)))
    kind_count = np.bincount(kinds, minlength=K.shape[1])[kinds]
    elem_count = np.bincount(owner_col, minlength=len(elements))[owner_col]
    cnt = kind_count - elem_count + 1
    sizes = np.bincount(owner_col, minlength=len(elements)).astype(float)
    pool = sp.diags(1.0 / sizes) @ E.T.tocsr()
    return GraphOps(g.features, stroke_mean.tocsr(), K, E, (1.0 / cnt)[:, None],
                    pool.tocsr(), elements)


# --------------------------------------------------------------------------
# forward

def _relu(z):
    return np.maximum(z, 0.0)


def _stream_forward(ops: GraphOps, p: dict, stream: str, layers: int):
    """Returns (per-layer outputs, cache for backward)."""
    h = ops.x
    first = p["W1"] if "W1" in p else p["Wself"]
    if h.shape[1] != first.shape[1]:
        raise DimMismatch(f"feature dim {h.shape[1]} does not match {stream} encoder input")
    outs, cache = [], {"inputs": []}
    for k in range(1, layers):
        cache["inputs"].append(h)
        h = _relu(h @ p[f"W{k}"].T + p[f"b{k}"])
        outs.append(h)
    cache["inputs"].append(h)
    if stream == "stroke":
        m = ops.stroke_mean @ h
        z = h @ p["Wself"].T + m @ p["Wnbr"].T + p[f"b{layers}"]
    else:
        m = ops.element_mean(h)
        z = m @ p[f"W{layers}"].T + p[f"b{layers}"]
    cache["agg"] = m
    outs.append(_relu(z))
    cache["outs"] = outs
    return outs, cache


def encoder_forward(g: ChartGraph, w: EncoderWeights, stream: str,
                    ops: Optional[GraphOps] = None) -> list[np.ndarray]:
    """Per-layer node feature matrices ``(N, hidden)`` of one encoder stream."""
    if g.num_nodes < 1:
        raise ValueError("graph has no nodes")
    p = getattr(w, stream)
    if p is None:
        raise ValueError(f"stream {stream!r} is disabled in these weights")
    ops = ops or graph_ops(g)
    return _stream_forward(ops, p, stream, w.layers)[0]


def fuse_and_pool(g: ChartGraph, stroke_layers, element_layers,
                  ops: Optional[GraphOps] = None) -> np.ndarray:
    """Concatenate per-layer node features and average them over each element."""
    parts = list(stroke_layers or []) + list(element_layers or [])
    n = {p.shape[0] for p in parts}
    if len(n) != 1:
        raise DimMismatch("layer outputs disagree on node count")
    ops = ops or graph_ops(g)
    return ops.pool @ np.concatenate(parts, axis=1)


def _softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _mlp_forward(emb, c: ClassifierWeights):
    if emb.shape[1] != c.in_dim:
        raise DimMismatch(f"embedding dim {emb.shape[1]} != classifier input {c.in_dim}")
    a1 = _relu(emb @ c.W1.T + c.b1)
    a2 = _relu(a1 @ c.W2.T + c.b2)
    logits = a2 @ c.W3.T + c.b3
    return logits, (emb, a1, a2)


def classify(embeddings: np.ndarray, w: ClassifierWeights) -> np.ndarray:
    """Softmax class probabilities per element row."""
    return _softmax(_mlp_forward(np.asarray(embeddings, dtype=float), w)[0])


def predict(g: ChartGraph, w: ModelWeights, ops: Optional[GraphOps] = None):
    """Returns ``(element indices, probabilities (E, C))``."""
    ops = ops or graph_ops(g)
    layers = {s: _stream_forward(ops, getattr(w.encoder, s), s, w.encoder.layers)[0]
              for s in w.encoder.streams}
    emb = fuse_and_pool(g, layers.get("stroke"), layers.get("element"), ops)
    return ops.elements, classify(emb, w.classifier)


# --------------------------------------------------------------------------
# loss and gradients

def loss_and_grads(ops: GraphOps, labels: np.ndarray, w: ModelWeights,
                   scale: float = 1.0) -> tuple[float, dict[str, np.ndarray]]:
    """Summed cross-entropy over the graph's elements (times ``scale``) and its gradients."""
    enc, c = w.encoder, w.classifier
    L = enc.layers
    caches, parts = {}, []
    for s in enc.streams:
        outs, cache = _stream_forward(ops, getattr(enc, s), s, L)
        caches[s] = cache
        parts += outs
    fused = np.concatenate(parts, axis=1)
    emb = ops.pool @ fused
    logits, (emb, a1, a2) = _mlp_forward(emb, c)
    probs = _softmax(logits)
    n = len(labels)
    picked = probs[np.arange(n), labels]
    loss = float(-np.log(np.maximum(picked, 1e-300)).sum()) * scale

    g: dict[str, np.ndarray] = {}
    dlog = probs.copy()
    dlog[np.arange(n), labels] -= 1.0
    dlog *= scale
    g["mlp.W3"] = dlog.T @ a2
    g["mlp.b3"] = dlog.sum(axis=0)
    dz = (dlog @ c.W3) * (a2 > 0)
    g["mlp.W2"] = dz.T @ a1
    g["mlp.b2"] = dz.sum(axis=0)
    dz = (dz @ c.W2) * (a1 > 0)
    g["mlp.W1"] = dz.T @ emb
    g["mlp.b1"] = dz.sum(axis=0)
    dfused = ops.pool.T @ (dz @ c.W1)

    off = 0
    H = enc.hidden
    for s in enc.streams:
        p = getattr(enc, s)
        cache = caches[s]
        outs, inputs = cache["outs"], cache["inputs"]
        douts = [dfused[:, off + k * H: off + (k + 1) * H] for k in range(L)]
        off += L * H
        # final layer
        dz = douts[L - 1] * (outs[L - 1] > 0)
        h_prev = inputs[L - 1]
        g[f"{s}.b{L}"] = dz.sum(axis=0)
        if s == "stroke":
            g[f"{s}.Wself"] = dz.T @ h_prev
            g[f"{s}.Wnbr"] = dz.T @ cache["agg"]
            dh = dz @ p["Wself"] + ops.stroke_mean.T @ (dz @ p["Wnbr"])
        else:
            g[f"{s}.W{L}"] = dz.T @ cache["agg"]
            dh = ops.element_mean_T(dz @ p[f"W{L}"])
        for k in range(L - 1, 0, -1):
            dh = dh + douts[k - 1]
            dz = dh * (outs[k - 1] > 0)
            g[f"{s}.W{k}"] = dz.T @ inputs[k - 1]
            g[f"{s}.b{k}"] = dz.sum(axis=0)
            if k > 1:
                dh = dz @ p[f"W{k}"]
    return loss, g


# --------------------------------------------------------------------------
# training

@dataclass
class TrainConfig:
    learning_rate: float = 0.001
    batch_charts: int = 16
    epochs: int = 200
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    streams: tuple[str, ...] = STREAMS

    def __post_init__(self):
        if not self.learning_rate >= 0:
            raise ValueError("learning_rate must be non-negative")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_charts < 1:
            raise ValueError("batch_charts must be >= 1")


@dataclass
class TrainResult:
    weights: ModelWeights
    loss_log: list[float] = field(default_factory=list)


def _labels_array(ops: GraphOps, labels, num_classes: int) -> np.ndarray:
    if isinstance(labels, dict):
        arr = np.array([labels[e] for e in ops.elements], dtype=np.int64)
    else:
        arr = np.asarray(labels, dtype=np.int64)
    if arr.shape != (len(ops.elements),):
        raise LabelOutOfRange("label count differs from element count")
    if arr.size and (arr.min() < 0 or arr.max() >= num_classes):
        raise LabelOutOfRange(f"labels must lie in [0, {num_classes})")
    return arr


def train(dataset, cfg: TrainConfig, taxonomy: Sequence[str],
          init: Optional[ModelWeights] = None, progress=None) -> TrainResult:
    """Adam on mean element cross-entropy; batches are groups of whole charts.

    ``dataset`` is a list of ``(ChartGraph, labels)`` where labels are either a
    sequence aligned with sorted element indices or a dict element index -> class.
    """
    if not dataset:
        raise ValueError("dataset is empty")
    w = init.copy() if init is not None else init_weights(taxonomy, cfg.seed, cfg.streams)
    C = len(taxonomy)
    prepared = []
    for g, labels in dataset:
        ops = graph_ops(g)
        prepared.append((ops, _labels_array(ops, labels, C)))

    params = w.tensors()
    m = {k: np.zeros_like(v) for k, v in params.items()}
    v2 = {k: np.zeros_like(v) for k, v in params.items()}
    rng = np.random.default_rng(cfg.seed)
    step = 0
    loss_log: list[float] = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(prepared))
        total, count = 0.0, 0
        for b0 in range(0, len(order), cfg.batch_charts):
            batch = [prepared[i] for i in order[b0:b0 + cfg.batch_charts]]
            n_el = sum(len(lab) for _, lab in batch)
            if n_el == 0:
                continue
            grads = {k: np.zeros_like(v) for k, v in params.items()}
            batch_loss = 0.0
            for ops, lab in batch:  # fixed order reduction
                l, gr = loss_and_grads(ops, lab, w, 1.0 / n_el)
                batch_loss += l
                for k, gv in gr.items():
                    grads[k] += gv
            if not np.isfinite(batch_loss):
                raise NonFiniteLoss(epoch)
            total += batch_loss * n_el
            count += n_el
            step += 1
            lr = cfg.learning_rate
            bc1 = 1 - cfg.beta1 ** step
            bc2 = 1 - cfg.beta2 ** step
            for k, p in params.items():
                gk = grads[k]
                m[k] = cfg.beta1 * m[k] + (1 - cfg.beta1) * gk
                v2[k] = cfg.beta2 * v2[k] + (1 - cfg.beta2) * gk * gk
                p -= lr * (m[k] / bc1) / (np.sqrt(v2[k] / bc2) + cfg.eps)
        epoch_loss = total / max(count, 1)
        if not np.isfinite(epoch_loss):
            raise NonFiniteLoss(epoch)
        loss_log.append(epoch_loss)
        log.debug("epoch %d loss %.5f", epoch, epoch_loss)
        if progress is not None:
            progress(epoch, epoch_loss)
    return TrainResult(w, loss_log)


# --------------------------------------------------------------------------
# persistence

def _header(w: ModelWeights, payload: bytes) -> dict:
    return {
        "format_version": w.format_version,
        "taxonomy": list(w.taxonomy),
        "dims": {
            "input": FEATURE_DIM,
            "hidden": w.encoder.hidden,
            "layers": w.encoder.layers,
            "streams": list(w.encoder.streams),
            "mlp": [w.classifier.W1.shape[0], w.classifier.W2.shape[0]],
            "classes": len(w.taxonomy),
            "tensors": [[k, list(v.shape)] for k, v in w.tensors().items()],
        },
        "sha256": hashlib.sha256(payload).hexdigest(),
    }


def dump_weights(w: ModelWeights) -> bytes:
    payload = b"".join(np.ascontiguousarray(v, dtype="<f4").tobytes()
                       for v in w.tensors().values())
    head = json.dumps(_header(w, payload), sort_keys=True).encode()
    return struct.pack("<I", len(head)) + head + payload


def save_weights(w: ModelWeights, path) -> None:
    Path(path).write_bytes(dump_weights(w))


def loads_weights(data: bytes) -> ModelWeights:
    if len(data) < 4:
        raise ChecksumMismatch("weights file too short")
    (hlen,) = struct.unpack("<I", data[:4])
    try:
        head = json.loads(data[4:4 + hlen].decode())
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise ChecksumMismatch("weights header is corrupt") from None
    if head.get("format_version") != FORMAT_VERSION:
        raise VersionMismatch(f"unsupported weights format {head.get('format_version')}")
    payload = data[4 + hlen:]
    if hashlib.sha256(payload).hexdigest() != head.get("sha256"):
        raise ChecksumMismatch("weights payload checksum mismatch")
    flat = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    dims = head["dims"]
    tensors, off = {}, 0
    for name, shape in dims["tensors"]:
        size = int(np.prod(shape))
        tensors[name] = flat[off:off + size].reshape(shape).copy()
        off += size
    L = dims["layers"]
    groups: dict[str, dict] = {"stroke": None, "element": None}
    for s in dims["streams"]:
        groups[s] = {k.split(".", 1)[1]: v for k, v in tensors.items() if k.startswith(s + ".")}
    enc = EncoderWeights(groups["stroke"], groups["element"], L, dims["hidden"])
    cls = ClassifierWeights(*(tensors[f"mlp.{k}"] for k in ("W1", "b1", "W2", "b2", "W3", "b3")))
    return ModelWeights(enc, cls, head["taxonomy"], head["format_version"])


def load_weights(path) -> ModelWeights:
    return loads_weights(Path(path).read_bytes())
