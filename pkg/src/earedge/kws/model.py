"""Float 1-D CNN wake-word classifier.

Input is an MFCC matrix (49 frames x 13 coefficients) treated as a
13-channel sequence. Layers::

    conv1  13 -> 8, kernel 3, same padding, ReLU, max-pool 2   (49 -> 24)
    drop   0.25 (training only)
    conv2   8 -> 16, kernel 3, same padding, ReLU, max-pool 2  (24 -> 12)
    drop   0.25 (training only)
    dense  192 -> 4, softmax

Flattening is row-major over (time, channel). Features are standardised
per coefficient before conv1 with statistics frozen at training time; these
26 values are model state but not trainable parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LABELS = ("heydotty", "confuse", "noise", "unknown")
INPUT_SHAPE = (49, 13)
KERNEL = 3
CONV1_OUT = 8
CONV2_OUT = 16
DROPOUT = 0.25
PARAM_SHAPES = {
    "conv1.w": (KERNEL, 13, CONV1_OUT),
    "conv1.b": (CONV1_OUT,),
    "conv2.w": (KERNEL, CONV1_OUT, CONV2_OUT),
    "conv2.b": (CONV2_OUT,),
    "dense.w": (12 * CONV2_OUT, len(LABELS)),
    "dense.b": (len(LABELS),),
}


def im2col(x: np.ndarray, k: int = KERNEL) -> np.ndarray:
    """(B, T, C) -> (B, T, k*C) with zero 'same' padding."""
    pad = k // 2
    xp = np.pad(x, ((0, 0), (pad, pad), (0, 0)))
    t = x.shape[1]
    return np.concatenate([xp[:, i:i + t, :] for i in range(k)], axis=2)


def col2im(cols: np.ndarray, c: int, k: int = KERNEL) -> np.ndarray:
    """Adjoint of :func:`im2col`."""
    pad = k // 2
    b, t, _ = cols.shape
    xp = np.zeros((b, t + 2 * pad, c))
    for i in range(k):
        xp[:, i:i + t, :] += cols[:, :, i * c:(i + 1) * c]
    return xp[:, pad:pad + t, :]


def maxpool2(h: np.ndarray):
    """Non-overlapping pool over time; an odd trailing frame is dropped."""
    t = h.shape[1] // 2
    pairs = h[:, : 2 * t, :].reshape(h.shape[0], t, 2, h.shape[2])
    arg = pairs.argmax(axis=2)
    return pairs.max(axis=2), arg


def maxpool2_backward(grad: np.ndarray, arg: np.ndarray, t_in: int) -> np.ndarray:
    b, t, c = grad.shape
    out = np.zeros((b, t, 2, c))
    np.put_along_axis(out, arg[:, :, None, :], grad[:, :, None, :], axis=2)
    full = np.zeros((b, t_in, c))
    full[:, : 2 * t, :] = out.reshape(b, 2 * t, c)
    return full


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass
class KwsModel:
    params: dict[str, np.ndarray]
    norm_mean: np.ndarray = field(default_factory=lambda: np.zeros(INPUT_SHAPE[1]))
    norm_std: np.ndarray = field(default_factory=lambda: np.ones(INPUT_SHAPE[1]))
    labels: tuple[str, ...] = LABELS
    meta: dict = field(default_factory=dict)

    @classmethod
    def init(cls, seed: int = 0) -> KwsModel:
        rng = np.random.default_rng(seed)
        params = {}
        for name, shape in PARAM_SHAPES.items():
            if name.endswith(".b"):
                params[name] = np.zeros(shape)
            else:
                fan_in = int(np.prod(shape[:-1]))
                params[name] = rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)
        return cls(params)

    @classmethod
    def zeros(cls) -> KwsModel:
        return cls({name: np.zeros(shape) for name, shape in PARAM_SHAPES.items()})

    def copy(self) -> KwsModel:
        return KwsModel({k: v.copy() for k, v in self.params.items()}, self.norm_mean.copy(),
                        self.norm_std.copy(), self.labels, dict(self.meta))

    def normalize(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.norm_mean) / self.norm_std

    @property
    def n_params(self) -> int:
        return sum(v.size for v in self.params.values())

    def forward(self, x: np.ndarray, train: bool = False, rng: np.random.Generator | None = None):
        """Logits for a batch ``(B, 49, 13)``; also returns the backward cache."""
        p = self.params
        x = self.normalize(x)
        cols1 = im2col(x)
        z1 = cols1 @ p["conv1.w"].reshape(-1, CONV1_OUT) + p["conv1.b"]
        a1 = np.maximum(z1, 0.0)
        h1, arg1 = maxpool2(a1)
        m1 = _dropout_mask(h1.shape, rng) if train else None
        if m1 is not None:
            h1 = h1 * m1
        cols2 = im2col(h1)
        z2 = cols2 @ p["conv2.w"].reshape(-1, CONV2_OUT) + p["conv2.b"]
        a2 = np.maximum(z2, 0.0)
        h2, arg2 = maxpool2(a2)
        m2 = _dropout_mask(h2.shape, rng) if train else None
        if m2 is not None:
            h2 = h2 * m2
        flat = h2.reshape(h2.shape[0], -1)
        logits = flat @ p["dense.w"] + p["dense.b"]
        cache = dict(x=x, cols1=cols1, z1=z1, arg1=arg1, m1=m1, h1=h1, cols2=cols2,
                     z2=z2, arg2=arg2, m2=m2, flat=flat)
        return logits, cache

    def backward(self, dlogits: np.ndarray, cache: dict) -> dict[str, np.ndarray]:
        """Parameter gradients given d(loss)/d(logits)."""
        p = self.params
        g = {}
        g["dense.w"] = cache["flat"].T @ dlogits
        g["dense.b"] = dlogits.sum(axis=0)
        dflat = dlogits @ p["dense.w"].T
        dh2 = dflat.reshape(dflat.shape[0], 12, CONV2_OUT)
        if cache["m2"] is not None:
            dh2 = dh2 * cache["m2"]
        da2 = maxpool2_backward(dh2, cache["arg2"], cache["z2"].shape[1])
        dz2 = da2 * (cache["z2"] > 0)
        b, t, _ = dz2.shape
        g["conv2.w"] = (cache["cols2"].reshape(b * t, -1).T @ dz2.reshape(b * t, -1)).reshape(
            PARAM_SHAPES["conv2.w"])
        g["conv2.b"] = dz2.sum(axis=(0, 1))
        dcols2 = dz2 @ p["conv2.w"].reshape(-1, CONV2_OUT).T
        dh1 = col2im(dcols2, CONV1_OUT)
        if cache["m1"] is not None:
            dh1 = dh1 * cache["m1"]
        da1 = maxpool2_backward(dh1, cache["arg1"], cache["z1"].shape[1])
        dz1 = da1 * (cache["z1"] > 0)
        b, t, _ = dz1.shape
        g["conv1.w"] = (cache["cols1"].reshape(b * t, -1).T @ dz1.reshape(b * t, -1)).reshape(
            PARAM_SHAPES["conv1.w"])
        g["conv1.b"] = dz1.sum(axis=(0, 1))
        return g

    def loss_and_grad(self, x, y, train: bool = False, rng=None):
        """Mean cross-entropy over the batch and its gradient."""
        logits, cache = self.forward(x, train=train, rng=rng)
        probs = softmax(logits)
        n = len(y)
        loss = -np.mean(np.log(probs[np.arange(n), y] + 1e-300))
        dlogits = probs.copy()
        dlogits[np.arange(n), y] -= 1.0
        dlogits /= n
        return loss, self.backward(dlogits, cache)

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 2
        if single:
            x = x[None]
        if x.shape[1:] != INPUT_SHAPE:
            raise ValueError(f"expected feature matrices of shape {INPUT_SHAPE}, got {x.shape[1:]}")
        probs = softmax(self.forward(x)[0])
        return probs[0] if single else probs


def forward_float(model: KwsModel, features: np.ndarray) -> np.ndarray:
    """Posterior over the four labels for one 49 x 13 feature matrix."""
    features = np.asarray(features)
    if features.shape != INPUT_SHAPE:
        raise ValueError(f"expected {INPUT_SHAPE} features, got {features.shape}")
    return model.predict_proba(features)


def _dropout_mask(shape, rng):
    if rng is None:
        return None
    keep = 1.0 - DROPOUT
    return (rng.random(shape) < keep) / keep
