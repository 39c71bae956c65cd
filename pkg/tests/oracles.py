"""
Scalar double-loop reference implementations used by the test suite.

Nothing here imports src.tensor ops: every sum, softmax and convolution
is written out element by element over plain numpy arrays, so agreement
with the library is independent evidence.
"""

import math

import numpy as np


def conv_same(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """[Ci, H, W] zero-padded same cross-correlation with [Co, Ci, k, k]."""
    ci, height, width = x.shape
    co, _, k, _ = weight.shape
    pad = k // 2
    out = np.zeros((co, height, width))
    for o in range(co):
        for h in range(height):
            for w in range(width):
                total = bias[o]
                for i in range(ci):
                    for u in range(k):
                        for v in range(k):
                            hh, ww = h + u - pad, w + v - pad
                            if 0 <= hh < height and 0 <= ww < width:
                                total += weight[o, i, u, v] * x[i, hh, ww]
                out[o, h, w] = total
    return out


def softmax_list(values):
    top = max(values)
    exps = [math.exp(v - top) for v in values]
    total = sum(exps)
    return [e / total for e in exps]


def relu_array(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, x, 0.0)


def _dense(vector, weight, bias):
    """1x1 conv on a [C] vector: weight [Co, Ci, 1, 1]."""
    co, ci = weight.shape[:2]
    return [bias[o] + sum(weight[o, i, 0, 0] * vector[i] for i in range(ci)) for o in range(co)]


def asab_reference(x: np.ndarray, p) -> np.ndarray:
    """Spatial branch of one sample [C, H, W] -> [C, 1, 1] (also returns the weights)."""
    channels, height, width = x.shape
    squeeze = conv_same(x, p.squeeze.weight.data, p.squeeze.bias.data)[0]
    flat = [squeeze[h, w] for h in range(height) for w in range(width)]
    weights = softmax_list(flat)
    descriptor = []
    for c in range(channels):
        total = 0.0
        for h in range(height):
            for w in range(width):
                total += x[c, h, w] * weights[h * width + w]
        descriptor.append(total)
    hidden = [max(0.0, v) for v in _dense(descriptor, p.bottleneck_down.weight.data, p.bottleneck_down.bias.data)]
    refined = _dense(hidden, p.bottleneck_up.weight.data, p.bottleneck_up.bias.data)
    scale = 1.0 if p.alpha is None else float(p.alpha.data.reshape(()))
    out = np.array([scale * v for v in refined]).reshape(channels, 1, 1)
    return out, np.array(weights).reshape(1, height, width)


def acab_reference(x: np.ndarray, p) -> np.ndarray:
    """Channel branch of one sample [C, H, W] -> [1, H, W] (also returns the weights)."""
    channels, height, width = x.shape
    means = []
    for c in range(channels):
        total = 0.0
        for h in range(height):
            for w in range(width):
                total += x[c, h, w]
        means.append(total / (height * width))
    weights = softmax_list(means)
    descriptor = np.zeros((1, height, width))
    for h in range(height):
        for w in range(width):
            descriptor[0, h, w] = sum(weights[c] * x[c, h, w] for c in range(channels))
    hidden = relu_array(conv_same(descriptor, p.transform_1.weight.data, p.transform_1.bias.data))
    refined = conv_same(hidden, p.transform_2.weight.data, p.transform_2.bias.data)
    scale = 1.0 if p.beta is None else float(p.beta.data.reshape(()))
    return scale * refined, np.array(weights).reshape(channels, 1, 1)


def adam_reference(x: np.ndarray, p) -> np.ndarray:
    """x + ASAB(x) + ACAB(x) for one sample, broadcast element by element."""
    channels, height, width = x.shape
    spatial = asab_reference(x, p.asab)[0] if p.asab is not None else None
    channel = acab_reference(x, p.acab)[0] if p.acab is not None else None
    out = np.zeros_like(x)
    for c in range(channels):
        for h in range(height):
            for w in range(width):
                value = x[c, h, w]
                if spatial is not None:
                    value += spatial[c, 0, 0]
                if channel is not None:
                    value += channel[0, h, w]
                out[c, h, w] = value
    return out


def aham_reference(feats, p):
    """Hierarchical aggregation of per-sample maps [C, H, W] (also returns the weights)."""
    channels, height, width = feats[0].shape
    scores = []
    for g, f in enumerate(feats):
        pooled = [f[c].sum() / (height * width) for c in range(channels)]
        scores.append(_dense(pooled, p.squeezers[g].weight.data, p.squeezers[g].bias.data)[0])
    weights = softmax_list(scores)
    gamma = float(p.gamma.data.reshape(()))
    out = np.zeros_like(feats[0])
    for c in range(channels):
        for h in range(height):
            for w in range(width):
                mixed = sum(weights[g] * feats[g][c, h, w] for g in range(len(feats)))
                out[c, h, w] = feats[-1][c, h, w] + gamma * mixed
    return out, np.array(weights).reshape(len(feats), 1, 1)
