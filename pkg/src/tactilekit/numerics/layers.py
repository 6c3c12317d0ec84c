"""Layer implementations for the desk-scale network core.

Public contracts (specs, shape inference, manifests) speak channels-first:
images are (C, H, W), volumes are (C, D, H, W).  Internally every layer
works channels-last, which lets convolution run as a single im2col matmul
with no output transpose.  The conversion happens once at the network
boundary.

Convolution weights are stored as (kh, kw, in_c, out_c) for 2D and
(kd, kh, kw, in_c, out_c) for 3D; fully connected weights as
(in_features, out_features).  All parameters are float32; the layers
themselves are dtype-generic so the gradient checker can run them at
float64.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeCompositionError


def _pair(v):
    return tuple(v) if isinstance(v, (tuple, list)) else (v, v)


def _triple(v):
    return tuple(v) if isinstance(v, (tuple, list)) else (v, v, v)


# ---------------------------------------------------------------------------
# im2col convolution, shared by the 2D and 3D layers


def _conv_nd_forward(x, w, b, stride, padding):
    """x: (N, *spatial, C); w: (*kernel, C, F).  Returns (y, cols)."""
    nd = len(stride)
    kernel = w.shape[:nd]
    cin, cout = w.shape[nd], w.shape[nd + 1]
    if padding != (0,) * nd:
        pads = [(0, 0)] + [(p, p) for p in padding] + [(0, 0)]
        x = np.pad(x, pads)
    n = x.shape[0]
    insp = x.shape[1:-1]
    outsp = tuple((insp[d] - kernel[d]) // stride[d] + 1 for d in range(nd))
    cols = np.empty((n, *outsp, *kernel, cin), dtype=x.dtype)
    for idx in np.ndindex(*kernel):
        sl = (slice(None),) + tuple(
            slice(idx[d], idx[d] + stride[d] * outsp[d], stride[d]) for d in range(nd)
        )
        cols[(slice(None),) * (1 + nd) + idx] = x[sl]
    cols2 = cols.reshape(n * int(np.prod(outsp)), int(np.prod(kernel)) * cin)
    y = cols2 @ w.reshape(-1, cout)
    if b is not None:
        y += b
    return y.reshape(n, *outsp, cout), cols2


def _conv_nd_backward(dy, cols2, x_shape, w, stride, padding, need_wgrad):
    """Gradients for _conv_nd_forward; x_shape is the unpadded input shape."""
    nd = len(stride)
    kernel = w.shape[:nd]
    cin, cout = w.shape[nd], w.shape[nd + 1]
    n = x_shape[0]
    insp = tuple(x_shape[1 + d] + 2 * padding[d] for d in range(nd))
    outsp = dy.shape[1:-1]
    dyf = dy.reshape(-1, cout)
    dw = db = None
    if need_wgrad:
        dw = (cols2.T @ dyf).reshape(w.shape)
        db = dyf.sum(axis=0)
    dcols = (dyf @ w.reshape(-1, cout).T).reshape(n, *outsp, *kernel, cin)
    dxp = np.zeros((n, *insp, cin), dtype=dy.dtype)
    for idx in np.ndindex(*kernel):
        sl = (slice(None),) + tuple(
            slice(idx[d], idx[d] + stride[d] * outsp[d], stride[d]) for d in range(nd)
        )
        dxp[sl] += dcols[(slice(None),) * (1 + nd) + idx]
    if padding != (0,) * nd:
        crop = (slice(None),) + tuple(
            slice(padding[d], padding[d] + x_shape[1 + d]) for d in range(nd)
        ) + (slice(None),)
        dxp = dxp[crop]
    return dxp, dw, db


def _he_std(fan_in):
    return float(np.sqrt(2.0 / fan_in))


# ---------------------------------------------------------------------------
# layer specs


@dataclass
class Conv2D:
    in_channels: int
    out_channels: int
    kernel: tuple = (3, 3)
    stride: tuple = (1, 1)
    padding: tuple = (1, 1)
    bias: bool = False
    trainable: bool = True

    kind = "Conv2D"

    def __post_init__(self):
        self.kernel = _pair(self.kernel)
        self.stride = _pair(self.stride)
        self.padding = _pair(self.padding)
        if min(self.kernel) < 1 or self.out_channels < 1:
            raise ValueError("kernel extents and output channels must be positive")

    def out_shape(self, in_shape):
        if len(in_shape) != 3 or in_shape[0] != self.in_channels:
            raise ValueError(
                f"expected ({self.in_channels}, H, W) input, got {in_shape}"
            )
        oh = (in_shape[1] + 2 * self.padding[0] - self.kernel[0]) // self.stride[0] + 1
        ow = (in_shape[2] + 2 * self.padding[1] - self.kernel[1]) // self.stride[1] + 1
        if oh < 1 or ow < 1:
            raise ValueError(f"kernel {self.kernel} larger than padded input {in_shape}")
        return (self.out_channels, oh, ow)

    def param_shapes(self):
        shapes = {"w": (*self.kernel, self.in_channels, self.out_channels)}
        if self.bias:
            shapes["b"] = (self.out_channels,)
        return shapes

    def init_param(self, name, shape, rng):
        if name == "b":
            return np.zeros(shape, np.float32)
        std = _he_std(self.in_channels * self.kernel[0] * self.kernel[1])
        return (rng.standard_normal(shape) * std).astype(np.float32)

    def forward(self, p, x, mode, frozen):
        y, cols2 = _conv_nd_forward(x, p["w"], p.get("b"), self.stride, self.padding)
        return y, (cols2, x.shape)

    def backward(self, p, cache, dy, need_wgrad):
        cols2, x_shape = cache
        dx, dw, db = _conv_nd_backward(
            dy, cols2, x_shape, p["w"], self.stride, self.padding, need_wgrad
        )
        grads = {}
        if need_wgrad:
            grads["w"] = dw
            if self.bias:
                grads["b"] = db
        return dx, grads

    def to_json(self):
        return {
            "kind": self.kind,
            "in_channels": self.in_channels,
            "out_channels": self.out_channels,
            "kernel": list(self.kernel),
            "stride": list(self.stride),
            "padding": list(self.padding),
            "bias": self.bias,
        }


@dataclass
class Conv3D(Conv2D):
    kernel: tuple = (3, 3, 3)
    stride: tuple = (1, 1, 1)
    padding: tuple = (1, 1, 1)

    kind = "Conv3D"

    def __post_init__(self):
        self.kernel = _triple(self.kernel)
        self.stride = _triple(self.stride)
        self.padding = _triple(self.padding)
        if min(self.kernel) < 1 or self.out_channels < 1:
            raise ValueError("kernel extents and output channels must be positive")

    def out_shape(self, in_shape):
        if len(in_shape) != 4 or in_shape[0] != self.in_channels:
            raise ValueError(
                f"expected ({self.in_channels}, D, H, W) input, got {in_shape}"
            )
        out = []
        for d in range(3):
            o = (in_shape[1 + d] + 2 * self.padding[d] - self.kernel[d]) // self.stride[d] + 1
            if o < 1:
                raise ValueError(
                    f"kernel {self.kernel} larger than padded input {in_shape}"
                )
            out.append(o)
        return (self.out_channels, *out)

    def init_param(self, name, shape, rng):
        if name == "b":
            return np.zeros(shape, np.float32)
        std = _he_std(self.in_channels * int(np.prod(self.kernel)))
        return (rng.standard_normal(shape) * std).astype(np.float32)


@dataclass
class BatchNorm:
    channels: int
    momentum: float = 0.1
    epsilon: float = 1e-5
    trainable: bool = True

    kind = "BatchNorm"

    def out_shape(self, in_shape):
        if in_shape[0] != self.channels:
            raise ValueError(f"expected {self.channels} channels, got {in_shape}")
        return tuple(in_shape)

    def param_shapes(self):
        return {"gamma": (self.channels,), "beta": (self.channels,)}

    def buffer_shapes(self):
        return {"running_mean": (self.channels,), "running_var": (self.channels,)}

    def init_param(self, name, shape, rng):
        return np.ones(shape, np.float32) if name == "gamma" else np.zeros(shape, np.float32)

    def init_buffer(self, name, shape):
        return np.ones(shape, np.float32) if name == "running_var" else np.zeros(shape, np.float32)

    def forward(self, p, x, mode, frozen):
        axes = tuple(range(x.ndim - 1))
        if mode == "train" and not frozen:
            mu = x.mean(axis=axes)
            var = x.var(axis=axes)
            mom = x.dtype.type(self.momentum)
            updates = {
                "running_mean": ((1 - mom) * p["running_mean"] + mom * mu).astype(p["running_mean"].dtype),
                "running_var": ((1 - mom) * p["running_var"] + mom * var).astype(p["running_var"].dtype),
            }
            training = True
        else:
            mu = p["running_mean"]
            var = p["running_var"]
            updates = None
            training = False
        ivar = 1.0 / np.sqrt(var + x.dtype.type(self.epsilon))
        xhat = (x - mu) * ivar
        y = p["gamma"] * xhat + p["beta"]
        return y, (xhat, ivar.astype(x.dtype), training, updates)

    def backward(self, p, cache, dy, need_wgrad):
        xhat, ivar, training, _ = cache
        axes = tuple(range(dy.ndim - 1))
        grads = {}
        if need_wgrad:
            grads["gamma"] = (dy * xhat).sum(axis=axes)
            grads["beta"] = dy.sum(axis=axes)
        g = p["gamma"]
        if training:
            m = dy.dtype.type(np.prod([dy.shape[a] for a in axes]))
            dxhat = dy * g
            dx = (ivar / m) * (
                m * dxhat
                - dxhat.sum(axis=axes)
                - xhat * (dxhat * xhat).sum(axis=axes)
            )
        else:
            dx = dy * (g * ivar)
        return dx, grads

    def to_json(self):
        return {
            "kind": self.kind,
            "channels": self.channels,
            "momentum": self.momentum,
            "epsilon": self.epsilon,
        }


@dataclass
class ReLU:
    kind = "ReLU"
    trainable: bool = field(default=False, init=False)

    def out_shape(self, in_shape):
        return tuple(in_shape)

    def forward(self, p, x, mode, frozen):
        y = np.maximum(x, 0)
        return y, y

    def backward(self, p, cache, dy, need_wgrad):
        return dy * (cache > 0), {}

    def to_json(self):
        return {"kind": self.kind}


@dataclass
class MaxPool:
    kernel: tuple = (2, 2)
    stride: tuple | None = None
    padding: tuple = (0, 0)
    trainable: bool = field(default=False, init=False)

    kind = "MaxPool"

    def __post_init__(self):
        self.kernel = _pair(self.kernel)
        self.stride = _pair(self.stride) if self.stride is not None else self.kernel
        self.padding = _pair(self.padding)

    def out_shape(self, in_shape):
        if len(in_shape) != 3:
            raise ValueError(f"expected (C, H, W) input, got {in_shape}")
        oh = (in_shape[1] + 2 * self.padding[0] - self.kernel[0]) // self.stride[0] + 1
        ow = (in_shape[2] + 2 * self.padding[1] - self.kernel[1]) // self.stride[1] + 1
        if oh < 1 or ow < 1:
            raise ValueError(f"pool kernel {self.kernel} larger than input {in_shape}")
        return (in_shape[0], oh, ow)

    def forward(self, p, x, mode, frozen):
        kh, kw = self.kernel
        sh, sw = self.stride
        ph, pw = self.padding
        if (ph, pw) != (0, 0):
            xp = np.pad(x, ((0, 0), (ph, ph), (pw, pw), (0, 0)),
                        constant_values=-np.inf)
        else:
            xp = x
        n, hp, wp, c = xp.shape
        oh = (hp - kh) // sh + 1
        ow = (wp - kw) // sw + 1
        out = np.full((n, oh, ow, c), -np.inf, dtype=x.dtype)
        idx = np.zeros((n, oh, ow, c), dtype=np.uint8)
        for i in range(kh):
            for j in range(kw):
                s = xp[:, i:i + sh * oh:sh, j:j + sw * ow:sw, :]
                m = s > out
                out[m] = s[m]
                idx[m] = i * kw + j
        return out, (idx, x.shape, (hp, wp))

    def backward(self, p, cache, dy, need_wgrad):
        idx, x_shape, (hp, wp) = cache
        kh, kw = self.kernel
        sh, sw = self.stride
        ph, pw = self.padding
        n, oh, ow, c = dy.shape
        dxp = np.zeros((n, hp, wp, c), dtype=dy.dtype)
        for i in range(kh):
            for j in range(kw):
                dxp[:, i:i + sh * oh:sh, j:j + sw * ow:sw, :] += dy * (idx == i * kw + j)
        if (ph, pw) != (0, 0):
            dxp = dxp[:, ph:ph + x_shape[1], pw:pw + x_shape[2], :]
        return dxp, {}

    def to_json(self):
        return {
            "kind": self.kind,
            "kernel": list(self.kernel),
            "stride": list(self.stride),
            "padding": list(self.padding),
        }


@dataclass
class GlobalAvgPool:
    kind = "GlobalAvgPool"
    trainable: bool = field(default=False, init=False)

    def out_shape(self, in_shape):
        return (in_shape[0],)

    def forward(self, p, x, mode, frozen):
        axes = tuple(range(1, x.ndim - 1))
        return x.mean(axis=axes), x.shape

    def backward(self, p, cache, dy, need_wgrad):
        x_shape = cache
        spatial = int(np.prod(x_shape[1:-1]))
        shape = (x_shape[0],) + (1,) * (len(x_shape) - 2) + (x_shape[-1],)
        dx = np.broadcast_to(dy.reshape(shape) / dy.dtype.type(spatial), x_shape)
        return np.ascontiguousarray(dx), {}

    def to_json(self):
        return {"kind": self.kind}


@dataclass
class FullyConnected:
    in_features: int
    out_features: int
    bias: bool = True
    trainable: bool = True

    kind = "FullyConnected"

    def out_shape(self, in_shape):
        if int(np.prod(in_shape)) != self.in_features:
            raise ValueError(
                f"expected {self.in_features} input features, got shape {in_shape}"
            )
        return (self.out_features,)

    def param_shapes(self):
        shapes = {"w": (self.in_features, self.out_features)}
        if self.bias:
            shapes["b"] = (self.out_features,)
        return shapes

    def init_param(self, name, shape, rng):
        if name == "b":
            return np.zeros(shape, np.float32)
        std = _he_std(self.in_features)
        return (rng.standard_normal(shape) * std).astype(np.float32)

    def forward(self, p, x, mode, frozen):
        x_shape = x.shape
        xf = x.reshape(x.shape[0], -1)
        y = xf @ p["w"]
        if self.bias:
            y = y + p["b"]
        return y, (xf, x_shape)

    def backward(self, p, cache, dy, need_wgrad):
        xf, x_shape = cache
        grads = {}
        if need_wgrad:
            grads["w"] = xf.T @ dy
            if self.bias:
                grads["b"] = dy.sum(axis=0)
        dx = (dy @ p["w"].T).reshape(x_shape)
        return dx, grads

    def to_json(self):
        return {
            "kind": self.kind,
            "in_features": self.in_features,
            "out_features": self.out_features,
            "bias": self.bias,
        }


class _ResidualBase:
    """Two 3x3(x3) convs with batch norm and a projected skip when needed.

    The skip path gets a 1x1 projection plus batch norm whenever the channel
    count or stride changes, so its output shape always matches the main path.
    """

    def _children(self):
        convcls = Conv2D if self.kind == "ResidualBlock2D" else Conv3D
        one = (1,) * len(self.stride)
        zero = (0,) * len(self.stride)
        kids = [
            ("conv1", convcls(self.in_channels, self.out_channels,
                              stride=self.stride)),
            ("bn1", BatchNorm(self.out_channels)),
            ("conv2", convcls(self.out_channels, self.out_channels)),
            ("bn2", BatchNorm(self.out_channels)),
        ]
        if self.projected:
            kids.append(("proj", convcls(self.in_channels, self.out_channels,
                                         kernel=one, stride=self.stride,
                                         padding=zero)))
            kids.append(("proj_bn", BatchNorm(self.out_channels)))
        return kids

    @property
    def projected(self):
        return self.in_channels != self.out_channels or any(s != 1 for s in self.stride)

    def out_shape(self, in_shape):
        kids = dict(self._children())
        main = kids["bn2"].out_shape(kids["conv2"].out_shape(
            kids["bn1"].out_shape(kids["conv1"].out_shape(in_shape))))
        skip = in_shape if not self.projected else kids["proj_bn"].out_shape(
            kids["proj"].out_shape(in_shape))
        if tuple(main) != tuple(skip):
            raise ValueError(f"skip shape {skip} does not match main path {main}")
        return tuple(main)

    def param_shapes(self):
        shapes = {}
        for name, child in self._children():
            for pn, sh in child.param_shapes().items():
                shapes[f"{name}.{pn}"] = sh
        return shapes

    def buffer_shapes(self):
        shapes = {}
        for name, child in self._children():
            if hasattr(child, "buffer_shapes"):
                for pn, sh in child.buffer_shapes().items():
                    shapes[f"{name}.{pn}"] = sh
        return shapes

    def sublayers(self):
        """Parameterized sub-layers in forward order, for freeze counting."""
        return self._children()

    def _sub_params(self, p, name):
        prefix = name + "."
        return {k[len(prefix):]: v for k, v in p.items() if k.startswith(prefix)}

    def forward(self, p, x, mode, frozen):
        # `frozen` is the set of child names (e.g. {"bn1"}) running eval-mode.
        kids = dict(self._children())
        caches = {}
        updates = {}

        def run(name, inp):
            y, c = kids[name].forward(
                self._sub_params(p, name), inp, mode, name in frozen
            )
            caches[name] = c
            if isinstance(kids[name], BatchNorm) and c[3]:
                for bn, bv in c[3].items():
                    updates[f"{name}.{bn}"] = bv
            return y

        h = run("bn1", run("conv1", x))
        h = np.maximum(h, 0)
        caches["relu1"] = h
        h = run("bn2", run("conv2", h))
        skip = run("proj_bn", run("proj", x)) if self.projected else x
        y = np.maximum(h + skip, 0)
        caches["out"] = y
        return y, (caches, updates)

    def backward(self, p, cache, dy, need_wgrad):
        # `need_wgrad` is the set of child names whose parameter grads are wanted.
        caches, _ = cache
        kids = dict(self._children())
        grads = {}

        def back(name, d):
            dx, g = kids[name].backward(
                self._sub_params(p, name), caches[name], d, name in need_wgrad
            )
            for pn, gv in g.items():
                grads[f"{name}.{pn}"] = gv
            return dx

        dsum = dy * (caches["out"] > 0)
        d = back("conv2", back("bn2", dsum))
        d = d * (caches["relu1"] > 0)
        dx_main = back("conv1", back("bn1", d))
        dx_skip = back("proj", back("proj_bn", dsum)) if self.projected else dsum
        return dx_main + dx_skip, grads

    def buffer_updates(self, cache):
        return cache[1]


@dataclass
class ResidualBlock2D(_ResidualBase):
    in_channels: int
    out_channels: int
    stride: tuple = (1, 1)
    trainable: bool = True

    kind = "ResidualBlock2D"

    def __post_init__(self):
        self.stride = _pair(self.stride)

    def init_param(self, name, shape, rng):
        child_name, pn = name.split(".", 1)
        return dict(self._children())[child_name].init_param(pn, shape, rng)

    def init_buffer(self, name, shape):
        child_name, pn = name.split(".", 1)
        return dict(self._children())[child_name].init_buffer(pn, shape)

    def to_json(self):
        return {
            "kind": self.kind,
            "in_channels": self.in_channels,
            "out_channels": self.out_channels,
            "stride": list(self.stride),
        }


@dataclass
class ResidualBlock3D(ResidualBlock2D):
    stride: tuple = (1, 1, 1)

    kind = "ResidualBlock3D"

    def __post_init__(self):
        self.stride = _triple(self.stride)


_KINDS = {
    cls.kind: cls
    for cls in (Conv2D, Conv3D, BatchNorm, ReLU, MaxPool, GlobalAvgPool,
                FullyConnected, ResidualBlock2D, ResidualBlock3D)
}


def layer_from_json(obj):
    data = dict(obj)
    kind = data.pop("kind")
    if kind not in _KINDS:
        raise ShapeCompositionError(-1, f"unknown layer kind {kind!r}")
    for key in ("kernel", "stride", "padding"):
        if key in data:
            data[key] = tuple(data[key])
    return _KINDS[kind](**data)
