"""Network assembly: shape inference, forward with tape, exact backward.

A network is an ordered list of layer specs plus an input shape and a class
count.  Parameters and batch-norm buffers live in a flat dict keyed by
qualified names ("l3.conv1.w"), which also fixes the order of weight blobs
in serialized artifacts.  The forward pass records a tape; the backward
pass replays it to produce exact gradients of the loss with respect to
every trainable parameter.

Inputs and logits are channels-first at this boundary: (N, C, H, W) for 2D
networks, (N, C, D, H, W) for 3D ones, logits (N, num_classes).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeCompositionError, StaleTapeError
from ..rng import make_generator
from .layers import layer_from_json


@dataclass(frozen=True)
class ParamLayer:
    """One parameterized layer: the freeze/transfer unit."""

    name: str
    param_names: tuple
    buffer_names: tuple


@dataclass
class Tape:
    """Activation record from one forward pass."""

    network: "NetworkSpec"
    params_id: int
    mode: str
    caches: list
    buffer_updates: dict
    batch_size: int


@dataclass
class NetworkSpec:
    layers: list
    input_shape: tuple
    num_classes: int

    def __post_init__(self):
        self.input_shape = tuple(self.input_shape)
        self._check_composition()

    # -- shape inference ----------------------------------------------------

    def _check_composition(self):
        """Infer all intermediate shapes; fail on the first offending layer."""
        shape = self.input_shape
        shapes = [shape]
        for i, layer in enumerate(self.layers):
            try:
                shape = layer.out_shape(shape)
            except ValueError as exc:
                raise ShapeCompositionError(i, str(exc)) from exc
            shapes.append(shape)
        if shape != (self.num_classes,):
            raise ShapeCompositionError(
                len(self.layers) - 1,
                f"final layer emits {shape}, expected ({self.num_classes},)",
            )
        self._shapes = shapes

    def layer_shapes(self):
        """Per-layer output shapes (channels-first, no batch extent)."""
        return list(self._shapes)

    # -- parameters ---------------------------------------------------------

    def _qualified(self):
        for i, layer in enumerate(self.layers):
            yield f"l{i}", layer

    def parameterized_layers(self):
        """Parameterized layers in forward order; the last N of these form
        the trainable set of FreezeAllButLast(N)."""
        out = []
        for name, layer in self._qualified():
            if hasattr(layer, "sublayers"):
                for sub, child in layer.sublayers():
                    out.append(ParamLayer(
                        f"{name}.{sub}",
                        tuple(f"{name}.{sub}.{p}" for p in child.param_shapes()),
                        tuple(f"{name}.{sub}.{b}" for b in getattr(child, "buffer_shapes", dict)()),
                    ))
            elif hasattr(layer, "param_shapes"):
                out.append(ParamLayer(
                    name,
                    tuple(f"{name}.{p}" for p in layer.param_shapes()),
                    tuple(f"{name}.{b}" for b in getattr(layer, "buffer_shapes", dict)()),
                ))
        return out

    def array_names(self):
        """All parameter and buffer names in manifest (serialization) order."""
        names = []
        for pl in self.parameterized_layers():
            names.extend(pl.param_names)
            names.extend(pl.buffer_names)
        return names

    def array_shapes(self):
        shapes = {}
        for name, layer in self._qualified():
            if hasattr(layer, "param_shapes"):
                for pn, sh in layer.param_shapes().items():
                    shapes[f"{name}.{pn}"] = tuple(sh)
            if hasattr(layer, "buffer_shapes"):
                for pn, sh in layer.buffer_shapes().items():
                    shapes[f"{name}.{pn}"] = tuple(sh)
        return shapes

    def init_params(self, seed):
        """He-normal weights, unit batch-norm scale, zero shifts and buffers."""
        params = {}
        shapes = self.array_shapes()
        for name, layer in self._qualified():
            if hasattr(layer, "param_shapes"):
                for pn in layer.param_shapes():
                    q = f"{name}.{pn}"
                    rng = make_generator(seed, "init", q)
                    params[q] = layer.init_param(pn, shapes[q], rng)
            if hasattr(layer, "buffer_shapes"):
                for pn in layer.buffer_shapes():
                    q = f"{name}.{pn}"
                    params[q] = layer.init_buffer(pn, shapes[q])
        return params

    def _layer_arrays(self, params, name):
        prefix = name + "."
        return {k[len(prefix):]: v for k, v in params.items() if k.startswith(prefix)}

    # -- execution ----------------------------------------------------------

    def forward(self, params, batch, mode="train", frozen=frozenset()):
        """Run the network on a channels-first batch.

        mode "eval" normalizes with running statistics and is deterministic;
        mode "train" uses batch statistics and records candidate running-stat
        updates on the tape (nothing is mutated here).  `frozen` names
        parameterized layers that run eval-mode regardless.
        """
        batch = np.asarray(batch)
        expect = (len(self.input_shape) + 1, self.input_shape)
        if batch.ndim != expect[0] or tuple(batch.shape[1:]) != self.input_shape:
            raise ShapeCompositionError(
                0, f"batch shape {batch.shape} does not match input "
                   f"(N, {', '.join(map(str, self.input_shape))})")
        if mode not in ("train", "eval"):
            raise ValueError(f"unknown mode {mode!r}")
        x = np.ascontiguousarray(np.moveaxis(batch, 1, -1))
        caches = []
        updates = {}
        for name, layer in self._qualified():
            sub_frozen = {f.split(".", 1)[1] for f in frozen
                          if f.startswith(name + ".")}
            leaf_frozen = name in frozen if not hasattr(layer, "sublayers") else sub_frozen
            x, cache = layer.forward(self._layer_arrays(params, name), x, mode, leaf_frozen)
            caches.append(cache)
            if hasattr(layer, "buffer_updates"):
                for bn, bv in layer.buffer_updates(cache).items():
                    updates[f"{name}.{bn}"] = bv
            elif hasattr(layer, "buffer_shapes") and cache[3]:
                for bn, bv in cache[3].items():
                    updates[f"{name}.{bn}"] = bv
        tape = Tape(self, id(params), mode, caches, updates, batch.shape[0])
        return x, tape

    def backward(self, params, tape, grad_logits):
        """Exact gradients for every trainable parameter.

        Returns a dict mapping qualified parameter names to gradient arrays.
        """
        return self._backward(params, tape, grad_logits, need=None)

    def backward_masked(self, params, tape, grad_logits, trainable_layers):
        """Like backward() but only for the named parameterized layers."""
        return self._backward(params, tape, grad_logits, need=set(trainable_layers))

    def _backward(self, params, tape, grad_logits, need):
        if tape.network is not self:
            raise StaleTapeError("tape was produced by a different network")
        if tape.params_id != id(params):
            raise StaleTapeError("tape was produced with a different parameter set")
        if len(tape.caches) != len(self.layers):
            raise StaleTapeError("tape does not cover this network's layers")
        grads = {}
        d = np.asarray(grad_logits)
        items = list(self._qualified())
        for (name, layer), cache in zip(reversed(items), reversed(tape.caches)):
            if hasattr(layer, "sublayers"):
                if need is None:
                    sub_need = {s for s, _ in layer.sublayers()}
                else:
                    sub_need = {n.split(".", 1)[1] for n in need
                                if n.startswith(name + ".")}
                d, g = layer.backward(self._layer_arrays(params, name), cache, d, sub_need)
            else:
                leaf_need = need is None or name in need
                d, g = layer.backward(self._layer_arrays(params, name), cache, d, leaf_need)
            for pn, gv in g.items():
                grads[f"{name}.{pn}"] = gv
        return grads

    def commit_buffers(self, params, tape, trainable_layers=None):
        """Apply the tape's running-stat updates in place.

        Updates for layers outside `trainable_layers` are dropped, so frozen
        batch-norm layers stay bit-identical during fine-tuning.
        """
        for bname, value in tape.buffer_updates.items():
            layer_name = bname.rsplit(".", 1)[0]
            if trainable_layers is not None and layer_name not in trainable_layers:
                continue
            params[bname][...] = value

    # -- serialization ------------------------------------------------------

    def to_json(self):
        return {
            "input_shape": list(self.input_shape),
            "num_classes": self.num_classes,
            "layers": [layer.to_json() for layer in self.layers],
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            layers=[layer_from_json(l) for l in obj["layers"]],
            input_shape=tuple(obj["input_shape"]),
            num_classes=int(obj["num_classes"]),
        )


def clone_params(params):
    return {k: v.copy() for k, v in params.items()}


def cast_params(params, dtype):
    return {k: v.astype(dtype) for k, v in params.items()}
