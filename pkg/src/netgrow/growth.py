"""Function-preserving maps that widen a hidden layer by K neurons.

Three ways to add neurons without changing the network function:

* ``grow_inert``: new neurons get arbitrary biases and incoming weights but
  zero outgoing weights, so nothing downstream reads them.
* ``grow_constant``: new neurons get zero incoming weights (their activation
  is the constant ``g(bias)``) and arbitrary outgoing weights; the next
  layer's biases are shifted to cancel the constant contribution.
* ``grow_split``: an existing neuron is replicated and its outgoing weights
  are divided among the copies by shares that sum to one.

``grow_constant`` with zero outgoing weights and ``grow_split`` also preserve
stationarity of the risk; ``grow_inert`` with nonzero weights generically does
not, which is exactly what incremental training exploits to escape flat
regions. Plans compose several maps across distinct layers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .net_core import TANH, ActivationFunction, ParamVector, Topology

__all__ = [
    "InertGrowth",
    "ConstantGrowth",
    "SplitGrowth",
    "GrowthSpec",
    "GrowthStep",
    "GrowthPlan",
    "grow_inert",
    "grow_constant",
    "grow_split",
    "apply_growth",
    "apply_plan",
    "random_growth",
    "added_param_count",
    "growth_label",
    "SHARE_SUM_TOL",
]

SHARE_SUM_TOL = 1e-12


def _check_hidden_layer(topology: Topology, layer: int) -> None:
    if topology.depth < 2:
        raise ValueError(
            f"topology {topology.layer_sizes} has no hidden layer to grow"
        )
    if not 1 <= layer <= topology.depth - 1:
        raise ValueError(
            f"layer {layer} is not a hidden layer (valid: 1..{topology.depth - 1})"
        )


def _grown_topology(topology: Topology, layer: int, count: int) -> Topology:
    sizes = list(topology.layer_sizes)
    sizes[layer] += count
    return Topology(tuple(sizes))


def added_param_count(topology: Topology, layer: int, count: int) -> int:
    """Parameters gained by adding ``count`` neurons at ``layer``."""
    _check_hidden_layer(topology, layer)
    if count < 0:
        raise ValueError("count must be >= 0")
    below = topology.size(layer - 1)
    above = topology.size(layer + 1)
    return count * (below + 1) + count * above


@dataclass(frozen=True, eq=False)
class InertGrowth:
    """New neurons with given biases/incoming rows and zero outgoing weights."""

    layer: int
    biases: np.ndarray
    in_weights: np.ndarray

    kind = "inert"

    @property
    def count(self) -> int:
        return np.asarray(self.biases).size


@dataclass(frozen=True, eq=False)
class ConstantGrowth:
    """New constant-activation neurons; downstream biases absorb their output."""

    layer: int
    biases: np.ndarray
    out_weights: np.ndarray

    kind = "constant"

    @property
    def count(self) -> int:
        return np.asarray(self.biases).size


@dataclass(frozen=True, eq=False)
class SplitGrowth:
    """Replicate ``source`` and split its outgoing weights by ``shares``.

    ``shares`` has ``count + 1`` entries summing to one; the first is kept by
    the original neuron, the rest go to the copies.
    """

    layer: int
    count: int
    source: int
    shares: np.ndarray

    kind = "split"


GrowthSpec = Union[InertGrowth, ConstantGrowth, SplitGrowth]


def grow_inert(
    theta: ParamVector,
    layer: int,
    biases: np.ndarray,
    in_weights: np.ndarray,
) -> ParamVector:
    """Widen ``layer`` with neurons nobody downstream reads (zero fan-out)."""
    topology = theta.topology
    _check_hidden_layer(topology, layer)
    biases = np.asarray(biases, dtype=np.float64).reshape(-1)
    count = biases.size
    below = topology.size(layer - 1)
    in_weights = np.asarray(in_weights, dtype=np.float64).reshape(count, below)
    if count == 0:
        return theta

    arrays = theta.layer_arrays()
    b, w = arrays[layer - 1]
    arrays[layer - 1] = (np.concatenate([b, biases]), np.vstack([w, in_weights]))
    b_next, w_next = arrays[layer]
    arrays[layer] = (b_next, np.hstack([w_next, np.zeros((w_next.shape[0], count))]))
    return ParamVector.from_layer_arrays(_grown_topology(topology, layer, count), arrays)


def grow_constant(
    theta: ParamVector,
    layer: int,
    biases: np.ndarray,
    out_weights: np.ndarray,
    activation: ActivationFunction = TANH,
) -> ParamVector:
    """Widen ``layer`` with constant neurons and compensate the next layer.

    Each new neuron has zero incoming weights, so its pre-activation is its
    bias for every input. The outgoing weights may be arbitrary because the
    constant contribution ``out_weights @ g(biases)`` is subtracted from the
    next layer's biases.
    """
    topology = theta.topology
    _check_hidden_layer(topology, layer)
    biases = np.asarray(biases, dtype=np.float64).reshape(-1)
    count = biases.size
    above = topology.size(layer + 1)
    out_weights = np.asarray(out_weights, dtype=np.float64).reshape(above, count)
    if count == 0:
        return theta

    arrays = theta.layer_arrays()
    b, w = arrays[layer - 1]
    arrays[layer - 1] = (
        np.concatenate([b, biases]),
        np.vstack([w, np.zeros((count, topology.size(layer - 1)))]),
    )
    b_next, w_next = arrays[layer]
    arrays[layer] = (
        b_next - out_weights @ activation.value(biases),
        np.hstack([w_next, out_weights]),
    )
    return ParamVector.from_layer_arrays(_grown_topology(topology, layer, count), arrays)


def grow_split(
    theta: ParamVector,
    layer: int,
    count: int,
    source: int,
    shares: np.ndarray,
) -> ParamVector:
    """Replicate neuron ``source`` of ``layer`` into ``count`` extra copies."""
    topology = theta.topology
    _check_hidden_layer(topology, layer)
    if count < 0:
        raise ValueError("count must be >= 0")
    width = topology.size(layer)
    if not 0 <= source < width:
        raise ValueError(f"source neuron {source} out of range 0..{width - 1}")
    shares = np.asarray(shares, dtype=np.float64).reshape(-1)
    if shares.size != count + 1:
        raise ValueError(f"need {count + 1} shares for {count} copies, got {shares.size}")
    if abs(shares.sum() - 1.0) > SHARE_SUM_TOL:
        raise ValueError(f"shares must sum to 1, got {shares.sum()!r}")
    if count == 0:
        # A lone share of 1 leaves the source untouched.
        return theta

    arrays = theta.layer_arrays()
    b, w = arrays[layer - 1]
    arrays[layer - 1] = (
        np.concatenate([b, np.repeat(b[source], count)]),
        np.vstack([w, np.tile(w[source], (count, 1))]),
    )
    b_next, w_next = arrays[layer]
    col = w_next[:, source].copy()
    w_grown = np.hstack([w_next, col[:, None] * shares[1:][None, :]])
    w_grown[:, source] = shares[0] * col
    arrays[layer] = (b_next, w_grown)
    return ParamVector.from_layer_arrays(_grown_topology(topology, layer, count), arrays)


def apply_growth(
    theta: ParamVector,
    spec: GrowthSpec,
    activation: ActivationFunction = TANH,
) -> ParamVector:
    if isinstance(spec, InertGrowth):
        return grow_inert(theta, spec.layer, spec.biases, spec.in_weights)
    if isinstance(spec, ConstantGrowth):
        return grow_constant(theta, spec.layer, spec.biases, spec.out_weights, activation)
    if isinstance(spec, SplitGrowth):
        return grow_split(theta, spec.layer, spec.count, spec.source, spec.shares)
    raise TypeError(f"unknown growth spec {type(spec).__name__}")


def random_growth(
    kind: str,
    topology: Topology,
    layer: int,
    count: int,
    rng: np.random.Generator,
) -> GrowthSpec:
    """Draw a growth spec with the default parameter distributions.

    Inert and constant maps draw uniform(0, 1) entries; split picks a uniform
    random source neuron and equal shares ``1 / (count + 1)``.
    """
    _check_hidden_layer(topology, layer)
    if kind == "inert":
        return InertGrowth(
            layer,
            rng.uniform(0.0, 1.0, count),
            rng.uniform(0.0, 1.0, (count, topology.size(layer - 1))),
        )
    if kind == "constant":
        return ConstantGrowth(
            layer,
            rng.uniform(0.0, 1.0, count),
            rng.uniform(0.0, 1.0, (topology.size(layer + 1), count)),
        )
    if kind == "split":
        source = int(rng.integers(topology.size(layer)))
        shares = np.full(count + 1, 1.0 / (count + 1))
        return SplitGrowth(layer, count, source, shares)
    raise ValueError(f"unknown growth kind {kind!r}")


@dataclass(frozen=True)
class GrowthStep:
    kind: str
    layer: int
    count: int

    def __post_init__(self) -> None:
        if self.kind not in ("inert", "constant", "split"):
            raise ValueError(f"unknown growth kind {self.kind!r}")
        if self.count < 1:
            raise ValueError("step count must be >= 1")


@dataclass(frozen=True)
class GrowthPlan:
    """Ordered growth steps over distinct layers, applied in sequence."""

    steps: tuple[GrowthStep, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))
        layers = [s.layer for s in self.steps]
        if len(set(layers)) != len(layers):
            raise ValueError(f"plan layers must be distinct, got {layers}")


def apply_plan(
    theta: ParamVector,
    plan: GrowthPlan,
    *,
    rng: np.random.Generator | None = None,
    params: Sequence[GrowthSpec] | None = None,
    activation: ActivationFunction = TANH,
) -> ParamVector:
    """Apply every step of ``plan``; parameters drawn from ``rng`` or given.

    When ``params`` is provided it must match the plan step for step (same
    kind, layer and count). Any step failure is reported with its index.
    """
    if params is not None and len(params) != len(plan.steps):
        raise ValueError(f"plan has {len(plan.steps)} steps, got {len(params)} params")
    if params is None and rng is None and plan.steps:
        raise ValueError("need either rng or explicit params to apply a plan")
    current = theta
    for index, step in enumerate(plan.steps):
        try:
            if params is not None:
                spec = params[index]
                if (spec.kind, spec.layer, spec.count) != (step.kind, step.layer, step.count):
                    raise ValueError(
                        f"params[{index}] is {spec.kind}@{spec.layer}x{spec.count}, "
                        f"step wants {step.kind}@{step.layer}x{step.count}"
                    )
            else:
                spec = random_growth(step.kind, current.topology, step.layer, step.count, rng)
            current = apply_growth(current, spec, activation)
        except ValueError as exc:
            raise ValueError(f"plan step {index} ({step.kind} at layer {step.layer}): {exc}") from exc
    return current


def growth_label(spec_or_plan) -> str:
    """Short human-readable tag, used in reports and logs."""
    if isinstance(spec_or_plan, GrowthPlan):
        inner = ",".join(f"{s.kind}@{s.layer}x{s.count}" for s in spec_or_plan.steps)
        return f"plan[{inner}]"
    spec = spec_or_plan
    return f"{spec.kind}@{spec.layer}x{spec.count}"
