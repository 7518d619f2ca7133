"""Gradient-descent learners over real vector spaces.

A neuron with parameters ``a`` and map ``f(a, x)`` trained on a pair ``(x, y)``:

* update:  ``a - lr * J_a^T g``
* request: ``x - J_x^T g``

where ``g`` is the loss cotangent at ``f(a, x)`` (``2 (f(a, x) - y)`` for squared
error).  The learning rate scales the parameter step only; the request carries
the full cotangent so that ``b - b'`` at a wire is exactly the pulled-back
gradient.  In a serial composite the inner neuron sees the target ``b'``, so
its own squared-error cotangent ``2 (b - b')`` is twice the end-to-end
gradient; inner parameter steps are therefore ``2 * lr`` times the
end-to-end gradient while the last layer's steps are ``lr`` times it.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

Array = np.ndarray

# non-finite values are detected and raised explicitly, so numpy's own warnings are noise
_quiet = np.errstate(over="ignore", invalid="ignore", divide="ignore")


class NumericOverflow(FloatingPointError):
    """A non-finite value appeared during evaluation or training."""

    def __init__(self, message: str, trace: TrainTrace | None = None):
        super().__init__(message)
        self.trace = trace


def _finite(v: Array, what: str) -> Array:
    if not np.all(np.isfinite(v)):
        raise NumericOverflow(f"non-finite {what}")
    return v


@dataclass(frozen=True)
class SquaredError:
    def value(self, yhat: Array, y: Array) -> float:
        r = yhat - y
        return float(r @ r)

    def cotangent(self, yhat: Array, y: Array) -> Array:
        return 2.0 * (yhat - y)


class SmoothLearner:
    """Common surface of neurons and their composites."""

    in_dim: int
    out_dim: int
    param_dim: int
    params: Array

    def implement(self, x: Array) -> Array:
        raise NotImplementedError

    def request(self, x: Array, y: Array) -> Array:
        raise NotImplementedError

    def update(self, x: Array, y: Array) -> Array:
        """New parameter vector after one step on ``(x, y)``."""
        raise NotImplementedError

    def with_params(self, params: Array) -> SmoothLearner:
        raise NotImplementedError

    def jacobian_params(self, x: Array) -> Array:
        raise NotImplementedError

    def jacobian_input(self, x: Array) -> Array:
        raise NotImplementedError

    def step(self, x: Array, y: Array) -> SmoothLearner:
        return self.with_params(self.update(x, y))

    @_quiet
    def loss(self, x: Array, y: Array) -> float:
        return SquaredError().value(self.implement(np.asarray(x, float)), np.asarray(y, float))


@dataclass(frozen=True, eq=False)
class Neuron(SmoothLearner):
    in_dim: int
    out_dim: int
    param_dim: int
    params: Array
    fn: Callable[[Array, Array], Array]
    jac_params: Callable[[Array, Array], Array]
    jac_input: Callable[[Array, Array], Array]
    lr: float = 0.01
    loss_fn: SquaredError = field(default_factory=SquaredError)
    name: str = "custom"

    def __post_init__(self):
        params = np.asarray(self.params, dtype=float).reshape(self.param_dim)
        object.__setattr__(self, "params", params)
        if self.lr < 0:
            raise ValueError("learning rate must be non-negative")

    @_quiet
    def implement(self, x):
        out = np.asarray(self.fn(self.params, np.asarray(x, float)), float).reshape(self.out_dim)
        return _finite(out, "output")

    def jacobian_params(self, x):
        j = np.asarray(self.jac_params(self.params, np.asarray(x, float)), float)
        return j.reshape(self.out_dim, self.param_dim)

    def jacobian_input(self, x):
        j = np.asarray(self.jac_input(self.params, np.asarray(x, float)), float)
        return j.reshape(self.out_dim, self.in_dim)

    def _cotangent(self, x, y):
        return self.loss_fn.cotangent(self.implement(x), np.asarray(y, float))

    @_quiet
    def request(self, x, y):
        x = np.asarray(x, float)
        return _finite(x - self.jacobian_input(x).T @ self._cotangent(x, y), "request")

    @_quiet
    def update(self, x, y):
        x = np.asarray(x, float)
        g = self.jacobian_params(x).T @ self._cotangent(x, y)
        return _finite(self.params - self.lr * g, "parameter")

    def with_params(self, params):
        return Neuron(self.in_dim, self.out_dim, self.param_dim, params, self.fn,
                      self.jac_params, self.jac_input, self.lr, self.loss_fn, self.name)


@dataclass(frozen=True, eq=False)
class Serial(SmoothLearner):
    """``first ; second``: parameters concatenated, training routed through requests."""

    first: SmoothLearner
    second: SmoothLearner

    def __post_init__(self):
        if self.first.out_dim != self.second.in_dim:
            raise ValueError(
                f"dimension mismatch: {self.first.out_dim} feeds {self.second.in_dim}")

    @property
    def in_dim(self):
        return self.first.in_dim

    @property
    def out_dim(self):
        return self.second.out_dim

    @property
    def param_dim(self):
        return self.first.param_dim + self.second.param_dim

    @property
    def params(self):
        return np.concatenate([self.first.params, self.second.params])

    def implement(self, x):
        return self.second.implement(self.first.implement(x))

    def _route(self, x, z):
        b = self.first.implement(x)
        return b, self.second.request(b, z)

    def request(self, x, z):
        _, b2 = self._route(x, z)
        return self.first.request(x, b2)

    def update(self, x, z):
        b, b2 = self._route(x, z)
        return np.concatenate([self.first.update(x, b2), self.second.update(b, z)])

    def with_params(self, params):
        params = np.asarray(params, float)
        k = self.first.param_dim
        return Serial(self.first.with_params(params[:k]), self.second.with_params(params[k:]))

    def jacobian_input(self, x):
        b = self.first.implement(x)
        return self.second.jacobian_input(b) @ self.first.jacobian_input(x)

    def jacobian_params(self, x):
        b = self.first.implement(x)
        jm = self.second.jacobian_input(b)
        return np.hstack([jm @ self.first.jacobian_params(x), self.second.jacobian_params(b)])


def request_of(L: SmoothLearner, x, y) -> Array:
    return L.request(np.asarray(x, float), np.asarray(y, float))


def update_of(L: SmoothLearner, x, y) -> Array:
    return L.update(np.asarray(x, float), np.asarray(y, float))


def compose_serial_smooth(L: SmoothLearner, M: SmoothLearner) -> Serial:
    return Serial(L, M)


def chain(layers: Sequence[SmoothLearner]) -> SmoothLearner:
    if not layers:
        raise ValueError("a network needs at least one layer")
    out = layers[0]
    for layer in layers[1:]:
        out = Serial(out, layer)
    return out


# --- built-in neurons ---------------------------------------------------------


def linear(m: int, n: int, init: Sequence[float] | Array | None = None, lr: float = 0.01) -> Neuron:
    """``x -> W x`` with ``W`` (n x m) stored row-major as the parameter vector."""
    init = np.zeros(n * m) if init is None else init

    def fn(a, x):
        return a.reshape(n, m) @ x

    def jp(a, x):
        # d(Wx)_r / dW_{r,c} = x_c
        return np.kron(np.eye(n), x.reshape(1, m))

    def jx(a, x):
        return a.reshape(n, m)

    return Neuron(m, n, n * m, init, fn, jp, jx, lr, name="linear")


def affine(m: int, n: int, init: Sequence[float] | Array | None = None, lr: float = 0.01) -> Neuron:
    """``x -> W x + c``; parameters are ``W`` row-major followed by ``c``."""
    init = np.zeros(n * m + n) if init is None else init

    def fn(a, x):
        return a[: n * m].reshape(n, m) @ x + a[n * m:]

    def jp(a, x):
        return np.hstack([np.kron(np.eye(n), x.reshape(1, m)), np.eye(n)])

    def jx(a, x):
        return a[: n * m].reshape(n, m)

    return Neuron(m, n, n * m + n, init, fn, jp, jx, lr, name="affine")


@dataclass(frozen=True, eq=False)
class IdentityLens(SmoothLearner):
    """The unit for serial composition: passes inputs forward and targets back unchanged.

    Running ``x -> x`` through the gradient formula would request ``2 y - x``
    instead, which doubles the step of whatever sits before it.
    """

    in_dim: int

    @property
    def out_dim(self):
        return self.in_dim

    @property
    def param_dim(self):
        return 0

    @property
    def params(self):
        return np.zeros(0)

    @staticmethod
    def fn(a, x):
        return x

    def implement(self, x):
        return np.asarray(x, float)

    def request(self, x, y):
        return np.asarray(y, float)

    def update(self, x, y):
        return np.zeros(0)

    def with_params(self, params):
        return self

    def jacobian_params(self, x):
        return np.zeros((self.in_dim, 0))

    def jacobian_input(self, x):
        return np.eye(self.in_dim)


def identity_neuron(m: int) -> IdentityLens:
    return IdentityLens(m)


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def sigmoid(m: int) -> Neuron:
    return Neuron(m, m, 0, np.zeros(0), lambda a, x: _sigmoid(x),
                  lambda a, x: np.zeros((m, 0)),
                  lambda a, x: np.diag(_sigmoid(x) * (1.0 - _sigmoid(x))), 0.0, name="sigmoid")


def relu(m: int) -> Neuron:
    return Neuron(m, m, 0, np.zeros(0), lambda a, x: np.maximum(x, 0.0),
                  lambda a, x: np.zeros((m, 0)),
                  lambda a, x: np.diag((x > 0).astype(float)), 0.0, name="relu")


def scalar_product() -> Neuron:
    """``f(a, x) = a * x`` on the reals."""
    return linear(1, 1, [1.0])


ACTIVATIONS = {"identity": identity_neuron, "sigmoid": sigmoid, "relu": relu}


@_quiet
def finite_diff_jacobian(f: Callable[[Array, Array], Array], a, x, which: str = "params") -> Array:
    """Central-difference Jacobian of ``f(a, x)`` in ``a`` or ``x``.

    Step per coordinate is ``1e-6 * max(1, |coordinate|)``.
    """
    a = np.asarray(a, float).ravel()
    x = np.asarray(x, float).ravel()
    if which not in ("params", "input"):
        raise ValueError("which must be 'params' or 'input'")
    base = a if which == "params" else x
    y0 = np.asarray(f(a, x), float).ravel()
    jac = np.zeros((y0.size, base.size))
    for c in range(base.size):
        h = 1e-6 * max(1.0, abs(base[c]))
        hi, lo = base.copy(), base.copy()
        hi[c] += h
        lo[c] -= h
        if which == "params":
            f_hi, f_lo = f(hi, x), f(lo, x)
        else:
            f_hi, f_lo = f(a, hi), f(a, lo)
        col = (np.asarray(f_hi, float).ravel() - np.asarray(f_lo, float).ravel()) / (2 * h)
        jac[:, c] = _finite(col, "finite-difference sample")
    return jac


# --- training -----------------------------------------------------------------


@dataclass
class TrainTrace:
    """Loss before each update and the parameters that loss was measured at."""

    losses: list[float] = field(default_factory=list)
    params: list[Array] = field(default_factory=list)

    def __len__(self):
        return len(self.losses)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "loss"])
            for k, loss in enumerate(self.losses):
                w.writerow([k, repr(loss)])


def train(L: SmoothLearner, dataset: Sequence[tuple], steps: int) -> tuple[SmoothLearner, TrainTrace]:
    """Apply one update per step, cycling through ``dataset`` in order."""
    if steps < 0:
        raise ValueError("steps must be non-negative")
    if steps and not dataset:
        raise ValueError("dataset is empty")
    data = [(np.asarray(x, float), np.asarray(y, float)) for x, y in dataset]
    trace = TrainTrace()
    for k in range(steps):
        x, y = data[k % len(data)]
        try:
            loss = L.loss(x, y)
            if not np.isfinite(loss):
                raise NumericOverflow("non-finite loss")
            new_params = L.update(x, y)
        except NumericOverflow as exc:
            raise NumericOverflow(f"step {k}: {exc}", trace) from exc
        trace.losses.append(loss)
        trace.params.append(L.params)
        L = L.with_params(new_params)
    return L, trace


def mse(L: SmoothLearner, dataset: Iterable[tuple]) -> float:
    losses = [L.loss(x, y) / L.out_dim for x, y in dataset]
    return float(np.mean(losses))


# --- configuration files --------------------------------------------------------


def network_from_config(config: dict | list, seed: int = 0) -> SmoothLearner:
    """Build a serial network from ``{"layers": [...]}`` or a bare list of layer specs."""
    layers_cfg = config["layers"] if isinstance(config, dict) else config
    rng = np.random.default_rng(seed)
    layers = []
    for spec in layers_cfg:
        kind = spec["kind"]
        m = int(spec["in"])
        n = int(spec.get("out", m))
        lr = float(spec.get("eps", 0.01))
        if kind in ("linear", "affine"):
            k = n * m + (n if kind == "affine" else 0)
            init = spec.get("init")
            init = rng.normal(0.0, 0.5, k) if init is None else np.asarray(init, float)
            if init.size != k:
                raise ValueError(f"{kind} layer needs {k} initial parameters, got {init.size}")
            layers.append((linear if kind == "linear" else affine)(m, n, init, lr))
        elif kind == "custom":
            fn = spec.get("fn", "identity")
            if fn not in ACTIVATIONS:
                raise ValueError(f"unknown custom layer {fn!r}; known: {sorted(ACTIVATIONS)}")
            if n != m:
                raise ValueError("elementwise layers keep the dimension")
            layers.append(ACTIVATIONS[fn](m))
        else:
            raise ValueError(f"unknown layer kind {kind!r}")
    return chain(layers)


def read_dataset(path, in_dim: int, out_dim: int) -> list[tuple[Array, Array]]:
    """Rows of ``in_dim`` inputs then ``out_dim`` targets; a non-numeric first row is a header."""
    rows = []
    with open(path, newline="") as fh:
        for k, row in enumerate(csv.reader(fh)):
            if not row:
                continue
            try:
                vals = [float(v) for v in row]
            except ValueError:
                if k == 0:
                    continue
                raise
            if len(vals) != in_dim + out_dim:
                raise ValueError(f"row {k + 1} has {len(vals)} columns, expected {in_dim + out_dim}")
            rows.append((np.array(vals[:in_dim]), np.array(vals[in_dim:])))
    return rows
