"""Minimal reverse-mode automatic differentiation over numpy arrays.

A Tensor wraps an ndarray, remembers the operation that produced it,
and accumulates gradients when `backward` runs over the recorded graph
in reverse topological order. Only the handful of operations the
hypernetwork and the benchmark losses need are implemented.
"""

from __future__ import annotations

import numpy as np


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a gradient over the axes numpy broadcast to produce it."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("data", "grad", "_parents", "_backward")

    def __init__(self, data, parents=()):
        self.data = np.asarray(data, dtype=float)
        self.grad = None
        self._parents = parents
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Tensor(shape={self.data.shape})"

    def _accumulate(self, grad):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += grad

    @staticmethod
    def _lift(other) -> "Tensor":
        return other if isinstance(other, Tensor) else Tensor(other)

    def __add__(self, other):
        other = self._lift(other)
        out = Tensor(self.data + other.data, (self, other))

        def backward():
            self._accumulate(_unbroadcast(out.grad, self.data.shape))
            other._accumulate(_unbroadcast(out.grad, other.data.shape))

        out._backward = backward
        return out

    __radd__ = __add__

    def __neg__(self):
        out = Tensor(-self.data, (self,))
        out._backward = lambda: self._accumulate(-out.grad)
        return out

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) + (-self)

    def __mul__(self, other):
        other = self._lift(other)
        out = Tensor(self.data * other.data, (self, other))

        def backward():
            self._accumulate(_unbroadcast(out.grad * other.data, self.data.shape))
            other._accumulate(_unbroadcast(out.grad * self.data, other.data.shape))

        out._backward = backward
        return out

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._lift(other)
        out = Tensor(self.data / other.data, (self, other))

        def backward():
            self._accumulate(_unbroadcast(out.grad / other.data, self.data.shape))
            other._accumulate(
                _unbroadcast(-out.grad * self.data / other.data**2, other.data.shape)
            )

        out._backward = backward
        return out

    def __pow__(self, exponent: float):
        out = Tensor(self.data**exponent, (self,))

        def backward():
            self._accumulate(out.grad * exponent * self.data ** (exponent - 1))

        out._backward = backward
        return out

    def __matmul__(self, other):
        other = self._lift(other)
        out = Tensor(self.data @ other.data, (self, other))

        def backward():
            self._accumulate(out.grad @ other.data.T)
            other._accumulate(self.data.T @ out.grad)

        out._backward = backward
        return out

    def __getitem__(self, key):
        out = Tensor(self.data[key], (self,))

        def backward():
            grad = np.zeros_like(self.data)
            np.add.at(grad, key, out.grad)
            self._accumulate(grad)

        out._backward = backward
        return out

    def sum(self, axis=None):
        out = Tensor(self.data.sum(axis=axis), (self,))

        def backward():
            grad = out.grad
            if axis is not None:
                grad = np.expand_dims(grad, axis)
            self._accumulate(np.broadcast_to(grad, self.data.shape).copy())

        out._backward = backward
        return out

    def mean(self, axis=None):
        count = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis) / count

    def tanh(self):
        value = np.tanh(self.data)
        out = Tensor(value, (self,))
        out._backward = lambda: self._accumulate(out.grad * (1.0 - value**2))
        return out

    def sigmoid(self):
        value = 1.0 / (1.0 + np.exp(-self.data))
        out = Tensor(value, (self,))
        out._backward = lambda: self._accumulate(out.grad * value * (1.0 - value))
        return out

    def exp(self):
        value = np.exp(self.data)
        out = Tensor(value, (self,))
        out._backward = lambda: self._accumulate(out.grad * value)
        return out

    def cos(self):
        out = Tensor(np.cos(self.data), (self,))
        out._backward = lambda: self._accumulate(-out.grad * np.sin(self.data))
        return out

    def sin(self):
        out = Tensor(np.sin(self.data), (self,))
        out._backward = lambda: self._accumulate(out.grad * np.cos(self.data))
        return out

    def sqrt(self):
        value = np.sqrt(self.data)
        out = Tensor(value, (self,))
        out._backward = lambda: self._accumulate(out.grad * 0.5 / value)
        return out

    def backward(self, upstream=None) -> None:
        """Propagate `upstream` (default: ones) through the recorded graph."""
        if upstream is None:
            upstream = np.ones_like(self.data)
        order: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in visited:
                    stack.append((parent, False))
        self._accumulate(np.asarray(upstream, dtype=float))
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward()
