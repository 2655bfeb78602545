"""Smooth test functions with analytic derivatives.

Every evaluator is batched: ``value`` maps an (n, d) array to (n,),
``gradient`` to (n, d) and ``hessian`` to (n, d, d).
"""
import math
from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class TestFunction:
    name: str
    value: ArrayFn
    gradient: ArrayFn
    hessian: ArrayFn
    lipschitz: float = math.inf
    sup: float = math.inf

    # keeps pytest from collecting this class
    __test__ = False

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.value(np.atleast_2d(x))

    def scaled(self, factor: float) -> "TestFunction":
        """factor * phi, used by the sign-flip device of the uniqueness check."""
        return TestFunction(
            name=f"{factor:g}*{self.name}",
            value=lambda x: factor * self.value(x),
            gradient=lambda x: factor * self.gradient(x),
            hessian=lambda x: factor * self.hessian(x),
            lipschitz=abs(factor) * self.lipschitz,
            sup=abs(factor) * self.sup,
        )


def constant(c: float, d: int) -> TestFunction:
    return TestFunction(
        name="one" if c == 1.0 else f"const_{c:g}",
        value=lambda x: np.full(x.shape[0], float(c)),
        gradient=lambda x: np.zeros_like(x, dtype=float),
        hessian=lambda x: np.zeros((x.shape[0], d, d)),
        lipschitz=0.0,
        sup=abs(c),
    )


def coordinate(i: int, d: int) -> TestFunction:
    unit = np.eye(d)[i]
    return TestFunction(
        name=f"x{i + 1}",
        value=lambda x: x[:, i].astype(float),
        gradient=lambda x: np.broadcast_to(unit, x.shape).copy(),
        hessian=lambda x: np.zeros((x.shape[0], d, d)),
        lipschitz=1.0,
    )


def product(i: int, j: int, d: int) -> TestFunction:
    second = np.zeros((d, d))
    second[i, j] += 1.0
    second[j, i] += 1.0

    def gradient(x):
        out = np.zeros_like(x, dtype=float)
        out[:, i] += x[:, j]
        out[:, j] += x[:, i]
        return out

    return TestFunction(
        name=f"x{i + 1}x{j + 1}",
        value=lambda x: x[:, i] * x[:, j],
        gradient=gradient,
        hessian=lambda x: np.broadcast_to(second, (x.shape[0], d, d)).copy(),
    )


def sine(i: int, d: int) -> TestFunction:
    def gradient(x):
        out = np.zeros_like(x, dtype=float)
        out[:, i] = np.cos(x[:, i])
        return out

    def hessian(x):
        out = np.zeros((x.shape[0], d, d))
        out[:, i, i] = -np.sin(x[:, i])
        return out

    return TestFunction(
        name=f"sin_x{i + 1}",
        value=lambda x: np.sin(x[:, i]),
        gradient=gradient,
        hessian=hessian,
        lipschitz=1.0,
        sup=1.0,
    )


def gaussian_bump(d: int) -> TestFunction:
    """exp(-|x|^2); its Lipschitz constant is sqrt(2/e)."""
    def value(x):
        return np.exp(-np.sum(x * x, axis=1))

    def gradient(x):
        return -2.0 * x * value(x)[:, None]

    def hessian(x):
        outer = 4.0 * x[:, :, None] * x[:, None, :] - 2.0 * np.eye(d)[None]
        return outer * value(x)[:, None, None]

    return TestFunction(
        name="gauss",
        value=value,
        gradient=gradient,
        hessian=hessian,
        lipschitz=math.sqrt(2.0 / math.e),
        sup=1.0,
    )


def test_function_bank(d: int) -> List[TestFunction]:
    """{1, x_i, x_i x_j, sin(x_i), exp(-|x|^2)} in dimension d."""
    bank = [constant(1.0, d)]
    bank += [coordinate(i, d) for i in range(d)]
    bank += [product(i, j, d) for i in range(d) for j in range(i, d)]
    bank += [sine(i, d) for i in range(d)]
    bank.append(gaussian_bump(d))
    return bank


def bank_by_name(d: int) -> Dict[str, TestFunction]:
    return {phi.name: phi for phi in test_function_bank(d)}


def check_derivatives(phi: TestFunction, d: int, probes: int = 16,
                      seed: int = 0, step: float = 1e-5) -> Dict[str, float]:
    """Largest deviation of the analytic derivatives from central differences.

    Returns:
        dict with keys ``gradient`` and ``hessian``
    """
    rng = np.random.default_rng(seed)
    x = rng.uniform(-2.0, 2.0, size=(probes, d))
    grad = phi.gradient(x)
    hess = phi.hessian(x)
    fd_grad = np.empty_like(grad)
    fd_hess = np.empty_like(hess)
    for j in range(d):
        shift = np.zeros(d)
        shift[j] = step
        fd_grad[:, j] = (phi.value(x + shift) - phi.value(x - shift)) / (2 * step)
        fd_hess[:, :, j] = (phi.gradient(x + shift) - phi.gradient(x - shift)) / (2 * step)
    return {
        "gradient": float(np.max(np.abs(grad - fd_grad))),
        "hessian": float(np.max(np.abs(hess - fd_hess))),
    }
