"""Second-order Taylor arithmetic for matrix-valued functions of the moment coordinates.

A :class:`Jet` carries a value together with its first and second partial
derivatives with respect to ``n`` real parameters.  Arrays are laid out as

* ``val`` : ``(*batch, *shape)``
* ``d1``  : ``(n, *batch, *shape)``
* ``d2``  : ``(n, n, *batch, *shape)``

so that numpy broadcasting handles batches of evaluation points.  Every
operation below is exact calculus (product rule, ``d(A^-1) = -A^-1 dA A^-1``),
never differencing.
"""

from __future__ import annotations

import numpy as np


class Jet:
    __slots__ = ("val", "d1", "d2")
    __array_priority__ = 1000

    def __init__(self, val, d1, d2):
        self.val = val
        self.d1 = d1
        self.d2 = d2

    @property
    def nvars(self) -> int:
        return self.d1.shape[0]

    @classmethod
    def constant(cls, val, nvars: int) -> "Jet":
        val = np.asarray(val)
        return cls(val, np.zeros((nvars,) + val.shape, val.dtype),
                   np.zeros((nvars, nvars) + val.shape, val.dtype))

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.val + other.val, self.d1 + other.d1, self.d2 + other.d2)
        return Jet(self.val + other, self.d1, self.d2)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Jet(-self.val, -self.d1, -self.d2)

    def __mul__(self, other):
        if isinstance(other, Jet):
            a, b = self, other
            d2 = (a.d2 * b.val + a.val * b.d2
                  + a.d1[:, None] * b.d1[None, :] + a.d1[None, :] * b.d1[:, None])
            return Jet(a.val * b.val, a.d1 * b.val + a.val * b.d1, d2)
        return Jet(self.val * other, self.d1 * other, self.d2 * other)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, Jet):
            return matmul(self, other)
        return Jet(self.val @ other, self.d1 @ other, self.d2 @ other)

    def __rmatmul__(self, other):
        return Jet(other @ self.val, other @ self.d1, other @ self.d2)

    @property
    def T(self) -> "Jet":
        return Jet(np.swapaxes(self.val, -1, -2), np.swapaxes(self.d1, -1, -2),
                   np.swapaxes(self.d2, -1, -2))

    def real(self) -> "Jet":
        return Jet(self.val.real, self.d1.real, self.d2.real)


def matmul(a: Jet, b: Jet) -> Jet:
    val = a.val @ b.val
    d1 = a.d1 @ b.val + a.val @ b.d1
    cross = a.d1[:, None] @ b.d1[None, :]
    d2 = a.d2 @ b.val + a.val @ b.d2 + cross + np.swapaxes(cross, 0, 1)
    return Jet(val, d1, d2)


def inv(a: Jet) -> Jet:
    x = np.linalg.inv(a.val)
    xd = x @ a.d1 @ x
    d1 = -xd
    # d_kl X = X A_k X A_l X + X A_l X A_k X - X A_kl X
    cross = xd[:, None] @ a.d1[None, :] @ x
    d2 = cross + np.swapaxes(cross, 0, 1) - x @ a.d2 @ x
    return Jet(x, d1, d2)


def trace(a: Jet) -> Jet:
    return Jet(np.trace(a.val, axis1=-2, axis2=-1),
               np.trace(a.d1, axis1=-2, axis2=-1),
               np.trace(a.d2, axis1=-2, axis2=-1))


def logdet(a: Jet) -> Jet:
    """``log det`` of a matrix jet with positive determinant.

    Uses ``d log det A = tr(A^-1 dA)`` and its derivative.
    """
    x = np.linalg.inv(a.val)
    sign, ld = np.linalg.slogdet(a.val)
    xa = x @ a.d1
    d1 = np.trace(xa, axis1=-2, axis2=-1)
    d2 = (np.trace(x @ a.d2, axis1=-2, axis2=-1)
          - np.trace(xa[:, None] @ xa[None, :], axis1=-2, axis2=-1))
    return Jet(ld, d1, d2)


def sym(a: Jet) -> Jet:
    return (a + a.T) * 0.5


def skew(a: Jet) -> Jet:
    return (a - a.T) * 0.5


def block(rows) -> Jet:
    """Assemble a block matrix jet from a nested list of equally-batched jets."""
    def cat(attr):
        return np.concatenate(
            [np.concatenate([getattr(j, attr) for j in row], axis=-1) for row in rows],
            axis=-2)
    return Jet(cat("val"), cat("d1"), cat("d2"))
