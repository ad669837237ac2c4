"""Clifford algebra, spinors and bi-spinors at a single tangent space.

Everything lives on ``V = R^{2n}`` with an orthonormal basis ``e_1..e_{2n}``
(use :func:`orthonormal_structures` to bring a metric and its complex
structures into that form).  Basis monomials of ``Cl(V)``, of forms and of
spinors are subsets of generator indices, stored in graded-lexicographic
order.

The spinor model for a compatible complex structure ``J`` is
``Lambda V*_{0,1}`` with basis ``fbar^I`` built from a unitary frame ``f_i``
of ``V^{1,0}``, and

* ``rho(f_i) = sqrt(2) fbar^i ^``
* ``rho(fbar_i) = sqrt(2) iota_{fbar_i}``
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy.linalg import expm, null_space

from .exceptions import EquivarianceError

SQRT2 = np.sqrt(2.0)


# ---------------------------------------------------------------- monomials

@lru_cache(maxsize=None)
def basis_masks(m: int) -> tuple:
    """Bitmasks of all subsets of ``m`` generators in graded-lex order."""
    out = []
    for p in range(m + 1):
        for combo in combinations(range(m), p):
            out.append(sum(1 << i for i in combo))
    return tuple(out)


@lru_cache(maxsize=None)
def _position(m: int) -> dict:
    return {mask: k for k, mask in enumerate(basis_masks(m))}


@lru_cache(maxsize=None)
def _degrees(m: int) -> np.ndarray:
    return np.array([bin(mask).count("1") for mask in basis_masks(m)])


def _below(mask: int, i: int) -> int:
    return bin(mask & ((1 << i) - 1)).count("1")


@lru_cache(maxsize=None)
def wedge_matrix(m: int, i: int) -> np.ndarray:
    """Left exterior multiplication by the ``i``-th degree-one generator."""
    pos = _position(m)
    M = np.zeros((2 ** m, 2 ** m))
    for col, mask in enumerate(basis_masks(m)):
        if not mask >> i & 1:
            M[pos[mask | 1 << i], col] = (-1) ** _below(mask, i)
    M.flags.writeable = False
    return M


@lru_cache(maxsize=None)
def contract_matrix(m: int, i: int) -> np.ndarray:
    """Contraction with the ``i``-th dual generator."""
    return wedge_matrix(m, i).T


@lru_cache(maxsize=None)
def _reversal_signs(m: int) -> np.ndarray:
    d = _degrees(m)
    return (-1.0) ** (d * (d - 1) // 2)


@lru_cache(maxsize=None)
def _parity_signs(m: int) -> np.ndarray:
    return (-1.0) ** _degrees(m)


@lru_cache(maxsize=None)
def _product_table(m: int):
    """``e_A e_B = sign * e_{A xor B}`` for orthonormal generators."""
    masks = basis_masks(m)
    pos = _position(m)
    size = len(masks)
    target = np.empty((size, size), dtype=int)
    sign = np.empty((size, size))
    for a, A in enumerate(masks):
        for b, B in enumerate(masks):
            # count pairs (x in A, y in B) with x > y
            swaps = sum(bin(A >> (y + 1)).count("1") for y in range(m) if B >> y & 1)
            target[a, b] = pos[A ^ B]
            sign[a, b] = (-1) ** swaps
    return target, sign


def _wedge_product(m: int, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    masks = basis_masks(m)
    pos = _position(m)
    out = np.zeros(2 ** m, dtype=complex)
    for a, A in enumerate(masks):
        if x[a] == 0:
            continue
        for b, B in enumerate(masks):
            if A & B or y[b] == 0:
                continue
            swaps = sum(bin(A >> (j + 1)).count("1") for j in range(m) if B >> j & 1)
            out[pos[A | B]] += (-1) ** swaps * x[a] * y[b]
    return out


# ---------------------------------------------------------------- ambient

def _check_complex_structure(J, dim):
    J = np.asarray(J, dtype=float)
    if J.shape != (dim, dim):
        raise ValueError(f"complex structure must be {dim}x{dim}, got {J.shape}")
    if np.abs(J @ J + np.eye(dim)).max() > 1e-10:
        raise ValueError("J must satisfy J^2 = -1")
    if np.abs(J.T @ J - np.eye(dim)).max() > 1e-10:
        raise ValueError("J must be orthogonal (compatible with the identity metric)")
    return J


def standard_complex_structure(n: int) -> np.ndarray:
    """``J e_{2k-1} = e_{2k}`` on ``R^{2n}``."""
    J = np.zeros((2 * n, 2 * n))
    for k in range(n):
        J[2 * k + 1, 2 * k] = 1.0
        J[2 * k, 2 * k + 1] = -1.0
    return J


def orthonormal_structures(g, *Js):
    """Express endomorphisms in a ``g``-orthonormal basis.

    With ``g = L L^T`` the columns of ``B = L^-T`` are orthonormal and an
    endomorphism ``J`` becomes ``B^-1 J B = L^T J L^-T``.

    Returns
    -------
    B : ndarray
        The orthonormal basis, as columns in the original coordinates.
    Js : list of ndarray
    """
    g = np.asarray(g, dtype=float)
    L = np.linalg.cholesky(0.5 * (g + g.T))
    B = np.linalg.inv(L).T
    return B, [L.T @ np.asarray(J, dtype=float) @ B for J in Js]


@dataclass(frozen=True, eq=False)
class SpinorFrame:
    """Unitary frame ``f_1..f_n`` of ``V^{1,0}`` for a complex structure ``J``."""

    J: np.ndarray
    f: np.ndarray           # (2n, n), columns f_i

    @classmethod
    def from_complex_structure(cls, J) -> "SpinorFrame":
        J = np.asarray(J, dtype=float)
        dim = J.shape[0]
        if dim % 2:
            raise ValueError("ambient dimension must be even")
        J = _check_complex_structure(J, dim)
        us = []
        span = np.zeros((dim, 0))
        for k in range(dim):
            v = np.eye(dim)[k]
            v = v - span @ (span.T @ v)
            if np.linalg.norm(v) < 1e-8:
                continue
            u = v / np.linalg.norm(v)
            us.append(u)
            span = np.column_stack([span, u, J @ u])
            if len(us) == dim // 2:
                break
        U = np.column_stack(us)
        f = (U - 1j * (J @ U)) / SQRT2
        return cls(J, f)

    @property
    def n(self) -> int:
        return self.f.shape[1]

    def same_as(self, other: "SpinorFrame") -> bool:
        return self is other or (np.array_equal(self.J, other.J)
                                 and np.array_equal(self.f, other.f))


@dataclass(frozen=True, eq=False)
class CliffordAmbient:
    """``Cl(R^{2n})`` with the identity metric and a compatible ``J``."""

    n: int
    J: np.ndarray

    def __init__(self, n: int, J=None):
        if n < 1:
            raise ValueError("n must be at least 1")
        J = standard_complex_structure(n) if J is None else J
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "J", _check_complex_structure(J, 2 * n))
        object.__setattr__(self, "_frame", SpinorFrame.from_complex_structure(self.J))

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def metric(self) -> np.ndarray:
        return np.eye(self.dim)

    @property
    def frame(self) -> SpinorFrame:
        return self._frame

    def same_as(self, other: "CliffordAmbient") -> bool:
        return self is other or (self.n == other.n and np.array_equal(self.J, other.J))


# ---------------------------------------------------------------- elements

@dataclass(frozen=True, eq=False)
class CliffordElement:
    ambient: CliffordAmbient
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if c.size != 4 ** self.ambient.n:
            raise ValueError(f"expected {4 ** self.ambient.n} coefficients, got {c.size}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def scalar(cls, ambient, value=1.0):
        c = np.zeros(4 ** ambient.n, complex)
        c[0] = value
        return cls(ambient, c)

    @classmethod
    def monomial(cls, ambient, indices, value=1.0):
        """``value * e_{i1} e_{i2} ...`` (zero-based, any order, no repeats)."""
        out = cls.scalar(ambient, value)
        for i in indices:
            out = clifford_multiply(out, cls.vector(ambient, np.eye(ambient.dim)[i]))
        return out

    @classmethod
    def vector(cls, ambient, v):
        v = np.asarray(v)
        if v.shape != (ambient.dim,):
            raise ValueError(f"vector must have length {ambient.dim}")
        c = np.zeros(4 ** ambient.n, complex)
        c[1:1 + ambient.dim] = v
        return cls(ambient, c)

    def __add__(self, other):
        _same_ambient(self, other)
        return CliffordElement(self.ambient, self.coeffs + other.coeffs)

    def __sub__(self, other):
        _same_ambient(self, other)
        return CliffordElement(self.ambient, self.coeffs - other.coeffs)

    def __mul__(self, other):
        if isinstance(other, CliffordElement):
            return clifford_multiply(self, other)
        return CliffordElement(self.ambient, self.coeffs * other)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class Spinor:
    frame: SpinorFrame
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if c.size != 2 ** self.frame.n:
            raise ValueError(f"expected {2 ** self.frame.n} coefficients, got {c.size}")
        object.__setattr__(self, "coeffs", c)

    def __add__(self, other):
        _same_frame(self.frame, other.frame)
        return Spinor(self.frame, self.coeffs + other.coeffs)

    def __mul__(self, s):
        return Spinor(self.frame, self.coeffs * s)

    __rmul__ = __mul__

    def degree_component(self, p: int) -> "Spinor":
        mask = _degrees(self.frame.n) == p
        return Spinor(self.frame, np.where(mask, self.coeffs, 0))


@dataclass(frozen=True, eq=False)
class FormElement:
    """Complex form on ``R^{2n}`` over the graded-lex basis ``e^A``."""

    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if c.size != 4 ** self.n:
            raise ValueError(f"expected {4 ** self.n} coefficients, got {c.size}")
        object.__setattr__(self, "coeffs", c)

    def __add__(self, other):
        return FormElement(self.n, self.coeffs + other.coeffs)

    def __sub__(self, other):
        return FormElement(self.n, self.coeffs - other.coeffs)

    def __mul__(self, s):
        return FormElement(self.n, self.coeffs * s)

    __rmul__ = __mul__

    def twisted(self) -> "FormElement":
        """Parity twist: odd-degree components change sign."""
        return FormElement(self.n, _parity_signs(2 * self.n) * self.coeffs)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


def _same_ambient(a, b):
    if not a.ambient.same_as(b.ambient):
        raise ValueError("Clifford elements live in different ambients")


def _same_frame(f1, f2):
    if not f1.same_as(f2):
        raise ValueError("spinors come from different frames")


def spinor_basis(frame: SpinorFrame, k: int) -> Spinor:
    c = np.zeros(2 ** frame.n, complex)
    c[k] = 1.0
    return Spinor(frame, c)


def form_basis(n: int, indices) -> FormElement:
    c = np.zeros(4 ** n, complex)
    c[_position(2 * n)[sum(1 << i for i in indices)]] = 1.0
    if len(set(indices)) != len(indices):
        raise ValueError("repeated index")
    # graded-lex stores increasing index order; fix the sign of the permutation
    perm_sign = (-1) ** sum(1 for a, b in combinations(indices, 2) if a > b)
    return FormElement(n, c * perm_sign)


# ---------------------------------------------------------------- algebra

def clifford_multiply(a: CliffordElement, b: CliffordElement) -> CliffordElement:
    _same_ambient(a, b)
    target, sign = _product_table(a.ambient.dim)
    terms = np.outer(a.coeffs, b.coeffs) * sign
    out = np.zeros_like(a.coeffs)
    np.add.at(out, target, terms)
    return CliffordElement(a.ambient, out)


def order_reversal(a: CliffordElement) -> CliffordElement:
    """``e_1 ... e_p -> e_p ... e_1``, extended linearly."""
    return CliffordElement(a.ambient, _reversal_signs(a.ambient.dim) * a.coeffs)


def dagger(a: CliffordElement) -> CliffordElement:
    """Conjugate-linear extension of order reversal."""
    return CliffordElement(a.ambient, _reversal_signs(a.ambient.dim) * a.coeffs.conj())


def j_iso(a: CliffordElement) -> FormElement:
    """``e_{i1} ... e_{ip} -> e^{i1} ^ ... ^ e^{ip}`` for orthonormal generators."""
    return FormElement(a.ambient.n, a.coeffs.copy())


def j_iso_inverse(form: FormElement, ambient: CliffordAmbient) -> CliffordElement:
    if form.n != ambient.n:
        raise ValueError("form and ambient dimensions differ")
    return CliffordElement(ambient, form.coeffs.copy())


# ---------------------------------------------------------------- forms

def wedge(x: FormElement, y: FormElement) -> FormElement:
    if x.n != y.n:
        raise ValueError("forms of different dimension")
    return FormElement(x.n, _wedge_product(2 * x.n, x.coeffs, y.coeffs))


def wedge_vector(v, form: FormElement) -> FormElement:
    """``v ^ form`` for a (complex) covector ``v`` in the dual basis."""
    m = 2 * form.n
    M = sum(v[i] * wedge_matrix(m, i) for i in range(m))
    return FormElement(form.n, M @ form.coeffs)


def contract_vector(v, form: FormElement) -> FormElement:
    """``iota_v form`` for a (complex) vector ``v``."""
    m = 2 * form.n
    M = sum(v[i] * contract_matrix(m, i) for i in range(m))
    return FormElement(form.n, M @ form.coeffs)


def generalized_action(X, xi, form: FormElement) -> FormElement:
    """``(X + xi) . form = iota_X form + xi ^ form``."""
    return contract_vector(X, form) + wedge_vector(xi, form)


def plus_action(v, form: FormElement) -> FormElement:
    """``v_+ = v + g(v)``; with the identity metric ``g(v)`` has the same components."""
    return generalized_action(v, v, form)


def minus_action(v, form: FormElement) -> FormElement:
    """``v_- = v - g(v)``."""
    return generalized_action(v, -np.asarray(v), form)


def _lift(element: CliffordElement, form: FormElement, act) -> FormElement:
    m = element.ambient.dim
    out = FormElement(form.n, np.zeros_like(form.coeffs))
    eye = np.eye(m)
    for k, mask in enumerate(basis_masks(m)):
        c = element.coeffs[k]
        if c == 0:
            continue
        term = form
        for i in reversed([j for j in range(m) if mask >> j & 1]):
            term = act(eye[i], term)
        out = out + term * c
    return out


def graded_tensor_action(a: CliffordElement, b: CliffordElement, form: FormElement) -> FormElement:
    """Action of ``a (x) b`` in ``Cl(V, g) (x) Cl(V, -g)``, via ``v (x) w -> v_+ . w_-``."""
    _same_ambient(a, b)
    inner = _lift(b, form, minus_action)
    return _lift(a, inner, plus_action)


def minus_algebra_multiply(a: CliffordElement, b: CliffordElement) -> CliffordElement:
    """Product in ``Cl(V, -g)``: generators square to ``-1``."""
    _same_ambient(a, b)
    m = a.ambient.dim
    target, sign = _product_table(m)
    masks = np.array(basis_masks(m))
    common = np.bitwise_and.outer(masks, masks)
    squares = (-1.0) ** np.array([bin(int(c)).count("1") for c in common.ravel()]).reshape(common.shape)
    out = np.zeros_like(a.coeffs)
    np.add.at(out, target, np.outer(a.coeffs, b.coeffs) * sign * squares)
    return CliffordElement(a.ambient, out)


def chevalley_pairing(x: FormElement, y: FormElement) -> complex:
    """``(x ^ reversal(y))_top``."""
    if x.n != y.n:
        raise ValueError("forms of different dimension")
    m = 2 * x.n
    rev = _reversal_signs(m) * y.coeffs
    return complex(_wedge_product(m, x.coeffs, rev)[-1])


# ---------------------------------------------------------------- spinors

def _generator_matrices(frame: SpinorFrame) -> np.ndarray:
    """``rho(e_k)`` for every orthonormal generator, shape ``(2n, 2^n, 2^n)``."""
    cached = getattr(frame, "_rho_cache", None)
    if cached is not None:
        return cached
    n = frame.n
    wedge_f = [SQRT2 * wedge_matrix(n, i) for i in range(n)]     # rho(f_i)
    contr_f = [SQRT2 * contract_matrix(n, i) for i in range(n)]  # rho(fbar_i)
    # e_k = sum_i g(e_k, fbar_i) f_i + g(e_k, f_i) fbar_i  (complex bilinear g)
    fbar = frame.f.conj()
    mats = np.empty((2 * n, 2 ** n, 2 ** n), complex)
    for k in range(2 * n):
        mats[k] = sum(fbar[k, i] * wedge_f[i] + frame.f[k, i] * contr_f[i] for i in range(n))
    object.__setattr__(frame, "_rho_cache", mats)
    return mats


def _monomial_matrices(frame: SpinorFrame) -> np.ndarray:
    cached = getattr(frame, "_mono_cache", None)
    if cached is not None:
        return cached
    gens = _generator_matrices(frame)
    m = 2 * frame.n
    size = 2 ** frame.n
    out = np.empty((4 ** frame.n, size, size), complex)
    for k, mask in enumerate(basis_masks(m)):
        M = np.eye(size, dtype=complex)
        for i in range(m):
            if mask >> i & 1:
                M = M @ gens[i]
        out[k] = M
    object.__setattr__(frame, "_mono_cache", out)
    return out


def rho_matrix(a: CliffordElement, frame: SpinorFrame | None = None) -> np.ndarray:
    """Matrix of ``rho(a)`` on the spinor basis ``fbar^I``."""
    frame = a.ambient.frame if frame is None else frame
    if frame.J.shape[0] != a.ambient.dim:
        raise ValueError("frame and ambient dimensions differ")
    return np.einsum("k,kij->ij", a.coeffs, _monomial_matrices(frame))


def rho_inverse(M, ambient: CliffordAmbient, frame: SpinorFrame | None = None) -> CliffordElement:
    """Solve ``rho(a) = M`` on the full ``4^n``-dimensional endomorphism space."""
    frame = ambient.frame if frame is None else frame
    mono = _monomial_matrices(frame)
    A = mono.reshape(mono.shape[0], -1).T
    if np.linalg.cond(A) > 1e8:
        raise EquivarianceError("spinor representation is numerically singular")
    coeffs = np.linalg.solve(A, np.asarray(M, complex).reshape(-1))
    return CliffordElement(ambient, coeffs)


def spinor_action(a: CliffordElement, phi: Spinor) -> Spinor:
    """``rho(a) phi``; the spinor must come from the ambient's frame."""
    _same_frame(a.ambient.frame, phi.frame)
    return Spinor(phi.frame, rho_matrix(a) @ phi.coeffs)


def hermitian_h(phi: Spinor, psi: Spinor) -> complex:
    """``h(phi, psi)``, conjugate-linear in ``phi``; the ``fbar^I`` are orthonormal."""
    _same_frame(phi.frame, psi.frame)
    return complex(np.vdot(phi.coeffs, psi.coeffs))


@lru_cache(maxsize=None)
def _q_matrix(n: int) -> np.ndarray:
    """``q(phi, psi) = phi^T Qm psi`` with ``q = (reversal(phi) ^ psi)_top``."""
    size = 2 ** n
    rev = _reversal_signs(n)
    Qm = np.zeros((size, size))
    for a in range(size):
        for b in range(size):
            x = np.zeros(size)
            x[a] = rev[a]
            y = np.zeros(size)
            y[b] = 1.0
            Qm[a, b] = _wedge_product(n, x, y)[-1].real
    Qm.flags.writeable = False
    return Qm


def pairing_q(phi: Spinor, psi: Spinor) -> complex:
    """Bilinear pairing ``(reversal(phi) ^ psi)_top``."""
    _same_frame(phi.frame, psi.frame)
    return complex(phi.coeffs @ _q_matrix(phi.frame.n) @ psi.coeffs)


def charge_conjugate(phi: Spinor) -> Spinor:
    """The conjugate-linear ``phi^c`` with ``q(phi, .) = h(phi^c, .)``."""
    return Spinor(phi.frame, (_q_matrix(phi.frame.n).T @ phi.coeffs).conj())


def q_sharp(phi: Spinor, psi: Spinor) -> np.ndarray:
    """Endomorphism ``chi -> q(psi, chi) phi``."""
    _same_frame(phi.frame, psi.frame)
    return np.outer(phi.coeffs, psi.coeffs @ _q_matrix(phi.frame.n))


def bispinor_to_form(phi: Spinor, psi: Spinor, ambient: CliffordAmbient | None = None) -> FormElement:
    """``[phi (x) psi]``, the image under ``J o rho^-1 o q_sharp``."""
    if ambient is None:
        n = phi.frame.n
        ambient = CliffordAmbient(n, phi.frame.J)
    _same_frame(ambient.frame, phi.frame)
    return j_iso(rho_inverse(q_sharp(phi, psi), ambient))


def trace_metrics(a: CliffordElement, b: CliffordElement):
    """``h_R(a, b)`` (degree-0 part of ``J(a^dag b)``) and ``h_R'`` (operator trace).

    Returns
    -------
    h_R, h_R_prime : complex
    """
    _same_ambient(a, b)
    h_r = clifford_multiply(dagger(a), b).coeffs[0]
    A, B = rho_matrix(a), rho_matrix(b)
    h_rp = np.trace(A.conj().T @ B)
    return complex(h_r), complex(h_rp)


def chirality_operator(ambient: CliffordAmbient) -> np.ndarray:
    """``rho(i^n e_1 ... e_{2n})``."""
    top = CliffordElement.monomial(ambient, range(ambient.dim), 1j ** ambient.n)
    return rho_matrix(top)


# ---------------------------------------------------------------- intertwiner

def intertwiner_p(frame_1: SpinorFrame, frame_2: SpinorFrame) -> np.ndarray:
    """Clifford-equivariant isometry ``S_2 -> S_1`` as a matrix.

    Solves ``rho_1(e_k) P = P rho_2(e_k)`` for every generator.  The phase is
    fixed so that ``<1, P 1>`` is real positive; when that overlap vanishes
    the first nonzero component of ``P 1`` is made real positive instead.
    """
    if frame_1.n != frame_2.n:
        raise EquivarianceError("frames have different dimensions")
    R1, R2 = _generator_matrices(frame_1), _generator_matrices(frame_2)
    size = R1.shape[1]
    eye = np.eye(size)
    # vec(A P B) = (A kron B^T) vec(P) in row-major order
    rows = [np.kron(R1[k], eye) - np.kron(eye, R2[k].T) for k in range(R1.shape[0])]
    kernel = null_space(np.vstack(rows), rcond=1e-10)
    if kernel.shape[1] != 1:
        raise EquivarianceError(
            f"equivariance system has a {kernel.shape[1]}-dimensional solution space")
    P = kernel[:, 0].reshape(size, size)
    gram = P.conj().T @ P
    P = P / np.sqrt(gram[0, 0].real)
    image = P[:, 0]
    anchor = image[0] if abs(image[0]) > 1e-10 else image[np.flatnonzero(np.abs(image) > 1e-10)[0]]
    P = P * (abs(anchor) / anchor)
    if np.abs(P.conj().T @ P - eye).max() > 1e-8:
        raise EquivarianceError("equivariant map is not an isometry")
    return P


def complex_01_vectors(frame: SpinorFrame) -> np.ndarray:
    """Columns ``fbar_i`` spanning ``T^{0,1}`` of the frame's complex structure."""
    return frame.f.conj()


def annihilator_residual(frame_plus: SpinorFrame, frame_minus: SpinorFrame) -> float:
    """How far ``L_1 = (Id+g) T_+^{0,1} + (Id-g) T_-^{0,1}`` is from annihilating
    ``[1 (x) p(1)]``."""
    n = frame_plus.n
    P = intertwiner_p(frame_plus, frame_minus)
    one = spinor_basis(frame_plus, 0)
    image = Spinor(frame_plus, P[:, 0])
    form = bispinor_to_form(one, image, CliffordAmbient(n, frame_plus.J))
    scale = max(form.norm(), 1e-300)
    worst = 0.0
    for X in complex_01_vectors(frame_plus).T:
        worst = max(worst, plus_action(X, form).norm() / scale)
    for X in complex_01_vectors(frame_minus).T:
        worst = max(worst, minus_action(X, form).norm() / scale)
    return worst


# ---------------------------------------------------------------- self-test

def _random_element(rng, ambient):
    size = 4 ** ambient.n
    return CliffordElement(ambient, rng.normal(size=size) + 1j * rng.normal(size=size))


def _random_spinor(rng, frame):
    size = 2 ** frame.n
    return Spinor(frame, rng.normal(size=size) + 1j * rng.normal(size=size))


def _random_complex_structure(rng, n):
    """``O J_0 O^T`` for a random orthogonal ``O``."""
    O, _ = np.linalg.qr(rng.normal(size=(2 * n, 2 * n)))
    return O @ standard_complex_structure(n) @ O.T


def _random_spin_generator(rng, n):
    """Random real combination of commutators of generalized basis vectors on forms."""
    m = 2 * n
    acts = [contract_matrix(m, i) for i in range(m)] + [wedge_matrix(m, i) for i in range(m)]
    B = np.zeros((4 ** n, 4 ** n))
    for a in range(2 * m):
        for b in range(a + 1, 2 * m):
            c = rng.normal()
            B += c * 0.5 * (acts[a] @ acts[b] - acts[b] @ acts[a])
    return B


def _check(report, name, value, tol):
    report[name] = {"residual": float(value), "tolerance": float(tol),
                    "passed": bool(np.isfinite(value) and value <= tol)}


def self_test(n: int, seed: int = 0, trials: int = 20, tol: float = 1e-12) -> dict:
    """Run every identity of the Clifford kernel on seeded random data.

    Returns
    -------
    dict
        ``{"n": n, "seed": seed, "checks": {name: {...}}, "passed": bool}``
    """
    if n not in (1, 2, 3):
        raise ValueError("self-test supports n in {1, 2, 3}")
    rng = np.random.default_rng(seed)
    J = _random_complex_structure(rng, n)
    amb = CliffordAmbient(n, J)
    frame = amb.frame
    m = amb.dim
    gens = [CliffordElement.vector(amb, np.eye(m)[i]) for i in range(m)]
    one = CliffordElement.scalar(amb)
    checks: dict = {}

    r = 0.0
    for i in range(m):
        for j in range(m):
            lhs = gens[i] * gens[j] + gens[j] * gens[i]
            r = max(r, np.abs((lhs - one * (2.0 * (i == j))).coeffs).max())
    _check(checks, "generator_relation", r, tol)

    r_assoc = r_rho = r_iso = r_adj = r_q = r_herm = 0.0
    for _ in range(trials):
        a, b, c = (_random_element(rng, amb) for _ in range(3))
        r_assoc = max(r_assoc, np.abs(((a * b) * c - a * (b * c)).coeffs).max())
        r_rho = max(r_rho, np.abs(rho_matrix(a * b) - rho_matrix(a) @ rho_matrix(b)).max())
        v = gens[rng.integers(m)]
        lhs = j_iso(v * a)
        vv = np.eye(m)[np.flatnonzero(v.coeffs[1:1 + m])[0]]
        rhs = wedge_vector(vv, j_iso(a)) + contract_vector(vv, j_iso(a))
        r_iso = max(r_iso, np.abs((lhs - rhs).coeffs).max())
        rhs_r = wedge_vector(vv, j_iso(a).twisted()) - contract_vector(vv, j_iso(a).twisted())
        r_iso = max(r_iso, np.abs((j_iso(a * v) - rhs_r).coeffs).max())
        phi, psi, theta = (_random_spinor(rng, frame) for _ in range(3))
        r_adj = max(r_adj, abs(hermitian_h(spinor_action(a, phi), psi)
                               - hermitian_h(phi, spinor_action(dagger(a), psi))))
        r_q = max(r_q, abs(pairing_q(spinor_action(a, phi), theta)
                           - pairing_q(phi, spinor_action(order_reversal(a), theta))))
        hr, hrp = trace_metrics(a, b)
        r_herm = max(r_herm, abs(hrp - 2 ** n * hr) / max(1.0, abs(hrp)))
    _check(checks, "associativity", r_assoc, tol * 10 ** n)
    _check(checks, "rho_multiplicative", r_rho, tol * 10 ** n)
    _check(checks, "j_iso_clifford_rule", r_iso, tol)
    _check(checks, "h_adjoint", r_adj, tol * 10 ** n)
    _check(checks, "q_reversal_property", r_q, tol * 10 ** n)
    _check(checks, "trace_relation", r_herm, tol)

    r_sq = max(np.abs(rho_matrix(g) @ rho_matrix(g) - np.eye(2 ** n)).max() for g in gens)
    _check(checks, "rho_vector_square", r_sq, tol)

    r_c = r_iso2 = r_p1 = r_p2 = r_gact = 0.0
    for _ in range(trials):
        phi, psi = _random_spinor(rng, frame), _random_spinor(rng, frame)
        pc = charge_conjugate(phi)
        r_c = max(r_c, abs(hermitian_h(pc, pc) - hermitian_h(phi, phi)) / hermitian_h(phi, phi).real)
        form = bispinor_to_form(phi, psi, amb)
        target = (hermitian_h(phi, phi) * hermitian_h(psi, psi)).real
        r_iso2 = max(r_iso2, abs(2 ** n * form.norm() ** 2 - target) / target)
        v = rng.normal(size=m)
        vel = CliffordElement.vector(amb, v)
        lhs = bispinor_to_form(spinor_action(vel, phi), psi, amb)
        r_p1 = max(r_p1, (lhs - plus_action(v, form)).norm())
        lhs = bispinor_to_form(phi, spinor_action(vel, psi), amb)
        r_p2 = max(r_p2, (lhs + minus_action(v, form.twisted())).norm())
        X, xi = rng.normal(size=m), rng.normal(size=m)
        twice = generalized_action(X, xi, generalized_action(X, xi, form))
        r_gact = max(r_gact, (twice - form * float(xi @ X)).norm())
    _check(checks, "charge_conjugate_isometry", r_c, tol)
    _check(checks, "bispinor_isometry", r_iso2, tol * 10 ** n)
    _check(checks, "left_clifford_identity", r_p1, tol * 10 ** n)
    _check(checks, "right_clifford_identity", r_p2, tol * 10 ** n)
    _check(checks, "generalized_clifford_relation", r_gact, tol * 10 ** n)

    r_gt = 0.0
    zero_form = FormElement(n, np.zeros(4 ** n))
    for _ in range(max(1, trials // 4)):
        a, b, a2, b2 = (_random_element(rng, amb) for _ in range(4))
        form = FormElement(n, rng.normal(size=4 ** n) + 1j * rng.normal(size=4 ** n))
        composed = graded_tensor_action(a, b, graded_tensor_action(a2, b2, form))
        # (a (x) b)(a2 (x) b2) = sum over parities (-1)^{|b||a2|} a a2 (x) b b2
        direct = zero_form
        for pb in (0, 1):
            for pa in (0, 1):
                bp = _parity_part(b, pb)
                a2p = _parity_part(a2, pa)
                sign = -1.0 if pa and pb else 1.0
                direct = direct + graded_tensor_action(
                    a * a2p, minus_algebra_multiply(bp, b2), form) * sign
        r_gt = max(r_gt, (composed - direct).norm() / max(1.0, composed.norm()))
    _check(checks, "graded_tensor_product", r_gt, tol * 10 ** n)

    r_ch = 0.0
    for _ in range(max(1, trials // 4)):
        G = expm(_random_spin_generator(rng, n) * 0.3)
        x = FormElement(n, rng.normal(size=4 ** n) + 1j * rng.normal(size=4 ** n))
        y = FormElement(n, rng.normal(size=4 ** n) + 1j * rng.normal(size=4 ** n))
        base = chevalley_pairing(x, y)
        moved = chevalley_pairing(FormElement(n, G @ x.coeffs), FormElement(n, G @ y.coeffs))
        r_ch = max(r_ch, abs(moved - base) / max(1.0, abs(base)))
    _check(checks, "chevalley_invariance", r_ch, 1e-10)

    J_minus = _random_complex_structure(rng, n)
    frame_minus = SpinorFrame.from_complex_structure(J_minus)
    P = intertwiner_p(frame, frame_minus)
    R1, R2 = _generator_matrices(frame), _generator_matrices(frame_minus)
    r_eq = max(np.abs(R1[k] @ P - P @ R2[k]).max() for k in range(m))
    _check(checks, "intertwiner_equivariance", r_eq, tol * 10 ** n)
    _check(checks, "intertwiner_unitary", np.abs(P.conj().T @ P - np.eye(2 ** n)).max(),
           tol * 10 ** n)
    _check(checks, "annihilator", annihilator_residual(frame, frame_minus), tol * 10 ** n)

    return {"n": n, "seed": seed, "checks": checks,
            "passed": all(c["passed"] for c in checks.values())}


def _parity_part(a: CliffordElement, parity: int) -> CliffordElement:
    keep = (_degrees(a.ambient.dim) % 2) == parity
    return CliffordElement(a.ambient, np.where(keep, a.coeffs, 0))
