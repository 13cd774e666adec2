"""Quaternion, dual-number and dual-quaternion arithmetic.

Two layers live here:

* array kernels (``qmul``, ``dqmul``, ``project_udq_array`` ...) working on
  numpy arrays, quaternions with trailing shape ``(4,)`` in ``(w, x, y, z)``
  order and dual quaternions with trailing shape ``(2, 4)`` where index 0 is
  the standard part and index 1 the dual part;
* small immutable value types (``Quaternion``, ``DualNumber``,
  ``DualQuaternion``, ``UnitDualQuaternion``, ``Pose``) for scalar work.

Vectors and matrices of dual quaternions are always plain arrays of shape
``(n, 2, 4)`` and ``(n, n, 2, 4)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from dqform.errors import NonUnitAttitude, NonUnitInput

TAU_UNIT = 1e-9
# Degenerate-branch threshold for the projection.
_ZERO = TAU_UNIT * np.finfo(float).eps

_CONJ = np.array([1.0, -1.0, -1.0, -1.0])


# ---------------------------------------------------------------------------
# array kernels
# ---------------------------------------------------------------------------

def qmul(p, q):
    """Hamilton product of quaternion arrays, broadcasting over leading axes."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    p0, p1, p2, p3 = p[..., 0], p[..., 1], p[..., 2], p[..., 3]
    q0, q1, q2, q3 = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    return np.stack(
        [
            p0 * q0 - p1 * q1 - p2 * q2 - p3 * q3,
            p0 * q1 + p1 * q0 + p2 * q3 - p3 * q2,
            p0 * q2 - p1 * q3 + p2 * q0 + p3 * q1,
            p0 * q3 + p1 * q2 - p2 * q1 + p3 * q0,
        ],
        axis=-1,
    )


def qconj(q):
    return np.asarray(q, dtype=float) * _CONJ


def qnorm(q):
    return np.linalg.norm(np.asarray(q, dtype=float), axis=-1)


def quat_left_matrix(p):
    """4x4 real matrix M(p) with M(p) @ q == qmul(p, q)."""
    w, x, y, z = np.asarray(p, dtype=float)
    return np.array(
        [
            [w, -x, -y, -z],
            [x, w, -z, y],
            [y, z, w, -x],
            [z, -y, x, w],
        ]
    )


def dqmul(a, b):
    """Dual-quaternion product of ``(..., 2, 4)`` arrays."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    std = qmul(a[..., 0, :], b[..., 0, :])
    dual = qmul(a[..., 0, :], b[..., 1, :]) + qmul(a[..., 1, :], b[..., 0, :])
    return np.stack([std, dual], axis=-2)


def dqconj(a):
    """Quaternion conjugate applied to both parts."""
    return np.asarray(a, dtype=float) * _CONJ


def dq_left_matrix(a):
    """8x8 real matrix of left multiplication by the dual quaternion ``a``.

    Acts on the flattened ``(std, dual)`` 8-vector.
    """
    a = np.asarray(a, dtype=float)
    ms = quat_left_matrix(a[0])
    md = quat_left_matrix(a[1])
    out = np.zeros((8, 8))
    out[:4, :4] = ms
    out[4:, 4:] = ms
    out[4:, :4] = md
    return out


def dq_matrix_embedding(m):
    """Real ``(8n, 8m)`` embedding of a ``(n, m, 2, 4)`` dual-quaternion matrix.

    ``dq_matrix_embedding(A) @ x.reshape(-1)`` equals ``dq_matvec(A, x).reshape(-1)``.
    """
    m = np.asarray(m, dtype=float)
    rows, cols = m.shape[:2]
    out = np.zeros((8 * rows, 8 * cols))
    for i in range(rows):
        for j in range(cols):
            if np.any(m[i, j]):
                out[8 * i:8 * i + 8, 8 * j:8 * j + 8] = dq_left_matrix(m[i, j])
    return out


def dq_matvec(m, x):
    """Product of a ``(n, k, 2, 4)`` matrix with a ``(k, 2, 4)`` vector."""
    m = np.asarray(m, dtype=float)
    x = np.asarray(x, dtype=float)
    return dqmul(m, x[None, :, :, :]).sum(axis=1)


def dq_identity_array(shape=()):
    out = np.zeros(tuple(shape) + (2, 4))
    out[..., 0, 0] = 1.0
    return out


def udq_residuals(a):
    """Return ``(|1 - |q_s||, |2<q_s, q_d>|)`` for a ``(..., 2, 4)`` array."""
    a = np.asarray(a, dtype=float)
    norm_err = np.abs(qnorm(a[..., 0, :]) - 1.0)
    # q_s* q_d + q_d* q_s is the real scalar 2<q_s, q_d>.
    orth_err = np.abs(2.0 * np.sum(a[..., 0, :] * a[..., 1, :], axis=-1))
    return norm_err, orth_err


def is_unit_array(a, tol=TAU_UNIT):
    norm_err, orth_err = udq_residuals(a)
    return bool(np.all(norm_err <= tol) and np.all(orth_err <= tol))


def project_udq_array(x):
    """Entrywise projection onto the unit dual quaternions.

    Three branches, applied per entry:

    * ``x_s != 0``: ``x_s/|x_s| + (x_d/|x_s| - <x_s,x_d> x_s/|x_s|^3) eps``
    * ``x_s == 0, x_d != 0``: ``(x_d/|x_d|) eps``
    * ``x_s == x_d == 0``: the identity ``1``

    The middle branch reproduces the published formula literally; its output
    has a vanishing standard part and is therefore not itself unit.
    """
    x = np.asarray(x, dtype=float)
    xs = x[..., 0, :]
    xd = x[..., 1, :]
    ns = qnorm(xs)
    nd = qnorm(xd)
    out = np.zeros_like(x)

    main = ns > _ZERO
    if np.any(main):
        s = xs[main]
        d = xd[main]
        n = ns[main][:, None]
        # (x_s* x_d + x_d* x_s) is the real scalar 2<x_s, x_d>
        inner = np.sum(s * d, axis=-1)[:, None]
        out[main, 0, :] = s / n
        out[main, 1, :] = d / n - inner * s / n**3

    dual_only = ~main & (nd > _ZERO)
    if np.any(dual_only):
        out[dual_only, 1, :] = xd[dual_only] / nd[dual_only][:, None]

    zero = ~main & ~(nd > _ZERO)
    if np.any(zero):
        out[zero, 0, 0] = 1.0
    return out


def make_pose_array(attitude, position):
    """Vectorised pose encoding ``q_s + 1/2 [0, p] q_s eps``."""
    attitude = np.asarray(attitude, dtype=float)
    position = np.asarray(position, dtype=float)
    pw = np.concatenate([np.zeros(position.shape[:-1] + (1,)), position], axis=-1)
    dual = 0.5 * qmul(pw, attitude)
    return np.stack([attitude, dual], axis=-2)


def pose_parts_array(q):
    """Inverse of :func:`make_pose_array`; returns ``(attitude, position)``."""
    q = np.asarray(q, dtype=float)
    pw = 2.0 * qmul(q[..., 1, :], qconj(q[..., 0, :]))
    return q[..., 0, :].copy(), pw[..., 1:]


def random_udq_array(rng: np.random.Generator, n: int):
    """``n`` random poses with uniform rotation and standard Gaussian translation."""
    att = rng.standard_normal((n, 4))
    att /= np.linalg.norm(att, axis=-1, keepdims=True)
    pos = rng.standard_normal((n, 3))
    return make_pose_array(att, pos)


# ---------------------------------------------------------------------------
# value types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Quaternion:
    w: float
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def from_array(cls, a) -> "Quaternion":
        w, x, y, z = (float(v) for v in a)
        return cls(w, x, y, z)

    def to_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm(self) -> float:
        return math.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2)

    def __add__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.w + other.w, self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.w - other.w, self.x - other.x, self.y - other.y, self.z - other.z)

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return quat_mul(self, other)
        if isinstance(other, (int, float)):
            return Quaternion(self.w * other, self.x * other, self.y * other, self.z * other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return self * other
        return NotImplemented


def quat_mul(p: Quaternion, q: Quaternion) -> Quaternion:
    """Hamilton product, ``i^2 = j^2 = k^2 = ijk = -1``."""
    return Quaternion(
        p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
        p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
        p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
        p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w,
    )


@dataclass(frozen=True, order=True)
class DualNumber:
    """``std + dual*eps``; ordered lexicographically (standard part first)."""

    std: float
    dual: float = 0.0

    def __add__(self, other: "DualNumber") -> "DualNumber":
        return DualNumber(self.std + other.std, self.dual + other.dual)

    def __mul__(self, other):
        if isinstance(other, DualNumber):
            return DualNumber(self.std * other.std, self.std * other.dual + self.dual * other.std)
        if isinstance(other, (int, float)):
            return DualNumber(self.std * other, self.dual * other)
        return NotImplemented


@dataclass(frozen=True)
class DualQuaternion:
    std: Quaternion
    dual: Quaternion = Quaternion(0.0)

    @classmethod
    def from_array(cls, a) -> "DualQuaternion":
        a = np.asarray(a, dtype=float).reshape(2, 4)
        return cls(Quaternion.from_array(a[0]), Quaternion.from_array(a[1]))

    def to_array(self) -> np.ndarray:
        return np.stack([self.std.to_array(), self.dual.to_array()])

    def conj(self) -> "DualQuaternion":
        return DualQuaternion(self.std.conj(), self.dual.conj())

    def __add__(self, other: "DualQuaternion") -> "DualQuaternion":
        return DualQuaternion(self.std + other.std, self.dual + other.dual)

    def __sub__(self, other: "DualQuaternion") -> "DualQuaternion":
        return DualQuaternion(self.std - other.std, self.dual - other.dual)

    def __mul__(self, other):
        if isinstance(other, DualQuaternion):
            return dq_mul(self, other)
        if isinstance(other, UnitDualQuaternion):
            return dq_mul(self, other.value)
        if isinstance(other, (int, float)):
            return DualQuaternion(self.std * other, self.dual * other)
        return NotImplemented


DQ_ONE = DualQuaternion(Quaternion(1.0))
DQ_ZERO = DualQuaternion(Quaternion(0.0))
EPS = DualQuaternion(Quaternion(0.0), Quaternion(1.0))


def dq_mul(a: DualQuaternion, b: DualQuaternion) -> DualQuaternion:
    """``a_s b_s + (a_s b_d + a_d b_s) eps``."""
    return DualQuaternion(
        quat_mul(a.std, b.std),
        quat_mul(a.std, b.dual) + quat_mul(a.dual, b.std),
    )


@dataclass(frozen=True)
class UnitDualQuaternion:
    """A dual quaternion on the unit manifold; validated on construction."""

    value: DualQuaternion

    def __post_init__(self):
        norm_err, orth_err = udq_residuals(self.value.to_array())
        if norm_err > TAU_UNIT or orth_err > TAU_UNIT:
            raise NonUnitInput(
                f"not a unit dual quaternion (|q_s| error {float(norm_err):.3g}, "
                f"orthogonality error {float(orth_err):.3g})"
            )

    @classmethod
    def from_array(cls, a) -> "UnitDualQuaternion":
        return cls(DualQuaternion.from_array(a))

    @property
    def std(self) -> Quaternion:
        return self.value.std

    @property
    def dual(self) -> Quaternion:
        return self.value.dual

    def to_array(self) -> np.ndarray:
        return self.value.to_array()

    def conj(self) -> "UnitDualQuaternion":
        return UnitDualQuaternion(self.value.conj())

    def inverse(self) -> "UnitDualQuaternion":
        return self.conj()

    def __mul__(self, other):
        if isinstance(other, UnitDualQuaternion):
            return UnitDualQuaternion(dq_mul(self.value, other.value))
        if isinstance(other, DualQuaternion):
            return dq_mul(self.value, other)
        return NotImplemented


UDQ_ONE = UnitDualQuaternion(DQ_ONE)


@dataclass(frozen=True)
class Pose:
    attitude: Quaternion
    position: tuple


def is_unit(q: Union[DualQuaternion, UnitDualQuaternion, np.ndarray], tol: float = TAU_UNIT) -> bool:
    if isinstance(q, UnitDualQuaternion):
        q = q.value
    if isinstance(q, DualQuaternion):
        q = q.to_array()
    return is_unit_array(q, tol)


def as_dq_array(v) -> np.ndarray:
    """Coerce a sequence of dual quaternions (objects or arrays) to ``(n, 2, 4)``."""
    if isinstance(v, np.ndarray):
        return np.asarray(v, dtype=float).reshape(-1, 2, 4)
    items = list(v)
    if not items:
        return np.zeros((0, 2, 4))
    return np.stack(
        [
            it.to_array() if isinstance(it, (DualQuaternion, UnitDualQuaternion)) else np.asarray(it, float).reshape(2, 4)
            for it in items
        ]
    )


def dq_vec_norm(v) -> DualNumber:
    """Dual-number 2-norm of a dual quaternion vector.

    ``||x_d|| eps`` when the standard part vanishes, otherwise
    ``||x_s|| + (x_s* x_d + x_d* x_s)/||x_s|| eps``. The numerator is the real
    scalar ``2 Re(x_s* x_d)``.
    """
    x = as_dq_array(v)
    xs = x[:, 0, :].reshape(-1)
    xd = x[:, 1, :].reshape(-1)
    ns = float(np.linalg.norm(xs))
    if ns == 0.0:
        return DualNumber(0.0, float(np.linalg.norm(xd)))
    # sum_i conj(x_si) x_di; its scalar part is <x_s, x_d>
    cross = qmul(qconj(x[:, 0, :]), x[:, 1, :]).sum(axis=0)
    numerator = cross + qconj(cross)
    assert np.linalg.norm(numerator[1:]) < 1e-10 * max(1.0, abs(numerator[0]))
    return DualNumber(ns, float(numerator[0]) / ns)


def norm_2R(v) -> float:
    """``sqrt(||v_s||^2 + ||v_d||^2)`` over all real components."""
    return float(np.linalg.norm(np.asarray(as_dq_array(v)).reshape(-1)))


def make_pose(attitude: Quaternion, position: Sequence[float]) -> UnitDualQuaternion:
    if abs(attitude.norm() - 1.0) > TAU_UNIT:
        raise NonUnitAttitude(f"|attitude| = {attitude.norm()!r}")
    return UnitDualQuaternion.from_array(make_pose_array(attitude.to_array(), position))


def pose_parts(q: UnitDualQuaternion) -> Pose:
    if not isinstance(q, UnitDualQuaternion):
        if not is_unit(q):
            raise NonUnitInput("pose_parts needs a unit dual quaternion")
        q = UnitDualQuaternion(q) if isinstance(q, DualQuaternion) else UnitDualQuaternion.from_array(q)
    att, pos = pose_parts_array(q.to_array())
    return Pose(Quaternion.from_array(att), tuple(float(c) for c in pos))


def project_udq(x: DualQuaternion) -> DualQuaternion:
    """Scalar wrapper around :func:`project_udq_array`.

    Returns a :class:`UnitDualQuaternion` whenever the projected value is unit
    (every input with a nonzero standard part, and zero); the pure-dual branch
    yields a plain :class:`DualQuaternion`.
    """
    out = DualQuaternion.from_array(project_udq_array(x.to_array()))
    if is_unit(out):
        return UnitDualQuaternion(out)
    return out


def random_udq(rng_seed: Union[int, np.random.Generator, None]) -> UnitDualQuaternion:
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    return UnitDualQuaternion.from_array(random_udq_array(rng, 1)[0])


def to_udq_list(a: np.ndarray) -> list:
    return [UnitDualQuaternion.from_array(x) for x in np.asarray(a).reshape(-1, 2, 4)]

