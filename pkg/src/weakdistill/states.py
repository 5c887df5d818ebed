"""Bound-entangled qutrit pairs, the ancilla qubit, and the state containers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import linalg
from .linalg import DimSignature

AB = DimSignature((3, 3), ("A", "B"))
C = DimSignature((2,), ("C",))

STATE_TOL = 1e-10


class StateError(ValueError):
    """Raised for invalid state parameters or matrices that are not states."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Trace-one PSD Hermitian matrix tagged with its subsystem layout.

    ``validate=False`` skips the spectral check; the pipeline uses it for
    conditional states it has just normalized and checks them in bulk instead.
    """

    matrix: np.ndarray
    sig: DimSignature
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape != (self.sig.size, self.sig.size):
            raise StateError(f"matrix shape {m.shape} does not match signature {self.sig}")
        object.__setattr__(self, "matrix", m)
        if self.validate:
            self.check()

    def check(self, tol: float = STATE_TOL) -> None:
        err = linalg.hermiticity_error(self.matrix)
        if err > tol:
            raise StateError(f"not Hermitian (error {err:.3e})")
        tr = np.trace(self.matrix)
        if abs(tr - 1.0) > tol:
            raise StateError(f"trace is {tr.real:.12g}, expected 1")
        lo = self.eigenvalues()[0]
        if lo < -tol:
            raise StateError(f"not positive semidefinite (min eigenvalue {lo:.3e})")

    @property
    def dim(self) -> int:
        return self.sig.size

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def eigenvalues(self) -> np.ndarray:
        return linalg.hermitian_eigenvalues(self.matrix)

    def rank(self, tol: float = STATE_TOL) -> int:
        return int(np.sum(self.eigenvalues() > tol))

    def reduce(self, traced: str | Iterable[str]) -> "DensityMatrix":
        traced = [traced] if isinstance(traced, str) else list(traced)
        return DensityMatrix(
            linalg.partial_trace(self.matrix, self.sig, traced), self.sig.without(traced), validate=False
        )

    def keep(self, labels: Iterable[str]) -> "DensityMatrix":
        labels = list(labels)
        return self.reduce([lb for lb in self.sig.labels if lb not in labels])

    def partial_transpose(self, labels: str | Iterable[str]) -> np.ndarray:
        return linalg.partial_transpose(self.matrix, self.sig, labels)

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        sig = DimSignature(self.sig.dims + other.sig.dims, self.sig.labels + other.sig.labels)
        return DensityMatrix(linalg.tensor(self.matrix, other.matrix), sig, validate=False)

    def expectation(self, op: np.ndarray) -> complex:
        return complex(np.trace(np.asarray(op) @ self.matrix))


@dataclass(frozen=True, eq=False)
class Ket:
    vector: np.ndarray
    sig: DimSignature

    def __post_init__(self):
        v = np.array(self.vector, dtype=complex, copy=True).reshape(-1)
        if v.size != self.sig.size:
            raise StateError(f"vector length {v.size} does not match signature {self.sig}")
        if abs(np.linalg.norm(v) - 1.0) > linalg.EQUAL_TOL:
            raise StateError(f"ket is not normalized (norm {np.linalg.norm(v):.15g})")
        v.flags.writeable = False
        object.__setattr__(self, "vector", v)

    def inner(self, other: "Ket") -> complex:
        return complex(np.vdot(self.vector, other.vector))

    def projector(self) -> np.ndarray:
        return np.outer(self.vector, self.vector.conj())

    def density_matrix(self) -> DensityMatrix:
        return DensityMatrix(self.projector(), self.sig)


def basis(d: int, k: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[k] = 1.0
    return v


def product_ket(u: np.ndarray, v: np.ndarray, sig: DimSignature = AB) -> Ket:
    return Ket(np.kron(u, v), sig)


def tiles_vectors() -> list[Ket]:
    """The five orthonormal product vectors of the tiles basis."""
    e0, e1, e2 = (basis(3, k) for k in range(3))
    r2 = math.sqrt(2.0)
    return [
        product_ket(e0, (e0 - e1) / r2),
        product_ket((e0 - e1) / r2, e2),
        product_ket(e2, (e1 - e2) / r2),
        product_ket((e1 - e2) / r2, e0),
        product_ket((e0 + e1 + e2) / math.sqrt(3.0), (e0 + e1 + e2) / math.sqrt(3.0)),
    ]


def phi_plus(d: int = 3) -> Ket:
    v = sum(np.kron(basis(d, k), basis(d, k)) for k in range(d)) / math.sqrt(d)
    return Ket(v, DimSignature((d, d), ("A", "B")))


def make_chi1() -> DensityMatrix:
    """Normalized projector onto the complement of the tiles product basis."""
    proj = sum(k.projector() for k in tiles_vectors())
    return DensityMatrix((np.eye(9) - proj) / 4.0, AB)


def _check_range(name: str, value: float, lo: float, hi: float) -> float:
    value = float(value)
    if not (lo <= value <= hi):  # also rejects NaN
        raise StateError(f"{name} must lie in [{lo:g}, {hi:g}], got {value!r}")
    return value


def make_chi2(a: float) -> DensityMatrix:
    """The one-parameter 3x3 PPT family, entry-for-entry in the A-major product basis."""
    a = _check_range("a", a, 0.0, 1.0)
    m = np.zeros((9, 9))
    np.fill_diagonal(m, a)
    for i in (0, 4, 8):
        for j in (0, 4, 8):
            m[i, j] = a
    m[6, 6] = m[8, 8] = (1.0 + a) / 2.0
    m[6, 8] = m[8, 6] = math.sqrt(1.0 - a * a) / 2.0
    return DensityMatrix(m / (1.0 + 8.0 * a), AB)


def sigma_plus() -> np.ndarray:
    idx = [3 * i + j for i, j in ((0, 1), (1, 2), (2, 0))]
    m = np.zeros((9, 9))
    m[idx, idx] = 1.0 / 3.0
    return m


def sigma_minus() -> np.ndarray:
    # index swap |ij> -> |ji> of each term in sigma_plus
    idx = [3 * j + i for i, j in ((0, 1), (1, 2), (2, 0))]
    m = np.zeros((9, 9))
    m[idx, idx] = 1.0 / 3.0
    return m


def make_chi3(b: float) -> DensityMatrix:
    b = _check_range("b", b, 2.0, 5.0)
    m = 2.0 * phi_plus().projector() + b * sigma_plus() + (5.0 - b) * sigma_minus()
    return DensityMatrix(m / 7.0, AB)


def make_ancilla() -> DensityMatrix:
    """The qubit ancilla in (|0'> + |1'>)/sqrt(2)."""
    return Ket(np.array([1.0, 1.0]) / math.sqrt(2.0), C).density_matrix()


STATE_NAMES = ("chi1", "chi2", "chi3")
PARAM_NAME = {"chi1": None, "chi2": "a", "chi3": "b"}
PARAM_RANGE = {"chi2": (0.0, 1.0), "chi3": (2.0, 5.0)}


def classify(name: str, param: float | None = None) -> str:
    """Literature classification of a family member.

    Returns ``"separable"``, ``"bound-entangled"`` or ``"free-entangled"``.
    """
    if name == "chi1":
        return "bound-entangled"
    if name == "chi2":
        a = _check_range("a", param, 0.0, 1.0)
        return "separable" if a in (0.0, 1.0) else "bound-entangled"
    if name == "chi3":
        b = _check_range("b", param, 2.0, 5.0)
        if b <= 3.0:
            return "separable"
        return "bound-entangled" if b <= 4.0 else "free-entangled"
    raise StateError(f"unknown state {name!r}; choose from {STATE_NAMES}")


@dataclass(frozen=True)
class StateSpec:
    """Name plus parameter of an initial state, e.g. ``StateSpec("chi2", 0.5)``."""

    name: str
    param: float | None = None

    def __post_init__(self):
        if self.name not in STATE_NAMES:
            raise StateError(f"unknown state {self.name!r}; choose from {STATE_NAMES}")
        pname = PARAM_NAME[self.name]
        if pname is None:
            object.__setattr__(self, "param", None)
        else:
            if self.param is None:
                lo, hi = PARAM_RANGE[self.name]
                raise StateError(f"{self.name} needs --{pname} in [{lo:g}, {hi:g}]")
            lo, hi = PARAM_RANGE[self.name]
            object.__setattr__(self, "param", _check_range(pname, self.param, lo, hi))

    def build(self) -> DensityMatrix:
        if self.name == "chi1":
            return make_chi1()
        if self.name == "chi2":
            return make_chi2(self.param)
        return make_chi3(self.param)

    @property
    def classification(self) -> str:
        return classify(self.name, self.param)

    @property
    def boundary(self) -> bool:
        """True at the edges of a classification interval."""
        if self.name == "chi2":
            return self.param in (0.0, 1.0)
        if self.name == "chi3":
            return self.param in (2.0, 3.0, 4.0, 5.0)
        return False

    @property
    def label(self) -> str:
        if self.param is None:
            return self.name
        return f"{self.name}({PARAM_NAME[self.name]}={self.param:g})"
