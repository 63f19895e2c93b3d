"""
Euler-Bernoulli finite element model of a clamped-free beam.

Two-node elements with a transverse displacement and a rotation per node,
cubic Hermite shape functions and a consistent mass matrix. Point masses act
on the translational dof of the nearest node. The root node is clamped by
deleting its two dofs, so a mesh of ``n`` elements has ``2n`` free dofs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, NumericalError

TRANSLATION = 0
ROTATION = 1


@dataclass(frozen=True)
class BeamModel:
    """Geometry, material and mesh of the cantilever.

    Parameters
    ----------
    length, width, thickness : float
        Beam dimensions in metres.
    youngs_modulus_nominal : float
        Young's modulus (Pa) used for elements not covered by an updating
        parameter.
    poisson_ratio : float
        Carried for completeness; a planar bending model does not use it.
    density : float
        Mass density in kg/m^3.
    n_elements : int
        Number of equal-length elements.
    point_masses : tuple of (position, mass)
        Lumped masses in (m, kg), measured from the clamped end.
    clamped_end : bool
        Remove the two root dofs.
    """

    length: float = 0.5
    width: float = 0.06
    thickness: float = 0.01
    youngs_modulus_nominal: float = 2.1e11
    poisson_ratio: float = 0.3
    density: float = 7850.0
    n_elements: int = 50
    point_masses: tuple = ((0.49, 0.12),)
    clamped_end: bool = True

    def __post_init__(self):
        for name in ("length", "width", "thickness", "density", "youngs_modulus_nominal"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise InvalidInputError(f"{name} must be strictly positive, got {value!r}")
        if int(self.n_elements) != self.n_elements or self.n_elements < 1:
            raise InvalidInputError(f"n_elements must be a positive integer, got {self.n_elements!r}")
        masses = tuple((float(x), float(m)) for x, m in self.point_masses)
        for x, m in masses:
            if not 0.0 <= x <= self.length:
                raise InvalidInputError(f"point mass position {x} outside [0, {self.length}]")
            if m < 0:
                raise InvalidInputError(f"point mass must be non-negative, got {m}")
        object.__setattr__(self, "point_masses", masses)
        object.__setattr__(self, "n_elements", int(self.n_elements))

    @property
    def element_length(self) -> float:
        return self.length / self.n_elements

    @property
    def nominal_inertia(self) -> float:
        """Second moment of area w t^3 / 12 about the bending axis."""
        return self.width * self.thickness**3 / 12.0

    @property
    def nominal_area(self) -> float:
        return self.width * self.thickness

    @property
    def n_dofs(self) -> int:
        return 2 * self.n_elements if self.clamped_end else 2 * (self.n_elements + 1)

    def nominal_properties(self) -> list[ElementProperties]:
        return [
            ElementProperties(
                self.youngs_modulus_nominal,
                self.nominal_inertia,
                self.nominal_area,
                self.density,
                self.element_length,
            )
            for _ in range(self.n_elements)
        ]


@dataclass(frozen=True)
class ElementProperties:
    E: float
    I: float
    A: float
    rho: float
    length: float

    def __post_init__(self):
        for name in ("E", "I", "A", "rho", "length"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise InvalidInputError(f"element property {name} must be strictly positive, got {value!r}")


@dataclass
class SystemMatrices:
    """Global mass and stiffness after boundary conditions.

    ``dof_map[e]`` lists the four global indices of element ``e``
    (``-1`` for a clamped dof). ``dofs[k]`` is ``(node, kind)`` of global dof
    ``k`` where kind is :data:`TRANSLATION` or :data:`ROTATION`.
    """

    M: np.ndarray
    K: np.ndarray
    dof_map: np.ndarray
    dofs: np.ndarray = field(default=None)

    @property
    def n_dofs(self) -> int:
        return self.K.shape[0]

    def translational_dofs(self) -> np.ndarray:
        return np.flatnonzero(self.dofs[:, 1] == TRANSLATION)


@dataclass
class ModalSolution:
    frequencies: np.ndarray
    mode_shapes: np.ndarray
    residuals: np.ndarray

    @property
    def omegas(self) -> np.ndarray:
        return 2.0 * np.pi * self.frequencies


def _unit_stiffness(ell):
    return np.array([
        [12.0, 6 * ell, -12.0, 6 * ell],
        [6 * ell, 4 * ell**2, -6 * ell, 2 * ell**2],
        [-12.0, -6 * ell, 12.0, -6 * ell],
        [6 * ell, 2 * ell**2, -6 * ell, 4 * ell**2],
    ]) / ell**3


def _unit_mass(ell):
    return np.array([
        [156.0, 22 * ell, 54.0, -13 * ell],
        [22 * ell, 4 * ell**2, 13 * ell, -3 * ell**2],
        [54.0, 13 * ell, 156.0, -22 * ell],
        [-13 * ell, -3 * ell**2, -22 * ell, 4 * ell**2],
    ]) * ell / 420.0


def element_matrices(props: ElementProperties) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(k_e, m_e)`` for one Euler-Bernoulli element.

    Dof order is ``(w_1, theta_1, w_2, theta_2)``.
    """
    if not isinstance(props, ElementProperties):
        raise InvalidInputError("props must be ElementProperties")
    k_e = props.E * props.I * _unit_stiffness(props.length)
    m_e = props.rho * props.A * _unit_mass(props.length)
    return k_e, m_e


class _Mesh:
    """Index bookkeeping reused across assemblies of the same model."""

    def __init__(self, model: BeamModel):
        n = model.n_elements
        ell = model.element_length
        full = np.arange(n)[:, None] * 2 + np.arange(4)[None, :]
        offset = 2 if model.clamped_end else 0
        self.dof_map = full - offset
        self.dof_map[self.dof_map < 0] = -1
        n_dofs = model.n_dofs
        nodes = np.repeat(np.arange(n + 1), 2)
        kinds = np.tile([TRANSLATION, ROTATION], n + 1)
        self.dofs = np.column_stack([nodes, kinds])[offset:]

        rows = np.repeat(self.dof_map, 4, axis=1)
        cols = np.tile(self.dof_map, (1, 4))
        keep = (rows >= 0) & (cols >= 0)
        self.flat_index = rows * n_dofs + cols
        self.keep = keep
        self.k_unit = _unit_stiffness(ell).ravel()
        self.m_unit = _unit_mass(ell).ravel()
        self.n_dofs = n_dofs

        self.point_mass_diag = np.zeros(n_dofs)
        for x, m in model.point_masses:
            node = int(round(x / ell))
            dof = 2 * node - offset
            if dof >= 0:
                self.point_mass_diag[dof] += m

    def assemble(self, EI, rhoA):
        n_dofs = self.n_dofs
        k_vals = EI[:, None] * self.k_unit[None, :]
        m_vals = rhoA[:, None] * self.m_unit[None, :]
        idx = self.flat_index[self.keep]
        K = np.bincount(idx, weights=k_vals[self.keep], minlength=n_dofs * n_dofs)
        M = np.bincount(idx, weights=m_vals[self.keep], minlength=n_dofs * n_dofs)
        K = K.reshape(n_dofs, n_dofs)
        M = M.reshape(n_dofs, n_dofs)
        M[np.diag_indices(n_dofs)] += self.point_mass_diag
        return M, K


_MESH_CACHE: dict[BeamModel, _Mesh] = {}


def _mesh_for(model: BeamModel) -> _Mesh:
    mesh = _MESH_CACHE.get(model)
    if mesh is None:
        mesh = _MESH_CACHE[model] = _Mesh(model)
    return mesh


def assemble_arrays(model: BeamModel, E, I, A) -> SystemMatrices:
    """Assemble from per-element property arrays (the fast path)."""
    n = model.n_elements
    E, I, A = (np.broadcast_to(np.asarray(v, dtype=float), (n,)) for v in (E, I, A))
    if np.any(~(E > 0)) or np.any(~(I > 0)) or np.any(~(A > 0)):
        raise InvalidInputError("element properties must be strictly positive")
    mesh = _mesh_for(model)
    M, K = mesh.assemble(E * I, model.density * A)
    return SystemMatrices(M=M, K=K, dof_map=mesh.dof_map.copy(), dofs=mesh.dofs.copy())


def assemble(model: BeamModel, per_element: Sequence[ElementProperties]) -> SystemMatrices:
    """Assemble global ``M`` and ``K`` from one :class:`ElementProperties` per element.

    Raises
    ------
    InvalidInputError
        If the number of entries differs from ``model.n_elements`` or an
        element length disagrees with the uniform mesh.
    """
    if len(per_element) != model.n_elements:
        raise InvalidInputError(
            f"expected {model.n_elements} element property sets, got {len(per_element)}"
        )
    ell = model.element_length
    for i, p in enumerate(per_element):
        if not np.isclose(p.length, ell, rtol=1e-12, atol=0.0):
            raise InvalidInputError(f"element {i} length {p.length} differs from mesh length {ell}")
    # Density enters per element, so fold rho into the area weight.
    rho = np.array([p.rho for p in per_element])
    E = np.array([p.E for p in per_element])
    I = np.array([p.I for p in per_element])
    A = np.array([p.A for p in per_element]) * rho / model.density
    return assemble_arrays(model, E, I, A)


def solve_modes(sys: SystemMatrices, n_modes: int, residual_tol: float = 1e-8) -> ModalSolution:
    """Lowest ``n_modes`` solutions of ``K phi = omega^2 M phi``.

    Uses a Cholesky reduction of ``M`` to a symmetric standard problem.
    Mode shapes are mass normalised. A mode whose relative residual
    ``||(K - w^2 M) phi|| / ||K phi||`` exceeds ``residual_tol`` raises
    :class:`NumericalError`.
    """
    N = sys.n_dofs
    if not 1 <= n_modes <= N:
        raise InvalidInputError(f"n_modes must be in [1, {N}], got {n_modes}")
    _check_mass(sys.M)
    try:
        # Factor K and take the largest eigenvalues of M phi = (1/w^2) K phi:
        # the lowest modes then carry a residual near machine precision,
        # which the Cholesky-of-M route loses to K's wide spectrum.
        mu, phi = scipy.linalg.eigh(sys.M, sys.K, subset_by_index=[N - n_modes, N - 1])
        lam = 1.0 / mu[::-1]
        phi = phi[:, ::-1]
    except (np.linalg.LinAlgError, ValueError):
        # K singular (no clamp): fall back to factoring M.
        try:
            lam, phi = scipy.linalg.eigh(sys.K, sys.M, subset_by_index=[0, n_modes - 1])
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise NumericalError(f"generalized eigensolve failed (is M positive definite?): {exc}") from exc
    if not np.all(np.isfinite(lam)):
        raise NumericalError("non-finite eigenvalue; check that M and K are positive definite")
    phi = phi / np.sqrt(np.einsum("ij,ij->j", phi, sys.M @ phi))

    if lam[0] < 0 and abs(lam[0]) > 1e-9 * abs(lam[-1]):
        raise NumericalError(f"negative eigenvalue {lam[0]:.3e}; K is not positive definite")
    lam = np.clip(lam, 0.0, None)

    Kphi = sys.K @ phi
    res = np.linalg.norm(Kphi - (sys.M @ phi) * lam, axis=0) / np.linalg.norm(Kphi, axis=0)
    bad = np.flatnonzero(res > residual_tol)
    if bad.size:
        raise NumericalError(f"eigen-residual {res[bad[0]]:.2e} too large for mode {bad[0] + 1}")

    # Fix the sign so that solutions are reproducible across LAPACK builds.
    signs = np.sign(phi[np.argmax(np.abs(phi), axis=0), np.arange(n_modes)])
    phi = phi * signs
    return ModalSolution(frequencies=np.sqrt(lam) / (2.0 * np.pi), mode_shapes=phi, residuals=res)


def _check_mass(M):
    try:
        np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"mass matrix is not positive definite: {exc}") from exc


def natural_frequencies(sys: SystemMatrices, n_modes: int) -> np.ndarray:
    """Lowest ``n_modes`` frequencies in Hz, without mode shapes.

    Same formulation as :func:`solve_modes`; cheaper because no vectors or
    residuals are formed.
    """
    N = sys.n_dofs
    if not 1 <= n_modes <= N:
        raise InvalidInputError(f"n_modes must be in [1, {N}], got {n_modes}")
    try:
        mu = scipy.linalg.eigh(sys.M, sys.K, eigvals_only=True, driver="gv")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"generalized eigensolve failed: {exc}") from exc
    mu = mu[::-1][:n_modes]
    if not np.all(mu > 0) or not np.all(np.isfinite(mu)):
        raise NumericalError("non-positive flexibility eigenvalue; M is not positive definite")
    return np.sqrt(1.0 / mu) / (2.0 * np.pi)


def guyan_transform(sys: SystemMatrices, master_dofs) -> np.ndarray:
    """Static condensation matrix ``T`` with ``u = T u_m`` (rows in global order)."""
    master = np.unique(np.asarray(master_dofs, dtype=int))
    N = sys.n_dofs
    if master.size == 0 or master[0] < 0 or master[-1] >= N:
        raise InvalidInputError("master_dofs must be a non-empty set of valid dof indices")
    slave = np.setdiff1d(np.arange(N), master)
    T = np.zeros((N, master.size))
    T[master, np.arange(master.size)] = 1.0
    if slave.size:
        K_ss = sys.K[np.ix_(slave, slave)]
        K_sm = sys.K[np.ix_(slave, master)]
        try:
            cho = scipy.linalg.cho_factor(K_ss)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"slave stiffness partition is singular: {exc}") from exc
        T[slave, :] = -scipy.linalg.cho_solve(cho, K_sm)
    return T


def guyan_reduce(sys: SystemMatrices, master_dofs) -> SystemMatrices:
    """Guyan (static) reduction onto ``master_dofs``.

    ``K_r = K_mm - K_ms K_ss^-1 K_sm`` and ``M_r = T^T M T``. Passing every
    dof returns copies of the original matrices.
    """
    master = np.unique(np.asarray(master_dofs, dtype=int))
    T = guyan_transform(sys, master)
    K_r = T.T @ sys.K @ T
    M_r = T.T @ sys.M @ T
    K_r = 0.5 * (K_r + K_r.T)
    M_r = 0.5 * (M_r + M_r.T)
    # Renumber the element map onto the retained dofs.
    lookup = np.full(sys.n_dofs, -1)
    lookup[master] = np.arange(master.size)
    dof_map = np.where(sys.dof_map >= 0, lookup[np.clip(sys.dof_map, 0, None)], -1)
    return SystemMatrices(M=M_r, K=K_r, dof_map=dof_map, dofs=sys.dofs[master].copy())


def modal_residual(sys: SystemMatrices, omega, phi) -> np.ndarray:
    """Return ``(K - omega^2 M) phi`` for a measured pair ``(omega, phi)``."""
    phi = np.asarray(phi, dtype=float)
    if phi.ndim != 1 or phi.shape[0] != sys.n_dofs:
        raise InvalidInputError(
            f"mode shape has {phi.shape} entries but the system has {sys.n_dofs} dofs; "
            "reduce the system to the measured coordinates first"
        )
    return sys.K @ phi - omega**2 * (sys.M @ phi)


def cantilever_frequency(n: int, E: float, I: float, A: float, rho: float, L: float) -> float:
    """Closed-form bare cantilever frequency in Hz for mode ``n`` (1-based)."""
    lam = _cantilever_roots(n)[-1]
    return lam**2 / (2.0 * np.pi) * np.sqrt(E * I / (rho * A * L**4))


def _cantilever_roots(n):
    # Roots of 1 + cos(x) cosh(x) = 0.
    from scipy.optimize import brentq

    f = lambda x: 1.0 + np.cos(x) * np.cosh(x)
    roots = []
    for k in range(1, n + 1):
        guess = (2 * k - 1) * np.pi / 2
        roots.append(brentq(f, guess - 1.0, guess + 1.0, xtol=1e-14))
    return roots
