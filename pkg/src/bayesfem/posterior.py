"""
Posterior density over the updating parameters.

The likelihood is a Gaussian in the modal errors with weight ``beta``; the
prior is a Gaussian with per-parameter precision ``alpha_i = 1 / sigma_i**2``
truncated to the parameter bounds. All densities are handled in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidInputError, NumericalError, StencilOutOfBoundsError
from .fem_beam import BeamModel, ModalSolution, assemble_arrays, natural_frequencies, solve_modes

KINDS = ("youngs_modulus", "inertia", "area")


@dataclass(frozen=True)
class ParameterEntry:
    """One updating parameter applied to a contiguous block of elements.

    ``elements`` is a half-open ``(start, stop)`` element index range.
    """

    name: str
    kind: str
    elements: tuple
    sigma: float
    lower: float
    upper: float
    initial: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"{self.name}: kind must be one of {KINDS}, got {self.kind!r}")
        start, stop = (int(v) for v in self.elements)
        if not 0 <= start < stop:
            raise InvalidInputError(f"{self.name}: empty or negative element range {self.elements}")
        object.__setattr__(self, "elements", (start, stop))
        if not self.sigma > 0:
            raise InvalidInputError(f"{self.name}: sigma must be positive, got {self.sigma}")
        if not self.lower < self.upper:
            raise InvalidInputError(f"{self.name}: lower bound {self.lower} must be below upper {self.upper}")
        if not self.lower <= self.initial <= self.upper:
            raise InvalidInputError(
                f"{self.name}: initial value {self.initial} outside [{self.lower}, {self.upper}]"
            )


@dataclass(frozen=True)
class ParameterSpace:
    entries: tuple

    def __post_init__(self):
        entries = tuple(self.entries)
        if not entries:
            raise InvalidInputError("parameter space needs at least one entry")
        object.__setattr__(self, "entries", entries)
        names = [e.name for e in entries]
        if len(set(names)) != len(names):
            raise InvalidInputError(f"duplicate parameter names in {names}")
        for kind in KINDS:
            ranges = sorted(e.elements for e in entries if e.kind == kind)
            for (_, stop), (start, _) in zip(ranges, ranges[1:]):
                if start < stop:
                    raise InvalidInputError(f"overlapping element ranges for kind {kind!r}")

    def __len__(self):
        return len(self.entries)

    @property
    def names(self) -> list[str]:
        return [e.name for e in self.entries]

    @property
    def sigma(self) -> np.ndarray:
        return np.array([e.sigma for e in self.entries])

    @property
    def lower(self) -> np.ndarray:
        return np.array([e.lower for e in self.entries])

    @property
    def upper(self) -> np.ndarray:
        return np.array([e.upper for e in self.entries])

    @property
    def initial(self) -> np.ndarray:
        return np.array([e.initial for e in self.entries])

    @property
    def alpha(self) -> np.ndarray:
        return 1.0 / self.sigma**2

    def in_bounds(self, theta) -> bool:
        theta = np.asarray(theta, dtype=float)
        return bool(np.all(theta >= self.lower) and np.all(theta <= self.upper))

    def check_fits(self, model: BeamModel):
        for e in self.entries:
            if e.elements[1] > model.n_elements:
                raise InvalidInputError(
                    f"{e.name}: element range {e.elements} exceeds mesh of {model.n_elements} elements"
                )

    def nominal(self, model: BeamModel) -> np.ndarray:
        base = {
            "youngs_modulus": model.youngs_modulus_nominal,
            "inertia": model.nominal_inertia,
            "area": model.nominal_area,
        }
        return np.array([base[e.kind] for e in self.entries])

    def element_arrays(self, model: BeamModel, theta) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-element ``(E, I, A)``; elements outside every group keep nominal values."""
        n = model.n_elements
        arrays = {
            "youngs_modulus": np.full(n, model.youngs_modulus_nominal),
            "inertia": np.full(n, model.nominal_inertia),
            "area": np.full(n, model.nominal_area),
        }
        for entry, value in zip(self.entries, theta):
            start, stop = entry.elements
            arrays[entry.kind][start:stop] = value
        return arrays["youngs_modulus"], arrays["inertia"], arrays["area"]


@dataclass(frozen=True)
class ModalData:
    """Measured natural frequencies (Hz) and likelihood weighting."""

    frequencies: tuple
    n_positions: int = 1
    beta: object = 1.0

    def __post_init__(self):
        f = tuple(float(v) for v in np.atleast_1d(self.frequencies))
        if not f:
            raise InvalidInputError("at least one measured frequency is required")
        if any(v <= 0 for v in f) or any(b <= a for a, b in zip(f, f[1:])):
            raise InvalidInputError(f"measured frequencies must be positive and ascending, got {f}")
        object.__setattr__(self, "frequencies", f)
        if int(self.n_positions) != self.n_positions or self.n_positions < 1:
            raise InvalidInputError(f"n_positions must be a positive integer, got {self.n_positions}")
        beta = np.atleast_1d(np.asarray(self.beta, dtype=float))
        if beta.size not in (1, len(f)):
            raise InvalidInputError(f"beta must be a scalar or have {len(f)} entries, got {beta.size}")
        if np.any(~(beta > 0)):
            raise InvalidInputError(f"beta entries must be positive, got {beta}")
        object.__setattr__(self, "beta", float(beta[0]) if beta.size == 1 else tuple(beta.tolist()))

    @property
    def n_modes(self) -> int:
        return len(self.frequencies)

    @property
    def beta_vector(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.beta, dtype=float), (self.n_modes,))


def z_data(beta, F: int, n_modes: int) -> float:
    """Likelihood normaliser ``(pi / beta) ** (F * n_modes / 2)``.

    A per-mode ``beta`` vector gives ``prod_i (pi / beta_i) ** (F / 2)``.
    """
    return math.exp(log_z_data(beta, F, n_modes))


def log_z_data(beta, F: int, n_modes: int) -> float:
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    if np.any(~(beta > 0)):
        raise InvalidInputError(f"beta must be positive, got {beta}")
    if beta.size == 1:
        return 0.5 * F * n_modes * math.log(math.pi / float(beta[0]))
    if beta.size != n_modes:
        raise InvalidInputError(f"beta vector has {beta.size} entries for {n_modes} modes")
    return 0.5 * F * float(np.sum(np.log(math.pi / beta)))


def z_prior(alpha) -> float:
    """Prior normaliser ``(2 pi) ** (Q / 2) * prod_i alpha_i ** -0.5``."""
    return math.exp(log_z_prior(alpha))


def log_z_prior(alpha) -> float:
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    if alpha.size == 0 or np.any(~(alpha > 0)):
        raise InvalidInputError(f"alpha entries must be positive, got {alpha}")
    return 0.5 * alpha.size * math.log(2.0 * math.pi) - 0.5 * float(np.sum(np.log(alpha)))


def finite_difference_gradient(
    potential: Callable[[np.ndarray], float],
    theta,
    h: float = 1e-4,
    delta=None,
    scale=None,
    lower=None,
    upper=None,
) -> np.ndarray:
    """Central-difference gradient of ``potential``, one coordinate at a time.

    Coordinate ``i`` is perturbed by ``h * delta[i] * scale[i]``, so ``h`` is
    dimensionless when ``scale`` carries the parameter units. Costs ``2 Q``
    potential evaluations.

    Raises
    ------
    StencilOutOfBoundsError
        If a stencil point leaves ``[lower, upper]`` or the potential is not
        finite there.
    """
    theta = np.asarray(theta, dtype=float)
    q = theta.size
    if not h > 0:
        raise InvalidInputError(f"h must be positive, got {h}")
    delta = np.ones(q) if delta is None else np.broadcast_to(np.asarray(delta, dtype=float), (q,))
    scale = np.ones(q) if scale is None else np.broadcast_to(np.asarray(scale, dtype=float), (q,))
    if np.any(delta == 0):
        raise InvalidInputError("perturbation vector entries must be non-zero")
    lower = np.full(q, -np.inf) if lower is None else np.asarray(lower, dtype=float)
    upper = np.full(q, np.inf) if upper is None else np.asarray(upper, dtype=float)

    steps = h * delta * scale
    grad = np.empty(q)
    for i in range(q):
        plus = theta.copy()
        minus = theta.copy()
        plus[i] += steps[i]
        minus[i] -= steps[i]
        hi, lo = max(plus[i], minus[i]), min(plus[i], minus[i])
        if hi > upper[i] or lo < lower[i]:
            raise StencilOutOfBoundsError(
                f"gradient stencil for coordinate {i} leaves the bounds; reduce the step size h"
            )
        v_plus = potential(plus)
        v_minus = potential(minus)
        if not (np.isfinite(v_plus) and np.isfinite(v_minus)):
            raise StencilOutOfBoundsError(
                f"potential not finite on the stencil of coordinate {i}; reduce the step size h"
            )
        grad[i] = (v_plus - v_minus) / (2.0 * steps[i])
    return grad


@dataclass(frozen=True)
class PosteriorDensity:
    """Posterior over a :class:`ParameterSpace` given :class:`ModalData`.

    Parameters
    ----------
    metric : {"relative", "absolute"}
        ``relative``: ``(f_meas - f_model) / f_meas``; ``absolute``:
        ``f_meas - f_model`` in Hz.
    prior_mean : {"zero", "nominal"}
        ``zero`` centres the Gaussian prior at the origin; ``nominal`` centres
        it at the model's nominal property values.
    """

    model: BeamModel
    space: ParameterSpace
    data: ModalData
    metric: str = "relative"
    prior_mean: str = "zero"
    _prior_centre: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.metric not in ("relative", "absolute"):
            raise InvalidInputError(f"metric must be 'relative' or 'absolute', got {self.metric!r}")
        if self.prior_mean not in ("zero", "nominal"):
            raise InvalidInputError(f"prior_mean must be 'zero' or 'nominal', got {self.prior_mean!r}")
        self.space.check_fits(self.model)
        if self.data.n_modes > self.model.n_dofs:
            raise InvalidInputError("more measured modes than model dofs")
        centre = (
            np.zeros(len(self.space)) if self.prior_mean == "zero" else self.space.nominal(self.model)
        )
        object.__setattr__(self, "_prior_centre", centre)

    @property
    def dimension(self) -> int:
        return len(self.space)

    def _theta(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.dimension,):
            raise InvalidInputError(f"expected a parameter vector of length {self.dimension}, got {theta.shape}")
        if not np.all(np.isfinite(theta)):
            raise InvalidInputError(f"parameter vector must be finite, got {theta}")
        return theta

    def system(self, theta):
        theta = self._theta(theta)
        E, I, A = self.space.element_arrays(self.model, theta)
        try:
            return assemble_arrays(self.model, E, I, A)
        except InvalidInputError as exc:
            raise NumericalError(f"cannot build the FE model at theta={theta}: {exc}") from exc

    def modes(self, theta, n_modes: int | None = None) -> ModalSolution:
        return solve_modes(self.system(theta), n_modes or self.data.n_modes)

    def model_frequencies(self, theta) -> np.ndarray:
        return natural_frequencies(self.system(theta), self.data.n_modes)

    def error_terms(self, theta) -> np.ndarray:
        """Modal error matrix of shape ``(n_modes, n_positions)``.

        Frequency errors do not depend on the measurement position, so every
        column is identical.
        """
        f_model = self.model_frequencies(theta)
        f_meas = np.asarray(self.data.frequencies)
        eps = f_meas - f_model
        if self.metric == "relative":
            eps = eps / f_meas
        return np.repeat(eps[:, None], self.data.n_positions, axis=1)

    def log_z_data(self) -> float:
        return log_z_data(self.data.beta, self.data.n_positions, self.data.n_modes)

    def log_z_prior(self) -> float:
        return log_z_prior(self.space.alpha)

    def log_z_posterior(self) -> float:
        return self.log_z_data() + self.log_z_prior()

    def data_misfit(self, theta) -> float:
        """``sum_i beta_i sum_j eps_ij**2``."""
        eps = self.error_terms(theta)
        return float(np.sum(self.data.beta_vector * np.sum(eps**2, axis=1)))

    def log_likelihood(self, theta) -> float:
        return -self.data_misfit(theta) - self.log_z_data()

    def prior_exponent(self, theta) -> float:
        theta = self._theta(theta)
        d = theta - self._prior_centre
        return -float(np.sum(0.5 * self.space.alpha * d**2))

    def log_prior(self, theta) -> float:
        """Gaussian log prior, ``-inf`` outside the parameter bounds."""
        theta = self._theta(theta)
        if not self.space.in_bounds(theta):
            return -np.inf
        return self.prior_exponent(theta) - self.log_z_prior()

    def log_posterior(self, theta) -> float:
        theta = self._theta(theta)
        log_prior = self.log_prior(theta)
        if log_prior == -np.inf:
            return -np.inf
        return (
            self.log_likelihood(theta)
            + log_prior
            + self.log_z_data()
            + self.log_z_prior()
            - self.log_z_posterior()
        )

    def potential(self, theta) -> float:
        return -self.log_posterior(theta)

    def grad_potential(self, theta, h: float = 1e-4, delta=None) -> np.ndarray:
        """Finite-difference gradient of :meth:`potential` with steps in sigma units."""
        return finite_difference_gradient(
            self.potential,
            self._theta(theta),
            h=h,
            delta=delta,
            scale=self.space.sigma,
            lower=self.space.lower,
            upper=self.space.upper,
        )

    def safe_log_density(self, theta) -> float:
        """:meth:`log_posterior` with FE failures mapped to ``-inf``."""
        try:
            return self.log_posterior(theta)
        except NumericalError:
            return -np.inf

    def as_target(self, h: float = 1e-4, delta=None):
        """Wrap as a :class:`bayesfem.samplers.Target` (gradient by finite differences)."""
        from .samplers import Target

        return Target(
            dimension=self.dimension,
            log_density=self.safe_log_density,
            lower=self.space.lower,
            upper=self.space.upper,
            scale=self.space.sigma,
            names=tuple(self.space.names),
            fd_step=h,
            fd_delta=delta,
        )

