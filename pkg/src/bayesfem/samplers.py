"""
Markov chain samplers: random-walk Metropolis-Hastings, hyperrectangle slice
sampling and Hybrid (Hamiltonian) Monte Carlo.

Every sampler draws from a :class:`Target`, works in physical units and
expresses its step sizes in units of ``Target.scale``. Points outside the
target bounds have log density ``-inf`` and are always rejected.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, NumericalError, SamplerError, StencilOutOfBoundsError
from .posterior import finite_difference_gradient


@dataclass
class Target:
    """Log-density to sample from.

    Parameters
    ----------
    dimension : int
    log_density : callable
        ``theta -> float``; may return ``-inf``.
    lower, upper : array_like, optional
        Hard bounds; default unbounded.
    scale : array_like, optional
        Natural length scale per coordinate; proposal widths, slice widths and
        finite-difference steps are multiples of it.
    grad_potential : callable, optional
        Gradient of ``-log_density``. Without it, HMC uses central finite
        differences with step ``fd_step`` (in ``scale`` units) and
        perturbation vector ``fd_delta``.
    """

    dimension: int
    log_density: Callable[[np.ndarray], float]
    lower: np.ndarray = None
    upper: np.ndarray = None
    scale: np.ndarray = None
    grad_potential: Callable[[np.ndarray], np.ndarray] | None = None
    names: tuple = None
    fd_step: float = 1e-4
    fd_delta: np.ndarray = None

    def __post_init__(self):
        q = int(self.dimension)
        if q < 1:
            raise InvalidInputError("dimension must be at least 1")
        self.dimension = q

        def vec(value, default):
            out = np.full(q, default) if value is None else np.array(value, dtype=float).reshape(-1)
            if out.size == 1:
                out = np.full(q, out[0])
            if out.shape != (q,):
                raise InvalidInputError(f"expected {q} entries, got {out.shape}")
            return out

        self.lower = vec(self.lower, -np.inf)
        self.upper = vec(self.upper, np.inf)
        self.scale = vec(self.scale, 1.0)
        if np.any(self.lower >= self.upper):
            raise InvalidInputError("every lower bound must be below its upper bound")
        if np.any(~(self.scale > 0)):
            raise InvalidInputError("scale entries must be positive")
        if self.names is None:
            self.names = tuple(f"theta_{i + 1}" for i in range(q))
        self.names = tuple(self.names)
        if len(self.names) != q:
            raise InvalidInputError(f"{len(self.names)} names for {q} parameters")

    def in_bounds(self, theta) -> bool:
        return bool(np.all(theta >= self.lower) and np.all(theta <= self.upper))


class _Evaluator:
    """Counts target evaluations; short-circuits out-of-bounds points."""

    def __init__(self, target: Target):
        self.target = target
        self.n_evals = 0
        self.n_grad_evals = 0

    def logp(self, theta) -> float:
        if not self.target.in_bounds(theta):
            return -np.inf
        self.n_evals += 1
        value = float(self.target.log_density(theta))
        return -np.inf if math.isnan(value) else value

    def grad_potential(self, theta) -> np.ndarray:
        t = self.target
        if not t.in_bounds(theta):
            raise StencilOutOfBoundsError("gradient requested outside the bounds")
        if t.grad_potential is not None:
            self.n_grad_evals += 1
            return np.asarray(t.grad_potential(theta), dtype=float)
        return finite_difference_gradient(
            lambda x: -self.logp(x),
            theta,
            h=t.fd_step,
            delta=t.fd_delta,
            scale=t.scale,
            lower=t.lower,
            upper=t.upper,
        )


@dataclass
class Chain:
    """Retained states of one run.

    ``n_evals[t]`` is the cumulative number of target evaluations after state
    ``t``. ``extras`` carries sampler specific per-state arrays such as slice
    heights or Hamiltonian energy errors.
    """

    samples: np.ndarray
    log_posterior: np.ndarray
    accepted: np.ndarray
    n_evals: np.ndarray
    seed: int | None
    sampler: str
    names: tuple
    extras: dict = field(default_factory=dict)

    def __len__(self):
        return self.samples.shape[0]

    @property
    def dimension(self) -> int:
        return self.samples.shape[1]

    @property
    def n_target_evals(self) -> int:
        return int(self.n_evals[-1]) if len(self) else 0

    def to_csv(self, path):
        """Write ``sample_index, <names...>, log_posterior, accepted, n_target_evals_cumulative``."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["sample_index", *self.names, "log_posterior", "accepted", "n_target_evals_cumulative"])
            for i in range(len(self)):
                writer.writerow([
                    i,
                    *(f"{v:.17e}" for v in self.samples[i]),
                    f"{self.log_posterior[i]:.17e}",
                    int(self.accepted[i]),
                    int(self.n_evals[i]),
                ])

    @classmethod
    def from_csv(cls, path, sampler: str = "", seed: int | None = None) -> Chain:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], rows[1:]
        names = tuple(header[1:-3])
        q = len(names)
        data = np.array([[float(v) for v in row] for row in body]).reshape(len(body), len(header))
        return cls(
            samples=data[:, 1:1 + q],
            log_posterior=data[:, 1 + q],
            accepted=data[:, 2 + q].astype(bool),
            n_evals=data[:, 3 + q].astype(int),
            seed=seed,
            sampler=sampler,
            names=names,
        )


class _Recorder:
    def __init__(self, n_samples, q, extras=()):
        self.samples = np.empty((n_samples, q))
        self.logp = np.empty(n_samples)
        self.accepted = np.zeros(n_samples, dtype=bool)
        self.n_evals = np.zeros(n_samples, dtype=int)
        self.extras = {name: np.empty(n_samples) for name in extras}
        self.count = 0

    def add(self, theta, logp, accepted, n_evals, **extras):
        i = self.count
        self.samples[i] = theta
        self.logp[i] = logp
        self.accepted[i] = accepted
        self.n_evals[i] = n_evals
        for key, value in extras.items():
            self.extras[key][i] = value
        self.count += 1

    def chain(self, seed, sampler, names) -> Chain:
        n = self.count
        return Chain(
            samples=self.samples[:n].copy(),
            log_posterior=self.logp[:n].copy(),
            accepted=self.accepted[:n].copy(),
            n_evals=self.n_evals[:n].copy(),
            seed=seed,
            sampler=sampler,
            names=names,
            extras={k: v[:n].copy() for k, v in self.extras.items()},
        )


def _start(target: Target, ev: _Evaluator, theta0, n_samples):
    theta = np.array(theta0, dtype=float).reshape(-1)
    if theta.shape != (target.dimension,):
        raise InvalidInputError(f"theta0 must have {target.dimension} entries, got {theta.shape}")
    if int(n_samples) != n_samples or n_samples < 1:
        raise InvalidInputError(f"n_samples must be a positive integer, got {n_samples}")
    if not target.in_bounds(theta):
        raise InvalidInputError(f"theta0 {theta} lies outside the target bounds")
    logp = ev.logp(theta)
    if not np.isfinite(logp):
        raise InvalidInputError(f"target log density at theta0 is {logp}")
    return theta, logp


def mh_accept(log_ratio: float, u: float) -> bool:
    """Metropolis rule: accept iff ``u <= min(1, exp(log_ratio))``."""
    if log_ratio == -np.inf or math.isnan(log_ratio):
        return False
    return u <= math.exp(min(0.0, log_ratio))


def mh_sample(target: Target, theta0, n_samples: int, seed=None, widths=0.1) -> Chain:
    """Random-walk Metropolis-Hastings with a Gaussian proposal.

    Parameters
    ----------
    widths : float or array_like
        Proposal standard deviations in units of ``target.scale``.

    The proposal is symmetric, so the Hastings ratio reduces to the ratio of
    target densities. Rejected proposals repeat the current state.
    """
    rng = np.random.default_rng(seed)
    ev = _Evaluator(target)
    theta, logp = _start(target, ev, theta0, n_samples)
    widths = np.broadcast_to(np.asarray(widths, dtype=float), (target.dimension,))
    if np.any(~(widths > 0)):
        raise InvalidInputError("proposal widths must be positive")
    step = widths * target.scale

    rec = _Recorder(n_samples, target.dimension)
    for _ in range(n_samples):
        proposal = theta + step * rng.standard_normal(target.dimension)
        logp_prop = ev.logp(proposal)
        u = rng.uniform()
        accepted = mh_accept(logp_prop - logp, u)
        if accepted:
            theta, logp = proposal, logp_prop
        rec.add(theta, logp, accepted, ev.n_evals)
    return rec.chain(seed, "mh", target.names)


def slice_sample(
    target: Target,
    theta0,
    n_samples: int,
    seed=None,
    widths=None,
    max_shrink: int = 1000,
) -> Chain:
    """Multivariate slice sampling with a randomly placed hyperrectangle.

    Each update draws a slice height below the current density, places a box
    of side ``widths * scale`` uniformly around the current point (clipped
    to the bounds), and samples uniformly inside it, shrinking the box toward
    the current point after each miss. There is no stepping out.

    ``widths`` defaults to the full bound range, which requires finite bounds.
    Heights are stored in ``chain.extras["log_height"]`` and the number of
    candidates per update in ``chain.extras["n_candidates"]``.
    """
    rng = np.random.default_rng(seed)
    ev = _Evaluator(target)
    theta, logp = _start(target, ev, theta0, n_samples)
    if widths is None:
        span = target.upper - target.lower
        if not np.all(np.isfinite(span)):
            raise InvalidInputError("slice widths must be given for an unbounded target")
        w = span
    else:
        w = np.broadcast_to(np.asarray(widths, dtype=float), (target.dimension,)) * target.scale
    if np.any(~(w > 0)) or not np.all(np.isfinite(w)):
        raise InvalidInputError("slice widths must be positive and finite")

    rec = _Recorder(n_samples, target.dimension, extras=("log_height", "n_candidates"))
    q = target.dimension
    for _ in range(n_samples):
        # 1 - U lies in (0, 1], so the log is finite.
        log_y = logp + math.log(1.0 - rng.uniform())
        left = theta - w * rng.uniform(size=q)
        right = left + w
        left = np.maximum(left, target.lower)
        right = np.minimum(right, target.upper)
        for k in range(1, max_shrink + 1):
            candidate = left + rng.uniform(size=q) * (right - left)
            logp_cand = ev.logp(candidate)
            if logp_cand >= log_y:
                break
            below = candidate < theta
            left = np.where(below, candidate, left)
            right = np.where(below, right, candidate)
        else:
            widest = int(np.argmax((right - left) / w))
            raise SamplerError(
                f"slice shrinkage did not terminate after {max_shrink} candidates; "
                f"coordinate {widest} ({target.names[widest]}) kept width {right[widest] - left[widest]:.3e}",
                partial_chain=rec.chain(seed, "slice", target.names),
            )
        theta, logp = candidate, logp_cand
        rec.add(theta, logp, True, ev.n_evals, log_height=log_y, n_candidates=k)
    return rec.chain(seed, "slice", target.names)


@dataclass
class HmcState:
    """Phase-space point for the leapfrog integrator.

    ``mass`` is the kinetic-energy matrix ``W(p) = p^T mass^-1 p / 2``.
    ``gradient`` caches the potential gradient at ``position`` when known.
    """

    position: np.ndarray
    momentum: np.ndarray
    mass: np.ndarray
    step_size: float
    n_steps: int = 1
    gradient: np.ndarray | None = None
    _mass_factor: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.momentum = np.asarray(self.momentum, dtype=float)
        q = self.position.size
        self.mass = np.atleast_2d(np.asarray(self.mass, dtype=float))
        if self.mass.shape != (q, q):
            raise InvalidInputError(f"mass matrix must be {q}x{q}, got {self.mass.shape}")
        if not self.step_size > 0:
            raise InvalidInputError(f"step size must be positive, got {self.step_size}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise InvalidInputError(f"n_steps must be a positive integer, got {self.n_steps}")
        if self._mass_factor is None:
            self._mass_factor = _mass_factor(self.mass)

    def velocity(self, momentum=None) -> np.ndarray:
        p = self.momentum if momentum is None else momentum
        return scipy.linalg.cho_solve(self._mass_factor, p)

    def kinetic(self) -> float:
        return 0.5 * float(self.momentum @ self.velocity())


def _mass_factor(mass):
    if not np.allclose(mass, mass.T, rtol=1e-12, atol=0.0):
        raise InvalidInputError("mass matrix must be symmetric")
    try:
        return scipy.linalg.cho_factor(mass, lower=True)
    except np.linalg.LinAlgError as exc:
        raise InvalidInputError(f"mass matrix is not positive definite: {exc}") from exc


def _reflect(position, momentum, lower, upper, diagonal):
    """Mirror coordinates that crossed a bound and flip their momentum.

    Exact (reversible, volume preserving) only for a diagonal mass matrix.
    """
    for _ in range(100):
        above = position > upper
        below = position < lower
        if not (above.any() or below.any()):
            return position, momentum
        if not diagonal:
            raise StencilOutOfBoundsError("trajectory left the bounds (reflection needs a diagonal mass)")
        position = np.where(above, 2.0 * upper - position, position)
        position = np.where(below, 2.0 * lower - position, position)
        momentum = np.where(above | below, -momentum, momentum)
    raise StencilOutOfBoundsError("trajectory step is much wider than the bounded region")


def _leapfrog(grad, state: HmcState, lower=None, upper=None, boundary="reflect") -> HmcState:
    dt = state.step_size
    g = state.gradient if state.gradient is not None else grad(state.position)
    p_half = state.momentum - 0.5 * dt * g
    position = state.position + dt * state.velocity(p_half)
    if lower is not None and (np.any(position < lower) or np.any(position > upper)):
        if boundary != "reflect":
            raise StencilOutOfBoundsError("leapfrog drift left the bounds")
        diagonal = np.count_nonzero(state.mass - np.diag(np.diag(state.mass))) == 0
        position, p_half = _reflect(position, p_half, lower, upper, diagonal)
    g_new = grad(position)
    momentum = p_half - 0.5 * dt * g_new
    return replace(state, position=position, momentum=momentum, gradient=g_new)


def leapfrog(target: Target, state: HmcState, boundary: str = "reflect") -> HmcState:
    """One half-kick, drift, half-kick step of Hamiltonian dynamics.

    ``p <- p - dt/2 grad V(x)``, ``x <- x + dt M^-1 p``, ``p <- p - dt/2 grad V(x)``.
    A drift that crosses a bound is mirrored back inside with the matching
    momentum components negated (``boundary="reflect"``) or raises
    (``boundary="reject"``).

    Raises
    ------
    NumericalError
        If the drift leaves the bounds without reflection or the gradient
        cannot be evaluated.
    """
    ev = target if isinstance(target, _Evaluator) else _Evaluator(target)
    t = ev.target
    return _leapfrog(ev.grad_potential, state, t.lower, t.upper, boundary)


def hmc_sample(
    target: Target,
    theta0,
    n_samples: int,
    seed=None,
    step_size: float = 0.05,
    n_steps: int = 10,
    mass=None,
    boundary: str = "reflect",
) -> Chain:
    """Hybrid Monte Carlo.

    Parameters
    ----------
    step_size : float
        Leapfrog time step.
    n_steps : int
        Leapfrog steps per trajectory.
    mass : array_like, optional
        Kinetic-energy matrix. Defaults to ``diag(1 / scale**2)``, which is
        the identity in scale units; ``step_size`` is then also in scale units.

    With ``boundary="reflect"`` trajectories bounce off the parameter bounds
    (diagonal ``mass`` only); with ``"reject"`` a trajectory that leaves the
    bounds is rejected. A trajectory whose gradient fails is rejected.
    ``chain.extras["energy_error"]`` holds ``H_new - H_old`` per iteration
    (``inf`` for aborted trajectories).
    """
    if boundary not in ("reflect", "reject"):
        raise InvalidInputError(f"boundary must be 'reflect' or 'reject', got {boundary!r}")
    rng = np.random.default_rng(seed)
    ev = _Evaluator(target)
    theta, logp = _start(target, ev, theta0, n_samples)
    if mass is None:
        mass = np.diag(1.0 / target.scale**2)
    mass = np.atleast_2d(np.asarray(mass, dtype=float))
    factor = _mass_factor(mass) if mass.shape == (target.dimension,) * 2 else None
    if factor is None:
        raise InvalidInputError(f"mass matrix must be {target.dimension}x{target.dimension}")
    chol = np.tril(factor[0])

    rec = _Recorder(n_samples, target.dimension, extras=("energy_error",))
    try:
        gradient = ev.grad_potential(theta)
    except NumericalError:
        gradient = None
    for _ in range(n_samples):
        p0 = chol @ rng.standard_normal(target.dimension)
        state = HmcState(theta, p0, mass, step_size, n_steps, gradient, _mass_factor=factor)
        h_old = -logp + state.kinetic()
        try:
            for _ in range(n_steps):
                state = _leapfrog(ev.grad_potential, state, target.lower, target.upper, boundary)
            logp_new = ev.logp(state.position)
            h_new = -logp_new + state.kinetic()
            d_h = h_new - h_old
        except NumericalError:
            d_h = np.inf
        u = rng.uniform()
        accepted = mh_accept(-d_h, u)
        if accepted:
            theta, logp, gradient = state.position, logp_new, state.gradient
        rec.add(theta, logp, accepted, ev.n_evals, energy_error=d_h)
    return rec.chain(seed, "hmc", target.names)


def estimate(chain: Chain, G: Callable[[np.ndarray], object] | None = None, burn_in: int = 0) -> np.ndarray:
    """Monte Carlo average of ``G`` over the samples after ``burn_in``.

    ``G`` defaults to the identity, giving the posterior mean.
    """
    if not 0 <= burn_in < len(chain):
        raise InvalidInputError(f"burn_in {burn_in} leaves no samples from a chain of {len(chain)}")
    kept = chain.samples[burn_in:]
    if G is None:
        return kept.mean(axis=0)
    values = np.array([np.asarray(G(x), dtype=float) for x in kept])
    return values.mean(axis=0)
