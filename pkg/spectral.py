"""
Spectral bounds, spectral projections p_λ = 1 − ((g − λ)⁺)°, eigenprojections
d_λ = 1 − (g − λ)°, full resolutions and step-function approximation.
"""
import logging
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

import oracle
from constructive_calculus import Method, Reports, carrier, pos_part, snap_to_projection
from errors import DomainError, InvariantViolation
from hermitian_core import (
    DEFAULT_TOLERANCES,
    HermitianMatrix,
    Projection,
    ToleranceConfig,
    commutes,
    compress,
    loewner_leq,
    order_bounds,
    order_slack,
)
from projection_lattice import join_all, meet_all
from utils import parallel_map

logger = logging.getLogger(__name__)

# grid of the resolution that locates neighbouring breakpoints for the default check points
NEIGHBOUR_GRID = 16


@dataclass(frozen=True)
class SpectralBounds:
    lower: float
    upper: float

    def __post_init__(self):
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)) or self.lower > self.upper:
            raise InvariantViolation(f"invalid spectral bounds ({self.lower}, {self.upper})")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def norm(self) -> float:
        return max(abs(self.lower), abs(self.upper))


@dataclass(frozen=True)
class Partition:
    points: Tuple[float, ...]

    def __post_init__(self):
        if len(self.points) < 2 or any(b <= a for a, b in zip(self.points, self.points[1:])):
            raise DomainError("partition points must be strictly ascending, at least two of them")

    @classmethod
    def uniform(cls, lower: float, upper: float, cells: int) -> "Partition":
        return cls(tuple(float(x) for x in np.linspace(lower, upper, cells + 1)))

    @property
    def cells(self) -> int:
        return len(self.points) - 1

    @property
    def mesh(self) -> float:
        return float(np.max(np.diff(self.points)))

    def covers(self, bounds: SpectralBounds) -> bool:
        """λ₀ < L and U < λ_n"""
        return self.points[0] < bounds.lower and bounds.upper < self.points[-1]


@dataclass(frozen=True)
class Breakpoint:
    value: float
    projection: Projection
    eigenprojection: Projection


@dataclass(frozen=True)
class SpectralResolution:
    """
    λ ↦ p_λ represented by its breakpoints; p_λ is constant between consecutive
    breakpoints, zero below the first and the identity from the last one on.
    """

    element: HermitianMatrix
    bounds: SpectralBounds
    breakpoints: Tuple[Breakpoint, ...]
    grid: Tuple[Tuple[float, Projection], ...] = field(default=(), repr=False)

    @property
    def eigenvalues(self) -> Tuple[float, ...]:
        return tuple(bp.value for bp in self.breakpoints)

    def projection_at(self, lam: float) -> Projection:
        current = None
        for bp in self.breakpoints:
            if bp.value <= lam:
                current = bp.projection
            else:
                break
        return current if current is not None else Projection(np.zeros((self.element.n, self.element.n)))


class StepApproximation(NamedTuple):
    approximation: HermitianMatrix
    partition: Partition
    achieved_error: float
    cells: Tuple[Projection, ...]
    values: Tuple[float, ...]


def _rank(p: Projection) -> int:
    return int(round(p.trace()))


def _bounds_norm(h: HermitianMatrix, cfg: ToleranceConfig) -> float:
    return SpectralBounds(*order_bounds(h, cfg)).norm


def spectral_bounds(g: HermitianMatrix, config: Optional[ToleranceConfig] = None) -> SpectralBounds:
    """(L_g, U_g) by order bisection inside the Gershgorin bracket."""
    return SpectralBounds(*order_bounds(g, config))


def partition_margin(g: HermitianMatrix, bounds: SpectralBounds, cells: int, config: Optional[ToleranceConfig] = None) -> float:
    """δ = max(tau_conv, (U−L)/(4n), order slack); the slack term covers the bisection error of L and U."""
    cfg = config or DEFAULT_TOLERANCES
    return max(cfg.tau_conv, bounds.width / (4.0 * cells), order_slack(g, cfg))


def spectral_projection(
    g: HermitianMatrix,
    lam: float,
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
    reports: Reports = None,
) -> Projection:
    """p_{g,λ} = 1 − ((g − λ·1)⁺)°"""
    cfg = config or DEFAULT_TOLERANCES
    if method is Method.ORACLE:
        return oracle.reference_threshold(g, lam, cfg)
    shifted = g - HermitianMatrix.scalar(lam, g.n)
    cutoff = cfg.tau_psd * (1.0 + shifted.norm)
    support, _ = carrier(pos_part(shifted, cfg, method, reports), cfg, method, reports, cutoff=cutoff)
    return support.complement()


def eigenprojection(
    g: HermitianMatrix,
    lam: float,
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
    reports: Reports = None,
) -> Projection:
    """d_{g,λ} = 1 − (g − λ·1)°; nonzero iff λ is an eigenvalue."""
    cfg = config or DEFAULT_TOLERANCES
    if method is Method.ORACLE:
        return oracle.reference_eigenprojection(g, lam, cfg)
    support, _ = carrier(g - HermitianMatrix.scalar(lam, g.n), cfg, method, reports)
    return support.complement()


def _isolate(
    g: HermitianMatrix,
    lo: Tuple[float, Projection],
    hi: Tuple[float, Projection],
    cfg: ToleranceConfig,
    method: Method,
    reports: Reports,
) -> List[Breakpoint]:
    """
    Breakpoints inside (lo, hi], given that the rank of p_λ jumps there.

    A bracket holding a single eigenvalue is resolved at once: the Rayleigh quotient of
    the jump subspace is that eigenvalue. Brackets holding several are bisected.
    """
    (lam_lo, p_lo), (lam_hi, p_hi) = lo, hi
    jump = _rank(p_hi) - _rank(p_lo)
    u = p_hi.data - p_lo.data
    value = float(np.trace(u @ g.data).real) / jump
    if lam_lo < value <= lam_hi:
        d = eigenprojection(g, value, cfg, method, reports)
        if _rank(d) == jump:
            p = spectral_projection(g, value, cfg, method, reports)
            if _rank(p) == _rank(p_hi):
                return [Breakpoint(value, p, d)]
    if lam_hi - lam_lo <= cfg.tau_conv * (1.0 + g.norm):
        raise InvariantViolation(f"could not separate eigenvalues inside [{lam_lo}, {lam_hi}]")
    mid = 0.5 * (lam_lo + lam_hi)
    p_mid = spectral_projection(g, mid, cfg, method, reports)
    found = []
    if _rank(p_mid) > _rank(p_lo):
        found.extend(_isolate(g, lo, (mid, p_mid), cfg, method, reports))
    if _rank(p_hi) > _rank(p_mid):
        found.extend(_isolate(g, (mid, p_mid), hi, cfg, method, reports))
    return found


def _check_resolution(resolution: SpectralResolution, cfg: ToleranceConfig) -> None:
    g = resolution.element
    previous = None
    for bp in resolution.breakpoints:
        if not commutes(bp.projection, g, cfg):
            raise InvariantViolation(f"p at {bp.value} does not commute with the element")
        if previous is not None and not loewner_leq(previous, bp.projection, cfg):
            raise InvariantViolation(f"resolution descends at {bp.value}")
        previous = bp.projection
    if previous is None or _rank(previous) != g.n:
        raise InvariantViolation("resolution does not reach the identity")


def full_resolution(
    g: HermitianMatrix,
    grid_size: int,
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
    reports: Reports = None,
) -> SpectralResolution:
    """
    Sample p_λ on a uniform grid over [L−δ, U+δ], then isolate every rank jump.

    Grid samples are independent and run on config.workers threads.
    """
    cfg = config or DEFAULT_TOLERANCES
    if grid_size < 2:
        raise DomainError("grid_size must be at least 2")
    bounds = spectral_bounds(g, cfg)
    delta = partition_margin(g, bounds, grid_size - 1, cfg)
    grid = [float(x) for x in np.linspace(bounds.lower - delta, bounds.upper + delta, grid_size)]
    samples = parallel_map(lambda lam: spectral_projection(g, lam, cfg, method, reports), grid, cfg.workers)
    if _rank(samples[0]) != 0 or _rank(samples[-1]) != g.n:
        raise InvariantViolation("grid ends do not bracket the spectrum")

    breakpoints: List[Breakpoint] = []
    for lo, hi in zip(zip(grid, samples), zip(grid[1:], samples[1:])):
        step = _rank(hi[1]) - _rank(lo[1])
        if step < 0:
            raise InvariantViolation(f"rank of p_λ drops between {lo[0]} and {hi[0]}")
        if step > 0:
            breakpoints.extend(_isolate(g, lo, hi, cfg, method, reports))
    resolution = SpectralResolution(g, bounds, tuple(breakpoints), tuple(zip(grid, samples)))
    _check_resolution(resolution, cfg)
    logger.debug(f"resolution with {len(breakpoints)} breakpoints: {resolution.eigenvalues}")
    return resolution


def step_approximation(
    g: HermitianMatrix,
    n: int,
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
    gamma: str = "left",
    interval: Optional[Tuple[float, float]] = None,
    resolution: Optional[SpectralResolution] = None,
    reports: Reports = None,
) -> StepApproximation:
    """
    Σ γ_i u_i with u_i = p_{λ_i} − p_{λ_{i−1}} on a uniform partition of n cells.

    :param gamma: "left" uses λ_{i−1}; "midpoint" uses the cell centre
    :param interval: fixed (α, β) with α < L and U < β instead of the δ margin
    :param resolution: precomputed resolution of g to read p_λ from
    """
    cfg = config or DEFAULT_TOLERANCES
    if n < 1:
        raise DomainError("step approximation needs n ≥ 1")
    if gamma not in ("left", "midpoint"):
        raise DomainError(f"unknown gamma rule {gamma!r}")
    bounds = spectral_bounds(g, cfg)
    if interval is None:
        delta = partition_margin(g, bounds, n, cfg)
        partition = Partition.uniform(bounds.lower - delta, bounds.upper + delta, n)
    else:
        partition = Partition.uniform(interval[0], interval[1], n)
    if not partition.covers(bounds):
        raise DomainError(f"partition [{partition.points[0]}, {partition.points[-1]}] does not cover the spectrum")

    if resolution is not None:
        projections = [resolution.projection_at(lam) for lam in partition.points]
    else:
        projections = parallel_map(
            lambda lam: spectral_projection(g, lam, cfg, method, reports), partition.points, cfg.workers
        )

    total = np.zeros((g.n, g.n), dtype=np.complex128)
    approximation = np.zeros_like(total)
    cells, values = [], []
    for i in range(1, len(projections)):
        u = projections[i].data - projections[i - 1].data
        if np.linalg.norm(u @ u - u) > cfg.tau_proj:
            raise InvariantViolation(f"cell {i} is not a projection")
        cell = Projection(u)
        if _rank(cell) and not commutes(cell, g, cfg):
            raise InvariantViolation(f"cell {i} does not commute with the element")
        value = partition.points[i - 1] if gamma == "left" else 0.5 * (partition.points[i - 1] + partition.points[i])
        total += u
        approximation += value * u
        cells.append(cell)
        values.append(value)
    if np.linalg.norm(total - np.eye(g.n), 2) > 1e-9:
        raise InvariantViolation("cells do not sum to the identity")

    result = HermitianMatrix(approximation)
    error = _bounds_norm(g - result, cfg)
    if error > partition.mesh + order_slack(g, cfg):
        raise InvariantViolation(f"achieved error {error:.3e} exceeds mesh {partition.mesh:.3e}")
    return StepApproximation(result, partition, error, tuple(cells), tuple(values))


def dyadic_approximants(
    g: HermitianMatrix,
    levels: int,
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
    resolution: Optional[SpectralResolution] = None,
) -> List[StepApproximation]:
    """
    Left-endpoint approximants on 1, 2, 4, … cells of one fixed interval.

    Nested partitions make the approximants ascend; errors never increase.
    """
    cfg = config or DEFAULT_TOLERANCES
    if levels < 1:
        raise DomainError("levels must be at least 1")
    bounds = spectral_bounds(g, cfg)
    delta = partition_margin(g, bounds, 1, cfg)
    interval = (bounds.lower - delta, bounds.upper + delta)
    approximants = [
        step_approximation(g, 2 ** k, cfg, method, interval=interval, resolution=resolution) for k in range(levels)
    ]
    slack = order_slack(g, cfg)
    for k, (coarse, fine) in enumerate(zip(approximants, approximants[1:])):
        if not loewner_leq(coarse.approximation, fine.approximation, cfg):
            raise InvariantViolation(f"dyadic approximants descend at level {k + 1}")
        if fine.achieved_error > coarse.achieved_error + slack:
            raise InvariantViolation(f"dyadic error grows at level {k + 1}")
    return approximants


def resolution_of_negation(
    g: HermitianMatrix,
    lam: float,
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
) -> Projection:
    """q_λ of −g, checked against (1 − p_{g,−λ}) + d_{g,−λ}."""
    cfg = config or DEFAULT_TOLERANCES
    q = spectral_projection(-g, lam, cfg, method)
    expected = spectral_projection(g, -lam, cfg, method).complement() + eigenprojection(g, -lam, cfg, method)
    residual = q.distance(expected)
    if residual > 10.0 * cfg.tau_proj:
        raise InvariantViolation(f"resolution of −g differs from (1 − p_−λ) + d_−λ by {residual:.3e}")
    return q


def _neighbour_gap(g: HermitianMatrix, alpha: float, cfg: ToleranceConfig, method: Method, below: bool) -> float:
    """
    Distance from α to the nearest breakpoint on one side of it, or to just past the
    spectral bound when that side has none.
    """
    resolution = full_resolution(g, NEIGHBOUR_GRID, cfg, method)
    bounds = resolution.bounds
    tol = cfg.cluster_tol * (1.0 + g.norm)
    margin = partition_margin(g, bounds, 1, cfg)
    if below:
        gaps = [alpha - b for b in resolution.eigenvalues if b < alpha - tol]
        edge = alpha - (bounds.lower - margin)
    else:
        gaps = [b - alpha for b in resolution.eigenvalues if b > alpha + tol]
        edge = bounds.upper + margin - alpha
    return min(gaps) if gaps else max(edge, margin)


def jump_supremum_check(
    g: HermitianMatrix,
    alpha: float,
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
    points: Optional[Sequence[float]] = None,
) -> bool:
    """
    p_α − d_α equals the join of p_μ over points μ < α.

    Default points are α − gap·2^−j for j = 0..check_depth, where gap reaches the next
    breakpoint below α, so no eigenvalue lies between the points and α.
    """
    cfg = config or DEFAULT_TOLERANCES
    if points is None:
        gap = _neighbour_gap(g, alpha, cfg, method, below=True)
        points = [alpha - gap * 2.0 ** -j for j in range(cfg.check_depth + 1)]
    if any(mu >= alpha for mu in points):
        raise DomainError("jump points must lie below alpha")
    jump = snap_to_projection(
        spectral_projection(g, alpha, cfg, method) - eigenprojection(g, alpha, cfg, method), cfg
    )
    supremum = join_all([spectral_projection(g, mu, cfg, method) for mu in sorted(points)], cfg, method)
    return supremum.distance(jump) <= 10.0 * cfg.tau_proj


def right_continuity_check(
    g: HermitianMatrix,
    alpha: float,
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
    points: Optional[Sequence[float]] = None,
) -> bool:
    """p_α equals the meet of p_μ over points μ ↓ α; default points reach no further than the next breakpoint above α."""
    cfg = config or DEFAULT_TOLERANCES
    if points is None:
        gap = _neighbour_gap(g, alpha, cfg, method, below=False)
        points = [alpha + gap * 2.0 ** -j for j in range(cfg.check_depth + 1)]
    if any(mu <= alpha for mu in points):
        raise DomainError("continuity points must lie above alpha")
    infimum = meet_all([spectral_projection(g, mu, cfg, method) for mu in sorted(points, reverse=True)], cfg, method)
    return infimum.distance(spectral_projection(g, alpha, cfg, method)) <= 10.0 * cfg.tau_proj


def sandwich_check(
    g: HermitianMatrix, lam: float, mu: float, q: Projection, config: Optional[ToleranceConfig] = None
) -> bool:
    """λq ≤ qgq ≤ μq for a projection q under p_μ − p_λ."""
    cfg = config or DEFAULT_TOLERANCES
    if lam > mu:
        raise DomainError("sandwich needs λ ≤ μ")
    qgq = compress(q, g)
    return loewner_leq(lam * q, qgq, cfg) and loewner_leq(qgq, mu * q, cfg)
