"""
Constructive functional calculus: square roots by the effect iteration, carriers by
repeated squaring, positive/negative parts, signum, polar decomposition and inverses.

Every operation takes a Method: ITERATIVE runs the constructive procedure, ORACLE
evaluates the same function through the Jacobi eigendecomposition.
"""
import logging
from dataclasses import asdict, dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

import oracle
from errors import (
    InvariantViolation,
    MaxIterExceeded,
    NotAnEffect,
    NotCommuting,
    NotInvertible,
    NotPositive,
    NotProjection,
)
from hermitian_core import (
    DEFAULT_TOLERANCES,
    Effect,
    HermitianMatrix,
    Projection,
    ToleranceConfig,
    commutes,
    effect_scale,
    loewner_leq,
    lower_bound,
    order_slack,
)

logger = logging.getLogger(__name__)

EPS = float(np.finfo(float).eps)
# multiples of n·eps under which a scaled eigenvalue is indistinguishable from rounding
ROUNDING_NOISE = 100.0


class Method(str, Enum):
    ITERATIVE = "iterative"
    ORACLE = "oracle"


@dataclass(frozen=True)
class IterationReport:
    operation: str
    iterations: int
    residual: float
    converged: bool
    method: Method

    def to_dict(self) -> dict:
        data = asdict(self)
        data["method"] = self.method.value
        return data


@dataclass(frozen=True)
class PolarParts:
    abs: HermitianMatrix
    pos: HermitianMatrix
    neg: HermitianMatrix
    signum: HermitianMatrix
    carrier: Projection


Reports = Optional[List[IterationReport]]


def _record(reports: Reports, report: IterationReport) -> None:
    logger.debug(
        f"{report.operation} [{report.method.value}]: {report.iterations} iterations, "
        f"residual {report.residual:.3e}, converged={report.converged}"
    )
    if reports is not None:
        reports.append(report)


def _fro(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def _require(residual: float, tol: float, what: str) -> None:
    if residual > tol:
        raise InvariantViolation(f"{what}: residual {residual:.3e} exceeds {tol:.3e}")


def _positive(g: HermitianMatrix, cfg: ToleranceConfig) -> None:
    if not loewner_leq(HermitianMatrix.zeros(g.n), g, cfg):
        raise NotPositive(f"smallest eigenvalue {g.eigen.eigenvalues[0]:.3e} is negative")


def _settled(increment: float, previous: Optional[float], n: int, cfg: ToleranceConfig) -> bool:
    """
    Cauchy stop that also bounds the distance to the limit.

    For a linearly converging sequence with rate ρ = Δ_k/Δ_{k−1} the remaining distance
    is Δ_k·ρ/(1−ρ), which a slow eigenvalue makes much larger than Δ_k itself.
    Increments at rounding level always settle.
    """
    if increment > cfg.tau_conv:
        return False
    if increment <= ROUNDING_NOISE * n * EPS:
        return True
    if previous is None or increment >= previous:
        return False
    rate = increment / previous
    return increment * rate / (1.0 - rate) <= cfg.tau_conv


def sqrt_effect_iteration(
    e: HermitianMatrix, config: Optional[ToleranceConfig] = None
) -> Tuple[HermitianMatrix, IterationReport]:
    """
    d₁ = ½(1−e), d_{k+1} = ½((1−e) + d_k²), stopped once both the increment and the
    estimated distance to the limit are under tau_conv.

    Returns 1 − lim d_k. A stalled run is returned with converged=False rather than
    raised; callers decide whether the residual is acceptable.
    """
    cfg = config or DEFAULT_TOLERANCES
    if not isinstance(e, Effect):
        e = Effect.from_matrix(e, cfg)
    one = np.eye(e.n)
    c = one - e.data
    d = 0.5 * c
    iterations = 1
    converged = False
    previous = None
    while iterations < cfg.max_iter:
        d_next = 0.5 * (c + d @ d)
        increment = _fro(d_next - d)
        d = d_next
        iterations += 1
        if _settled(increment, previous, e.n, cfg):
            converged = True
            break
        previous = increment
    root = HermitianMatrix(one - d)
    residual = _fro(root.data @ root.data - e.data)
    report = IterationReport("sqrt_effect_iteration", iterations, residual, converged, Method.ITERATIVE)
    if not converged:
        logger.warning(f"effect square root stalled after {iterations} iterations (residual {residual:.3e})")
    return root, report


def sqrt(
    g: HermitianMatrix,
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
    reports: Reports = None,
) -> Tuple[HermitianMatrix, IterationReport]:
    """
    Unique positive square root of g ⪰ 0.

    The iterative path scales g into E by its upper bound and deflates the kernel
    first: the iteration runs on g/U + (1 − g°), whose spectrum avoids 0. The carrier
    used here only drops eigenvalues at rounding level, so small positive eigenvalues
    keep their square roots.

    :raises NotPositive: g is not ⪰ 0
    :raises InvariantViolation: the deflated operand is not an effect
    :raises MaxIterExceeded: ‖r² − g‖ > tau_psd·(1+‖g‖); carries the best iterate
    """
    cfg = config or DEFAULT_TOLERANCES
    _positive(g, cfg)
    if method is Method.ORACLE:
        root = oracle.reference_sqrt(g, cfg)
        report = IterationReport("sqrt", 0, _fro(root.data @ root.data - g.data), True, Method.ORACLE)
    elif g.norm == 0.0:
        root = HermitianMatrix.zeros(g.n)
        report = IterationReport("sqrt", 0, 0.0, True, Method.ITERATIVE)
    else:
        support, _ = carrier(g, cfg, reports=reports, cutoff=0.0)
        kernel = np.eye(g.n) - support.data
        scale = effect_scale(g, cfg)
        try:
            deflated = Effect.from_matrix(HermitianMatrix(g.data / scale + kernel), cfg)
        except NotAnEffect as exc:
            raise InvariantViolation(f"kernel deflation left E: {exc}") from exc
        scaled_root, inner = sqrt_effect_iteration(deflated, cfg)
        root = HermitianMatrix(np.sqrt(scale) * (scaled_root.data - kernel))
        residual = _fro(root.data @ root.data - g.data)
        report = IterationReport("sqrt", inner.iterations, residual, inner.converged, Method.ITERATIVE)
    _record(reports, report)
    tol = cfg.tau_psd * (1.0 + g.norm)
    if report.residual > tol:
        raise MaxIterExceeded(
            f"square root residual {report.residual:.3e} exceeds {tol:.3e}", best=root, report=report
        )
    return root, report


def absolute(
    g: HermitianMatrix,
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
    reports: Reports = None,
) -> HermitianMatrix:
    """|g| = (g²)^½"""
    if method is Method.ORACLE:
        return oracle.reference_abs(g)
    root, _ = sqrt(g.square(), config, method, reports)
    return root


def parts(
    g: HermitianMatrix,
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
    reports: Reports = None,
) -> Tuple[HermitianMatrix, HermitianMatrix, HermitianMatrix]:
    """(|g|, g⁺, g⁻) from a single square root."""
    a = absolute(g, config, method, reports)
    return a, HermitianMatrix(0.5 * (a.data + g.data)), HermitianMatrix(0.5 * (a.data - g.data))


def pos_part(
    g: HermitianMatrix,
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
    reports: Reports = None,
) -> HermitianMatrix:
    return parts(g, config, method, reports)[1]


def neg_part(
    g: HermitianMatrix,
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
    reports: Reports = None,
) -> HermitianMatrix:
    return parts(g, config, method, reports)[2]


def snap_to_projection(candidate: HermitianMatrix, config: Optional[ToleranceConfig] = None) -> Projection:
    """
    Threshold the spectrum at ½ and reassemble in the candidate's own eigenbasis.

    :raises NotProjection: some eigenvalue is farther than 10·tau_proj from {0, 1}
    """
    cfg = config or DEFAULT_TOLERANCES
    dec = candidate.eigen
    bits = (dec.eigenvalues > 0.5).astype(float)
    deviation = float(np.max(np.abs(dec.eigenvalues - bits)))
    if deviation > 10.0 * cfg.tau_proj:
        raise NotProjection(f"eigenvalue deviates {deviation:.3e} from {{0, 1}}")
    v = dec.eigenvectors
    return Projection((v * bits) @ v.conj().T)


def carrier(
    g: HermitianMatrix,
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
    reports: Reports = None,
    cutoff: Optional[float] = None,
) -> Tuple[Projection, IterationReport]:
    """
    g° = lim 1 − (1−e)^{2^k}, snapped onto P.

    e is g/U_g when g ⪰ 0 and g²/U_{g²} otherwise, scaled once more so that an
    eigenvalue of g at the cutoff sits at ½ after the last squaring. The squarings
    run in the complement form p ← 2p − p², which keeps small eigenvalues exact, and
    their number is fixed by the cutoff. The iterate is then purified by
    p ← 3p² − 2p³ until the increment drops under tau_conv.

    :param cutoff: eigenvalues of g with |λ| up to the cutoff count as kernel; defaults
        to tau_psd·(1+‖g‖). 0 drops only eigenvalues at rounding level.
    :raises MaxIterExceeded: the purified iterate cannot be snapped
    """
    cfg = config or DEFAULT_TOLERANCES
    if cutoff is None:
        cutoff = cfg.tau_psd * (1.0 + g.norm)
    if method is Method.ORACLE:
        result = oracle.reference_support(g, cfg, tol=cutoff)
        report = IterationReport("carrier", 0, _fro(g.data @ result.data - g.data), True, Method.ORACLE)
        _record(reports, report)
        return result, report
    if g.norm == 0.0:
        report = IterationReport("carrier", 0, 0.0, True, Method.ITERATIVE)
        _record(reports, report)
        return Projection(np.zeros((g.n, g.n))), report

    noise = ROUNDING_NOISE * g.n * EPS
    # negative eigenvalues must stay under a quarter of the cutoff to survive the squarings
    definite = g.eigen.eigenvalues[0] >= -0.25 * max(cutoff, noise * g.norm)
    base, level = (g, cutoff) if definite else (g.square(), cutoff ** 2)
    scale = effect_scale(base, cfg)
    threshold = max(level / scale, noise)
    doublings = max(0, int(np.ceil(np.log2(np.log(2.0) / threshold))))
    shrink = min(1.0, np.log(2.0) / (threshold * 2.0 ** doublings))
    p = base.data * (shrink / scale)

    steps = min(doublings, cfg.max_iter)
    for _ in range(steps):
        p = 2.0 * p - p @ p
    iterations = steps
    settled = False
    while iterations < cfg.max_iter:
        p2 = p @ p
        p_next = 3.0 * p2 - 2.0 * p2 @ p
        increment = _fro(p_next - p)
        p = p_next
        iterations += 1
        if not np.isfinite(increment) or increment <= cfg.tau_conv:
            settled = bool(np.isfinite(increment))
            break

    candidate = HermitianMatrix(p)
    try:
        if not np.all(np.isfinite(p)):
            raise NotProjection("purification diverged")
        result = snap_to_projection(candidate, cfg)
    except NotProjection as exc:
        report = IterationReport("carrier", iterations, _fro(g.data @ p - g.data), False, Method.ITERATIVE)
        _record(reports, report)
        raise MaxIterExceeded(f"carrier did not settle: {exc}", best=candidate, report=report) from exc

    residual = _fro(g.data @ result.data - g.data)
    # ‖g·g° − g‖ collects the eigenvalues dropped as kernel, which lie under the threshold
    dropped = threshold * scale if definite else np.sqrt(threshold * scale)
    converged = bool(steps == doublings and settled and residual <= 2.0 * np.sqrt(g.n) * dropped)
    report = IterationReport("carrier", iterations, residual, converged, Method.ITERATIVE)
    if not converged:
        logger.warning(f"carrier after {iterations} steps is uncertain (residual {residual:.3e}); snapped anyway")
    _record(reports, report)
    return result, report


def polar_decompose(
    g: HermitianMatrix,
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
    reports: Reports = None,
) -> PolarParts:
    """
    (|g|, g⁺, g⁻, s, g°) with s = (g⁺)° − (g⁻)°; checks g = s|g| and s² = g°.
    """
    cfg = config or DEFAULT_TOLERANCES
    a, pos, neg = parts(g, cfg, method, reports)
    # the parts inherit the kernel tolerance of g
    cutoff = cfg.tau_psd * (1.0 + g.norm)
    pos_carrier, _ = carrier(pos, cfg, method, reports, cutoff=cutoff)
    neg_carrier, _ = carrier(neg, cfg, method, reports, cutoff=cutoff)
    g_carrier, _ = carrier(g, cfg, method, reports, cutoff=cutoff)
    s = HermitianMatrix(pos_carrier.data - neg_carrier.data)

    product_tol = cfg.tau_psd * (1.0 + g.norm) ** 2
    _require(float(np.linalg.norm(pos.data @ neg.data, 2)), product_tol, "g⁺g⁻ = 0")
    _require(float(np.linalg.norm(s.data @ a.data - g.data, 2)), product_tol, "g = s|g|")
    _require(float(np.linalg.norm(s.data @ s.data - g_carrier.data, 2)), 10.0 * cfg.tau_proj, "s² = g°")
    return PolarParts(a, pos, neg, s, g_carrier)


def signum(
    g: HermitianMatrix,
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
    reports: Reports = None,
) -> HermitianMatrix:
    return polar_decompose(g, config, method, reports).signum


def inverse_positive(
    g: HermitianMatrix,
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
    reports: Reports = None,
) -> HermitianMatrix:
    """
    Newton–Schulz from X₀ = (1/U)·1: X ← X(2 − gX).

    :raises NotPositive: g is not ⪰ 0
    :raises NotInvertible: L_g within the order slack of 0
    :raises MaxIterExceeded: ‖gX − 1‖ never dropped under tolerance
    """
    cfg = config or DEFAULT_TOLERANCES
    _positive(g, cfg)
    low = lower_bound(g, cfg)
    if low <= order_slack(g, cfg):
        raise NotInvertible(f"lower spectral bound {low:.3e} is within tolerance of 0")
    one = np.eye(g.n)
    if method is Method.ORACLE:
        result = oracle.reference_inverse(g, cfg)
        _record(reports, IterationReport("inverse_positive", 0, _fro(g.data @ result.data - one), True, Method.ORACLE))
        return result

    g_fro = _fro(g.data)
    x = one / effect_scale(g, cfg)
    iterations = 0
    converged = False
    residual = float("inf")
    while iterations < cfg.max_iter:
        gx = g.data @ x
        residual = _fro(gx - one)
        if not np.isfinite(residual):
            break
        if residual <= cfg.tau_conv * (1.0 + g_fro * _fro(x)):
            converged = True
            break
        x = x @ (2.0 * one - gx)
        iterations += 1
    result = HermitianMatrix(x)
    report = IterationReport("inverse_positive", iterations, residual, converged, Method.ITERATIVE)
    _record(reports, report)
    if not converged:
        raise MaxIterExceeded(f"Newton–Schulz residual {residual:.3e} after {iterations} steps", best=result, report=report)
    return result


def invert(
    g: HermitianMatrix,
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
    reports: Reports = None,
) -> HermitianMatrix:
    """
    g⁻¹ = s·|g|⁻¹ when λ·1 ≤ |g| for some λ > 0.

    :raises NotInvertible: L_{|g|} within the order slack of 0, or s² ≠ 1
    """
    cfg = config or DEFAULT_TOLERANCES
    polar = polar_decompose(g, cfg, method, reports)
    if lower_bound(polar.abs, cfg) <= order_slack(polar.abs, cfg):
        raise NotInvertible("|g| has no positive lower bound")
    one = np.eye(g.n)
    if np.linalg.norm(polar.signum.data @ polar.signum.data - one, 2) > 10.0 * cfg.tau_proj:
        raise NotInvertible("signum is not an involution")
    result = HermitianMatrix(polar.signum.data @ inverse_positive(polar.abs, cfg, method, reports).data)
    _require(
        float(np.linalg.norm(g.data @ result.data - one, 2)),
        cfg.tau_psd * (1.0 + g.norm * result.norm),
        "g·g⁻¹ = 1",
    )
    return result


def comparability_projection(
    g: HermitianMatrix,
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
    reports: Reports = None,
) -> Projection:
    """p = (g⁺)° with (1−p)g ≤ 0 ≤ pg, pg = g⁺ and −(1−p)g = g⁻."""
    cfg = config or DEFAULT_TOLERANCES
    _, pos, neg = parts(g, cfg, method, reports)
    p, _ = carrier(pos, cfg, method, reports, cutoff=cfg.tau_psd * (1.0 + g.norm))
    q = p.complement()
    pg = HermitianMatrix(p.data @ g.data)
    qg = HermitianMatrix(q.data @ g.data)
    zero = HermitianMatrix.zeros(g.n)
    if not (loewner_leq(qg, zero, cfg) and loewner_leq(zero, pg, cfg)):
        raise InvariantViolation("(1−p)g ≤ 0 ≤ pg does not hold")
    if not commutes(p, g, cfg):
        raise InvariantViolation("comparability projection does not commute with g")
    tol = cfg.tau_proj * (1.0 + g.norm)
    _require(pg.distance(pos), tol, "pg = g⁺")
    _require((-qg).distance(neg), tol, "−(1−p)g = g⁻")
    return p


def square_root_monotone_check(
    g: HermitianMatrix,
    h: HermitianMatrix,
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
) -> bool:
    """For commuting 0 ≤ g ≤ h: g² ≤ h² and √g ≤ √h."""
    cfg = config or DEFAULT_TOLERANCES
    if not commutes(g, h, cfg):
        raise NotCommuting("monotonicity of squares needs a commuting pair")
    zero = HermitianMatrix.zeros(g.n)
    if not (loewner_leq(zero, g, cfg) and loewner_leq(g, h, cfg)):
        raise NotPositive("expected 0 ≤ g ≤ h")
    root_g, _ = sqrt(g, cfg, method)
    root_h, _ = sqrt(h, cfg, method)
    return loewner_leq(g.square(), h.square(), cfg) and loewner_leq(root_g, root_h, cfg)


def parts_characterization_check(
    g: HermitianMatrix,
    a: HermitianMatrix,
    b: HermitianMatrix,
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
) -> bool:
    """A split g = a − b with ab = 0 and a, b ⪰ 0 must be (g⁺, g⁻)."""
    cfg = config or DEFAULT_TOLERANCES
    zero = HermitianMatrix.zeros(g.n)
    tol = cfg.tau_proj * (1.0 + g.norm)
    hypotheses = (
        (a - b).distance(g) <= tol
        and np.linalg.norm(a.data @ b.data, 2) <= tol
        and loewner_leq(zero, a, cfg)
        and loewner_leq(zero, b, cfg)
    )
    if not hypotheses:
        return True
    _, pos, neg = parts(g, cfg, method)
    return a.distance(pos) <= tol and b.distance(neg) <= tol
