"""Certificates for existence, uniqueness and convergence of Nash equilibria.

Every check returns a :class:`Verdict`. Certified verdicts name the
:class:`Route` that produced them; refutations carry a witness that can be
re-checked independently. Margins that sit within the eigenvalue tolerance of
zero give ``inconclusive`` instead of a sign call.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Any, Optional, Sequence

import numpy as np
from scipy.stats import qmc

from .games import KappaBounds, LinearQuadraticGame, MultiActivityGame, NetworkGame, RacesGame, SAMPLER_SEED
from .network import EIG_RTOL, SpectralMeasures, spectral_measures

__all__ = [
    "Route",
    "Conclusion",
    "Verdict",
    "Guarantee",
    "AlphaMargins",
    "CertificateReport",
    "alpha_margins",
    "is_p_matrix",
    "build_upsilon",
    "check_p_upsilon",
    "check_strong_monotonicity",
    "check_uniform_p_affine",
    "check_scalar_substitutes",
    "check_potential",
    "block_contraction_weights",
    "block_p_constant",
    "certify",
]

P_ENUM_MAX_DIM = 16
MONOTONE_SAMPLES = 2048
GRID_REFINEMENTS = 200


class Route(str, Enum):
    """Sufficient conditions that a certificate may rest on."""

    SPECTRAL_NORM_MARGIN = "spectral-norm-margin"
    INFINITY_NORM_MARGIN = "infinity-norm-margin"
    MIN_EIGENVALUE_COMMON_CROSS = "min-eigenvalue-common-cross-effect"
    SCALAR_SUBSTITUTES_UNIFORM = "scalar-substitutes-uniform"
    SCALAR_SUBSTITUTES_POINTWISE = "scalar-substitutes-pointwise"
    UPSILON_P_MATRIX = "upsilon-p-matrix"
    AFFINE_SYMMETRIC_PART = "affine-symmetric-part"
    AFFINE_DIAGONAL_SCALING = "affine-diagonal-scaling"
    EXACT_POTENTIAL = "exact-potential"
    RESCALED_POTENTIAL = "rescaled-potential"
    SAMPLED_SYMMETRIC_PART = "sampled-symmetric-part"
    PRINCIPAL_MINORS = "principal-minors"
    POSITIVE_DEFINITE_PART = "positive-definite-part"
    M_MATRIX = "m-matrix"


class Conclusion(str, Enum):
    EXISTENCE_UNIQUENESS = "existence and uniqueness of the Nash equilibrium"
    CONTINUOUS_BR = "continuous best-response dynamics converge"
    DISCRETE_BR = "discrete best-response dynamics converge (simultaneous and sequential)"
    SEQUENTIAL_BR = "sequential discrete best-response dynamics converge"
    LIPSCHITZ = "equilibrium is Lipschitz in parameters"
    UNIQUENESS_IF_EXISTS = "at most one Nash equilibrium"


@dataclass
class Verdict:
    status: str  # certified | refuted | inconclusive | not_applicable
    route: Optional[Route] = None
    constant: Optional[float] = None
    witness: Any = None
    detail: str = ""
    data: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.status == "certified"

    @property
    def refuted(self) -> bool:
        return self.status == "refuted"


@dataclass(frozen=True)
class Guarantee:
    conclusion: Conclusion
    route: Route
    detail: str = ""


@dataclass(frozen=True)
class AlphaMargins:
    alpha_2: float
    alpha_inf: float
    alpha_min: Optional[float]
    uncertainty: float

    def sign(self, name: str) -> Optional[int]:
        """+1, -1, or ``None`` when the margin is absent or within tolerance."""
        v = getattr(self, name)
        if v is None or abs(v) <= self.uncertainty:
            return None
        return 1 if v > 0 else -1


@dataclass
class CertificateReport:
    spectral: SpectralMeasures
    kappa: KappaBounds
    margins: AlphaMargins
    strong_monotone: Verdict
    p_upsilon: Verdict
    uniform_p: Verdict
    potential: Verdict
    guarantees: list
    warnings: list

    def has(self, conclusion: Conclusion) -> bool:
        return any(g.conclusion == conclusion for g in self.guarantees)

    def routes(self, conclusion: Conclusion):
        return [g.route for g in self.guarantees if g.conclusion == conclusion]


def _margin_tol(*scales) -> float:
    return EIG_RTOL * max([1.0] + [abs(s) for s in scales if s is not None])


def alpha_margins(kb: KappaBounds, sm: SpectralMeasures) -> AlphaMargins:
    k1, k2 = kb.kappa1, kb.kappa2
    amin = None if sm.min_eigenvalue is None else k1 - k2 * abs(sm.min_eigenvalue)
    return AlphaMargins(
        alpha_2=k1 - k2 * sm.spectral_norm,
        alpha_inf=k1 - k2 * sm.infinity_norm,
        alpha_min=amin,
        uncertainty=_margin_tol(k1, k2 * sm.spectral_norm, k2 * sm.infinity_norm),
    )


# ---------------------------------------------------------------------------
# P-matrices
# ---------------------------------------------------------------------------

def _minor_tol(sub: np.ndarray) -> np.ndarray:
    # Hadamard's bound scales the determinant tolerance for each submatrix
    return EIG_RTOL * np.prod(np.maximum(np.linalg.norm(sub, axis=-1), 1e-300), axis=-1)


def _scan_minors(A, subsets):
    undecided = None
    for k, idx in subsets:
        sub = A[idx[:, :, None], idx[:, None, :]]
        det = np.linalg.det(sub)
        tol = _minor_tol(sub)
        bad = np.flatnonzero(det < -tol)
        if bad.size:
            j = bad[np.argmin(det[bad])]
            return "refuted", tuple(int(v) for v in idx[j]), float(det[j])
        flat = np.flatnonzero(det <= tol)
        if flat.size and undecided is None:
            j = flat[0]
            undecided = (tuple(int(v) for v in idx[j]), float(det[j]))
    if undecided is not None:
        return "inconclusive", undecided[0], undecided[1]
    return "certified", None, None


def is_p_matrix(A, max_enum_dim: int = P_ENUM_MAX_DIM, samples: int = 5000) -> Verdict:
    """Decide whether every principal minor of ``A`` is positive.

    Parameters
    ----------
    A : (d, d) array_like
    max_enum_dim : int
        Up to this size all ``2^d - 1`` principal minors are enumerated.
    samples : int
        Random principal subsets inspected above the enumeration cap.

    Returns
    -------
    Verdict
        ``witness`` holds the zero-based index set of a non-positive minor
        and ``data["det"]`` its value.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("P-matrix test needs a square matrix")
    d = A.shape[0]
    if d <= max_enum_dim:
        subsets = ((k, np.array(list(combinations(range(d), k)))) for k in range(1, d + 1))
        status, wit, det = _scan_minors(A, subsets)
        if status == "certified":
            return Verdict("certified", Route.PRINCIPAL_MINORS, detail=f"all {2 ** d - 1} principal minors positive")
        return Verdict(status, Route.PRINCIPAL_MINORS, witness=wit, data={"det": det},
                       detail=f"principal minor on {list(wit)} has determinant {det:.6g}")

    sym = 0.5 * (A + A.T)
    lam = np.linalg.eigvalsh(sym)[0]
    if lam > _margin_tol(np.abs(A).max()):
        return Verdict("certified", Route.POSITIVE_DEFINITE_PART, constant=float(lam),
                       detail="symmetric part positive definite")
    off = A - np.diag(np.diag(A))
    if np.all(off <= 0):
        lead = [np.linalg.det(A[:k, :k]) for k in range(1, d + 1)]
        if all(v > 0 for v in lead):
            return Verdict("certified", Route.M_MATRIX, detail="Z-matrix with positive leading minors")
    rng = np.random.default_rng(SAMPLER_SEED)
    small = [(1, np.arange(d).reshape(-1, 1)), (2, np.array(list(combinations(range(d), 2))))]
    rand = []
    for _ in range(samples):
        k = int(rng.integers(3, d + 1))
        rand.append((k, np.sort(rng.choice(d, size=k, replace=False)).reshape(1, -1)))
    status, wit, det = _scan_minors(A, small + rand)
    if status == "refuted":
        return Verdict("refuted", Route.PRINCIPAL_MINORS, witness=wit, data={"det": det},
                       detail=f"principal minor on {list(wit)} has determinant {det:.6g}")
    return Verdict("inconclusive", detail="no sufficient condition holds and sampled minors are positive")


# ---------------------------------------------------------------------------
# P_Upsilon
# ---------------------------------------------------------------------------

def build_upsilon(spec: NetworkGame, kb: Optional[KappaBounds] = None) -> np.ndarray:
    """Comparison matrix with ``kappa1_i`` on the diagonal and ``-kappa2_i G_ij`` off it."""
    kb = kb or spec.kappa_bounds()
    U = -kb.kappa2_per_agent[:, None] * spec.G
    np.fill_diagonal(U, kb.kappa1_per_agent)
    return U


def check_p_upsilon(spec: NetworkGame, kb: Optional[KappaBounds] = None,
                    sm: Optional[SpectralMeasures] = None) -> Verdict:
    kb = kb or spec.kappa_bounds()
    sm = sm or spectral_measures(spec.network)
    if np.any(kb.kappa1_per_agent <= 0):
        return Verdict("not_applicable", detail="own-curvature bound is not positive for every agent")
    U = build_upsilon(spec, kb)
    m = alpha_margins(kb, sm)
    shortcuts = [r for r, s in ((Route.SPECTRAL_NORM_MARGIN, m.sign("alpha_2")),
                                (Route.INFINITY_NORM_MARGIN, m.sign("alpha_inf"))) if s == 1]
    pm = is_p_matrix(U)
    data = {"upsilon": U, "shortcuts": shortcuts}
    if not kb.certifying:
        return Verdict("inconclusive", detail="curvature bounds were sampled", data=data)
    if pm.certified:
        route = shortcuts[0] if shortcuts else Route.UPSILON_P_MATRIX
        return Verdict("certified", route, constant=block_p_constant(U), data=data,
                       detail="comparison matrix is a P-matrix")
    return Verdict(pm.status, Route.UPSILON_P_MATRIX, witness=pm.witness, data=data, detail=pm.detail)


def block_contraction_weights(upsilon: np.ndarray):
    """Weights ``c > 0`` and factor ``delta_c < 1`` of the block contraction.

    The best response of agent ``i`` moves by at most
    ``sum_j T_ij ||x_j - y_j||`` with ``T = I - diag(upsilon)^{-1} upsilon``.
    Taking ``c = (I - T)^{-1} 1`` gives ``T c <= (1 - 1/max c) c``.
    """
    U = np.asarray(upsilon, dtype=float)
    T = np.eye(U.shape[0]) - U / np.diag(U)[:, None]
    c = np.linalg.solve(np.eye(U.shape[0]) - T, np.ones(U.shape[0]))
    if np.any(c <= 0):
        raise ValueError("comparison matrix is not a nonsingular M-matrix")
    return c, float(np.max((T @ c) / c))


def block_p_constant(upsilon: np.ndarray) -> Optional[float]:
    """Uniform block P-function constant implied by a P-matrix comparison matrix.

    With ``v = U^{-1} 1``, ``u = U^{-T} 1`` and ``S = diag(u / v)``, the matrix
    ``S U + U'S`` is positive definite, and the block pairing satisfies
    ``max_i <F_i(x) - F_i(y), x_i - y_i> >= eta ||x - y||^2`` with
    ``eta = lambda_min(S U + U'S) / (2 trace S)``.
    """
    U = np.asarray(upsilon, dtype=float)
    try:
        v = np.linalg.solve(U, np.ones(U.shape[0]))
        u = np.linalg.solve(U.T, np.ones(U.shape[0]))
    except np.linalg.LinAlgError:
        return None
    if np.any(v <= 0) or np.any(u <= 0):
        return None
    S = np.diag(u / v)
    lam = np.linalg.eigvalsh(S @ U + U.T @ S)[0]
    return float(lam / (2 * np.trace(S))) if lam > 0 else None


# ---------------------------------------------------------------------------
# strong monotonicity
# ---------------------------------------------------------------------------

def _common_cross_block(spec: NetworkGame) -> Optional[np.ndarray]:
    if not spec.is_affine:
        return None
    K = spec.jacobian(np.zeros(spec.dim)).K_blocks
    if all(np.array_equal(K[0], k) for k in K[1:]):
        return K[0]
    return None


def _sample_points(spec: NetworkGame, count: int, seed: int):
    lo, hi = spec.box_bounds()
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        return None
    pts = qmc.Sobol(d=spec.dim, scramble=True, seed=seed).random(count)
    pts = qmc.scale(pts, lo, hi) if np.all(hi > lo) else lo + pts * (hi - lo)
    return pts


def check_strong_monotonicity(spec: NetworkGame, sm: Optional[SpectralMeasures] = None,
                              kb: Optional[KappaBounds] = None, seed: int = SAMPLER_SEED) -> Verdict:
    """Certify or refute strong monotonicity of the game Jacobian.

    Network-margin routes are tried first. Affine games are then decided
    exactly from the symmetric part of the constant gradient; nonlinear games
    are probed at low-discrepancy points of the strategy box.
    """
    sm = sm or spectral_measures(spec.network)
    kb = kb or spec.kappa_bounds()
    m = alpha_margins(kb, sm)
    exact = None
    if spec.is_affine:
        A = spec.jacobian(np.zeros(spec.dim)).gradF
        w, V = np.linalg.eigh(0.5 * (A + A.T))
        exact = (float(w[0]), V[:, 0])

    if kb.certifying and m.sign("alpha_2") == 1:
        return Verdict("certified", Route.SPECTRAL_NORM_MARGIN, constant=m.alpha_2,
                       detail="kappa1 - kappa2 ||G||_2 > 0")
    if kb.certifying and sm.is_symmetric and m.sign("alpha_min") == 1:
        K = _common_cross_block(spec)
        if K is not None and np.linalg.eigvalsh(K + K.T)[0] >= -_margin_tol(np.abs(K).max()):
            return Verdict("certified", Route.MIN_EIGENVALUE_COMMON_CROSS, constant=m.alpha_min,
                           detail="symmetric network, common cross block with PSD symmetric part, "
                                  "kappa1 - kappa2 |lambda_min(G)| > 0")
    if exact is not None:
        lam, vec = exact
        tol = _margin_tol(np.abs(spec.jacobian(np.zeros(spec.dim)).gradF).max())
        if lam > tol:
            return Verdict("certified", Route.AFFINE_SYMMETRIC_PART, constant=lam,
                           detail="symmetric part of the constant gradient is positive definite")
        if lam < -tol:
            return Verdict("refuted", Route.AFFINE_SYMMETRIC_PART, witness={"point": np.zeros(spec.dim), "direction": vec},
                           constant=lam, detail=f"symmetric part has eigenvalue {lam:.6g}")
        return Verdict("inconclusive", Route.AFFINE_SYMMETRIC_PART, constant=lam,
                       detail="smallest eigenvalue of the symmetric part is within tolerance of zero")

    pts = _sample_points(spec, MONOTONE_SAMPLES, seed)
    if pts is None:
        return Verdict("inconclusive", detail="no sufficient condition applies and the strategy set is unbounded")
    worst = (np.inf, None, None)
    for x in pts:
        A = spec.jacobian(x).gradF
        w, V = np.linalg.eigh(0.5 * (A + A.T))
        if w[0] < worst[0]:
            worst = (float(w[0]), x, V[:, 0])
    lam, x, vec = worst
    if lam < -_margin_tol(lam):
        return Verdict("refuted", Route.SAMPLED_SYMMETRIC_PART, constant=lam,
                       witness={"point": x, "direction": vec},
                       detail=f"symmetric part of the gradient has eigenvalue {lam:.6g} at a sampled point")
    return Verdict("inconclusive", Route.SAMPLED_SYMMETRIC_PART, constant=lam,
                   detail="sampled symmetric parts are positive definite; sampling does not certify")


# ---------------------------------------------------------------------------
# uniform P for affine operators
# ---------------------------------------------------------------------------

def _scaled_margin(A, h):
    H = np.diag(h)
    return float(np.linalg.eigvalsh(H @ A + A.T @ H)[0] / np.max(h))


def check_uniform_p_affine(A, structure_hint: Optional[Sequence] = None,
                           refinements: int = GRID_REFINEMENTS) -> Verdict:
    """Search for a positive diagonal ``H`` with ``H A + A'H`` positive definite.

    Candidates are tried in order: the identity, each diagonal supplied in
    ``structure_hint`` (for instance the reciprocal cross-effect weights),
    the reciprocal diagonal of ``A``, and finally a coordinate-wise
    multiplicative search over a logarithmic grid. The search is incomplete:
    failure without a P-matrix refutation is reported as inconclusive.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("uniform P test needs a square matrix")
    d = A.shape[0]
    tol = _margin_tol(np.abs(A).max())
    candidates = [np.ones(d)]
    for hint in structure_hint or ():
        candidates.append(np.asarray(hint, dtype=float).reshape(d))
    diag = np.diag(A)
    if np.all(diag > 0):
        candidates.append(1.0 / diag)
    best_h, best_val = None, -np.inf
    for h in candidates:
        if np.any(h <= 0):
            continue
        val = _scaled_margin(A, h)
        if val > tol:
            return Verdict("certified", Route.AFFINE_DIAGONAL_SCALING, constant=0.5 * val * np.max(h),
                           witness=h, detail="diagonal scaling makes the symmetric part positive definite")
        if val > best_val:
            best_h, best_val = h.copy(), val

    pm = is_p_matrix(A)
    if pm.refuted:
        return Verdict("refuted", Route.PRINCIPAL_MINORS, witness=pm.witness, data=pm.data,
                       detail="not a P-matrix, so no diagonal scaling can work")

    factors = np.exp2(np.linspace(-3, 3, 13))
    h = best_h
    for r in range(refinements):
        k = r % d
        trials = []
        for f in factors:
            t = h.copy()
            t[k] *= f
            trials.append((_scaled_margin(A, t), f))
        val, f = max(trials)
        if val > best_val:
            h[k] *= f
            best_val = val
        if best_val > tol:
            return Verdict("certified", Route.AFFINE_DIAGONAL_SCALING, constant=0.5 * best_val * np.max(h),
                           witness=h, detail="diagonal scaling found by grid search")
        if k == d - 1:
            factors = np.sqrt(factors)
    return Verdict("inconclusive", detail="no diagonal scaling found within the search budget",
                   data={"best_margin": best_val})


# ---------------------------------------------------------------------------
# scalar substitutes and potentials
# ---------------------------------------------------------------------------

def _cross_effect_range(spec: NetworkGame):
    """Exact ``(min, max)`` of the scalar cross effects over ``X``, or ``None``."""
    if isinstance(spec, LinearQuadraticGame):
        k = spec.K[:, 0, 0]
        return k, k
    if isinstance(spec, RacesGame) and spec.gamma is not None:
        lo, hi = spec.aggregate_range()
        # K_i(x) = gamma (2 z_i - b_i) is increasing in z_i
        return spec.gamma * (2 * lo - spec.b), spec.gamma * (2 * hi - spec.b)
    return None


def check_scalar_substitutes(spec: NetworkGame, sm: Optional[SpectralMeasures] = None,
                             kb: Optional[KappaBounds] = None) -> Verdict:
    if spec.n != 1:
        return Verdict("not_applicable", detail="strategies are not scalar")
    sm = sm or spectral_measures(spec.network)
    if not sm.is_symmetric:
        return Verdict("not_applicable", detail="network is not symmetric")
    rng = _cross_effect_range(spec)
    if rng is None:
        return Verdict("inconclusive", detail="cross effects have no closed-form range")
    kmin, _ = rng
    nu = float(np.min(kmin))
    kb = kb or spec.kappa_bounds()
    m = alpha_margins(kb, sm)
    data = {"nu": nu, "alpha_min": m.alpha_min}
    if nu < -_margin_tol(nu):
        return Verdict("not_applicable", detail="some cross effect is negative (complements)", data=data)
    if nu <= _margin_tol(nu):
        return Verdict("inconclusive", detail="cross effects are not bounded away from zero", data=data)
    if m.sign("alpha_min") != 1:
        return Verdict("inconclusive", detail="kappa1 - kappa2 |lambda_min(G)| is not positive", data=data)
    return Verdict("certified", Route.SCALAR_SUBSTITUTES_UNIFORM, detail=f"cross effects >= {nu:.6g} > 0",
                   data=data)


def check_potential(spec: NetworkGame, tol: float = 1e-10) -> Verdict:
    """Detect an exact or rescaled potential for scalar linear-quadratic games.

    Rescaling agent ``i`` by ``beta_i`` symmetrises the interaction when
    ``K_i G_ij / beta_i = K_j G_ji / beta_j``; consistency is checked along a
    spanning forest and then on every remaining edge, i.e. around every cycle.
    """
    if not isinstance(spec, LinearQuadraticGame) or isinstance(spec, MultiActivityGame) or spec.n != 1:
        return Verdict("not_applicable", detail="potential check covers scalar linear-quadratic games")
    W = spec.K[:, 0, 0][:, None] * spec.G
    scale = max(1.0, np.abs(W).max())
    if np.all(np.abs(W - W.T) <= tol * scale):
        return Verdict("exact", Route.EXACT_POTENTIAL, witness=np.ones(spec.N),
                       detail="K_i G_ij = K_j G_ji for all pairs")
    N = spec.N
    nz = (np.abs(W) > tol * scale)
    for i, j in zip(*np.nonzero(nz != nz.T)):
        return Verdict("none", detail=f"interaction ({i},{j}) is one-sided")
    logb = np.full(N, np.nan)
    for root in range(N):
        if not np.isnan(logb[root]):
            continue
        logb[root] = 0.0
        stack = [root]
        while stack:
            i = stack.pop()
            for j in np.flatnonzero(nz[i]):
                ratio = W[j, i] / W[i, j]
                if ratio <= 0:
                    return Verdict("none", detail=f"interaction ({i},{j}) changes sign")
                target = logb[i] + np.log(ratio)
                if np.isnan(logb[j]):
                    logb[j] = target
                    stack.append(j)
                elif abs(logb[j] - target) > 1e-9:
                    return Verdict("none", detail=f"rescaling inconsistent around a cycle through ({i},{j})")
    beta = np.exp(logb)
    return Verdict("rescalable", Route.RESCALED_POTENTIAL, witness=beta / beta.max(),
                   detail="agent rescaling yields an exact potential")


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------

def _all_boxes(spec: NetworkGame) -> bool:
    return all(c.is_box for c in spec.constraints)


def certify(spec: NetworkGame, sym_tol: float = 1e-12, seed: int = SAMPLER_SEED) -> CertificateReport:
    """Run every applicable check and collect the implied guarantees.

    ``seed`` only affects sampled probes (curvature bounds of callback games
    and monotonicity sampling of nonlinear games).
    """
    sm = spectral_measures(spec.network, sym_tol)
    kb = spec.kappa_bounds(seed=seed)
    margins = alpha_margins(kb, sm)
    smono = check_strong_monotonicity(spec, sm, kb, seed)
    pu = check_p_upsilon(spec, kb, sm)

    uniform = Verdict("not_applicable", detail="no uniform P route applies")
    if spec.n == 1 and sm.is_symmetric:
        uniform = check_scalar_substitutes(spec, sm, kb)
    if not uniform.certified and spec.is_affine:
        hints = []
        if spec.n == 1 and np.all(spec.K[:, 0, 0] > 0):
            hints.append(1.0 / spec.K[:, 0, 0])
        uniform = check_uniform_p_affine(spec.gradient_matrix(), hints)
    potential = check_potential(spec)

    projection_form = spec.projection_metric() is not None
    out = []

    if smono.certified:
        out.append(Guarantee(Conclusion.EXISTENCE_UNIQUENESS, smono.route))
        out.append(Guarantee(Conclusion.LIPSCHITZ, smono.route, "strong monotonicity constant"))
        if projection_form:
            out.append(Guarantee(Conclusion.CONTINUOUS_BR, smono.route))
    if pu.certified:
        for c in (Conclusion.EXISTENCE_UNIQUENESS, Conclusion.CONTINUOUS_BR, Conclusion.DISCRETE_BR,
                  Conclusion.LIPSCHITZ):
            out.append(Guarantee(c, pu.route))
    if uniform.certified:
        if _all_boxes(spec):
            out.append(Guarantee(Conclusion.EXISTENCE_UNIQUENESS, uniform.route, "rectangular strategy set"))
            if spec.n == 1:
                out.append(Guarantee(Conclusion.LIPSCHITZ, uniform.route, "scalar strategies"))
        else:
            out.append(Guarantee(Conclusion.UNIQUENESS_IF_EXISTS, uniform.route,
                                 "uniqueness needs a rectangular set; reported as at most one"))
    if potential.status in ("exact", "rescalable") and smono.certified:
        out.append(Guarantee(Conclusion.SEQUENTIAL_BR, potential.route))

    warnings = []
    if not any(g.conclusion == Conclusion.EXISTENCE_UNIQUENESS for g in out) and spec.is_affine:
        A = spec.gradient_matrix()
        _, s, Vt = np.linalg.svd(A)
        if s[-1] <= _margin_tol(s[0]):
            v = Vt[-1]
            v = v if v.sum() >= 0 else -v
            warnings.append({"kind": "singular_operator", "direction": v,
                             "message": "the game Jacobian is singular; equilibria may form a continuum "
                                        "along the null direction"})
    if smono.refuted and not pu.certified and not uniform.certified:
        warnings.append({"kind": "no_uniqueness_certificate",
                         "message": "monotonicity fails and no P-type certificate was found"})
    return CertificateReport(sm, kb, margins, smono, pu, uniform, potential, out, warnings)
