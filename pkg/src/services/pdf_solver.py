"""
Poisson Deconvolution Factorization
Fits W ~ U A U^T + U H^T + H U^T under the generalized KL loss: MM multiplicative
updates for (U, A), a decorrelation step on U, and a scaled-form ADMM block for H
"""
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import numpy as np
from scipy.special import xlogy

from .errors import ConfigError, DataError, NumericalError
from .graph_builder import CooccurrenceGraph
from .logger import get_logger


DAMPING_EXPONENTS = (1.0, 0.5, 0.25, 0.125)
DECORRELATION_RETRIES = 5
MIN_LINE_SEARCH_STEP = 1e-20


@dataclass
class SolverConfig:
    K: int = 10
    lambda_h: Optional[float] = None
    gamma: float = 0.1
    rho: float = 1.0
    eps: float = 1e-10
    max_outer: int = 300
    max_admm: int = 30
    max_inner: int = 50
    inner_tol: float = 1e-6
    admm_tol: float = 1e-6
    tol: float = 1e-6
    decorrelation_step: float = 1e-3
    seed: int = 0
    restarts: int = 1
    freeze_h: bool = False
    cold_admm: bool = False

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise ConfigError(f"K must be an integer >= 1, got {self.K}")
        if self.lambda_h is not None and not self.lambda_h >= 0:
            raise ConfigError(f"lambda_h must be >= 0, got {self.lambda_h}")
        if not self.gamma >= 0:
            raise ConfigError(f"gamma must be >= 0, got {self.gamma}")
        for name in ('rho', 'eps', 'tol', 'decorrelation_step', 'inner_tol', 'admm_tol'):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ('max_outer', 'max_admm', 'max_inner', 'restarts'):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")

    def resolve_lambda_h(self, graph: CooccurrenceGraph) -> float:
        """Explicit lambda_h, or 0.1 times the mean stored edge weight"""
        if self.lambda_h is not None:
            return float(self.lambda_h)
        return 0.1 * float(graph.weights.mean()) if graph.nnz else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class FactorModel:
    U: np.ndarray
    A: np.ndarray
    H: np.ndarray
    h_collapsed: bool = False

    @property
    def V(self) -> int:
        return int(self.U.shape[0])

    @property
    def K(self) -> int:
        return int(self.U.shape[1])

    def copy(self) -> 'FactorModel':
        return FactorModel(self.U.copy(), self.A.copy(), self.H.copy(), self.h_collapsed)

    def theta_dense(self) -> np.ndarray:
        """Full intensity matrix with the diagonal masked to zero"""
        theta_full = (self.U * self.A) @ self.U.T + self.U @ self.H.T + self.H @ self.U.T
        np.fill_diagonal(theta_full, 0.0)
        return theta_full

    def to_dict(self) -> Dict[str, Any]:
        return {
            'V': self.V,
            'K': self.K,
            'U': self.U.tolist(),
            'A': self.A.tolist(),
            'H': self.H.tolist(),
            'h_collapsed': self.h_collapsed,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'FactorModel':
        try:
            U = np.asarray(data['U'], dtype=np.float64)
            A = np.asarray(data['A'], dtype=np.float64)
            H = np.asarray(data['H'], dtype=np.float64)
        except KeyError as e:
            raise DataError(f"Model file is missing field {e}")
        V, K = int(data.get('V', U.shape[0])), int(data.get('K', U.shape[1]))
        if U.shape != (V, K) or H.shape != (V, K) or A.shape != (K,):
            raise DataError(f"Model arrays do not match V={V}, K={K}")
        return cls(U=U, A=A, H=H, h_collapsed=bool(data.get('h_collapsed', False)))


class ObjectiveTerms(NamedTuple):
    total: float
    kl: float
    l1_h: float
    rdec: float


@dataclass
class FitTrace:
    records: List[Dict[str, float]] = field(default_factory=list)
    converged: bool = False
    seed: int = 0

    def append(self, iteration: int, terms: ObjectiveTerms, admm_residual: float):
        self.records.append({
            'iteration': iteration,
            'objective': terms.total,
            'kl': terms.kl,
            'l1_h': terms.l1_h,
            'rdec': terms.rdec,
            'admm_residual': admm_residual,
        })

    @property
    def objectives(self) -> List[float]:
        return [r['objective'] for r in self.records]

    @property
    def final_objective(self) -> float:
        return self.records[-1]['objective']

    @property
    def iterations(self) -> int:
        """Outer iterations run (record 0 is the initial state)"""
        return len(self.records) - 1

    def is_monotone(self, slack: float = 1e-9) -> bool:
        values = self.objectives
        return all(b <= a + slack * abs(a) for a, b in zip(values, values[1:]))

    def __len__(self) -> int:
        return len(self.records)


class AdmmState(NamedTuple):
    H: np.ndarray
    Z: np.ndarray
    Gamma: np.ndarray
    primal_residual: float
    iterations: int


class AdmmResult(NamedTuple):
    H: np.ndarray
    Z: np.ndarray
    Gamma: np.ndarray
    primal_residual: float
    collapsed: bool


def _check_dims(graph: CooccurrenceGraph, U: np.ndarray, A: np.ndarray, H: np.ndarray):
    if U.ndim != 2 or U.shape[0] != graph.V:
        raise DataError(f"U has shape {U.shape}, expected ({graph.V}, K)")
    if H.shape != U.shape:
        raise DataError(f"H has shape {H.shape}, expected {U.shape}")
    if A.shape != (U.shape[1],):
        raise DataError(f"A has shape {A.shape}, expected ({U.shape[1]},)")


def theta(U: np.ndarray, A: np.ndarray, H: np.ndarray, i: int, j: int) -> float:
    """Theta_ij = sum_k (a_k u_ik u_jk + u_ik h_jk + h_ik u_jk) for i != j"""
    if i == j:
        raise DataError("theta is defined on off-diagonal entries only (i != j)")
    return float(np.sum(A * U[i] * U[j] + U[i] * H[j] + H[i] * U[j]))


def edge_components(graph: CooccurrenceGraph, U: np.ndarray, A: np.ndarray,
                    H: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-edge, per-topic terms (S, L, R) of Theta over the stored edges"""
    U_rows, U_cols = U[graph.rows], U[graph.cols]
    return A * U_rows * U_cols, U_rows * H[graph.cols], H[graph.rows] * U_cols


def edge_theta(graph: CooccurrenceGraph, U: np.ndarray, A: np.ndarray, H: np.ndarray) -> np.ndarray:
    S, L, R = edge_components(graph, U, A, H)
    return (S + L + R).sum(axis=1)


def linear_theta_sum(U: np.ndarray, A: np.ndarray, H: np.ndarray) -> float:
    """
    Sum of Theta_ij over the full upper triangle from column sums

    sum_{i<j} u_ik u_jk = (sigma_k^2 - q_k) / 2 and
    sum_{i<j} (u_ik h_jk + h_ik u_jk) = sigma_k tau_k - sum_i u_ik h_ik
    """
    sigma = U.sum(axis=0)
    q = np.square(U).sum(axis=0)
    tau = H.sum(axis=0)
    overlap = (U * H).sum(axis=0)
    return float(np.sum(A * (sigma ** 2 - q) / 2.0) + np.sum(sigma * tau - overlap))


def kl_term(graph: CooccurrenceGraph, U: np.ndarray, A: np.ndarray, H: np.ndarray, eps: float) -> float:
    linear = linear_theta_sum(U, A, H)
    if graph.nnz == 0:
        return linear
    return linear - float(np.dot(graph.weights, np.log(edge_theta(graph, U, A, H) + eps)))


def decorrelation_penalty(U: np.ndarray) -> float:
    """R_dec(U) = ||U^T U - diag(U^T U)||_F^2"""
    gram = U.T @ U
    np.fill_diagonal(gram, 0.0)
    return float(np.sum(gram ** 2))


def objective_terms(graph: CooccurrenceGraph, model: FactorModel, cfg: SolverConfig) -> ObjectiveTerms:
    _check_dims(graph, model.U, model.A, model.H)
    kl = kl_term(graph, model.U, model.A, model.H, cfg.eps)
    l1_h = float(np.abs(model.H).sum())
    rdec = decorrelation_penalty(model.U)
    total = kl + cfg.resolve_lambda_h(graph) * l1_h + 0.5 * cfg.gamma * rdec
    return ObjectiveTerms(total=total, kl=kl, l1_h=l1_h, rdec=rdec)


def objective(graph: CooccurrenceGraph, model: FactorModel, cfg: SolverConfig) -> float:
    """KL loss on the upper triangle plus lambda_h ||H||_1 + gamma/2 R_dec(U)"""
    return objective_terms(graph, model, cfg).total


def responsibilities(graph: CooccurrenceGraph, U: np.ndarray, A: np.ndarray, H: np.ndarray,
                     eps: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Posterior shares of each edge's weight among the three model terms

    Returns:
        Tuple (P_S, P_L, P_R) of nnz x K arrays; each row sums to Theta / (Theta + eps)
    """
    S, L, R = edge_components(graph, U, A, H)
    denom = (S.sum(axis=1) + L.sum(axis=1) + R.sum(axis=1) + eps)[:, None]
    return S / denom, L / denom, R / denom


def surrogate(graph: CooccurrenceGraph, U: np.ndarray, A: np.ndarray, H: np.ndarray,
              P: Tuple[np.ndarray, np.ndarray, np.ndarray], eps: float) -> float:
    """
    Jensen majorizer of the KL term at responsibilities P, evaluated at (U, A, H)

    eps is treated as one more mixture component with share 1 - sum(P), so the
    bound is tight at the point the responsibilities were computed from.
    """
    components = edge_components(graph, U, A, H)
    jensen = np.zeros(graph.nnz)
    for share, value in zip(P, components):
        jensen += (xlogy(share, value) - xlogy(share, share)).sum(axis=1)
    eps_share = np.clip(1.0 - sum(p.sum(axis=1) for p in P), 0.0, 1.0)
    jensen += xlogy(eps_share, eps) - xlogy(eps_share, eps_share)
    return linear_theta_sum(U, A, H) - float(np.dot(graph.weights, jensen))


def update_A(graph: CooccurrenceGraph, U: np.ndarray, A: np.ndarray, P_S: np.ndarray, eps: float) -> np.ndarray:
    """
    MM step for the importances

    Equivalent to a_k <- a_k * sum W u_i u_j / (Theta + eps) / (sum_{i<j} u_ik u_jk + eps).
    """
    sigma = U.sum(axis=0)
    pair_sum = np.maximum((sigma ** 2 - np.square(U).sum(axis=0)) / 2.0, 0.0)
    updated = (graph.weights @ P_S) / (pair_sum + eps)
    return np.where(A > 0, updated, 0.0)


def multiplicative_ratio(graph: CooccurrenceGraph, U: np.ndarray, A: np.ndarray, H: np.ndarray,
                         P_S: np.ndarray, P_L: np.ndarray, P_R: np.ndarray, eps: float) -> np.ndarray:
    """
    Rescale factor new/old for every entry of U

    Each unordered pair is attributed once and feeds both endpoints: the row node
    collects P_S + P_L, the column node P_S + P_R. Zero entries keep ratio 1.
    """
    w = graph.weights[:, None]
    numer = np.asarray(graph.row_scatter @ (w * (P_S + P_L)) + graph.col_scatter @ (w * (P_S + P_R)))
    denom = A * np.maximum(U.sum(axis=0) - U, 0.0) + np.maximum(H.sum(axis=0) - H, 0.0) + eps
    updated = numer / denom
    ratio = np.ones_like(U)
    np.divide(updated, U, out=ratio, where=U > 0)
    return ratio


def renormalize(U: np.ndarray, A: np.ndarray,
                rng: Optional[np.random.Generator] = None) -> Tuple[np.ndarray, np.ndarray, List[int]]:
    """
    Column L1 renormalization with compensation a_k <- s_k^2 a_k (U A U^T unchanged)

    A column whose L1 norm is zero is reinitialized from a uniform vector plus jitter.

    Returns:
        Tuple of (U, A, indices of reinitialized columns)
    """
    U = U.copy()
    A = A.copy()
    scales = U.sum(axis=0)
    dead = [k for k in range(U.shape[1]) if not scales[k] > 0]
    live = scales > 0
    U[:, live] /= scales[live]
    A[live] *= scales[live] ** 2

    if dead:
        rng = rng or np.random.default_rng(0)
        V = U.shape[0]
        for k in dead:
            column = np.full(V, 1.0 / V) + rng.uniform(0.0, 1e-3 / V, size=V)
            U[:, k] = column / column.sum()
        get_logger().warning("Zero-norm topic column reinitialized", columns=','.join(map(str, dead)))
    return U, A, dead


def decorrelation_step(U: np.ndarray, gamma: float, eta: float) -> np.ndarray:
    """Projected gradient step U <- max(0, U - eta gamma U (U^T U - diag(U^T U)))"""
    if gamma == 0:
        return U.copy()
    gram = U.T @ U
    np.fill_diagonal(gram, 0.0)
    return np.maximum(0.0, U - eta * gamma * (U @ gram))


def update_U(graph: CooccurrenceGraph, U: np.ndarray, A: np.ndarray, H: np.ndarray,
             P_S: np.ndarray, P_L: np.ndarray, P_R: np.ndarray, cfg: SolverConfig,
             rng: Optional[np.random.Generator] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    One undamped U block: multiplicative update, renormalization, decorrelation step,
    renormalization. A is returned too because renormalization compensates into it.
    """
    U_new = U * multiplicative_ratio(graph, U, A, H, P_S, P_L, P_R, cfg.eps)
    U_new, A_new, _ = renormalize(U_new, A, rng)
    if cfg.gamma > 0:
        U_new, A_new, _ = renormalize(decorrelation_step(U_new, cfg.gamma, cfg.decorrelation_step), A_new, rng)
    return U_new, A_new


def soft_threshold(x, tau: float):
    """S_tau(x) = sign(x) max(|x| - tau, 0), elementwise"""
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def kl_gradient_h(graph: CooccurrenceGraph, U: np.ndarray, A: np.ndarray, H: np.ndarray, eps: float) -> np.ndarray:
    """Gradient of the KL term with respect to H"""
    grad = U.sum(axis=0)[None, :] - U
    if graph.nnz:
        r = (graph.weights / (edge_theta(graph, U, A, H) + eps))[:, None]
        grad = grad - np.asarray(graph.row_scatter @ (r * U[graph.cols]) + graph.col_scatter @ (r * U[graph.rows]))
    return grad


def _h_step(graph: CooccurrenceGraph, U: np.ndarray, A: np.ndarray, H: np.ndarray, target: np.ndarray,
            cfg: SolverConfig) -> np.ndarray:
    """min_{H >= 0} KL(H) + rho/2 ||H - target||_F^2 by projected gradient with backtracking"""
    rho, eps = cfg.rho, cfg.eps

    def value(candidate: np.ndarray) -> float:
        return kl_term(graph, U, A, candidate, eps) + 0.5 * rho * float(np.sum((candidate - target) ** 2))

    step = 1.0 / rho
    current = value(H)
    for _ in range(cfg.max_inner):
        grad = kl_gradient_h(graph, U, A, H, eps) + rho * (H - target)
        while True:
            candidate = np.maximum(0.0, H - step * grad)
            diff = candidate - H
            candidate_value = value(candidate)
            bound = current + float(np.sum(grad * diff)) + float(np.sum(diff ** 2)) / (2.0 * step)
            if candidate_value <= bound:
                break
            step *= 0.5
            if step < MIN_LINE_SEARCH_STEP:
                return H
        H, current = candidate, candidate_value
        if np.linalg.norm(diff) / step <= cfg.inner_tol:
            break
        step *= 2.0
    return H


def admm_h_block(graph: CooccurrenceGraph, U: np.ndarray, A: np.ndarray, H: np.ndarray, Z: np.ndarray,
                 Gamma: np.ndarray, cfg: SolverConfig, lambda_h: float) -> AdmmState:
    """
    Scaled-form ADMM for min_{H >= 0} KL(H) + lambda_h ||H||_1 with U, A fixed

    Args:
        graph: Co-occurrence graph
        U, A: Fixed dictionary and importances
        H, Z, Gamma: Warm-start iterate, consensus copy and scaled dual
        cfg: Solver configuration (rho, max_admm, admm_tol, inner solver limits)
        lambda_h: L1 weight

    Returns:
        AdmmState with the final iterates and primal residual ||H - Z||_F
    """
    residual = float(np.linalg.norm(H - Z))
    iterations = 0
    for iterations in range(1, cfg.max_admm + 1):
        H = _h_step(graph, U, A, H, Z - Gamma, cfg)
        Z_previous = Z
        Z = soft_threshold(H + Gamma, lambda_h / cfg.rho)
        Gamma = Gamma + H - Z

        residual = float(np.linalg.norm(H - Z))
        dual_residual = cfg.rho * float(np.linalg.norm(Z - Z_previous))
        if not (np.all(np.isfinite(H)) and np.all(np.isfinite(Gamma))):
            raise NumericalError("Non-finite values in the ADMM block", {
                'admm_iteration': iterations,
                'primal_residual': residual,
                'dual_residual': dual_residual,
                'h_finite': bool(np.all(np.isfinite(H))),
                'gamma_finite': bool(np.all(np.isfinite(Gamma))),
            })
        if residual <= cfg.admm_tol and dual_residual <= cfg.admm_tol:
            break
    return AdmmState(H=H, Z=Z, Gamma=Gamma, primal_residual=residual, iterations=iterations)


def project_h(H: np.ndarray) -> Tuple[np.ndarray, bool]:
    """Nonnegative part scaled to unit Frobenius norm; an all-zero H stays zero and is flagged"""
    H = np.maximum(H, 0.0)
    norm = float(np.linalg.norm(H))
    if norm == 0.0:
        return H, True
    return H / norm, False


def update_H_admm(graph: CooccurrenceGraph, U: np.ndarray, A: np.ndarray, H: np.ndarray, Z: np.ndarray,
                  Gamma: np.ndarray, cfg: SolverConfig) -> AdmmResult:
    """
    ADMM block followed by the unit-norm projection

    The sparse consensus copy Z carries the solution out of the loop.

    Returns:
        AdmmResult(H, Z, Gamma, primal_residual, collapsed)
    """
    state = admm_h_block(graph, U, A, H, Z, Gamma, cfg, cfg.resolve_lambda_h(graph))
    projected, collapsed = project_h(state.Z)
    if collapsed:
        get_logger().warning("Residual H collapsed to zero", primal_residual=state.primal_residual)
    return AdmmResult(H=projected, Z=state.Z, Gamma=state.Gamma,
                      primal_residual=state.primal_residual, collapsed=collapsed)


def initialize_model(V: int, K: int, rng: np.random.Generator) -> FactorModel:
    U = rng.uniform(0.1, 1.0, size=(V, K))
    U /= U.sum(axis=0)
    H, _ = project_h(rng.uniform(0.1, 1.0, size=(V, K)))
    return FactorModel(U=U, A=np.ones(K), H=H)


def _validate_fit_inputs(graph: CooccurrenceGraph, cfg: SolverConfig):
    if cfg.K > graph.V:
        raise ConfigError(f"K={cfg.K} exceeds the vocabulary size V={graph.V}")
    if graph.nnz == 0:
        raise DataError("Co-occurrence graph has no edges (all-zero W)")


def _check_finite(model: FactorModel, terms: ObjectiveTerms, iteration: int, stage: str):
    finite = {
        'U': bool(np.all(np.isfinite(model.U))),
        'A': bool(np.all(np.isfinite(model.A))),
        'H': bool(np.all(np.isfinite(model.H))),
        'objective': math.isfinite(terms.total),
    }
    if not all(finite.values()):
        raise NumericalError(f"Non-finite state after {stage}", {
            'iteration': iteration,
            **{f"{k}_finite": v for k, v in finite.items()},
            'kl': terms.kl,
            'a_max': float(np.nanmax(model.A)) if model.A.size else 0.0,
        })


def _fit_once(graph: CooccurrenceGraph, cfg: SolverConfig, seed: int) -> Tuple[FactorModel, FitTrace]:
    logger = get_logger()
    rng = np.random.default_rng(seed)
    model = initialize_model(graph.V, cfg.K, rng)
    admm = AdmmState(H=model.H.copy(), Z=model.H.copy(), Gamma=np.zeros_like(model.H),
                     primal_residual=0.0, iterations=0)
    eta = cfg.decorrelation_step
    eps = cfg.eps

    def evaluate(candidate: FactorModel) -> ObjectiveTerms:
        return objective_terms(graph, candidate, cfg)

    terms = evaluate(model)
    _check_finite(model, terms, 0, 'initialization')
    trace = FitTrace(seed=seed)
    trace.append(0, terms, 0.0)

    for iteration in range(1, cfg.max_outer + 1):
        previous = terms.total

        # (U, A) block
        P_S, _, _ = responsibilities(graph, model.U, model.A, model.H, eps)
        candidate = FactorModel(model.U, update_A(graph, model.U, model.A, P_S, eps), model.H, model.h_collapsed)
        candidate_terms = evaluate(candidate)
        if candidate_terms.total <= terms.total:
            model, terms = candidate, candidate_terms

        P_S, P_L, P_R = responsibilities(graph, model.U, model.A, model.H, eps)
        ratio = multiplicative_ratio(graph, model.U, model.A, model.H, P_S, P_L, P_R, eps)
        for beta in DAMPING_EXPONENTS:
            U_new, A_new, _ = renormalize(model.U * ratio ** beta, model.A, rng)
            candidate = FactorModel(U_new, A_new, model.H, model.h_collapsed)
            candidate_terms = evaluate(candidate)
            if candidate_terms.total <= terms.total:
                model, terms = candidate, candidate_terms
                break

        if cfg.gamma > 0:
            for _ in range(DECORRELATION_RETRIES):
                U_new, A_new, _ = renormalize(decorrelation_step(model.U, cfg.gamma, eta), model.A, rng)
                candidate = FactorModel(U_new, A_new, model.H, model.h_collapsed)
                candidate_terms = evaluate(candidate)
                if candidate_terms.total <= terms.total:
                    model, terms = candidate, candidate_terms
                    break
                eta *= 0.5
        _check_finite(model, terms, iteration, 'U/A block')

        # H block
        if not cfg.freeze_h:
            if cfg.cold_admm:
                admm = AdmmState(H=model.H.copy(), Z=model.H.copy(), Gamma=np.zeros_like(model.H),
                                 primal_residual=0.0, iterations=0)
            admm = admm_h_block(graph, model.U, model.A, admm.H, admm.Z, admm.Gamma, cfg,
                                cfg.resolve_lambda_h(graph))
            H_new, collapsed = project_h(admm.Z)
            candidate = FactorModel(model.U, model.A, H_new, collapsed)
            candidate_terms = evaluate(candidate)
            if candidate_terms.total <= terms.total:
                if collapsed and not model.h_collapsed:
                    logger.warning("Residual H collapsed to zero", iteration=iteration,
                                   primal_residual=admm.primal_residual)
                model, terms = candidate, candidate_terms
            _check_finite(model, terms, iteration, 'H block')

        trace.append(iteration, terms, admm.primal_residual)
        if iteration % 25 == 0:
            logger.debug("Fit progress", seed=seed, iteration=iteration, objective=f"{terms.total:.6f}")

        change = abs(previous - terms.total) / max(abs(previous), 1e-12)
        if change < cfg.tol:
            trace.converged = True
            break

    return model, trace


def fit(graph: CooccurrenceGraph, cfg: SolverConfig) -> Tuple[FactorModel, FitTrace]:
    """
    Fit the factorization, keeping the best of cfg.restarts seeded runs

    Args:
        graph: Co-occurrence graph with at least one edge
        cfg: Solver configuration; restart r uses seed cfg.seed + r

    Returns:
        Tuple of (FactorModel, FitTrace) of the restart with the lowest final objective
    """
    _validate_fit_inputs(graph, cfg)
    logger = get_logger()

    best: Optional[Tuple[FactorModel, FitTrace]] = None
    for restart in range(cfg.restarts):
        model, trace = _fit_once(graph, cfg, cfg.seed + restart)
        logger.info("Restart finished", K=cfg.K, restart=restart, seed=trace.seed,
                    iterations=trace.iterations, converged=trace.converged,
                    objective=f"{trace.final_objective:.6f}")
        if best is None or trace.final_objective < best[1].final_objective:
            best = (model, trace)
    return best


class PDFSolver:
    def __init__(self, config: SolverConfig = None):
        """
        Initialize solver

        Args:
            config: Solver configuration (K, regularization weights, ADMM and stopping settings)
        """
        self.config = config or SolverConfig()
        self.logger = get_logger()

    def fit(self, graph: CooccurrenceGraph) -> Tuple[FactorModel, FitTrace]:
        cfg = self.config
        self.logger.log_step('fit', 'started', K=cfg.K, V=graph.V, nnz=graph.nnz,
                             lambda_h=f"{cfg.resolve_lambda_h(graph):.6g}", gamma=cfg.gamma,
                             freeze_h=cfg.freeze_h)
        model, trace = fit(graph, cfg)
        if model.h_collapsed:
            self.logger.warning("Fitted model has H = 0", K=cfg.K)
        self.logger.log_step('fit', 'completed', K=cfg.K, iterations=trace.iterations,
                             objective=f"{trace.final_objective:.6f}")
        return model, trace

    def objective(self, graph: CooccurrenceGraph, model: FactorModel) -> float:
        return objective(graph, model, self.config)
