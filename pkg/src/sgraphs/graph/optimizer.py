"""Levenberg-Marquardt over the stacked, Huber-weighted factor residuals."""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import MatrixRankWarning, spsolve

from ..config import OptimizerConfig
from ..errors import SingularSystem
from .factors import PoseAnchorFactor
from .graph import FactorGraph
from .variables import VariableId, VarKind

logger = logging.getLogger(__name__)


@dataclass
class OptReport:
    iterations: int
    initial_cost: float
    final_cost: float
    converged: bool
    damping: float


def huber_cost(norm: float, delta: float) -> float:
    if norm <= delta:
        return 0.5 * norm * norm
    return delta * (norm - 0.5 * delta)


def _ordering(graph: FactorGraph) -> tuple[dict[VariableId, int], int]:
    """Offsets of the variables touched by at least one factor; others stay fixed."""
    active = {key for f in graph.factors.values() for key in f.keys}
    offsets: dict[VariableId, int] = {}
    size = 0
    for vid, var in graph.variables.items():
        if vid in active:
            offsets[vid] = size
            size += var.DIM
    return offsets, size


def total_cost(graph: FactorGraph, huber_delta: float) -> float:
    cost = 0.0
    for f in graph.factors.values():
        values = [graph.variables[k] for k in f.keys]
        norm = float(np.linalg.norm(f.whitener @ f.residual(values)))
        cost += huber_cost(norm, huber_delta)
    return cost


def linearize(
    graph: FactorGraph,
    offsets: dict[VariableId, int],
    size: int,
    huber_delta: float,
) -> tuple[sp.csr_matrix, np.ndarray, float]:
    """Whitened, robustly reweighted Jacobian and residual in factor insertion order."""
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    residuals: list[np.ndarray] = []
    cost = 0.0
    row = 0
    for f in graph.factors.values():
        values = [graph.variables[k] for k in f.keys]
        W = f.whitener
        r = W @ f.residual(values)
        norm = float(np.linalg.norm(r))
        cost += huber_cost(norm, huber_delta)
        scale = 1.0 if norm <= huber_delta else float(np.sqrt(huber_delta / norm))
        residuals.append(scale * r)
        m = len(r)
        for key, J in zip(f.keys, f.jacobians(values)):
            block = scale * (W @ J)
            r_idx, c_idx = np.indices(block.shape)
            rows.append((r_idx + row).ravel())
            cols.append((c_idx + offsets[key]).ravel())
            vals.append(block.ravel())
        row += m
    if not residuals:
        return sp.csr_matrix((0, size)), np.zeros(0), 0.0
    J = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(row, size)
    )
    return J, np.concatenate(residuals), cost


def linear_system(graph: FactorGraph, huber_delta: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Dense Gauss-Newton normal equations (H, g) at the current estimate."""
    offsets, size = _ordering(graph)
    J, r, _ = linearize(graph, offsets, size, huber_delta)
    return (J.T @ J).toarray(), J.T @ r


def _check_anchored(graph: FactorGraph, offsets: dict[VariableId, int]) -> None:
    has_keyframes = any(vid.kind == VarKind.KEYFRAME for vid in offsets)
    anchored = any(isinstance(f, PoseAnchorFactor) for f in graph.factors.values())
    if has_keyframes and not anchored:
        raise SingularSystem("graph has keyframes but no anchor factor")


def optimize(graph: FactorGraph, config: OptimizerConfig | None = None) -> OptReport:
    cfg = config or OptimizerConfig()
    with graph.lock:
        offsets, size = _ordering(graph)
        _check_anchored(graph, offsets)
        initial = total_cost(graph, cfg.huber_delta)
        report = OptReport(0, initial, initial, True, cfg.initial_damping)
        if size == 0 or initial == 0.0:
            return report

        lam = cfg.initial_damping
        cost = initial
        converged = False
        iterations = 0
        for iterations in range(1, cfg.max_iterations + 1):
            J, r, cost = linearize(graph, offsets, size, cfg.huber_delta)
            H = (J.T @ J).tocsc()
            g = J.T @ r
            diag = H.diagonal()
            if np.any(diag <= 0.0):
                raise SingularSystem("normal equations have empty rows: unconstrained variable")

            backup = {vid: graph.variables[vid].get_state() for vid in offsets}
            step_taken = False
            while lam < 1e12:
                A = H + sp.diags(lam * diag, format="csc")
                with warnings.catch_warnings():
                    warnings.simplefilter("error", MatrixRankWarning)
                    try:
                        delta = spsolve(A, -g)
                    except MatrixRankWarning as exc:
                        raise SingularSystem("normal equations are rank deficient") from exc
                if not np.all(np.isfinite(delta)):
                    raise SingularSystem("non-finite LM step")
                for vid, off in offsets.items():
                    var = graph.variables[vid]
                    var.retract(delta[off : off + var.DIM])
                new_cost = total_cost(graph, cfg.huber_delta)
                if new_cost < cost:
                    step_taken = True
                    break
                for vid, state in backup.items():
                    graph.variables[vid].set_state(state)
                lam *= 10.0

            if not step_taken:
                # no descent direction left at any damping: we are at a minimum
                converged = True
                break

            logger.debug("LM iter %d cost %.6e -> %.6e (lambda %.1e)", iterations, cost, new_cost, lam)
            decrease = (cost - new_cost) / cost if cost > 0.0 else 0.0
            cost = new_cost
            lam = max(lam / 10.0, 1e-12)
            if decrease < cfg.relative_tolerance or cost == 0.0:
                converged = True
                break

        report.iterations = iterations
        report.final_cost = cost
        report.converged = converged
        report.damping = lam
        if not converged:
            logger.info("optimizer stopped after %d iterations without converging", iterations)
        return report
