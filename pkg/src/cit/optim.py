"""Penalized exponentiated-gradient descent on products of conditional simplices.

Shared engine for the auxiliary-variable minimizations: minimize
objective(kernels) + lambda * residual(kernels) for an increasing penalty
schedule, with multiplicative simplex updates, backtracking so the penalized
value never increases across accepted iterations at a fixed lambda, and
deterministic multi-restart reduction (feasible first, then lowest value,
then lowest start index). Restarts are independent, so running them on a
thread pool cannot change the result.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import NoFeasiblePoint

KERNEL_FLOOR = 1e-30
SMOOTHING = 1e-3


@dataclass(frozen=True)
class PenaltyConfig:
    """Knobs for the penalty method; defaults favour reproducibility."""

    restarts: int = 32
    penalty_schedule: tuple[float, ...] = (1.0, 10.0, 100.0, 1000.0)
    max_iter: int = 5000
    seed: int = 0
    step_size: float = 1.0
    feasibility_threshold: float = 1e-4
    threads: int = 1
    rel_tol: float = 1e-12
    patience: int = 25


@dataclass(frozen=True)
class Candidate:
    objective: float
    residual: float
    kernels: tuple[np.ndarray, ...]
    label: str
    order: int
    iterations: int = 0

    @property
    def sort_key(self):
        return (self.objective, self.order)


@dataclass
class PenaltyOutcome:
    best: Candidate
    candidates: list[Candidate]
    iterations: int
    # per optimized start, one value trace per penalty stage
    descent_traces: list[list[np.ndarray]] = field(default_factory=list)


def _normalize_slices(k: np.ndarray) -> np.ndarray:
    k = np.clip(k, KERNEL_FLOOR, None)
    return k / k.sum(axis=-1, keepdims=True)


def _eg_step(k: np.ndarray, g: np.ndarray, step: float) -> np.ndarray:
    """Multiplicative simplex step computed in log space to avoid overflow."""
    z = np.log(np.clip(k, KERNEL_FLOOR, None)) - step * g
    z -= z.max(axis=-1, keepdims=True)
    return _normalize_slices(np.exp(z))


def smooth(kernel: np.ndarray, eps: float = SMOOTHING) -> np.ndarray:
    """Mix a kernel with the uniform one so multiplicative updates can move."""
    w = kernel.shape[-1]
    return _normalize_slices((1.0 - eps) * kernel + eps / w)


def _eg_stage(
    kernels: list[np.ndarray],
    lam: float,
    value_and_grad: Callable,
    cfg: PenaltyConfig,
    trace: list[float] | None,
) -> tuple[list[np.ndarray], int]:
    """Run one penalty stage; returns updated kernels and iteration count."""
    val, grads = value_and_grad(kernels, lam)
    if trace is not None:
        trace.append(val)
    step = cfg.step_size
    stall = 0
    it = 0
    while it < cfg.max_iter:
        it += 1
        proposal = [_eg_step(k, g, step) for k, g in zip(kernels, grads)]
        new_val, new_grads = value_and_grad(proposal, lam)
        if new_val <= val:
            improvement = val - new_val
            kernels, val, grads = proposal, new_val, new_grads
            if trace is not None:
                trace.append(val)
            step = min(step * 1.25, 64.0)
            stall = stall + 1 if improvement <= cfg.rel_tol * (1.0 + abs(val)) else 0
            if stall >= cfg.patience:
                break
        else:
            step *= 0.5
            if step < 1e-9:
                break
    return kernels, it


def _run_start(
    index: int,
    label: str,
    start: list[np.ndarray],
    value_and_grad: Callable,
    evaluate: Callable,
    cfg: PenaltyConfig,
    keep_trace: bool,
) -> tuple[Candidate, list[np.ndarray] | None]:
    kernels = [_normalize_slices(k) for k in start]
    stage_traces: list[np.ndarray] | None = [] if keep_trace else None
    total = 0
    for lam in cfg.penalty_schedule:
        trace: list[float] | None = [] if keep_trace else None
        kernels, used = _eg_stage(kernels, lam, value_and_grad, cfg, trace)
        total += used
        if keep_trace:
            # one trace per stage; monotonicity holds within a stage only
            stage_traces.append(np.array(trace))
    objective, residual = evaluate(kernels)
    cand = Candidate(objective, residual, tuple(kernels), label, index, total)
    return cand, stage_traces


def penalized_minimize(
    seeded_starts: Sequence[tuple[str, list[np.ndarray]]],
    exact_candidates: Sequence[tuple[str, list[np.ndarray]]],
    value_and_grad: Callable,
    evaluate: Callable,
    cfg: PenaltyConfig,
    keep_traces: bool = False,
) -> PenaltyOutcome:
    """Optimize from every start, add exact candidates, reduce deterministically.

    `value_and_grad(kernels, lam) -> (penalized value, gradients)`;
    `evaluate(kernels) -> (objective, residual)` in bits.
    Exact candidates are scored as given, without smoothing or optimization.
    """
    candidates: list[Candidate] = []
    order = 0
    for label, kernels in exact_candidates:
        objective, residual = evaluate(list(kernels))
        candidates.append(Candidate(objective, residual,
                                     tuple(np.asarray(k, dtype=float) for k in kernels),
                                     label, order))
        order += 1

    jobs = []
    for label, kernels in seeded_starts:
        jobs.append((order, label, kernels))
        order += 1

    traces: list[list[np.ndarray]] = []
    results: list = [None] * len(jobs)

    def work(j):
        idx, label, kernels = j
        return _run_start(idx, label, kernels, value_and_grad, evaluate, cfg, keep_traces)

    if cfg.threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            for pos, res in enumerate(pool.map(work, jobs)):
                results[pos] = res
    else:
        for pos, j in enumerate(jobs):
            results[pos] = work(j)

    iterations = 0
    for cand, trace in results:
        candidates.append(cand)
        iterations += cand.iterations
        if trace is not None:
            traces.append(trace)

    feasible = [c for c in candidates if c.residual <= cfg.feasibility_threshold]
    if not feasible:
        raise NoFeasiblePoint(
            f"no candidate reached residual <= {cfg.feasibility_threshold}"
        )
    best = min(feasible, key=lambda c: c.sort_key)
    return PenaltyOutcome(best, candidates, iterations, traces)


def dirichlet_starts(
    rng_seed: int, count: int, shapes: Sequence[tuple[int, ...]]
) -> list[tuple[str, list[np.ndarray]]]:
    """Seeded Dirichlet(1) random kernel initializations, one rng per restart."""
    starts = []
    streams = np.random.SeedSequence(rng_seed).spawn(count)
    for i, ss in enumerate(streams):
        rng = np.random.default_rng(ss)
        kernels = []
        for shape in shapes:
            flat = rng.dirichlet(np.ones(shape[-1]), size=int(np.prod(shape[:-1], dtype=int)))
            kernels.append(flat.reshape(shape))
        starts.append((f"random-{i}", kernels))
    return starts
