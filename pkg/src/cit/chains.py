"""Interactive auxiliary chains and the r-round common-information program.

A chain U_1, ..., U_r alternates speakers: round j is generated from the
speaking side's symbol and the prior chain values only, which builds the
round-causality Markov constraints directly into the joint law
p(x, y) * prod_j K_j(u_j | speaker_j, u^{j-1}). The target quantity is the
minimum of I(X,Y; U^r) over chains that additionally render X and Y
conditionally independent given U^r; the per-round cardinality ceilings
|U_j| <= |speaker_j| * prod_{i<j} |U_i| + 1 are enforced throughout.

Three routes are provided and are meant to be cross-checked:
  * exact one-round values through minimal sufficient statistics,
  * exhaustive search over deterministic chains in canonical form,
  * a penalty method over randomized chains (same engine as `wyner`).
Only the one-round and binary-symmetric values are exact; everything else
is an upper bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import structure
from .errors import (
    BudgetExceeded,
    DeltaOutOfRange,
    LemmaViolation,
    NoFeasibleChain,
    SizeBudgetExceeded,
)
from .optim import PenaltyConfig, PenaltyOutcome, penalized_minimize, dirichlet_starts, smooth
from .pmf import (
    FiniteAlphabet,
    JointPMF,
    TensorPMF,
    binary_entropy,
    conditional_mutual_information,
    mutual_information,
)

DET_FEASIBILITY_TOL = 1e-9
CONT_FEASIBILITY_TOL = 1e-4
TENSOR_BUDGET = 2 ** 22


def speaker_of(round_index: int, initiator: str) -> str:
    """Side speaking in 1-based round `round_index`."""
    if initiator not in ("x", "y"):
        raise ValueError("initiator must be 'x' or 'y'")
    odd = round_index % 2 == 1
    return initiator if odd else ("y" if initiator == "x" else "x")


def _check_p3(sizes: Sequence[int], parents: Sequence[int]) -> None:
    prod = 1
    for j, (s, parent) in enumerate(zip(sizes, parents)):
        bound = parent * prod + 1
        if s > bound:
            raise ValueError(
                f"round {j + 1}: |U|={s} exceeds the cardinality ceiling {bound}"
            )
        prod *= s


@dataclass(frozen=True)
class AuxiliaryChain:
    """Randomized chain: per round a table P(U_j | speaker symbol, U^{j-1})."""

    initiator: str
    kernels: tuple[np.ndarray, ...]

    def __post_init__(self):
        kernels = tuple(np.asarray(k, dtype=float) for k in self.kernels)
        if not kernels:
            raise ValueError("a chain needs at least one round")
        sizes = []
        parents = []
        for j, k in enumerate(kernels):
            if k.ndim != 2 + j:
                raise ValueError(f"round {j + 1} kernel must have {2 + j} axes, got {k.ndim}")
            if tuple(k.shape[1:-1]) != tuple(sizes):
                raise ValueError(f"round {j + 1} kernel shape {k.shape} inconsistent with prior sizes {sizes}")
            if np.any(k < 0):
                raise ValueError(f"round {j + 1} kernel has negative entries")
            if np.max(np.abs(k.sum(axis=-1) - 1.0)) > 1e-9:
                raise ValueError(f"round {j + 1} kernel slices must sum to 1 within 1e-9")
            parents.append(k.shape[0])
            sizes.append(k.shape[-1])
        _check_p3(sizes, parents)
        frozen = []
        for k in kernels:
            k = k.copy()
            k.setflags(write=False)
            frozen.append(k)
        object.__setattr__(self, "kernels", tuple(frozen))

    @property
    def rounds(self) -> int:
        return len(self.kernels)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(k.shape[-1] for k in self.kernels)

    def to_json(self) -> dict:
        return {
            "kind": "randomized",
            "initiator": self.initiator,
            "sizes": list(self.sizes),
            "kernels": [k.tolist() for k in self.kernels],
        }


@dataclass(frozen=True)
class DeterministicChain:
    """Chain whose rounds are lookup tables (speaker symbol, u^{j-1}) -> u_j."""

    initiator: str
    sizes: tuple[int, ...]
    tables: tuple[np.ndarray, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        tables = tuple(np.asarray(t, dtype=int) for t in self.tables)
        if len(sizes) != len(tables) or not tables:
            raise ValueError("need one table per round")
        parents = []
        for j, t in enumerate(tables):
            if t.ndim != 1 + j or tuple(t.shape[1:]) != sizes[:j]:
                raise ValueError(f"round {j + 1} table shape {t.shape} inconsistent")
            if t.size and (t.min() < 0 or t.max() >= sizes[j]):
                raise ValueError(f"round {j + 1} table values must lie in [0, {sizes[j]})")
            parents.append(t.shape[0])
        _check_p3(sizes, parents)
        frozen = []
        for t in tables:
            t = t.copy()
            t.setflags(write=False)
            frozen.append(t)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "tables", tuple(frozen))

    @property
    def rounds(self) -> int:
        return len(self.tables)

    def as_auxiliary(self) -> AuxiliaryChain:
        kernels = []
        for j, t in enumerate(self.tables):
            k = np.zeros(t.shape + (self.sizes[j],))
            grid = np.indices(t.shape)
            k[(*grid, t)] = 1.0
            kernels.append(k)
        return AuxiliaryChain(self.initiator, tuple(kernels))

    def padded(self, sizes: Sequence[int]) -> "DeterministicChain":
        """Same functions redeclared with (weakly larger) round sizes."""
        sizes = tuple(int(s) for s in sizes)
        if len(sizes) != self.rounds or any(s < t for s, t in zip(sizes, self.sizes)):
            raise ValueError("padded sizes must dominate the current sizes")
        tables = []
        for j, t in enumerate(self.tables):
            full = np.zeros((t.shape[0],) + sizes[:j], dtype=int)
            full[(slice(None),) + tuple(slice(0, s) for s in self.sizes[:j])] = t
            tables.append(full)
        return DeterministicChain(self.initiator, sizes, tuple(tables))

    def to_json(self) -> dict:
        return {
            "kind": "deterministic",
            "initiator": self.initiator,
            "sizes": list(self.sizes),
            "tables": [t.tolist() for t in self.tables],
        }


def chain_from_json(obj: dict) -> "AuxiliaryChain | DeterministicChain":
    if obj.get("kind") == "deterministic":
        sizes = tuple(int(s) for s in obj["sizes"])
        return DeterministicChain(obj["initiator"], sizes,
                                  tuple(np.asarray(t, dtype=int) for t in obj["tables"]))
    return AuxiliaryChain(obj["initiator"], tuple(np.asarray(k, dtype=float) for k in obj["kernels"]))


@dataclass(frozen=True)
class ChainResult:
    """Scores of one chain; `per_round_terms` are the speaker-side
    conditional informations I(speaker; U_j | listener, U^{j-1})."""

    objective: float
    residual: float
    per_round_terms: tuple[float, ...]
    chain: "AuxiliaryChain | DeterministicChain"
    feasible: bool
    encoding: tuple | None = None
    candidates: tuple[tuple[str, float, float], ...] = field(default=())

    def to_json(self) -> dict:
        return {
            "objective": self.objective,
            "residual": self.residual,
            "per_round_terms": list(self.per_round_terms),
            "feasible": self.feasible,
            "chain": self.chain.to_json(),
        }


def _joint_array(pmf: JointPMF, chain: "AuxiliaryChain | DeterministicChain") -> np.ndarray:
    """Dense joint law over (X, Y, U_1, ..., U_r)."""
    nx, ny = pmf.shape
    cells = nx * ny * int(np.prod(chain.sizes, dtype=float))
    if cells > TENSOR_BUDGET:
        raise SizeBudgetExceeded(f"joint tensor would hold {cells} cells (budget {TENSOR_BUDGET})")
    aux = chain.as_auxiliary() if isinstance(chain, DeterministicChain) else chain
    q = pmf.p.copy()
    for j, k in enumerate(aux.kernels, start=1):
        side = speaker_of(j, aux.initiator)
        expected = nx if side == "x" else ny
        if k.shape[0] != expected:
            raise ValueError(
                f"round {j} speaks {side!r} but its table covers {k.shape[0]} symbols, not {expected}"
            )
        view = k[:, None] if side == "x" else k[None, :]
        q = q[..., None] * view
    return q


def chain_tensor(pmf: JointPMF, chain: "AuxiliaryChain | DeterministicChain") -> TensorPMF:
    aux_sizes = chain.sizes
    q = _joint_array(pmf, chain)
    names = ("x", "y") + tuple(f"u{j}" for j in range(1, len(aux_sizes) + 1))
    alphabets = (pmf.alphabet_x, pmf.alphabet_y) + tuple(
        FiniteAlphabet.of_size(s, f"u{j}.") for j, s in enumerate(aux_sizes, start=1)
    )
    return TensorPMF(names, alphabets, q)


def _plogp(arr: np.ndarray) -> float:
    pos = arr[arr > 0]
    return float((pos * np.log2(pos)).sum())


def _objective_residual(q: np.ndarray) -> tuple[float, float]:
    """(I(X,Y; U^r), I(X; Y | U^r)) from the dense joint array."""
    u_axes = tuple(range(2, q.ndim))
    h_q = -_plogp(q)
    h_xy = -_plogp(q.sum(axis=u_axes))
    h_u = -_plogp(q.sum(axis=(0, 1)))
    h_xu = -_plogp(q.sum(axis=1))
    h_yu = -_plogp(q.sum(axis=0))
    objective = max(h_xy + h_u - h_q, 0.0)
    residual = max(h_xu + h_yu - h_u - h_q, 0.0)
    return objective, residual


def chain_objective(pmf: JointPMF, chain: "AuxiliaryChain | DeterministicChain") -> ChainResult:
    """Score a chain: objective, dependence residual, per-round terms.

    For every chain built here the identity
    objective - I(X;Y) + residual = sum(per_round_terms) holds to 1e-9.
    """
    q = _joint_array(pmf, chain)
    objective, residual = _objective_residual(q)
    t = chain_tensor(pmf, chain)
    terms = []
    for j in range(1, chain_rounds(chain) + 1):
        side = speaker_of(j, chain.initiator)
        listener = "y" if side == "x" else "x"
        prior = tuple(f"u{i}" for i in range(1, j))
        terms.append(conditional_mutual_information(t, side, f"u{j}", (listener,) + prior))
    return ChainResult(
        objective=objective,
        residual=residual,
        per_round_terms=tuple(terms),
        chain=chain,
        feasible=residual <= CONT_FEASIBILITY_TOL,
    )


def chain_rounds(chain: "AuxiliaryChain | DeterministicChain") -> int:
    return chain.rounds


def ci1_exact(pmf: JointPMF, initiator: str = "x") -> float:
    """Exact one-round value: the entropy of the minimal sufficient statistic."""
    side = "x" if initiator == "x" else "y"
    lab = structure.minimal_sufficient_statistic(pmf, side)
    marginal = pmf.marginal_x if side == "x" else pmf.marginal_y
    return structure.labeling_entropy(lab, marginal)


# ---------------------------------------------------------------------------
# deterministic search in canonical form
# ---------------------------------------------------------------------------

def _iter_rgs(cells: int, max_labels: int) -> Iterator[tuple[int, ...]]:
    """Restricted growth strings: values labelled by first appearance."""
    word = [0] * cells
    maxes = [0] * cells

    def rec(i: int, cur_max: int):
        if i == cells:
            yield tuple(word)
            return
        top = min(cur_max + 1, max_labels - 1)
        for v in range(top + 1):
            word[i] = v
            yield from rec(i + 1, max(cur_max, v))

    if cells == 0:
        yield ()
    else:
        yield from rec(0, -1)


def _count_rgs_by_labels(cells: int, max_labels: int) -> list[int]:
    """count[k] = number of strings over `cells` cells using exactly k+1 labels."""
    table = np.zeros((cells + 1, max_labels + 1), dtype=object)
    table[0, 0] = 1
    for i in range(cells):
        for used in range(min(i, max_labels) + 1):
            c = table[i, used]
            if not c:
                continue
            table[i + 1, used] += c * used
            if used < max_labels:
                table[i + 1, used + 1] += c
    return [int(table[cells, k]) for k in range(1, max_labels + 1)]


def effective_caps(
    x_size: int, y_size: int, rounds: int, size_caps: Sequence[int] | None, initiator: str
) -> tuple[int, ...]:
    """User caps clamped by the per-round cardinality ceiling; default cap 4."""
    caps = []
    prod = 1
    for j in range(1, rounds + 1):
        parent = x_size if speaker_of(j, initiator) == "x" else y_size
        ceiling = parent * prod + 1
        user = 4 if size_caps is None else int(size_caps[j - 1])
        cap = min(user, ceiling)
        if cap < 1:
            raise ValueError(f"round {j} cap must be at least 1")
        caps.append(cap)
        prod *= cap
    return tuple(caps)


def count_canonical_chains(
    x_size: int, y_size: int, rounds: int, caps: Sequence[int], initiator: str = "x"
) -> int:
    """Number of canonical deterministic chains under the given caps."""
    from functools import lru_cache

    caps = tuple(int(c) for c in caps)

    @lru_cache(maxsize=None)
    def rec(j: int, prod: int) -> int:
        if j == rounds:
            return 1
        parent = x_size if speaker_of(j + 1, initiator) == "x" else y_size
        cells = parent * prod
        total = 0
        for used, cnt in enumerate(_count_rgs_by_labels(cells, min(caps[j], cells)), start=1):
            if cnt:
                total += cnt * rec(j + 1, prod * used)
        return total

    return rec(0, 1)


def iter_canonical_chains(
    x_size: int, y_size: int, rounds: int, caps: Sequence[int], initiator: str = "x",
    first_round_filter=None,
) -> Iterator[DeterministicChain]:
    """Enumerate canonical deterministic chains (tight sizes, first-appearance labels)."""
    caps = tuple(int(c) for c in caps)

    def rec(j: int, sizes: tuple[int, ...], tables: tuple[np.ndarray, ...]):
        if j == rounds:
            yield DeterministicChain(initiator, sizes, tables)
            return
        parent = x_size if speaker_of(j + 1, initiator) == "x" else y_size
        cells = parent * int(np.prod(sizes, dtype=int)) if sizes else parent
        for idx, rgs in enumerate(_iter_rgs(cells, min(caps[j], cells))):
            if j == 0 and first_round_filter is not None and not first_round_filter(idx):
                continue
            used = max(rgs) + 1
            table = np.array(rgs, dtype=int).reshape((parent,) + sizes)
            yield from rec(j + 1, sizes + (used,), tables + (table,))

    yield from rec(0, (), ())


def canonical_encoding(chain: DeterministicChain) -> tuple[tuple[int, ...], ...]:
    """Relabel round values by first appearance and drop unused values."""
    tables = [np.array(t) for t in chain.tables]
    rounds = len(tables)
    enc = []
    for j in range(rounds):
        flat = tables[j].ravel()
        relabel: dict[int, int] = {}
        for v in flat.tolist():
            if v not in relabel:
                relabel[v] = len(relabel)
        enc.append(tuple(relabel[v] for v in flat.tolist()))
        inv = sorted(relabel, key=relabel.get)
        for jj in range(j + 1, rounds):
            tables[jj] = np.take(tables[jj], inv, axis=1 + j)
    return tuple(enc)


def _encoding_to_chain(
    encoding: Sequence[Sequence[int]], x_size: int, y_size: int, initiator: str
) -> DeterministicChain:
    sizes: tuple[int, ...] = ()
    tables: tuple[np.ndarray, ...] = ()
    for j, word in enumerate(encoding):
        parent = x_size if speaker_of(j + 1, initiator) == "x" else y_size
        table = np.array(word, dtype=int).reshape((parent,) + sizes)
        tables += (table,)
        sizes += (int(max(word)) + 1,)
    return DeterministicChain(initiator, sizes, tables)


def det_chain_search(
    pmf: JointPMF,
    rounds: int,
    size_caps: Sequence[int] | None = None,
    budget: int = 2_000_000,
    initiator: str = "x",
    threads: int = 1,
    feasibility_tol: float = DET_FEASIBILITY_TOL,
    collect_feasible: bool = False,
) -> ChainResult:
    """Exhaustive minimum over canonical deterministic chains.

    Keeps chains with dependence residual at most `feasibility_tol` and
    returns the lowest objective among them, ties broken by the
    lexicographically smallest encoding. The result is an upper bound on
    the r-round optimum.
    """
    nx, ny = pmf.shape
    caps = effective_caps(nx, ny, rounds, size_caps, initiator)
    total = count_canonical_chains(nx, ny, rounds, caps, initiator)
    if total > budget:
        raise BudgetExceeded(f"{total} canonical chains exceed the budget {budget}")

    def evaluate_partition(worker: int, workers: int):
        best_key = None
        best = None
        feasible_encodings = []
        for chain in iter_canonical_chains(
            nx, ny, rounds, caps, initiator,
            first_round_filter=(lambda idx: idx % workers == worker) if workers > 1 else None,
        ):
            q = _joint_array(pmf, chain)
            objective, residual = _objective_residual(q)
            if residual > feasibility_tol:
                continue
            encoding = tuple(tuple(t.ravel().tolist()) for t in chain.tables)
            if collect_feasible:
                feasible_encodings.append((encoding, objective, residual))
            key = (objective, encoding)
            if best_key is None or key < best_key:
                best_key = key
                best = chain
        return best_key, best, feasible_encodings

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda w: evaluate_partition(w, threads), range(threads)))
    else:
        parts = [evaluate_partition(0, 1)]

    best_key = None
    best_chain = None
    feasible: list = []
    for key, chain, encs in parts:
        feasible.extend(encs)
        if key is not None and (best_key is None or key < best_key):
            best_key, best_chain = key, chain
    if best_chain is None:
        raise NoFeasibleChain(
            f"no deterministic chain with residual <= {feasibility_tol} under caps {caps}"
        )
    result = chain_objective(pmf, best_chain)
    encoding = tuple(tuple(t.ravel().tolist()) for t in best_chain.tables)
    return ChainResult(
        objective=result.objective,
        residual=result.residual,
        per_round_terms=result.per_round_terms,
        chain=best_chain,
        feasible=result.residual <= feasibility_tol,
        encoding=encoding,
        candidates=tuple(
            (f"chain{dx}", o, r) for dx, (_, o, r) in enumerate(sorted(feasible))
        ) if collect_feasible else (),
    )


def feasible_det_encodings(
    pmf: JointPMF,
    rounds: int,
    size_caps: Sequence[int] | None = None,
    initiator: str = "x",
    feasibility_tol: float = DET_FEASIBILITY_TOL,
    budget: int = 2_000_000,
) -> list[tuple[tuple, float]]:
    """All feasible canonical encodings with their objectives (for audits)."""
    nx, ny = pmf.shape
    caps = effective_caps(nx, ny, rounds, size_caps, initiator)
    total = count_canonical_chains(nx, ny, rounds, caps, initiator)
    if total > budget:
        raise BudgetExceeded(f"{total} canonical chains exceed the budget {budget}")
    out = []
    for chain in iter_canonical_chains(nx, ny, rounds, caps, initiator):
        q = _joint_array(pmf, chain)
        objective, residual = _objective_residual(q)
        if residual <= feasibility_tol:
            out.append((tuple(tuple(t.ravel().tolist()) for t in chain.tables), objective))
    return out


# ---------------------------------------------------------------------------
# randomized chains by penalty descent
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChainOptConfig:
    restarts: int = 8
    penalty_schedule: tuple[float, ...] = (1.0, 10.0, 100.0, 1000.0)
    max_iter: int = 3000
    seed: int = 0
    threads: int = 1
    det_seed_budget: int = 100_000

    def to_json(self) -> dict:
        return {
            "restarts": self.restarts,
            "penalty_schedule": list(self.penalty_schedule),
            "max_iter": self.max_iter,
            "seed": self.seed,
            "threads": self.threads,
        }


def _kernel_shapes(nx: int, ny: int, sizes: Sequence[int], initiator: str) -> list[tuple[int, ...]]:
    shapes = []
    prior: tuple[int, ...] = ()
    for j, s in enumerate(sizes, start=1):
        parent = nx if speaker_of(j, initiator) == "x" else ny
        shapes.append((parent,) + prior + (int(s),))
        prior += (int(s),)
    return shapes


def _chain_value_and_grad_factory(p: np.ndarray, sizes: Sequence[int], initiator: str):
    nx, ny = p.shape
    rounds = len(sizes)
    log2 = np.log2

    def value_and_grad(kernels, lam):
        q = p.copy()
        for j, k in enumerate(kernels, start=1):
            view = k[:, None] if speaker_of(j, initiator) == "x" else k[None, :]
            q = q[..., None] * view
        u_axes = tuple(range(2, q.ndim))
        m_xy = q.sum(axis=u_axes)
        m_u = q.sum(axis=(0, 1))
        m_xu = q.sum(axis=1)
        m_yu = q.sum(axis=0)

        def safe_log(a):
            return np.where(a > 0, log2(np.where(a > 0, a, 1.0)), 0.0)

        lq, lxy, lu, lxu, lyu = map(safe_log, (q, m_xy, m_u, m_xu, m_yu))
        h_q = -(q * lq).sum()
        h_xy = -(m_xy * lxy).sum()
        h_u = -(m_u * lu).sum()
        h_xu = -(m_xu * lxu).sum()
        h_yu = -(m_yu * lyu).sum()
        objective = h_xy + h_u - h_q
        residual = h_xu + h_yu - h_u - h_q

        shape = q.shape
        dlog = (
            (1.0 + lam) * lq
            - lxy.reshape(shape[:2] + (1,) * rounds)
            - (1.0 - lam) * lu.reshape((1, 1) + shape[2:])
            - lam * lxu.reshape((shape[0], 1) + shape[2:])
            - lam * lyu.reshape((1,) + shape[1:])
        )
        g_cell = q * dlog

        grads = []
        for j in range(1, rounds + 1):
            side = speaker_of(j, initiator)
            drop = (1,) if side == "x" else (0,)
            drop = drop + tuple(range(2 + j, q.ndim))
            a = g_cell.sum(axis=drop)
            m = q.sum(axis=drop)
            grads.append(np.where(m > 1e-250, a / np.where(m > 0, m, 1.0), 0.0))
        return float(objective + lam * residual), grads

    return value_and_grad


def _copy_chain(nx: int, ny: int, sizes: Sequence[int], initiator: str) -> DeterministicChain | None:
    parent0 = nx if initiator == "x" else ny
    if sizes[0] < parent0:
        return None
    tables = [np.arange(parent0, dtype=int)]
    prior: tuple[int, ...] = (int(sizes[0]),)
    for j in range(2, len(sizes) + 1):
        parent = nx if speaker_of(j, initiator) == "x" else ny
        tables.append(np.zeros((parent,) + prior, dtype=int))
        prior += (int(sizes[j - 1]),)
    return DeterministicChain(initiator, tuple(int(s) for s in sizes), tuple(tables))


def _constant_chain(nx: int, ny: int, sizes: Sequence[int], initiator: str) -> DeterministicChain:
    tables = []
    prior: tuple[int, ...] = ()
    for j, s in enumerate(sizes, start=1):
        parent = nx if speaker_of(j, initiator) == "x" else ny
        tables.append(np.zeros((parent,) + prior, dtype=int))
        prior += (int(s),)
    return DeterministicChain(initiator, tuple(int(s) for s in sizes), tuple(tables))


def continuous_chain_minimize(
    pmf: JointPMF,
    rounds: int,
    sizes: Sequence[int],
    config: ChainOptConfig | None = None,
    extra_chains: Sequence["AuxiliaryChain | DeterministicChain"] = (),
    keep_traces: bool = False,
) -> ChainResult | tuple[ChainResult, PenaltyOutcome]:
    """Penalty-method upper bound over randomized chains of the given sizes.

    Mandatory start points: the best deterministic chain at equal sizes,
    the copy chain, the constant chain, and any supplied chains; each is
    also scored exactly as a candidate. Feasibility threshold: 1e-4 bits.
    """
    config = config or ChainOptConfig()
    nx, ny = pmf.shape
    sizes = tuple(int(s) for s in sizes)
    if len(sizes) != rounds:
        raise ValueError("need one size per round")
    shapes = _kernel_shapes(nx, ny, sizes, "x")
    initiator = "x"

    seed_chains: list[tuple[str, DeterministicChain]] = []
    try:
        det = det_chain_search(pmf, rounds, sizes, budget=config.det_seed_budget,
                               initiator=initiator)
        seed_chains.append(("det-best", det.chain.padded(sizes)))
    except (BudgetExceeded, NoFeasibleChain):
        pass
    copy_chain = _copy_chain(nx, ny, sizes, initiator)
    if copy_chain is not None:
        seed_chains.append(("copy", copy_chain))
    seed_chains.append(("constant", _constant_chain(nx, ny, sizes, initiator)))
    for i, ch in enumerate(extra_chains):
        det_ch = ch if isinstance(ch, DeterministicChain) else None
        if det_ch is not None and det_ch.sizes == sizes and det_ch.initiator == initiator:
            seed_chains.append((f"supplied-{i}", det_ch))

    exact = []
    starts = []
    for label, ch in seed_chains:
        kernels = [np.asarray(k) for k in ch.as_auxiliary().kernels]
        exact.append((label, kernels))
        starts.append((label, [smooth(k) for k in kernels]))
    starts += dirichlet_starts(config.seed, config.restarts, shapes)

    cfg = PenaltyConfig(
        restarts=config.restarts,
        penalty_schedule=config.penalty_schedule,
        max_iter=config.max_iter,
        seed=config.seed,
        feasibility_threshold=CONT_FEASIBILITY_TOL,
        threads=config.threads,
    )
    vag = _chain_value_and_grad_factory(pmf.p, sizes, initiator)

    def evaluate(kernels):
        q = pmf.p.copy()
        for j, k in enumerate(kernels, start=1):
            view = k[:, None] if speaker_of(j, initiator) == "x" else k[None, :]
            q = q[..., None] * view
        return _objective_residual(q)

    outcome = penalized_minimize(starts, exact, vag, evaluate, cfg, keep_traces=keep_traces)
    best = outcome.best
    chain = AuxiliaryChain(initiator, tuple(_renormalize(k) for k in best.kernels))
    scored = chain_objective(pmf, chain)
    result = ChainResult(
        objective=scored.objective,
        residual=scored.residual,
        per_round_terms=scored.per_round_terms,
        chain=chain,
        feasible=scored.residual <= CONT_FEASIBILITY_TOL,
        candidates=tuple((c.label, c.objective, c.residual) for c in outcome.candidates),
    )
    if keep_traces:
        return result, outcome
    return result


def _renormalize(k: np.ndarray) -> np.ndarray:
    k = np.clip(np.asarray(k, dtype=float), 0.0, None)
    return k / k.sum(axis=-1, keepdims=True)


# ---------------------------------------------------------------------------
# closed forms and diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BssClosedForm:
    ci_i: float
    sk_capacity: float
    r_sk: float

    def to_json(self) -> dict:
        return {"ci_i": self.ci_i, "sk_capacity": self.sk_capacity, "r_sk": self.r_sk}


def bss_closed_form(delta: float) -> BssClosedForm:
    """Exact rates for the doubly symmetric binary source with crossover delta.

    Interaction cannot beat one-way communication here: the r-round optimum
    equals min{H(X), H(Y)} = 1 bit for every r, so the key-generation
    communication rate is exactly the binary entropy of the crossover.
    """
    if not 0.0 < delta < 0.5:
        raise DeltaOutOfRange(f"delta must lie strictly inside (0, 0.5), got {delta}")
    h = binary_entropy(delta)
    return BssClosedForm(ci_i=1.0, sk_capacity=1.0 - h, r_sk=h)


@dataclass(frozen=True)
class AtomClassification:
    atom: tuple[int, ...]
    probability: float
    h_x: float
    h_y: float
    vanishes: tuple[str, ...]   # subset of ("x", "y")


def binary_stop_classify(
    pmf: JointPMF, chain: "AuxiliaryChain | DeterministicChain", tol: float = 1e-6
) -> tuple[AtomClassification, ...]:
    """Per-atom dichotomy check for binary sources.

    For a feasible chain on dependent binary sources, every positive
    probability chain value must pin down at least one side; an atom
    pinning neither is reported as a LemmaViolation.
    """
    if pmf.shape != (2, 2):
        raise ValueError("binary_stop_classify needs binary alphabets on both sides")
    t = pmf.to_tensor()
    if mutual_information(t, "x", "y") <= 1e-9:
        raise ValueError("sources must be dependent (I(X;Y) > 1e-9)")
    scored = chain_objective(pmf, chain)
    if scored.residual > DET_FEASIBILITY_TOL:
        raise LemmaViolation(
            f"chain residual {scored.residual:.3g} exceeds {DET_FEASIBILITY_TOL}; "
            "the dichotomy is only guaranteed for feasible chains"
        )
    q = _joint_array(pmf, chain)
    flat = q.reshape(2, 2, -1)
    sizes = chain.sizes
    out = []
    for a in range(flat.shape[2]):
        cell = flat[:, :, a]
        mass = float(cell.sum())
        if mass <= 0:
            continue
        px = cell.sum(axis=1) / mass
        py = cell.sum(axis=0) / mass
        h_x = float(-_plogp(px))
        h_y = float(-_plogp(py))
        vanish = tuple(s for s, h in (("x", h_x), ("y", h_y)) if h <= tol)
        if not vanish:
            raise LemmaViolation(
                f"atom {np.unravel_index(a, sizes)} leaves both sides uncertain "
                f"(H(X|u)={h_x:.3g}, H(Y|u)={h_y:.3g})"
            )
        out.append(AtomClassification(
            atom=tuple(int(v) for v in np.unravel_index(a, sizes)),
            probability=mass, h_x=h_x, h_y=h_y, vanishes=vanish,
        ))
    return tuple(out)


def chain_to_aux_kernel(
    pmf: JointPMF, chain: "AuxiliaryChain | DeterministicChain", w_size: int,
    dust: float = 1e-12,
) -> np.ndarray | None:
    """Collapse a chain into a P(W | X, Y) table over its significant atoms.

    Atoms carrying less than `dust` mass are dropped and the slices
    renormalized. Returns None when more than `w_size` atoms remain.
    """
    q = _joint_array(pmf, chain).reshape(pmf.shape + (-1,))
    mass = q.sum(axis=(0, 1))
    atoms = np.nonzero(mass > dust)[0]
    if atoms.size > w_size or atoms.size == 0:
        return None
    nx, ny = pmf.shape
    k = np.zeros((nx, ny, w_size))
    p = pmf.p[:, :, None]
    sub = q[:, :, atoms]
    with np.errstate(divide="ignore", invalid="ignore"):
        k[:, :, : atoms.size] = np.where(p > 0, sub / np.where(p > 0, p, 1.0), 0.0)
    zero = pmf.p <= 0
    k[zero, :] = 0.0
    k[zero, 0] = 1.0
    sums = k.sum(axis=2, keepdims=True)
    return k / sums
