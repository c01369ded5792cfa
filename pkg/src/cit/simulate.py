"""Monte Carlo laboratory: binning reconciliation and staged key agreement.

`sw_binning_simulate` measures the decoding error of hash binning with an
exact maximum-likelihood-over-the-bin decoder. `cr_sk_simulate` runs the
staged scheme blockwise: per round the speaker computes its chain values
symbolwise, communicates a universal-hash bin index at roughly the
conditional-entropy rate plus a slack, the listener decodes by maximum
likelihood over the bin (realized as a best-first search in likelihood
order), and the final key is a seeded universal hash of the accumulated
common randomness. Leakage (1/n) I(K; F) is computed exactly when the
support of the block law is enumerable, otherwise plug-in estimated and
flagged.

Randomness layout: stream [seed, 0, j] fixes the stage-j binning hash,
[seed, 1] the key hash, [seed, 2, t] drives trial t, so results do not
depend on execution order.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .chains import DeterministicChain, chain_tensor
from .errors import RateInfeasible, RateOutOfRange, SizeBudgetExceeded
from .hashing import AffineGf2Hash, pack_digits, unpack_digits
from .pmf import JointPMF, conditional_entropy, entropy

LOG_FLOOR = -1e30
COSET_CAP = 4096
POP_BUDGET = 4096
EXACT_ROWS_BUDGET = 2 ** 22
EXACT_CELLS_BUDGET = 2 ** 25
KF_TABLE_BUDGET = 2 ** 22


def _safe_log(p: np.ndarray) -> np.ndarray:
    return np.where(p > 0, np.log(np.where(p > 0, p, 1.0)), LOG_FLOOR)


def _plugin_entropy(masses: np.ndarray) -> float:
    masses = masses[masses > 0]
    masses = masses / masses.sum()
    return float(-(masses * np.log2(masses)).sum()) + 0.0


def _key_transcript_entropies(
    keys: np.ndarray, synds: np.ndarray, weights: np.ndarray
) -> tuple[float, float, float]:
    """(H(K), H(F), H(K, F)) in bits from (possibly weighted) rows."""
    pairs = np.concatenate([keys[:, None].astype(np.uint64), synds.astype(np.uint64)], axis=1)
    uniq, inv = np.unique(pairs, axis=0, return_inverse=True)
    joint = np.bincount(inv, weights=weights)
    joint = joint / joint.sum()
    _, k_inv = np.unique(uniq[:, 0], return_inverse=True)
    _, f_inv = np.unique(uniq[:, 1:], axis=0, return_inverse=True)
    h_k = _plugin_entropy(np.bincount(k_inv, weights=joint))
    h_f = _plugin_entropy(np.bincount(f_inv, weights=joint))
    h_kf = _plugin_entropy(joint)
    return h_k, h_f, h_kf


@dataclass(frozen=True)
class SwBinningReport:
    n: int
    rate: float
    bins_log2: int
    trials: int
    seed: int
    errors: int
    error_rate: float

    def to_json(self) -> dict:
        return {
            "n": self.n, "rate": self.rate, "bins_log2": self.bins_log2,
            "trials": self.trials, "seed": self.seed,
            "errors": self.errors, "error_rate": self.error_rate,
        }


def _sample_block(rng: np.random.Generator, flat: np.ndarray, ny: int, n: int):
    cells = rng.choice(flat.size, size=n, p=flat)
    return cells // ny, cells % ny


def sw_binning_simulate(
    pmf: JointPMF, n: int, rate: float, trials: int, seed: int
) -> SwBinningReport:
    """Estimate the block error of hash binning with an ML-over-bin decoder.

    Binary sources use a fresh full-row-rank affine hash per trial and
    enumerate the bin as a coset; other alphabets use one fixed hash and
    precomputed bin lists. Ties are broken toward the smallest sequence.
    """
    nx, ny = pmf.shape
    if n < 1 or n > 24:
        raise SizeBudgetExceeded(f"blocklength must lie in [1, 24], got {n}")
    log_alpha = math.log2(nx)
    if rate <= 0 or rate > log_alpha + 1e-12:
        raise RateOutOfRange(f"rate must lie in (0, log2 |X|] = (0, {log_alpha:.4f}], got {rate}")
    k_bits = min(math.ceil(n * rate - 1e-12), math.ceil(n * log_alpha - 1e-12))
    flat = pmf.p.ravel()
    # log P(x | y) per (x value, y value)
    cond = np.where(pmf.marginal_y[None, :] > 0, pmf.p / np.where(pmf.marginal_y[None, :] > 0, pmf.marginal_y[None, :], 1.0), 0.0)
    ll = _safe_log(cond)

    errors = 0
    if nx == 2:
        if (1 << (n - k_bits)) > COSET_CAP:
            raise SizeBudgetExceeded(
                f"bins of size 2^{n - k_bits} exceed the decoder cap {COSET_CAP}"
            )
        for t in range(trials):
            rng = np.random.default_rng([seed, 1, t])
            xd, yd = _sample_block(rng, flat, ny, n)
            word = int(pack_digits(xd[None, :], 1)[0])
            h = AffineGf2Hash.sample(rng, n, k_bits)
            cands = h.coset(h.apply_int(word), cap=COSET_CAP)
            bits = unpack_digits(cands, n, 1)
            l0 = ll[0, yd]
            l1 = ll[1, yd]
            scores = bits @ (l1 - l0) + l0.sum()
            if int(cands[int(np.argmax(scores))]) != word:
                errors += 1
    else:
        count = nx ** n
        if count > 2 ** 20:
            raise SizeBudgetExceeded(f"{count} sequences exceed the enumeration budget 2^20")
        bits_per = max(1, math.ceil(math.log2(nx)))
        if n * bits_per > 63:
            raise SizeBudgetExceeded("packed sequences exceed the 63-bit word")
        if count / (1 << k_bits) > COSET_CAP:
            raise SizeBudgetExceeded("average bin size exceeds the decoder cap")
        idx = np.arange(count)
        digits = np.empty((count, n), dtype=np.int64)
        for t in range(n):
            digits[:, t] = (idx // nx ** t) % nx
        words = pack_digits(digits, bits_per)
        h = AffineGf2Hash.sample(np.random.default_rng([seed, 0]), n * bits_per, k_bits)
        hashes = h.apply(words)
        order = np.argsort(hashes, kind="stable")
        sorted_h = hashes[order]
        for t in range(trials):
            rng = np.random.default_rng([seed, 1, t])
            xd, yd = _sample_block(rng, flat, ny, n)
            x_idx = int((xd * nx ** np.arange(n)).sum())
            s = hashes[x_idx]
            lo = np.searchsorted(sorted_h, s, side="left")
            hi = np.searchsorted(sorted_h, s, side="right")
            members = np.sort(order[lo:hi])
            cand_digits = digits[members]
            scores = ll[cand_digits, yd[None, :]].sum(axis=1)
            if int(members[int(np.argmax(scores))]) != x_idx:
                errors += 1
    return SwBinningReport(
        n=n, rate=rate, bins_log2=k_bits, trials=trials, seed=seed,
        errors=errors, error_rate=errors / trials if trials else 0.0,
    )


@dataclass(frozen=True)
class SimReport:
    trials: int
    n: int
    seed: int
    slack: float
    cr_error_rate: float
    comm_rate: float
    key_rate: float
    key_bits: int
    leakage: float
    leakage_exact: bool
    uniformity_gap: float
    stage_bits: tuple[int, ...]
    decode_failures: int

    def to_json(self) -> dict:
        return {
            "trials": self.trials, "n": self.n, "seed": self.seed, "slack": self.slack,
            "cr_error_rate": self.cr_error_rate,
            "comm_rate": self.comm_rate,
            "key_rate": self.key_rate,
            "key_bits": self.key_bits,
            "leakage": self.leakage,
            "leakage_basis": "exact" if self.leakage_exact else "estimate",
            "uniformity_gap": self.uniformity_gap,
            "stage_bits": list(self.stage_bits),
            "decode_failures": self.decode_failures,
        }


class _Stage:
    """Per-round tables, hash, and decoder for the staged scheme."""

    def __init__(self, pmf, tensor, chain, j, n, slack, seed):
        self.j = j
        self.size = chain.sizes[j - 1]
        self.table = np.asarray(chain.tables[j - 1])
        side = "x" if (j % 2 == 1) == (chain.initiator == "x") else "y"
        self.speaker = side
        self.listener = "y" if side == "x" else "x"
        prior = tuple(f"u{i}" for i in range(1, j))
        self.cond_entropy = conditional_entropy(tensor, f"u{j}", (self.listener,) + prior)
        self.bits_per = max(1, math.ceil(math.log2(self.size))) if self.size > 1 else 0
        self.m = n * self.bits_per
        raw_bits = math.ceil(n * math.log2(self.size) - 1e-12) if self.size > 1 else 0
        want = math.ceil(n * (self.cond_entropy + slack) - 1e-12)
        if self.bits_per and self.m > 63:
            raise SizeBudgetExceeded(f"stage {j} packs into {self.m} > 63 bits")
        if self.size == 1:
            self.identity = True
            self.k_bits = 0
            self.hash = None
        elif want >= raw_bits:
            self.identity = True
            self.k_bits = raw_bits
            self.hash = None
        else:
            self.identity = False
            self.k_bits = want
            self.hash = AffineGf2Hash.sample(np.random.default_rng([seed, 0, j]), self.m, want)
        # P(u_j = v | listener symbol, prior values), uniform on impossible contexts
        names = (self.listener,) + prior + (f"u{j}",)
        marg = tensor.marginal_array(names)
        axes = sorted(tensor.axes(names))
        # marginal_array orders axes as in the tensor: listener axis first, then u axes
        order = [axes.index(tensor.axis(nm)) for nm in names]
        marg = np.transpose(marg, order)
        tot = marg.sum(axis=-1, keepdims=True)
        cond = np.where(tot > 0, marg / np.where(tot > 0, tot, 1.0), 1.0 / self.size)
        self.cond = cond
        self.ll = _safe_log(cond)
        self.amax = np.argmax(self.ll, axis=-1)
        self.like_order = np.argsort(-self.ll, axis=-1, kind="stable")

    def send(self, speaker_digits, prior_versions):
        """Chain values computed by the speaker from its own information."""
        return self.table[(speaker_digits,) + tuple(prior_versions)]

    def syndrome(self, words):
        return words if self.identity else self.hash.apply(words)

    def decode(self, words_sent, listener_digits, prior_versions, pop_budget=POP_BUDGET):
        """Listener estimates; returns (digits, straggler count, failures)."""
        n = listener_digits.shape[1]
        if self.identity:
            return unpack_digits(words_sent, n, self.bits_per) if self.bits_per else np.zeros_like(listener_digits), 0, 0
        synd = self.hash.apply(words_sent)
        ctx = (listener_digits,) + tuple(prior_versions)
        first = self.amax[ctx]
        ok = self.hash.apply(pack_digits(first, self.bits_per)) == synd
        out = first.copy()
        stragglers = np.nonzero(~ok)[0]
        failures = 0
        for row in stragglers:
            ll_row = self.ll[tuple(c[row] for c in ctx)]          # (n, size)
            order_row = self.like_order[tuple(c[row] for c in ctx)]
            decoded = self._best_first(ll_row, order_row, int(synd[row]), pop_budget)
            if decoded is None:
                failures += 1
            else:
                out[row] = decoded
        return out, int(stragglers.size), failures

    def _best_first(self, ll_row, order_row, syndrome, pop_budget):
        """ML over the bin: walk sequences in decreasing likelihood until the
        hash matches. Returns None when the pop budget runs out."""
        n, size = ll_row.shape
        sorted_ll = np.take_along_axis(ll_row, order_row, axis=-1)
        base = float(sorted_ll[:, 0].sum())
        start = (0,) * n
        heap = [(-base, start)]
        seen = {start}
        pops = 0
        while heap and pops < pop_budget:
            neg, ranks = heapq.heappop(heap)
            pops += 1
            digits = order_row[np.arange(n), list(ranks)]
            word = int(pack_digits(digits[None, :], self.bits_per)[0])
            if self.hash.apply_int(word) == syndrome:
                return digits
            for t in range(n):
                if ranks[t] + 1 < size:
                    nxt = ranks[:t] + (ranks[t] + 1,) + ranks[t + 1:]
                    if nxt not in seen:
                        seen.add(nxt)
                        delta = sorted_ll[t, ranks[t] + 1] - sorted_ll[t, ranks[t]]
                        heapq.heappush(heap, (neg - delta, nxt))
        return None


def default_copy_chain(pmf: JointPMF) -> DeterministicChain:
    """One round, the first terminal reveals its symbol."""
    nx = pmf.shape[0]
    return DeterministicChain("x", (nx,), (np.arange(nx, dtype=int),))


def cr_sk_simulate(
    pmf: JointPMF,
    chain: DeterministicChain,
    n: int,
    key_rate: float,
    trials: int,
    seed: int,
    slack: float = 0.25,
) -> SimReport:
    """Run the staged common-randomness and key generation scheme blockwise.

    Raises RateInfeasible when `key_rate` exceeds the chain's net
    extractable rate H(U^r) - sum_j H(U_j | listener_j, U^{j-1}), which for
    a feasible chain equals I(X;Y).
    """
    if not isinstance(chain, DeterministicChain):
        raise ValueError("the staged scheme needs a deterministic chain")
    if trials < 1:
        raise ValueError("need at least one trial")
    if key_rate < 0:
        raise RateInfeasible("key_rate must be nonnegative")
    tensor = chain_tensor(pmf, chain)
    rounds = chain.rounds
    u_names = tuple(f"u{j}" for j in range(1, rounds + 1))
    stages = [_Stage(pmf, tensor, chain, j, n, slack, seed) for j in range(1, rounds + 1)]
    h_cr = entropy(tensor, u_names)
    extractable = h_cr - sum(st.cond_entropy for st in stages)
    if key_rate > max(extractable, 0.0) + 1e-12:
        raise RateInfeasible(
            f"key_rate {key_rate} exceeds the extractable rate {max(extractable, 0.0):.6f}"
        )
    total_bits = sum(n * st.bits_per for st in stages)
    if total_bits > 63:
        raise SizeBudgetExceeded(f"accumulated CR packs into {total_bits} > 63 bits")
    key_bits = min(math.ceil(n * key_rate - 1e-12), total_bits) if key_rate > 0 else 0
    key_hash = AffineGf2Hash.sample(np.random.default_rng([seed, 1]), max(total_bits, 1), key_bits)
    comm_bits = sum(st.k_bits for st in stages)

    def run_rows(xd: np.ndarray, yd: np.ndarray):
        """Vectorized pipeline; returns (error flags, K values, F rows, failures)."""
        rows = xd.shape[0]
        true_u: list[np.ndarray] = []
        ver = {"x": [], "y": []}
        synds = np.zeros((rows, rounds), dtype=np.uint64)
        failures = 0
        for st in stages:
            sd = xd if st.speaker == "x" else yd
            ld = yd if st.speaker == "x" else xd
            u_true = st.table[(sd,) + tuple(true_u)]
            true_u.append(u_true)
            u_sent = st.send(sd, ver[st.speaker])
            words = pack_digits(u_sent, st.bits_per) if st.bits_per else np.zeros(rows, dtype=np.uint64)
            synds[:, st.j - 1] = st.syndrome(words)
            decoded, _, fail = st.decode(words, ld, ver[st.listener])
            failures += fail
            ver[st.speaker].append(u_sent)
            ver[st.listener].append(decoded)

        def pack_cr(parts):
            cr = np.zeros(rows, dtype=np.uint64)
            offset = 0
            for st, part in zip(stages, parts):
                if st.bits_per:
                    cr |= pack_digits(part, st.bits_per) << np.uint64(offset)
                offset += n * st.bits_per
            return cr

        cr_true = pack_cr(true_u)
        cr_x = pack_cr(ver["x"])
        cr_y = pack_cr(ver["y"])
        err = (cr_x != cr_true) | (cr_y != cr_true)
        keys = key_hash.apply(cr_x) if key_bits else np.zeros(rows, dtype=np.uint64)
        return err, keys, synds, failures

    # Monte Carlo trials, one seeded stream per trial index
    flat = pmf.p.ravel()
    ny = pmf.shape[1]
    xd = np.empty((trials, n), dtype=np.int64)
    yd = np.empty((trials, n), dtype=np.int64)
    for t in range(trials):
        rng = np.random.default_rng([seed, 2, t])
        xd[t], yd[t] = _sample_block(rng, flat, ny, n)
    err, keys, synds, failures = run_rows(xd, yd)
    cr_error_rate = float(err.mean()) if trials else 0.0

    # leakage and uniformity: exact by support enumeration when affordable
    cells = np.argwhere(pmf.p > 0)
    support = cells.shape[0]
    n_rows = support ** n if support > 1 else 1
    exact = (
        n_rows <= EXACT_ROWS_BUDGET
        and n_rows * n <= EXACT_CELLS_BUDGET
        and (1 << key_bits) * (1 << min(comm_bits, 40)) <= KF_TABLE_BUDGET
    )
    if exact:
        idx = np.arange(n_rows)
        sel = np.empty((n_rows, n), dtype=np.int64)
        for t in range(n):
            sel[:, t] = (idx // support ** t) % support
        ex_xd = cells[sel, 0]
        ex_yd = cells[sel, 1]
        w = np.ones(n_rows)
        probs = pmf.p[cells[:, 0], cells[:, 1]]
        for t in range(n):
            w *= probs[sel[:, t]]
        _, ex_keys, ex_synds, _ = run_rows(ex_xd, ex_yd)
        h_k, h_f, h_kf = _key_transcript_entropies(ex_keys, ex_synds, w)
    else:
        h_k, h_f, h_kf = _key_transcript_entropies(keys, synds, np.ones(trials))
    leakage = max(h_k + h_f - h_kf, 0.0) / n
    uniformity_gap = max(key_bits - h_k, 0.0) / n

    return SimReport(
        trials=trials, n=n, seed=seed, slack=slack,
        cr_error_rate=cr_error_rate,
        comm_rate=comm_bits / n,
        key_rate=key_bits / n,
        key_bits=key_bits,
        leakage=leakage,
        leakage_exact=exact,
        uniformity_gap=uniformity_gap,
        stage_bits=tuple(st.k_bits for st in stages),
        decode_failures=failures,
    )
