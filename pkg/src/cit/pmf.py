"""Exact arithmetic for finite joint distributions.

Everything downstream (sufficient statistics, common-information bounds,
protocol identities) reduces to entropy functionals of small dense tensors,
so the representation is deliberately simple: labelled axes, a dense
nonnegative array summing to one, and base-2 entropies with 0*log(0) = 0.
All reported quantities are in bits.

Tolerances: input mass may differ from 1 by at most 1e-6 and is then
renormalized exactly; internal identities are expected to hold to 1e-9;
tiny negative values of provably nonnegative quantities are clamped at 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    EmptyMatrix,
    NegativeMass,
    NotNormalized,
    OverlappingAxes,
    UnknownAxis,
)

NORMALIZATION_TOL = 1e-6
IDENTITY_TOL = 1e-9

AxisSpec = "str | Iterable[str]"  # axis selectors: one name or an iterable of names


@dataclass(frozen=True)
class FiniteAlphabet:
    """An ordered set of distinct symbol labels; order fixes the index map."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        symbols = tuple(str(s) for s in self.symbols)
        object.__setattr__(self, "symbols", symbols)
        if len(symbols) < 1:
            raise EmptyMatrix("alphabet must contain at least one symbol")
        if len(set(symbols)) != len(symbols):
            raise ValueError(f"alphabet labels must be unique, got {symbols}")

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, symbol: str) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise KeyError(f"symbol {symbol!r} not in alphabet") from None

    @staticmethod
    def of_size(n: int, prefix: str = "") -> "FiniteAlphabet":
        return FiniteAlphabet(tuple(f"{prefix}{i}" for i in range(n)))


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class JointPMF:
    """Validated joint distribution of two finite sources.

    Rows index the first source, columns the second. Construct through
    :func:`validate_pmf` (or the JSON loaders), which enforces the contract.
    """

    alphabet_x: FiniteAlphabet
    alphabet_y: FiniteAlphabet
    p: np.ndarray
    zero_x_symbols: tuple[str, ...] = field(default=())
    zero_y_symbols: tuple[str, ...] = field(default=())

    @property
    def shape(self) -> tuple[int, int]:
        return self.p.shape

    @property
    def marginal_x(self) -> np.ndarray:
        return self.p.sum(axis=1)

    @property
    def marginal_y(self) -> np.ndarray:
        return self.p.sum(axis=0)

    def conditional_rows(self, side: str = "x") -> np.ndarray:
        """P(other | symbol) per symbol; zero-mass symbols yield zero rows."""
        if side == "x":
            mass = self.marginal_x
            table = self.p
        elif side == "y":
            mass = self.marginal_y
            table = self.p.T
        else:
            raise ValueError("side must be 'x' or 'y'")
        out = np.zeros_like(table)
        pos = mass > 0
        out[pos] = table[pos] / mass[pos, None]
        return out

    def to_tensor(self, name_x: str = "x", name_y: str = "y") -> "TensorPMF":
        return TensorPMF(
            names=(name_x, name_y),
            alphabets=(self.alphabet_x, self.alphabet_y),
            p=self.p,
        )

    def to_json(self) -> dict:
        return {
            "x": list(self.alphabet_x.symbols),
            "y": list(self.alphabet_y.symbols),
            "p": self.p.tolist(),
        }

    @staticmethod
    def from_json(obj: dict) -> "JointPMF":
        return validate_pmf(obj["p"], obj["x"], obj["y"])


def validate_pmf(
    raw_matrix: Sequence[Sequence[float]],
    labels_x: Sequence[str] | None = None,
    labels_y: Sequence[str] | None = None,
) -> JointPMF:
    """Validate and normalize a raw probability matrix.

    Negative entries are rejected; a total differing from 1 by more than
    1e-6 is rejected; otherwise the matrix is renormalized exactly. Zero
    rows/columns are retained and reported in the diagnostics fields.
    """
    p = np.asarray(raw_matrix, dtype=float)
    if p.ndim != 2 or p.size == 0:
        raise EmptyMatrix(f"expected a nonempty 2-d matrix, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("probability entries must be finite")
    if np.any(p < 0):
        raise NegativeMass(f"negative entries at {np.argwhere(p < 0).tolist()}")
    total = float(p.sum())
    if total == 0.0:
        raise EmptyMatrix("matrix carries no mass")
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise NotNormalized(f"total mass {total} differs from 1 by more than {NORMALIZATION_TOL}")
    p = p / total
    if labels_x is None:
        labels_x = [str(i) for i in range(p.shape[0])]
    if labels_y is None:
        labels_y = [str(i) for i in range(p.shape[1])]
    ax = FiniteAlphabet(tuple(labels_x))
    ay = FiniteAlphabet(tuple(labels_y))
    if (ax.size, ay.size) != p.shape:
        raise ValueError(f"label counts {(ax.size, ay.size)} do not match matrix shape {p.shape}")
    zero_x = tuple(s for s, m in zip(ax.symbols, p.sum(axis=1)) if m == 0.0)
    zero_y = tuple(s for s, m in zip(ay.symbols, p.sum(axis=0)) if m == 0.0)
    return JointPMF(ax, ay, _readonly(p), zero_x, zero_y)


def load_pmf(path: str) -> JointPMF:
    """Read a pmf from JSON: {"x": [...], "y": [...], "p": [[...], ...]}."""
    with open(path) as fh:
        return JointPMF.from_json(json.load(fh))


def save_pmf(pmf: JointPMF, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(pmf.to_json(), fh, indent=2)


@dataclass(frozen=True)
class TensorPMF:
    """Joint distribution over two or more named finite axes."""

    names: tuple[str, ...]
    alphabets: tuple[FiniteAlphabet, ...]
    p: np.ndarray

    def __post_init__(self):
        names = tuple(self.names)
        alphabets = tuple(self.alphabets)
        p = np.asarray(self.p, dtype=float)
        if len(names) < 2:
            raise ValueError("a TensorPMF needs at least two axes")
        if len(set(names)) != len(names):
            raise ValueError(f"axis names must be unique, got {names}")
        if len(names) != len(alphabets) or p.ndim != len(names):
            raise ValueError("names, alphabets and tensor rank must agree")
        for n, a, s in zip(names, alphabets, p.shape):
            if a.size != s:
                raise ValueError(f"axis {n!r}: alphabet size {a.size} != dim {s}")
        if np.any(p < 0):
            raise NegativeMass("negative entries in tensor")
        total = float(p.sum())
        if total == 0.0:
            raise EmptyMatrix("tensor carries no mass")
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise NotNormalized(f"total mass {total} differs from 1 by more than {NORMALIZATION_TOL}")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "alphabets", alphabets)
        object.__setattr__(self, "p", _readonly(p / total))

    @property
    def arity(self) -> int:
        return len(self.names)

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownAxis(f"axis {name!r} not in {self.names}") from None

    def axes(self, subset: AxisSpec) -> tuple[int, ...]:
        if isinstance(subset, str):
            subset = (subset,)
        idx = tuple(self.axis(n) for n in subset)
        if len(set(idx)) != len(idx):
            raise OverlappingAxes(f"repeated axis in {tuple(subset)}")
        return idx

    def marginal_array(self, subset: AxisSpec) -> np.ndarray:
        """Dense marginal on `subset`, axes ordered as in the tensor."""
        keep = sorted(self.axes(subset))
        drop = tuple(i for i in range(self.arity) if i not in keep)
        return self.p.sum(axis=drop) if drop else self.p

    def with_function_axis(
        self, source_axis: str, class_of: Sequence[int], name: str,
        labels: Sequence[str] | None = None,
    ) -> "TensorPMF":
        """Append a deterministic axis computed symbolwise from `source_axis`."""
        src = self.axis(source_axis)
        class_of = np.asarray(class_of, dtype=int)
        if class_of.shape != (self.p.shape[src],):
            raise ValueError("class map length must match the source axis size")
        n_cls = int(class_of.max()) + 1 if class_of.size else 0
        ind = np.zeros((self.p.shape[src], n_cls))
        ind[np.arange(class_of.size), class_of] = 1.0
        shape = [1] * self.arity + [n_cls]
        shape[src] = self.p.shape[src]
        new_p = self.p[..., None] * ind.reshape(shape)
        alpha = FiniteAlphabet(tuple(labels) if labels is not None
                               else tuple(str(i) for i in range(n_cls)))
        return TensorPMF(self.names + (name,), self.alphabets + (alpha,), new_p)


def _plogp_sum(arr: np.ndarray) -> float:
    pos = arr[arr > 0]
    return float((pos * np.log2(pos)).sum())


def entropy(t: TensorPMF, subset: AxisSpec) -> float:
    """Shannon entropy in bits of the marginal on `subset`."""
    idx = t.axes(subset)
    if not idx:
        raise UnknownAxis("entropy needs a nonempty axis subset")
    return -_plogp_sum(t.marginal_array(subset)) + 0.0


def conditional_entropy(t: TensorPMF, target: AxisSpec, given: AxisSpec = ()) -> float:
    """H(target | given) = H(target, given) - H(given), clamped at 0."""
    ti = t.axes(target)
    gi = t.axes(given)
    if set(ti) & set(gi):
        raise OverlappingAxes("target and conditioning axes overlap")
    if not ti:
        raise UnknownAxis("conditional_entropy needs a nonempty target")
    names = t.names
    joint = -_plogp_sum(t.marginal_array([names[i] for i in ti + gi]))
    if not gi:
        return joint
    h_given = -_plogp_sum(t.marginal_array([names[i] for i in gi]))
    return max(joint - h_given, 0.0)


def mutual_information(t: TensorPMF, axes_a: AxisSpec, axes_b: AxisSpec) -> float:
    """I(A; B) = H(A) + H(B) - H(A, B) in bits, clamped at 0."""
    ai = t.axes(axes_a)
    bi = t.axes(axes_b)
    if set(ai) & set(bi):
        raise OverlappingAxes("the two axis groups overlap")
    if not ai or not bi:
        raise UnknownAxis("mutual_information needs two nonempty groups")
    names = t.names
    h_a = -_plogp_sum(t.marginal_array([names[i] for i in ai]))
    h_b = -_plogp_sum(t.marginal_array([names[i] for i in bi]))
    h_ab = -_plogp_sum(t.marginal_array([names[i] for i in ai + bi]))
    return max(h_a + h_b - h_ab, 0.0)


def conditional_mutual_information(
    t: TensorPMF, axes_a: AxisSpec, axes_b: AxisSpec, given: AxisSpec = ()
) -> float:
    """I(A; B | C) = H(A,C) + H(B,C) - H(C) - H(A,B,C), clamped at 0."""
    ai = t.axes(axes_a)
    bi = t.axes(axes_b)
    ci = t.axes(given)
    groups = [set(ai), set(bi), set(ci)]
    if (groups[0] & groups[1]) or (groups[0] & groups[2]) or (groups[1] & groups[2]):
        raise OverlappingAxes("axis groups must be pairwise disjoint")
    if not ai or not bi:
        raise UnknownAxis("conditional_mutual_information needs two nonempty groups")
    if not ci:
        return mutual_information(t, axes_a, axes_b)
    names = t.names
    h_ac = -_plogp_sum(t.marginal_array([names[i] for i in ai + ci]))
    h_bc = -_plogp_sum(t.marginal_array([names[i] for i in bi + ci]))
    h_c = -_plogp_sum(t.marginal_array([names[i] for i in ci]))
    h_abc = -_plogp_sum(t.marginal_array([names[i] for i in ai + bi + ci]))
    return max(h_ac + h_bc - h_c - h_abc, 0.0)


def binary_entropy(p: float) -> float:
    """h(p) in bits with h(0) = h(1) = 0.

    The complement is canonicalized through max(p, 1-p) so that h(p) and
    h(1-p) evaluate bitwise identically in floating point.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"binary_entropy needs p in [0, 1], got {p}")
    hi = max(p, 1.0 - p)
    lo = 1.0 - hi
    if lo == 0.0:
        return 0.0
    return float(-(lo * math.log2(lo) + hi * math.log2(hi)))
