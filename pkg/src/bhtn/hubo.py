"""Column objectives as pseudo-Boolean polynomials, and their quadratization.

The single-column factorization subproblem asks for y in {0,1}^r minimizing
the Hamming distance d(x, A y) over the OR-AND semiring. Writing T/F for the
index sets where the target column x is 1/0, and S_j for the support of row
j of A,

    d(x, A y) = C - sum_{j in T} f_j + sum_{j in F} f_j,

where C = popcount(x) and f_j = 1 - prod_{l in S_j} (1 - y_l) is 1 iff row j
fires. Expanding every f_j by inclusion-exclusion yields an exact multilinear
polynomial in y (a HUBO). Rows with an empty support never fire and drop out.

A HUBO of degree > 2 is reduced to a QUBO by repeated pair substitution: the
variable pair occurring in the most degree->=3 terms is replaced by a fresh
auxiliary z with the penalty strength*(x_i x_j - 2 z x_i - 2 z x_j + 3 z),
which is 0 when z = x_i x_j and >= strength otherwise.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from .boolcore import BitMatrix, BitVector, ShapeError

__all__ = [
    "Assignment",
    "ExpansionLimitError",
    "HuboPoly",
    "QuboModel",
    "build_column_hubo",
    "eval_hubo",
    "hubo_energies",
    "hubo_to_qubo",
    "default_strength",
    "eval_qubo",
    "qubo_energies",
    "induced_assignment",
]

DEFAULT_ROW_WEIGHT_CAP = 20

# an assignment is a bit vector over a model's variables; evaluation helpers
# also accept any 0/1 array-like of the right length
Assignment = BitVector


class ExpansionLimitError(ValueError):
    """A row support is too wide to expand by inclusion-exclusion."""


def _as_bits(y, n: int) -> np.ndarray:
    arr = y.a if isinstance(y, BitVector) else np.asarray(y, dtype=np.uint8)
    if arr.ndim != 1 or arr.shape[0] != n:
        raise ShapeError(f"assignment must have length {n}, got shape {arr.shape}")
    return arr


class HuboPoly:
    """Multilinear pseudo-Boolean polynomial over ``num_vars`` variables.

    ``terms`` maps sorted variable-index tuples to coefficients; the empty
    tuple is the constant term. Zero coefficients are dropped.
    """

    __slots__ = ("num_vars", "terms")

    def __init__(self, num_vars: int, terms: Mapping[tuple[int, ...], float]):
        num_vars = int(num_vars)
        if num_vars < 1:
            raise ValueError("a polynomial needs at least one variable")
        clean: dict[tuple[int, ...], float] = {}
        for key, coef in terms.items():
            key = tuple(sorted(int(v) for v in key))
            if len(set(key)) != len(key):
                raise ValueError(f"duplicate variable in term {key}")
            if key and (key[0] < 0 or key[-1] >= num_vars):
                raise ValueError(f"term {key} out of range for {num_vars} variables")
            coef = float(coef)
            if coef != 0.0:
                clean[key] = clean.get(key, 0.0) + coef
                if clean[key] == 0.0:
                    del clean[key]
        self.num_vars = num_vars
        self.terms = clean

    @classmethod
    def _trusted(cls, num_vars: int, terms: dict[tuple[int, ...], float]) -> "HuboPoly":
        # construction bypass for callers that already produce canonical terms
        self = object.__new__(cls)
        self.num_vars = num_vars
        self.terms = terms
        return self

    @property
    def degree(self) -> int:
        return max((len(k) for k in self.terms), default=0)

    @property
    def constant(self) -> float:
        return self.terms.get((), 0.0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HuboPoly):
            return NotImplemented
        return self.num_vars == other.num_vars and self.terms == other.terms

    def __repr__(self) -> str:
        return f"HuboPoly(num_vars={self.num_vars}, nterms={len(self.terms)}, degree={self.degree})"


class QuboModel:
    """Quadratic pseudo-Boolean objective with auxiliary-variable bookkeeping.

    Variables [0, num_original) are the problem's own; each auxiliary
    z in aux_map represents the product of its recorded pair. ``linear`` and
    ``quadratic`` (keys i < j) hold the coefficients, ``offset`` the constant.
    """

    __slots__ = ("num_vars", "linear", "quadratic", "offset", "aux_map")

    def __init__(
        self,
        num_vars: int,
        linear: Mapping[int, float],
        quadratic: Mapping[tuple[int, int], float],
        offset: float = 0.0,
        aux_map: Mapping[int, tuple[int, int]] | None = None,
    ):
        num_vars = int(num_vars)
        if num_vars < 1:
            raise ValueError("a model needs at least one variable")
        aux_map = dict(aux_map or {})
        n_aux = len(aux_map)
        expected_aux = set(range(num_vars - n_aux, num_vars))
        if set(aux_map) != expected_aux:
            raise ValueError("auxiliary ids must be the trailing variable ids, each exactly once")
        for z, (i, j) in aux_map.items():
            if not (0 <= i < j < z):
                raise ValueError(f"auxiliary {z} must represent a pair of earlier variables, got ({i},{j})")
        lin = {}
        for i, c in linear.items():
            i = int(i)
            if not 0 <= i < num_vars:
                raise ValueError(f"linear index {i} out of range")
            if float(c) != 0.0:
                lin[i] = float(c)
        quad = {}
        for (i, j), c in quadratic.items():
            i, j = int(i), int(j)
            if not 0 <= i < j < num_vars:
                raise ValueError(f"quadratic key ({i},{j}) must satisfy 0 <= i < j < {num_vars}")
            if float(c) != 0.0:
                quad[(i, j)] = float(c)
        self.num_vars = num_vars
        self.linear = lin
        self.quadratic = quad
        self.offset = float(offset)
        self.aux_map = {int(z): (int(i), int(j)) for z, (i, j) in aux_map.items()}

    @property
    def num_original(self) -> int:
        return self.num_vars - len(self.aux_map)

    def dense(self) -> tuple[np.ndarray, np.ndarray]:
        """(h, W): linear vector and symmetric zero-diagonal coupling matrix."""
        n = self.num_vars
        h = np.zeros(n)
        for i, c in self.linear.items():
            h[i] = c
        W = np.zeros((n, n))
        for (i, j), c in self.quadratic.items():
            W[i, j] = c
            W[j, i] = c
        return h, W

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuboModel):
            return NotImplemented
        return (
            self.num_vars == other.num_vars
            and self.linear == other.linear
            and self.quadratic == other.quadratic
            and self.offset == other.offset
            and self.aux_map == other.aux_map
        )

    def __repr__(self) -> str:
        return (
            f"QuboModel(num_vars={self.num_vars}, aux={len(self.aux_map)}, "
            f"nlin={len(self.linear)}, nquad={len(self.quadratic)})"
        )


def _mask_to_key(mask: int) -> tuple[int, ...]:
    key = []
    l = 0
    while mask:
        if mask & 1:
            key.append(l)
        mask >>= 1
        l += 1
    return tuple(key)


def build_column_hubo(
    a: BitMatrix, x_col: BitVector, max_row_weight: int = DEFAULT_ROW_WEIGHT_CAP
) -> HuboPoly:
    """Exact polynomial for the column objective d(x_col, a . y).

    Evaluating the result at any assignment y equals
    ``hamming(x_col, bool_matvec(a, y))``. Rows whose support is wider than
    ``max_row_weight`` are rejected: a width-w support expands into 2^w - 1
    monomials.
    """
    if a.rows != len(x_col):
        raise ShapeError(f"matrix has {a.rows} rows but column has {len(x_col)}")
    r = a.cols
    masks = (a.a.astype(np.int64) @ (1 << np.arange(r, dtype=np.int64))).tolist()
    xbits = x_col.a.tolist()

    # net inclusion-exclusion weight per distinct row support:
    # +1 for rows where x is 0, -1 where x is 1
    net: dict[int, int] = {}
    for mask, xb in zip(masks, xbits):
        if mask:
            net[mask] = net.get(mask, 0) + (1 - 2 * xb)

    coeffs: dict[int, int] = {}
    for mask, w in net.items():
        width = mask.bit_count()
        if width > max_row_weight:
            j = masks.index(mask)
            raise ExpansionLimitError(
                f"row {j} has weight {width} > cap {max_row_weight} "
                f"({2 ** width - 1} monomials would be generated); "
                "raise max_row_weight to force the expansion"
            )
        if w == 0:
            continue
        sub = mask
        while sub:
            # f = sum over nonempty U of (-1)^(|U|+1) prod_U y, weighted by net
            coeffs[sub] = coeffs.get(sub, 0) + (w if (sub.bit_count() & 1) else -w)
            sub = (sub - 1) & mask

    terms: dict[tuple[int, ...], float] = {}
    c0 = sum(xbits)
    if c0:
        terms[()] = float(c0)
    for mask, c in coeffs.items():
        if c:
            terms[_mask_to_key(mask)] = float(c)
    return HuboPoly._trusted(r, terms)


def eval_hubo(p: HuboPoly, y) -> float:
    """Value of the polynomial at one assignment."""
    bits = _as_bits(y, p.num_vars).tolist()
    total = 0.0
    for key, coef in p.terms.items():
        prod = 1
        for l in key:
            if not bits[l]:
                prod = 0
                break
        if prod:
            total += coef
    return total


def _all_assignments(n: int) -> np.ndarray:
    ks = np.arange(1 << n, dtype=np.int64)
    return ((ks[:, None] >> np.arange(n, dtype=np.int64)[None, :]) & 1).astype(np.uint8)


def hubo_energies(p: HuboPoly) -> np.ndarray:
    """Energies at all 2^num_vars assignments, indexed by assignment value.

    Assignment value k has bit l of k as variable l (bit 0 least significant).
    Computed by a superset-sum (zeta) transform of the coefficient table:
    energy(k) = sum of coefficients over term masks contained in k.
    """
    n = p.num_vars
    g = np.zeros(1 << n)
    for key, coef in p.terms.items():
        m = 0
        for l in key:
            m |= 1 << l
        g[m] += coef
    for i in range(n):
        view = g.reshape(-1, 2, 1 << i)
        view[:, 1, :] += view[:, 0, :]
    return g


def default_strength(p: HuboPoly) -> float:
    """Largest absolute coefficient (constant included); 1 for an empty polynomial."""
    if not p.terms:
        return 1.0
    return max(abs(c) for c in p.terms.values())


def hubo_to_qubo(p: HuboPoly, strength: float) -> QuboModel:
    """Reduce to degree <= 2 by iterated most-frequent-pair substitution.

    Each round picks the pair occurring in the largest number of degree->=3
    terms (ties: lowest lexicographic pair), replaces it everywhere in those
    terms by a fresh auxiliary z and adds the penalty
    ``strength * (x_i x_j - 2 z x_i - 2 z x_j + 3 z)``.
    """
    strength = float(strength)
    if strength <= 0.0:
        raise ValueError("strength must be positive")
    nv = p.num_vars
    terms: dict[int, float] = {}
    for key, coef in p.terms.items():
        mask = 0
        for l in key:
            mask |= 1 << l
        terms[mask] = terms.get(mask, 0.0) + coef

    aux_map: dict[int, tuple[int, int]] = {}
    while True:
        counts: dict[tuple[int, int], int] = {}
        for mask in terms:
            if mask.bit_count() < 3:
                continue
            idx = _mask_to_key(mask)
            for ii in range(len(idx)):
                for jj in range(ii + 1, len(idx)):
                    pair = (idx[ii], idx[jj])
                    counts[pair] = counts.get(pair, 0) + 1
        if not counts:
            break
        best_pair = min(counts, key=lambda pr: (-counts[pr], pr))
        i, j = best_pair
        z = nv
        nv += 1
        aux_map[z] = (i, j)
        pair_mask = (1 << i) | (1 << j)
        zbit = 1 << z
        rewritten: dict[int, float] = {}
        for mask, coef in terms.items():
            if mask.bit_count() >= 3 and (mask & pair_mask) == pair_mask:
                mask = (mask & ~pair_mask) | zbit
            rewritten[mask] = rewritten.get(mask, 0.0) + coef
        terms = {m: c for m, c in rewritten.items() if c != 0.0}
        for m, c in (
            (pair_mask, strength),
            ((1 << i) | zbit, -2.0 * strength),
            ((1 << j) | zbit, -2.0 * strength),
            (zbit, 3.0 * strength),
        ):
            terms[m] = terms.get(m, 0.0) + c
            if terms[m] == 0.0:
                del terms[m]

    offset = 0.0
    linear: dict[int, float] = {}
    quadratic: dict[tuple[int, int], float] = {}
    for mask, coef in terms.items():
        deg = mask.bit_count()
        if deg == 0:
            offset += coef
        elif deg == 1:
            linear[mask.bit_length() - 1] = linear.get(mask.bit_length() - 1, 0.0) + coef
        else:
            i, j = _mask_to_key(mask)
            quadratic[(i, j)] = quadratic.get((i, j), 0.0) + coef
    return QuboModel(nv, linear, quadratic, offset, aux_map)


def eval_qubo(q: QuboModel, x) -> float:
    """Quadratic value plus offset at one assignment over all model variables."""
    bits = _as_bits(x, q.num_vars).tolist()
    total = q.offset
    for i, c in q.linear.items():
        if bits[i]:
            total += c
    for (i, j), c in q.quadratic.items():
        if bits[i] and bits[j]:
            total += c
    return total


def qubo_energies(q: QuboModel) -> np.ndarray:
    """Energies at all 2^num_vars assignments, indexed by assignment value."""
    n = q.num_vars
    X = _all_assignments(n).astype(np.float64)
    h, W = q.dense()
    return q.offset + X @ h + 0.5 * np.einsum("ki,ki->k", X @ W, X)


def induced_assignment(q: QuboModel, original) -> np.ndarray:
    """Extend original-variable bits with every auxiliary set to its product.

    Auxiliaries are resolved in ascending id order; each pair only references
    earlier variables, so the result is the penalty-free completion.
    """
    orig = _as_bits(original, q.num_original)
    full = np.zeros(q.num_vars, dtype=np.uint8)
    full[: q.num_original] = orig
    for z in sorted(q.aux_map):
        i, j = q.aux_map[z]
        full[z] = full[i] & full[j]
    return full
