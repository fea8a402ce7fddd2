"""Boolean (OR-AND semiring) tensors, matrices and vectors.

Conventions used throughout the library:

* entries live in {0, 1}, stored as ``uint8``;
* addition saturates (1 + 1 = 1), multiplication is AND;
* all linearizations are row-major (first index slowest), so a reshape
  never moves data.

Values are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ShapeError",
    "BitTensor",
    "BitMatrix",
    "BitVector",
    "bool_matmul",
    "bool_matvec",
    "hamming",
    "reshape",
    "matricize_split",
    "move_q_to_rows",
    "tensor_contract",
]


class ShapeError(ValueError):
    """Shapes or dimensions are inconsistent for the requested operation."""


def _coerce_bits(data, shape: Sequence[int] | None, ndim: int | None) -> np.ndarray:
    arr = np.asarray(data)
    if arr.dtype == object:
        raise ShapeError("bit data must be numeric")
    if arr.ndim == 0:
        raise ShapeError("order-0 tensors are not supported")
    if arr.dtype == np.uint8:
        if arr.size and int(arr.max()) > 1:
            raise ShapeError("entries must be 0 or 1")
    else:
        if arr.size and not bool(((arr == 0) | (arr == 1)).all()):
            raise ShapeError("entries must be 0 or 1")
        arr = arr.astype(np.uint8)
    arr = np.ascontiguousarray(arr)
    if shape is not None:
        shape = tuple(int(s) for s in shape)
        if arr.size != int(np.prod(shape, dtype=np.int64)):
            raise ShapeError(f"data length {arr.size} does not match shape {shape}")
        arr = arr.reshape(shape)
    if ndim is not None and arr.ndim != ndim:
        raise ShapeError(f"expected {ndim}-dimensional data, got {arr.ndim}-dimensional")
    if any(s < 1 for s in arr.shape):
        raise ShapeError(f"dimension sizes must be >= 1, got shape {arr.shape}")
    return arr


class BitTensor:
    """Dense Boolean multiway array with an explicit shape."""

    __slots__ = ("a",)
    _ndim: int | None = None

    def __init__(self, data, shape: Sequence[int] | None = None):
        arr = _coerce_bits(data, shape, self._ndim)
        arr.setflags(write=False)
        object.__setattr__(self, "a", arr)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    @property
    def shape(self) -> tuple[int, ...]:
        return self.a.shape

    @property
    def order(self) -> int:
        return self.a.ndim

    @property
    def size(self) -> int:
        return self.a.size

    def count_ones(self) -> int:
        return int(self.a.sum())

    def reshape(self, new_shape: Iterable[int]) -> "BitTensor":
        return reshape(self, new_shape)

    def flat(self) -> np.ndarray:
        """Row-major linearized copy-free view of the bits."""
        return self.a.reshape(-1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitTensor):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.a, other.a))

    def __hash__(self):
        return hash((self.shape, self.a.tobytes()))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(shape={self.shape}, ones={self.count_ones()})"


class BitMatrix(BitTensor):
    """2-D Boolean array; factors and matricizations."""

    __slots__ = ()
    _ndim = 2

    @property
    def rows(self) -> int:
        return self.a.shape[0]

    @property
    def cols(self) -> int:
        return self.a.shape[1]

    @property
    def T(self) -> "BitMatrix":
        return BitMatrix(np.ascontiguousarray(self.a.T))

    def column(self, i: int) -> "BitVector":
        return BitVector(self.a[:, i])

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(np.eye(n, dtype=np.uint8))


class BitVector(BitTensor):
    """1-D Boolean array."""

    __slots__ = ()
    _ndim = 1

    def __len__(self) -> int:
        return self.a.shape[0]

    def as_int(self) -> int:
        """Integer value of the bits with index 0 as the least-significant bit."""
        v = 0
        for i, b in enumerate(self.a.tolist()):
            v |= b << i
        return v


def _bool_mm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # numpy's bool matmul is exactly the OR-AND semiring product
    return (a.view(bool) @ b.view(bool)).astype(np.uint8)


def bool_matmul(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    """Boolean matrix product: out[i,j] = OR_l (a[i,l] AND b[l,j])."""
    if a.cols != b.rows:
        raise ShapeError(f"inner dimensions disagree: {a.shape} x {b.shape}")
    return BitMatrix(_bool_mm(a.a, b.a))


def bool_matvec(a: BitMatrix, y: BitVector) -> BitVector:
    """Column case of :func:`bool_matmul`."""
    if a.cols != len(y):
        raise ShapeError(f"matrix {a.shape} incompatible with vector of length {len(y)}")
    return BitVector(_bool_mm(a.a, y.a.reshape(-1, 1)).reshape(-1))


def hamming(x: BitTensor, y: BitTensor) -> int:
    """Number of positions where two same-shape values differ."""
    if x.shape != y.shape:
        raise ShapeError(f"shape mismatch: {x.shape} vs {y.shape}")
    return int(np.count_nonzero(x.a != y.a))


def reshape(t: BitTensor, new_shape: Iterable[int]) -> BitTensor:
    """Same row-major data, new shape."""
    new_shape = tuple(int(s) for s in new_shape)
    if int(np.prod(new_shape, dtype=np.int64)) != t.size:
        raise ShapeError(f"cannot reshape {t.shape} (size {t.size}) to {new_shape}")
    cls = BitMatrix if len(new_shape) == 2 else BitVector if len(new_shape) == 1 else BitTensor
    return cls(t.a.reshape(new_shape))


def matricize_split(t: BitTensor, split: int) -> BitMatrix:
    """Unfold a tensor (n_1,..,n_s,q) into a matrix at mode ``split``.

    Rows are indexed by the row-major linearization of the first ``split``
    dimensions, columns by the remaining dimensions including the trailing
    connector q. Pure reshape: row-major data is already grouped this way.
    """
    s = t.order - 1
    if not 1 <= split < s:
        raise ShapeError(f"split must satisfy 1 <= split < {s} for shape {t.shape}")
    rows = int(np.prod(t.shape[:split], dtype=np.int64))
    cols = t.size // rows
    return BitMatrix(t.a.reshape(rows, cols))


def move_q_to_rows(m: BitMatrix, col_dims: Sequence[int], q: int, r: int) -> BitMatrix:
    """Move the trailing connector dimension q from columns to rows.

    ``m`` has r rows and columns indexed row-major by (*col_dims, q); the
    result has q*r rows (combined index i_q*r + i_r, q slowest) and columns
    indexed row-major by col_dims alone.
    """
    col_dims = tuple(int(d) for d in col_dims)
    ncols = int(np.prod(col_dims, dtype=np.int64))
    if m.rows != r or m.cols != ncols * q:
        raise ShapeError(
            f"matrix {m.shape} inconsistent with r={r}, col_dims={col_dims}, q={q}"
        )
    t = m.a.reshape(r, *col_dims, q)
    perm = (t.ndim - 1, 0, *range(1, t.ndim - 1))  # (q, r, *col_dims)
    return BitMatrix(np.ascontiguousarray(t.transpose(perm)).reshape(q * r, ncols))


def tensor_contract(core: BitTensor, left: BitTensor, right: BitTensor) -> BitTensor:
    """Contract an order-3 core with its two children over the semiring.

    out[i.., j.., c] = OR_{a,b} left[i.., a] AND core[c, a, b] AND right[j.., b]
    """
    if core.order != 3:
        raise ShapeError(f"core must be order 3, got shape {core.shape}")
    q, r1, r2 = core.shape
    if left.shape[-1] != r1 or right.shape[-1] != r2:
        raise ShapeError(
            f"child ranks {left.shape[-1]}/{right.shape[-1]} do not match core {core.shape}"
        )
    lmat = left.a.reshape(-1, r1)
    rmat = right.a.reshape(-1, r2)
    slabs = [_bool_mm(_bool_mm(lmat, core.a[c]), rmat.T) for c in range(q)]
    out = np.stack(slabs, axis=-1)  # (prod(left), prod(right), q)
    return BitTensor(out.reshape(*left.shape[:-1], *right.shape[:-1], q))
