"""On-disk and wire formats.

Tensor/matrix JSON: ``{"shape": [...], "data": "<base64>"}`` where the data
is the row-major bit string packed LSB-first within each byte. A plain-text
alternative has the shape on the first line (space-separated sizes) followed
by 0/1 characters in row-major order; whitespace is ignored.

QUBO JSON (also the remote-solver wire payload):
``{"n": int, "offset": float, "linear": {"i": c}, "quadratic": {"i,j": c}}``.

Decomposition-tree JSON is recursive: internal nodes are
``{"core": <tensor>, "rank": q, "left": ..., "right": ...}``, leaves are
``{"leaf": <matrix>, "rank": q}``.
"""

from __future__ import annotations

import base64
import json
from typing import Any

import numpy as np

from .boolcore import BitMatrix, BitTensor, BitVector

__all__ = [
    "ParseError",
    "tensor_to_obj",
    "tensor_from_obj",
    "tensor_to_text",
    "tensor_from_text",
    "load_tensor",
    "save_tensor",
    "qubo_to_obj",
    "qubo_from_obj",
    "tree_to_obj",
    "tree_from_obj",
]


class ParseError(ValueError):
    """Malformed serialized input."""


def _bit_class(ndim: int):
    return BitMatrix if ndim == 2 else BitVector if ndim == 1 else BitTensor


def tensor_to_obj(t: BitTensor) -> dict[str, Any]:
    packed = np.packbits(t.flat(), bitorder="little")
    return {
        "shape": list(t.shape),
        "data": base64.b64encode(packed.tobytes()).decode("ascii"),
    }


def tensor_from_obj(obj: Any) -> BitTensor:
    if not isinstance(obj, dict) or "shape" not in obj or "data" not in obj:
        raise ParseError("tensor object must have 'shape' and 'data' fields")
    try:
        shape = [int(s) for s in obj["shape"]]
        raw = base64.b64decode(obj["data"], validate=True)
    except (TypeError, ValueError) as e:
        raise ParseError(f"bad tensor payload: {e}") from None
    size = int(np.prod(shape, dtype=np.int64)) if shape else 0
    if len(raw) != (size + 7) // 8:
        raise ParseError(f"packed data has {len(raw)} bytes, expected {(size + 7) // 8}")
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little", count=size)
    try:
        return _bit_class(len(shape))(bits, shape=shape)
    except ValueError as e:
        raise ParseError(str(e)) from None


def tensor_to_text(t: BitTensor) -> str:
    shape_line = " ".join(str(s) for s in t.shape)
    bits = "".join("1" if b else "0" for b in t.flat().tolist())
    # wrap long rows for readability; readers ignore whitespace
    chunks = [bits[i : i + 64] for i in range(0, len(bits), 64)]
    return shape_line + "\n" + "\n".join(chunks) + "\n"


def tensor_from_text(text: str) -> BitTensor:
    lines = text.strip().splitlines()
    if not lines:
        raise ParseError("empty tensor text")
    try:
        shape = [int(s) for s in lines[0].split()]
    except ValueError:
        raise ParseError(f"bad shape line: {lines[0]!r}") from None
    if not shape:
        raise ParseError("empty shape line")
    body = "".join(lines[1:]).translate({ord(c): None for c in " \t"})
    if set(body) - {"0", "1"}:
        raise ParseError("tensor body must contain only 0/1 characters")
    size = int(np.prod(shape, dtype=np.int64))
    if len(body) != size:
        raise ParseError(f"got {len(body)} bits, shape {shape} needs {size}")
    bits = np.frombuffer(body.encode("ascii"), dtype=np.uint8) - ord("0")
    try:
        return _bit_class(len(shape))(bits, shape=shape)
    except ValueError as e:
        raise ParseError(str(e)) from None


def load_tensor(path: str) -> BitTensor:
    """Read a tensor from JSON or text (sniffed from the first character)."""
    with open(path) as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON: {e}") from None
        return tensor_from_obj(obj)
    return tensor_from_text(text)


def save_tensor(t: BitTensor, path: str, fmt: str = "json") -> None:
    with open(path, "w") as fh:
        if fmt == "json":
            json.dump(tensor_to_obj(t), fh)
            fh.write("\n")
        elif fmt == "text":
            fh.write(tensor_to_text(t))
        else:
            raise ValueError(f"unknown format {fmt!r}")


def qubo_to_obj(q) -> dict[str, Any]:
    return {
        "n": q.num_vars,
        "offset": q.offset,
        "linear": {str(i): c for i, c in sorted(q.linear.items())},
        "quadratic": {f"{i},{j}": c for (i, j), c in sorted(q.quadratic.items())},
    }


def qubo_from_obj(obj: Any):
    from .hubo import QuboModel  # local import to avoid a cycle

    if not isinstance(obj, dict):
        raise ParseError("QUBO payload must be an object")
    try:
        n = int(obj["n"])
        offset = float(obj.get("offset", 0.0))
        linear = {int(k): float(v) for k, v in obj.get("linear", {}).items()}
        quadratic = {}
        for k, v in obj.get("quadratic", {}).items():
            i, j = (int(p) for p in k.split(","))
            quadratic[(i, j)] = float(v)
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise ParseError(f"bad QUBO payload: {e}") from None
    try:
        return QuboModel(n, linear, quadratic, offset)
    except ValueError as e:
        raise ParseError(str(e)) from None


def tree_to_obj(tree) -> dict[str, Any]:
    from .htn import Leaf

    def node_obj(node):
        if isinstance(node, Leaf):
            return {"leaf": tensor_to_obj(node.matrix), "rank": node.matrix.cols}
        return {
            "core": tensor_to_obj(node.core),
            "rank": node.core.shape[0],
            "left": node_obj(node.left),
            "right": node_obj(node.right),
        }

    return {"shape": list(tree.shape), "root": node_obj(tree.root)}


def tree_from_obj(obj: Any):
    from .htn import HtnTree, Internal, Leaf

    if not isinstance(obj, dict) or "root" not in obj or "shape" not in obj:
        raise ParseError("tree object must have 'shape' and 'root' fields")

    def node_from(o):
        if not isinstance(o, dict):
            raise ParseError("tree node must be an object")
        if "leaf" in o:
            m = tensor_from_obj(o["leaf"])
            if not isinstance(m, BitMatrix):
                raise ParseError("leaf payload must be a matrix")
            return Leaf(m)
        if "core" not in o or "left" not in o or "right" not in o:
            raise ParseError("internal node needs 'core', 'left' and 'right'")
        core = tensor_from_obj(o["core"])
        if core.order != 3:
            raise ParseError("core payload must be an order-3 tensor")
        return Internal(core, node_from(o["left"]), node_from(o["right"]))

    try:
        shape = tuple(int(s) for s in obj["shape"])
    except (TypeError, ValueError):
        raise ParseError("bad tree shape") from None
    tree = HtnTree(node_from(obj["root"]), shape)
    try:
        tree.validate()
    except ValueError as e:
        raise ParseError(str(e)) from None
    return tree
