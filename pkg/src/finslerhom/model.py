"""Line-oriented model files.

Example::

    # Randers metric on the Heisenberg algebra
    dim 3
    bracket e1 e2 = e3
    metric identity
    x 0, 0, 0.5
    phi randers

Statements are separated by newlines or ``;``; ``#`` starts a comment.
Keys: ``algebra``, ``dim``, ``labels``, ``bracket``, ``h``, ``m``,
``metric``, ``x``, ``phi``, ``b0``, ``tol``. A repeated key overrides the
earlier value (``bracket``, which accumulates, excepted).
"""
from __future__ import annotations

import ast
import math
import operator
import re
from dataclasses import dataclass

import numpy as np

from .alpha_beta import AlphaBetaMetric, PhiFunction
from .errors import FinslerError, ModelError
from .lie_core import LieAlgebra, ReductiveDecomposition, catalog, check_jacobi
from .metric_core import InnerProduct

_IDENT = re.compile(r"[A-Za-z_]\w*\Z")
_SQRT_ATOM = re.compile(r"√\s*(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|[A-Za-z_]\w*)")
_SQRT_PAREN = re.compile(r"√\s*\(")

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_FUNCS = {"sqrt": math.sqrt}
_CONSTS = {"pi": math.pi, "inf": math.inf}


class _ExprError(ValueError):
    def __init__(self, message, offset=0):
        super().__init__(message)
        self.offset = offset


def _normalize_expr(text):
    text = _SQRT_PAREN.sub("sqrt(", text)
    return _SQRT_ATOM.sub(r"sqrt(\1)", text)


def _eval_node(node, labels):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body, labels)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return float(node.value)
    if isinstance(node, ast.Name):
        if node.id in labels:
            return np.eye(len(labels))[labels.index(node.id)]
        if node.id in _CONSTS:
            return _CONSTS[node.id]
        raise _ExprError(f"unknown name {node.id!r}", node.col_offset)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        val = _eval_node(node.operand, labels)
        return -val if isinstance(node.op, ast.USub) else val
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        left, right = _eval_node(node.left, labels), _eval_node(node.right, labels)
        lvec, rvec = isinstance(left, np.ndarray), isinstance(right, np.ndarray)
        if isinstance(node.op, (ast.Add, ast.Sub)) and lvec != rvec:
            raise _ExprError("cannot add a number to a vector", node.col_offset)
        if isinstance(node.op, ast.Mult) and lvec and rvec:
            raise _ExprError("cannot multiply two vectors", node.col_offset)
        if isinstance(node.op, (ast.Div, ast.Pow)) and rvec:
            raise _ExprError("cannot divide by (or raise to) a vector", node.col_offset)
        if isinstance(node.op, ast.Pow) and lvec:
            raise _ExprError("cannot raise a vector to a power", node.col_offset)
        try:
            return _BINOPS[type(node.op)](left, right)
        except ZeroDivisionError:
            raise _ExprError("division by zero", node.col_offset) from None
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS:
        if len(node.args) != 1 or node.keywords:
            raise _ExprError(f"{node.func.id} takes one argument", node.col_offset)
        arg = _eval_node(node.args[0], labels)
        if isinstance(arg, np.ndarray):
            raise _ExprError(f"{node.func.id} of a vector", node.col_offset)
        try:
            return _FUNCS[node.func.id](arg)
        except ValueError as exc:
            raise _ExprError(str(exc), node.col_offset) from None
    if isinstance(node, ast.Tuple):
        vals = [_eval_node(e, labels) for e in node.elts]
        if any(isinstance(v, np.ndarray) for v in vals):
            raise _ExprError("coordinate lists must contain numbers only", node.col_offset)
        return np.array(vals, dtype=float)
    raise _ExprError("unsupported expression", getattr(node, "col_offset", 0))


def _eval_expr(text, labels):
    source = _normalize_expr(text.strip())
    if not source:
        raise _ExprError("empty expression")
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as exc:
        raise _ExprError(f"malformed expression {text.strip()!r}", max((exc.offset or 1) - 1, 0)) from None
    return _eval_node(tree, list(labels))


def parse_vector(text, labels):
    """Vector from ``"1,2,3"`` or a combination of basis labels such as ``"(e2+e4)/√2"``."""
    try:
        val = _eval_expr(text, labels)
    except _ExprError as exc:
        raise ModelError(str(exc), 1, exc.offset + 1) from None
    return _check_vector(val, len(labels), 1, 1)


def _check_vector(val, dim, line, col):
    if not isinstance(val, np.ndarray):
        raise ModelError("expected a vector, got a number", line, col, "E_DIMENSION")
    if val.shape != (dim,):
        raise ModelError(f"expected a vector of length {dim}, got length {val.shape[0]}", line, col, "E_DIMENSION")
    if not np.all(np.isfinite(val)):
        raise ModelError("vector has non-finite entries", line, col)
    return val


def _number(text, line, col):
    try:
        val = _eval_expr(text, [])
    except _ExprError as exc:
        raise ModelError(str(exc), line, col + exc.offset) from None
    if isinstance(val, np.ndarray) or not math.isfinite(val):
        raise ModelError(f"expected a finite number, got {text.strip()!r}", line, col)
    return val


@dataclass(eq=False)
class ModelFile:
    """Parsed and validated model bundle."""

    algebra: LieAlgebra
    decomposition: ReductiveDecomposition | None
    metric_matrix: np.ndarray
    x: np.ndarray
    phi: PhiFunction
    tol: float = 1e-12

    def __post_init__(self):
        self.a = InnerProduct(self.metric_matrix, self.decomposition)
        self.metric = AlphaBetaMetric(
            self.decomposition or ReductiveDecomposition.trivial(self.algebra), self.a, self.x, self.phi
        )

    @property
    def dec(self):
        return self.metric.decomposition

    def __eq__(self, other):
        if not isinstance(other, ModelFile):
            return NotImplemented
        return (
            self.algebra == other.algebra
            and self.dec == other.dec
            and np.array_equal(self.a.matrix, other.a.matrix)
            and np.array_equal(self.x, other.x)
            and self.phi == other.phi
            and self.tol == other.tol
        )

    __hash__ = None


class _Statement:
    def __init__(self, key, rest, line, col, rest_col):
        self.key, self.rest, self.line, self.col, self.rest_col = key, rest, line, col, rest_col

    def error(self, message, code=None, offset=0):
        return ModelError(message, self.line, self.rest_col + offset, code)


def _statements(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        start = 0
        for chunk in body.split(";"):
            stripped = chunk.strip()
            if stripped:
                col = start + (len(chunk) - len(chunk.lstrip())) + 1
                match = re.match(r"(\S+)\s*", stripped)
                key = match.group(1)
                rest = stripped[match.end():]
                yield _Statement(key.lower(), rest, lineno, col, col + match.end())
            start += len(chunk) + 1


def _parse_phi(st, b0):
    kind, params = re.match(r"([A-Za-z]*)\s*:?\s*(.*)\Z", st.rest.strip()).groups()
    kind = kind.lower()
    if kind == "riemannian":
        if params.strip():
            raise st.error("riemannian phi takes no parameters")
        return PhiFunction.riemannian()
    if kind == "randers":
        if params.strip():
            raise st.error("randers phi takes no parameters")
        return PhiFunction.randers()
    if kind == "polynomial":
        coeffs = [_number(c, st.line, st.rest_col) for c in params.split(",") if c.strip()]
        if not coeffs:
            raise st.error("polynomial phi needs coefficients")
        if b0 is None:
            raise st.error("polynomial phi needs a 'b0' statement", "E_PHI_INVALID")
        try:
            return PhiFunction.polynomial(coeffs, b0)
        except FinslerError as exc:
            raise st.error(str(exc.args[0]), exc.code) from None
    raise st.error(f"unknown phi kind {kind!r} (riemannian, randers, polynomial)")


def _parse_metric(st, size):
    spec = st.rest.strip()
    kind, sep, params = re.match(r"([A-Za-z]*)\s*(:?)\s*(.*)\Z", spec).groups()
    kind = kind.lower()
    if kind == "identity" and not params:
        return np.eye(size)
    if kind == "diag":
        vals = [_number(v, st.line, st.rest_col) for v in re.split(r"[,\s]+", params) if v]
        if len(vals) != size:
            raise st.error(f"diag metric needs {size} entries, got {len(vals)}", "E_DIMENSION")
        return np.diag(vals)
    if kind == "full":
        rows = [[_number(v, st.line, st.rest_col) for v in re.split(r"[,\s]+", row.strip()) if v] for row in params.split("|")]
        if len(rows) != size or any(len(r) != size for r in rows):
            raise st.error(f"full metric needs {size} rows of {size} entries", "E_DIMENSION")
        mat = np.array(rows)
        if not np.array_equal(mat, mat.T):
            raise st.error("full metric matrix is not symmetric", "E_NOT_SYMMETRIC")
        return mat
    raise st.error("metric must be 'identity', 'diag ...' or 'full row | row | ...'")


def _subspace_items(st, labels):
    items = []
    for tok in st.rest.split():
        if re.fullmatch(r"\d+", tok):
            k = int(tok)
            if not 1 <= k <= len(labels):
                raise st.error(f"basis index {k} outside 1..{len(labels)}", "E_INDEX")
            items.append(np.eye(len(labels))[k - 1])
        else:
            try:
                val = _eval_expr(tok, labels)
            except _ExprError as exc:
                raise st.error(str(exc)) from None
            items.append(_check_vector(val, len(labels), st.line, st.rest_col))
    return items


def parse_model(text):
    """Parse and validate a model; raises :class:`ModelError` with line and column."""
    seen = {}
    brackets = []
    for st in _statements(text):
        if st.key == "bracket":
            brackets.append(st)
        elif st.key in ("algebra", "dim", "labels", "h", "m", "metric", "x", "phi", "b0", "tol"):
            seen[st.key] = st
        else:
            raise ModelError(f"unknown key {st.key!r}", st.line, st.col)

    # algebra
    dec = None
    if "algebra" in seen:
        st = seen["algebra"]
        if "dim" in seen or brackets:
            raise st.error("'algebra' cannot be combined with 'dim' or 'bracket'")
        try:
            alg, dec = catalog(st.rest)
        except FinslerError as exc:
            raise st.error(str(exc.args[0]), exc.code) from None
        if "labels" in seen:
            raise seen["labels"].error("'labels' cannot be combined with a catalog algebra")
    else:
        if "dim" not in seen:
            raise ModelError("model needs 'algebra' or 'dim'", 1, 1)
        st = seen["dim"]
        dim = _number(st.rest, st.line, st.rest_col)
        if dim != int(dim) or not 1 <= dim <= 64:
            raise st.error("dim must be an integer between 1 and 64")
        dim = int(dim)
        labels = [f"e{i + 1}" for i in range(dim)]
        if "labels" in seen:
            lst = seen["labels"]
            labels = lst.rest.replace(",", " ").split()
            if len(labels) != dim or len(set(labels)) != dim:
                raise lst.error(f"need {dim} distinct labels")
            for lab in labels:
                if not _IDENT.match(lab) or lab in _FUNCS or lab in _CONSTS:
                    raise lst.error(f"invalid label {lab!r}")
        rules = {}
        for bst in brackets:
            match = re.fullmatch(r"(\S+)\s+(\S+)\s*=\s*(.+)", bst.rest.strip())
            if not match:
                raise bst.error("expected 'bracket <label> <label> = <expression>'")
            i, j = match.group(1), match.group(2)
            for lab in (i, j):
                if lab not in labels:
                    raise bst.error(f"unknown basis label {lab!r}", "E_INDEX")
            i, j = labels.index(i), labels.index(j)
            if i == j:
                raise bst.error("bracket of a basis vector with itself is zero by definition")
            if (i, j) in rules or (j, i) in rules:
                raise bst.error("bracket given twice")
            try:
                val = _eval_expr(match.group(3), labels)
            except _ExprError as exc:
                raise bst.error(str(exc), offset=match.start(3) + exc.offset) from None
            rules[(i, j)] = _check_vector(val, dim, bst.line, bst.rest_col + match.start(3))
        alg = LieAlgebra.from_brackets(dim, rules, labels)
        report = check_jacobi(alg)
        if not report.passed:
            where = ", ".join(labels[k - 1] for k in report.where)
            line = brackets[0].line if brackets else st.line
            raise ModelError(
                f"Jacobi identity fails (residual {report.residual:.3g} at {where})", line, 1, "E_JACOBI"
            )

    labels = list(alg.labels)
    if "h" in seen or "m" in seen:
        if "h" not in seen or "m" not in seen:
            st = seen.get("h") or seen.get("m")
            raise st.error("a decomposition needs both 'h' and 'm'")
        h = _subspace_items(seen["h"], labels)
        m = _subspace_items(seen["m"], labels)
        try:
            dec = ReductiveDecomposition(alg, np.array(h).reshape(-1, alg.dim), np.array(m).reshape(-1, alg.dim))
        except FinslerError as exc:
            raise seen["m"].error(str(exc.args[0]), exc.code) from None
    if dec is not None and dec.is_trivial:
        dec = None
    size = alg.dim if dec is None else len(dec.m_basis)

    matrix = _parse_metric(seen["metric"], size) if "metric" in seen else np.eye(size)
    b0 = None
    if "b0" in seen:
        b0 = _number(seen["b0"].rest, seen["b0"].line, seen["b0"].rest_col)
    phi = _parse_phi(seen["phi"], b0) if "phi" in seen else PhiFunction.riemannian()
    if b0 is not None and phi.kind != "polynomial" and b0 != phi.b0:
        raise seen["b0"].error(f"b0 of {phi.kind} phi is fixed at {phi.b0}", "E_PHI_INVALID")
    x = np.zeros(alg.dim)
    if "x" in seen:
        st = seen["x"]
        try:
            val = _eval_expr(st.rest, labels)
        except _ExprError as exc:
            raise st.error(str(exc), offset=exc.offset) from None
        x = _check_vector(val, alg.dim, st.line, st.rest_col)
    tol = 1e-12
    if "tol" in seen:
        tol = _number(seen["tol"].rest, seen["tol"].line, seen["tol"].rest_col)
        if not tol > 0:
            raise seen["tol"].error("tol must be positive")

    try:
        return ModelFile(alg, dec, matrix, x, phi, tol)
    except FinslerError as exc:
        anchor = {
            "E_NOT_SPD": "metric",
            "E_X_NORM": "x",
            "E_PHI_CONDITION": "phi",
            "E_DOMAIN": "x",
        }.get(exc.code)
        st = seen.get(anchor)
        line, col = (st.line, st.col) if st is not None else (1, 1)
        raise ModelError(str(exc.args[0]), line, col, exc.code) from None


def _fmt_vector(v, labels):
    terms = [f"{float(c)!r}*{lab}" for c, lab in zip(v, labels) if c != 0]
    return " + ".join(terms) if terms else "(" + ", ".join("0.0" for _ in labels) + ")"


def serialize_model(bundle: ModelFile):
    """Canonical text form; ``parse_model(serialize_model(b)) == b``."""
    alg = bundle.algebra
    labels = list(alg.labels)
    out = ["# finslerhom model", f"dim {alg.dim}"]
    if labels != [f"e{i + 1}" for i in range(alg.dim)]:
        out.append("labels " + " ".join(labels))
    for i in range(alg.dim):
        for j in range(i + 1, alg.dim):
            v = alg.structure[i, j]
            if np.any(v):
                out.append(f"bracket {labels[i]} {labels[j]} = {_fmt_vector(v, labels)}")
    if bundle.decomposition is not None:
        for key, basis in (("h", bundle.decomposition.h_basis), ("m", bundle.decomposition.m_basis)):
            items = []
            for vec in basis:
                nz = np.flatnonzero(vec)
                if len(nz) == 1 and vec[nz[0]] == 1.0:
                    items.append(str(nz[0] + 1))
                else:
                    items.append("(" + ",".join(repr(float(c)) for c in vec) + ")")
            out.append(f"{key} " + " ".join(items))
    mat = bundle.a.matrix
    if np.array_equal(mat, np.eye(len(mat))):
        out.append("metric identity")
    elif np.array_equal(mat, np.diag(np.diag(mat))):
        out.append("metric diag " + ", ".join(repr(float(c)) for c in np.diag(mat)))
    else:
        out.append("metric full " + " | ".join(", ".join(repr(float(c)) for c in row) for row in mat))
    out.append("x " + ", ".join(repr(float(c)) for c in bundle.x) + ("," if alg.dim == 1 else ""))
    if bundle.phi.kind == "custom":
        raise FinslerError("custom phi functions cannot be serialized", "E_SERIALIZE")
    out.append("phi " + bundle.phi.spec())
    if bundle.phi.kind == "polynomial":
        out.append(f"b0 {bundle.phi.b0!r}")
    out.append(f"tol {bundle.tol!r}")
    return "\n".join(out) + "\n"


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())
