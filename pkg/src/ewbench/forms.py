"""Exterior calculus on charts with field-valued components.

Forms are stored sparsely over strictly increasing multi-indices, so
antisymmetry is a property of the storage, not of the data.  Components are
:class:`~ewbench.jets.Field` objects, which keeps every derived form (wedge
products, exterior derivatives, Hodge duals) differentiable as far as the
jet order cap allows.

The three-dimensional Hodge star is defined only through its action on a
fixed coframe: star e1 = e1^e2, star e2 = 2 e1^e3, star e3 = e2^e3.  The
coframe is not orthonormal for the induced metric h = e2 (x) e2 - 4 e1 (.) e3,
which is where the factor 2 comes from; the rules are taken as the
definition and everything downstream is checked against them.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularFrameError, SingularMetricError
from .jets import ChartPoint, Field, Jet, ZERO_FIELD

__all__ = [
    "PForm",
    "Coframe3",
    "MetricField",
    "form",
    "coordinate_form",
    "zero_form",
    "wedge",
    "ext_d",
    "frame_expand",
    "hodge3",
    "star_frame",
    "metric_from_coframe",
    "symmetric_product",
    "jet_det",
    "jet_inv",
]

FRAME_DET_TOL = 1e-12


def _as_field(x):
    if isinstance(x, Field):
        return x
    return Field.const(float(x))


class PForm:
    """A differential form of fixed degree with sparse field components."""

    __slots__ = ("chart", "degree", "comps")

    def __init__(self, chart, degree, comps):
        self.chart = tuple(chart)
        self.degree = int(degree)
        clean = {}
        for idx, f in comps.items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != self.degree:
                raise ValueError(f"index {idx} does not match degree {self.degree}")
            if any(i < 0 or i >= len(self.chart) for i in idx):
                raise ValueError(f"index {idx} outside chart of dim {len(self.chart)}")
            if list(idx) != sorted(set(idx)):
                raise ValueError(f"indices must be strictly increasing, got {idx}")
            clean[idx] = _as_field(f)
        self.comps = clean

    # -- access --------------------------------------------------------------

    def comp(self, idx):
        return self.comps.get(tuple(idx), ZERO_FIELD)

    def comps_at(self, pt, order=0):
        return {idx: f(pt, order) for idx, f in self.comps.items()}

    def values_at(self, pt):
        return {idx: f(pt, 0).value for idx, f in self.comps.items()}

    def max_abs_at(self, pt):
        vals = self.values_at(pt)
        return max((abs(v) for v in vals.values()), default=0.0)

    # -- algebra ---------------------------------------------------------------

    def _check_compatible(self, other):
        if self.chart != other.chart:
            raise ValueError("chart mismatch in form arithmetic")
        if self.degree != other.degree:
            raise ValueError("degree mismatch in form arithmetic")

    def __add__(self, other):
        if not isinstance(other, PForm):
            return NotImplemented
        self._check_compatible(other)
        comps = dict(self.comps)
        for idx, f in other.comps.items():
            comps[idx] = comps[idx] + f if idx in comps else f
        return PForm(self.chart, self.degree, comps)

    def __sub__(self, other):
        if not isinstance(other, PForm):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return PForm(self.chart, self.degree, {i: -f for i, f in self.comps.items()})

    def scale(self, factor):
        """Multiply by a scalar field or number."""
        factor = _as_field(factor)
        return PForm(
            self.chart, self.degree, {i: factor * f for i, f in self.comps.items()}
        )

    def __mul__(self, other):
        if isinstance(other, (int, float, Field)):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def __repr__(self):
        return f"PForm(degree={self.degree}, comps={sorted(self.comps)})"


def form(chart, degree, comps):
    return PForm(chart, degree, comps)


def zero_form(chart, degree):
    return PForm(chart, degree, {})


def coordinate_form(chart, name):
    """The coordinate differential d<name> as a 1-form."""
    chart = tuple(chart)
    return PForm(chart, 1, {(chart.index(name),): Field.const(1.0)})


def scalar_form(chart, f):
    return PForm(chart, 0, {(): _as_field(f)})


# ---------------------------------------------------------------------------
# wedge and exterior derivative
# ---------------------------------------------------------------------------


def _merge_sign(left, right):
    """Sorted union of disjoint index tuples with the permutation sign."""
    if set(left) & set(right):
        return None, 0
    merged = left + right
    inversions = 0
    for a in range(len(merged)):
        for b in range(a + 1, len(merged)):
            if merged[a] > merged[b]:
                inversions += 1
    return tuple(sorted(merged)), -1 if inversions % 2 else 1


def wedge(a, b):
    if a.chart != b.chart:
        raise ValueError("chart mismatch in wedge")
    degree = a.degree + b.degree
    comps = {}
    for ia, fa in a.comps.items():
        for ib, fb in b.comps.items():
            idx, sign = _merge_sign(ia, ib)
            if idx is None:
                continue
            term = fa * fb if sign > 0 else -(fa * fb)
            comps[idx] = comps[idx] + term if idx in comps else term
    return PForm(a.chart, degree, comps)


def ext_d(a):
    """Exterior derivative; components differentiate on demand."""
    dim = len(a.chart)
    comps = {}
    for idx, f in a.comps.items():
        for k in range(dim):
            if k in idx:
                continue
            position = sum(1 for i in idx if i < k)
            df = f.d(a.chart[k])
            term = df if position % 2 == 0 else -df
            new_idx = tuple(sorted(idx + (k,)))
            comps[new_idx] = comps[new_idx] + term if new_idx in comps else term
    return PForm(a.chart, a.degree + 1, comps)


# ---------------------------------------------------------------------------
# coframes and the 3D Hodge star
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Coframe3:
    """An ordered coframe (e1, e2, e3) of 1-forms on a 3D chart."""

    e1: PForm
    e2: PForm
    e3: PForm

    def __post_init__(self):
        if not (self.e1.chart == self.e2.chart == self.e3.chart):
            raise ValueError("coframe legs live on different charts")
        if {self.e1.degree, self.e2.degree, self.e3.degree} != {1}:
            raise ValueError("coframe legs must be 1-forms")
        if len(self.e1.chart) != 3:
            raise ValueError("coframe requires a 3D chart")

    @property
    def chart(self):
        return self.e1.chart

    @property
    def legs(self):
        return (self.e1, self.e2, self.e3)

    def rows_at(self, pt, order=0):
        """Dense 3x3 jet matrix: rows_at[i][j] = component of e^(i+1) along dx^j."""
        rows = []
        for leg in self.legs:
            rows.append([leg.comp((j,))(pt, order) for j in range(3)])
        return rows


# hodge3 frame rules: index pairs and coefficients per coframe leg
_STAR_RULES = (((0, 1), 1.0), ((0, 2), 2.0), ((1, 2), 1.0))


def star_frame(frame, i):
    """star of the i-th coframe leg (i in 1..3), straight from the rules."""
    e1, e2, e3 = frame.legs
    if i == 1:
        return wedge(e1, e2)
    if i == 2:
        return wedge(e1, e3).scale(2.0)
    if i == 3:
        return wedge(e2, e3)
    raise ValueError("frame leg index must be 1, 2 or 3")


def _expand_rows(rows, target):
    """Coefficients c with sum_i c_i rows[i] = target (all jets)."""
    det = jet_det(rows)
    if abs(det.value) < FRAME_DET_TOL:
        raise SingularFrameError(f"coframe determinant {det.value:.3e} below tolerance")
    inv = jet_inv(rows, det)
    # target_j = sum_i c_i rows[i][j]  =>  c = (rows^T)^{-1} target
    coeffs = []
    for i in range(3):
        total = inv[0][i] * target[0]
        for j in (1, 2):
            total = total + inv[j][i] * target[j]
        coeffs.append(total)
    return coeffs


def frame_expand(a, frame, pt):
    """Expand a 1-form or 2-form in the coframe basis at a point.

    Degree 1 returns coefficients against (e1, e2, e3); degree 2 against
    (e1^e2, e1^e3, e2^e3).  Values only.
    """
    rows = frame.rows_at(pt, 0)
    if a.degree == 1:
        target = [a.comp((j,))(pt, 0) for j in range(3)]
        coeffs = _expand_rows(rows, target)
        return np.array([c.value for c in coeffs])
    if a.degree == 2:
        pairs = ((0, 1), (0, 2), (1, 2))
        basis = np.zeros((3, 3))
        val = np.array([[rows[i][j].value for j in range(3)] for i in range(3)])
        for m, (i, j) in enumerate(pairs):
            for col, (k, l) in enumerate(pairs):
                basis[m, col] = val[i][k] * val[j][l] - val[i][l] * val[j][k]
        det = np.linalg.det(basis)
        if abs(det) < FRAME_DET_TOL:
            raise SingularFrameError("degenerate coframe for 2-form expansion")
        target = np.array([a.comp(pair)(pt, 0).value for pair in pairs])
        return np.linalg.solve(basis.T, target)
    raise ValueError("frame expansion supports degree 1 and 2 only")


def hodge3(a, frame):
    """Hodge star of a 1-form via the coframe rules; components stay fields.

    Only degree 1 -> 2 is defined; that is the only case the residual
    operators need, and the rules above pin it completely.
    """
    if a.degree != 1:
        raise ValueError("hodge3 is defined for 1-forms only")
    if a.chart != frame.chart:
        raise ValueError("chart mismatch in hodge3")
    cache = {}

    def comps_at(pt, order):
        key = (pt, order)
        if key not in cache:
            rows = frame.rows_at(pt, order)
            target = [a.comp((j,))(pt, order) for j in range(3)]
            coeffs = _expand_rows(rows, target)
            out = {(0, 1): None, (0, 2): None, (1, 2): None}
            for (basis_idx, factor), c in zip(_STAR_RULES, coeffs):
                i, j = basis_idx
                # (e^{i+1} ^ e^{j+1})_{kl} = E_ik E_jl - E_il E_jk
                for k in range(3):
                    for l in range(k + 1, 3):
                        term = (rows[i][k] * rows[j][l] - rows[i][l] * rows[j][k]) * c
                        if factor != 1.0:
                            term = term * factor
                        cur = out[(k, l)]
                        out[(k, l)] = term if cur is None else cur + term
            cache.clear()
            cache[key] = out
        return cache[key]

    def comp_field(idx):
        return Field(lambda pt, order=0: comps_at(pt, order)[idx])

    return PForm(a.chart, 2, {idx: comp_field(idx) for idx in ((0, 1), (0, 2), (1, 2))})


# ---------------------------------------------------------------------------
# jet-valued linear algebra (n <= 4)
# ---------------------------------------------------------------------------


def jet_det(m):
    """Determinant of a small square matrix of jets (Laplace expansion)."""
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = None
    for j in range(n):
        minor = [[row[k] for k in range(n) if k != j] for row in m[1:]]
        term = m[0][j] * jet_det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total


def jet_inv(m, det=None):
    """Inverse via the adjugate; works for jet entries."""
    n = len(m)
    if det is None:
        det = jet_det(m)
    if isinstance(det, Jet):
        if det.value == 0.0:
            raise SingularMetricError("singular matrix in jet inversion")
        det_inv = det.reciprocal()
    else:
        if det == 0.0:
            raise SingularMetricError("singular matrix in jet inversion")
        det_inv = 1.0 / det
    inv = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [
                [m[r][c] for c in range(n) if c != i]
                for r in range(n)
                if r != j
            ]
            cof = jet_det(minor) if n > 1 else 1.0
            if (i + j) % 2:
                cof = -cof
            inv[i][j] = cof * det_inv
    return inv


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


class MetricField:
    """A symmetric metric with field components, symmetric by storage.

    Components are kept for index pairs (a, b) with a <= b only.
    """

    __slots__ = ("chart", "comps")

    def __init__(self, chart, comps):
        self.chart = tuple(chart)
        n = len(self.chart)
        clean = {}
        for (a, b), f in comps.items():
            if not (0 <= a <= b < n):
                raise ValueError(f"bad metric index pair ({a}, {b})")
            clean[(a, b)] = _as_field(f)
        self.comps = clean

    @classmethod
    def from_value_matrix(cls, chart, matrix):
        matrix = np.asarray(matrix, dtype=float)
        n = len(chart)
        if matrix.shape != (n, n):
            raise ValueError("matrix shape does not match chart")
        if not np.allclose(matrix, matrix.T, rtol=0.0, atol=1e-12):
            raise ValueError("metric matrix must be symmetric")
        matrix = 0.5 * (matrix + matrix.T)
        comps = {
            (a, b): Field.const(matrix[a, b])
            for a in range(n)
            for b in range(a, n)
            if matrix[a, b] != 0.0
        }
        return cls(chart, comps)

    @property
    def dim(self):
        return len(self.chart)

    def comp(self, a, b):
        if a > b:
            a, b = b, a
        return self.comps.get((a, b), ZERO_FIELD)

    def scale(self, factor):
        factor = _as_field(factor)
        return MetricField(
            self.chart, {k: factor * f for k, f in self.comps.items()}
        )

    def __add__(self, other):
        if not isinstance(other, MetricField):
            return NotImplemented
        if self.chart != other.chart:
            raise ValueError("chart mismatch in metric arithmetic")
        comps = dict(self.comps)
        for k, f in other.comps.items():
            comps[k] = comps[k] + f if k in comps else f
        return MetricField(self.chart, comps)

    def __sub__(self, other):
        if not isinstance(other, MetricField):
            return NotImplemented
        return self + other.scale(-1.0)

    def matrix_at(self, pt):
        n = self.dim
        g = np.zeros((n, n))
        for (a, b), f in self.comps.items():
            v = f(pt, 0).value
            g[a, b] = v
            g[b, a] = v
        return g

    def jets_at(self, pt, order):
        """Packed value/derivative arrays: g, dg[c,a,b], ddg[c,d,a,b]."""
        n = self.dim
        g = np.zeros((n, n))
        dg = np.zeros((n, n, n))
        ddg = np.zeros((n, n, n, n))
        for (a, b), f in self.comps.items():
            j = f(pt, order)
            g[a, b] = g[b, a] = j.value
            if order >= 1:
                dg[:, a, b] = dg[:, b, a] = j.grad
            if order >= 2:
                ddg[:, :, a, b] = ddg[:, :, b, a] = j.hess
        return g, dg, ddg

    def inverse_at(self, pt):
        g = self.matrix_at(pt)
        if abs(np.linalg.det(g)) < 1e-14:
            raise SingularMetricError("metric not invertible at point")
        return np.linalg.inv(g)

    def signature_at(self, pt):
        eigs = np.linalg.eigvalsh(self.matrix_at(pt))
        plus = int(np.sum(eigs > 0))
        minus = int(np.sum(eigs < 0))
        return (plus, minus)

    def jet_matrix_at(self, pt, order):
        """Dense jet matrix, for algebra that must stay differentiable."""
        n = self.dim
        rows = [[None] * n for _ in range(n)]
        for a in range(n):
            for b in range(n):
                rows[a][b] = self.comp(a, b)(pt, order)
        return rows


def symmetric_product(a, b):
    """The symmetric tensor a (.) b = (a (x) b + b (x) a) / 2 as a metric."""
    if a.chart != b.chart or a.degree != 1 or b.degree != 1:
        raise ValueError("symmetric product needs two 1-forms on one chart")
    n = len(a.chart)
    comps = {}
    for i in range(n):
        for j in range(i, n):
            comps[(i, j)] = 0.5 * (
                a.comp((i,)) * b.comp((j,)) + a.comp((j,)) * b.comp((i,))
            )
    return MetricField(a.chart, comps)


def metric_from_coframe(frame):
    """h = e2 (.) e2 - 4 e1 (.) e3 from a coframe, components expanded."""
    e1, e2, e3 = frame.legs
    return symmetric_product(e2, e2) + symmetric_product(e1, e3).scale(-4.0)


# ---------------------------------------------------------------------------
# embedding along a chart extension
# ---------------------------------------------------------------------------


def _embed_positions(small, big):
    try:
        return tuple(big.index(name) for name in small)
    except ValueError as exc:
        raise ValueError(f"chart {small} is not contained in {big}") from exc


def embed_field(f, small, big):
    """View a field on chart ``small`` as a field on the extension ``big``.

    Derivatives along the added coordinates are zero; the rest land at the
    positions the names moved to.
    """
    small = tuple(small)
    big = tuple(big)
    pos = np.array(_embed_positions(small, big))
    n = len(big)

    def fn(pt, order=0):
        coords = tuple(pt.coords[i] for i in pos)
        j = f(ChartPoint(small, coords, pt.params), order)
        out = Jet.constant(j.value, n, order)
        if order >= 1:
            out.grad[pos] = j.grad
        if order >= 2:
            out.hess[np.ix_(pos, pos)] = j.hess
        if order >= 3:
            out.third[np.ix_(pos, pos, pos)] = j.third
        return out

    return Field(fn)


def embed_form(a, big):
    """Push a form through a chart extension (pullback along the projection)."""
    big = tuple(big)
    pos = _embed_positions(a.chart, big)
    comps = {}
    for idx, f in a.comps.items():
        new_idx = tuple(sorted(pos[i] for i in idx))
        comps[new_idx] = embed_field(f, a.chart, big)
    return PForm(big, a.degree, comps)


def embed_metric(h, big):
    big = tuple(big)
    pos = _embed_positions(h.chart, big)
    comps = {}
    for (a, b), f in h.comps.items():
        i, j = sorted((pos[a], pos[b]))
        comps[(i, j)] = embed_field(f, h.chart, big)
    return MetricField(big, comps)
