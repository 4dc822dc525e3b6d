"""Finite k-linear categories with chosen hom bases and structure constants.

A :class:`FinCat` stores, for every ordered pair of objects, an ordered basis
of the hom space, and for every composable triple the structure-constant
matrix of the bilinear composition map. Morphisms are coordinate vectors in
the chosen bases, so every categorical equation becomes an exact linear
identity.

Also here: k-functors and natural transformations between them (as matrices /
component families), exhaustive law checkers, the quiver-with-relations
presentation loader, morphism invertibility, and object-isomorphism testing
via the radical of the endomorphism algebra.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .field import Field, check_same_field
from .linalg import Matrix, extend_to_basis, kernel_basis, rank, rref, solve
from .report import Report


class ClosureNotReached(Exception):
    """Presentation realization escaped the length cap."""

    def __init__(self, message, report: Report | None = None):
        super().__init__(message)
        self.report = report


class FieldTooSmallForRadicalMethod(Exception):
    """char p <= dim End and the exhaustive fallback exceeds its budget."""


class IsoSearchExhausted(Exception):
    """Existence of an isomorphism is certain but the witness search budget ran out."""


@dataclass(frozen=True)
class Mor:
    """A morphism: source and target object ids plus basis coordinates."""

    src: str
    tgt: str
    coords: tuple

    def is_zero(self) -> bool:
        return all(not c for c in self.coords)


def _kron(field: Field, g: tuple, f: tuple) -> Matrix:
    """Column vector g (x) f, index order q*len(f)+r."""
    vals = []
    for gq in g:
        for fr in f:
            vals.append(field.mul(gq, fr))
    return Matrix(field, len(vals), 1, vals)


class FinCat:
    """A finite k-linear category presented by bases and structure constants."""

    def __init__(self, field: Field, objects, hom_basis, comp, id_coord, name: str = ""):
        self.field = field
        self.objects = tuple(objects)
        if len(set(self.objects)) != len(self.objects):
            raise ValueError("duplicate object ids")
        self.hom_basis = {k: tuple(v) for k, v in hom_basis.items() if v}
        self.name = name
        self.comp = {}
        for (x, y, z), m in comp.items():
            if not isinstance(m, Matrix):
                raise TypeError("structure constants must be Matrix values")
            check_same_field(m.field, field)
            exp_rows, exp_cols = self.dim(x, z), self.dim(y, z) * self.dim(x, y)
            if (m.rows, m.cols) != (exp_rows, exp_cols):
                raise ValueError(f"comp[{x},{y},{z}] must be {exp_rows}x{exp_cols}, got {m.rows}x{m.cols}")
            if not m.is_zero() or exp_rows * exp_cols:
                self.comp[(x, y, z)] = m
        self.id_coord = {}
        for x in self.objects:
            c = tuple(field.coerce(v) for v in id_coord.get(x, ()))
            if len(c) != self.dim(x, x):
                raise ValueError(f"id coords of {x} must have length {self.dim(x, x)}")
            self.id_coord[x] = c
        self._sig = None

    # -- structure access ------------------------------------------------------

    def dim(self, x: str, y: str) -> int:
        return len(self.hom_basis.get((x, y), ()))

    def basis_labels(self, x: str, y: str) -> tuple:
        return self.hom_basis.get((x, y), ())

    def comp_matrix(self, x: str, y: str, z: str) -> Matrix:
        m = self.comp.get((x, y, z))
        if m is None:
            m = Matrix.zeros(self.field, self.dim(x, z), self.dim(y, z) * self.dim(x, y))
        return m

    def signature(self):
        if self._sig is None:
            self._sig = (
                self.field,
                self.objects,
                tuple(sorted(self.hom_basis.items())),
                tuple(sorted((k, m.entries) for k, m in self.comp.items())),
                tuple(sorted(self.id_coord.items())),
            )
        return self._sig

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, FinCat) and self.signature() == other.signature()

    def __hash__(self):
        return hash(self.signature())

    def __repr__(self):
        return f"FinCat({self.name or id(self)}, objects={list(self.objects)})"

    # -- morphisms --------------------------------------------------------------

    def mor(self, x: str, y: str, coords) -> Mor:
        c = tuple(self.field.coerce(v) for v in coords)
        if len(c) != self.dim(x, y):
            raise ValueError(f"Hom({x},{y}) has dimension {self.dim(x, y)}, got {len(c)} coords")
        return Mor(x, y, c)

    def zero_mor(self, x: str, y: str) -> Mor:
        return Mor(x, y, (self.field.zero,) * self.dim(x, y))

    def basis_mor(self, x: str, y: str, r: int) -> Mor:
        d = self.dim(x, y)
        return Mor(x, y, tuple(self.field.one if i == r else self.field.zero for i in range(d)))

    def identity(self, x: str) -> Mor:
        return Mor(x, x, self.id_coord[x])

    def add_mor(self, f: Mor, g: Mor) -> Mor:
        if (f.src, f.tgt) != (g.src, g.tgt):
            raise ValueError("adding non-parallel morphisms")
        fl = self.field
        return Mor(f.src, f.tgt, tuple(fl.add(a, b) for a, b in zip(f.coords, g.coords)))

    def scale_mor(self, s, f: Mor) -> Mor:
        fl = self.field
        s = fl.coerce(s)
        return Mor(f.src, f.tgt, tuple(fl.mul(s, a) for a in f.coords))

    def neg_mor(self, f: Mor) -> Mor:
        fl = self.field
        return Mor(f.src, f.tgt, tuple(fl.neg(a) for a in f.coords))

    def compose(self, g: Mor, f: Mor) -> Mor:
        """g after f; f: x->y, g: y->z."""
        if f.tgt != g.src:
            raise ValueError(f"cannot compose {g.src}->{g.tgt} after {f.src}->{f.tgt}")
        m = self.comp_matrix(f.src, f.tgt, g.tgt)
        if m.cols == 0:
            return self.zero_mor(f.src, g.tgt)
        res = m @ _kron(self.field, g.coords, f.coords)
        return Mor(f.src, g.tgt, res.col(0))

    def lcomp_matrix(self, g: Mor, x: str) -> Matrix:
        """Matrix of (g o -): Hom(x, g.src) -> Hom(x, g.tgt)."""
        d = self.dim(x, g.src)
        cols = [self.compose(g, self.basis_mor(x, g.src, r)).coords for r in range(d)]
        ents = []
        for i in range(self.dim(x, g.tgt)):
            for c in cols:
                ents.append(c[i])
        return Matrix(self.field, self.dim(x, g.tgt), d, ents)

    def rcomp_matrix(self, f: Mor, z: str) -> Matrix:
        """Matrix of (- o f): Hom(f.tgt, z) -> Hom(f.src, z)."""
        d = self.dim(f.tgt, z)
        cols = [self.compose(self.basis_mor(f.tgt, z, q), f).coords for q in range(d)]
        ents = []
        for i in range(self.dim(f.src, z)):
            for c in cols:
                ents.append(c[i])
        return Matrix(self.field, self.dim(f.src, z), d, ents)

    def hom_pairs(self):
        for x in self.objects:
            for y in self.objects:
                if self.dim(x, y):
                    yield (x, y)


def fmt_mor(cat: FinCat, f: Mor) -> str:
    body = " ".join(cat.field.format_scalar(c) for c in f.coords) or "-"
    return f"{f.src}->{f.tgt}({body})"


# -- functors and natural transformations -------------------------------------


class KFunctor:
    """A k-linear functor: object assignment plus one matrix per hom space."""

    def __init__(self, dom: FinCat, cod: FinCat, obj_map, hom_map, name: str = ""):
        check_same_field(dom.field, cod.field)
        self.dom = dom
        self.cod = cod
        self.name = name
        self.obj_map = dict(obj_map)
        for x in dom.objects:
            if self.obj_map.get(x) not in cod.objects:
                raise ValueError(f"object map misses {x}")
        self.hom_map = {}
        for (x, y) in dom.hom_pairs():
            m = hom_map.get((x, y))
            if m is None:
                raise ValueError(f"hom map missing on ({x},{y})")
            fx, fy = self.obj_map[x], self.obj_map[y]
            if (m.rows, m.cols) != (cod.dim(fx, fy), dom.dim(x, y)):
                raise ValueError(
                    f"hom map on ({x},{y}) must be {cod.dim(fx, fy)}x{dom.dim(x, y)}, got {m.rows}x{m.cols}"
                )
            self.hom_map[(x, y)] = m

    def apply_obj(self, x: str) -> str:
        return self.obj_map[x]

    def apply_mor(self, f: Mor) -> Mor:
        m = self.hom_map.get((f.src, f.tgt))
        fx, fy = self.obj_map[f.src], self.obj_map[f.tgt]
        if m is None:
            return self.cod.zero_mor(fx, fy)
        if m.cols == 0:
            return self.cod.zero_mor(fx, fy)
        res = m @ Matrix.column(self.dom.field, f.coords)
        return Mor(fx, fy, res.col(0))

    def __eq__(self, other):
        return (
            isinstance(other, KFunctor)
            and self.dom == other.dom
            and self.cod == other.cod
            and self.obj_map == other.obj_map
            and self.hom_map == other.hom_map
        )

    def __hash__(self):
        return hash((self.dom, self.cod, tuple(sorted(self.obj_map.items()))))

    def __repr__(self):
        return f"KFunctor({self.name or 'F'}: {self.dom.name or '?'} -> {self.cod.name or '?'})"


def identity_functor(c: FinCat) -> KFunctor:
    return KFunctor(
        c,
        c,
        {x: x for x in c.objects},
        {(x, y): Matrix.identity(c.field, c.dim(x, y)) for (x, y) in c.hom_pairs()},
        name=f"id({c.name})" if c.name else "id",
    )


def compose_functors(g: KFunctor, f: KFunctor) -> KFunctor:
    """g after f."""
    if f.cod != g.dom:
        raise ValueError("functor composition shape mismatch")
    obj = {x: g.obj_map[f.obj_map[x]] for x in f.dom.objects}
    hom = {}
    for (x, y) in f.dom.hom_pairs():
        fx, fy = f.obj_map[x], f.obj_map[y]
        gm = g.hom_map.get((fx, fy), Matrix.zeros(g.cod.field, g.cod.dim(obj[x], obj[y]), f.cod.dim(fx, fy)))
        hom[(x, y)] = gm @ f.hom_map[(x, y)]
    return KFunctor(f.dom, g.cod, obj, hom)


class NatTrans:
    """Natural transformation between parallel k-functors, one Mor per object."""

    def __init__(self, dom: KFunctor, cod: KFunctor, comp, name: str = ""):
        if dom.dom != cod.dom or dom.cod != cod.cod:
            raise ValueError("natural transformation needs parallel functors")
        self.dom = dom
        self.cod = cod
        self.name = name
        self.comp = {}
        for x in dom.dom.objects:
            m = comp[x]
            if (m.src, m.tgt) != (dom.obj_map[x], cod.obj_map[x]):
                raise ValueError(f"component at {x} must be {dom.obj_map[x]}->{cod.obj_map[x]}")
            self.comp[x] = m

    def at(self, x: str) -> Mor:
        return self.comp[x]

    def __eq__(self, other):
        return (
            isinstance(other, NatTrans)
            and self.dom == other.dom
            and self.cod == other.cod
            and self.comp == other.comp
        )

    def __repr__(self):
        return f"NatTrans({self.name or 't'}: {self.dom!r} => {self.cod!r})"


def identity_nattrans(f: KFunctor) -> NatTrans:
    return NatTrans(f, f, {x: f.cod.identity(f.obj_map[x]) for x in f.dom.objects})


def compose_nattrans_vert(t2: NatTrans, t1: NatTrans) -> NatTrans:
    """t2 after t1 (vertical composition F => G => H)."""
    if t1.cod != t2.dom:
        raise ValueError("vertical composition shape mismatch")
    c = t1.dom.cod
    return NatTrans(t1.dom, t2.cod, {x: c.compose(t2.at(x), t1.at(x)) for x in t1.comp})


def whisker_left(f: KFunctor, t: NatTrans) -> NatTrans:
    """f t : f G => f H for t: G => H with cod(G) = dom(f)."""
    if t.dom.cod != f.dom:
        raise ValueError("whisker_left shape mismatch")
    return NatTrans(
        compose_functors(f, t.dom),
        compose_functors(f, t.cod),
        {x: f.apply_mor(t.at(x)) for x in t.comp},
    )


def whisker_right(t: NatTrans, f: KFunctor) -> NatTrans:
    """t f : G f => H f for t: G => H with dom(G) = cod(f)."""
    if f.cod != t.dom.dom:
        raise ValueError("whisker_right shape mismatch")
    return NatTrans(
        compose_functors(t.dom, f),
        compose_functors(t.cod, f),
        {x: t.at(f.apply_obj(x)) for x in f.dom.objects},
    )


def compose_nattrans_horiz(s: NatTrans, t: NatTrans) -> NatTrans:
    """s * t : (dom s)(dom t) => (cod s)(cod t), via s(cod t) o (dom s)t."""
    return compose_nattrans_vert(whisker_right(s, t.cod), whisker_left(s.dom, t))


# -- checkers ------------------------------------------------------------------


def check_fincat(c: FinCat) -> Report:
    """Exhaustive identity-law and associativity verification."""
    rep = Report(f"fincat {c.name}".strip())
    for (x, y) in c.hom_pairs():
        for r in range(c.dim(x, y)):
            f = c.basis_mor(x, y, r)
            lbl = c.basis_labels(x, y)[r]
            rep.tick(2)
            if c.compose(f, c.identity(x)) != f:
                rep.fail(f"identity-law ({x},{y}) {lbl}", "f o id != f", fmt_mor(c, c.compose(f, c.identity(x))))
            if c.compose(c.identity(y), f) != f:
                rep.fail(f"identity-law ({x},{y}) {lbl}", "id o f != f", fmt_mor(c, c.compose(c.identity(y), f)))
    for x in c.objects:
        for y in c.objects:
            for z in c.objects:
                for w in c.objects:
                    if not (c.dim(x, y) and c.dim(y, z) and c.dim(z, w)):
                        continue
                    for i in range(c.dim(x, y)):
                        f = c.basis_mor(x, y, i)
                        for j in range(c.dim(y, z)):
                            g = c.basis_mor(y, z, j)
                            gf = c.compose(g, f)
                            for k in range(c.dim(z, w)):
                                h = c.basis_mor(z, w, k)
                                rep.tick()
                                lhs = c.compose(h, gf)
                                rhs = c.compose(c.compose(h, g), f)
                                if lhs != rhs:
                                    lf = c.basis_labels(x, y)[i]
                                    lg = c.basis_labels(y, z)[j]
                                    lh = c.basis_labels(z, w)[k]
                                    rep.fail(
                                        f"associativity ({lh},{lg},{lf})",
                                        "(h o g) o f != h o (g o f)",
                                        f"{fmt_mor(c, lhs)} vs {fmt_mor(c, rhs)}",
                                    )
    return rep


def check_functor(f: KFunctor) -> Report:
    rep = Report("functor")
    c, d = f.dom, f.cod
    for x in c.objects:
        rep.tick()
        if f.apply_mor(c.identity(x)) != d.identity(f.apply_obj(x)):
            rep.fail(f"functor-id at {x}", "F(id) != id", fmt_mor(d, f.apply_mor(c.identity(x))))
    for (x, y) in c.hom_pairs():
        for (y2, z) in c.hom_pairs():
            if y2 != y:
                continue
            for r in range(c.dim(x, y)):
                ff = c.basis_mor(x, y, r)
                for q in range(c.dim(y, z)):
                    g = c.basis_mor(y, z, q)
                    rep.tick()
                    lhs = f.apply_mor(c.compose(g, ff))
                    rhs = d.compose(f.apply_mor(g), f.apply_mor(ff))
                    if lhs != rhs:
                        rep.fail(
                            f"functoriality ({c.basis_labels(y, z)[q]},{c.basis_labels(x, y)[r]})",
                            "F(g o f) != F(g) o F(f)",
                            f"{fmt_mor(d, lhs)} vs {fmt_mor(d, rhs)}",
                        )
    return rep


def check_nattrans(t: NatTrans) -> Report:
    rep = Report("nattrans")
    c = t.dom.dom
    d = t.dom.cod
    for (x, y) in c.hom_pairs():
        for r in range(c.dim(x, y)):
            f = c.basis_mor(x, y, r)
            rep.tick()
            lhs = d.compose(t.cod.apply_mor(f), t.at(x))
            rhs = d.compose(t.at(y), t.dom.apply_mor(f))
            if lhs != rhs:
                rep.fail(
                    f"naturality at {c.basis_labels(x, y)[r]}: {x}->{y}",
                    "G(f) o t_x != t_y o F(f)",
                    f"{fmt_mor(d, lhs)} vs {fmt_mor(d, rhs)}",
                )
    return rep


def nattrans_space(f: KFunctor, g: KFunctor) -> list[NatTrans]:
    """Basis of the space of natural transformations f => g."""
    if f.dom != g.dom or f.cod != g.cod:
        raise ValueError("nattrans_space needs parallel functors")
    c, d = f.dom, f.cod
    field = c.field
    objs = list(c.objects)
    offs = {}
    total = 0
    for x in objs:
        offs[x] = total
        total += d.dim(f.obj_map[x], g.obj_map[x])
    rows_mats = []
    for (x, y) in c.hom_pairs():
        for r in range(c.dim(x, y)):
            m = c.basis_mor(x, y, r)
            lhs = d.lcomp_matrix(g.apply_mor(m), f.obj_map[x])
            rhs = d.rcomp_matrix(f.apply_mor(m), g.obj_map[y])
            block = Matrix.zeros(field, lhs.rows, total)
            ents = list(block.entries)
            for i in range(lhs.rows):
                for j in range(lhs.cols):
                    ents[i * total + offs[x] + j] = lhs[i, j]
                for j in range(rhs.cols):
                    ents[i * total + offs[y] + j] = field.sub(ents[i * total + offs[y] + j], rhs[i, j])
            rows_mats.append(Matrix(field, lhs.rows, total, ents))
    if rows_mats:
        big = rows_mats[0]
        for m in rows_mats[1:]:
            big = big.vstack(m)
    else:
        big = Matrix.zeros(field, 0, total)
    ker = kernel_basis(big)
    out = []
    for j in range(ker.cols):
        comp = {}
        for x in objs:
            dim = d.dim(f.obj_map[x], g.obj_map[x])
            comp[x] = Mor(f.obj_map[x], g.obj_map[x], tuple(ker[offs[x] + i, j] for i in range(dim)))
        out.append(NatTrans(f, g, comp))
    return out


# -- invertibility and isomorphism ----------------------------------------------


def is_invertible(f: Mor, c: FinCat) -> Mor | None:
    """Two-sided inverse of a given morphism via one exact linear solve."""
    a1 = c.rcomp_matrix(f, f.src)  # g |-> g o f
    a2 = c.lcomp_matrix(f, f.tgt)  # g |-> f o g
    lhs = a1.vstack(a2)
    rhs = Matrix.column(c.field, c.identity(f.src).coords + c.identity(f.tgt).coords)
    x = solve(lhs, rhs)
    if x is None:
        return None
    return Mor(f.tgt, f.src, x.col(0))


class _FDAlgebra:
    """Finite-dimensional algebra by structure constants (used for radicals)."""

    def __init__(self, field: Field, mult, unit):
        self.field = field
        self.n = len(mult)
        self.mult = mult  # mult[i][j]: tuple coords of e_i * e_j
        self.unit = unit  # tuple coords of 1

    def product(self, a, b):
        f = self.field
        out = [f.zero] * self.n
        for i, ai in enumerate(a):
            if not ai:
                continue
            for j, bj in enumerate(b):
                if not bj:
                    continue
                s = f.mul(ai, bj)
                mij = self.mult[i][j]
                for k, mk in enumerate(mij):
                    if mk:
                        out[k] = f.add(out[k], f.mul(s, mk))
        return tuple(out)

    def left_traces(self):
        """tr(L_{e_i}) for each basis element."""
        tr = []
        for i in range(self.n):
            t = self.field.zero
            for j in range(self.n):
                t = self.field.add(t, self.mult[i][j][j])
            tr.append(t)
        return tr


def _algebra_radical(alg: _FDAlgebra) -> Matrix:
    """Basis (columns) of the radical via iterated trace-form kernels.

    Valid in characteristic 0 or when char > dim; callers guard that.
    """
    field = alg.field
    n = alg.n
    rad = Matrix.zeros(field, n, 0)
    while rad.cols < n:
        compl = extend_to_basis(rad, Matrix.identity(field, n))
        m = len(compl)
        if m == 0:
            break
        basis_cols = Matrix.zeros(field, n, m)
        ents = list(basis_cols.entries)
        for j, idx in enumerate(compl):
            ents[idx * m + j] = field.one
        basis_cols = Matrix(field, n, m, ents)
        proj_src = rad.hstack(basis_cols)

        def project(vec):
            sol = solve(proj_src, Matrix.column(field, vec))
            return tuple(sol[rad.cols + i, 0] for i in range(m))

        reps = []
        for j, idx in enumerate(compl):
            unit = [field.zero] * n
            unit[idx] = field.one
            reps.append(tuple(unit))
        qmult = [[project(alg.product(a, b)) for b in reps] for a in reps]
        qalg = _FDAlgebra(field, qmult, None)
        trl = qalg.left_traces()
        gram = []
        for i in range(m):
            for j in range(m):
                prod = qmult[i][j]
                g = field.zero
                for k, pk in enumerate(prod):
                    if pk:
                        g = field.add(g, field.mul(pk, trl[k]))
                gram.append(g)
        ker = kernel_basis(Matrix(field, m, m, gram))
        if ker.cols == 0:
            break
        lifted = basis_cols @ ker
        rad = rad.hstack(lifted)
        keep = extend_to_basis(Matrix.zeros(field, n, 0), rad)
        ents = []
        for i in range(n):
            for j in keep:
                ents.append(rad[i, j])
        rad = Matrix(field, n, len(keep), ents)
    return rad


def _end_algebra(c: FinCat, x: str, y: str):
    """End(x (+) y) as an algebra; returns (algebra, block index ranges)."""
    blocks = [(x, x), (x, y), (y, x), (y, y)] if x != y else [(x, x)]
    # block (u, v) holds Hom(v, u); element composition is matrix-of-homs product
    index = []
    ranges = {}
    for (u, v) in blocks:
        start = len(index)
        for r in range(c.dim(v, u)):
            index.append((u, v, r))
        ranges[(u, v)] = (start, len(index))
    n = len(index)
    field = c.field
    mult = []
    for (u1, v1, r1) in index:
        m1 = c.basis_mor(v1, u1, r1)
        row = []
        for (u2, v2, r2) in index:
            if v1 != u2:
                row.append((field.zero,) * n)
                continue
            m2 = c.basis_mor(v2, u2, r2)
            prod = c.compose(m1, m2)  # v2 -> u1, block (u1, v2)
            out = [field.zero] * n
            st, en = ranges[(u1, v2)]
            for k, val in enumerate(prod.coords):
                out[st + k] = val
            row.append(tuple(out))
        mult.append(row)
    unit = [field.zero] * n
    for u in dict.fromkeys([x, y]):
        st, en = ranges[(u, u)]
        for k, val in enumerate(c.identity(u).coords):
            unit[st + k] = field.add(unit[st + k], val)
    return _FDAlgebra(field, mult, tuple(unit)), ranges


def _block_dim_mod_radical(field, rad: Matrix, ranges, key) -> int:
    st, en = ranges[key]
    n = rad.rows
    cols = []
    for i in range(st, en):
        v = [field.zero] * n
        v[i] = field.one
        cols.append(v)
    block = Matrix(field, n, len(cols), [cols[j][i] for i in range(n) for j in range(len(cols))])
    return rank(rad.hstack(block)) - rank(rad)


def _iso_candidates(c: FinCat, x: str, y: str, budget: int):
    """Deterministic candidate stream in Hom(x, y)."""
    d = c.dim(x, y)
    field = c.field
    for r in range(d):
        yield c.basis_mor(x, y, r)
    one = field.one
    for r in range(d):
        for s in range(r + 1, d):
            for sgn in (one, field.neg(one)):
                co = [field.zero] * d
                co[r] = one
                co[s] = sgn
                yield c.mor(x, y, co)
    rng = random.Random(0xC0FFEE)
    for _ in range(budget):
        if field.p is None:
            co = [rng.randint(-9, 9) for _ in range(d)]
        else:
            co = [rng.randrange(field.p) for _ in range(d)]
        yield c.mor(x, y, co)


def _exhaustive_iso_search(c: FinCat, x: str, y: str, budget: int):
    d = c.dim(x, y)
    p = c.field.p
    total = p**d
    if total > budget:
        raise FieldTooSmallForRadicalMethod(
            f"char {p} <= dim End({x}(+){y}) and |Hom|={total} exceeds budget {budget}"
        )
    for num in range(1, total):
        co = []
        t = num
        for _ in range(d):
            co.append(t % p)
            t //= p
        f = c.mor(x, y, co)
        g = is_invertible(f, c)
        if g is not None:
            return (f, g)
    return None


def are_isomorphic(x: str, y: str, c: FinCat, budget: int = 20000):
    """A mutually inverse pair (f: x->y, g: y->x), or None.

    Existence is decided by the radical / semisimple-quotient dimension test;
    in small characteristic (char <= dim End(x (+) y)) an exhaustive search
    over Hom(x, y) replaces it, bounded by ``budget``.
    """
    if x not in c.objects or y not in c.objects:
        raise ValueError("unknown object")
    if x == y:
        return (c.identity(x), c.identity(x))
    if c.dim(x, y) == 0 or c.dim(y, x) == 0:
        return None
    alg, ranges = _end_algebra(c, x, y)
    p = c.field.p
    if p is not None and p <= alg.n:
        return _exhaustive_iso_search(c, x, y, budget)
    rad = _algebra_radical(alg)
    dxx = _block_dim_mod_radical(c.field, rad, ranges, (x, x))
    dyy = _block_dim_mod_radical(c.field, rad, ranges, (y, y))
    dyx = _block_dim_mod_radical(c.field, rad, ranges, (y, x))  # Hom(x, y) block
    if not (dxx == dyy == dyx):
        return None
    for f in _iso_candidates(c, x, y, budget):
        g = is_invertible(f, c)
        if g is not None:
            return (f, g)
    raise IsoSearchExhausted(f"{x} ~ {y} certain but witness search budget {budget} exhausted")


def subcategory(c: FinCat, objects, hom_labels=None):
    """Subcategory on an object subset, optionally restricting hom bases.

    ``hom_labels`` maps (x, y) to the kept basis-label subset (the sub-span on
    those basis vectors); by default all labels between kept objects survive.
    Raises ValueError when the data is not closed (identity coordinates or
    composites escape the kept spans).
    """
    objects = tuple(objects)
    for x in objects:
        if x not in c.objects:
            raise ValueError(f"unknown object {x}")
    kept = {}
    for x in objects:
        for y in objects:
            labels = c.basis_labels(x, y)
            if hom_labels is not None and (x, y) in hom_labels:
                want = tuple(hom_labels[(x, y)])
                for w in want:
                    if w not in labels:
                        raise ValueError(f"unknown basis label {w} in Hom({x},{y})")
                idx = tuple(labels.index(w) for w in want)
            else:
                idx = tuple(range(len(labels)))
            if idx:
                kept[(x, y)] = idx

    def restrict(vec, x, y):
        idx = kept.get((x, y), ())
        idxset = set(idx)
        for i, v in enumerate(vec):
            if v and i not in idxset:
                raise ValueError(f"morphism escapes the kept span of Hom({x},{y})")
        return tuple(vec[i] for i in idx)

    hom_basis = {k: tuple(c.basis_labels(*k)[i] for i in idx) for k, idx in kept.items()}
    id_coord = {x: restrict(c.id_coord[x], x, x) for x in objects}
    comp = {}
    for (x, y) in kept:
        for (y2, z) in kept:
            if y2 != y:
                continue
            cols = []
            for q in kept[(y, z)]:
                for r in kept[(x, y)]:
                    prod = c.compose(c.basis_mor(y, z, q), c.basis_mor(x, y, r))
                    cols.append(restrict(prod.coords, x, z))
            dxz = len(kept.get((x, z), ()))
            ents = []
            for i in range(dxz):
                for col in cols:
                    ents.append(col[i])
            comp[(x, y, z)] = Matrix(c.field, dxz, len(cols), ents)
    sub = FinCat(c.field, objects, hom_basis, comp, id_coord, name=f"{c.name}|sub" if c.name else "sub")
    inclusion_index = kept
    return sub, inclusion_index


# -- presentations ----------------------------------------------------------------


@dataclass(frozen=True)
class Relation:
    """Homogeneous k-linear combination of parallel paths.

    Paths are arrow-name tuples in composition order (leftmost applied last);
    the empty tuple is the identity path at src == tgt.
    """

    src: str
    tgt: str
    terms: tuple  # ((raw coeff, path-tuple), ...)


@dataclass(frozen=True)
class Presentation:
    field: Field
    vertices: tuple
    arrows: tuple  # (name, src, tgt)
    relations: tuple
    length_cap: int


def _path_ends(pres: Presentation, path: tuple):
    amap = {a[0]: (a[1], a[2]) for a in pres.arrows}
    if not path:
        return None
    src = amap[path[-1]][0]
    tgt = amap[path[0]][1]
    cur = src
    for name in reversed(path):
        s, t = amap[name]
        if s != cur:
            raise ValueError(f"path {'.'.join(path)} not composable")
        cur = t
    return (src, tgt)


def path_label(path: tuple, vertex: str | None = None) -> str:
    return ".".join(path) if path else f"id_{vertex}"


def realize(pres: Presentation, max_paths: int = 200000) -> FinCat:
    """Path category modulo relations, span-closure based, capped.

    Reductions happen in a window of twice the cap so that products of basis
    paths can be rewritten; a product whose canonical form escapes the cap
    raises :class:`ClosureNotReached`.
    """
    field = pres.field
    cap = pres.length_cap
    window = 2 * cap
    arrow_ix = {a[0]: i for i, a in enumerate(pres.arrows)}
    amap = {a[0]: (a[1], a[2]) for a in pres.arrows}
    for rel in pres.relations:
        for coeff, path in rel.terms:
            if path:
                ends = _path_ends(pres, path)
                if ends != (rel.src, rel.tgt):
                    raise ValueError(f"relation term {'.'.join(path)} is not {rel.src}->{rel.tgt}")
            elif rel.src != rel.tgt:
                raise ValueError("identity path in a non-endo relation")

    # enumerate paths up to the window, grouped by (src, tgt)
    by_len = [[("", v, v, ()) for v in pres.vertices]]  # (key, src, tgt, path)
    paths = {}  # (src,tgt) -> list of path tuples
    total = 0
    for (_, v, _, p) in by_len[0]:
        paths.setdefault((v, v), []).append(p)
        total += 1
    for ln in range(1, window + 1):
        cur = []
        for (_, src, tgt, p) in by_len[ln - 1]:
            for (name, a_src, a_tgt) in pres.arrows:
                if a_src == tgt:
                    cur.append(("", src, a_tgt, (name,) + p))
        by_len.append(cur)
        for (_, src, tgt, p) in cur:
            paths.setdefault((src, tgt), []).append(p)
            total += 1
            if total > max_paths:
                raise ClosureNotReached(f"path explosion: more than {max_paths} paths within window {window}")

    def sort_key(p):
        return (-len(p), tuple(arrow_ix[a] for a in p))

    ordered = {k: sorted(v, key=sort_key) for k, v in paths.items()}
    pos = {k: {p: i for i, p in enumerate(v)} for k, v in ordered.items()}

    # relation multiples inside the window
    rel_rows = {}  # (src,tgt) -> list of coordinate vectors
    for rel in pres.relations:
        maxlen = max((len(p) for _, p in rel.terms), default=0)
        lefts = [((), rel.tgt)] + [
            (p, _path_ends(pres, p)[1]) for key, plist in paths.items() if key[0] == rel.tgt for p in plist if p
        ]
        rights = [((), rel.src)] + [
            (p, _path_ends(pres, p)[0]) for key, plist in paths.items() if key[1] == rel.src for p in plist if p
        ]
        for (u, utgt) in lefts:
            for (v, vsrc) in rights:
                if len(u) + maxlen + len(v) > window:
                    continue
                key = (vsrc, utgt)
                vec = [field.zero] * len(ordered[key])
                for coeff, p in rel.terms:
                    full = u + p + v
                    vec[pos[key][full]] = field.add(vec[pos[key][full]], field.coerce(coeff))
                rel_rows.setdefault(key, []).append(vec)

    reducers = {}  # (src,tgt) -> (rref Matrix, pivots tuple)
    for key, plist in ordered.items():
        rows = rel_rows.get(key, [])
        if rows:
            m = Matrix(field, len(rows), len(plist), [v for row in rows for v in row])
            reducers[key] = rref(m)

    def reduce_vec(key, vec):
        red = reducers.get(key)
        if red is None:
            return list(vec)
        r, piv = red
        out = list(vec)
        for row_idx, c in enumerate(piv):
            f = out[c]
            if f:
                for j in range(len(out)):
                    out[j] = field.sub(out[j], field.mul(f, r[row_idx, j]))
        return out

    pivot_paths = {
        key: {ordered[key][c] for c in reducers[key][1]} if key in reducers else set() for key in ordered
    }
    basis = {}
    for key, plist in ordered.items():
        b = [p for p in plist if p not in pivot_paths[key] and len(p) <= cap]
        b.sort(key=lambda p: (len(p), tuple(arrow_ix[a] for a in p)))
        if b:
            basis[key] = b

    rep = Report("closure")

    def to_basis_coords(key, vec):
        """Reduced window vector -> coords over basis[key]; None if it escapes."""
        b = basis.get(key, [])
        bpos = {p: i for i, p in enumerate(b)}
        out = [field.zero] * len(b)
        for i, val in enumerate(vec):
            if val:
                p = ordered[key][i]
                if p not in bpos:
                    return None
                out[bpos[p]] = val
        return out

    hom_basis = {}
    for key, b in basis.items():
        x, y = key
        hom_basis[key] = tuple(path_label(p, x) for p in b)

    for (name, a_src, a_tgt) in pres.arrows:
        key = (a_src, a_tgt)
        if window < 1 or (name,) not in pos.get(key, {}):
            rep.fail(f"arrow {name}", "generator not representable within the cap")
            continue
        vec = [field.zero] * len(ordered[key])
        vec[pos[key][(name,)]] = field.one
        if to_basis_coords(key, reduce_vec(key, vec)) is None:
            rep.fail(f"arrow {name}", "generator reduces outside the cap")

    id_coord = {}
    for v in pres.vertices:
        key = (v, v)
        vec = [field.zero] * len(ordered[key])
        vec[pos[key][()]] = field.one
        co = to_basis_coords(key, reduce_vec(key, vec))
        if co is None:
            rep.fail(f"identity at {v}", "identity path reduces outside the cap")
            co = [field.zero] * len(basis.get(key, []))
        id_coord[v] = co

    comp = {}
    for (x, y) in list(basis.keys()):
        for (y2, z) in list(basis.keys()):
            if y2 != y:
                continue
            dxz = len(basis.get((x, z), []))
            cols = []
            for q, qp in enumerate(basis[(y, z)]):
                for r, rp in enumerate(basis[(x, y)]):
                    prod = qp + rp
                    key = (x, z)
                    vec = [field.zero] * len(ordered[key])
                    vec[pos[key][prod]] = field.one
                    co = to_basis_coords(key, reduce_vec(key, vec))
                    if co is None:
                        rep.fail(
                            f"product ({path_label(qp, y)} o {path_label(rp, x)})",
                            f"reduces outside the cap {cap}",
                        )
                        co = [field.zero] * dxz
                    cols.append(co)
            ents = []
            for i in range(dxz):
                for col in cols:
                    ents.append(col[i])
            comp[(x, y, z)] = Matrix(field, dxz, len(cols), ents)

    if not rep.ok():
        raise ClosureNotReached("closure certificate failed; raise the length cap", rep)

    cat = FinCat(field, pres.vertices, hom_basis, comp, id_coord)
    inner = check_fincat(cat)
    if not inner.ok():
        raise ClosureNotReached("capped reduction is inconsistent (cap too small)", inner)
    return cat
