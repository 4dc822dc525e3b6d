"""Bounded complexes of formal projectives and their homotopy hom spaces.

Objects of prj C are finite formal sums of representables, identified through
Yoneda with lists of objects of the base category; morphisms between them are
grids of base-category morphisms (entry (r, c): summand c of the source to
summand r of the target). A complex is a degreewise family of such formal
sums with differential grids satisfying d^2 = 0 exactly.

Sign conventions (fixed here, used everywhere):
  * shift(X, n) lives in degrees translated by -n and carries (-1)^n d;
  * cone(f: X -> Y) has comp[d] = Y[d] (+) X[d+1] with block differential
    [[d_Y, f], [0, -d_X]];
  * the graded hom differential is D(f) = d_V o f - (-1)^k f o d_U, whose
    degree-n cycles are exactly the chain maps U -> shift(V, n).

hom_K computes cycles modulo boundaries by two exact rank computations and
returns an echelon-deterministic representative basis.
"""

from __future__ import annotations

from dataclasses import dataclass

from .fincat import FinCat, KFunctor, Mor, is_invertible
from .linalg import Matrix, kernel_basis, rank, solve


@dataclass(frozen=True)
class FormalProj:
    """Formal finite direct sum of representables: a tuple of object ids."""

    summands: tuple

    def __len__(self):
        return len(self.summands)


def _check_proj(base: FinCat, p: FormalProj):
    for s in p.summands:
        if s not in base.objects:
            raise ValueError(f"unknown summand object {s}")


# -- morphism grids -------------------------------------------------------------


def grid_zero(base: FinCat, dom: FormalProj, cod: FormalProj):
    return tuple(
        tuple(base.zero_mor(ds, cs) for ds in dom.summands) for cs in cod.summands
    )


def grid_identity(base: FinCat, p: FormalProj):
    return tuple(
        tuple(base.identity(p.summands[r]) if r == c else base.zero_mor(p.summands[c], p.summands[r]) for c in range(len(p)))
        for r in range(len(p))
    )


def grid_add(base: FinCat, a, b):
    return tuple(tuple(base.add_mor(x, y) for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def grid_neg(base: FinCat, a):
    return tuple(tuple(base.neg_mor(x) for x in ra) for ra in a)


def grid_scale(base: FinCat, s, a):
    return tuple(tuple(base.scale_mor(s, x) for x in ra) for ra in a)


def grid_compose(base: FinCat, a, b):
    """a o b where b: P -> Q and a: Q -> R (grids indexed cod x dom)."""
    if a and b and len(a[0]) != len(b):
        raise ValueError("grid composition shape mismatch")
    rows = len(a)
    mid = len(b)
    cols = len(b[0]) if b else 0
    out = []
    for r in range(rows):
        row = []
        for c in range(cols):
            acc = None
            for k in range(mid):
                term = base.compose(a[r][k], b[k][c])
                acc = term if acc is None else base.add_mor(acc, term)
            if acc is None:
                acc = base.zero_mor(b[0][c].src if b else "?", a[r][0].tgt if a[r] else "?")
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def grid_is_zero(a):
    return all(m.is_zero() for row in a for m in row)


def grid_apply(f: KFunctor, a):
    return tuple(tuple(f.apply_mor(m) for m in row) for row in a)


# -- complexes --------------------------------------------------------------------


class Complex:
    """Bounded complex of formal projectives; d^2 = 0 is enforced exactly."""

    def __init__(self, base: FinCat, comp, diff, name: str = ""):
        self.base = base
        self.name = name
        self.comp = {}
        for d, p in comp.items():
            if not isinstance(p, FormalProj):
                p = FormalProj(tuple(p))
            _check_proj(base, p)
            if len(p):
                self.comp[int(d)] = p
        self.diff = {}
        for d, g in diff.items():
            d = int(d)
            if d not in self.comp or (d + 1) not in self.comp:
                if not grid_is_zero(g):
                    raise ValueError(f"differential at degree {d} has no summands to act on")
                continue
            dom, cod = self.comp[d], self.comp[d + 1]
            if len(g) != len(cod) or any(len(row) != len(dom) for row in g):
                raise ValueError(f"differential grid at degree {d} has wrong shape")
            for r, row in enumerate(g):
                for c, m in enumerate(row):
                    if (m.src, m.tgt) != (dom.summands[c], cod.summands[r]):
                        raise ValueError(f"differential entry ({r},{c}) at degree {d} has wrong endpoints")
            if not grid_is_zero(g):
                self.diff[d] = g
        for d in self.diff:
            if d + 1 in self.diff:
                sq = grid_compose(base, self.diff[d + 1], self.diff[d])
                if not grid_is_zero(sq):
                    raise ValueError(f"d^2 != 0 between degrees {d} and {d + 2}")

    @property
    def degrees(self):
        return sorted(self.comp)

    @property
    def lo(self):
        return min(self.comp) if self.comp else 0

    @property
    def hi(self):
        return max(self.comp) if self.comp else 0

    def is_zero(self) -> bool:
        return not self.comp

    def proj(self, d: int) -> FormalProj:
        return self.comp.get(d, FormalProj(()))

    def diff_grid(self, d: int):
        g = self.diff.get(d)
        if g is None:
            return grid_zero(self.base, self.proj(d), self.proj(d + 1))
        return g

    def __eq__(self, other):
        return (
            isinstance(other, Complex)
            and self.base == other.base
            and self.comp == other.comp
            and self.diff == other.diff
        )

    def __repr__(self):
        parts = [f"{d}:{'+'.join(self.proj(d).summands)}" for d in self.degrees]
        return f"Complex({self.name or ''} {' '.join(parts)})" if parts else "Complex(0)"


def zero_complex(base: FinCat) -> Complex:
    return Complex(base, {}, {})


def yoneda(base: FinCat, x: str, name: str = "") -> Complex:
    """Representable stalk in degree 0."""
    if x not in base.objects:
        raise ValueError(f"unknown object {x}")
    return Complex(base, {0: FormalProj((x,))}, {}, name=name or f"P({x})")


def shift(x: Complex, n: int) -> Complex:
    """X[n]: degrees translated by -n, differential scaled by (-1)^n."""
    comp = {d - n: p for d, p in x.comp.items()}
    sign = x.base.field.one if n % 2 == 0 else x.base.field.neg(x.base.field.one)
    diff = {d - n: grid_scale(x.base, sign, g) for d, g in x.diff.items()}
    return Complex(x.base, comp, diff, name=f"{x.name}[{n}]" if x.name else "")


class ChainMap:
    """Degreewise grids commuting with the differentials."""

    def __init__(self, dom: Complex, cod: Complex, grids, name: str = "", _skip_check: bool = False):
        if dom.base != cod.base:
            raise ValueError("chain map between complexes over different bases")
        self.dom = dom
        self.cod = cod
        self.name = name
        self.grids = {}
        for d, g in grids.items():
            d = int(d)
            p, q = dom.proj(d), cod.proj(d)
            if not len(p) or not len(q):
                if not grid_is_zero(g):
                    raise ValueError(f"grid at empty degree {d}")
                continue
            if len(g) != len(q) or any(len(row) != len(p) for row in g):
                raise ValueError(f"chain map grid at degree {d} has wrong shape")
            if not grid_is_zero(g):
                self.grids[d] = g
        if not _skip_check:
            base = dom.base
            for d in range(min(dom.lo, cod.lo) - 1, max(dom.hi, cod.hi) + 1):
                if not len(dom.proj(d)) or not len(cod.proj(d + 1)):
                    continue
                lhs = grid_compose(base, cod.diff_grid(d), self.grid(d)) if len(cod.proj(d)) else None
                rhs = grid_compose(base, self.grid(d + 1), dom.diff_grid(d)) if len(dom.proj(d + 1)) else None
                lhs = lhs if lhs is not None else grid_zero(base, dom.proj(d), cod.proj(d + 1))
                rhs = rhs if rhs is not None else grid_zero(base, dom.proj(d), cod.proj(d + 1))
                if lhs != rhs:
                    raise ValueError(f"chain map does not commute with d at degree {d}")

    def grid(self, d: int):
        g = self.grids.get(d)
        if g is None:
            return grid_zero(self.dom.base, self.dom.proj(d), self.cod.proj(d))
        return g

    def is_zero(self) -> bool:
        return not self.grids

    def __eq__(self, other):
        return (
            isinstance(other, ChainMap)
            and self.dom == other.dom
            and self.cod == other.cod
            and self.grids == other.grids
        )

    def __repr__(self):
        return f"ChainMap({self.name or '?'}: {self.dom!r} -> {self.cod!r})"


def identity_chainmap(x: Complex) -> ChainMap:
    return ChainMap(x, x, {d: grid_identity(x.base, x.proj(d)) for d in x.degrees}, _skip_check=True, name="id")


def zero_chainmap(dom: Complex, cod: Complex) -> ChainMap:
    return ChainMap(dom, cod, {}, _skip_check=True, name="0")


def compose_chainmap(second: ChainMap, first: ChainMap) -> ChainMap:
    if first.cod != second.dom:
        raise ValueError("chain map composition shape mismatch")
    grids = {}
    for d in first.dom.degrees:
        if not len(second.cod.proj(d)) or not len(first.cod.proj(d)):
            continue  # factoring through an empty degree gives the zero grid
        grids[d] = grid_compose(first.dom.base, second.grid(d), first.grid(d))
    return ChainMap(first.dom, second.cod, grids, _skip_check=True)


def add_chainmap(a: ChainMap, b: ChainMap) -> ChainMap:
    if a.dom != b.dom or a.cod != b.cod:
        raise ValueError("adding non-parallel chain maps")
    grids = {}
    for d in a.dom.degrees:
        if len(a.cod.proj(d)):
            grids[d] = grid_add(a.dom.base, a.grid(d), b.grid(d))
    return ChainMap(a.dom, a.cod, grids, _skip_check=True)


def scale_chainmap(s, a: ChainMap) -> ChainMap:
    grids = {d: grid_scale(a.dom.base, s, g) for d, g in a.grids.items()}
    return ChainMap(a.dom, a.cod, grids, _skip_check=True)


def cone(f: ChainMap, name: str = "") -> Complex:
    """Mapping cone: comp[d] = cod[d] (+) dom[d+1], d = [[d_Y, f],[0, -d_X]]."""
    x, y = f.dom, f.cod
    base = x.base
    comp = {}
    degs = set()
    for d in y.comp:
        degs.add(d)
    for d in x.comp:
        degs.add(d - 1)
    for d in sorted(degs):
        summands = y.proj(d).summands + x.proj(d + 1).summands
        if summands:
            comp[d] = FormalProj(summands)
    diff = {}
    for d in sorted(degs):
        py, px1 = y.proj(d), x.proj(d + 1)
        qy, qx2 = y.proj(d + 1), x.proj(d + 2)
        rows = len(qy) + len(qx2)
        cols = len(py) + len(px1)
        if rows == 0 or cols == 0:
            continue
        dy = y.diff_grid(d)
        fx = f.grid(d + 1)
        dx = x.diff_grid(d + 1)
        g = []
        for r in range(len(qy)):
            row = list(dy[r]) if len(py) else []
            row += list(fx[r]) if len(px1) else []
            g.append(tuple(row))
        for r in range(len(qx2)):
            row = [base.zero_mor(py.summands[c], qx2.summands[r]) for c in range(len(py))]
            row += [base.neg_mor(dx[r][c]) for c in range(len(px1))] if len(px1) else []
            g.append(tuple(row))
        diff[d] = tuple(g)
    return Complex(base, comp, diff, name=name or f"cone({f.name})")


def direct_sum(x: Complex, y: Complex, name: str = "") -> Complex:
    base = x.base
    if base != y.base:
        raise ValueError("direct sum over different bases")
    comp = {}
    for d in sorted(set(list(x.comp) + list(y.comp))):
        comp[d] = FormalProj(x.proj(d).summands + y.proj(d).summands)
    diff = {}
    for d in comp:
        if d + 1 not in comp:
            continue
        px, py = x.proj(d), y.proj(d)
        qx, qy = x.proj(d + 1), y.proj(d + 1)
        dx, dy = x.diff_grid(d), y.diff_grid(d)
        g = []
        for r in range(len(qx)):
            row = list(dx[r]) if len(px) else []
            row += [base.zero_mor(py.summands[c], qx.summands[r]) for c in range(len(py))]
            g.append(tuple(row))
        for r in range(len(qy)):
            row = [base.zero_mor(px.summands[c], qy.summands[r]) for c in range(len(px))]
            row += list(dy[r]) if len(py) else []
            g.append(tuple(row))
        if g and g[0]:
            diff[d] = tuple(g)
    return Complex(base, comp, diff, name=name or f"{x.name}(+){y.name}")


def apply_functor(f: KFunctor, x: Complex) -> Complex:
    """Entrywise action: summands and differential entries pushed through f."""
    if x.base != f.dom:
        raise ValueError("complex base does not match functor domain")
    comp = {d: FormalProj(tuple(f.apply_obj(s) for s in p.summands)) for d, p in x.comp.items()}
    diff = {d: grid_apply(f, g) for d, g in x.diff.items()}
    return Complex(f.cod, comp, diff, name=x.name)


def apply_functor_chainmap(f: KFunctor, m: ChainMap) -> ChainMap:
    return ChainMap(
        apply_functor(f, m.dom),
        apply_functor(f, m.cod),
        {d: grid_apply(f, g) for d, g in m.grids.items()},
        _skip_check=True,
    )


# -- graded hom coordinate machinery ------------------------------------------------


class GradedHomSpace:
    """Coordinate space of degree-k grid families U -> V[k] with the dg differential."""

    def __init__(self, u: Complex, v: Complex, k: int):
        self.u = u
        self.v = v
        self.k = k
        self.base = u.base
        self.field = u.base.field
        self.layout = []  # (degree d, cod summand t, dom summand s, dim, offset)
        off = 0
        for d in sorted(set(u.comp) & {d - k for d in v.comp}):
            pu = u.proj(d)
            pv = v.proj(d + k)
            for t in range(len(pv)):
                for s in range(len(pu)):
                    dim = self.base.dim(pu.summands[s], pv.summands[t])
                    if dim:
                        self.layout.append((d, t, s, dim, off))
                        off += dim
        self.total = off

    def pack(self, grids) -> Matrix:
        vals = [self.field.zero] * self.total
        for (d, t, s, dim, off) in self.layout:
            g = grids.get(d)
            if g is not None:
                vals[off : off + dim] = list(g[t][s].coords)
        return Matrix(self.field, self.total, 1, vals)

    def unpack(self, col) -> dict:
        grids = {}
        for d in sorted(set(self.u.comp) & {dd - self.k for dd in self.v.comp}):
            pu, pv = self.u.proj(d), self.v.proj(d + self.k)
            grids[d] = [
                [self.base.zero_mor(pu.summands[s], pv.summands[t]) for s in range(len(pu))]
                for t in range(len(pv))
            ]
        for (d, t, s, dim, off) in self.layout:
            grids[d][t][s] = Mor(
                self.u.proj(d).summands[s],
                self.v.proj(d + self.k).summands[t],
                tuple(col[off + i, 0] for i in range(dim)),
            )
        return {d: tuple(tuple(row) for row in g) for d, g in grids.items()}

    def differential_matrix(self) -> Matrix:
        """Matrix of D(f) = d_V o f - (-1)^k f o d_U into degree k+1 coordinates."""
        target = GradedHomSpace(self.u, self.v, self.k + 1)
        field = self.field
        ents = [field.zero] * (target.total * self.total)

        def add_block(mat: Matrix, row_off: int, col_off: int, sign_neg: bool):
            for i in range(mat.rows):
                for j in range(mat.cols):
                    val = mat[i, j]
                    if val:
                        if sign_neg:
                            val = field.neg(val)
                        idx = (row_off + i) * self.total + (col_off + j)
                        ents[idx] = field.add(ents[idx], val)

        sign_flip = self.k % 2 == 0  # -(-1)^k f d_U: negate when k even
        for (d2, t2, s2, dim2, off2) in target.layout:
            pu = self.u.proj(d2)
            pv1 = self.v.proj(d2 + self.k)
            dv = self.v.diff_grid(d2 + self.k)
            for (d, t, s, dim, off) in self.layout:
                if d == d2 and s == s2 and len(pv1) > t:
                    # d_V entry (t2, t) o f-block (d, t, s): left composition
                    entry = dv[t2][t]
                    if not entry.is_zero():
                        lmat = self.base.lcomp_matrix(entry, pu.summands[s2])
                        add_block(lmat, off2, off, False)
                if d == d2 + 1:
                    # f-block (d2+1, t, s) o d_U entry (s, s2): right composition
                    du = self.u.diff_grid(d2)
                    if t == t2 and len(du) > s:
                        entry = du[s][s2]
                        if not entry.is_zero():
                            rmat = self.base.rcomp_matrix(entry, self.v.proj(d + self.k).summands[t])
                            add_block(rmat, off2, off, sign_flip)
        return Matrix(field, target.total, self.total, ents)


@dataclass
class HomotopyHom:
    """Hom in K^b between U and V[n]: dimension plus representative chain maps."""

    dom: Complex
    cod: Complex
    n: int
    dim: int
    basis: list  # ChainMap representatives U -> shift(V, n)
    _space: GradedHomSpace = None
    _rep_mat: Matrix = None
    _bound_mat: Matrix = None

    def class_coords(self, f: ChainMap):
        """Coordinates of [f] in the representative basis; None if f is not parallel."""
        space = self._space
        vec = space.pack(f.grids)
        stack = self._rep_mat.hstack(self._bound_mat) if self._bound_mat.cols else self._rep_mat
        sol = solve(stack, vec)
        if sol is None:
            return None
        return tuple(sol[i, 0] for i in range(self.dim))


def hom_K(u: Complex, v: Complex, n: int) -> HomotopyHom:
    """Exact dimension and representative basis of Hom_{K^b}(U, V[n])."""
    if u.base != v.base:
        raise ValueError("hom between complexes over different bases")
    vs = shift(v, n)
    space = GradedHomSpace(u, vs, 0)
    below = GradedHomSpace(u, vs, -1)
    d0 = space.differential_matrix()
    dm1 = below.differential_matrix()
    cycles = kernel_basis(d0)
    nb = rank(dm1)
    dim = cycles.cols - nb
    # representative selection: extend the boundary span by cycle columns,
    # greedily in echelon order
    reps = []
    current = dm1
    cur_rank = nb
    for j in range(cycles.cols):
        col = Matrix(space.field, cycles.rows, 1, cycles.col(j))
        trial = current.hstack(col)
        r = rank(trial)
        if r > cur_rank:
            reps.append(col)
            current, cur_rank = trial, r
    rep_mat = Matrix(space.field, space.total, 0, [])
    for col in reps:
        rep_mat = rep_mat.hstack(col)
    basis = [ChainMap(u, vs, space.unpack(col), _skip_check=True, name=f"h{j}") for j, col in enumerate(reps)]
    return HomotopyHom(u, v, n, dim, basis, _space=space, _rep_mat=rep_mat, _bound_mat=dm1)


def null_homotopy(f: ChainMap):
    """Homotopy s with f = d s + s d, or None. dom/cod as given (n = 0)."""
    space = GradedHomSpace(f.dom, f.cod, 0)
    below = GradedHomSpace(f.dom, f.cod, -1)
    sol = solve(below.differential_matrix(), space.pack(f.grids))
    if sol is None:
        return None
    return below.unpack(sol)


def homotopic(f: ChainMap, g: ChainMap) -> bool:
    if f.dom != g.dom or f.cod != g.cod:
        raise ValueError("homotopy comparison of non-parallel maps")
    diff = add_chainmap(f, scale_chainmap(f.dom.base.field.neg(f.dom.base.field.one), g))
    return null_homotopy(diff) is not None


# -- Gaussian reduction -----------------------------------------------------------


def _find_invertible_entry(x: Complex):
    for d in x.degrees:
        g = x.diff.get(d)
        if g is None:
            continue
        for r, row in enumerate(g):
            for c, m in enumerate(row):
                if m.is_zero():
                    continue
                inv = is_invertible(m, x.base)
                if inv is not None:
                    return (d, r, c, inv)
    return None


def _split_off(x: Complex, d: int, r: int, c: int, e_inv: Mor):
    """Remove the contractible pair (summand c at d) -> (summand r at d+1)."""
    base = x.base
    pd, pd1 = x.proj(d), x.proj(d + 1)
    keep_c = [i for i in range(len(pd)) if i != c]
    keep_r = [i for i in range(len(pd1)) if i != r]
    g = x.diff_grid(d)
    comp = dict(x.comp)
    new_pd = FormalProj(tuple(pd.summands[i] for i in keep_c))
    new_pd1 = FormalProj(tuple(pd1.summands[i] for i in keep_r))
    for deg, p in ((d, new_pd), (d + 1, new_pd1)):
        if len(p):
            comp[deg] = p
        else:
            comp.pop(deg, None)
    diff = {}
    for deg, grid in x.diff.items():
        if deg == d:
            if keep_r and keep_c:
                new = []
                for rr in keep_r:
                    row = []
                    for cc in keep_c:
                        corr = base.compose(g[rr][c], base.compose(e_inv, g[r][cc]))
                        row.append(base.add_mor(grid[rr][cc], base.neg_mor(corr)))
                    new.append(tuple(row))
                diff[deg] = tuple(new)
        elif deg == d - 1:
            new = tuple(grid[i] for i in keep_c)
            if new and keep_c:
                diff[deg] = new
        elif deg == d + 1:
            new = tuple(tuple(row[i] for i in keep_r) for row in grid)
            if new and keep_r and new[0]:
                diff[deg] = new
        else:
            diff[deg] = grid
    reduced = Complex(base, comp, diff, name=x.name)

    # projection p: x -> reduced and section s: reduced -> x
    p_grids = {}
    s_grids = {}
    for deg in x.degrees:
        p = x.proj(deg)
        q = reduced.proj(deg)
        if not len(q):
            continue
        if deg == d:
            rows = []
            for qi, oi in enumerate(keep_c):
                row = [
                    base.identity(p.summands[ci]) if ci == oi else base.zero_mor(p.summands[ci], q.summands[qi])
                    for ci in range(len(p))
                ]
                rows.append(tuple(row))
            p_grids[deg] = tuple(rows)
            rows = []
            for ri in range(len(p)):
                row = []
                for qi, oi in enumerate(keep_c):
                    if ri == oi:
                        row.append(base.identity(p.summands[ri]))
                    elif ri == c:
                        row.append(base.neg_mor(base.compose(e_inv, g[r][oi])))
                    else:
                        row.append(base.zero_mor(q.summands[qi], p.summands[ri]))
                rows.append(tuple(row))
            s_grids[deg] = tuple(rows)
        elif deg == d + 1:
            rows = []
            for qi, oi in enumerate(keep_r):
                row = []
                for ci in range(len(p)):
                    if ci == oi:
                        row.append(base.identity(p.summands[ci]))
                    elif ci == r:
                        row.append(base.neg_mor(base.compose(g[oi][c], e_inv)))
                    else:
                        row.append(base.zero_mor(p.summands[ci], q.summands[qi]))
                rows.append(tuple(row))
            p_grids[deg] = tuple(rows)
            rows = []
            for ri in range(len(p)):
                row = [
                    base.identity(p.summands[ri]) if ri == oi else base.zero_mor(q.summands[qi], p.summands[ri])
                    for qi, oi in enumerate(keep_r)
                ]
                rows.append(tuple(row))
            s_grids[deg] = tuple(rows)
        else:
            p_grids[deg] = grid_identity(base, p)
            s_grids[deg] = grid_identity(base, p)
    proj = ChainMap(x, reduced, p_grids, _skip_check=True)
    sect = ChainMap(reduced, x, s_grids, _skip_check=True)
    return reduced, proj, sect


def minimal_form(x: Complex):
    """(M, p: X -> M, s: M -> X): split off contractible pairs until no
    differential entry is invertible. p o s = id_M exactly; s o p is homotopic
    to the identity."""
    cur = x
    p_total = identity_chainmap(x)
    s_total = identity_chainmap(x)
    while True:
        found = _find_invertible_entry(cur)
        if found is None:
            break
        d, r, c, inv = found
        cur, p_step, s_step = _split_off(cur, d, r, c, inv)
        p_total = compose_chainmap(p_step, p_total)
        s_total = compose_chainmap(s_total, s_step)
    return cur, p_total, s_total


def connected_summands(x: Complex):
    """Chain-level direct summands along connected components of the summand graph."""
    nodes = [(d, i) for d in x.degrees for i in range(len(x.proj(d)))]
    if not nodes:
        return [x]
    parent = {n: n for n in nodes}

    def find(n):
        while parent[n] != n:
            parent[n] = parent[parent[n]]
            n = parent[n]
        return n

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for d, g in x.diff.items():
        for r, row in enumerate(g):
            for c, m in enumerate(row):
                if not m.is_zero():
                    union((d, c), (d + 1, r))
    groups = {}
    for n in nodes:
        groups.setdefault(find(n), []).append(n)
    if len(groups) == 1:
        return [x]
    out = []
    for root in sorted(groups, key=lambda n: (n[0], n[1])):
        members = set(groups[root])
        comp = {}
        idx_map = {}
        for d in x.degrees:
            kept = [i for i in range(len(x.proj(d))) if (d, i) in members]
            if kept:
                comp[d] = FormalProj(tuple(x.proj(d).summands[i] for i in kept))
                idx_map[d] = kept
        diff = {}
        for d, g in x.diff.items():
            if d in idx_map and d + 1 in idx_map:
                diff[d] = tuple(tuple(g[r][c] for c in idx_map[d]) for r in idx_map[d + 1])
        out.append(Complex(x.base, comp, diff, name=x.name))
    return out
