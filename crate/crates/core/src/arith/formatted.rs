use crate::build::{Block, BlockData, ClusterBasis, H2Matrix};
use crate::clustering::ClusterTree;
use crate::error::{Error, Result};
use crate::linalg::{conj, DenseMatrix, Scalar};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

/// Per-product scratch: projections of operand subtrees, which recur for
/// every target block they meet, and low-rank updates of subdivided target
/// blocks, which are pushed to the leaves once at the end.
#[derive(Default)]
struct Cache {
    w: HashMap<usize, DenseMatrix>,
    v: HashMap<usize, DenseMatrix>,
    row_w: HashMap<usize, DenseMatrix>,
    col_v: HashMap<usize, DenseMatrix>,
    pending: HashMap<usize, DenseMatrix>,
}

fn key(b: &Block) -> usize {
    b as *const Block as usize
}

/// Tree and bases shared by all operands of a formatted operation.
#[derive(Clone, Copy)]
struct Ctx<'a> {
    tree: &'a ClusterTree,
    basis: &'a ClusterBasis,
    cache: &'a RefCell<Cache>,
}

impl Ctx<'_> {
    /// Memoized `f(b)` for stored operand nodes.
    fn memo(&self, b: &Op<'_>, pick: fn(&mut Cache) -> &mut HashMap<usize, DenseMatrix>, f: impl FnOnce() -> DenseMatrix) -> DenseMatrix {
        let Op::Node(node) = b else {
            return f();
        };
        if let Some(m) = pick(&mut self.cache.borrow_mut()).get(&key(node)) {
            return m.clone();
        }
        let m = f();
        pick(&mut self.cache.borrow_mut()).insert(key(node), m.clone());
        m
    }

    fn sons(&self, t: usize) -> Vec<usize> {
        self.tree.sons(t)
    }

    fn leaf_v(&self, t: usize) -> &DenseMatrix {
        self.basis.leaf[t].as_ref().expect("leaf basis")
    }

    /// `T_child * s` (identity when the cluster is not split).
    fn lift_rows(&self, child: usize, parent: usize, s: &DenseMatrix) -> DenseMatrix {
        if child == parent {
            s.clone()
        } else {
            self.basis.transfer[child].as_ref().unwrap() * s
        }
    }

    /// `s * T_child^T`.
    fn lift_cols(&self, child: usize, parent: usize, s: &DenseMatrix) -> DenseMatrix {
        if child == parent {
            s.clone()
        } else {
            s * self.basis.transfer[child].as_ref().unwrap().transpose()
        }
    }

    /// `T_child^H x`.
    fn restrict_rows(&self, child: usize, parent: usize, x: DenseMatrix) -> DenseMatrix {
        if child == parent {
            x
        } else {
            self.basis.transfer[child].as_ref().unwrap().ad_mul(&x)
        }
    }

    /// `T_child^T x`.
    fn restrict_rows_t(&self, child: usize, parent: usize, x: DenseMatrix) -> DenseMatrix {
        if child == parent {
            x
        } else {
            self.basis.transfer[child].as_ref().unwrap().tr_mul(&x)
        }
    }

    /// `x conj(T_child)`.
    fn restrict_cols_conj(&self, child: usize, parent: usize, x: DenseMatrix) -> DenseMatrix {
        if child == parent {
            x
        } else {
            x * conj(self.basis.transfer[child].as_ref().unwrap())
        }
    }

    /// `x T_child`.
    fn restrict_cols(&self, child: usize, parent: usize, x: DenseMatrix) -> DenseMatrix {
        if child == parent {
            x
        } else {
            x * self.basis.transfer[child].as_ref().unwrap()
        }
    }
}

/// Operand of a block product: a stored node, or a sub-block of a stored
/// admissible block expressed in the children's bases.
#[derive(Clone)]
enum Op<'a> {
    Node(&'a Block),
    Low { row: usize, col: usize, s: DenseMatrix },
}

impl<'a> Op<'a> {
    fn row(&self) -> usize {
        match self {
            Op::Node(b) => b.row,
            Op::Low { row, .. } => *row,
        }
    }

    fn col(&self) -> usize {
        match self {
            Op::Node(b) => b.col,
            Op::Low { col, .. } => *col,
        }
    }

    fn low(&self) -> Option<&DenseMatrix> {
        match self {
            Op::Node(Block {
                data: BlockData::Coupling(s),
                ..
            }) => Some(s),
            Op::Low { s, .. } => Some(s),
            _ => None,
        }
    }

    fn dense(&self) -> Option<&'a DenseMatrix> {
        match self {
            Op::Node(Block {
                data: BlockData::Dense(d),
                ..
            }) => Some(d),
            _ => None,
        }
    }

    fn child(&self, ctx: Ctx<'_>, r2: usize, c2: usize) -> Op<'a> {
        let (r, c) = (self.row(), self.col());
        if let Some(s) = self.low() {
            let s = ctx.lift_cols(c2, c, &ctx.lift_rows(r2, r, s));
            return Op::Low { row: r2, col: c2, s };
        }
        match self {
            Op::Node(Block {
                data: BlockData::Split(ch),
                ..
            }) => {
                let rs = ctx.sons(r);
                let cs = ctx.sons(c);
                let i = rs.iter().position(|&x| x == r2).expect("row son");
                let j = cs.iter().position(|&x| x == c2).expect("col son");
                Op::Node(&ch[i * cs.len() + j])
            }
            _ => {
                debug_assert!(r2 == r && c2 == c);
                self.clone()
            }
        }
    }
}

/// `C += alpha * A * B` on the fixed block structure and bases of `C`.
///
/// Contributions landing on an admissible block of `C` are projected onto
/// its row and column bases; contributions on dense leaves are exact.
pub fn mul_add(m: &H2Matrix, alpha: Scalar, a: &Block, b: &Block, c: &mut Block) -> Result<()> {
    if a.row != c.row || b.col != c.col || a.col != b.row {
        return Err(Error::StructureMismatch(format!(
            "product ({},{})x({},{}) into ({},{})",
            a.row, a.col, b.row, b.col, c.row, c.col
        )));
    }
    mul_nodes(&m.tree, &m.basis, alpha, a, b, c);
    Ok(())
}

fn mul_rec(ctx: Ctx<'_>, alpha: Scalar, a: Op<'_>, b: Op<'_>, c: &mut Block) {
    let (r, cc) = (c.row, c.col);
    match &mut c.data {
        BlockData::Split(children) => {
            if let (Some(sa), Some(sb)) = (a.low(), b.low()) {
                let s = sa * (&ctx.basis.cross[a.col()] * sb) * alpha;
                let mut cache = ctx.cache.borrow_mut();
                match cache.pending.get_mut(&key(c)) {
                    Some(p) => *p += s,
                    None => {
                        cache.pending.insert(key(c), s);
                    }
                }
                return;
            }
            let rs = ctx.sons(r);
            let cs = ctx.sons(cc);
            let ss = ctx.sons(a.col());
            for (i, &r2) in rs.iter().enumerate() {
                for (j, &c2) in cs.iter().enumerate() {
                    let target = &mut children[i * cs.len() + j];
                    for &s2 in &ss {
                        mul_rec(ctx, alpha, a.child(ctx, r2, s2), b.child(ctx, s2, c2), target);
                    }
                }
            }
        }
        BlockData::Coupling(s) => {
            let p = proj_product(ctx, &a, &b);
            *s += p * alpha;
        }
        BlockData::Dense(d) => {
            let p = dense_product(ctx, &a, &b);
            *d += p * alpha;
        }
    }
}

/// Adds the pending low-rank updates `V_row s V_col^T` of subdivided
/// blocks to the leaves below them.
fn flush(ctx: Ctx<'_>, c: &mut Block, inherited: Option<DenseMatrix>) {
    let own = ctx.cache.borrow_mut().pending.remove(&key(c));
    let s = match (inherited, own) {
        (Some(a), Some(b)) => Some(a + b),
        (a, b) => a.or(b),
    };
    let (r, cc) = (c.row, c.col);
    match (&mut c.data, s) {
        (BlockData::Coupling(x), Some(s)) => *x += s,
        (BlockData::Dense(d), Some(s)) => *d += ctx.leaf_v(r) * s * ctx.leaf_v(cc).transpose(),
        (BlockData::Split(children), s) => {
            if s.is_none() && ctx.cache.borrow().pending.is_empty() {
                return;
            }
            let rs = ctx.sons(r);
            let cs = ctx.sons(cc);
            for (i, &r2) in rs.iter().enumerate() {
                let sr = s.as_ref().map(|s| ctx.lift_rows(r2, r, s));
                for (j, &c2) in cs.iter().enumerate() {
                    let sub = sr.as_ref().map(|sr| ctx.lift_cols(c2, cc, sr));
                    flush(ctx, &mut children[i * cs.len() + j], sub);
                }
            }
        }
        _ => {}
    }
}

/// `V_r^H A B conj(V_c)`.
fn proj_product(ctx: Ctx<'_>, a: &Op<'_>, b: &Op<'_>) -> DenseMatrix {
    if let Some(sa) = a.low() {
        return sa * proj_w(ctx, b);
    }
    if let Some(sb) = b.low() {
        return proj_v(ctx, a) * sb;
    }
    let (r, s, c) = (a.row(), a.col(), b.col());
    if let (Some(da), Some(db)) = (a.dense(), b.dense()) {
        return ctx.leaf_v(r).ad_mul(&(da * db * conj(ctx.leaf_v(c))));
    }
    let mut acc = DenseMatrix::zeros(ctx.basis.rank[r], ctx.basis.rank[c]);
    for &r2 in &ctx.sons(r) {
        for &c2 in &ctx.sons(c) {
            let mut sub = DenseMatrix::zeros(ctx.basis.rank[r2], ctx.basis.rank[c2]);
            for &s2 in &ctx.sons(s) {
                sub += proj_product(ctx, &a.child(ctx, r2, s2), &b.child(ctx, s2, c2));
            }
            acc += ctx.restrict_cols_conj(c2, c, ctx.restrict_rows(r2, r, sub));
        }
    }
    acc
}

/// `V_s^T B conj(V_c)` for `B` at `(s, c)`.
fn proj_w(ctx: Ctx<'_>, b: &Op<'_>) -> DenseMatrix {
    ctx.memo(b, |c| &mut c.w, || proj_w_uncached(ctx, b))
}

fn proj_w_uncached(ctx: Ctx<'_>, b: &Op<'_>) -> DenseMatrix {
    let (s, c) = (b.row(), b.col());
    if let Some(sb) = b.low() {
        return &ctx.basis.cross[s] * sb;
    }
    if let Some(d) = b.dense() {
        return ctx.leaf_v(s).tr_mul(&(d * conj(ctx.leaf_v(c))));
    }
    let mut acc = DenseMatrix::zeros(ctx.basis.rank[s], ctx.basis.rank[c]);
    for &s2 in &ctx.sons(s) {
        for &c2 in &ctx.sons(c) {
            let sub = proj_w(ctx, &b.child(ctx, s2, c2));
            acc += ctx.restrict_cols_conj(c2, c, ctx.restrict_rows_t(s2, s, sub));
        }
    }
    acc
}

/// `V_r^H A V_s` for `A` at `(r, s)`.
fn proj_v(ctx: Ctx<'_>, a: &Op<'_>) -> DenseMatrix {
    ctx.memo(a, |c| &mut c.v, || proj_v_uncached(ctx, a))
}

fn proj_v_uncached(ctx: Ctx<'_>, a: &Op<'_>) -> DenseMatrix {
    let (r, s) = (a.row(), a.col());
    if let Some(sa) = a.low() {
        return sa * &ctx.basis.cross[s];
    }
    if let Some(d) = a.dense() {
        return ctx.leaf_v(r).ad_mul(&(d * ctx.leaf_v(s)));
    }
    let mut acc = DenseMatrix::zeros(ctx.basis.rank[r], ctx.basis.rank[s]);
    for &r2 in &ctx.sons(r) {
        for &s2 in &ctx.sons(s) {
            let sub = proj_v(ctx, &a.child(ctx, r2, s2));
            acc += ctx.restrict_cols(s2, s, ctx.restrict_rows(r2, r, sub));
        }
    }
    acc
}

/// Explicit `A B` for leaf clusters `r = A.row` and `c = B.col`.
fn dense_product(ctx: Ctx<'_>, a: &Op<'_>, b: &Op<'_>) -> DenseMatrix {
    let (r, s, c) = (a.row(), a.col(), b.col());
    if let Some(sa) = a.low() {
        return ctx.leaf_v(r) * (sa * row_w(ctx, b));
    }
    if let Some(sb) = b.low() {
        return col_v(ctx, a) * (sb * ctx.leaf_v(c).transpose());
    }
    if let (Some(da), Some(db)) = (a.dense(), b.dense()) {
        return da * db;
    }
    let mut acc = DenseMatrix::zeros(ctx.tree.get(r).size(), ctx.tree.get(c).size());
    for &s2 in &ctx.sons(s) {
        acc += dense_product(ctx, &a.child(ctx, r, s2), &b.child(ctx, s2, c));
    }
    acc
}

/// `V_s^T B` for `B` at `(s, c)` with `c` a leaf.
fn row_w(ctx: Ctx<'_>, b: &Op<'_>) -> DenseMatrix {
    ctx.memo(b, |c| &mut c.row_w, || row_w_uncached(ctx, b))
}

fn row_w_uncached(ctx: Ctx<'_>, b: &Op<'_>) -> DenseMatrix {
    let (s, c) = (b.row(), b.col());
    if let Some(sb) = b.low() {
        return &ctx.basis.cross[s] * sb * ctx.leaf_v(c).transpose();
    }
    if let Some(d) = b.dense() {
        return ctx.leaf_v(s).tr_mul(d);
    }
    let mut acc = DenseMatrix::zeros(ctx.basis.rank[s], ctx.tree.get(c).size());
    for &s2 in &ctx.sons(s) {
        acc += ctx.restrict_rows_t(s2, s, row_w(ctx, &b.child(ctx, s2, c)));
    }
    acc
}

/// `A V_s` for `A` at `(r, s)` with `r` a leaf.
fn col_v(ctx: Ctx<'_>, a: &Op<'_>) -> DenseMatrix {
    ctx.memo(a, |c| &mut c.col_v, || col_v_uncached(ctx, a))
}

fn col_v_uncached(ctx: Ctx<'_>, a: &Op<'_>) -> DenseMatrix {
    let (r, s) = (a.row(), a.col());
    if let Some(sa) = a.low() {
        return ctx.leaf_v(r) * sa * &ctx.basis.cross[s];
    }
    if let Some(d) = a.dense() {
        return d * ctx.leaf_v(s);
    }
    let mut acc = DenseMatrix::zeros(ctx.tree.get(r).size(), ctx.basis.rank[s]);
    for &s2 in &ctx.sons(s) {
        acc += ctx.restrict_cols(s2, s, col_v(ctx, &a.child(ctx, r, s2)));
    }
    acc
}

fn same_structure(a: &H2Matrix, b: &H2Matrix) -> Result<()> {
    if !Arc::ptr_eq(&a.tree, &b.tree) && (a.tree.perm != b.tree.perm || a.tree.len() != b.tree.len()) {
        return Err(Error::StructureMismatch("operands use different cluster trees".into()));
    }
    Ok(())
}

/// `A (+/-) B` with `B` projected onto the bases of `A`.
pub fn h2_add_formatted(target: &H2Matrix, addend: &H2Matrix, sign: f64) -> Result<H2Matrix> {
    same_structure(target, addend)?;
    let mut out = target.clone();
    let shared = Arc::ptr_eq(&target.basis, &addend.basis);
    let overlaps: Vec<DenseMatrix> = if shared {
        Vec::new()
    } else {
        (0..target.tree.len()).map(|t| target.basis.overlap(&addend.basis, t)).collect()
    };
    add_rec(&mut out.root, &addend.root, Scalar::new(sign, 0.0), &overlaps)?;
    Ok(out)
}

fn add_rec(t: &mut Block, a: &Block, sign: Scalar, overlaps: &[DenseMatrix]) -> Result<()> {
    if t.row != a.row || t.col != a.col {
        return Err(Error::StructureMismatch(format!("block ({},{}) vs ({},{})", t.row, t.col, a.row, a.col)));
    }
    match (&mut t.data, &a.data) {
        (BlockData::Dense(x), BlockData::Dense(y)) => *x += y * sign,
        (BlockData::Coupling(x), BlockData::Coupling(y)) => {
            if overlaps.is_empty() {
                *x += y * sign;
            } else {
                *x += &overlaps[t.row] * y * overlaps[t.col].transpose() * sign;
            }
        }
        (BlockData::Split(xs), BlockData::Split(ys)) if xs.len() == ys.len() => {
            for (x, y) in xs.iter_mut().zip(ys) {
                add_rec(x, y, sign, overlaps)?;
            }
        }
        _ => {
            return Err(Error::StructureMismatch(format!("block kinds differ at ({},{})", t.row, t.col)));
        }
    }
    Ok(())
}

/// Formatted product `A * B` on the block structure and bases of `A`.
pub fn h2_mul_formatted(a: &H2Matrix, b: &H2Matrix) -> Result<H2Matrix> {
    same_structure(a, b)?;
    if !Arc::ptr_eq(&a.basis, &b.basis) {
        return Err(Error::StructureMismatch("formatted product needs shared cluster bases".into()));
    }
    let mut out = a.clone();
    out.root = a.root.zeros_like();
    mul_add(a, Scalar::new(1.0, 0.0), &a.root, &b.root, &mut out.root)?;
    Ok(out)
}

/// Product `C += alpha A B` of nodes sharing one tree and basis.
pub(crate) fn mul_nodes(tree: &ClusterTree, basis: &ClusterBasis, alpha: Scalar, a: &Block, b: &Block, c: &mut Block) {
    let cache = RefCell::new(Cache::default());
    let ctx = Ctx {
        tree,
        basis,
        cache: &cache,
    };
    mul_rec(ctx, alpha, Op::Node(a), Op::Node(b), c);
    flush(ctx, c, None);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::build::{build_h2, H2Config};
    use crate::kernel::{generate_geometry, KernelModel, KernelParams, Shape};
    use std::f64::consts::PI;

    fn slab(eps_r: f64) -> (KernelModel, H2Matrix) {
        let k0 = 2.0 * PI;
        let g = generate_geometry(Shape::Slab, 1.0, 12.0, k0).unwrap();
        let m = KernelModel::new(g, KernelParams::new(k0, Scalar::new(eps_r, 0.0)).unwrap()).unwrap();
        let cfg = H2Config {
            n_min: 16,
            ..H2Config::default()
        };
        let h = build_h2(m.points(), &m, &cfg).unwrap();
        (m, h)
    }

    #[test]
    fn add_matches_dense_sum() {
        let (_, h) = slab(2.54);
        let d = h.materialize();
        let sum = h2_add_formatted(&h, &h, 1.0).unwrap();
        assert!((sum.materialize() - &d * Scalar::new(2.0, 0.0)).norm() <= 1e-12 * d.norm());
        let diff = h2_add_formatted(&h, &h, -1.0).unwrap();
        assert!(diff.materialize().norm() <= 1e-12 * d.norm());
    }

    #[test]
    fn product_close_to_dense_product() {
        let (_, h) = slab(2.54);
        let d = h.materialize();
        let p = h2_mul_formatted(&h, &h).unwrap();
        let exact = &d * &d;
        let err = (p.materialize() - &exact).norm() / exact.norm();
        assert!(err <= 1e-3, "err {err}");
    }

    #[test]
    fn product_needs_shared_bases() {
        let (_, h) = slab(1.0);
        let (_, a) = slab(2.54);
        assert!(matches!(h2_mul_formatted(&a, &h), Err(Error::StructureMismatch(_))));
    }
}
