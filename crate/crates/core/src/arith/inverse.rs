use super::formatted::mul_nodes;
use crate::build::ClusterBasis;
use crate::clustering::ClusterTree;
use super::matvec::matvec;
use crate::build::{Block, BlockData, H2Matrix};
use crate::error::{Error, Result};
use crate::linalg::{dense_lu_invert, is_finite, Scalar};

/// Recursive 2x2 block inverse with formatted products.
///
/// With `S = [S11 S12; S21 S22]` the steps are
///
/// ```text
/// S11 <- inv(S11)
/// X21 = S21 S11          X12 = S11 S12
/// S22 <- S22 - X21 S12   S22 <- inv(S22)
/// S21 <- -S22 X21        S12 <- -X12 S22
/// S11 <- S11 - S12 X21
/// ```
///
/// leaving the block structure and bases of `S` unchanged.
pub fn h2_invert(m: &H2Matrix) -> Result<H2Matrix> {
    let mut out = m.clone();
    invert_rec((&m.tree, &m.basis), &mut out.root)?;
    Ok(out)
}

fn invert_rec(ctx: (&ClusterTree, &ClusterBasis), s: &mut Block) -> Result<()> {
    let one = Scalar::new(1.0, 0.0);
    let minus = Scalar::new(-1.0, 0.0);
    let cluster = s.row;
    match &mut s.data {
        BlockData::Dense(d) => {
            let inv = dense_lu_invert(d).map_err(|e| Error::LeafInverse {
                cluster,
                source: Box::new(e),
            })?;
            if !is_finite(&inv) {
                return Err(Error::LeafInverse {
                    cluster,
                    source: Box::new(Error::Singular { index: 0, magnitude: 0.0 }),
                });
            }
            *d = inv;
            Ok(())
        }
        BlockData::Coupling(_) => Err(Error::StructureMismatch(format!(
            "diagonal block ({cluster},{cluster}) is admissible"
        ))),
        BlockData::Split(children) => {
            let [s11, s12, s21, s22] = &mut children[..] else {
                return Err(Error::StructureMismatch(format!(
                    "diagonal block of cluster {cluster} does not split 2x2"
                )));
            };
            invert_rec(ctx, s11)?;
            let mut x21 = s21.zeros_like();
            mul_nodes(ctx.0, ctx.1, one, s21, s11, &mut x21);
            let mut x12 = s12.zeros_like();
            mul_nodes(ctx.0, ctx.1, one, s11, s12, &mut x12);
            mul_nodes(ctx.0, ctx.1, minus, &x21, s12, s22);
            invert_rec(ctx, s22)?;
            s21.set_zero();
            mul_nodes(ctx.0, ctx.1, minus, s22, &x21, s21);
            s12.set_zero();
            mul_nodes(ctx.0, ctx.1, minus, &x12, s22, s12);
            mul_nodes(ctx.0, ctx.1, minus, s12, &x21, s11);
            Ok(())
        }
    }
}

/// `x = S^-1 e` with an inverse from [`h2_invert`].
pub fn apply_inverse_solve(inv: &H2Matrix, e: &[Scalar]) -> Result<Vec<Scalar>> {
    matvec(inv, e)
}
