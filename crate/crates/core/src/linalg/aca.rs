use super::{DenseMatrix, LowRankFactor, Scalar, ZERO};
use crate::error::{Error, Result};

/// Source of matrix entries addressed by local (row, col) indices.
///
/// Implementations must be pure: the same index pair always yields the same
/// value, and concurrent calls are allowed.
pub trait EntrySource: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn entry(&self, row: usize, col: usize) -> Scalar;

    fn fill_row(&self, row: usize, out: &mut [Scalar]) {
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.entry(row, j);
        }
    }

    fn fill_col(&self, col: usize, out: &mut [Scalar]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.entry(i, col);
        }
    }
}

impl EntrySource for DenseMatrix {
    fn nrows(&self) -> usize {
        self.nrows()
    }
    fn ncols(&self) -> usize {
        self.ncols()
    }
    fn entry(&self, row: usize, col: usize) -> Scalar {
        self[(row, col)]
    }
}

/// Default ACA rank cap for a `rows x cols` block.
pub fn default_max_rank(rows: usize, cols: usize) -> usize {
    rows.min(cols).min(200)
}

/// Partially pivoted adaptive cross approximation.
///
/// Pivots on the row of largest residual (taken from the previous cross
/// column), then on the largest entry of that residual row. Stops once
/// `|a_k| |b_k| <= eps * |M_k|_F`, where the Frobenius norm of the running
/// approximation is updated incrementally. Before stopping, a few unused
/// rows are probed; a probe whose residual would exceed the tolerance over
/// the whole block becomes the next pivot row instead. Rows whose residual
/// vanishes are skipped; the iteration ends when no unused row has a nonzero
/// pivot.
///
/// Returns [`Error::RankCapExceeded`] with the partial factor if `max_rank`
/// crosses are taken without converging and the block is not yet exhausted.
pub fn aca_factorize<S: EntrySource + ?Sized>(
    oracle: &S,
    eps: f64,
    max_rank: usize,
) -> Result<LowRankFactor> {
    let m = oracle.nrows();
    let n = oracle.ncols();
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter("ACA on an empty block".into()));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("ACA tolerance {eps} outside [0, 1)")));
    }
    let exhaust = m.min(n);
    let max_rank = max_rank.min(exhaust);

    let mut us: Vec<Vec<Scalar>> = Vec::new();
    let mut vs: Vec<Vec<Scalar>> = Vec::new();
    let mut used_rows = vec![false; m];
    let mut used_cols = vec![false; n];
    let mut norm2 = 0.0_f64;
    let mut row = vec![ZERO; n];
    let mut col = vec![ZERO; m];
    let mut pivot_row = 0usize;
    let mut converged = false;
    let mut probe_state = 0x9e37_79b9_7f4a_7c15_u64 ^ ((m as u64) << 32 | n as u64);
    // largest raw entry seen; residual pivots below roundoff of it count as zero
    let mut scale = 0.0_f64;

    loop {
        if us.len() == max_rank {
            break;
        }
        used_rows[pivot_row] = true;
        oracle.fill_row(pivot_row, &mut row);
        scale = row.iter().fold(scale, |acc, z| acc.max(z.norm()));
        for (u, v) in us.iter().zip(&vs) {
            let c = u[pivot_row];
            for (r, vj) in row.iter_mut().zip(v) {
                *r -= c * vj;
            }
        }
        let pivot_col = argmax_abs(&row, &used_cols);
        let pivot = pivot_col.map(|j| row[j]);
        match (pivot_col, pivot) {
            (Some(j), Some(p)) if p.norm() > 1e-13 * scale => {
                used_cols[j] = true;
                oracle.fill_col(j, &mut col);
                for (u, v) in us.iter().zip(&vs) {
                    let c = v[j];
                    for (ci, ui) in col.iter_mut().zip(u) {
                        *ci -= c * ui;
                    }
                }
                let inv = p.inv();
                let v_new: Vec<Scalar> = row.iter().map(|r| r * inv).collect();
                let u_new = col.clone();

                let u2: f64 = u_new.iter().map(|z| z.norm_sqr()).sum();
                let v2: f64 = v_new.iter().map(|z| z.norm_sqr()).sum();
                let mut cross = 0.0;
                for (u, v) in us.iter().zip(&vs) {
                    let au: Scalar = u.iter().zip(&u_new).map(|(a, b)| a.conj() * b).sum();
                    let bv: Scalar = v.iter().zip(&v_new).map(|(a, b)| a.conj() * b).sum();
                    cross += (au * bv).re;
                }
                norm2 = (norm2 + u2 * v2 + 2.0 * cross).max(0.0);
                let step = (u2 * v2).sqrt();
                us.push(u_new);
                vs.push(v_new);
                if step <= eps * norm2.sqrt() {
                    // the last cross is small, but partial pivoting can miss
                    // components living on rows it never visited
                    match probe_rows(oracle, &us, &vs, &used_rows, eps * norm2.sqrt(), &mut probe_state, &mut row) {
                        Some(i) => {
                            pivot_row = i;
                            continue;
                        }
                        None => {
                            converged = true;
                            break;
                        }
                    }
                }
                // next row: largest entry of the new column among unused rows
                match argmax_abs(us.last().unwrap(), &used_rows) {
                    Some(i) => pivot_row = i,
                    None => {
                        converged = true;
                        break;
                    }
                }
            }
            _ => {
                // vanishing residual row: fall back to the next unused row
                match used_rows.iter().position(|&u| !u) {
                    Some(i) => pivot_row = i,
                    None => {
                        converged = true;
                        break;
                    }
                }
            }
        }
    }

    let k = us.len();
    let a = DenseMatrix::from_fn(m, k, |i, l| us[l][i]);
    let b = DenseMatrix::from_fn(n, k, |j, l| vs[l][j]);
    let factor = LowRankFactor::new(a, b);
    if !converged && k == max_rank && k < exhaust {
        return Err(Error::RankCapExceeded {
            max_rank,
            partial: Box::new(factor),
        });
    }
    Ok(factor)
}

const PROBES: usize = 4;

/// Checks a few pseudo-randomly chosen unused rows and returns one whose
/// residual, scaled to the whole block, exceeds `bound`.
fn probe_rows<S: EntrySource + ?Sized>(
    oracle: &S,
    us: &[Vec<Scalar>],
    vs: &[Vec<Scalar>],
    used_rows: &[bool],
    bound: f64,
    state: &mut u64,
    row: &mut [Scalar],
) -> Option<usize> {
    let free: Vec<usize> = (0..used_rows.len()).filter(|&i| !used_rows[i]).collect();
    if free.is_empty() {
        return None;
    }
    let scale = (used_rows.len() as f64).sqrt();
    for _ in 0..PROBES.min(free.len()) {
        *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let i = free[((*state >> 33) % free.len() as u64) as usize];
        oracle.fill_row(i, row);
        for (u, v) in us.iter().zip(vs) {
            let c = u[i];
            for (r, vj) in row.iter_mut().zip(v) {
                *r -= c * vj;
            }
        }
        let rn = row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if rn * scale > bound {
            return Some(i);
        }
    }
    None
}

fn argmax_abs(values: &[Scalar], exclude: &[bool]) -> Option<usize> {
    let mut best = None;
    let mut best_val = -1.0;
    for (i, (v, &ex)) in values.iter().zip(exclude).enumerate() {
        if ex {
            continue;
        }
        let a = v.norm_sqr();
        if a > best_val {
            best_val = a;
            best = Some(i);
        }
    }
    best
}
