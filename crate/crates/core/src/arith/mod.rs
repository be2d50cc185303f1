//! H2 arithmetic: products with vectors and blocks, formatted addition and
//! multiplication with fixed cluster bases, the recursive block inverse and
//! an unpreconditioned BiCGStab solver.

mod bicgstab;
mod formatted;
mod inverse;
mod matvec;

pub use bicgstab::{bicgstab_solve, SolveReport};
pub use formatted::{h2_add_formatted, h2_mul_formatted, mul_add};
pub use inverse::{apply_inverse_solve, h2_invert};
pub use matvec::{matmat_apply, matvec};
