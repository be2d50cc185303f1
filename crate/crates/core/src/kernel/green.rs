use super::geometry::VoxelGeometry;
use crate::clustering::Point3;
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, EntrySource, Scalar};
use std::f64::consts::PI;

pub const DEFAULT_EPS_R: f64 = 2.54;
pub const DEFAULT_DENSE_CAP: usize = 6000;

/// Medium parameters of the scattering problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub k0: f64,
    pub eps_r: Scalar,
}

impl KernelParams {
    pub fn new(k0: f64, eps_r: Scalar) -> Result<Self> {
        if !(k0 >= 0.0 && k0.is_finite()) {
            return Err(Error::InvalidParameter(format!("k0 must be non-negative, got {k0}")));
        }
        if eps_r.im > 0.0 {
            return Err(Error::InvalidParameter(format!(
                "Im(eps_r) must be <= 0 for a passive medium, got {eps_r}"
            )));
        }
        Ok(Self { k0, eps_r })
    }

    pub fn chi(&self) -> Scalar {
        self.eps_r - 1.0
    }
}

/// `exp(-j k0 r) / (4 pi r)`.
pub fn helmholtz(r: f64, k0: f64) -> Scalar {
    Scalar::from_polar(1.0, -k0 * r) / (4.0 * PI * r)
}

/// Integral of the Helmholtz kernel over a ball of volume `volume`
/// centred on the observation point.
pub fn self_term(volume: f64, k0: f64) -> Scalar {
    let a = (3.0 * volume / (4.0 * PI)).cbrt();
    let ka = k0 * a;
    if ka < 1e-4 {
        return Scalar::new(a * a / 2.0, -k0 * a * a * a / 3.0);
    }
    let jka = Scalar::new(1.0, ka);
    (jka * Scalar::from_polar(1.0, -ka) - 1.0) / (k0 * k0)
}

/// Entry oracle of `S` over one voxel geometry.
#[derive(Debug, Clone)]
pub struct KernelModel {
    pub geometry: VoxelGeometry,
    pub k0: f64,
    /// Contrast per voxel.
    pub chi: Vec<Scalar>,
    diag_g: Vec<Scalar>,
}

impl KernelModel {
    /// Uniform medium over the whole geometry. Fails on coincident centers.
    pub fn new(geometry: VoxelGeometry, params: KernelParams) -> Result<Self> {
        let chi = vec![params.chi(); geometry.len()];
        Self::with_contrast(geometry, params.k0, chi)
    }

    pub fn with_contrast(geometry: VoxelGeometry, k0: f64, chi: Vec<Scalar>) -> Result<Self> {
        if chi.len() != geometry.len() {
            return Err(Error::DimensionMismatch {
                expected: geometry.len(),
                actual: chi.len(),
            });
        }
        check_distinct(&geometry.centers)?;
        let diag_g = geometry.volumes.iter().map(|&v| self_term(v, k0)).collect();
        Ok(Self {
            geometry,
            k0,
            chi,
            diag_g,
        })
    }

    pub fn n(&self) -> usize {
        self.geometry.len()
    }

    pub fn points(&self) -> &[Point3] {
        &self.geometry.centers
    }

    /// `S_mn` for original indices. Centers are known to be distinct.
    #[inline]
    pub fn entry(&self, m: usize, n: usize) -> Scalar {
        let k2 = self.k0 * self.k0;
        let g = if m == n {
            self.diag_g[m]
        } else {
            let r = self.geometry.centers[m].dist(&self.geometry.centers[n]);
            helmholtz(r, self.k0) * self.geometry.volumes[n]
        };
        let s = -self.chi[n] * g * k2;
        if m == n {
            s + 1.0
        } else {
            s
        }
    }

    /// Entry source over `rows x cols` (original indices).
    pub fn block<'a>(&'a self, rows: &'a [usize], cols: &'a [usize]) -> KernelBlock<'a> {
        KernelBlock { model: self, rows, cols }
    }
}

fn check_distinct(pts: &[Point3]) -> Result<()> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    let key = |i: usize| (pts[i].x, pts[i].y, pts[i].z);
    idx.sort_by(|&a, &b| {
        let (ka, kb) = (key(a), key(b));
        ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1)).then(ka.2.total_cmp(&kb.2))
    });
    for w in idx.windows(2) {
        if pts[w[0]] == pts[w[1]] {
            return Err(Error::CoincidentPoints(w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    Ok(())
}

/// Checked single-entry evaluation.
pub fn matrix_entry(m: usize, n: usize, model: &KernelModel) -> Result<Scalar> {
    let len = model.n();
    if m >= len || n >= len {
        return Err(Error::InvalidParameter(format!("index ({m}, {n}) out of range for N = {len}")));
    }
    if m != n && model.geometry.centers[m] == model.geometry.centers[n] {
        return Err(Error::CoincidentPoints(m, n));
    }
    Ok(model.entry(m, n))
}

/// Incident plane wave `exp(-j k0 d.r)` sampled at the voxel centers.
pub fn plane_wave_rhs(geometry: &VoxelGeometry, k0: f64, direction: Point3) -> Result<Vec<Scalar>> {
    if (direction.dot(&direction).sqrt() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter("propagation direction must be a unit vector".into()));
    }
    Ok(geometry
        .centers
        .iter()
        .map(|r| Scalar::from_polar(1.0, -k0 * direction.dot(r)))
        .collect())
}

/// Full `S` in original ordering; refuses sizes above `cap`.
pub fn assemble_dense(model: &KernelModel, cap: usize) -> Result<DenseMatrix> {
    let n = model.n();
    if n > cap {
        return Err(Error::DenseCapExceeded { n, cap });
    }
    Ok(DenseMatrix::from_fn(n, n, |i, j| model.entry(i, j)))
}

/// Sub-block of `S` addressed through index lists.
#[derive(Clone, Copy)]
pub struct KernelBlock<'a> {
    model: &'a KernelModel,
    rows: &'a [usize],
    cols: &'a [usize],
}

impl EntrySource for KernelBlock<'_> {
    fn nrows(&self) -> usize {
        self.rows.len()
    }

    fn ncols(&self) -> usize {
        self.cols.len()
    }

    fn entry(&self, row: usize, col: usize) -> Scalar {
        self.model.entry(self.rows[row], self.cols[col])
    }
}

impl KernelBlock<'_> {
    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.rows.len(), self.cols.len(), |i, j| self.entry(i, j))
    }
}
