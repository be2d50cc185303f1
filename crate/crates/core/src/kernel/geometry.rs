use crate::clustering::Point3;
use crate::error::{Error, Result};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Square cross-section of a tenth of a wavelength; extent is the length.
    Rod,
    /// Square plate a tenth of a wavelength thick; extent is the side length.
    Slab,
    /// `extent^3` cubes of 0.3 wavelengths separated by 0.3 wavelength gaps;
    /// extent is the number of cubes per edge.
    CubeArray,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::Rod => "rod",
            Shape::Slab => "slab",
            Shape::CubeArray => "cube_array",
        })
    }
}

impl FromStr for Shape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rod" => Ok(Shape::Rod),
            "slab" => Ok(Shape::Slab),
            "cube_array" | "cube-array" | "cubes" => Ok(Shape::CubeArray),
            other => Err(Error::Config(format!("unknown shape '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VoxelGeometry {
    pub centers: Vec<Point3>,
    pub volumes: Vec<f64>,
    pub shape: Shape,
    /// Voxel counts along x, y, z of the (full) lattice.
    pub dims: [usize; 3],
    pub wavelength: f64,
}

impl VoxelGeometry {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Builds a geometry from explicit centers sharing one voxel volume.
    pub fn from_points(centers: Vec<Point3>, volume: f64, wavelength: f64) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::InvalidParameter("geometry has zero voxels".into()));
        }
        if !(volume > 0.0) {
            return Err(Error::InvalidParameter(format!("voxel volume must be positive, got {volume}")));
        }
        let n = centers.len();
        Ok(Self {
            centers,
            volumes: vec![volume; n],
            shape: Shape::Rod,
            dims: [n, 1, 1],
            wavelength,
        })
    }
}

fn count(len_wl: f64, vpw: f64) -> usize {
    (len_wl * vpw).round().max(1.0) as usize
}

/// Uniform cartesian voxel lattice for one of the test shapes.
///
/// Lengths are in wavelengths `2 pi / k0`; `voxels_per_wavelength` fixes the
/// lattice spacing `h = lambda / vpw`.
pub fn generate_geometry(shape: Shape, extent: f64, voxels_per_wavelength: f64, k0: f64) -> Result<VoxelGeometry> {
    if !(extent > 0.0 && extent.is_finite()) {
        return Err(Error::InvalidParameter(format!("extent must be positive, got {extent}")));
    }
    if !(voxels_per_wavelength >= 8.0) {
        return Err(Error::InvalidParameter(format!(
            "need at least 8 voxels per wavelength, got {voxels_per_wavelength}"
        )));
    }
    if !(k0 > 0.0 && k0.is_finite()) {
        return Err(Error::InvalidParameter(format!("k0 must be positive to define a wavelength, got {k0}")));
    }
    let lambda = 2.0 * PI / k0;
    let h = lambda / voxels_per_wavelength;
    let thin = count(0.1, voxels_per_wavelength);
    let mut centers = Vec::new();
    let dims = match shape {
        Shape::Rod => {
            let d = [count(extent, voxels_per_wavelength), thin, thin];
            lattice(d, h, [0.0; 3], &mut centers);
            d
        }
        Shape::Slab => {
            let side = count(extent, voxels_per_wavelength);
            let d = [side, side, thin];
            lattice(d, h, [0.0; 3], &mut centers);
            d
        }
        Shape::CubeArray => {
            let m = extent.round() as usize;
            if m == 0 || (extent - m as f64).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "cube array extent must be a positive integer count, got {extent}"
                )));
            }
            let c = count(0.3, voxels_per_wavelength);
            let pitch = 2 * c;
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        let off = [(i * pitch) as f64 * h, (j * pitch) as f64 * h, (k * pitch) as f64 * h];
                        lattice([c, c, c], h, off, &mut centers);
                    }
                }
            }
            let edge = m * pitch - c;
            [edge, edge, edge]
        }
    };
    if centers.is_empty() {
        return Err(Error::InvalidParameter("geometry has zero voxels".into()));
    }
    let n = centers.len();
    Ok(VoxelGeometry {
        centers,
        volumes: vec![h * h * h; n],
        shape,
        dims,
        wavelength: lambda,
    })
}

fn lattice(d: [usize; 3], h: f64, off: [f64; 3], out: &mut Vec<Point3>) {
    for i in 0..d[0] {
        for j in 0..d[1] {
            for k in 0..d[2] {
                out.push(Point3::new(
                    off[0] + (i as f64 + 0.5) * h,
                    off[1] + (j as f64 + 0.5) * h,
                    off[2] + (k as f64 + 0.5) * h,
                ));
            }
        }
    }
}
