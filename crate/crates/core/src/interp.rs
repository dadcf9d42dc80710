//! Periodic tensor-product cubic convolution (Keys, a = -1/2) on a grid.

use num_complex::Complex64;

use crate::grid::SpatialGrid;

pub struct PeriodicCubic<'a> {
    grid: &'a SpatialGrid,
    values: &'a [Complex64],
    strides: Vec<usize>,
}

fn keys(x: f64) -> f64 {
    let x = x.abs();
    if x < 1.0 {
        (1.5 * x - 2.5) * x * x + 1.0
    } else if x < 2.0 {
        ((-0.5 * x + 2.5) * x - 4.0) * x + 2.0
    } else {
        0.0
    }
}

impl<'a> PeriodicCubic<'a> {
    pub fn new(grid: &'a SpatialGrid, values: &'a [Complex64]) -> Self {
        Self { grid, values, strides: grid.strides() }
    }

    pub fn eval(&self, y: &[f64]) -> Complex64 {
        let n = self.grid.dim();
        let mut base = [[0usize; 4]; 8];
        let mut wts = [[0.0f64; 4]; 8];
        debug_assert!(n <= 8);
        for k in 0..n {
            let size = self.grid.size(k) as i64;
            let u = (y[k] + self.grid.half_extent(k)) / self.grid.spacing(k);
            let i0 = u.floor();
            let frac = u - i0;
            for j in 0..4 {
                let off = j as i64 - 1;
                let idx = (i0 as i64 + off).rem_euclid(size) as usize;
                base[k][j] = idx * self.strides[k];
                wts[k][j] = keys(frac - off as f64);
            }
        }
        let mut acc = Complex64::new(0.0, 0.0);
        let combos = 4usize.pow(n as u32);
        for c in 0..combos {
            let mut rest = c;
            let mut idx = 0;
            let mut w = 1.0;
            for k in 0..n {
                let j = rest % 4;
                rest /= 4;
                idx += base[k][j];
                w *= wts[k][j];
            }
            if w != 0.0 {
                acc += self.values[idx] * w;
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_interpolates_nodes() {
        assert_eq!(keys(0.0), 1.0);
        assert_eq!(keys(1.0), 0.0);
        assert_eq!(keys(2.0), 0.0);
        let s: f64 = (-1..=2).map(|j| keys(0.3 - j as f64)).sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reproduces_grid_values_and_smooth_functions() {
        let grid = SpatialGrid::new(2, 4.0, 64).unwrap();
        let f = |x: &[f64]| (-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp();
        let mut p = vec![0.0; 2];
        let vals: Vec<Complex64> = (0..grid.len())
            .map(|i| {
                grid.point(i, &mut p);
                Complex64::new(f(&p), 0.0)
            })
            .collect();
        let table = PeriodicCubic::new(&grid, &vals);
        grid.point(1234, &mut p);
        assert!((table.eval(&p) - vals[1234]).norm() < 1e-14);
        let y = [0.3217, -0.4411];
        assert!((table.eval(&y).re - f(&y)).abs() < 2e-4);
    }
}
