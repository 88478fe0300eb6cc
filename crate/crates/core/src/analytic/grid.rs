use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;

use crate::error::{Result, SkgError};
use crate::sigproc::fast_len;

/// A probability density sampled on the uniform grid `x0 + i·dx`.
///
/// Densities are normalized so that the trapezoidal integral is one.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPdf {
    pub x0: f64,
    pub dx: f64,
    pub density: Vec<f64>,
}

impl GridPdf {
    /// Wraps and normalizes raw density values.
    pub fn new(x0: f64, dx: f64, density: Vec<f64>) -> Result<Self> {
        if !(x0.is_finite() && dx.is_finite() && dx > 0.0) {
            return Err(SkgError::Grid(format!("bad grid origin {x0} / step {dx}")));
        }
        if density.len() < 2 {
            return Err(SkgError::Grid("a grid needs at least two points".into()));
        }
        if density.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(SkgError::Grid(
                "density values must be finite and >= 0".into(),
            ));
        }
        let mut pdf = GridPdf { x0, dx, density };
        let total = pdf.integral();
        if !(total > 0.0 && total.is_finite()) {
            return Err(SkgError::Grid(format!("density integrates to {total}")));
        }
        pdf.density.iter_mut().for_each(|d| *d /= total);
        Ok(pdf)
    }

    /// Samples `f` on `n` points starting at `x0`. An infinite value at the
    /// first point (an integrable singularity) is replaced by `f(x0 + dx/2)`.
    pub fn from_fn(x0: f64, dx: f64, n: usize, f: impl Fn(f64) -> Result<f64>) -> Result<Self> {
        let mut density = Vec::with_capacity(n);
        for i in 0..n {
            let x = x0 + i as f64 * dx;
            let mut v = f(x)?;
            if i == 0 && v.is_infinite() {
                v = f(x0 + 0.5 * dx)?;
            }
            density.push(v);
        }
        Self::new(x0, dx, density)
    }

    pub fn len(&self) -> usize {
        self.density.len()
    }

    pub fn is_empty(&self) -> bool {
        self.density.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    /// Last grid abscissa.
    pub fn x_end(&self) -> f64 {
        self.x(self.len() - 1)
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }

    /// Trapezoidal integral of the density.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.density, self.dx)
    }

    pub fn mean(&self) -> f64 {
        let w: Vec<f64> = (0..self.len())
            .map(|i| self.x(i) * self.density[i])
            .collect();
        trapezoid(&w, self.dx)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let w: Vec<f64> = (0..self.len())
            .map(|i| (self.x(i) - m).powi(2) * self.density[i])
            .collect();
        trapezoid(&w, self.dx)
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Cumulative trapezoid integral at every grid point.
    pub fn cdf_table(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.len());
        out.push(0.0);
        for w in self.density.windows(2) {
            acc += 0.5 * (w[0] + w[1]) * self.dx;
            out.push(acc);
        }
        out
    }

    /// CDF at `x`, exact for the piecewise-linear density.
    pub fn cdf(&self, x: f64) -> f64 {
        cdf_with(&self.cdf_table(), self, x)
    }

    /// Returns a reusable CDF closure, avoiding recomputing the table.
    pub fn cdf_fn(&self) -> impl Fn(f64) -> f64 + '_ {
        let table = self.cdf_table();
        move |x| cdf_with(&table, self, x)
    }

    /// Linearly interpolated density at `x` (zero outside the grid).
    pub fn value_at(&self, x: f64) -> f64 {
        let t = (x - self.x0) / self.dx;
        if t < 0.0 || t > (self.len() - 1) as f64 {
            return 0.0;
        }
        let i = (t.floor() as usize).min(self.len() - 2);
        let f = t - i as f64;
        self.density[i] * (1.0 - f) + self.density[i + 1] * f
    }

    /// Density of `s·X` for `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(SkgError::Grid(format!("scale factor {s} is not > 0")));
        }
        Ok(GridPdf {
            x0: self.x0 * s,
            dx: self.dx * s,
            density: self.density.iter().map(|d| d / s).collect(),
        })
    }

    /// Moves the density onto the grid `x0 + i·dx` by differencing the CDF
    /// over cells centered on the new points, which conserves mass.
    pub fn resample(&self, dx: f64) -> Result<Self> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(SkgError::Grid(format!("bad resampling step {dx}")));
        }
        let table = self.cdf_table();
        let span = self.x_end() - self.x0;
        let n = ((span / dx).ceil() as usize + 1).max(2);
        let density = (0..n)
            .map(|i| {
                let c = self.x0 + i as f64 * dx;
                let lo = if i == 0 { c } else { c - 0.5 * dx };
                let mass = cdf_with(&table, self, c + 0.5 * dx) - cdf_with(&table, self, lo);
                let width = if i == 0 { 0.5 * dx } else { dx };
                (mass / width).max(0.0)
            })
            .collect();
        Self::new(self.x0, dx, density)
    }

    /// Draws `n` samples by inverting the CDF.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        let table = self.cdf_table();
        let total = *table.last().unwrap_or(&1.0);
        (0..n)
            .map(|_| {
                let u: f64 = rng.random::<f64>() * total;
                self.quantile_with(&table, u)
            })
            .collect()
    }

    /// Quantile function.
    pub fn quantile(&self, p: f64) -> f64 {
        let table = self.cdf_table();
        let total = *table.last().unwrap_or(&1.0);
        self.quantile_with(&table, p.clamp(0.0, 1.0) * total)
    }

    fn quantile_with(&self, table: &[f64], u: f64) -> f64 {
        let i = table.partition_point(|&c| c <= u);
        if i == 0 {
            return self.x0;
        }
        if i >= table.len() {
            return self.x_end();
        }
        // within cell [i-1, i] the density is linear, so the CDF is quadratic
        let (d0, d1) = (self.density[i - 1], self.density[i]);
        let r = u - table[i - 1];
        let slope = (d1 - d0) / self.dx;
        let t = if slope.abs() < 1e-300 || d0 * d0 + 2.0 * slope * r < 0.0 {
            if d0 > 0.0 {
                r / d0
            } else {
                0.0
            }
        } else if slope.abs() * self.dx < 1e-9 * d0.max(d1) {
            r / d0
        } else {
            (-d0 + (d0 * d0 + 2.0 * slope * r).sqrt()) / slope
        };
        self.x(i - 1) + t.clamp(0.0, self.dx)
    }
}

fn trapezoid(v: &[f64], dx: f64) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let inner: f64 = v[1..v.len() - 1].iter().sum();
    dx * (inner + 0.5 * (v[0] + v[v.len() - 1]))
}

fn cdf_with(table: &[f64], pdf: &GridPdf, x: f64) -> f64 {
    let total = *table.last().unwrap();
    let t = (x - pdf.x0) / pdf.dx;
    if t <= 0.0 {
        return 0.0;
    }
    if t >= (pdf.len() - 1) as f64 {
        return 1.0;
    }
    let i = t.floor() as usize;
    let f = t - i as f64;
    let (d0, d1) = (pdf.density[i], pdf.density[i + 1]);
    let part = pdf.dx * (d0 * f + 0.5 * (d1 - d0) * f * f);
    ((table[i] + part) / total).clamp(0.0, 1.0)
}

/// Density of `X + Y` for independent `X ~ p`, `Y ~ q`.
///
/// The finer of the two grids is resampled onto the coarser step before the
/// linear convolution (FFT based). Small negative values from round-off are
/// clamped to zero and the result is renormalized.
pub fn convolve_pdfs(p: &GridPdf, q: &GridPdf) -> Result<GridPdf> {
    let dx = p.dx.max(q.dx);
    let p = if p.dx < dx {
        p.resample(dx)?
    } else {
        p.clone()
    };
    let q = if q.dx < dx {
        q.resample(dx)?
    } else {
        q.clone()
    };
    let n = p.len() + q.len() - 1;

    let out: Vec<f64> = if p.len().min(q.len()) <= 64 {
        let mut out = vec![0.0; n];
        for (i, a) in p.density.iter().enumerate() {
            for (j, b) in q.density.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        out
    } else {
        let m = fast_len(n);
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(m);
        let inv = planner.plan_fft_inverse(m);
        let mut a: Vec<Complex64> = p.density.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let mut b: Vec<Complex64> = q.density.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        a.resize(m, Complex64::default());
        b.resize(m, Complex64::default());
        fwd.process(&mut a);
        fwd.process(&mut b);
        a.iter_mut().zip(&b).for_each(|(x, y)| *x *= y);
        inv.process(&mut a);
        a[..n].iter().map(|c| (c.re / m as f64).max(0.0)).collect()
    };
    GridPdf::new(p.x0 + q.x0, dx, out.into_iter().map(|v| v * dx).collect())
}
