use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result};

fn ln_gamma_pdf(x: f64, shape: f64, scale: f64) -> f64 {
    (shape - 1.0) * x.ln() - x / scale - ln_gamma(shape) - shape * scale.ln()
}

/// Gamma density in the shape/scale convention, evaluated in log space so
/// large shapes (e.g. `(C−1)/2 ≈ 5000`) do not overflow.
///
/// At `x = 0` the density is `+inf` for `shape < 1`.
pub fn gamma_pdf(x: f64, shape: f64, scale: f64) -> Result<f64> {
    if !(shape.is_finite() && shape > 0.0) {
        return Err(invalid("shape", format!("{shape} is not > 0")));
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(invalid("scale", format!("{scale} is not > 0")));
    }
    if x.is_nan() || x < 0.0 {
        return Err(invalid("x", format!("{x} is not >= 0")));
    }
    if x == 0.0 {
        return Ok(if shape < 1.0 {
            f64::INFINITY
        } else if shape == 1.0 {
            1.0 / scale
        } else {
            0.0
        });
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(ln_gamma_pdf(x, shape, scale).exp())
}

/// Central χ² density with `dof` degrees of freedom.
pub fn chi2_pdf(x: f64, dof: f64) -> Result<f64> {
    gamma_pdf(x, dof / 2.0, 2.0)
}

/// Noncentral χ² density as a Poisson(λ/2) mixture of central χ²(k + 2j)
/// densities.
///
/// The sum starts at the largest term and walks outwards until the terms
/// stop contributing, so it stays accurate for large `λx`.
pub fn ncx2_pdf(x: f64, dof: f64, noncentrality: f64) -> Result<f64> {
    if !(dof.is_finite() && dof >= 1.0) {
        return Err(invalid("dof", format!("{dof} is not >= 1")));
    }
    let lambda = noncentrality;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(invalid("noncentrality", format!("{lambda} is not >= 0")));
    }
    if x.is_nan() || x < 0.0 {
        return Err(invalid("x", format!("{x} is not >= 0")));
    }
    if lambda == 0.0 {
        return chi2_pdf(x, dof);
    }
    if x == 0.0 {
        // only the j = 0 term can be non-zero
        return Ok((-lambda / 2.0).exp() * chi2_pdf(0.0, dof)?);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }

    let half_k = dof / 2.0;
    let mu = lambda / 2.0;
    let ln_term = |j: f64| -> f64 {
        // ln Pois(j; μ) + ln χ²_{k+2j}(x)
        let ln_pois = -mu + j * mu.ln() - ln_gamma(j + 1.0);
        ln_pois + ln_gamma_pdf(x, half_k + j, 2.0)
    };
    // ratio t_{j+1}/t_j = (λx/4) / ((j+1)(k/2+j)); start near its root
    let c = lambda * x / 4.0;
    let b = half_k + 1.0;
    let root = (-b + (b * b - 4.0 * (half_k - c)).max(0.0).sqrt()) / 2.0;
    let j0 = root.max(0.0).floor();
    let peak = ln_term(j0);

    let mut sum = 1.0;
    let mut j = j0 + 1.0;
    loop {
        let t = (ln_term(j) - peak).exp();
        sum += t;
        if t < 1e-17 * sum {
            break;
        }
        j += 1.0;
    }
    let mut j = j0 - 1.0;
    while j >= 0.0 {
        let t = (ln_term(j) - peak).exp();
        sum += t;
        if t < 1e-17 * sum {
            break;
        }
        j -= 1.0;
    }
    Ok(peak.exp() * sum)
}
