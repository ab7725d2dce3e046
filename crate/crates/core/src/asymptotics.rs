//! Large-system analysis of cache-aware RZF precoding.
//!
//! With `rho = D_k / M` and `xi = alpha_k / M`, the quadratic form
//! `g^H (F^H F / M + xi I)^{-1} g / M` converges to the Marchenko-Pastur
//! resolvent `G(rho, xi) = ∫ (mu + xi)^{-1} dF_rho(mu)`, the positive root of
//! `xi G^2 + (xi - 1 + rho) G - 1 = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticParams {
    /// Load ratio `D_k / M`.
    pub rho: f64,
    /// Normalized regularizer `alpha_k / M`.
    pub xi: f64,
}

impl AsymptoticParams {
    pub fn new(rho: f64, xi: f64) -> Result<Self> {
        check(rho, xi)?;
        Ok(AsymptoticParams { rho, xi })
    }

    pub fn g(&self) -> f64 {
        g_root(self.rho, self.xi)
    }
}

fn check(rho: f64, xi: f64) -> Result<()> {
    if !(xi > 0.0) || !xi.is_finite() {
        return Err(Error::InvalidRegularizer(xi));
    }
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::config(format!("load ratio must be nonnegative, got {rho}")));
    }
    Ok(())
}

/// `sqrt((xi - 1 + rho)^2 + 4 xi)`, equal to the radical in the closed form times `xi`.
fn discriminant_root(rho: f64, xi: f64) -> f64 {
    let b = xi - 1.0 + rho;
    (b * b + 4.0 * xi).sqrt()
}

// Positive root, picking the cancellation-free branch.
fn g_root(rho: f64, xi: f64) -> f64 {
    let b = xi - 1.0 + rho;
    let s = discriminant_root(rho, xi);
    if b <= 0.0 {
        (s - b) / (2.0 * xi)
    } else {
        2.0 / (b + s)
    }
}

/// `G(rho, xi) = ½ [ sqrt((1-rho)²/xi² + 2(1+rho)/xi + 1) + (1-rho)/xi - 1 ]`.
pub fn g_closed(rho: f64, xi: f64) -> Result<f64> {
    check(rho, xi)?;
    Ok(g_root(rho, xi))
}

/// `dG/dxi = -(G² + G) / (2 xi G + xi - 1 + rho)` from implicit differentiation
/// of the quadratic. The denominator equals `sqrt((xi-1+rho)² + 4 xi) > 0`.
pub fn g_derivative(rho: f64, xi: f64) -> Result<f64> {
    check(rho, xi)?;
    let g = g_root(rho, xi);
    Ok(-(g * g + g) / discriminant_root(rho, xi))
}

/// Quadrature oracle for `G`: the atom `(1 - rho)^+ / xi` plus the continuous
/// Marchenko-Pastur part integrated with composite Gauss-Legendre after
/// `mu = c + r sin(theta)`, which removes the square-root edges.
pub fn g_integral_oracle(rho: f64, xi: f64, quadrature_points: usize) -> Result<f64> {
    check(rho, xi)?;
    let atom = (1.0 - rho).max(0.0) / xi;
    Ok(atom + mp_integral(rho, quadrature_points, |mu| 1.0 / (mu + xi)))
}

/// `∫ f(mu) p_rho(mu) dmu` over the continuous part of the Marchenko-Pastur law.
pub fn mp_integral(rho: f64, quadrature_points: usize, f: impl Fn(f64) -> f64) -> f64 {
    let sr = rho.sqrt();
    let lo = (1.0 - sr).powi(2);
    let hi = (1.0 + sr).powi(2);
    let center = 0.5 * (lo + hi);
    let radius = 0.5 * (hi - lo);
    if radius == 0.0 {
        return 0.0;
    }
    // density sqrt((mu-lo)(hi-mu)) / (2 pi mu) times dmu = r cos(theta) dtheta
    let integrand = |theta: f64| {
        let mu = center + radius * theta.sin();
        let c = theta.cos();
        radius * radius * c * c / (2.0 * std::f64::consts::PI * mu) * f(mu)
    };
    let half_pi = std::f64::consts::FRAC_PI_2;
    composite_gauss_legendre(integrand, -half_pi, half_pi, quadrature_points)
}

const PANEL_ORDER: usize = 8;

fn composite_gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, points: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(PANEL_ORDER);
    let panels = (points / PANEL_ORDER).max(1);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        let panel: f64 = nodes.iter().zip(&weights).map(|(x, w)| w * f(mid + 0.5 * width * x)).sum();
        total += 0.5 * width * panel;
    }
    total
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Deterministic received signal power `-M beta G² E_k / (dG/dxi)`.
pub fn rzf_signal_power(antennas: f64, beta: f64, power: f64, rho: f64, xi: f64) -> Result<f64> {
    let g = g_closed(rho, xi)?;
    let dg = g_derivative(rho, xi)?;
    Ok(-antennas * beta * g * g * power / dg)
}

/// Deterministic interference power from user `l`: `beta E_l / (1 + G(rho_l, xi_l))²`.
pub fn rzf_interference_power(beta: f64, power: f64, rho: f64, xi: f64) -> Result<f64> {
    let g = g_closed(rho, xi)?;
    Ok(beta * power / (1.0 + g).powi(2))
}

/// Large-system RZF rate; `interferers` holds `(E_l, rho_l, xi_l)` for `l` in `U_k`.
pub fn rzf_rate(
    antennas: f64,
    beta: f64,
    power: f64,
    interferers: &[(f64, f64, f64)],
    rho: f64,
    xi: f64,
    noise_power: f64,
) -> Result<f64> {
    let signal = rzf_signal_power(antennas, beta, power, rho, xi)?;
    let mut interference = 0.0;
    for &(e_l, rho_l, xi_l) in interferers {
        interference += rzf_interference_power(beta, e_l, rho_l, xi_l)?;
    }
    Ok((1.0 + signal / (interference + noise_power)).log2())
}
