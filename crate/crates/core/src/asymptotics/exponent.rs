use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Group fractions `x, y, z` scaled by `n`; `w = 1 - x - y - z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledPoint {
    pub x: Complex64,
    pub y: Complex64,
    pub z: Complex64,
}

impl ScaledPoint {
    pub fn new(x: Complex64, y: Complex64, z: Complex64) -> Self {
        ScaledPoint { x, y, z }
    }

    /// Point with `z = conj(x)` and real `y`.
    pub fn symmetric(re_x: f64, im_x: f64, y: f64) -> Self {
        let x = Complex64::new(re_x, im_x);
        ScaledPoint {
            x,
            y: Complex64::new(y, 0.0),
            z: x.conj(),
        }
    }

    pub fn w(&self) -> Complex64 {
        Complex64::new(1.0, 0.0) - self.x - self.y - self.z
    }

    pub fn as_array(&self) -> [Complex64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(v: [Complex64; 3]) -> Self {
        ScaledPoint {
            x: v[0],
            y: v[1],
            z: v[2],
        }
    }

    /// `(Re x, Im x, y)`.
    pub fn reduced(&self) -> [f64; 3] {
        [self.x.re, self.x.im, self.y.re]
    }

    /// Deviation from `z = conj(x)`, `y` real.
    pub fn asymmetry(&self) -> f64 {
        (self.z - self.x.conj()).norm().max(self.y.im.abs())
    }
}

/// Scaled clause-group counts at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledCounts {
    pub both: Complex64,
    pub s_only: Complex64,
    pub s_prime_only: Complex64,
    pub other: Complex64,
}

pub fn scaled_counts(k: u32, p: &ScaledPoint) -> ScaledCounts {
    let q = 0.5f64.powi(k as i32);
    let one = Complex64::new(1.0, 0.0);
    let w = p.w();
    let both = ((w + p.y).powu(k) - w.powu(k)) * q;
    let s_only = (one - (w + p.x).powu(k)) * q - both;
    let s_prime_only = (one - (w + p.z).powu(k)) * q - both;
    let other = one * (1.0 - q) - s_only - s_prime_only;
    ScaledCounts {
        both,
        s_only,
        s_prime_only,
        other,
    }
}

/// Which exponent is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentKind {
    /// `E[Psoln]` over the random ensemble.
    #[default]
    Random,
    /// Lower bound for the prespecified-solution ensemble: the probability
    /// of reaching the stored solution, `F - log 2 - mu log(1 - 2^-k)`.
    PrespecifiedBound,
}

/// Fixed inputs of the exponent `F = H + U + mu I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent {
    pub k: u32,
    pub mu: f64,
    pub rho: f64,
    pub tau: f64,
    pub kind: ExponentKind,
    beta_c: f64,
    beta: f64,
    // sign of tan(pi tau / 2)
    sign: f64,
    phase: Complex64,
}

fn log_checked(v: Complex64, what: &str) -> Result<Complex64> {
    if !(v.re.is_finite() && v.im.is_finite())
        || (v.re <= 0.0 && v.im.abs() <= 1e-14 * v.re.abs().max(1e-300))
    {
        return Err(Error::Branch(format!(
            "log of {what} = {v} on or near the branch cut"
        )));
    }
    Ok(v.ln())
}

impl Exponent {
    pub fn new(k: u32, mu: f64, rho: f64, tau: f64, kind: ExponentKind) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("k must be positive"));
        }
        if !(mu >= 0.0 && mu.is_finite()) || !rho.is_finite() {
            return Err(Error::domain(format!("invalid mu = {mu} or rho = {rho}")));
        }
        if !(tau.abs() < 1.0) || tau == 0.0 {
            return Err(Error::domain(format!(
                "tau = {tau}: mixing exponent is singular outside 0 < |tau| < 1"
            )));
        }
        let half = PI * tau / 2.0;
        Ok(Exponent {
            k,
            mu,
            rho,
            tau,
            kind,
            beta_c: half.cos().ln(),
            beta: half.tan().abs().ln(),
            sign: tau.signum(),
            phase: Complex64::from_polar(1.0, PI * rho),
        })
    }

    pub fn with_params(&self, mu: f64, rho: f64, tau: f64) -> Result<Self> {
        Exponent::new(self.k, mu, rho, tau, self.kind)
    }

    fn constant(&self) -> f64 {
        match self.kind {
            ExponentKind::Random => 0.0,
            ExponentKind::PrespecifiedBound => {
                -std::f64::consts::LN_2 - self.mu * (1.0 - 0.5f64.powi(self.k as i32)).ln()
            }
        }
    }

    fn inner_arg(&self, c: &ScaledCounts) -> Complex64 {
        self.phase * c.s_only + self.phase.conj() * c.s_prime_only + c.other
    }

    /// Stationary point of `H + U`, the `mu = 0` limit.
    pub fn mixing_point(&self) -> ScaledPoint {
        let half = PI * self.tau / 2.0;
        let (s, c) = (half.sin().abs(), half.cos());
        ScaledPoint::symmetric(0.0, self.sign * s * c, s * s)
    }

    /// `F` at `p`, principal branches throughout.
    pub fn value(&self, p: &ScaledPoint) -> Result<Complex64> {
        let w = p.w();
        let mut h = Complex64::new(0.0, 0.0);
        for (g, name) in [(w, "w"), (p.x, "x"), (p.y, "y"), (p.z, "z")] {
            if g.norm() > 0.0 {
                h -= g * log_checked(g, name)?;
            }
        }
        let i_half = Complex64::new(0.0, self.sign * PI / 2.0);
        let u = 2.0 * self.beta_c + self.beta * (p.x + 2.0 * p.y + p.z) + i_half * (p.x - p.z);
        let c = scaled_counts(self.k, p);
        let inner = log_checked(self.inner_arg(&c), "inner sum")?;
        Ok(h + u + self.mu * inner + self.constant())
    }

    /// Holomorphic gradient of `F` with respect to `(x, y, z)`.
    pub fn gradient(&self, p: &ScaledPoint) -> Result<[Complex64; 3]> {
        let k = self.k;
        let kf = k as f64;
        let q = 0.5f64.powi(k as i32);
        let w = p.w();
        let lw = log_checked(w, "w")?;
        let (lx, ly, lz) = (
            log_checked(p.x, "x")?,
            log_checked(p.y, "y")?,
            log_checked(p.z, "z")?,
        );
        let one = Complex64::new(1.0, 0.0);
        let a = one - p.x - p.z; // w + y
        let b = one - p.y - p.z; // w + x
        let c = one - p.x - p.y; // w + z
        let pw = |v: Complex64| if k == 1 { one } else { v.powu(k - 1) };
        let (dw, da, db, dc) = (
            pw(w) * kf * q,
            pw(a) * kf * q,
            pw(b) * kf * q,
            pw(c) * kf * q,
        );
        // derivatives of N_both, N_s, N_s'
        let nb = [dw - da, dw, dw - da];
        let ns = [-nb[0], db - nb[1], db - nb[2]];
        let nsp = [dc - nb[0], dc - nb[1], -nb[2]];
        let counts = scaled_counts(k, p);
        let arg = self.inner_arg(&counts);
        log_checked(arg, "inner sum")?;
        let e1 = self.phase - one;
        let e2 = self.phase.conj() - one;
        let i_half = Complex64::new(0.0, self.sign * PI / 2.0);
        let dh = [lw - lx, lw - ly, lw - lz];
        let du = [
            self.beta + i_half,
            Complex64::new(2.0 * self.beta, 0.0),
            self.beta - i_half,
        ];
        let mut g = [Complex64::new(0.0, 0.0); 3];
        for j in 0..3 {
            g[j] = dh[j] + du[j] + self.mu * (e1 * ns[j] + e2 * nsp[j]) / arg;
        }
        Ok(g)
    }

    /// Analytic complex Hessian of `F`.
    pub fn hessian_analytic(&self, p: &ScaledPoint) -> Result<[[Complex64; 3]; 3]> {
        let k = self.k;
        let kf = k as f64;
        let q = 0.5f64.powi(k as i32);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let w = p.w();
        let a = one - p.x - p.z;
        let b = one - p.y - p.z;
        let c = one - p.x - p.y;
        let d1 = |v: Complex64| if k == 1 { one } else { v.powu(k - 1) } * kf * q;
        let d2 = |v: Complex64| match k {
            1 => zero,
            2 => one * 2.0 * q,
            _ => v.powu(k - 2) * kf * (kf - 1.0) * q,
        };
        let alpha = [1.0, 0.0, 1.0];
        let beta = [0.0, 1.0, 1.0];
        let gamma = [1.0, 1.0, 0.0];
        let (dw, da, db, dc) = (d1(w), d1(a), d1(b), d1(c));
        let nb = [dw - da, dw, dw - da];
        let ns = [-nb[0], db - nb[1], db - nb[2]];
        let nsp = [dc - nb[0], dc - nb[1], -nb[2]];
        let arg = self.inner_arg(&scaled_counts(k, p));
        log_checked(arg, "inner sum")?;
        let e1 = self.phase - one;
        let e2 = self.phase.conj() - one;
        let g = [p.x, p.y, p.z];
        let mut out = [[zero; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let nb2 = d2(a) * alpha[i] * alpha[j] - d2(w);
                let ns2 = -d2(b) * beta[i] * beta[j] - nb2;
                let nsp2 = -d2(c) * gamma[i] * gamma[j] - nb2;
                let qi = e1 * ns[i] + e2 * nsp[i];
                let qj = e1 * ns[j] + e2 * nsp[j];
                let qij = e1 * ns2 + e2 * nsp2;
                let mut h = -one / w;
                if i == j {
                    h -= one / g[i];
                }
                out[i][j] = h + self.mu * (qij / arg - qi * qj / (arg * arg));
            }
        }
        Ok(out)
    }

    /// Complex Hessian by central differences of the gradient, Richardson
    /// refined (`(4 D(h/2) - D(h)) / 3`).
    pub fn hessian(&self, p: &ScaledPoint, h: f64) -> Result<[[Complex64; 3]; 3]> {
        let d1 = self.hessian_raw(p, h)?;
        let d2 = self.hessian_raw(p, h / 2.0)?;
        let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = (4.0 * d2[i][j] - d1[i][j]) / 3.0;
            }
        }
        for i in 0..3 {
            for j in 0..i {
                let s = (out[i][j] + out[j][i]) / 2.0;
                out[i][j] = s;
                out[j][i] = s;
            }
        }
        Ok(out)
    }

    pub(crate) fn hessian_raw(&self, p: &ScaledPoint, h: f64) -> Result<[[Complex64; 3]; 3]> {
        let base = p.as_array();
        let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
        for j in 0..3 {
            let mut plus = base;
            let mut minus = base;
            plus[j] += h;
            minus[j] -= h;
            let gp = self.gradient(&ScaledPoint::from_array(plus))?;
            let gm = self.gradient(&ScaledPoint::from_array(minus))?;
            for i in 0..3 {
                out[i][j] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        Ok(out)
    }
}

pub(crate) fn det3(m: &[[Complex64; 3]; 3]) -> Complex64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Solves `m v = rhs` by Gaussian elimination with partial pivoting.
pub(crate) fn solve3<T>(
    mut m: [[T; 3]; 3],
    mut rhs: [T; 3],
    abs: impl Fn(T) -> f64,
) -> Option<[T; 3]>
where
    T: Copy + std::ops::Sub<Output = T> + std::ops::Mul<Output = T> + std::ops::Div<Output = T>,
{
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| abs(m[a][col]).total_cmp(&abs(m[b][col])))?;
        if !(abs(m[piv][col]) > 1e-300) {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..3 {
            let f = m[r][col] / m[col][col];
            for c in col..3 {
                m[r][c] = m[r][c] - f * m[col][c];
            }
            rhs[r] = rhs[r] - f * rhs[col];
        }
    }
    let mut out = rhs;
    for r in (0..3).rev() {
        let mut acc = rhs[r];
        for c in r + 1..3 {
            acc = acc - m[r][c] * out[c];
        }
        out[r] = acc / m[r][r];
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn counts_at_quarter_point() {
        let q = ScaledPoint::new(c(0.25, 0.0), c(0.25, 0.0), c(0.25, 0.0));
        let n = scaled_counts(3, &q);
        assert!((n.both.re - 0.013671875).abs() < 1e-15);
        let zero = scaled_counts(3, &ScaledPoint::new(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)));
        assert!(zero.s_only.norm() < 1e-15 && zero.both.norm() < 1e-15);
        assert!((zero.other.re - 0.875).abs() < 1e-15);
    }

    #[test]
    fn symmetric_point_real_inner() {
        let e = Exponent::new(3, 2.0, 0.0, 0.3, ExponentKind::Random).unwrap();
        let q = ScaledPoint::new(c(0.25, 0.0), c(0.25, 0.0), c(0.25, 0.0));
        let n = scaled_counts(3, &q);
        assert!(e.inner_arg(&n).im.abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_differences() {
        let pts = [
            ScaledPoint::new(c(0.1, 0.15), c(0.09, 0.01), c(0.12, -0.14)),
            ScaledPoint::new(c(0.3, -0.05), c(0.2, 0.0), c(0.1, 0.2)),
            ScaledPoint::symmetric(0.101, 0.158, 0.088),
        ];
        for k in [2, 3, 4] {
            let e = Exponent::new(k, 4.0, 0.218, 0.286, ExponentKind::Random).unwrap();
            for p in &pts {
                let g = e.gradient(p).unwrap();
                let h = 1e-6;
                for j in 0..3 {
                    let mut a = p.as_array();
                    let mut b = p.as_array();
                    a[j] += h;
                    b[j] -= h;
                    let fd = (e.value(&ScaledPoint::from_array(a)).unwrap()
                        - e.value(&ScaledPoint::from_array(b)).unwrap())
                        / (2.0 * h);
                    assert!((fd - g[j]).norm() < 1e-6, "k {k} j {j}: {fd} vs {}", g[j]);
                }
            }
        }
    }

    #[test]
    fn mixing_point_is_stationary_without_clauses() {
        for tau in [0.2, 0.5, -0.3] {
            let e = Exponent::new(3, 0.0, 0.4, tau, ExponentKind::Random).unwrap();
            let p = e.mixing_point();
            assert!(e.gradient(&p).unwrap().iter().all(|g| g.norm() < 1e-12));
            assert!(e.value(&p).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn analytic_hessian_matches_differences() {
        let p = ScaledPoint::new(c(0.1, 0.15), c(0.09, 0.01), c(0.12, -0.14));
        for k in [1, 2, 3, 5] {
            let e = Exponent::new(k, 4.0, 0.218, 0.286, ExponentKind::Random).unwrap();
            let a = e.hessian_analytic(&p).unwrap();
            let f = e.hessian(&p, 1e-5).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    assert!(
                        (a[i][j] - f[i][j]).norm() < 1e-7 * (1.0 + a[i][j].norm()),
                        "k {k} {i}{j}"
                    );
                }
            }
        }
    }

    #[test]
    fn singular_tau_rejected() {
        assert!(Exponent::new(3, 1.0, 0.2, 0.0, ExponentKind::Random).is_err());
        assert!(Exponent::new(3, 1.0, 0.2, 1.0, ExponentKind::Random).is_err());
    }

    #[test]
    fn branch_cut_detected() {
        let e = Exponent::new(3, 1.0, 0.2, 0.3, ExponentKind::Random).unwrap();
        let p = ScaledPoint::new(c(-0.1, 0.0), c(0.2, 0.0), c(0.2, 0.0));
        assert!(matches!(e.value(&p), Err(Error::Branch(_))));
    }

    #[test]
    fn linear_solvers() {
        let m = [[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]];
        let v = solve3(m, [3.0, 5.0, 5.0], f64::abs).unwrap();
        for (a, b) in v.iter().zip([1.0, 1.0, 1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        let cm = m.map(|r| r.map(|v| c(v, 0.0)));
        assert!((det3(&cm).re - 18.0).abs() < 1e-12);
    }
}
