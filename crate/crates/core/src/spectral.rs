//! Eigenpolynomials of the linearized operator
//! L = -d²/dy² - (α/y) d/dy + (y/2) d/dy - k in L²_ρ, ρ(y) = y^α e^{-y²/4}.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{invalid, Error, Result};
use crate::steady_core::ModelParams;

/// ∫₀^∞ y^s e^{-y²/4} dy = 2^s Γ((s+1)/2).
pub fn gauss_moment(s: f64) -> Result<f64> {
    if !(s > -1.0) {
        return invalid(format!("moment order must exceed -1, got {s}"));
    }
    Ok(2f64.powf(s) * gamma(0.5 * (s + 1.0)))
}

/// The weighted space L²_ρ with ρ(y) = y^α e^{-y²/4}.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSpace {
    pub alpha: f64,
    alpha_exact: BigRational,
}

impl WeightedSpace {
    pub fn new(alpha: f64) -> Result<Self> {
        let exact = BigRational::from_float(alpha).ok_or_else(|| Error::NonFinite("alpha".into()))?;
        Self::from_rational(exact)
    }

    pub fn for_params(params: &ModelParams) -> Result<Self> {
        Self::from_rational(params.alpha_rational())
    }

    fn from_rational(alpha_exact: BigRational) -> Result<Self> {
        let alpha = alpha_exact.to_f64().unwrap_or(f64::NAN);
        if !(1.0..3.0).contains(&alpha) {
            return invalid(format!("drift exponent must lie in [1,3), got {alpha}"));
        }
        Ok(Self { alpha, alpha_exact })
    }

    pub fn alpha_rational(&self) -> &BigRational {
        &self.alpha_exact
    }

    pub fn weight(&self, y: f64) -> f64 {
        y.powf(self.alpha) * (-0.25 * y * y).exp()
    }
}

/// Dense polynomial, `coeffs[n]` multiplies y^n.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * y + c)
    }
}

/// ∫₀^∞ ρ P Q dy evaluated as a finite sum of Gaussian moments.
pub fn inner_product(p: &Polynomial, q: &Polynomial, space: &WeightedSpace) -> Result<f64> {
    let mut total = 0.0;
    for (m, a) in p.coeffs.iter().enumerate() {
        if *a == 0.0 {
            continue;
        }
        for (n, b) in q.coeffs.iter().enumerate() {
            if *b == 0.0 {
                continue;
            }
            total += a * b * gauss_moment((m + n) as f64 + space.alpha)?;
        }
    }
    Ok(total)
}

/// Normalized eigenfunction φ_j = Σ_i b_{j,i} y^{2i} with eigenvalue λ_j = j - k.
#[derive(Debug, Clone, Serialize)]
pub struct EigenPoly {
    pub j: usize,
    pub lambda: f64,
    /// Normalized coefficients b_{j,0..j} of y^0, y^2, ..., y^{2j}.
    pub coeffs: Vec<f64>,
    /// Value at 0 of the unnormalized polynomial with leading coefficient (-1)^j.
    pub b0_unnormalized: f64,
    /// L²_ρ norm of the unnormalized polynomial.
    pub norm_unnormalized: f64,
    #[serde(skip)]
    raw: Vec<BigRational>,
}

impl EigenPoly {
    /// Exact coefficients with b_{j,j} = (-1)^j.
    pub fn raw_coeffs(&self) -> &[BigRational] {
        &self.raw
    }

    pub fn eval(&self, y: f64) -> f64 {
        let y2 = y * y;
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * y2 + c)
    }

    pub fn deriv(&self, y: f64) -> f64 {
        let y2 = y * y;
        let mut acc = 0.0;
        for i in (1..self.coeffs.len()).rev() {
            acc = acc * y2 + 2.0 * i as f64 * self.coeffs[i];
        }
        acc * y
    }

    pub fn phi0(&self) -> f64 {
        self.coeffs[0]
    }

    /// Expansion in ordinary powers of y.
    pub fn to_polynomial(&self) -> Polynomial {
        let mut c = vec![0.0; 2 * self.j + 1];
        for (i, b) in self.coeffs.iter().enumerate() {
            c[2 * i] = *b;
        }
        Polynomial::new(c)
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Exact unnormalized coefficients from the downward recursion
/// b_i = -2(i+1)(2i+1+α)/(j-i) b_{i+1}, b_j = (-1)^j.
pub fn raw_coefficients(j: usize, alpha: &BigRational) -> Vec<BigRational> {
    let mut b = vec![BigRational::zero(); j + 1];
    b[j] = if j % 2 == 0 { BigRational::one() } else { -BigRational::one() };
    for i in (0..j).rev() {
        let ii = i as i64;
        let factor = rat(-2 * (ii + 1)) * (rat(2 * ii + 1) + alpha) / rat(j as i64 - ii);
        b[i] = factor * &b[i + 1];
    }
    b
}

/// (a)_n = a (a+1) ... (a+n-1).
fn pochhammer(a: &BigRational, n: usize) -> BigRational {
    let mut r = BigRational::one();
    for i in 0..n {
        r *= a + rat(i as i64);
    }
    r
}

/// ∫ρ P Q / ∫ρ for even polynomials given by exact coefficients of y^{2i}.
///
/// Uses M(α+2n)/M(α) = 4^n ((α+1)/2)_n, so the result is an exact rational.
pub fn relative_inner_exact(p: &[BigRational], q: &[BigRational], alpha: &BigRational) -> BigRational {
    let half = (alpha + BigRational::one()) / rat(2);
    let nmax = p.len() + q.len();
    let mut ratios = Vec::with_capacity(nmax);
    let mut four = BigRational::one();
    for n in 0..nmax {
        ratios.push(&four * pochhammer(&half, n));
        four *= rat(4);
    }
    let mut total = BigRational::zero();
    for (m, a) in p.iter().enumerate() {
        for (n, b) in q.iter().enumerate() {
            total += a * b * &ratios[m + n];
        }
    }
    total
}

/// Builds the normalized eigenpolynomial φ_j.
pub fn eigenpoly(j: usize, space: &WeightedSpace, params: &ModelParams) -> Result<EigenPoly> {
    let raw = raw_coefficients(j, space.alpha_rational());
    let rel = relative_inner_exact(&raw, &raw, space.alpha_rational());
    let norm_sq = rel.to_f64().unwrap_or(f64::NAN) * gauss_moment(space.alpha)?;
    if !(norm_sq > 0.0 && norm_sq.is_finite()) {
        return Err(Error::Construction(format!("norm of φ_{j} is {norm_sq}")));
    }
    let norm = norm_sq.sqrt();
    let coeffs: Vec<f64> = raw.iter().map(|b| b.to_f64().unwrap_or(f64::NAN) / norm).collect();
    Ok(EigenPoly {
        j,
        lambda: j as f64 - params.k,
        b0_unnormalized: raw[0].to_f64().unwrap_or(f64::NAN),
        norm_unnormalized: norm,
        coeffs,
        raw,
    })
}

/// Coefficients of Lφ - λ_j φ for the exact unnormalized φ_j, in powers y^{-2}, y^0, y^2, ...
///
/// Every entry is zero exactly when φ_j is an eigenfunction with eigenvalue j - k.
pub fn eigen_residual_exact(j: usize, params: &ModelParams) -> Vec<BigRational> {
    let alpha = params.alpha_rational();
    let k = params.k_rational();
    let lambda = rat(j as i64) - &k;
    let b = raw_coefficients(j, &alpha);
    // index 0 holds y^{-2}; index i+1 holds y^{2i}
    let mut r = vec![BigRational::zero(); j + 2];
    for (i, bi) in b.iter().enumerate() {
        let ii = rat(i as i64);
        // -φ'' - (α/y) φ' contribute -(2i(2i-1) + 2iα) b_i y^{2i-2}
        let down = -(rat(2 * i as i64) * (rat(2 * i as i64 - 1) + &alpha)) * bi;
        r[i] += down;
        // (y/2) φ' - kφ - λφ contribute (i - k - λ) b_i y^{2i}
        r[i + 1] += (&ii - &k - &lambda) * bi;
    }
    r
}

/// Gram matrix (φ_i, φ_j) for i, j ≤ jmax, exact up to the final square roots.
pub fn gram_matrix(jmax: usize, space: &WeightedSpace) -> Vec<Vec<f64>> {
    let alpha = space.alpha_rational();
    let raws: Vec<Vec<BigRational>> = (0..=jmax).map(|j| raw_coefficients(j, alpha)).collect();
    let diag: Vec<f64> = raws
        .iter()
        .map(|r| relative_inner_exact(r, r, alpha).to_f64().unwrap_or(f64::NAN))
        .collect();
    let mut g = vec![vec![0.0; jmax + 1]; jmax + 1];
    for i in 0..=jmax {
        for j in i..=jmax {
            let v = if i == j {
                1.0
            } else {
                let e = relative_inner_exact(&raws[i], &raws[j], alpha);
                if e.is_zero() {
                    0.0
                } else {
                    e.to_f64().unwrap_or(f64::NAN) / (diag[i] * diag[j]).sqrt()
                }
            };
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    g
}

/// Gram matrix computed entirely in floating point from normalized coefficients.
pub fn gram_matrix_float(jmax: usize, space: &WeightedSpace, params: &ModelParams) -> Result<Vec<Vec<f64>>> {
    let polys: Vec<Polynomial> = (0..=jmax)
        .map(|j| eigenpoly(j, space, params).map(|e| e.to_polynomial()))
        .collect::<Result<_>>()?;
    let mut g = vec![vec![0.0; jmax + 1]; jmax + 1];
    for i in 0..=jmax {
        for j in 0..=jmax {
            g[i][j] = inner_product(&polys[i], &polys[j], space)?;
        }
    }
    Ok(g)
}

/// The j positive zeros of φ_j, located by a sign-change scan on [0, 2√(2j+α)+4]
/// and refined by bisection to 1e-12.
pub fn positive_zeros(phi: &EigenPoly, space: &WeightedSpace) -> Result<Vec<f64>> {
    let j = phi.j;
    if j == 0 {
        return Ok(Vec::new());
    }
    let ymax = 2.0 * (2.0 * j as f64 + space.alpha).sqrt() + 4.0;
    let n = 400 * (j + 1);
    let mut roots = Vec::with_capacity(j);
    let mut ya = 0.0;
    let mut fa = phi.eval(ya);
    for i in 1..=n {
        let yb = ymax * i as f64 / n as f64;
        let fb = phi.eval(yb);
        if fb == 0.0 {
            roots.push(yb);
        } else if fa * fb < 0.0 {
            roots.push(bisect(|y| phi.eval(y), ya, yb, 1e-12));
        }
        ya = yb;
        fa = fb;
    }
    if roots.len() != j {
        return Err(Error::Construction(format!(
            "φ_{j} has {} positive zeros on the scan range, expected {j}",
            roots.len()
        )));
    }
    for &r in &roots {
        if phi.deriv(r) == 0.0 {
            return Err(Error::Construction(format!("zero {r} of φ_{j} is not simple")));
        }
    }
    Ok(roots)
}

pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    while b - a > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Sign pattern check: all b_{j,i} nonzero and alternating, with b_{j,0} > 0.
pub fn has_alternating_signs(raw: &[BigRational]) -> bool {
    raw.iter()
        .enumerate()
        .all(|(i, b)| !b.is_zero() && b.is_positive() == (i % 2 == 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> (ModelParams, WeightedSpace) {
        let m = ModelParams::new(3.0).unwrap();
        let s = WeightedSpace::for_params(&m).unwrap();
        (m, s)
    }

    #[test]
    fn moments() {
        assert!((gauss_moment(0.0).unwrap() - std::f64::consts::PI.sqrt()).abs() < 1e-14);
        assert!((gauss_moment(1.0).unwrap() - 2.0).abs() < 1e-14);
        assert!((gauss_moment(1.5).unwrap() - 2.5636934).abs() < 1e-6);
        assert!(gauss_moment(-1.0).is_err());
    }

    #[test]
    fn low_order_shapes() {
        let (m, s) = p3();
        let e0 = eigenpoly(0, &s, &m).unwrap();
        assert!((e0.phi0() - gauss_moment(1.5).unwrap().powf(-0.5)).abs() < 1e-14);
        assert!((e0.phi0() - 0.6246).abs() < 1e-4);
        let e1 = eigenpoly(1, &s, &m).unwrap();
        assert!((e1.coeffs[0] / e1.coeffs[1] + 5.0).abs() < 1e-13);
        let e2 = eigenpoly(2, &s, &m).unwrap();
        assert!((e2.coeffs[1] / e2.coeffs[2] + 18.0).abs() < 1e-12);
        assert!((e2.coeffs[0] / e2.coeffs[2] - 45.0).abs() < 1e-12);
    }

    #[test]
    fn zeros_of_low_order() {
        let (m, s) = p3();
        assert!(positive_zeros(&eigenpoly(0, &s, &m).unwrap(), &s).unwrap().is_empty());
        let z1 = positive_zeros(&eigenpoly(1, &s, &m).unwrap(), &s).unwrap();
        assert!((z1[0] - 5f64.sqrt()).abs() < 1e-11);
        let z2 = positive_zeros(&eigenpoly(2, &s, &m).unwrap(), &s).unwrap();
        assert!((z2[0] - 3f64.sqrt()).abs() < 1e-11);
        assert!((z2[1] - 15f64.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn residual_vanishes() {
        let (m, _) = p3();
        for j in 0..6 {
            assert!(eigen_residual_exact(j, &m).iter().all(|c| c.is_zero()));
        }
    }

    #[test]
    fn orthonormal_pair() {
        let (m, s) = p3();
        let one = Polynomial::new(vec![1.0]);
        assert!((inner_product(&one, &one, &s).unwrap() - 2.5636934).abs() < 1e-6);
        let a = eigenpoly(0, &s, &m).unwrap().to_polynomial();
        let b = eigenpoly(1, &s, &m).unwrap().to_polynomial();
        assert!(inner_product(&a, &b, &s).unwrap().abs() < 1e-12);
        assert!((inner_product(&b, &b, &s).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_small_alpha() {
        assert!(WeightedSpace::new(0.5).is_err());
    }
}
