//! Model constants, the singular and regular steady states, and the
//! backward similarity transform.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::{Grid, GridFunction};

const IDENTITY_TOL: f64 = 1e-13;

/// All constants derived from the exponent `p > 2`.
///
/// `p` is also kept as an exact rational so that spectral quantities can be
/// computed without rounding.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelParams {
    pub p: f64,
    pub beta: f64,
    pub k: f64,
    pub alpha: f64,
    pub c_p: f64,
    pub d_p: f64,
    /// `p` as an exact fraction, e.g. "3" or "10/3".
    pub p_exact: String,
    #[serde(skip)]
    p_rational: BigRational,
}

impl ModelParams {
    /// Constants for a floating `p`; the exact rational is the binary value of `p`.
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() {
            return invalid("p must be finite");
        }
        let r = BigRational::from_float(p).ok_or_else(|| Error::NonFinite("p".into()))?;
        Self::from_rational(r)
    }

    /// Constants for `p = num/den`.
    pub fn from_ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return invalid("zero denominator");
        }
        Self::from_rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Parses "3", "3.5" or "10/3".
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((a, b)) = s.split_once('/') {
            let num: i64 = a.trim().parse().map_err(|_| Error::InvalidParameter(format!("bad p: {s}")))?;
            let den: i64 = b.trim().parse().map_err(|_| Error::InvalidParameter(format!("bad p: {s}")))?;
            Self::from_ratio(num, den)
        } else {
            let p: f64 = s.parse().map_err(|_| Error::InvalidParameter(format!("bad p: {s}")))?;
            Self::new(p)
        }
    }

    fn from_rational(p: BigRational) -> Result<Self> {
        let two = BigRational::from_integer(BigInt::from(2));
        if p <= two {
            return invalid(format!("p must exceed 2, got {}", p));
        }
        let one = BigRational::one();
        let beta_r = &one / (&p - &one);
        let k_r = (&p - &two) / (&two * (&p - &one));
        let alpha_r = &p / (&p - &one);
        let pf = to_f64(&p);
        let beta = to_f64(&beta_r);
        let k = to_f64(&k_r);
        let alpha = to_f64(&alpha_r);
        let d_p = beta.powf(beta);
        let c_p = d_p / (1.0 - beta);
        let params = Self {
            p: pf,
            beta,
            k,
            alpha,
            c_p,
            d_p,
            p_exact: p.to_string(),
            p_rational: p,
        };
        params.check_identities()?;
        Ok(params)
    }

    fn check_identities(&self) -> Result<()> {
        let close = |a: f64, b: f64| (a - b).abs() <= IDENTITY_TOL * b.abs().max(1.0);
        let checks = [
            ("k = (1-beta)/2", close(self.k, 0.5 * (1.0 - self.beta))),
            ("alpha = beta + 1", close(self.alpha, self.beta + 1.0)),
            ("d_p = c_p (1-beta)", close(self.d_p, self.c_p * (1.0 - self.beta))),
            ("d_p^(p-1) = beta", close(self.d_p.powf(self.p - 1.0), self.beta)),
        ];
        for (name, ok) in checks {
            if !ok {
                return Err(Error::Construction(format!("identity {name} violated")));
            }
        }
        if !(self.beta > 0.0 && self.beta < 1.0 && self.k > 0.0 && self.k < 0.5) {
            return Err(Error::Construction("constants out of range".into()));
        }
        Ok(())
    }

    pub fn p_rational(&self) -> &BigRational {
        &self.p_rational
    }

    pub fn beta_rational(&self) -> BigRational {
        BigRational::one() / (&self.p_rational - BigRational::one())
    }

    pub fn k_rational(&self) -> BigRational {
        let two = BigRational::from_integer(BigInt::from(2));
        (&self.p_rational - &two) / (&two * (&self.p_rational - BigRational::one()))
    }

    pub fn alpha_rational(&self) -> BigRational {
        &self.p_rational / (&self.p_rational - BigRational::one())
    }

    /// U(x) = c_p x^{1-beta}.
    pub fn u(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            self.c_p * x.powf(1.0 - self.beta)
        }
    }

    /// U'(x) = d_p x^{-beta}.
    pub fn u_prime(&self, x: f64) -> f64 {
        self.d_p * x.powf(-self.beta)
    }

    /// U_a(x) = U(a+x) - U(a), written to avoid cancellation when x << a.
    pub fn u_a(&self, a: f64, x: f64) -> f64 {
        let e = 1.0 - self.beta;
        // (a+x)^e - a^e = a^e ((1+x/a)^e - 1)
        self.c_p * a.powf(e) * ((e * (x / a).ln_1p()).exp_m1())
    }

    /// U_a'(x) = d_p (a+x)^{-beta}.
    pub fn u_a_prime(&self, a: f64, x: f64) -> f64 {
        self.d_p * (a + x).powf(-self.beta)
    }

    /// U_a''(x) = -beta d_p (a+x)^{-beta-1}.
    pub fn u_a_second(&self, a: f64, x: f64) -> f64 {
        -self.beta * self.d_p * (a + x).powf(-self.beta - 1.0)
    }

    /// Shift of the regular steady state whose boundary slope is `m`: a = beta m^{1-p}.
    pub fn shift_for_slope(&self, m: f64) -> f64 {
        self.beta * m.powf(1.0 - self.p)
    }
}

fn to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        0.0
    } else {
        r.to_f64().unwrap_or(f64::NAN)
    }
}

/// U(x) for the given model.
pub fn steady_u(params: &ModelParams, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return invalid("U is defined for x >= 0");
    }
    Ok(params.u(x))
}

/// U_a(x) = U(a+x) - U(a).
pub fn steady_u_a(params: &ModelParams, a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) {
        return invalid("shift a must be positive");
    }
    if !(x >= 0.0) {
        return invalid("U_a is defined for x >= 0");
    }
    Ok(params.u_a(a, x))
}

/// Direction of the backward rescaling around a reference time `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Forward,
    Inverse,
}

/// y = x / sqrt(T - t), s = -log(T - t), w = e^{ks} u.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimilarityFrame {
    pub t_final: f64,
    pub k: f64,
}

impl SimilarityFrame {
    pub fn new(params: &ModelParams, t_final: f64) -> Self {
        Self { t_final, k: params.k }
    }

    pub fn s_of(&self, t: f64) -> Result<f64> {
        if !(t < self.t_final) {
            return invalid(format!("t = {t} is not before T = {}", self.t_final));
        }
        Ok(-(self.t_final - t).ln())
    }

    pub fn t_of(&self, s: f64) -> Result<f64> {
        if !s.is_finite() {
            return invalid("s must be finite");
        }
        Ok(self.t_final - (-s).exp())
    }

    /// Maps nodes and values exactly; the resulting grid is the rescaled physical grid.
    pub fn to_similarity(&self, u: &GridFunction) -> Result<GridFunction> {
        let tau = self.t_final - u.t;
        let s = self.s_of(u.t)?;
        let scale = tau.sqrt();
        let nodes = u.nodes().iter().map(|x| x / scale).collect();
        let grid = Arc::new(Grid::from_nodes(nodes)?);
        let f = (self.k * s).exp();
        GridFunction::new(grid, u.values.iter().map(|v| v * f).collect(), s)
    }

    pub fn from_similarity(&self, w: &GridFunction) -> Result<GridFunction> {
        let t = self.t_of(w.t)?;
        let tau = (-w.t).exp();
        let scale = tau.sqrt();
        let nodes = w.nodes().iter().map(|y| y * scale).collect();
        let grid = Arc::new(Grid::from_nodes(nodes)?);
        let f = (-self.k * w.t).exp();
        GridFunction::new(grid, w.values.iter().map(|v| v * f).collect(), t)
    }

    /// Transform in the given direction and resample onto `target` nodes with monotone cubic interpolation.
    pub fn transform_onto(
        &self,
        f: &GridFunction,
        direction: Direction,
        target: Arc<Grid>,
    ) -> Result<GridFunction> {
        let mapped = match direction {
            Direction::Forward => self.to_similarity(f)?,
            Direction::Inverse => self.from_similarity(f)?,
        };
        mapped.resample(target)
    }
}
