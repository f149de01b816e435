//! Characteristic roots, Binet coefficients and their logarithms.
//!
//! Every constant is the unique root of an integer polynomial on a rational
//! bracket, isolated by [`isolate_real_root`]. The complex conjugate pairs
//! of the Tribonacci recurrence only enter through their moduli:
//! `|beta_T|^2 = 1/alpha_T` and `|c_beta|^2 = 1/(44 c_alpha)`, which turn
//! into the even sextics used below.

use num_rational::BigRational;
use serde::Serialize;

use super::interval::{CReal, Enclosure};
use super::poly::{isolate_real_root, IntPoly};
use super::MpError;

#[derive(Debug, Clone)]
pub struct AlgebraicConstants {
    pub prec: u32,
    pub alpha: CReal,
    pub beta: CReal,
    pub alpha_t: CReal,
    pub beta_t_abs: CReal,
    pub gamma_t_abs: CReal,
    pub c_alpha: CReal,
    pub c_beta_abs: CReal,
    pub sqrt5: CReal,
    pub log_alpha: CReal,
    pub log_alpha_t: CReal,
    pub tau: CReal,
    pub tau_inv: CReal,
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub(crate) fn golden_poly() -> IntPoly {
    IntPoly::new([-1, -1, 1])
}

pub(crate) fn tribonacci_poly() -> IntPoly {
    IntPoly::new([-1, -1, -1, 1])
}

pub(crate) fn c_alpha_poly() -> IntPoly {
    IntPoly::new([-1, -2, 0, 44])
}

/// `r^6 + r^4 + r^2 - 1`, whose positive root is `|beta_T| = |gamma_T|`.
pub(crate) fn beta_t_modulus_poly() -> IntPoly {
    IntPoly::new([-1, 0, 1, 0, 1, 0, 1])
}

/// `1936 r^6 + 88 r^4 - 1`, whose positive root is `|c_beta| = |c_gamma|`.
pub(crate) fn c_beta_modulus_poly() -> IntPoly {
    IntPoly::new([-1, 0, 0, 0, 88, 0, 1936])
}

impl AlgebraicConstants {
    pub fn new(prec: u32) -> Result<Self, MpError> {
        // Guard bits so that logs and quotients still carry `prec` good bits.
        let wp = prec + 32;
        let alpha = isolate_real_root(&golden_poly(), &q(1, 1), &q(2, 1), wp)?;
        let beta = isolate_real_root(&golden_poly(), &q(-1, 1), &q(0, 1), wp)?;
        let alpha_t = isolate_real_root(&tribonacci_poly(), &q(9, 5), &q(19, 10), wp)?;
        let beta_t_abs = isolate_real_root(&beta_t_modulus_poly(), &q(7, 10), &q(8, 10), wp)?;
        let c_alpha = isolate_real_root(&c_alpha_poly(), &q(3, 10), &q(4, 10), wp)?;
        let c_beta_abs = isolate_real_root(&c_beta_modulus_poly(), &q(1, 4), &q(27, 100), wp)?;
        let sqrt5 = CReal::from_integer(5, wp).sqrt()?;
        let log_alpha = alpha.ln()?;
        let log_alpha_t = alpha_t.ln()?;
        let tau = log_alpha.div(&log_alpha_t)?;
        let tau_inv = log_alpha_t.div(&log_alpha)?;
        Ok(AlgebraicConstants {
            prec,
            alpha,
            beta,
            alpha_t,
            gamma_t_abs: beta_t_abs.clone(),
            beta_t_abs,
            c_alpha,
            c_beta_abs,
            sqrt5,
            log_alpha,
            log_alpha_t,
            tau,
            tau_inv,
        })
    }

    /// Working precision of the stored enclosures (requested bits plus guard).
    pub fn working_prec(&self) -> u32 {
        self.alpha.prec()
    }

    pub fn sqrt5_c_alpha(&self) -> CReal {
        self.sqrt5.mul(&self.c_alpha)
    }

    /// Named enclosures, in a fixed order, for reports.
    pub fn table(&self) -> Vec<(&'static str, &CReal)> {
        vec![
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("alpha_T", &self.alpha_t),
            ("|beta_T|", &self.beta_t_abs),
            ("|gamma_T|", &self.gamma_t_abs),
            ("c_alpha", &self.c_alpha),
            ("|c_beta|", &self.c_beta_abs),
            ("sqrt5", &self.sqrt5),
            ("log alpha", &self.log_alpha),
            ("log alpha_T", &self.log_alpha_t),
            ("tau", &self.tau),
            ("1/tau", &self.tau_inv),
        ]
    }

    /// Checks the decimal brackets quoted for the Tribonacci constants and the
    /// polynomial residuals. Returns the names of failed checks.
    pub fn bracket_failures(&self) -> Vec<String> {
        let p = self.working_prec();
        let inside = |x: &CReal, lo: &str, hi: &str| {
            let lo = CReal::from_decimal(lo, p).expect("literal");
            let hi = CReal::from_decimal(hi, p).expect("literal");
            x.gt(&lo) && x.lt(&hi)
        };
        let mut bad = Vec::new();
        let checks = [
            ("1.839 < alpha_T < 1.840", inside(&self.alpha_t, "1.839", "1.840")),
            ("0.336 < c_alpha < 0.337", inside(&self.c_alpha, "0.336", "0.337")),
            ("0.737 < |beta_T| < 0.738", inside(&self.beta_t_abs, "0.737", "0.738")),
            ("0.259 < |c_beta| < 0.260", inside(&self.c_beta_abs, "0.259", "0.260")),
            ("alpha residual", golden_poly().eval(&self.alpha).contains_zero()),
            ("beta residual", golden_poly().eval(&self.beta).contains_zero()),
            ("alpha_T residual", tribonacci_poly().eval(&self.alpha_t).contains_zero()),
            ("c_alpha residual", c_alpha_poly().eval(&self.c_alpha).contains_zero()),
            ("tau * 1/tau contains 1", self.tau.mul(&self.tau_inv).contains(&super::Dyadic::one())),
        ];
        for (name, ok) in checks {
            if !ok {
                bad.push(name.to_string());
            }
        }
        bad
    }

    pub fn to_json(&self, digits: usize) -> Vec<(String, Enclosure)> {
        self.table().into_iter().map(|(k, v)| (k.to_string(), v.to_json(digits))).collect()
    }
}

/// Outcome of comparing the closed-form radical expressions with the
/// polynomial enclosures at low precision.
#[derive(Debug, Clone, Serialize)]
pub struct RadicalCrossCheck {
    pub alpha_t: bool,
    pub beta_t_abs: bool,
    pub c_alpha: bool,
}

impl RadicalCrossCheck {
    /// Evaluates `alpha_T = (1 + cbrt(19 + 3 sqrt33) + cbrt(19 - 3 sqrt33)) / 3`,
    /// `|beta_T| = alpha_T^(-1/2)` and `c_alpha = 1/(-alpha_T^2 + 4 alpha_T - 1)`
    /// at 64 bits and tests overlap with the certified enclosures.
    pub fn run(consts: &AlgebraicConstants) -> Result<Self, MpError> {
        const P: u32 = 64;
        let s33 = CReal::from_integer(33, P).sqrt()?.mul_int(&3.into());
        let nineteen = CReal::from_integer(19, P);
        let u = nineteen.add(&s33).nth_root(3)?;
        let v = nineteen.sub(&s33).nth_root(3)?;
        let at = CReal::one(P).add(&u).add(&v).div_int(3)?;
        let bt = at.sqrt()?.recip()?;
        let denom = at.mul(&at).neg().add(&at.mul_int(&4.into())).add_int(-1);
        let ca = denom.recip()?;
        Ok(RadicalCrossCheck {
            alpha_t: at.overlaps(&consts.alpha_t),
            beta_t_abs: bt.overlaps(&consts.beta_t_abs),
            c_alpha: ca.overlaps(&consts.c_alpha),
        })
    }

    pub fn all(&self) -> bool {
        self.alpha_t && self.beta_t_abs && self.c_alpha
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpreal::Dyadic;

    #[test]
    fn brackets_and_residuals_hold() {
        let c = AlgebraicConstants::new(256).unwrap();
        assert!(c.bracket_failures().is_empty(), "{:?}", c.bracket_failures());
    }

    #[test]
    fn golden_ratio_identities() {
        let c = AlgebraicConstants::new(256).unwrap();
        let r = c.alpha.mul(&c.alpha).sub(&c.alpha).add_int(-1);
        assert!(r.contains_zero());
        assert!(c.alpha.add(&c.beta).contains(&Dyadic::one()));
        assert!(c.alpha.sub(&c.beta).sub(&c.sqrt5).contains_zero());
    }

    #[test]
    fn moduli_match_conjugate_products() {
        let c = AlgebraicConstants::new(256).unwrap();
        // alpha_T |beta_T|^2 = 1 and 44 c_alpha |c_beta|^2 = 1
        let one = c.alpha_t.mul(&c.beta_t_abs).mul(&c.beta_t_abs);
        assert!(one.contains(&Dyadic::one()));
        let one = c.c_alpha.mul_int(&44.into()).mul(&c.c_beta_abs).mul(&c.c_beta_abs);
        assert!(one.contains(&Dyadic::one()));
    }

    #[test]
    fn log_ratio_near_quoted_value() {
        let c = AlgebraicConstants::new(256).unwrap();
        let r = c.log_alpha_t.div(&c.log_alpha).unwrap();
        assert!((r.to_f64() - 1.2663).abs() < 1e-4);
        assert!((c.log_alpha.to_f64() - 0.481_211_825_059_603_4).abs() < 1e-15);
    }

    #[test]
    fn radical_forms_agree() {
        let c = AlgebraicConstants::new(128).unwrap();
        assert!(RadicalCrossCheck::run(&c).unwrap().all());
    }

    #[test]
    fn tau_is_narrow_at_default_precision() {
        let c = AlgebraicConstants::new(1024).unwrap();
        assert!(c.tau.width() < Dyadic::pow2(-1000));
    }
}
