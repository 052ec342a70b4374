//! Exact forms of the dimension constants, for display.
//!
//! Rational constants are kept as arbitrary-precision fractions; constants
//! involving `pi` are a rational coefficient times an integer power of `pi`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};
use serde::Serialize;

fn int(x: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `4^n - 1` as a big integer.
fn four_pow_minus_one(n: u64) -> BigInt {
    Pow::pow(BigInt::from(4u8), n) - BigInt::one()
}

fn rational_pow(r: &BigRational, e: i64) -> BigRational {
    if e >= 0 {
        Pow::pow(r.clone(), e as u64)
    } else {
        Pow::pow(r.recip(), (-e) as u64)
    }
}

/// `k * sqrt(m)` with `m` free of the square factors found below `10^5`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurdForm {
    pub k: BigInt,
    pub m: BigInt,
}

impl SurdForm {
    pub fn of(mut m: BigInt) -> Self {
        let mut k = BigInt::one();
        let mut p = 2u64;
        while p < 100_000 {
            let pp = BigInt::from(p * p);
            if pp > m {
                break;
            }
            while (&m % &pp).is_zero() {
                m /= &pp;
                k *= BigInt::from(p);
            }
            p += 1;
        }
        Self { k, m }
    }

    pub fn value(&self) -> f64 {
        self.k.to_f64().unwrap_or(f64::INFINITY) * self.m.to_f64().unwrap_or(f64::INFINITY).sqrt()
    }
}

impl fmt::Display for SurdForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.k.is_one(), self.m.is_one()) {
            (_, true) => write!(f, "{}", self.k),
            (true, false) => write!(f, "√{}", self.m),
            (false, false) => write!(f, "{}·√{}", self.k, self.m),
        }
    }
}

/// `coef * pi^pi_power`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiForm {
    pub coef: BigRational,
    pub pi_power: i64,
}

impl PiForm {
    pub fn value(&self) -> f64 {
        let c = self.coef.to_f64().unwrap_or(f64::NAN);
        c * std::f64::consts::PI.powi(self.pi_power as i32)
    }
}

impl fmt::Display for PiForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = self.coef.numer();
        let den = self.coef.denom();
        let pi = match self.pi_power.abs() {
            0 => String::new(),
            1 => "π".to_string(),
            k => format!("π^{k}"),
        };
        if self.pi_power == 0 {
            return write!(f, "{}", self.coef);
        }
        if self.pi_power > 0 {
            let head = if num.is_one() { pi } else { format!("{num}·{pi}") };
            if den.is_one() {
                write!(f, "{head}")
            } else {
                write!(f, "{head}/{den}")
            }
        } else if den.is_one() {
            write!(f, "{num}/{pi}")
        } else {
            write!(f, "{num}/({den}·{pi})")
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExactValue {
    Rational(BigRational),
    Surd(SurdForm),
    Pi(PiForm),
}

impl ExactValue {
    pub fn value(&self) -> f64 {
        match self {
            ExactValue::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            ExactValue::Surd(s) => s.value(),
            ExactValue::Pi(p) => p.value(),
        }
    }
}

impl fmt::Display for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactValue::Rational(r) => write!(f, "{r}"),
            ExactValue::Surd(s) => write!(f, "{s}"),
            ExactValue::Pi(p) => write!(f, "{p}"),
        }
    }
}

/// A named constant with its exact and floating-point forms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NamedConstant {
    pub key: &'static str,
    pub description: &'static str,
    pub exact: String,
    pub value: f64,
}

fn named(key: &'static str, description: &'static str, v: ExactValue) -> NamedConstant {
    NamedConstant {
        key,
        description,
        exact: v.to_string(),
        value: v.value(),
    }
}

pub fn c_n_exact(n: u64) -> SurdForm {
    SurdForm::of(four_pow_minus_one(n) / BigInt::from(3u8))
}

/// `((4^n - 1) / 3)^n`.
pub fn upper_constant(n: u64) -> BigRational {
    Pow::pow(BigRational::new(four_pow_minus_one(n), BigInt::from(3u8)), n)
}

/// `(k n)^{-n}` for `k = 4` (convex) or `k = 16` (C-convex).
pub fn lower_constant(k: u64, n: u64) -> BigRational {
    rational_pow(&int(k * n), -(n as i64))
}

/// Every constant attached to dimension `n`, in display order.
pub fn constants_for(n: u64) -> Vec<NamedConstant> {
    let ni = n as i64;
    let upper = upper_constant(n);
    let lower_convex = lower_constant(4, n);
    let lower_cconvex = lower_constant(16, n);
    let four_n_minus_1 = BigRational::from_integer(four_pow_minus_one(n));
    let two_n_fact = BigRational::from_integer(factorial(2 * n));
    let mu = &lower_convex / &upper;
    let nu = &lower_cconvex / &upper;
    vec![
        named("c_n", "ball inclusion constant sqrt(4^n - 1)/sqrt(3)", ExactValue::Surd(c_n_exact(n))),
        named("mu_n", "quotient lower bound, convex", ExactValue::Rational(mu.clone())),
        named("nu_n", "quotient lower bound, C-convex", ExactValue::Rational(nu.clone())),
        named("mu_n/nu_n", "ratio of the quotient bounds", ExactValue::Rational(&mu / &nu)),
        named("v_p2_lower_convex", "lower constant for v p_D^2, convex", ExactValue::Rational(lower_convex)),
        named("v_p2_lower_c_convex", "lower constant for v p_D^2, C-convex", ExactValue::Rational(lower_cconvex)),
        named("v_p2_upper", "upper constant for v p_D^2", ExactValue::Rational(upper)),
        named(
            "polydisc_scaling",
            "lower bound for the unit polydisc at 0, n^-n",
            ExactValue::Rational(rational_pow(&int(n), -ni)),
        ),
        named(
            "psi_jacobian_sq",
            "|det Psi'(0)|^2 = 2^-2n",
            ExactValue::Rational(rational_pow(&int(4), -ni)),
        ),
        named(
            "k_p2_lower_convex",
            "lower constant for K p_D^2, convex, (4 pi)^-n",
            ExactValue::Pi(PiForm {
                coef: rational_pow(&int(4), -ni),
                pi_power: -ni,
            }),
        ),
        named(
            "k_p2_lower_c_convex",
            "lower constant for K p_D^2, C-convex, (16 pi)^-n",
            ExactValue::Pi(PiForm {
                coef: rational_pow(&int(16), -ni),
                pi_power: -ni,
            }),
        ),
        named(
            "k_p2_upper",
            "upper constant for K p_D^2, (2n)!/(2 pi)^n",
            ExactValue::Pi(PiForm {
                coef: &two_n_fact * rational_pow(&int(2), -ni),
                pi_power: -ni,
            }),
        ),
        named(
            "v_over_k_lower_convex",
            "lower end of v/K, convex",
            ExactValue::Pi(PiForm {
                coef: (&two_n_fact * rational_pow(&int(2 * n), ni)).recip(),
                pi_power: ni,
            }),
        ),
        named(
            "v_over_k_upper_convex",
            "upper end of v/K, convex",
            ExactValue::Pi(PiForm {
                coef: rational_pow(&(int(4) * &four_n_minus_1 / int(3)), ni),
                pi_power: ni,
            }),
        ),
        named(
            "v_over_k_lower_c_convex",
            "lower end of v/K, C-convex",
            ExactValue::Pi(PiForm {
                coef: (&two_n_fact * rational_pow(&int(8 * n), ni)).recip(),
                pi_power: ni,
            }),
        ),
        named(
            "v_over_k_upper_c_convex",
            "upper end of v/K, C-convex",
            ExactValue::Pi(PiForm {
                coef: rational_pow(&(int(16) * &four_n_minus_1 / int(3)), ni),
                pi_power: ni,
            }),
        ),
    ]
}
