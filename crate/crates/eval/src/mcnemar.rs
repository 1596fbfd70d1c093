//! Paired significance test over hits@1 outcome vectors.
//!
//! The statistic is computed from the discordant cells of the contingency
//! table. With the continuity correction (the default),
//! `chi2 = (|b - c| - 1)^2 / (b + c)`; without it, `(b - c)^2 / (b + c)`.
//! The p-value is the survival function of the chi-square distribution with
//! one degree of freedom, evaluated through the regularized incomplete gamma
//! function to better than 1e-10 relative error.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Agreement counts of two models on a shared test sample.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub both_correct: u64,
    pub only_a_correct: u64,
    pub only_b_correct: u64,
    pub both_wrong: u64,
}

impl ContingencyTable {
    pub fn from_outcomes(a: &[bool], b: &[bool]) -> Self {
        let mut table = ContingencyTable::default();
        for (&x, &y) in a.iter().zip(b) {
            match (x, y) {
                (true, true) => table.both_correct += 1,
                (true, false) => table.only_a_correct += 1,
                (false, true) => table.only_b_correct += 1,
                (false, false) => table.both_wrong += 1,
            }
        }
        table
    }

    pub fn total(&self) -> u64 {
        self.both_correct + self.only_a_correct + self.only_b_correct + self.both_wrong
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum McNemarError {
    #[error("outcome vectors have different lengths ({a} vs {b})")]
    Misaligned { a: usize, b: usize },
    #[error("no discordant outcomes; the test statistic is undefined")]
    Undefined,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McNemarResult {
    pub chi2: f64,
    pub p_value: f64,
    pub table: ContingencyTable,
    pub continuity_correction: bool,
}

pub fn mcnemar(a: &[bool], b: &[bool], continuity_correction: bool) -> Result<McNemarResult, McNemarError> {
    if a.len() != b.len() {
        return Err(McNemarError::Misaligned { a: a.len(), b: b.len() });
    }
    let table = ContingencyTable::from_outcomes(a, b);
    mcnemar_from_table(table, continuity_correction)
}

pub fn mcnemar_from_table(
    table: ContingencyTable,
    continuity_correction: bool,
) -> Result<McNemarResult, McNemarError> {
    let b = table.only_a_correct as f64;
    let c = table.only_b_correct as f64;
    if b + c == 0.0 {
        return Err(McNemarError::Undefined);
    }
    let chi2 = if continuity_correction {
        ((b - c).abs() - 1.0).powi(2) / (b + c)
    } else {
        (b - c).powi(2) / (b + c)
    };
    Ok(McNemarResult {
        chi2,
        p_value: chi_square_survival(chi2, 1.0),
        table,
        continuity_correction,
    })
}

/// Survival function of the chi-square distribution with `dof` degrees of
/// freedom: `Q(dof/2, x/2)`.
pub fn chi_square_survival(x: f64, dof: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    regularized_gamma_upper(dof / 2.0, x / 2.0)
}

// Regularized incomplete gamma functions, series + continued fraction, after
// the classical gser/gcf split at x = a + 1.

const GAMMA_EPS: f64 = 1e-16;
const GAMMA_MAX_ITER: usize = 500;

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation, g = 7.
    #[allow(clippy::excessive_precision)]
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection for the small-argument half.
        return std::f64::consts::PI.ln() - (std::f64::consts::PI * x).sin().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Lower regularized incomplete gamma `P(a, x)`.
pub fn regularized_gamma_lower(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "invalid incomplete gamma arguments");
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_continued_fraction(a, x)
    }
}

/// Upper regularized incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn regularized_gamma_upper(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "invalid incomplete gamma arguments");
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_continued_fraction(a, x)
    }
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut denom = a;
    for _ in 0..GAMMA_MAX_ITER {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_continued_fraction(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    h * (-x + a * x.ln() - ln_gamma(a)).exp()
}
