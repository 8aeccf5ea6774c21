//! Numeric equivalence testing by seeded random sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Expr, ExprError};

pub const DEFAULT_EQUIVALENCE_SEED: u64 = 0x5eed_f7ac;

/// Sampling setup for [`EquivalenceCheck::check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceCheck {
    pub seed: u64,
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
    /// Mixed tolerance: a point passes when `|a-b| <= tol * (1 + |a|)`.
    pub tol: f64,
}

impl Default for EquivalenceCheck {
    fn default() -> Self {
        EquivalenceCheck { seed: DEFAULT_EQUIVALENCE_SEED, lo: -2.0, hi: 2.0, samples: 64, tol: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub equal: bool,
    pub seed: u64,
    /// Largest scaled deviation seen over the evaluable points.
    pub max_deviation: f64,
    pub worst_x: f64,
    pub evaluated: usize,
}

impl EquivalenceCheck {
    pub fn check(&self, a: &Expr, b: &Expr) -> Result<EquivalenceReport, ExprError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut evaluated = 0;
        let mut max_deviation = 0.0_f64;
        let mut worst_x = f64::NAN;
        // points where either side leaves its domain are skipped; a few extra
        // draws keep the count close to `samples` for partial domains
        let draws = self.samples * 4;
        for _ in 0..draws {
            if evaluated == self.samples {
                break;
            }
            let x = rng.gen_range(self.lo..=self.hi);
            let (Ok(va), Ok(vb)) = (a.evaluate(x), b.evaluate(x)) else {
                continue;
            };
            evaluated += 1;
            let dev = (va - vb).abs() / (1.0 + va.abs());
            if dev > max_deviation || worst_x.is_nan() {
                max_deviation = dev;
                worst_x = x;
            }
        }
        let needed = self.samples.div_ceil(2).max(1);
        if evaluated < needed {
            return Err(ExprError::NoSampleDomain { valid: evaluated, requested: self.samples });
        }
        Ok(EquivalenceReport {
            equal: max_deviation <= self.tol,
            seed: self.seed,
            max_deviation,
            worst_x,
            evaluated,
        })
    }
}

/// True when `a` and `b` agree to `tol` at `samples` seeded points in
/// `[-2, 2]`.
pub fn equivalent(a: &Expr, b: &Expr, samples: usize, tol: f64) -> Result<bool, ExprError> {
    let check = EquivalenceCheck { samples, tol, ..EquivalenceCheck::default() };
    Ok(check.check(a, b)?.equal)
}
