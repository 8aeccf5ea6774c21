use std::collections::BTreeMap;

use crate::expr::{Expr, NormalForm, Number};
use crate::fracops::{gamma_binomial, inverse_gamma_succ, Lattice, LatticeExponent};

use super::VimError;

/// Default bound on [`FracPoly::size`].
pub const DEFAULT_TERM_CAP: usize = 10_000;

/// `Σ_μ c_μ(x) · t^μ / Γ(μ+1)` over lattice exponents `μ = i + jα`.
///
/// Coefficients are stored against the Γ-normalised basis
/// `t^μ/Γ(μ+1)`, in which `I^α` and `cD^α` only shift exponents and
/// products pick up the factor `Γ(μ+ν+1)/(Γ(μ+1)Γ(ν+1))`. The accessors
/// [`FracPoly::coefficient`] and [`FracPoly::terms`] convert back to plain
/// coefficients of `t^μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FracPoly {
    lattice: Lattice,
    cap: usize,
    terms: BTreeMap<LatticeExponent, NormalForm>,
}

impl FracPoly {
    pub fn zero(lattice: Lattice) -> FracPoly {
        FracPoly { lattice, cap: DEFAULT_TERM_CAP, terms: BTreeMap::new() }
    }

    pub fn with_cap(mut self, cap: usize) -> FracPoly {
        self.cap = cap;
        self
    }

    /// `c(x) · t^0`.
    pub fn constant(lattice: Lattice, coeff: NormalForm) -> FracPoly {
        let mut out = FracPoly::zero(lattice);
        out.insert(LatticeExponent::ZERO, coeff);
        out
    }

    /// `c(x) · t^μ` with `c` the plain coefficient of `t^μ`.
    pub fn monomial(
        lattice: Lattice,
        exponent: LatticeExponent,
        coeff: NormalForm,
    ) -> Result<FracPoly, VimError> {
        let exponent = lattice.canonical(exponent);
        let mu = lattice.value(exponent);
        let gamma = crate::fracops::gamma_ratio(mu + 1.0, 1.0)?;
        let mut out = FracPoly::zero(lattice);
        out.insert(exponent, coeff.scale(gamma));
        Ok(out)
    }

    fn like(&self) -> FracPoly {
        FracPoly { lattice: self.lattice, cap: self.cap, terms: BTreeMap::new() }
    }

    fn insert(&mut self, e: LatticeExponent, c: NormalForm) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().add(&c);
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    fn checked(self) -> Result<FracPoly, VimError> {
        let size = self.size();
        if size > self.cap {
            return Err(VimError::TermCap { size, cap: self.cap });
        }
        Ok(self)
    }

    fn same_lattice(&self, other: &FracPoly) -> Result<(), VimError> {
        if self.lattice.alpha() == other.lattice.alpha() {
            Ok(())
        } else {
            Err(VimError::AlphaMismatch { left: self.lattice.alpha(), right: other.lattice.alpha() })
        }
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn alpha(&self) -> f64 {
        self.lattice.alpha()
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Number of distinct exponents.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total monomial count over all coefficients, the quantity bounded by
    /// the cap.
    pub fn size(&self) -> usize {
        self.terms.values().map(NormalForm::len).sum()
    }

    /// Exponents in increasing order of real value.
    pub fn exponents(&self) -> Vec<LatticeExponent> {
        let mut out: Vec<_> = self.terms.keys().copied().collect();
        out.sort_by(|a, b| self.lattice.compare(*a, *b));
        out
    }

    /// Coefficient of `t^μ/Γ(μ+1)`.
    pub fn scaled_coefficient(&self, e: LatticeExponent) -> Option<&NormalForm> {
        self.terms.get(&self.lattice.canonical(e))
    }

    /// Plain coefficient of `t^μ`.
    pub fn coefficient(&self, e: LatticeExponent) -> Result<Option<NormalForm>, VimError> {
        let e = self.lattice.canonical(e);
        match self.terms.get(&e) {
            None => Ok(None),
            Some(c) => Ok(Some(c.scale(inverse_gamma_succ(self.lattice.value(e))?))),
        }
    }

    /// `(exponent, plain coefficient)` pairs in increasing exponent order.
    pub fn terms(&self) -> Result<Vec<(LatticeExponent, Expr)>, VimError> {
        self.exponents()
            .into_iter()
            .map(|e| {
                let c = self.coefficient(e)?.expect("listed exponent");
                Ok((e, c.to_expr()))
            })
            .collect()
    }

    pub fn add(&self, other: &FracPoly) -> Result<FracPoly, VimError> {
        self.same_lattice(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(*e, c.clone());
        }
        out.checked()
    }

    pub fn sub(&self, other: &FracPoly) -> Result<FracPoly, VimError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> FracPoly {
        self.scale(Number::int(-1))
    }

    pub fn scale(&self, s: Number) -> FracPoly {
        let mut out = self.like();
        for (e, c) in &self.terms {
            out.insert(*e, c.scale(s));
        }
        out
    }

    /// Termwise Caputo derivative in `t`.
    pub fn caputo_t(&self) -> Result<FracPoly, VimError> {
        let mut out = self.like();
        for (e, c) in &self.terms {
            if e.j == 0 {
                // integer exponent with no α-part; only those below ⌈α⌉
                // can occur, and the derivative annihilates them
                if e.i < self.lattice.order() {
                    continue;
                }
                return Err(
                    crate::fracops::FracError::OffLattice { i: e.i, j: e.j, alpha: self.alpha() }.into()
                );
            }
            out.insert(LatticeExponent::new(e.i, e.j - 1), c.clone());
        }
        out.checked()
    }

    /// Termwise Riemann–Liouville integral of order α in `t`.
    pub fn rl_integral_t(&self) -> Result<FracPoly, VimError> {
        let mut out = self.like();
        for (e, c) in &self.terms {
            let up = self.lattice.canonical(LatticeExponent::new(e.i, e.j + 1));
            out.insert(up, c.clone());
        }
        out.checked()
    }

    pub fn spatial_derivative(&self, order: usize) -> Result<FracPoly, VimError> {
        let mut out = self.like();
        for (e, c) in &self.terms {
            out.insert(*e, c.derivative_n(order)?);
        }
        out.checked()
    }

    pub fn multiply(&self, other: &FracPoly) -> Result<FracPoly, VimError> {
        self.same_lattice(other)?;
        let mut acc: BTreeMap<LatticeExponent, NormalForm> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = self.lattice.add(*ea, *eb);
                let factor = gamma_binomial(self.lattice.value(*ea), self.lattice.value(*eb))?;
                let slot = acc.entry(e).or_default();
                if factor.is_one() {
                    slot.add_product(ca, cb);
                } else {
                    slot.add_scaled(&ca.mul(cb), factor);
                }
            }
        }
        let mut out = self.like();
        for (e, c) in acc {
            out.insert(e, c);
        }
        out.checked()
    }

    /// `self^k` by repeated multiplication, `k ≥ 1`.
    pub fn power(&self, k: u32) -> Result<FracPoly, VimError> {
        assert!(k >= 1, "power of a FracPoly needs k >= 1");
        let mut out = self.clone();
        for _ in 1..k {
            out = out.multiply(self)?;
        }
        Ok(out)
    }

    /// `t^μ/Γ(μ+1)` for every stored exponent.
    fn basis_values(&self, t: f64) -> Result<Vec<(LatticeExponent, f64)>, VimError> {
        self.terms
            .keys()
            .map(|e| {
                if e.is_zero() {
                    return Ok((*e, 1.0));
                }
                if t == 0.0 {
                    return Ok((*e, 0.0));
                }
                let mu = self.lattice.value(*e);
                let power =
                    if mu.fract() == 0.0 && mu < i32::MAX as f64 { t.powi(mu as i32) } else { t.powf(mu) };
                Ok((*e, power * inverse_gamma_succ(mu)?.to_f64()))
            })
            .collect()
    }

    /// Value of the series at `(x, t)`, `t ≥ 0`.
    pub fn evaluate(&self, x: f64, t: f64) -> Result<f64, VimError> {
        if t.is_nan() || t < 0.0 {
            return Err(VimError::NegativeTime { t });
        }
        let mut acc = 0.0;
        for (e, b) in self.basis_values(t)? {
            if b == 0.0 {
                continue;
            }
            acc += self.terms[&e].evaluate(x)? * b;
        }
        Ok(acc)
    }

    /// `values[k][i]` = series at `(xs[i], ts[k])`.
    pub fn evaluate_grid(&self, xs: &[f64], ts: &[f64]) -> Result<Vec<Vec<f64>>, VimError> {
        // coefficient values are shared by every time slice
        let mut coeffs: BTreeMap<LatticeExponent, Vec<f64>> = BTreeMap::new();
        for (e, c) in &self.terms {
            let column = xs.iter().map(|&x| c.evaluate(x)).collect::<Result<Vec<_>, _>>()?;
            coeffs.insert(*e, column);
        }
        let mut out = Vec::with_capacity(ts.len());
        for &t in ts {
            if t.is_nan() || t < 0.0 {
                return Err(VimError::NegativeTime { t });
            }
            let mut row = vec![0.0; xs.len()];
            for (e, b) in self.basis_values(t)? {
                if b == 0.0 {
                    continue;
                }
                for (slot, c) in row.iter_mut().zip(&coeffs[&e]) {
                    *slot += c * b;
                }
            }
            out.push(row);
        }
        Ok(out)
    }

    /// Exact one-sided limit of `∂u/∂t` as `t → 0⁺`: the `t^1` coefficient,
    /// infinite if some exponent in `(0, 1)` has a nonzero coefficient at
    /// `x`.
    pub fn time_derivative_at_zero(&self, x: f64) -> Result<f64, VimError> {
        let mut slope = 0.0;
        for (e, c) in &self.terms {
            let mu = self.lattice.value(*e);
            if e.is_zero() || mu > 1.0 {
                continue;
            }
            let v = c.evaluate(x)?;
            if mu < 1.0 {
                if v != 0.0 {
                    return Ok(f64::INFINITY.copysign(v));
                }
            } else {
                slope += v;
            }
        }
        Ok(slope)
    }
}
