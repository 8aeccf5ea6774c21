//! Sum-of-monomials normal form.
//!
//! A [`NormalForm`] is `Σ c_k · Π a_i^{e_ik}` where the `c_k` are
//! [`Number`]s, the `e_ik` are nonzero rationals and the `a_i` are
//! [`Atom`]s: `x`, `pi`, `e`, a function application, an unexpanded group
//! (a sum raised to a negative, fractional or large power) or a general
//! power with a non-numeric exponent. Like monomials are merged on
//! insertion and zero coefficients dropped, so structural equality of two
//! normal forms implies semantic equality (the converse does not hold: no
//! trigonometric or exponential identities are applied).

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::number::{powi_f64, Number, Rational};
use super::{BinaryOp, Constant, Expr, ExprError, UnaryOp};

/// Positive integer powers of a multi-term sum up to this are expanded.
const MAX_EXPANSION: i128 = 8;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum AtomKind {
    Pi,
    E,
    X,
    Func(UnaryOp, NormalForm),
    Group(NormalForm),
    Pow(NormalForm, NormalForm),
}

#[derive(Debug)]
struct AtomNode {
    kind: AtomKind,
    has_x: bool,
}

/// Shared, immutable atom. Comparison short-circuits on pointer identity.
#[derive(Clone, Debug)]
pub struct Atom(Arc<AtomNode>);

impl Atom {
    fn new(kind: AtomKind) -> Atom {
        let has_x = match &kind {
            AtomKind::X => true,
            AtomKind::Pi | AtomKind::E => false,
            AtomKind::Func(_, a) | AtomKind::Group(a) => a.has_x(),
            AtomKind::Pow(b, e) => b.has_x() || e.has_x(),
        };
        Atom(Arc::new(AtomNode { kind, has_x }))
    }

    pub fn kind(&self) -> &AtomKind {
        &self.0.kind
    }

    pub fn has_x(&self) -> bool {
        self.0.has_x
    }

    fn key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn to_expr(&self) -> Expr {
        match self.kind() {
            AtomKind::Pi => Expr::Const(Constant::Pi),
            AtomKind::E => Expr::Const(Constant::E),
            AtomKind::X => Expr::Var,
            AtomKind::Func(op, a) => Expr::unary(*op, a.to_expr()),
            AtomKind::Group(s) => s.to_expr(),
            AtomKind::Pow(b, e) => Expr::pow(b.to_expr(), e.to_expr()),
        }
    }

    fn domain_error(&self, reason: &'static str) -> ExprError {
        ExprError::Domain { expr: self.to_expr().to_string(), reason }
    }

    pub fn evaluate(&self, x: f64) -> Result<f64, ExprError> {
        let v = match self.kind() {
            AtomKind::Pi => Constant::Pi.value(),
            AtomKind::E => Constant::E.value(),
            AtomKind::X => x,
            AtomKind::Func(op, a) => op.apply(a.evaluate(x)?).map_err(|r| self.domain_error(r))?,
            AtomKind::Group(s) => s.evaluate(x)?,
            AtomKind::Pow(b, e) => {
                let (base, exponent) = (b.evaluate(x)?, e.evaluate(x)?);
                if base == 0.0 && exponent < 0.0 {
                    return Err(self.domain_error("division by zero"));
                }
                base.powf(exponent)
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.domain_error("non-finite result"))
        }
    }

    /// d/dx of the atom itself.
    fn derivative(&self) -> Result<NormalForm, ExprError> {
        Ok(match self.kind() {
            AtomKind::Pi | AtomKind::E => NormalForm::zero(),
            AtomKind::X => NormalForm::one(),
            AtomKind::Group(s) => s.derivative()?,
            AtomKind::Func(op, u) => {
                let du = u.derivative()?;
                if du.is_zero() {
                    return Ok(du);
                }
                let outer = match op {
                    UnaryOp::Neg => unreachable!("negation is never an atom"),
                    UnaryOp::Sin => NormalForm::apply(UnaryOp::Cos, u.clone()),
                    UnaryOp::Cos => NormalForm::apply(UnaryOp::Sin, u.clone()).neg(),
                    UnaryOp::Tan => NormalForm::apply(UnaryOp::Cos, u.clone()).powi(-2),
                    UnaryOp::Exp => NormalForm::from_atom(self.clone(), Rational::one()),
                    UnaryOp::Ln => u.powi(-1),
                    UnaryOp::Sinh => NormalForm::apply(UnaryOp::Cosh, u.clone()),
                    UnaryOp::Cosh => NormalForm::apply(UnaryOp::Sinh, u.clone()),
                    UnaryOp::Tanh => NormalForm::apply(UnaryOp::Cosh, u.clone()).powi(-2),
                };
                outer.mul(&du)
            }
            AtomKind::Pow(b, v) => {
                if !v.has_x() {
                    // v * b^(v-1) * b'
                    let lowered = b.pow(&v.sub(&NormalForm::one()));
                    v.mul(&lowered).mul(&b.derivative()?)
                } else if !b.has_x() {
                    // b^v * ln(b) * v'
                    NormalForm::from_atom(self.clone(), Rational::one())
                        .mul(&NormalForm::apply(UnaryOp::Ln, b.clone()))
                        .mul(&v.derivative()?)
                } else {
                    return Err(ExprError::Unsupported {
                        expr: self.to_expr().to_string(),
                        reason: "x occurs in both base and exponent",
                    });
                }
            }
        })
    }
}

impl PartialEq for Atom {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Atom {}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            Ordering::Equal
        } else {
            self.0.kind.cmp(&other.0.kind)
        }
    }
}

/// Product of atoms raised to nonzero rational powers, sorted by atom.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Monomial {
    factors: Vec<(Atom, Rational)>,
}

impl Monomial {
    pub fn factors(&self) -> &[(Atom, Rational)] {
        &self.factors
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        if other.factors.is_empty() {
            return self.clone();
        }
        if self.factors.is_empty() {
            return other.clone();
        }
        let mut out = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() && j < other.factors.len() {
            let (a, ea) = &self.factors[i];
            let (b, eb) = &other.factors[j];
            match a.cmp(b) {
                Ordering::Less => {
                    out.push((a.clone(), *ea));
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((b.clone(), *eb));
                    j += 1;
                }
                Ordering::Equal => {
                    let e = ea + eb;
                    if !e.is_zero() {
                        out.push((a.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.factors[i..]);
        out.extend_from_slice(&other.factors[j..]);
        Monomial { factors: out }
    }

    fn has_x(&self) -> bool {
        self.factors.iter().any(|(a, _)| a.has_x())
    }

    /// Value of `c * monomial`; negative powers divide at the end so that
    /// `a/b` evaluates exactly as the syntax tree would.
    fn evaluate(&self, coeff: Number, x: f64) -> Result<f64, ExprError> {
        let (mut num, mut den) = match coeff {
            Number::Rational(r) => (
                super::number::rational_to_f64(&Rational::from_integer(*r.numer())),
                super::number::rational_to_f64(&Rational::from_integer(*r.denom())),
            ),
            Number::Float(f) => (f, 1.0),
        };
        for (atom, e) in &self.factors {
            let v = atom.evaluate(x)?;
            let magnitude = e.abs();
            let p = if magnitude.is_integer() {
                powi_f64(v, *magnitude.numer())
            } else {
                v.powf(super::number::rational_to_f64(&magnitude))
            };
            if e.is_positive() {
                num *= p;
            } else {
                den *= p;
            }
        }
        let domain = |reason| ExprError::Domain {
            expr: NormalForm::from_monomial(self.clone(), coeff).to_expr().to_string(),
            reason,
        };
        if den == 0.0 {
            return Err(domain("division by zero"));
        }
        let v = if den == 1.0 { num } else { num / den };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(domain("non-finite result"))
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct NormalForm {
    terms: BTreeMap<Monomial, Number>,
}

impl NormalForm {
    pub fn zero() -> NormalForm {
        NormalForm::default()
    }

    pub fn one() -> NormalForm {
        NormalForm::number(Number::ONE)
    }

    pub fn number(n: Number) -> NormalForm {
        NormalForm::from_monomial(Monomial::default(), n)
    }

    pub fn x() -> NormalForm {
        NormalForm::from_atom(Atom::new(AtomKind::X), Rational::one())
    }

    fn from_monomial(m: Monomial, c: Number) -> NormalForm {
        let mut out = NormalForm::zero();
        out.add_term(m, c);
        out
    }

    fn from_atom(atom: Atom, exponent: Rational) -> NormalForm {
        NormalForm::from_monomial(Monomial { factors: vec![(atom, exponent)] }, Number::ONE)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of monomials.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Number)> {
        self.terms.iter()
    }

    pub fn has_x(&self) -> bool {
        self.terms.keys().any(Monomial::has_x)
    }

    /// The value if this is a pure number.
    pub fn as_number(&self) -> Option<Number> {
        match self.terms.len() {
            0 => Some(Number::ZERO),
            1 => {
                let (m, c) = self.terms.iter().next()?;
                m.is_unit().then_some(*c)
            }
            _ => None,
        }
    }

    fn single_term(&self) -> Option<(&Monomial, &Number)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    fn add_term(&mut self, m: Monomial, c: Number) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().add(c);
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    /// `self += scale * other`
    pub fn add_scaled(&mut self, other: &NormalForm, scale: Number) {
        if scale.is_zero() {
            return;
        }
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.mul(scale));
        }
    }

    /// `self += a * b`
    pub fn add_product(&mut self, a: &NormalForm, b: &NormalForm) {
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                self.add_term(ma.mul(mb), ca.mul(*cb));
            }
        }
    }

    pub fn add(&self, other: &NormalForm) -> NormalForm {
        let mut out = self.clone();
        out.add_scaled(other, Number::ONE);
        out
    }

    pub fn sub(&self, other: &NormalForm) -> NormalForm {
        let mut out = self.clone();
        out.add_scaled(other, Number::ONE.neg());
        out
    }

    pub fn neg(&self) -> NormalForm {
        self.scale(Number::ONE.neg())
    }

    pub fn scale(&self, s: Number) -> NormalForm {
        let mut out = NormalForm::zero();
        out.add_scaled(self, s);
        out
    }

    pub fn mul(&self, other: &NormalForm) -> NormalForm {
        let mut out = NormalForm::zero();
        out.add_product(self, other);
        out
    }

    pub fn powi(&self, k: i128) -> NormalForm {
        self.pow_rational(Rational::from_integer(k))
    }

    fn pow_rational(&self, r: Rational) -> NormalForm {
        if r.is_zero() {
            return NormalForm::one();
        }
        if r.is_one() {
            return self.clone();
        }
        let integral = r.is_integer().then(|| *r.numer());
        if let Some(n) = self.as_number() {
            if let Some(k) = integral {
                if let Some(v) = n.powi(k) {
                    return NormalForm::number(v);
                }
            } else if let Number::Float(f) = n {
                if f > 0.0 {
                    return NormalForm::number(Number::Float(f.powf(super::number::rational_to_f64(&r))));
                }
            }
            return NormalForm::from_atom(Atom::new(AtomKind::Group(self.clone())), r);
        }
        if let Some((m, c)) = self.single_term() {
            if let Some(k) = integral {
                let coeff = c.powi(k).expect("normal-form coefficients are nonzero");
                let factors = m.factors.iter().map(|(a, e)| (a.clone(), e * r)).collect();
                return NormalForm::from_monomial(Monomial { factors }, coeff);
            }
            if c.is_one() && m.factors.len() == 1 && m.factors[0].1.is_one() {
                return NormalForm::from_atom(m.factors[0].0.clone(), r);
            }
            return NormalForm::from_atom(Atom::new(AtomKind::Group(self.clone())), r);
        }
        match integral {
            Some(k) if (2..=MAX_EXPANSION).contains(&k) => {
                let mut out = self.clone();
                for _ in 1..k {
                    out = out.mul(self);
                }
                out
            }
            Some(k) => {
                // pull the leading coefficient out so that (2+2y)^-1 and
                // (1+y)^-1 share an atom
                let (_, lead) = self.terms.iter().next().expect("multi-term sum");
                let inv = Number::ONE.div(*lead).expect("nonzero coefficient");
                let monic = self.scale(inv);
                let coeff = lead.powi(k).expect("nonzero coefficient");
                NormalForm::from_atom(Atom::new(AtomKind::Group(monic)), r).scale(coeff)
            }
            None => NormalForm::from_atom(Atom::new(AtomKind::Group(self.clone())), r),
        }
    }

    pub fn pow(&self, exponent: &NormalForm) -> NormalForm {
        if let Some(n) = exponent.as_number() {
            match n {
                Number::Rational(r) => return self.pow_rational(r),
                Number::Float(f) => {
                    if f.fract() == 0.0 && f.abs() < 1e9 {
                        return self.pow_rational(Rational::from_integer(f as i128));
                    }
                    if let Some(b) = self.as_number() {
                        let base = b.to_f64();
                        if base > 0.0 {
                            return NormalForm::number(Number::Float(base.powf(f)));
                        }
                    }
                }
            }
        }
        if self.is_e() {
            return NormalForm::apply(UnaryOp::Exp, exponent.clone());
        }
        NormalForm::from_atom(Atom::new(AtomKind::Pow(self.clone(), exponent.clone())), Rational::one())
    }

    fn is_e(&self) -> bool {
        match self.single_term() {
            Some((m, c)) => {
                c.is_one()
                    && m.factors.len() == 1
                    && m.factors[0].1.is_one()
                    && matches!(m.factors[0].0.kind(), AtomKind::E)
            }
            None => false,
        }
    }

    /// Applies a unary function, folding exact special values and inexact
    /// numeric arguments.
    pub fn apply(op: UnaryOp, arg: NormalForm) -> NormalForm {
        if op == UnaryOp::Neg {
            return arg.neg();
        }
        if let Some(n) = arg.as_number() {
            if n.is_zero() {
                match op {
                    UnaryOp::Sin | UnaryOp::Tan | UnaryOp::Sinh | UnaryOp::Tanh => return NormalForm::zero(),
                    UnaryOp::Cos | UnaryOp::Cosh | UnaryOp::Exp => return NormalForm::one(),
                    _ => {}
                }
            }
            if op == UnaryOp::Ln && n.is_one() {
                return NormalForm::zero();
            }
            if let Number::Float(f) = n {
                if let Ok(v) = op.apply(f) {
                    return NormalForm::number(Number::Float(v));
                }
            }
        }
        if op == UnaryOp::Ln && arg.is_e() {
            return NormalForm::one();
        }
        NormalForm::from_atom(Atom::new(AtomKind::Func(op, arg)), Rational::one())
    }

    pub fn from_expr(e: &Expr) -> NormalForm {
        match e {
            Expr::Rational(r) => NormalForm::number(Number::Rational(*r)),
            Expr::Float(f) => NormalForm::number(Number::Float(*f)),
            Expr::Const(Constant::Pi) => NormalForm::from_atom(Atom::new(AtomKind::Pi), Rational::one()),
            Expr::Const(Constant::E) => NormalForm::from_atom(Atom::new(AtomKind::E), Rational::one()),
            Expr::Var => NormalForm::x(),
            Expr::Unary(op, a) => NormalForm::apply(*op, NormalForm::from_expr(a)),
            Expr::Binary(op, a, b) => {
                let (a, b) = (NormalForm::from_expr(a), NormalForm::from_expr(b));
                match op {
                    BinaryOp::Add => a.add(&b),
                    BinaryOp::Sub => a.sub(&b),
                    BinaryOp::Mul => a.mul(&b),
                    BinaryOp::Div => a.mul(&b.powi(-1)),
                    BinaryOp::Pow => a.pow(&b),
                }
            }
        }
    }

    pub fn to_expr(&self) -> Expr {
        let mut out: Option<Expr> = None;
        for (m, c) in &self.terms {
            let term = term_expr(m, c.abs());
            out = Some(match (out, c.is_negative()) {
                (None, false) => term,
                (None, true) => Expr::neg(term),
                (Some(acc), false) => Expr::add(acc, term),
                (Some(acc), true) => Expr::sub(acc, term),
            });
        }
        out.unwrap_or_else(|| Expr::int(0))
    }

    pub fn evaluate(&self, x: f64) -> Result<f64, ExprError> {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            acc += m.evaluate(*c, x)?;
        }
        Ok(acc)
    }

    pub fn derivative(&self) -> Result<NormalForm, ExprError> {
        let mut cache: HashMap<usize, NormalForm> = HashMap::new();
        let mut out = NormalForm::zero();
        for (m, c) in &self.terms {
            for (idx, (atom, e)) in m.factors.iter().enumerate() {
                if !atom.has_x() {
                    continue;
                }
                let da = match cache.get(&atom.key()) {
                    Some(d) => d,
                    None => {
                        let d = atom.derivative()?;
                        cache.entry(atom.key()).or_insert(d)
                    }
                };
                if da.is_zero() {
                    continue;
                }
                let mut factors = m.factors.clone();
                let lowered = e - Rational::one();
                if lowered.is_zero() {
                    factors.remove(idx);
                } else {
                    factors[idx].1 = lowered;
                }
                let rest = NormalForm::from_monomial(Monomial { factors }, c.mul(Number::Rational(*e)));
                out.add_product(&rest, da);
            }
        }
        Ok(out)
    }

    pub fn derivative_n(&self, order: usize) -> Result<NormalForm, ExprError> {
        let mut current = self.clone();
        for _ in 0..order {
            current = current.derivative()?;
        }
        Ok(current)
    }
}

fn number_expr(n: Number) -> Expr {
    Expr::number(n)
}

fn power_expr(atom: &Atom, e: Rational) -> Expr {
    let base = atom.to_expr();
    if e.is_one() {
        base
    } else {
        Expr::pow(base, Expr::Rational(e))
    }
}

fn product(factors: Vec<Expr>) -> Option<Expr> {
    factors.into_iter().reduce(Expr::mul)
}

fn term_expr(m: &Monomial, magnitude: Number) -> Expr {
    let mut numer = Vec::new();
    let mut denom = Vec::new();
    match magnitude {
        Number::Rational(r) => {
            if !r.numer().is_one() {
                numer.push(Expr::int(*r.numer()));
            }
            if !r.denom().is_one() {
                denom.push(Expr::int(*r.denom()));
            }
        }
        Number::Float(f) => {
            if f != 1.0 {
                numer.push(number_expr(Number::Float(f)));
            }
        }
    }
    for (atom, e) in &m.factors {
        if e.is_positive() {
            numer.push(power_expr(atom, *e));
        } else {
            denom.push(power_expr(atom, -e));
        }
    }
    let numer = product(numer).unwrap_or_else(|| Expr::int(1));
    match product(denom) {
        Some(d) => Expr::div(numer, d),
        None => numer,
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}
