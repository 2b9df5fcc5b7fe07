use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::EquivError;
use crate::rational::{format_exact, Rational};
use crate::syntax::Formula;

/// A product of indeterminates `p_x`, as variable -> exponent.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(BTreeMap<String, u32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(x: impl Into<String>) -> Self {
        Monomial(BTreeMap::from([(x.into(), 1)]))
    }

    pub fn exponents(&self) -> &BTreeMap<String, u32> {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.values().sum()
    }

    fn times(&self, other: &Monomial) -> Monomial {
        let mut out = self.0.clone();
        for (x, e) in &other.0 {
            *out.entry(x.clone()).or_insert(0) += e;
        }
        Monomial(out)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (n, (x, e)) in self.0.iter().enumerate() {
            if n > 0 {
                f.write_str("·")?;
            }
            write!(f, "p_{x}")?;
            if *e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// A polynomial with exact rational coefficients over the indeterminates
/// `p_x`. Zero coefficients are never stored, so structural equality is
/// polynomial equality.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Polynomial::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn one() -> Self {
        Polynomial::constant(Rational::one())
    }

    /// The indeterminate `p_x`.
    pub fn var(x: impl Into<String>) -> Self {
        let mut p = Polynomial::zero();
        p.add_term(Monomial::var(x), Rational::one());
        p
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn degree_in(&self, x: &str) -> u32 {
        self.terms.keys().map(|m| m.0.get(x).copied().unwrap_or(0)).max().unwrap_or(0)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    /// `1 - self`.
    pub fn one_minus(&self) -> Polynomial {
        &Polynomial::one() - self
    }

    /// Evaluates at the given point; missing variables are an error.
    pub fn eval(&self, point: &BTreeMap<String, Rational>) -> Result<Rational, String> {
        let mut sum = Rational::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (x, e) in &m.0 {
                let v = point.get(x).ok_or_else(|| x.clone())?;
                term *= num_traits::pow(v.clone(), *e as usize);
            }
            sum += term;
        }
        Ok(sum)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.times(m2), c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            match (n, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let magnitude = c.abs();
            if m.0.is_empty() {
                f.write_str(&format_exact(&magnitude))?;
            } else if magnitude.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}·{m}", format_exact(&magnitude))?;
            }
        }
        Ok(())
    }
}

/// The expected value of a propositional formula as a polynomial in the
/// variable probabilities.
pub fn polynomial(f: &Formula) -> Result<Polynomial, EquivError> {
    let core = f.desugar();
    let mut memo = HashMap::new();
    poly_of(&core, &mut memo)
}

fn poly_of(f: &Formula, memo: &mut HashMap<*const Formula, Polynomial>) -> Result<Polynomial, EquivError> {
    let key = f as *const Formula;
    if let Some(p) = memo.get(&key) {
        return Ok(p.clone());
    }
    let mut child = |c: &Arc<Formula>| poly_of(c, memo);
    let p = match f {
        Formula::Top => Polynomial::one(),
        Formula::Bot => Polynomial::zero(),
        Formula::Var(x) => Polynomial::var(x.clone()),
        Formula::Ite(c, a, b) => {
            let pc = child(c)?;
            let pa = child(a)?;
            let pb = child(b)?;
            &(&pc * &pa) + &(&pc.one_minus() * &pb)
        }
        Formula::Cond { .. } => return Err(EquivError::Modal(f.to_string())),
        other => unreachable!("desugared formula contains {other}"),
    };
    memo.insert(key, p.clone());
    Ok(p)
}

impl Sub<Polynomial> for Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: Polynomial) -> Polynomial {
        &self - &rhs
    }
}

impl Add<Polynomial> for Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: Polynomial) -> Polynomial {
        &self + &rhs
    }
}

impl Mul<Polynomial> for Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn poly(s: &str) -> Polynomial {
        polynomial(&s.parse().unwrap()).unwrap()
    }

    #[test]
    fn conjunction_is_a_product() {
        assert_eq!(poly("x & y").to_string(), "p_x·p_y");
        assert_eq!(poly("x & y"), poly("y & x"));
        assert_eq!(poly("x & x").to_string(), "p_x^2");
        assert_ne!(poly("x & x"), poly("x"));
        assert_eq!(poly("(x ? T : F)"), poly("x"));
    }

    #[test]
    fn negation_and_constants() {
        assert_eq!(poly("~x").to_string(), "1 - p_x");
        assert_eq!(poly("T").to_string(), "1");
        assert_eq!(poly("F").to_string(), "0");
        // Excluded middle fails: two independent samples of x.
        assert_eq!(poly("x v ~x").to_string(), "1 - p_x + p_x^2");
    }

    #[test]
    fn repeat_at_a_point() {
        let p = poly("p1^{1/2}");
        let v = p.eval(&BTreeMap::from([("p1".to_string(), ratio(1, 4))])).unwrap();
        assert_eq!(v, ratio(7, 16));
        assert_eq!(p.degree_in("p1"), 2);
    }

    #[test]
    fn modal_input_is_rejected() {
        assert!(matches!(polynomial(&"E@a x".parse().unwrap()), Err(EquivError::Modal(_))));
    }

    #[test]
    fn coefficients_print_exactly() {
        let p = &Polynomial::constant(ratio(1, 2)) * &Polynomial::var("x");
        assert_eq!(p.to_string(), "1/2·p_x");
        assert_eq!((-&p).to_string(), "-1/2·p_x");
    }
}
