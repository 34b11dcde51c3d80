//! Operator families that write string values, polynomials and powers into registers.

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::affine::{linear_combination_gadget, AffineError, AffineOperator, AffineState};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncoderError {
    #[error("digit {digit} out of range for base {base}")]
    DigitRange { digit: u32, base: u32 },
    #[error("base must be at least 1")]
    Base,
    #[error(transparent)]
    Affine(#[from] AffineError),
}

/// Which register entry a digit-append operator folds into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DigitTarget {
    /// 3-entry register `(1, value, -value)`.
    Value,
    /// 4-entry register, fold into entry 2 (the `A_j` family).
    Second,
    /// 4-entry register, fold into entry 3 (the `B_j` family).
    Third,
}

/// Operator realizing `value <- digit + base * value` in the target entry; the last entry
/// keeps the sum at 1.
pub fn digit_append(base: u32, digit: u32, target: DigitTarget) -> Result<AffineOperator, EncoderError> {
    if base == 0 {
        return Err(EncoderError::Base);
    }
    if digit >= base {
        return Err(EncoderError::DigitRange { digit, base });
    }
    let n = base as i64;
    let j = digit as i64;
    let op = match target {
        DigitTarget::Value => {
            AffineOperator::from_i64_rows(&[&[1, 0, 0], &[j, n, 0], &[-j, 1 - n, 1]])?
        }
        DigitTarget::Second => AffineOperator::from_i64_rows(&[
            &[1, 0, 0, 0],
            &[j, n, 0, 0],
            &[0, 0, 1, 0],
            &[-j, 1 - n, 0, 1],
        ])?,
        DigitTarget::Third => AffineOperator::from_i64_rows(&[
            &[1, 0, 0, 0],
            &[0, 1, 0, 0],
            &[j, 0, n, 0],
            &[-j, 0, 1 - n, 1],
        ])?,
    };
    Ok(op)
}

/// Folds `digits` most-significant-first into a fresh 3-entry register.
pub fn encode_value(digits: &[u32], base: u32) -> Result<AffineState, EncoderError> {
    let mut v = AffineState::basis(3, 0);
    for &d in digits {
        v = digit_append(base, d, DigitTarget::Value)?.apply(&v)?;
    }
    Ok(v)
}

/// Register with layout `(1, l, l^2, .., l^d, p(l), bal)` advanced once per symbol read.
#[derive(Debug, Clone)]
pub struct PolynomialEncoderBank {
    pub degree: usize,
    pub coefficients: Vec<Rational>,
    pub binomial: AffineOperator,
    pub gadget: AffineOperator,
    /// `gadget * binomial`, the single per-symbol operator.
    pub step: AffineOperator,
}

impl PolynomialEncoderBank {
    pub fn dim(&self) -> usize {
        self.degree + 3
    }

    /// Index of the entry holding `p(l)`.
    pub fn value_index(&self) -> usize {
        self.degree + 1
    }

    /// State for `l = 0`, with `p(0)` already evaluated.
    pub fn initial_state(&self) -> AffineState {
        self.gadget
            .apply(&AffineState::basis(self.dim(), 0))
            .expect("gadget dimension matches")
    }

    pub fn after(&self, l: usize) -> AffineState {
        let mut v = self.initial_state();
        for _ in 0..l {
            v = self.step.apply(&v).expect("step dimension matches");
        }
        v
    }

    pub fn value(&self, state: &AffineState) -> Rational {
        state.entry(self.value_index()).clone()
    }
}

/// Operator on `(x_0..x_d, y, bal)` sending each `x_k = l^k` to `(l+1)^k`; `y` is untouched.
pub fn binomial_update(degree: usize) -> AffineOperator {
    let dim = degree + 3;
    let mut rows = AffineOperator::identity(dim).rows();
    for k in 0..=degree {
        for j in 0..=k {
            rows[k][j] = Rational::from_integer(binomial(BigInt::from(k), BigInt::from(j)));
        }
    }
    for j in 0..=degree {
        let col: Rational = (0..=degree).map(|k| rows[k][j].clone()).sum();
        rows[dim - 1][j] = Rational::one() - col;
    }
    AffineOperator::new(rows).expect("binomial update is affine by construction")
}

/// `coefficients[k]` multiplies `x^k`; missing high coefficients are zero.
pub fn polynomial_encoder(coefficients: &[Rational], degree: usize) -> PolynomialEncoderBank {
    let mut c = coefficients.to_vec();
    c.resize(degree + 1, Rational::zero());
    let binomial = binomial_update(degree);
    let gadget = linear_combination_gadget(degree + 1, &c).expect("coefficient count matches");
    let step = AffineOperator::compose(&gadget, &binomial).expect("dimensions match");
    PolynomialEncoderBank {
        degree,
        coefficients: c,
        binomial,
        gadget,
        step,
    }
}

/// `M_a = [[a, 0], [1 - a, 1]]`: multiplies the first entry by `a` on each application.
pub fn ratio_operator(a: &Rational) -> AffineOperator {
    AffineOperator::new(vec![
        vec![a.clone(), Rational::zero()],
        vec![Rational::one() - a, Rational::one()],
    ])
    .expect("ratio operator is affine")
}

#[derive(Debug, Clone)]
pub struct ExponentEncoder {
    pub ratio: Rational,
    pub operator: AffineOperator,
}

impl ExponentEncoder {
    pub fn after(&self, l: usize) -> AffineState {
        let mut v = AffineState::basis(2, 0);
        for _ in 0..l {
            v = self.operator.apply(&v).expect("2x2");
        }
        v
    }
}

pub fn exponent_encoder(a: &Rational) -> ExponentEncoder {
    ExponentEncoder {
        ratio: a.clone(),
        operator: ratio_operator(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn third(v: &AffineState) -> Rational {
        v.entry(1).clone()
    }

    #[test]
    fn digit_append_examples() {
        assert_eq!(third(&encode_value(&[1, 0], 2).unwrap()), int(2));
        assert_eq!(encode_value(&[], 2).unwrap(), AffineState::basis(3, 0));
        let v = AffineState::new(vec![int(1), int(3), int(-3)]).unwrap();
        let out = digit_append(10, 7, DigitTarget::Value).unwrap().apply(&v).unwrap();
        assert_eq!(out, AffineState::new(vec![int(1), int(37), int(-37)]).unwrap());
        assert_eq!(
            digit_append(2, 2, DigitTarget::Value),
            Err(EncoderError::DigitRange { digit: 2, base: 2 })
        );
    }

    #[test]
    fn four_entry_targets() {
        let v = AffineState::basis(4, 0);
        let a = digit_append(5, 3, DigitTarget::Second).unwrap();
        let b = digit_append(5, 4, DigitTarget::Third).unwrap();
        let out = b.apply(&a.apply(&v).unwrap()).unwrap();
        assert_eq!(out.entries(), &[int(1), int(3), int(4), int(-7)]);
    }

    #[test]
    fn nine_distinct_two_digit_values() {
        let mut seen = std::collections::BTreeSet::new();
        for a in 0..3 {
            for b in 0..3 {
                seen.insert(third(&encode_value(&[a, b], 3).unwrap()));
            }
        }
        assert_eq!(seen.len(), 9);
    }

    #[test]
    fn polynomial_examples() {
        let p = polynomial_encoder(&[int(0), int(1)], 1);
        assert_eq!(p.value(&p.after(5)), int(5));
        assert_eq!(p.after(5).entries(), &[int(1), int(5), int(5), int(-10)]);
        let p = polynomial_encoder(&[int(0), int(0), int(1)], 2);
        assert_eq!(p.value(&p.after(3)), int(9));
        let p = polynomial_encoder(&[int(1), int(-1), int(0), int(2)], 3);
        assert_eq!(p.value(&p.after(4)), int(125));
        assert_eq!(p.value(&p.initial_state()), int(1));
    }

    #[test]
    fn exponent_examples() {
        let e = exponent_encoder(&rat(1, 2));
        assert_eq!(e.after(3).entries(), &[rat(1, 8), rat(7, 8)]);
        assert_eq!(e.after(0), AffineState::basis(2, 0));
        let e = exponent_encoder(&rat(1, 4));
        assert_eq!(e.after(5).entries(), &[rat(1, 1024), rat(1023, 1024)]);
    }
}
