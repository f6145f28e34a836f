use super::ast::RelOp;
use super::value::RuntimeErrorKind;

/// Constant added to distances of strict/equality failures.
pub const K: f64 = 1.0;

/// Distances of a boolean evaluation to its `true` and `false` outcomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoolEval {
    pub value: bool,
    pub d_true: f64,
    pub d_false: f64,
}

impl BoolEval {
    pub fn constant(value: bool) -> Self {
        BoolEval {
            value,
            d_true: if value { 0.0 } else { K },
            d_false: if value { K } else { 0.0 },
        }
    }

    /// Distance to the outcome this evaluation did not take.
    pub fn flip_distance(&self) -> f64 {
        if self.value {
            self.d_false
        } else {
            self.d_true
        }
    }

    pub fn negate(self) -> Self {
        BoolEval {
            value: !self.value,
            d_true: self.d_false,
            d_false: self.d_true,
        }
    }
}

/// Branch distances `(d_true, d_false)` of `a op b`.
///
/// Exactly one of the two is zero. Non-finite operands are rejected.
pub fn branch_distance(op: RelOp, a: f64, b: f64) -> Result<(f64, f64), RuntimeErrorKind> {
    if a.is_nan() || b.is_nan() {
        return Err(RuntimeErrorKind::NanInPredicate);
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(RuntimeErrorKind::NonFiniteOperand);
    }
    let zero_if = |c: bool, d: f64| if c { 0.0 } else { d };
    Ok(match op {
        RelOp::Eq => ((a - b).abs(), zero_if(a != b, K)),
        RelOp::Ne => (zero_if(a != b, K), (a - b).abs()),
        RelOp::Lt => (zero_if(a < b, a - b + K), zero_if(a >= b, b - a)),
        RelOp::Le => (zero_if(a <= b, a - b), zero_if(a > b, b - a + K)),
        RelOp::Gt => (zero_if(a > b, b - a + K), zero_if(a <= b, a - b)),
        RelOp::Ge => (zero_if(a >= b, b - a), zero_if(a < b, a - b + K)),
    })
}

pub(crate) fn compare(op: RelOp, a: f64, b: f64) -> Result<BoolEval, RuntimeErrorKind> {
    let (d_true, d_false) = branch_distance(op, a, b)?;
    Ok(BoolEval {
        value: op.holds(a, b),
        d_true,
        d_false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equality_distances() {
        assert_eq!(branch_distance(RelOp::Eq, 4.0, 6.0).unwrap().0, 2.0);
        assert_eq!(branch_distance(RelOp::Eq, 5.0, 6.0).unwrap().0, 1.0);
        assert_eq!(branch_distance(RelOp::Eq, 6.0, 6.0).unwrap(), (0.0, 1.0));
        assert_eq!(branch_distance(RelOp::Ne, 6.0, 6.0).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn ordering_distances() {
        assert_eq!(branch_distance(RelOp::Lt, 3.0, 5.0).unwrap(), (0.0, 2.0));
        assert_eq!(branch_distance(RelOp::Lt, 5.0, 5.0).unwrap(), (1.0, 0.0));
        assert_eq!(branch_distance(RelOp::Le, 5.0, 5.0).unwrap(), (0.0, 1.0));
        assert_eq!(branch_distance(RelOp::Le, 7.0, 5.0).unwrap(), (2.0, 0.0));
        assert_eq!(branch_distance(RelOp::Gt, 5.0, 5.0).unwrap(), (1.0, 0.0));
        assert_eq!(branch_distance(RelOp::Ge, 2.0, 5.0).unwrap(), (3.0, 0.0));
        assert_eq!(branch_distance(RelOp::Ge, 5.0, 2.0).unwrap(), (0.0, 4.0));
    }

    #[test]
    fn non_finite_rejected() {
        assert_eq!(
            branch_distance(RelOp::Lt, f64::NAN, 1.0),
            Err(RuntimeErrorKind::NanInPredicate)
        );
        assert_eq!(
            branch_distance(RelOp::Lt, f64::INFINITY, 1.0),
            Err(RuntimeErrorKind::NonFiniteOperand)
        );
    }
}
