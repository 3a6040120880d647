//! Squared-error loss statistics and the regularised leaf/split formulas.

use crate::scalar::Scalar;

use super::BoostError;

/// `0.5 * (y - y_hat)^2`
pub fn squared_loss<T: Scalar>(y_true: T, y_pred: T) -> T {
    let r = y_true - y_pred;
    T::lit(0.5) * r * r
}

/// First and second derivative of [`squared_loss`] in the prediction.
pub fn grad_hess_squared_loss<T: Scalar>(y_true: T, y_pred: T) -> (T, T) {
    (y_pred - y_true, T::one())
}

/// Optimal leaf weight `-G / (H + lambda)`.
pub fn leaf_weight<T: Scalar>(sum_g: T, sum_h: T, lambda: T) -> Result<T, BoostError> {
    let denom = sum_h + lambda;
    if !(denom > T::zero()) {
        return Err(BoostError::DegenerateDenominator(denom.to_f64_lossy()));
    }
    Ok(-sum_g / denom)
}

/// Loss reduction from replacing one leaf by two, net of the `gamma` leaf
/// penalty.
pub fn split_gain<T: Scalar>(g_l: T, h_l: T, g_r: T, h_r: T, lambda: T, gamma: T) -> T {
    let g = g_l + g_r;
    let h = h_l + h_r;
    let children = g_l * g_l / (h_l + lambda) + g_r * g_r / (h_r + lambda);
    T::lit(0.5) * (children - g * g / (h + lambda)) - gamma
}

/// Gradient-side statistics accumulated over the rows of a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeStats<T> {
    /// Gradient sum (second-order learner) or residual sum (GBDT).
    pub first: T,
    /// Hessian sum or row count.
    pub second: T,
}

impl<T: Scalar> NodeStats<T> {
    pub fn zero() -> Self {
        NodeStats {
            first: T::zero(),
            second: T::zero(),
        }
    }

    pub fn add(&mut self, first: T, second: T) {
        self.first = self.first + first;
        self.second = self.second + second;
    }

    pub fn minus(self, other: Self) -> Self {
        NodeStats {
            first: self.first - other.first,
            second: self.second - other.second,
        }
    }
}

/// How a tree learner scores candidate splits and sets leaf values.
pub trait SplitObjective<T: Scalar> {
    fn gain(&self, left: NodeStats<T>, right: NodeStats<T>) -> T;

    fn leaf_value(&self, stats: NodeStats<T>) -> T;

    /// Quantity compared against `min_child_weight`.
    fn child_weight(&self, stats: NodeStats<T>) -> T {
        stats.second
    }
}

/// Regularised second-order objective over (gradient, hessian) sums.
#[derive(Debug, Clone, Copy)]
pub struct SecondOrder<T> {
    pub lambda: T,
    pub gamma: T,
}

impl<T: Scalar> SplitObjective<T> for SecondOrder<T> {
    fn gain(&self, l: NodeStats<T>, r: NodeStats<T>) -> T {
        split_gain(l.first, l.second, r.first, r.second, self.lambda, self.gamma)
    }

    fn leaf_value(&self, s: NodeStats<T>) -> T {
        leaf_weight(s.first, s.second, self.lambda).unwrap_or_else(|_| T::zero())
    }
}

/// Least-squares residual fitting over (residual sum, row count): split by
/// reduction in squared error, leaves at the mean residual.
#[derive(Debug, Clone, Copy, Default)]
pub struct ResidualVariance;

impl<T: Scalar> SplitObjective<T> for ResidualVariance {
    fn gain(&self, l: NodeStats<T>, r: NodeStats<T>) -> T {
        let s = l.first + r.first;
        let n = l.second + r.second;
        l.first * l.first / l.second + r.first * r.first / r.second - s * s / n
    }

    fn leaf_value(&self, s: NodeStats<T>) -> T {
        if s.second > T::zero() {
            s.first / s.second
        } else {
            T::zero()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grad_hess_examples() {
        assert_eq!(grad_hess_squared_loss(3.0, 3.0), (0.0, 1.0));
        assert_eq!(grad_hess_squared_loss(1.0, 4.0), (3.0, 1.0));
    }

    #[test]
    fn leaf_weight_examples() {
        // targets {1, 3} from base 0: g = -y, h = 1
        assert_eq!(leaf_weight(-4.0, 2.0, 0.0).unwrap(), 2.0);
        assert_eq!(leaf_weight(0.0, 2.0, 1.0).unwrap(), 0.0);
        let mut last = f64::INFINITY;
        for lambda in [0.0, 1.0, 10.0, 1e3, 1e6] {
            let w: f64 = leaf_weight(-4.0, 2.0, lambda).unwrap();
            assert!(w.abs() < last);
            last = w.abs();
        }
        assert!(last < 1e-5);
        assert!(matches!(leaf_weight(1.0, 0.0, 0.0), Err(BoostError::DegenerateDenominator(_))));
    }

    #[test]
    fn split_gain_identities() {
        assert_eq!(split_gain(0.0, 3.0, 0.0, 2.0, 1.0, 0.25), -0.25);
        // identical G/H ratio with lambda 0 earns nothing
        let g: f64 = split_gain(-2.0, 1.0, -6.0, 3.0, 0.0, 0.5);
        assert!((g + 0.5).abs() < 1e-12);
    }

    #[test]
    fn gbdt_gain_is_twice_second_order_gain_without_regularisation() {
        let so = SecondOrder { lambda: 0.0, gamma: 0.0 };
        let l = NodeStats { first: 2.5, second: 3.0 };
        let r = NodeStats { first: -1.0, second: 5.0 };
        let neg = |s: NodeStats<f64>| NodeStats { first: -s.first, second: s.second };
        let vr = ResidualVariance.gain(neg(l), neg(r));
        assert_eq!(vr * 0.5, so.gain(l, r));
        assert_eq!(ResidualVariance.leaf_value(neg(l)), so.leaf_value(l));
    }
}
