//! Open intervals with possibly unbounded endpoints.
//!
//! Domains of measures and images of changes of variables are always open;
//! an unbounded side is a tagged variant rather than a sentinel float.

/// Which end of an interval is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndSide {
    Lower,
    Upper,
}

/// One side of an open interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Finite(f64),
    Unbounded,
}

impl Bound {
    pub fn finite(self) -> Option<f64> {
        match self {
            Bound::Finite(v) => Some(v),
            Bound::Unbounded => None,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, Bound::Unbounded)
    }
}

/// An open interval; `lo` unbounded means -inf, `hi` unbounded means +inf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: Bound,
    pub hi: Bound,
}

impl Interval {
    pub fn new(lo: Bound, hi: Bound) -> Self {
        Interval { lo, hi }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Interval {
            lo: Bound::Finite(lo),
            hi: Bound::Finite(hi),
        }
    }

    /// `(lo, +inf)`.
    pub fn above(lo: f64) -> Self {
        Interval {
            lo: Bound::Finite(lo),
            hi: Bound::Unbounded,
        }
    }

    pub fn real_line() -> Self {
        Interval {
            lo: Bound::Unbounded,
            hi: Bound::Unbounded,
        }
    }

    /// Strict interior membership.
    pub fn contains(&self, r: f64) -> bool {
        if !r.is_finite() {
            return false;
        }
        let above_lo = match self.lo {
            Bound::Finite(a) => r > a,
            Bound::Unbounded => true,
        };
        let below_hi = match self.hi {
            Bound::Finite(b) => r < b,
            Bound::Unbounded => true,
        };
        above_lo && below_hi
    }

    pub fn describe(&self) -> String {
        let lo = match self.lo {
            Bound::Finite(a) => format!("{a}"),
            Bound::Unbounded => "-inf".to_string(),
        };
        let hi = match self.hi {
            Bound::Finite(b) => format!("{b}"),
            Bound::Unbounded => "inf".to_string(),
        };
        format!("({lo}, {hi})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_interior() {
        let iv = Interval::open(0.0, std::f64::consts::PI);
        assert!(iv.contains(1.0));
        assert!(!iv.contains(0.0));
        assert!(!iv.contains(std::f64::consts::PI));
        assert!(!iv.contains(f64::NAN));
    }

    #[test]
    fn unbounded_sides() {
        let iv = Interval::above(0.0);
        assert!(iv.contains(1e300));
        assert!(!iv.contains(f64::INFINITY));
        assert!(Interval::real_line().contains(-1e300));
    }

    #[test]
    fn describe_is_readable() {
        assert_eq!(Interval::above(0.0).describe(), "(0, inf)");
        assert_eq!(Interval::real_line().describe(), "(-inf, inf)");
    }
}
