use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi || lo.is_nan() || hi.is_nan(), "empty interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn radius(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_with_tol(&self, x: f64, tol: f64) -> bool {
        self.lo - tol <= x && x <= self.hi + tol
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval::new(self.lo + other.lo, self.hi + other.hi)
    }

    pub fn scale(&self, s: f64) -> Interval {
        if s >= 0.0 {
            Interval::new(self.lo * s, self.hi * s)
        } else {
            Interval::new(self.hi * s, self.lo * s)
        }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let c = [
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        ];
        Interval::new(
            c.iter().cloned().fold(f64::INFINITY, f64::min),
            c.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        )
    }

    pub fn straddles_zero(&self) -> bool {
        self.lo < 0.0 && self.hi > 0.0
    }
}

/// Axis-aligned box, one interval per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalBox(pub Vec<Interval>);

impl IntervalBox {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        self.0.len() == point.len() && self.0.iter().zip(point).all(|(iv, &x)| iv.contains(x))
    }

    pub fn contains_with_tol(&self, point: &[f64], tol: f64) -> bool {
        self.0.len() == point.len() && self.0.iter().zip(point).all(|(iv, &x)| iv.contains_with_tol(x, tol))
    }

    pub fn hull(&self, other: &IntervalBox) -> IntervalBox {
        IntervalBox(self.0.iter().zip(&other.0).map(|(a, b)| a.hull(b)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_product_covers_sign_cases() {
        let a = Interval::new(-1.0, 2.0);
        let b = Interval::new(-3.0, 1.0);
        assert_eq!(a.mul(&b), Interval::new(-6.0, 3.0));
        assert_eq!(a.scale(-2.0), Interval::new(-4.0, 2.0));
    }

    #[test]
    fn hull_and_containment() {
        let h = Interval::new(-1.0, 0.0).hull(&Interval::new(0.0, 1.0));
        assert_eq!(h, Interval::new(-1.0, 1.0));
        assert!(h.contains_interval(&Interval::new(-0.5, 0.5)));
        assert!(h.straddles_zero());
    }
}
