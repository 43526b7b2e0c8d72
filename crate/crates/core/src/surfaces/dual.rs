use std::ops::{Add, Div, Mul, Neg, Sub};

/// Second-order forward-mode number in `(x, y)`: value, gradient and Hessian.
///
/// [`Dual2::dx`] and [`Dual2::dy`] shift the jet down one order; the result
/// carries NaN in its second-order slots because third derivatives are not
/// tracked, so any accidental use of them poisons the answer visibly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual2 {
    pub v: f64,
    pub x: f64,
    pub y: f64,
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Dual2 {
    pub fn new(v: f64, x: f64, y: f64, xx: f64, xy: f64, yy: f64) -> Self {
        Self { v, x, y, xx, xy, yy }
    }

    pub fn constant(v: f64) -> Self {
        Self::new(v, 0.0, 0.0, 0.0, 0.0, 0.0)
    }

    pub fn dx(&self) -> Self {
        Self::new(self.x, self.xx, self.xy, f64::NAN, f64::NAN, f64::NAN)
    }

    pub fn dy(&self) -> Self {
        Self::new(self.y, self.xy, self.yy, f64::NAN, f64::NAN, f64::NAN)
    }

    /// `φ(self)` given `φ`, `φ'` and `φ''` at `self.v`.
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        Self {
            v: f0,
            x: f1 * self.x,
            y: f1 * self.y,
            xx: f2 * self.x * self.x + f1 * self.xx,
            xy: f2 * self.x * self.y + f1 * self.xy,
            yy: f2 * self.y * self.y + f1 * self.yy,
        }
    }

    pub fn recip(&self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    pub fn sqrt(&self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn powi(&self, n: i32) -> Self {
        let nf = n as f64;
        self.chain(self.v.powi(n), nf * self.v.powi(n - 1), nf * (nf - 1.0) * self.v.powi(n - 2))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(c * self.v, c * self.x, c * self.y, c * self.xx, c * self.xy, c * self.yy)
    }
}

impl Add for Dual2 {
    type Output = Dual2;
    fn add(self, o: Dual2) -> Dual2 {
        Dual2::new(self.v + o.v, self.x + o.x, self.y + o.y, self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)
    }
}

impl Sub for Dual2 {
    type Output = Dual2;
    fn sub(self, o: Dual2) -> Dual2 {
        self + (-o)
    }
}

impl Neg for Dual2 {
    type Output = Dual2;
    fn neg(self) -> Dual2 {
        self.scale(-1.0)
    }
}

impl Mul for Dual2 {
    type Output = Dual2;
    fn mul(self, o: Dual2) -> Dual2 {
        Dual2 {
            v: self.v * o.v,
            x: self.x * o.v + self.v * o.x,
            y: self.y * o.v + self.v * o.y,
            xx: self.xx * o.v + 2.0 * self.x * o.x + self.v * o.xx,
            xy: self.xy * o.v + self.x * o.y + self.y * o.x + self.v * o.xy,
            yy: self.yy * o.v + 2.0 * self.y * o.y + self.v * o.yy,
        }
    }
}

impl Div for Dual2 {
    type Output = Dual2;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Dual2) -> Dual2 {
        self * o.recip()
    }
}

impl Add<f64> for Dual2 {
    type Output = Dual2;
    fn add(self, c: f64) -> Dual2 {
        Dual2 { v: self.v + c, ..self }
    }
}

impl Mul<f64> for Dual2 {
    type Output = Dual2;
    fn mul(self, c: f64) -> Dual2 {
        self.scale(c)
    }
}
