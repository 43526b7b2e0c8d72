/// Derivatives of `u` up to fourth order at one point.
///
/// Index order inside each array is by the number of `y` derivatives:
/// `d2 = [xx, xy, yy]`, `d3 = [xxx, xxy, xyy, yyy]`, and so on.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub u: f64,
    pub d1: [f64; 2],
    pub d2: [f64; 3],
    pub d3: [f64; 4],
    pub d4: [f64; 5],
}

impl Jet {
    /// `∂x^a ∂y^b u` for `a + b ≤ 4`.
    pub fn partial(&self, a: usize, b: usize) -> f64 {
        match a + b {
            0 => self.u,
            1 => self.d1[b],
            2 => self.d2[b],
            3 => self.d3[b],
            4 => self.d4[b],
            _ => panic!("jet only carries derivatives up to order four"),
        }
    }

    pub fn add(&self, o: &Jet) -> Jet {
        let mut r = *self;
        r.u += o.u;
        r.d1.iter_mut().zip(o.d1).for_each(|(a, b)| *a += b);
        r.d2.iter_mut().zip(o.d2).for_each(|(a, b)| *a += b);
        r.d3.iter_mut().zip(o.d3).for_each(|(a, b)| *a += b);
        r.d4.iter_mut().zip(o.d4).for_each(|(a, b)| *a += b);
        r
    }

    /// Jet of `F(x² + y²)` given `F` and its first four derivatives with
    /// respect to `w = x² + y²`.
    pub fn radial(x: f64, y: f64, f: [f64; 5]) -> Jet {
        let [f0, f1, f2, f3, f4] = f;
        let (x2, y2, xy) = (x * x, y * y, x * y);
        Jet {
            u: f0,
            d1: [2.0 * x * f1, 2.0 * y * f1],
            d2: [4.0 * x2 * f2 + 2.0 * f1, 4.0 * xy * f2, 4.0 * y2 * f2 + 2.0 * f1],
            d3: [
                8.0 * x2 * x * f3 + 12.0 * x * f2,
                8.0 * x2 * y * f3 + 4.0 * y * f2,
                8.0 * x * y2 * f3 + 4.0 * x * f2,
                8.0 * y2 * y * f3 + 12.0 * y * f2,
            ],
            d4: [
                16.0 * x2 * x2 * f4 + 48.0 * x2 * f3 + 12.0 * f2,
                16.0 * x2 * xy * f4 + 24.0 * xy * f3,
                16.0 * x2 * y2 * f4 + 8.0 * (x2 + y2) * f3 + 4.0 * f2,
                16.0 * xy * y2 * f4 + 24.0 * xy * f3,
                16.0 * y2 * y2 * f4 + 48.0 * y2 * f3 + 12.0 * f2,
            ],
        }
    }

    /// Jet of `a · sin(kx x + px) · sin(ky y + py)`.
    pub fn sine_product(x: f64, y: f64, a: f64, kx: f64, px: f64, ky: f64, py: f64) -> Jet {
        // n-th derivative of sin(k t + p) is k^n sin(k t + p + nπ/2).
        let dsin = |t: f64, k: f64, p: f64, n: i32| -> f64 {
            let arg = k * t + p;
            let base = match n.rem_euclid(4) {
                0 => arg.sin(),
                1 => arg.cos(),
                2 => -arg.sin(),
                _ => -arg.cos(),
            };
            k.powi(n) * base
        };
        let term = |m: i32, n: i32| a * dsin(x, kx, px, m) * dsin(y, ky, py, n);
        Jet {
            u: term(0, 0),
            d1: [term(1, 0), term(0, 1)],
            d2: [term(2, 0), term(1, 1), term(0, 2)],
            d3: [term(3, 0), term(2, 1), term(1, 2), term(0, 3)],
            d4: [term(4, 0), term(3, 1), term(2, 2), term(1, 3), term(0, 4)],
        }
    }
}
