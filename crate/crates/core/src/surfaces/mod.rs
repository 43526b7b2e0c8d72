//! Catalog of analytic graph surfaces `z = u(x, y)` with hand-coded
//! derivatives up to fourth order.
//!
//! Nothing here touches the finite-difference code in [`crate::field`]; the
//! closed forms are the reference every grid computation is checked against.

mod dual;
mod jet;
mod oracle;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{Field, Grid};
use crate::scalar::Real;

pub use dual::Dual2;
pub use jet::Jet;
pub use oracle::{exact_curvatures, exact_willmore_density, ExactGeometry};

/// Relative safety margins keeping sample points away from derivative
/// blow-up at `r = R` (sphere cap) and `r = 1` (catenoid).
pub const SPHERE_CAP_MARGIN: f64 = 0.95;
pub const CATENOID_MIN_RADIUS: f64 = 1.05;

/// One term `amplitude · sin(kx x + phase_x) · sin(ky y + phase_y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigMode {
    pub amplitude: f64,
    pub kx: f64,
    pub ky: f64,
    pub phase_x: f64,
    pub phase_y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Surface {
    /// `a x + b y + c`
    Plane { a: f64, b: f64, c: f64 },
    /// `(x² + y²) / 2`
    Paraboloid,
    /// Upper hemisphere `√(R² − r²)` restricted to `r < 0.95 R`.
    SphereCap { radius: f64 },
    /// Upper half of the catenoid, `arccosh r` on `r > 1.05`.
    CatenoidPiece,
    /// `A exp(−r² / w²)`
    GaussianBump { amplitude: f64, width: f64 },
    /// Gaussian bump plus the linear tilt `a x + b y`.
    TiltedBump { amplitude: f64, width: f64, a: f64, b: f64 },
    /// Finite sum of sine products; periodic on `[0, 2π)²` for integer wavenumbers.
    Trig { modes: Vec<TrigMode> },
}

impl Surface {
    pub fn name(&self) -> &'static str {
        match self {
            Surface::Plane { .. } => "plane",
            Surface::Paraboloid => "paraboloid",
            Surface::SphereCap { .. } => "sphere_cap",
            Surface::CatenoidPiece => "catenoid_piece",
            Surface::GaussianBump { .. } => "gaussian_bump",
            Surface::TiltedBump { .. } => "tilted_bump",
            Surface::Trig { .. } => "trig",
        }
    }

    pub fn catalog_names() -> &'static [&'static str] {
        &["plane", "paraboloid", "sphere_cap", "catenoid_piece", "gaussian_bump", "tilted_bump", "trig"]
    }

    pub fn gaussian_bump(amplitude: f64) -> Self {
        Surface::GaussianBump { amplitude, width: 1.0 }
    }

    pub fn sphere_cap(radius: f64) -> Self {
        Surface::SphereCap { radius }
    }

    pub fn flat() -> Self {
        Surface::Plane { a: 0.0, b: 0.0, c: 0.0 }
    }

    /// Random smooth periodic surface on `[0, 2π)²` with sup-norm at most
    /// `amplitude`. Wavenumbers are integers in `1..=3`.
    pub fn random_trig(seed: u64, amplitude: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_modes = rng.gen_range(2..=3);
        let tau = 2.0 * std::f64::consts::PI;
        let weights: Vec<f64> = (0..n_modes).map(|_| rng.gen_range(0.3..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let modes = weights
            .into_iter()
            .map(|w| TrigMode {
                amplitude: amplitude * w / total,
                kx: rng.gen_range(1..=3) as f64,
                ky: rng.gen_range(1..=3) as f64,
                phase_x: rng.gen_range(0.0..tau),
                phase_y: rng.gen_range(0.0..tau),
            })
            .collect();
        Surface::Trig { modes }
    }

    /// Build a catalog entry from its name and named parameters, e.g.
    /// `gaussian_bump` with `{"A": 1.0}`. Missing parameters take defaults;
    /// unknown ones are rejected.
    pub fn from_params(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let allowed: &[&str] = match name {
            "plane" => &["a", "b", "c"],
            "paraboloid" | "catenoid_piece" => &[],
            "sphere_cap" => &["R"],
            "gaussian_bump" => &["A", "width"],
            "tilted_bump" => &["A", "width", "a", "b"],
            "trig" => &["seed", "amplitude"],
            other => return Err(Error::UnknownSurface(other.to_string())),
        };
        if let Some(bad) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidParameter(format!("'{bad}' is not a parameter of {name}")));
        }
        let get = |k: &str, default: f64| params.get(k).copied().unwrap_or(default);
        let s = match name {
            "plane" => Surface::Plane { a: get("a", 0.0), b: get("b", 0.0), c: get("c", 0.0) },
            "paraboloid" => Surface::Paraboloid,
            "catenoid_piece" => Surface::CatenoidPiece,
            "sphere_cap" => Surface::SphereCap { radius: get("R", 1.0) },
            "gaussian_bump" => Surface::GaussianBump { amplitude: get("A", 1.0), width: get("width", 1.0) },
            "tilted_bump" => Surface::TiltedBump {
                amplitude: get("A", 1.0),
                width: get("width", 1.0),
                a: get("a", 0.2),
                b: get("b", -0.1),
            },
            "trig" => {
                let seed = get("seed", 0.0);
                if seed < 0.0 || seed.fract() != 0.0 {
                    return Err(Error::InvalidParameter("seed must be a nonnegative integer".into()));
                }
                Surface::random_trig(seed as u64, get("amplitude", 0.1))
            }
            _ => unreachable!(),
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        match *self {
            Surface::SphereCap { radius } if !(radius > 0.0) => bad("sphere radius must be positive"),
            Surface::GaussianBump { width, .. } | Surface::TiltedBump { width, .. } if !(width > 0.0) => {
                bad("bump width must be positive")
            }
            _ => Ok(()),
        }
    }

    pub fn in_domain(&self, x: f64, y: f64) -> bool {
        let r2 = x * x + y * y;
        match *self {
            Surface::SphereCap { radius } => r2.sqrt() < SPHERE_CAP_MARGIN * radius,
            Surface::CatenoidPiece => r2.sqrt() > CATENOID_MIN_RADIUS,
            _ => x.is_finite() && y.is_finite(),
        }
    }

    fn check_domain(&self, x: f64, y: f64) -> Result<()> {
        if self.in_domain(x, y) {
            Ok(())
        } else {
            Err(Error::DomainViolation { surface: self.name().into(), x, y })
        }
    }

    /// A box `([x_lo, x_hi], [y_lo, y_hi])` well inside the valid domain.
    pub fn reference_box(&self) -> ([f64; 2], [f64; 2]) {
        match *self {
            Surface::SphereCap { radius } => {
                let a = 0.6 * radius;
                ([-a, a], [-a, a])
            }
            Surface::CatenoidPiece => ([1.5, 3.5], [-1.0, 1.0]),
            Surface::Trig { .. } => ([0.0, 2.0 * std::f64::consts::PI], [0.0, 2.0 * std::f64::consts::PI]),
            _ => ([-2.0, 2.0], [-2.0, 2.0]),
        }
    }

    pub fn value(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.jet(x, y)?.u)
    }

    /// All derivatives up to order four at `(x, y)`.
    pub fn jet(&self, x: f64, y: f64) -> Result<Jet> {
        self.check_domain(x, y)?;
        let w = x * x + y * y;
        let j = match self {
            Surface::Plane { a, b, c } => Jet { u: a * x + b * y + c, d1: [*a, *b], ..Jet::default() },
            Surface::Paraboloid => Jet::radial(x, y, [0.5 * w, 0.5, 0.0, 0.0, 0.0]),
            Surface::SphereCap { radius } => {
                let d = radius * radius - w;
                let s = d.sqrt();
                Jet::radial(x, y, [s, -0.5 / s, -0.25 / (d * s), -0.375 / (d * d * s), -0.9375 / (d * d * d * s)])
            }
            Surface::CatenoidPiece => {
                // F(w) = arccosh √w; q = w(w − 1).
                let q = w * (w - 1.0);
                let sq = q.sqrt();
                Jet::radial(
                    x,
                    y,
                    [
                        w.sqrt().acosh(),
                        0.5 / sq,
                        (1.0 - 2.0 * w) / (4.0 * q * sq),
                        (q + 0.375) / (q * q * sq),
                        3.0 * (-16.0 * w * w * w + 24.0 * w * w - 18.0 * w + 5.0) / (16.0 * q * q * q * sq),
                    ],
                )
            }
            Surface::GaussianBump { amplitude, width } => gaussian_jet(x, y, *amplitude, *width),
            Surface::TiltedBump { amplitude, width, a, b } => {
                let tilt = Jet { u: a * x + b * y, d1: [*a, *b], ..Jet::default() };
                gaussian_jet(x, y, *amplitude, *width).add(&tilt)
            }
            Surface::Trig { modes } => modes.iter().fold(Jet::default(), |acc, m| {
                acc.add(&Jet::sine_product(x, y, m.amplitude, m.kx, m.phase_x, m.ky, m.phase_y))
            }),
        };
        Ok(j)
    }

    /// Sample `u` on every grid point; fails on the first point outside the
    /// valid domain.
    pub fn sample<T: Real>(&self, grid: &Grid<T>) -> Result<Field<T>> {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            let y = grid.y(j).as_f64();
            for i in 0..grid.nx {
                let x = grid.x(i).as_f64();
                values.push(T::lit(self.value(x, y)?));
            }
        }
        Field::new(*grid, values)
    }

    /// Largest mismatch between central differences (step `step`) of the
    /// jet entries and the next-order entries, over `samples` random points
    /// of the reference box. Should scale like `step²`.
    pub fn consistency_error(&self, seed: u64, samples: usize, step: f64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (bx, by) = self.reference_box();
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let x = rng.gen_range(bx[0]..bx[1]);
            let y = rng.gen_range(by[0]..by[1]);
            let c = self.jet(x, y)?;
            let px = (self.jet(x + step, y)?, self.jet(x - step, y)?);
            let py = (self.jet(x, y + step)?, self.jet(x, y - step)?);
            for order in 0..4 {
                for b in 0..=order {
                    let a = order - b;
                    let dx = (px.0.partial(a, b) - px.1.partial(a, b)) / (2.0 * step);
                    let dy = (py.0.partial(a, b) - py.1.partial(a, b)) / (2.0 * step);
                    let scale = 1.0 + c.partial(a + 1, b).abs();
                    worst = worst.max((dx - c.partial(a + 1, b)).abs() / scale);
                    worst = worst.max((dy - c.partial(a, b + 1)).abs() / scale);
                }
            }
        }
        Ok(worst)
    }
}

fn gaussian_jet(x: f64, y: f64, amplitude: f64, width: f64) -> Jet {
    let k = -1.0 / (width * width);
    let e = amplitude * ((x * x + y * y) * k).exp();
    Jet::radial(x, y, [e, k * e, k * k * e, k * k * k * e, k * k * k * k * e])
}
