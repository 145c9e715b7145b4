//! Classical (M → ∞) limit: potentials, stationary points, critical
//! couplings and energies, and the phase-space volume that gives the smooth
//! part of the level density.
//!
//! The SU(1,1) and Jaynes-Cummings models reduce to one degree of freedom on
//! the unit disk u² + v² ≤ 1,
//!
//!   ℋ(u, v) = V₀ + (Δω/2)ρ² + (λ/√2) u ρ √(1 − ρ²),   ρ² = u² + v²,
//!
//! whose v = 0 section is the angular potential with ρ = |sin θ|. The Dicke
//! model keeps two degrees of freedom, (x, p) for the spin on the disk
//! x² + p² ≤ 2R and (y, q) for the field:
//!
//!   ℋ = V₀ + (ω₀/2)(x² + p²) + (ω/2)(y² + q²) + √2 λ x y √(2R − x² − p²).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::models::{ModelKind, ModelParams};

use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalModel {
    pub kind: ModelKind,
    pub omega: f64,
    pub omega0: f64,
    /// R = 0 for SU(1,1) (its M → ∞ limit), 1/2 for the SU(2) models.
    pub r: f64,
    pub lambda: f64,
}

impl ClassicalModel {
    pub fn new(kind: ModelKind, omega: f64, omega0: f64, lambda: f64) -> Self {
        let r = match kind {
            ModelKind::Su11 => 0.0,
            _ => 0.5,
        };
        Self {
            kind,
            omega,
            omega0,
            r,
            lambda,
        }
    }

    pub fn from_params(params: &ModelParams) -> Self {
        Self::new(params.kind, params.omega, params.omega0, params.lambda)
    }

    /// Model with the usual frequencies: SU(1,1) ω=1, ω₀=2; JC ω=2, ω₀=1;
    /// Dicke ω=ω₀=1.
    pub fn standard(kind: ModelKind, lambda: f64) -> Self {
        match kind {
            ModelKind::Su11 => Self::new(kind, 1.0, 2.0, lambda),
            ModelKind::JaynesCummings => Self::new(kind, 2.0, 1.0, lambda),
            ModelKind::Dicke => Self::new(kind, 1.0, 1.0, lambda),
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.r = r;
        self
    }

    /// Number of classical degrees of freedom.
    pub fn degrees_of_freedom(&self) -> u32 {
        match self.kind {
            ModelKind::Dicke => 2,
            _ => 1,
        }
    }

    /// Δω = ω₀ − ω (SU(1,1)) or ω − ω₀ (Jaynes-Cummings). Zero for Dicke.
    pub fn delta_omega(&self) -> f64 {
        match self.kind {
            ModelKind::Su11 => self.omega0 - self.omega,
            ModelKind::JaynesCummings => self.omega - self.omega0,
            ModelKind::Dicke => 0.0,
        }
    }

    /// Rescaled coupling g; the transition sits at g = 1/2.
    pub fn g(&self) -> f64 {
        match self.kind {
            ModelKind::Dicke => self.lambda / (2.0 * self.omega * self.omega0).sqrt(),
            _ => self.lambda / (2f64.sqrt() * self.delta_omega()),
        }
    }

    /// Potential at the origin, the saddle above λ_c0.
    pub fn v0(&self) -> f64 {
        match self.kind {
            ModelKind::Su11 => (self.omega + self.r * self.omega0) / 2.0,
            ModelKind::JaynesCummings => (1.0 - self.r) * self.omega0 / 2.0,
            ModelKind::Dicke => -self.r * self.omega0 / 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega0 > 0.0) {
            return Err(invalid("model.omega", "frequencies must be positive"));
        }
        if !(0.0..=0.5).contains(&self.r) {
            return Err(invalid("classical.r", format!("R must lie in [0, 1/2], got {}", self.r)));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(invalid("model.lambda", format!("must be non-negative, got {}", self.lambda)));
        }
        if self.kind != ModelKind::Dicke && !(self.delta_omega() > 0.0) {
            return Err(invalid(
                "model.omega",
                format!("detuning must be positive for the {} model", self.kind.name()),
            ));
        }
        Ok(())
    }

    /// The reduced one-dimensional form is only exact for R = 0 (SU(1,1))
    /// and R = 1/2 (Jaynes-Cummings).
    fn require_reduced(&self) -> Result<()> {
        self.validate()?;
        let expected = match self.kind {
            ModelKind::Su11 => 0.0,
            ModelKind::JaynesCummings => 0.5,
            ModelKind::Dicke => {
                return Err(Error::Unsupported("the Dicke model has two degrees of freedom".into()))
            }
        };
        if self.r != expected {
            return Err(Error::Unsupported(format!(
                "phase-space volume needs R = {expected} for the {} model",
                self.kind.name()
            )));
        }
        Ok(())
    }

    /// ℋ(u, v) of the reduced SU(1,1)/JC dynamics.
    pub fn reduced_hamiltonian(&self, u: f64, v: f64) -> f64 {
        let p = u * u + v * v;
        self.v0() + 0.5 * self.delta_omega() * p + self.lambda / 2f64.sqrt() * u * (p * (1.0 - p)).max(0.0).sqrt()
    }

    /// Full Dicke ℋ(x, p, y, q); `None` outside the spin disk.
    pub fn dicke_hamiltonian(&self, x: f64, p: f64, y: f64, q: f64) -> Option<f64> {
        let radicand = 2.0 * self.r - x * x - p * p;
        if radicand < 0.0 {
            return None;
        }
        Some(
            self.v0()
                + 0.5 * self.omega0 * (x * x + p * p)
                + 0.5 * self.omega * (y * y + q * q)
                + 2f64.sqrt() * self.lambda * x * y * radicand.sqrt(),
        )
    }
}

/// Evaluation point: an angle θ for the one-dimensional models, (x, y) for
/// Dicke.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Point {
    Angle(f64),
    Plane { x: f64, y: f64 },
}

pub fn potential(model: &ClassicalModel, point: Point) -> Result<f64> {
    let l = model.lambda;
    match (model.kind, point) {
        (ModelKind::Su11, Point::Angle(t)) => {
            let s2 = t.sin().powi(2);
            Ok(model.v0() + 0.5 * model.delta_omega() * s2 + l / 8f64.sqrt() * (2.0 * t).sin() * (2.0 * model.r + s2).sqrt())
        }
        (ModelKind::JaynesCummings, Point::Angle(t)) => {
            let radicand = 2.0 * model.r - t.cos().powi(2);
            if radicand < -1e-15 {
                return Err(Error::Domain(format!("2R − cos²θ = {radicand} < 0 at θ = {t}")));
            }
            let s2 = t.sin().powi(2);
            Ok(model.v0() + 0.5 * model.delta_omega() * s2 + l / 8f64.sqrt() * (2.0 * t).sin() * radicand.max(0.0).sqrt())
        }
        (ModelKind::Dicke, Point::Plane { x, y }) => model
            .dicke_hamiltonian(x, 0.0, y, 0.0)
            .ok_or_else(|| Error::Domain(format!("x² = {} exceeds 2R = {}", x * x, 2.0 * model.r))),
        (kind, point) => Err(invalid(
            "point",
            format!("{point:?} is not a coordinate of the {} model", kind.name()),
        )),
    }
}

/// λ_c0 = Δω/√2 (SU(1,1), JC) or √(ωω₀/2) (Dicke).
pub fn critical_coupling(model: &ClassicalModel) -> f64 {
    match model.kind {
        ModelKind::Dicke => (model.omega * model.omega0 / 2.0).sqrt(),
        _ => model.delta_omega() / 2f64.sqrt(),
    }
}

/// Scaled ESQPT energy: the potential at the stationary point at the
/// origin, which does not depend on λ.
pub fn critical_energy(model: &ClassicalModel) -> f64 {
    let origin = match model.kind {
        ModelKind::Dicke => Point::Plane { x: 0.0, y: 0.0 },
        _ => Point::Angle(0.0),
    };
    potential(model, origin).unwrap_or_else(|_| model.v0())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalData {
    pub lambda_c0: f64,
    pub energy_c: f64,
}

pub fn critical_data(model: &ClassicalModel) -> CriticalData {
    CriticalData {
        lambda_c0: critical_coupling(model),
        energy_c: critical_energy(model),
    }
}

/// Ground-state order parameter as a function of g: sin²θ₀ for the
/// one-dimensional models, r₀² = x₀² + y₀² for Dicke.
pub fn order_parameter(model: &ClassicalModel, g: f64) -> Result<f64> {
    if !(g >= 0.0) {
        return Err(invalid("g", format!("must be non-negative, got {g}")));
    }
    if g <= 0.5 {
        return Ok(0.0);
    }
    match model.kind {
        ModelKind::Dicke => {
            let lambda = g * (2.0 * model.omega * model.omega0).sqrt();
            match minimize_potential(&model.with_lambda(lambda))?.point {
                Point::Plane { x, y } => Ok(x * x + y * y),
                Point::Angle(_) => unreachable!("Dicke minimum is a plane point"),
            }
        }
        _ => {
            let g2 = g * g;
            Ok((12.0 * g2 - 1.0 - (12.0 * g2 + 1.0).sqrt()) / (18.0 * g2))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Minimum {
    pub point: Point,
    pub energy: f64,
}

const SCAN_POINTS: usize = 4001;

/// Global minimum by a grid scan followed by golden-section refinement.
///
/// The Dicke potential is quadratic in y, so y is minimized analytically
/// and the scan runs over x; the representative with x ≥ 0, y ≤ 0 is
/// returned.
pub fn minimize_potential(model: &ClassicalModel) -> Result<Minimum> {
    model.validate()?;
    match model.kind {
        ModelKind::Dicke => {
            let xmax = (2.0 * model.r).sqrt();
            let y_of = |x: f64| -2f64.sqrt() * model.lambda * x * (2.0 * model.r - x * x).max(0.0).sqrt() / model.omega;
            let f = |x: f64| {
                potential(model, Point::Plane { x, y: y_of(x) }).unwrap_or(f64::INFINITY)
            };
            let x = scan_and_refine(f, 0.0, xmax);
            let y = y_of(x);
            Ok(Minimum {
                point: Point::Plane { x, y },
                energy: potential(model, Point::Plane { x, y })?,
            })
        }
        _ => {
            let f = |t: f64| potential(model, Point::Angle(t)).unwrap_or(f64::INFINITY);
            let t = scan_and_refine(f, -FRAC_PI_2, FRAC_PI_2);
            Ok(Minimum {
                point: Point::Angle(t),
                energy: f(t),
            })
        }
    }
}

fn scan_and_refine(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let (best, _) = (0..SCAN_POINTS)
        .map(|i| (i, f(lo + step * i as f64)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("scan grid is non-empty");
    let a = (lo + step * (best as f64 - 1.0)).max(lo);
    let b = (lo + step * (best as f64 + 1.0)).min(hi);
    let x = golden_section(&f, a, b, 1e-13);
    let grid_x = lo + step * best as f64;
    if f(grid_x) < f(x) {
        grid_x
    } else {
        x
    }
}

pub(crate) fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol * (1.0 + a.abs().max(b.abs())) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Hessian of the Dicke potential at (x, y) by central differences.
pub fn dicke_hessian(model: &ClassicalModel, x: f64, y: f64) -> Result<[[f64; 2]; 2]> {
    if model.kind != ModelKind::Dicke {
        return Err(Error::Unsupported("Hessian is computed for the Dicke potential".into()));
    }
    let h = 1e-4;
    let v = |dx: f64, dy: f64| potential(model, Point::Plane { x: x + dx, y: y + dy });
    let c = v(0.0, 0.0)?;
    let vxx = (v(h, 0.0)? - 2.0 * c + v(-h, 0.0)?) / (h * h);
    let vyy = (v(0.0, h)? - 2.0 * c + v(0.0, -h)?) / (h * h);
    let vxy = (v(h, h)? - v(h, -h)? - v(-h, h)? + v(-h, -h)?) / (4.0 * h * h);
    Ok([[vxx, vxy], [vxy, vyy]])
}

/// Phase-space volume Ω(ℰ) = ∫δ(ℰ − ℋ) with its statistical error (zero
/// for the deterministic one-dimensional quadrature).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseSpaceVolume {
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloOptions {
    pub samples: u64,
    pub shell_width: f64,
    pub seed: u64,
    pub streams: u64,
}

impl Default for MonteCarloOptions {
    fn default() -> Self {
        Self {
            samples: 2_000_000,
            shell_width: 1e-3,
            seed: 0,
            streams: 16,
        }
    }
}

pub fn phase_space_volume(model: &ClassicalModel, energy: f64, mc: &MonteCarloOptions) -> Result<PhaseSpaceVolume> {
    match model.kind {
        ModelKind::Dicke => dicke_volume(model, energy, mc),
        _ => Ok(PhaseSpaceVolume {
            value: reduced_volume(model, energy)?,
            stderr: 0.0,
        }),
    }
}

/// Smooth level density (M/2π)^f Ω(ℰ) per unit scaled energy. For Dicke
/// this counts both parity blocks.
pub fn semiclassical_density(model: &ClassicalModel, energy: f64, size: f64, mc: &MonteCarloOptions) -> Result<PhaseSpaceVolume> {
    let omega = phase_space_volume(model, energy, mc)?;
    let factor = (size / (2.0 * PI)).powi(model.degrees_of_freedom() as i32);
    Ok(PhaseSpaceVolume {
        value: factor * omega.value,
        stderr: factor * omega.stderr,
    })
}

/// Ω(ℰ) = dA/dℰ for the reduced Hamiltonian.
///
/// In polar coordinates with s = √(1 − ρ²) the energy along a ray of angle
/// φ is V₀ + h(s), h(s) = (1 − s²)(a + c s), a = Δω/2, c = (λ/√2)cos φ, and
/// dA = s ds dφ, so Ω = ∫dφ Σ s*/|h′(s*)| over the roots of h(s*) = ℰ − V₀.
/// The φ integral is split where roots merge (inverse square-root
/// singularities) and handled by tanh-sinh quadrature.
fn reduced_volume(model: &ClassicalModel, energy: f64) -> Result<f64> {
    model.require_reduced()?;
    let ground = minimize_potential(model)?.energy;
    if energy < ground - 1e-12 {
        return Err(Error::Domain(format!(
            "energy {energy} lies below the classical minimum {ground}"
        )));
    }
    let a = 0.5 * model.delta_omega();
    let kappa = model.lambda / 2f64.sqrt();
    let e = energy - model.v0();

    let integrand = |phi: f64| -> f64 {
        let c = kappa * phi.cos();
        ray_roots(a, c, e)
            .into_iter()
            .map(|s| s / (c - 2.0 * a * s - 3.0 * c * s * s).abs())
            .sum()
    };

    let mut breaks = vec![0.0, PI];
    if kappa > 0.0 {
        // Folds: h(s) = e and h'(s) = 0, i.e. aS² + (3e − 2a)S + (a − e) = 0
        // for S = s², with c = 2as/(1 − 3S).
        let (qa, qb, qc) = (a, 3.0 * e - 2.0 * a, a - e);
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            for sign in [-1.0, 1.0] {
                let big_s = (-qb + sign * disc.sqrt()) / (2.0 * qa);
                if big_s > 0.0 && big_s < 1.0 && (1.0 - 3.0 * big_s).abs() > 1e-14 {
                    let s = big_s.sqrt();
                    let c = 2.0 * a * s / (1.0 - 3.0 * big_s);
                    if c.abs() <= kappa {
                        breaks.push((c / kappa).acos());
                    }
                }
            }
        }
        // Direction in which the origin turns from a minimum to a saddle.
        if a <= kappa {
            breaks.push((-a / kappa).acos());
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|x, y| (*x - *y).abs() < 1e-15);

    let total: f64 = breaks
        .windows(2)
        .map(|w| tanh_sinh(&integrand, w[0], w[1], 1e-10))
        .sum();
    Ok(2.0 * total)
}

/// Roots in (0, 1) of (1 − s²)(a + c s) = e.
fn ray_roots(a: f64, c: f64, e: f64) -> Vec<f64> {
    let h = |s: f64| (1.0 - s * s) * (a + c * s) - e;
    let mut knots = vec![0.0, 1.0];
    // h'(s) = c − 2as − 3cs².
    if c != 0.0 {
        let disc = 4.0 * a * a + 12.0 * c * c;
        for sign in [-1.0, 1.0] {
            let s = (-2.0 * a + sign * disc.sqrt()) / (6.0 * c);
            if s > 0.0 && s < 1.0 {
                knots.push(s);
            }
        }
    }
    knots.sort_by(f64::total_cmp);
    let mut roots = Vec::new();
    for w in knots.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (h(lo), h(hi));
        if flo == 0.0 || fhi == 0.0 || flo.signum() == fhi.signum() {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if h(mid).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots
}

/// Tanh-sinh (double exponential) quadrature on [a, b]. The integrand is
/// never evaluated at the endpoints, so integrable endpoint singularities
/// are fine.
pub(crate) fn tanh_sinh(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let t_max = 3.5;
    // Node at t: x = mid ± half·tanh(u), u = (π/2) sinh t; distances to the
    // endpoints are formed from exp(−2u) to keep precision near them.
    let node_sum = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let w = FRAC_PI_2 * t.cosh() / u.cosh().powi(2);
        if t == 0.0 {
            return w * f(mid);
        }
        let gap = half * 2.0 / ((2.0 * u).exp() + 1.0);
        let mut sum = 0.0;
        for x in [b - gap, a + gap] {
            if x > a && x < b && w > 0.0 {
                sum += w * f(x);
            }
        }
        sum
    };

    let mut h = 0.5;
    let steps = (t_max / h) as i32;
    let mut sum: f64 = (0..=steps).map(|k| node_sum(k as f64 * h)).sum();
    let mut estimate = half * h * sum;
    for _ in 0..10 {
        h *= 0.5;
        let steps = (t_max / h) as i32;
        let fresh: f64 = (1..=steps).step_by(2).map(|k| node_sum(k as f64 * h)).sum();
        sum += fresh;
        let next = half * h * sum;
        if (next - estimate).abs() <= tol * next.abs() {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// Monte Carlo shell estimate of the four-dimensional Dicke Ω(ℰ).
///
/// Points are drawn uniformly in the spin disk x² + p² ≤ 2R times a field
/// disk large enough to contain every point with ℋ ≤ ℰ + δℰ/2.
fn dicke_volume(model: &ClassicalModel, energy: f64, mc: &MonteCarloOptions) -> Result<PhaseSpaceVolume> {
    model.validate()?;
    if mc.samples == 0 || mc.streams == 0 {
        return Err(invalid("classical.samples", "need at least one sample and one stream"));
    }
    if !(mc.shell_width > 0.0) {
        return Err(invalid("classical.shell_width", "shell width must be positive"));
    }
    let ground = minimize_potential(model)?.energy;
    let (lo, hi) = (energy - 0.5 * mc.shell_width, energy + 0.5 * mc.shell_width);
    if hi < ground {
        return Err(Error::Domain(format!(
            "energy {energy} lies below the classical minimum {ground}"
        )));
    }
    let r = model.r;
    let spin_radius = (2.0 * r).sqrt();
    let lam = model.lambda;
    // ℋ ≥ V₀' + (ω/2)ρ² − √2 λ R ρ with ρ the field radius.
    let field_radius = (2f64.sqrt() * lam * r
        + (2.0 * lam * lam * r * r + 2.0 * model.omega * (hi + r * model.omega0 / 2.0)).max(0.0).sqrt())
        / model.omega;
    let box_volume = PI * spin_radius * spin_radius * PI * field_radius * field_radius;

    let per_stream = mc.samples.div_ceil(mc.streams);
    let hits: Vec<u64> = (0..mc.streams)
        .into_par_iter()
        .map(|stream| {
            let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
            rng.set_stream(stream);
            let mut count = 0u64;
            for _ in 0..per_stream {
                let (x, p) = uniform_disk(&mut rng, spin_radius);
                let (y, q) = uniform_disk(&mut rng, field_radius);
                if let Some(h) = model.dicke_hamiltonian(x, p, y, q) {
                    if h >= lo && h < hi {
                        count += 1;
                    }
                }
            }
            count
        })
        .collect();
    let n = (per_stream * mc.streams) as f64;
    let frac = hits.iter().sum::<u64>() as f64 / n;
    Ok(PhaseSpaceVolume {
        value: box_volume * frac / mc.shell_width,
        stderr: box_volume * (frac * (1.0 - frac) / n).sqrt() / mc.shell_width,
    })
}

fn uniform_disk(rng: &mut impl Rng, radius: f64) -> (f64, f64) {
    let rho = radius * rng.random::<f64>().sqrt();
    let angle = 2.0 * PI * rng.random::<f64>();
    (rho * angle.cos(), rho * angle.sin())
}
