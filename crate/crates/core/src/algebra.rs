//! Matrix representations of the Heisenberg-Weyl boson, the spin-j irrep of
//! SU(2) and the (truncated) Bergmann-k irrep of SU(1,1).
//!
//! The matrices here exist chiefly for verification: model assembly uses the
//! ladder coefficient functions directly.

use ndarray::Array2;

use crate::error::{invalid, Result};

/// A spin quantum number j stored as the integer 2j.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Spin {
    twice: u32,
}

impl Spin {
    pub fn from_twice(twice: u32) -> Result<Self> {
        if twice == 0 {
            return Err(invalid("j", "spin must be at least 1/2"));
        }
        Ok(Self { twice })
    }

    /// Accepts any positive integer or half-integer value.
    pub fn new(j: f64) -> Result<Self> {
        let twice = 2.0 * j;
        if !twice.is_finite() || twice < 0.5 || (twice - twice.round()).abs() > 1e-9 {
            return Err(invalid("j", format!("{j} is not a positive half-integer")));
        }
        Self::from_twice(twice.round() as u32)
    }

    pub fn twice(self) -> u32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        f64::from(self.twice) / 2.0
    }

    /// Dimension 2j+1 of the irrep.
    pub fn dim(self) -> usize {
        self.twice as usize + 1
    }

    /// The projection m for basis index `index` in 0..=2j (m ascending).
    pub fn m(self, index: usize) -> f64 {
        index as f64 - self.value()
    }
}

/// ⟨m+1|J₊|m⟩.
pub fn su2_raising(j: f64, m: f64) -> f64 {
    let radicand = j * (j + 1.0) - m * (m + 1.0);
    radicand.max(0.0).sqrt()
}

/// ⟨n+1|K₊|n⟩ in the Bergmann-k irrep.
pub fn su11_raising(k: f64, n: usize) -> f64 {
    let n = n as f64;
    ((n + 1.0) * (n + 2.0 * k)).sqrt()
}

/// ⟨N+1|b†|N⟩.
pub fn boson_raising(n: usize) -> f64 {
    ((n + 1) as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IrrepLabel {
    Boson { n_max: usize },
    Su2 { spin: Spin },
    Su11 { k: f64, n_max: usize },
}

impl IrrepLabel {
    pub fn dim(&self) -> usize {
        match *self {
            IrrepLabel::Boson { n_max } | IrrepLabel::Su11 { n_max, .. } => n_max + 1,
            IrrepLabel::Su2 { spin } => spin.dim(),
        }
    }

    /// True for truncations of infinite towers, whose last row breaks the
    /// commutation relations.
    pub fn is_truncated(&self) -> bool {
        !matches!(self, IrrepLabel::Su2 { .. })
    }
}

/// Raising, lowering and weight (Cartan / number) operators of one irrep.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    pub raising: Array2<f64>,
    pub lowering: Array2<f64>,
    pub weight: Array2<f64>,
    pub label: IrrepLabel,
}

impl GeneratorSet {
    fn from_coefficients(label: IrrepLabel, raise: impl Fn(usize) -> f64, weight: impl Fn(usize) -> f64) -> Self {
        let dim = label.dim();
        let mut raising = Array2::zeros((dim, dim));
        let mut w = Array2::zeros((dim, dim));
        for i in 0..dim {
            w[[i, i]] = weight(i);
            if i + 1 < dim {
                raising[[i + 1, i]] = raise(i);
            }
        }
        let lowering = raising.t().to_owned();
        Self {
            raising,
            lowering,
            weight: w,
            label,
        }
    }

    pub fn dim(&self) -> usize {
        self.label.dim()
    }

    /// Second-order Casimir: J_x²+J_y²+J_z² for SU(2), K_x²+K_y²−K_z² for
    /// SU(1,1) and the number operator for the boson.
    pub fn casimir(&self) -> Array2<f64> {
        let sym = (self.raising.dot(&self.lowering) + self.lowering.dot(&self.raising)) * 0.5;
        let w2 = self.weight.dot(&self.weight);
        match self.label {
            IrrepLabel::Su2 { .. } => sym + w2,
            IrrepLabel::Su11 { .. } => sym - w2,
            IrrepLabel::Boson { .. } => self.weight.clone(),
        }
    }
}

pub fn su2_generators(j: f64) -> Result<GeneratorSet> {
    let spin = Spin::new(j)?;
    let j = spin.value();
    Ok(GeneratorSet::from_coefficients(
        IrrepLabel::Su2 { spin },
        |i| su2_raising(j, spin.m(i)),
        |i| spin.m(i),
    ))
}

pub fn su11_generators(k: f64, n_max: usize) -> Result<GeneratorSet> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(invalid("k", format!("Bergmann index must be positive, got {k}")));
    }
    if n_max < 1 {
        return Err(invalid("n_max", "truncation must be at least 1"));
    }
    Ok(GeneratorSet::from_coefficients(
        IrrepLabel::Su11 { k, n_max },
        |n| su11_raising(k, n),
        |n| k + n as f64,
    ))
}

/// b† as `raising`, b as `lowering`, and the number operator as `weight`.
pub fn boson_operators(n_max: usize) -> Result<GeneratorSet> {
    if n_max < 1 {
        return Err(invalid("n_max", "truncation must be at least 1"));
    }
    Ok(GeneratorSet::from_coefficients(
        IrrepLabel::Boson { n_max },
        boson_raising,
        |n| n as f64,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn commutator(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
        a.dot(b) - b.dot(a)
    }

    /// Largest entry of `a - b` restricted to rows/columns below `limit`.
    fn max_diff(a: &Array2<f64>, b: &Array2<f64>, limit: usize) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..limit {
            for j in 0..limit {
                worst = worst.max((a[[i, j]] - b[[i, j]]).abs());
            }
        }
        worst
    }

    fn raising_entries(g: &GeneratorSet) -> Vec<f64> {
        (0..g.dim() - 1).map(|i| g.raising[[i + 1, i]]).collect()
    }

    #[test]
    fn spin_half() {
        let g = su2_generators(0.5).unwrap();
        assert_eq!(g.weight[[0, 0]], -0.5);
        assert_eq!(g.weight[[1, 1]], 0.5);
        assert_eq!(raising_entries(&g), vec![1.0]);
    }

    #[test]
    fn spin_one_and_three_halves() {
        let g = su2_generators(1.0).unwrap();
        let s2 = 2f64.sqrt();
        for (x, y) in raising_entries(&g).iter().zip([s2, s2]) {
            assert!((x - y).abs() < 1e-15);
        }
        let c = g.casimir();
        assert!(max_diff(&c, &(Array2::eye(3) * 2.0), 3) < 1e-12);

        let g = su2_generators(1.5).unwrap();
        let s3 = 3f64.sqrt();
        for (x, y) in raising_entries(&g).iter().zip([s3, 2.0, s3]) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn bergmann_ladders_match_boson_pair_realization() {
        // K+ = (a†)²/2 on even and odd a-boson towers.
        let a = boson_operators(8).unwrap();
        let pair = a.raising.dot(&a.raising) * 0.5;
        let even = su11_generators(0.25, 3).unwrap();
        let odd = su11_generators(0.75, 3).unwrap();
        for n in 0..3 {
            assert!((even.raising[[n + 1, n]] - pair[[2 * n + 2, 2 * n]]).abs() < 1e-14);
            assert!((odd.raising[[n + 1, n]] - pair[[2 * n + 3, 2 * n + 1]]).abs() < 1e-14);
        }
        assert!((even.raising[[1, 0]] - 0.707_106_781_186_547_6).abs() < 1e-12);
        assert!((odd.raising[[1, 0]] - 1.224_744_871_391_589).abs() < 1e-12);
    }

    #[test]
    fn su2_commutators_hold_exactly() {
        for j in [0.5, 1.0, 2.5, 7.0] {
            let g = su2_generators(j).unwrap();
            let d = g.dim();
            assert!(max_diff(&commutator(&g.weight, &g.raising), &g.raising, d) < 1e-12);
            assert!(max_diff(&commutator(&g.raising, &g.lowering), &(&g.weight * 2.0), d) < 1e-12);
            let cas = Array2::eye(d) * (j * (j + 1.0));
            assert!(max_diff(&g.casimir(), &cas, d) < 1e-12);
        }
    }

    #[test]
    fn su11_commutators_hold_on_interior() {
        for k in [0.25, 0.75, 1.3] {
            let g = su11_generators(k, 12).unwrap();
            let interior = g.dim() - 1;
            assert!(max_diff(&commutator(&g.weight, &g.raising), &g.raising, interior) < 1e-12);
            assert!(max_diff(&commutator(&g.raising, &g.lowering), &(&g.weight * -2.0), interior) < 1e-12);
            let cas = Array2::eye(g.dim()) * (-k * (k - 1.0));
            assert!(max_diff(&g.casimir(), &cas, interior) < 1e-12);
        }
        let quarter = su11_generators(0.25, 4).unwrap().casimir();
        assert!((quarter[[0, 0]] - 3.0 / 16.0).abs() < 1e-14);
    }

    #[test]
    fn boson_ladder() {
        assert_eq!(raising_entries(&boson_operators(1).unwrap()), vec![1.0]);
        let b = boson_operators(3).unwrap();
        let expect = [1.0, 2f64.sqrt(), 3f64.sqrt()];
        for (x, y) in raising_entries(&b).iter().zip(expect) {
            assert!((x - y).abs() < 1e-15);
        }
        // [b, b†] = 1 away from the cutoff.
        let c = commutator(&b.lowering, &b.raising);
        assert!(max_diff(&c, &Array2::eye(4), 3) < 1e-12);
    }

    #[test]
    fn lowering_is_transpose_of_raising() {
        for g in [
            su2_generators(3.5).unwrap(),
            su11_generators(0.75, 9).unwrap(),
            boson_operators(6).unwrap(),
        ] {
            assert_eq!(g.lowering, g.raising.t());
        }
    }

    #[test]
    fn rejects_bad_labels() {
        assert!(su2_generators(0.0).is_err());
        assert!(su2_generators(0.3).is_err());
        assert!(su2_generators(-1.0).is_err());
        assert!(su11_generators(0.0, 4).is_err());
        assert!(su11_generators(-0.25, 4).is_err());
        assert!(su11_generators(0.25, 0).is_err());
        assert!(boson_operators(0).is_err());
    }
}
