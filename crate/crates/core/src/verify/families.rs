//! Seeded test-function families. Every member is a fixed closed-form
//! function of its seed, sampled on whatever grid is supplied, so the same
//! family can be compared across resolutions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::atoms::{default_moment_order, make_central_atom, synthesize, Decomposition, Term};
use crate::error::{Error, Result};
use crate::exponents::{alpha_at_radius, Exponent};
use crate::grid::{Grid, GridFunction};
use crate::scalar::{from_i64, lit, pow2, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Atom,
    Decomposition,
    Bump,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Atom => "atom",
            FamilyKind::Decomposition => "decomposition",
            FamilyKind::Bump => "bump",
        }
    }
}

/// Which families to build and how many members each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySelection {
    pub atoms: bool,
    pub decompositions: bool,
    pub bumps: bool,
    pub per_family: usize,
}

impl Default for FamilySelection {
    fn default() -> Self {
        Self {
            atoms: true,
            decompositions: true,
            bumps: true,
            per_family: 12,
        }
    }
}

impl FamilySelection {
    pub fn size(&self) -> usize {
        [self.atoms, self.decompositions, self.bumps].iter().filter(|&&b| b).count() * self.per_family
    }
}

#[derive(Debug, Clone)]
pub struct Member<T> {
    pub name: String,
    pub kind: FamilyKind,
    pub function: GridFunction<T>,
}

/// Atom radius exponents admissible on `grid`.
pub fn atom_levels<T: Real>(grid: &Grid<T>) -> Vec<i32> {
    (grid.l_min() + 1..=grid.l_max() - 1).collect()
}

/// Moment order used for a `(alpha, p)`-atom at level `r`.
pub fn moment_order_for<T: Real>(grid: &Grid<T>, alpha: &Exponent<T>, delta2: T, r: i32) -> u32 {
    default_moment_order(alpha_at_radius(alpha, from_i64(r as i64)), grid.dim(), delta2)
}

/// Parameters of a seeded smooth bump
/// `A cos^2(pi |x - c| / (2R)) (1 + w sin(k . x + phi))` on `|x - c| < R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpParams {
    pub center: [f64; 2],
    pub radius: f64,
    pub amplitude: f64,
    pub wiggle: f64,
    pub wave: [f64; 2],
    pub phase: f64,
}

impl BumpParams {
    /// Draws a bump of radius `radius` centred within `radius / 2` of the origin.
    pub fn seeded(seed: u64, radius: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let off = 0.5 * radius;
        Self {
            center: [rng.gen_range(-off..off), rng.gen_range(-off..off)],
            radius,
            amplitude: rng.gen_range(0.5..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 },
            wiggle: rng.gen_range(0.0..0.9),
            wave: [rng.gen_range(-3.0..3.0) / radius, rng.gen_range(-3.0..3.0) / radius],
            phase: rng.gen_range(0.0..std::f64::consts::TAU),
        }
    }

    pub fn sample<T: Real>(&self, grid: &Grid<T>) -> Result<GridFunction<T>> {
        let dim = grid.dim();
        GridFunction::from_fn(*grid, |[x, y]| {
            let (x, y) = (x.to_f64().unwrap_or(0.0), y.to_f64().unwrap_or(0.0));
            let cy = if dim == 1 { 0.0 } else { self.center[1] };
            let ky = if dim == 1 { 0.0 } else { self.wave[1] };
            let rho = (x - self.center[0]).hypot(y - cy) / self.radius;
            if rho >= 1.0 {
                return T::zero();
            }
            let bump = (std::f64::consts::FRAC_PI_2 * rho).cos().powi(2);
            let mod_ = 1.0 + self.wiggle * (self.wave[0] * x + ky * y + self.phase).sin();
            lit(self.amplitude * bump * mod_)
        })
    }
}

/// Seeded bump whose support stays inside `B_{l_max}`; scales cycle through
/// `2^m` for `m` in `l_min + 1 ..= l_max - 1`.
pub fn seeded_bump<T: Real>(grid: &Grid<T>, index: usize, seed: u64) -> Result<GridFunction<T>> {
    let levels = atom_levels(grid);
    let m = levels[index % levels.len()];
    let radius = pow2::<f64>(m);
    BumpParams::seeded(seed, radius).sample(grid)
}

/// Builds the selected families for `(alpha, p)`-atoms. `delta2` fixes the
/// default moment order of every atom.
pub fn build_family<T: Real>(
    grid: &Grid<T>,
    p: &Exponent<T>,
    alpha: &Exponent<T>,
    delta2: T,
    selection: &FamilySelection,
    seed: u64,
) -> Result<Vec<Member<T>>> {
    let levels = atom_levels(grid);
    if levels.is_empty() {
        return Err(Error::InsufficientData("no admissible atom levels on the grid".into()));
    }
    let atom_at = |j: i32, s: u64| make_central_atom(grid, j, p, alpha, moment_order_for(grid, alpha, delta2, j), s);
    let mut out = Vec::new();
    if selection.atoms {
        for i in 0..selection.per_family {
            let j = levels[i % levels.len()];
            let s = seed.wrapping_add(1000 + i as u64);
            out.push(Member {
                name: format!("atom[j={j},seed={s}]"),
                kind: FamilyKind::Atom,
                function: atom_at(j, s)?.function,
            });
        }
    }
    if selection.decompositions {
        for i in 0..selection.per_family {
            let s = seed.wrapping_add(2000 + 100 * i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let geometric = i % 2 == 0;
            let rho: f64 = [0.5, 0.75, 1.5, 2.0][(i / 2) % 4];
            let mut terms = Vec::with_capacity(levels.len());
            for (t, &j) in levels.iter().enumerate() {
                let c: f64 = if geometric {
                    rho.powi(t as i32)
                } else {
                    rng.gen_range(-1.0..1.0)
                };
                terms.push(Term {
                    j,
                    coefficient: lit(c),
                    atom: atom_at(j, s.wrapping_add(1 + t as u64))?,
                });
            }
            let d = Decomposition::new(*grid, terms, T::one(), T::zero())?;
            let label = if geometric { format!("geometric,rho={rho}") } else { "random".into() };
            out.push(Member {
                name: format!("decomposition[{label},seed={s}]"),
                kind: FamilyKind::Decomposition,
                function: synthesize(&d)?,
            });
        }
    }
    if selection.bumps {
        for i in 0..selection.per_family {
            let s = seed.wrapping_add(3000 + i as u64);
            out.push(Member {
                name: format!("bump[{i},seed={s}]"),
                kind: FamilyKind::Bump,
                function: seeded_bump(grid, i, s)?,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::ExponentMode;

    #[test]
    fn bumps_are_resolution_independent_and_supported() {
        let g = Grid::<f64>::new(1, -3, 2, 256).unwrap();
        let fine = g.refined(2).unwrap();
        for i in 0..6 {
            let a = seeded_bump(&g, i, 77 + i as u64).unwrap();
            let b = seeded_bump(&fine, i, 77 + i as u64).unwrap();
            assert!(!a.is_zero());
            // same closed form: integrals agree to quadrature accuracy
            let (ia, ib) = (a.abs().integrate(), b.abs().integrate());
            assert!((ia - ib).abs() <= 1e-3 * ia.max(ib));
            for k in 0..g.cell_count() {
                if g.radius(k) > 4.0 {
                    assert_eq!(a.values()[k], 0.0);
                }
            }
        }
    }

    #[test]
    fn family_sizes_follow_the_selection() {
        let g = Grid::<f64>::new(1, -3, 2, 256).unwrap();
        let p = Exponent::constant(2.0, &g, ExponentMode::Lebesgue).unwrap();
        let a = Exponent::constant(1.0, &g, ExponentMode::Herz).unwrap();
        let sel = FamilySelection { per_family: 4, ..Default::default() };
        let fam = build_family(&g, &p, &a, 0.5, &sel, 9).unwrap();
        assert_eq!(fam.len(), sel.size());
        assert!(fam.iter().all(|m| !m.function.is_zero()));
        let only = FamilySelection { atoms: false, bumps: false, ..sel };
        let fam = build_family(&g, &p, &a, 0.5, &only, 9).unwrap();
        assert!(fam.iter().all(|m| m.kind == FamilyKind::Decomposition));
    }
}
