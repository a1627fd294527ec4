//! Fully connected antiferromagnetic groups with a uniform field whose
//! minima have exactly `k` positive spins.
//!
//! With `J_ij = J` on all pairs and `h_i = J (N - 2k)`, the energy depends
//! only on the positive count `p`:
//! `E(p) = J [((2p - N)^2 - N) / 2 + (N - 2k)(2p - N)]`,
//! a parabola in `p` with its vertex at `p = k`.

use crate::error::{arg_err, Error, Result};
use crate::model::{IsingBuilder, IsingModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarityGroup {
    pub n_spins: usize,
    pub k_target: usize,
    pub j_scale: f64,
}

impl PolarityGroup {
    pub fn new(n_spins: usize, k_target: usize) -> Result<Self> {
        Self::with_scale(n_spins, k_target, 1.0)
    }

    pub fn with_scale(n_spins: usize, k_target: usize, j_scale: f64) -> Result<Self> {
        let g = Self {
            n_spins,
            k_target,
            j_scale,
        };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        if self.n_spins < 2 || self.k_target == 0 || self.k_target >= self.n_spins {
            return arg_err(format!(
                "k_target must be in 1..={} for {} spins, got {}",
                self.n_spins.saturating_sub(1),
                self.n_spins,
                self.k_target
            ));
        }
        if !(self.j_scale > 0.0) || !self.j_scale.is_finite() {
            return arg_err(format!("J scale must be positive, got {}", self.j_scale));
        }
        Ok(())
    }

    /// Uniform field `J (N - 2k)`.
    pub fn field(&self) -> f64 {
        self.j_scale * (self.n_spins as f64 - 2.0 * self.k_target as f64)
    }

    /// Closed-form group energy for `positive` spins set to +1.
    pub fn energy_at(&self, positive: usize) -> f64 {
        let n = self.n_spins as f64;
        let m = 2.0 * positive as f64 - n;
        self.j_scale * ((m * m - n) / 2.0 + (n - 2.0 * self.k_target as f64) * m)
    }
}

pub fn one_hot_ising(g: &PolarityGroup) -> Result<IsingModel> {
    g.validate()?;
    let mut b = IsingBuilder::new(g.n_spins);
    add_group(&mut b, &(0..g.n_spins).collect::<Vec<_>>(), g)?;
    Ok(b.build())
}

fn add_group(b: &mut IsingBuilder, group: &[usize], g: &PolarityGroup) -> Result<()> {
    let h = g.field();
    for (a, &i) in group.iter().enumerate() {
        b.add_field(i, h)?;
        for &j in &group[a + 1..] {
            b.add_coupling(i, j, g.j_scale)?;
        }
    }
    Ok(())
}

/// Adds the group's couplings and fields onto `group` inside `model`.
pub fn apply_polarity_bias(model: &IsingModel, group: &[usize], g: &PolarityGroup) -> Result<IsingModel> {
    g.validate()?;
    if group.len() != g.n_spins {
        return arg_err(format!(
            "group has {} spins, polarity group expects {}",
            group.len(),
            g.n_spins
        ));
    }
    let mut seen = vec![false; model.n_spins()];
    for &i in group {
        if i >= model.n_spins() {
            return Err(Error::IndexOutOfRange {
                index: i,
                n: model.n_spins(),
            });
        }
        if std::mem::replace(&mut seen[i], true) {
            return arg_err(format!("spin {i} appears twice in the group"));
        }
    }
    let mut b = IsingBuilder::new(model.n_spins());
    for (&i, &h) in model.fields() {
        b.add_field(i, h)?;
    }
    for (&(i, j), &c) in model.couplings() {
        b.add_coupling(i, j, c)?;
    }
    b.add_offset(model.offset());
    for (&i, l) in model.labels() {
        b.set_label(i, l.clone())?;
    }
    add_group(&mut b, group, g)?;
    Ok(b.build())
}
