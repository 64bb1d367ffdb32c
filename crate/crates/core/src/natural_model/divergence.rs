use super::kde::ChannelKde;
use crate::error::{Error, Result};

/// Discretization used to compare two densities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    /// Number of uniformly spaced evaluation points.
    pub points: usize,
    /// Added to every density sample before renormalization.
    pub floor: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points: 512,
            floor: 1e-12,
        }
    }
}

impl GridSpec {
    pub const MIN_POINTS: usize = 16;

    pub fn validate(&self) -> Result<()> {
        if self.points < Self::MIN_POINTS {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least {} points, got {}",
                Self::MIN_POINTS,
                self.points
            )));
        }
        if !(self.floor > 0.0 && self.floor.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "grid floor must be positive, got {}",
                self.floor
            )));
        }
        Ok(())
    }

    /// Shared grid over the pooled observation range of `p` and `q`, padded
    /// by the larger bandwidth on each side.
    pub fn points_for(&self, p: &ChannelKde, q: &ChannelKde) -> Result<Vec<f64>> {
        self.validate()?;
        let pad = p.bandwidth().max(q.bandwidth());
        let lo = p.min().min(q.min()) - pad;
        let hi = p.max().max(q.max()) + pad;
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "degenerate divergence grid [{lo}, {hi}]"
            )));
        }
        let step = (hi - lo) / (self.points - 1) as f64;
        Ok((0..self.points).map(|i| lo + i as f64 * step).collect())
    }
}

/// `sum p~ ln(p~ / q~)` after adding `floor` to each mass and renormalizing.
pub fn discrete_kl(p: &[f64], q: &[f64], floor: f64) -> Result<f64> {
    if p.len() != q.len() || p.is_empty() {
        return Err(Error::Shape(format!(
            "discrete_kl over {} and {} points",
            p.len(),
            q.len()
        )));
    }
    if p.iter().chain(q).any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "masses must be finite and non-negative".into(),
        ));
    }
    let zp: f64 = p.iter().map(|v| v + floor).sum();
    let zq: f64 = q.iter().map(|v| v + floor).sum();
    Ok(p.iter()
        .zip(q)
        .map(|(a, b)| {
            let pa = (a + floor) / zp;
            let qb = (b + floor) / zq;
            pa * (pa / qb).ln()
        })
        .sum())
}

/// KL divergence `D(p || q)` between two density estimates on a shared grid.
pub fn kl_divergence(p: &ChannelKde, q: &ChannelKde, grid: &GridSpec) -> Result<f64> {
    let xs = grid.points_for(p, q)?;
    let pv: Vec<f64> = xs.iter().map(|&x| p.evaluate(x)).collect();
    let qv: Vec<f64> = xs.iter().map(|&x| q.evaluate(x)).collect();
    discrete_kl(&pv, &qv, grid.floor)
}
