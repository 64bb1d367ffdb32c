use std::fmt;

use crate::error::{Error, Result};

/// Paired samples; equal lengths of at least two finite values.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesPair {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl SeriesPair {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(Error::Shape(format!(
                "series of lengths {} and {}; need equal lengths of at least 2",
                x.len(),
                y.len()
            )));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("series values must be finite".into()));
        }
        Ok(SeriesPair { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Why a coefficient has no value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Undefined {
    /// One series is constant.
    ZeroVariance { x: bool, y: bool },
    /// Number of tied pairs within each series.
    Ties { x: usize, y: usize },
}

impl fmt::Display for Undefined {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Undefined::ZeroVariance { x, y } => {
                let which = match (x, y) {
                    (true, true) => "both series are",
                    (true, false) => "x is",
                    _ => "y is",
                };
                write!(f, "undefined: {which} constant")
            }
            Undefined::Ties { x, y } => write!(f, "undefined: {x} tied pairs in x, {y} in y"),
        }
    }
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|&a| a == v[0])
}

/// Population covariance over the product of population standard deviations.
pub fn pearson(pair: &SeriesPair) -> Result<f64, Undefined> {
    let (cx, cy) = (is_constant(&pair.x), is_constant(&pair.y));
    if cx || cy {
        return Err(Undefined::ZeroVariance { x: cx, y: cy });
    }
    let n = pair.len() as f64;
    let mx = pair.x.iter().sum::<f64>() / n;
    let my = pair.y.iter().sum::<f64>() / n;
    let (mut cov, mut vx, mut vy) = (0.0, 0.0, 0.0);
    for (a, b) in pair.x.iter().zip(&pair.y) {
        let (dx, dy) = (a - mx, b - my);
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    Ok((cov / n / ((vx / n).sqrt() * (vy / n).sqrt())).clamp(-1.0, 1.0))
}

fn tied_pairs(v: &[f64]) -> usize {
    let mut sorted = v.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut ties = 0;
    let mut run = 1;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            ties += run * (run - 1) / 2;
            run = 1;
        }
    }
    ties + run * (run - 1) / 2
}

fn check_ties(pair: &SeriesPair) -> Result<(), Undefined> {
    let (x, y) = (tied_pairs(&pair.x), tied_pairs(&pair.y));
    if x + y > 0 {
        return Err(Undefined::Ties { x, y });
    }
    Ok(())
}

/// `(concordant - discordant) / (n (n - 1) / 2)` over all pairs; ties are
/// undefined.
pub fn kendall(pair: &SeriesPair) -> Result<f64, Undefined> {
    check_ties(pair)?;
    let n = pair.len();
    let mut score: i64 = 0;
    for i in 0..n {
        for j in i + 1..n {
            let s = (pair.x[i] - pair.x[j]) * (pair.y[i] - pair.y[j]);
            score += if s > 0.0 { 1 } else { -1 };
        }
    }
    Ok(score as f64 / (n * (n - 1) / 2) as f64)
}

/// 1-based ranks of tie-free data.
pub fn ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    for (rank, &i) in order.iter().enumerate() {
        r[i] = (rank + 1) as f64;
    }
    r
}

/// `1 - 6 sum d_i^2 / (n (n^2 - 1))` with `d_i` the rank differences; ties
/// are undefined.
pub fn spearman(pair: &SeriesPair) -> Result<f64, Undefined> {
    check_ties(pair)?;
    let n = pair.len() as f64;
    let d2: f64 = ranks(&pair.x)
        .iter()
        .zip(ranks(&pair.y))
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(1.0 - 6.0 * d2 / (n * (n * n - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(x: &[f64], y: &[f64]) -> SeriesPair {
        SeriesPair::new(x.to_vec(), y.to_vec()).unwrap()
    }

    #[test]
    fn hand_examples() {
        let p = pair(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]);
        assert!((kendall(&p).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(spearman(&p).unwrap(), 0.5);
        let q = pair(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]);
        assert!((pearson(&q).unwrap() - (27.0f64 / 28.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn perfect_relations() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let up: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let down: Vec<f64> = x.iter().map(|v| -v).collect();
        let up = pair(&x, &up);
        let down = pair(&x, &down);
        assert!((pearson(&up).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&down).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(kendall(&up).unwrap(), 1.0);
        assert_eq!(kendall(&down).unwrap(), -1.0);
        assert_eq!(spearman(&up).unwrap(), 1.0);
        assert_eq!(spearman(&down).unwrap(), -1.0);
    }

    #[test]
    fn degenerate_series_are_undefined() {
        let flat = pair(&[1.0, 2.0, 3.0], &[0.1; 3]);
        assert_eq!(pearson(&flat), Err(Undefined::ZeroVariance { x: false, y: true }));
        let tied = pair(&[1.0, 2.0, 3.0, 4.0], &[1.0, 1.0, 2.0, 2.0]);
        assert_eq!(kendall(&tied), Err(Undefined::Ties { x: 0, y: 2 }));
        assert_eq!(spearman(&tied), Err(Undefined::Ties { x: 0, y: 2 }));
        assert!(pearson(&tied).is_ok());
    }

    #[test]
    fn invalid_pairs_rejected() {
        assert!(SeriesPair::new(vec![1.0], vec![1.0]).is_err());
        assert!(SeriesPair::new(vec![1.0, 2.0], vec![1.0]).is_err());
        assert!(SeriesPair::new(vec![1.0, f64::NAN], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn tie_counting() {
        assert_eq!(tied_pairs(&[1.0, 1.0, 1.0, 2.0, 2.0]), 4);
        assert_eq!(tied_pairs(&[3.0, 1.0, 2.0]), 0);
    }
}
