//! Time grids for the nonlocal steppers.

use crate::error::{Error, Result};

/// A time grid t_0 = 0 < t_1 < … < t_M = T.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    /// Uniform grid with `steps` intervals on [0, T].
    pub fn uniform(t_final: f64, steps: usize) -> Result<Self> {
        Self::graded(t_final, steps, 1.0)
    }

    /// Graded grid t_m = T (m/M)^γ; γ = 1 is uniform, γ > 1 clusters nodes
    /// near t = 0 where the kernel is weakly singular.
    pub fn graded(t_final: f64, steps: usize, gamma: f64) -> Result<Self> {
        if t_final <= 0.0 || !t_final.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "grid: final time must be positive, got {t_final}"
            )));
        }
        if steps == 0 {
            return Err(Error::InvalidArgument("grid: need at least one step".into()));
        }
        if gamma < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "grid: grading exponent must be >= 1, got {gamma}"
            )));
        }
        let points = (0..=steps)
            .map(|m| t_final * (m as f64 / steps as f64).powf(gamma))
            .collect();
        Ok(TimeGrid { points })
    }

    /// Wrap explicit points; must start at 0 and be strictly increasing.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 || points[0] != 0.0 {
            return Err(Error::InvalidArgument(
                "grid: points must start at 0 and contain at least one step".into(),
            ));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) || points.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument(
                "grid: points must be finite and strictly increasing".into(),
            ));
        }
        Ok(TimeGrid { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Number of nodes (steps + 1).
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn t_final(&self) -> f64 {
        *self.points.last().unwrap()
    }

    /// Step t_{j+1} − t_j.
    pub fn dt(&self, j: usize) -> f64 {
        self.points[j + 1] - self.points[j]
    }

    pub fn is_uniform(&self) -> bool {
        let h = self.dt(0);
        self.points
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-12 * h.max(1.0))
    }

    /// Insert midpoints into every interval overlapping
    /// [center − halfwidth, center + halfwidth] until at least `min_nodes`
    /// grid nodes fall inside the window. Used to resolve mollifier bumps.
    pub fn refine_around(&self, center: f64, halfwidth: f64, min_nodes: usize) -> TimeGrid {
        let mut pts = self.points.clone();
        let lo = center - halfwidth;
        let hi = center + halfwidth;
        for _ in 0..32 {
            let inside = pts.iter().filter(|&&t| t >= lo && t <= hi).count();
            if inside >= min_nodes {
                break;
            }
            let mut refined = Vec::with_capacity(pts.len() * 2);
            for w in pts.windows(2) {
                refined.push(w[0]);
                if w[1] > lo && w[0] < hi {
                    refined.push(0.5 * (w[0] + w[1]));
                }
            }
            refined.push(*pts.last().unwrap());
            pts = refined;
        }
        TimeGrid { points: pts }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_basics() {
        let g = TimeGrid::uniform(1.0, 4).unwrap();
        assert_eq!(g.points(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(g.is_uniform());
        assert_eq!(g.steps(), 4);
        assert_eq!(g.t_final(), 1.0);
    }

    #[test]
    fn graded_grid_clusters_near_zero() {
        let g = TimeGrid::graded(1.0, 10, 2.0).unwrap();
        assert!(!g.is_uniform());
        assert!(g.dt(0) < g.dt(9));
        assert_eq!(g.points()[0], 0.0);
        assert!((g.t_final() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_grids_rejected() {
        assert!(TimeGrid::uniform(0.0, 4).is_err());
        assert!(TimeGrid::uniform(1.0, 0).is_err());
        assert!(TimeGrid::graded(1.0, 4, 0.5).is_err());
        assert!(TimeGrid::from_points(vec![0.0, 0.5, 0.5]).is_err());
        assert!(TimeGrid::from_points(vec![0.1, 0.5]).is_err());
    }

    #[test]
    fn refine_around_reaches_node_budget() {
        let g = TimeGrid::uniform(1.0, 8).unwrap();
        let r = g.refine_around(0.5, 0.05, 8);
        let inside = r
            .points()
            .iter()
            .filter(|&&t| (0.45..=0.55).contains(&t))
            .count();
        assert!(inside >= 8);
        // Still a valid grid.
        assert!(TimeGrid::from_points(r.points().to_vec()).is_ok());
    }
}
