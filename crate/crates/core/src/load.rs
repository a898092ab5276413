//! Scalar loading programs t ↦ ℓ(t).

use serde::{Deserialize, Serialize};

/// Strictly increasing time change α with α(0) = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeMap {
    /// α(t) = c·t
    Scale { factor: f64 },
    /// α(t) = tᵖ on t ≥ 0
    Power { exponent: u32 },
}

impl TimeMap {
    pub fn apply(&self, t: f64) -> f64 {
        match *self {
            TimeMap::Scale { factor } => factor * t,
            TimeMap::Power { exponent } => t.powi(exponent as i32),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            TimeMap::Scale { factor } => factor,
            TimeMap::Power { exponent } => exponent as f64 * t.powi(exponent as i32 - 1),
        }
    }

    pub fn inverse(&self, s: f64) -> f64 {
        match *self {
            TimeMap::Scale { factor } => s / factor,
            TimeMap::Power { exponent } => s.powf(1.0 / exponent as f64),
        }
    }

    fn max_derivative(&self, a: f64, b: f64) -> f64 {
        match *self {
            TimeMap::Scale { factor } => factor.abs(),
            TimeMap::Power { .. } => self.derivative(a.abs().max(b.abs())),
        }
    }

    fn is_affine(&self) -> bool {
        matches!(self, TimeMap::Scale { .. } | TimeMap::Power { exponent: 1 })
    }

    fn validate(&self) -> Result<(), String> {
        match *self {
            TimeMap::Scale { factor } if !(factor > 0.0 && factor.is_finite()) => {
                Err(format!("time scale must be positive, got {factor}"))
            }
            TimeMap::Power { exponent: 0 } => Err("power map needs exponent ≥ 1".into()),
            _ => Ok(()),
        }
    }
}

/// A load program. Piecewise-linear programs are held constant outside
/// their first and last knot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Load {
    Affine { offset: f64, slope: f64 },
    PiecewiseLinear { knots: Vec<[f64; 2]> },
    Reparametrized { base: Box<Load>, map: TimeMap },
}

impl Load {
    pub fn affine(offset: f64, slope: f64) -> Self {
        Load::Affine { offset, slope }
    }

    pub fn constant(value: f64) -> Self {
        Load::Affine {
            offset: value,
            slope: 0.0,
        }
    }

    pub fn piecewise(knots: Vec<[f64; 2]>) -> Self {
        Load::PiecewiseLinear { knots }
    }

    /// The load seen on the reparametrized clock, s ↦ ℓ(α(s)).
    pub fn reparametrized(self, map: TimeMap) -> Self {
        Load::Reparametrized {
            base: Box::new(self),
            map,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self {
            Load::Affine { offset, slope } => {
                if offset.is_finite() && slope.is_finite() {
                    Ok(())
                } else {
                    Err("affine load coefficients must be finite".into())
                }
            }
            Load::PiecewiseLinear { knots } => {
                if knots.is_empty() {
                    return Err("piecewise-linear load needs at least one knot".into());
                }
                if knots.iter().flatten().any(|v| !v.is_finite()) {
                    return Err("knots must be finite".into());
                }
                if knots.windows(2).any(|w| !(w[1][0] > w[0][0])) {
                    return Err("knot times must be strictly increasing".into());
                }
                Ok(())
            }
            Load::Reparametrized { base, map } => {
                map.validate()?;
                base.validate()
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Load::Affine { offset, slope } => offset + slope * t,
            Load::PiecewiseLinear { knots } => {
                let first = knots[0];
                let last = knots[knots.len() - 1];
                if t <= first[0] {
                    return first[1];
                }
                if t >= last[0] {
                    return last[1];
                }
                let i = piece_index(knots, t);
                let [t0, v0] = knots[i];
                let [t1, v1] = knots[i + 1];
                v0 + (t - t0) * (v1 - v0) / (t1 - t0)
            }
            Load::Reparametrized { base, map } => base.value(map.apply(t)),
        }
    }

    /// dℓ/dt; at a knot the slope of the piece to the right.
    pub fn rate(&self, t: f64) -> f64 {
        match self {
            Load::Affine { slope, .. } => *slope,
            Load::PiecewiseLinear { knots } => {
                if t < knots[0][0] || t >= knots[knots.len() - 1][0] {
                    return 0.0;
                }
                let i = piece_index(knots, t);
                (knots[i + 1][1] - knots[i][1]) / (knots[i + 1][0] - knots[i][0])
            }
            Load::Reparametrized { base, map } => base.rate(map.apply(t)) * map.derivative(t),
        }
    }

    /// Times strictly inside (a, b) where the rate may jump.
    pub fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        match self {
            Load::Affine { .. } => Vec::new(),
            Load::PiecewiseLinear { knots } => knots
                .iter()
                .map(|k| k[0])
                .filter(|&t| t > a && t < b)
                .collect(),
            Load::Reparametrized { base, map } => base
                .breakpoints(map.apply(a), map.apply(b))
                .into_iter()
                .map(|s| map.inverse(s))
                .filter(|&t| t > a && t < b)
                .collect(),
        }
    }

    /// True when ℓ is affine between consecutive breakpoints.
    pub fn is_piecewise_affine(&self) -> bool {
        match self {
            Load::Affine { .. } | Load::PiecewiseLinear { .. } => true,
            Load::Reparametrized { base, map } => map.is_affine() && base.is_piecewise_affine(),
        }
    }

    /// (min, max) of ℓ over [a, b].
    pub fn range(&self, a: f64, b: f64) -> (f64, f64) {
        match self {
            Load::Affine { .. } => min_max([self.value(a), self.value(b)]),
            Load::PiecewiseLinear { .. } => {
                let mut pts = vec![self.value(a), self.value(b)];
                pts.extend(self.breakpoints(a, b).into_iter().map(|t| self.value(t)));
                min_max(pts)
            }
            Load::Reparametrized { base, map } => base.range(map.apply(a), map.apply(b)),
        }
    }

    /// Upper bound on |dℓ/dt| over [a, b].
    pub fn max_abs_rate(&self, a: f64, b: f64) -> f64 {
        match self {
            Load::Affine { slope, .. } => slope.abs(),
            Load::PiecewiseLinear { knots } => knots
                .windows(2)
                .filter(|w| w[1][0] > a && w[0][0] < b)
                .map(|w| ((w[1][1] - w[0][1]) / (w[1][0] - w[0][0])).abs())
                .fold(0.0, f64::max),
            Load::Reparametrized { base, map } => {
                base.max_abs_rate(map.apply(a), map.apply(b)) * map.max_derivative(a, b)
            }
        }
    }

    pub fn max_abs(&self, a: f64, b: f64) -> f64 {
        let (lo, hi) = self.range(a, b);
        lo.abs().max(hi.abs())
    }
}

fn piece_index(knots: &[[f64; 2]], t: f64) -> usize {
    // largest i with knots[i].t <= t, capped so that i + 1 is valid
    let i = knots.partition_point(|k| k[0] <= t);
    i.saturating_sub(1).min(knots.len() - 2)
}

fn min_max(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    values
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
}

/// Merges and sorts the breakpoints of several loads inside (a, b).
pub fn merged_breakpoints<'a>(loads: impl IntoIterator<Item = &'a Load>, a: f64, b: f64) -> Vec<f64> {
    let mut out: Vec<f64> = loads
        .into_iter()
        .flat_map(|l| l.breakpoints(a, b))
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piecewise_linear_evaluation() {
        let l = Load::piecewise(vec![[0.0, 0.0], [1.0, 2.0], [3.0, -2.0]]);
        assert_eq!(l.value(0.5), 1.0);
        assert_eq!(l.value(1.0), 2.0);
        assert_eq!(l.value(2.0), 0.0);
        assert_eq!(l.value(5.0), -2.0);
        assert_eq!(l.rate(0.5), 2.0);
        assert_eq!(l.rate(1.0), -2.0);
        assert_eq!(l.rate(4.0), 0.0);
        assert_eq!(l.range(0.0, 3.0), (-2.0, 2.0));
        assert_eq!(l.range(0.0, 0.5), (0.0, 1.0));
        assert_eq!(l.max_abs_rate(0.0, 3.0), 2.0);
        assert_eq!(l.breakpoints(0.0, 3.0), vec![1.0]);
    }

    #[test]
    fn reparametrized_chain_rule() {
        let l = Load::affine(1.0, 2.0).reparametrized(TimeMap::Power { exponent: 2 });
        assert_eq!(l.value(3.0), 19.0);
        assert_eq!(l.rate(3.0), 12.0);
        assert!(!l.is_piecewise_affine());
        assert_eq!(l.max_abs_rate(0.0, 2.0), 8.0);
        let p = Load::piecewise(vec![[0.0, 0.0], [4.0, 1.0]])
            .reparametrized(TimeMap::Power { exponent: 2 });
        assert_eq!(p.breakpoints(0.0, 3.0), vec![2.0]);
    }

    #[test]
    fn validation() {
        assert!(Load::piecewise(vec![]).validate().is_err());
        assert!(Load::piecewise(vec![[1.0, 0.0], [1.0, 1.0]]).validate().is_err());
        assert!(Load::affine(0.0, f64::NAN).validate().is_err());
        assert!(Load::constant(1.0)
            .reparametrized(TimeMap::Scale { factor: -1.0 })
            .validate()
            .is_err());
    }
}
