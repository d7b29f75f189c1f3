//! Threshold classification of increments.
//!
//! An increment is "small" (attributed to the continuous part) when
//! |ΔX_i| ≤ D h^ρ and "large" (attributed to a jump) otherwise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulate::Path;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub d: f64,
    pub rho: f64,
}

impl Threshold {
    pub fn new(d: f64, rho: f64) -> Result<Self> {
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::InvalidParameter(format!("threshold constant D must be positive, got {d}")));
        }
        if !(rho > 0.0 && rho < 0.5) {
            return Err(Error::InvalidParameter(format!("threshold exponent rho must lie in (0, 1/2), got {rho}")));
        }
        Ok(Self { d, rho })
    }

    /// D = 1.
    pub fn unit(rho: f64) -> Result<Self> {
        Self::new(1.0, rho)
    }

    pub(crate) fn key(&self) -> (u64, u64) {
        (self.d.to_bits(), self.rho.to_bits())
    }
}

/// D h^ρ.
pub fn cutoff(th: &Threshold, h: f64) -> f64 {
    th.d * h.powf(th.rho)
}

/// The five filters: three for adaptive estimation, two for the joint
/// quasi-likelihood used in the ratio statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    /// Continuous-part filter for the diffusion step (ρ1).
    pub diffusion: Threshold,
    /// Jump-part filter (ρ2).
    pub jump: Threshold,
    /// Continuous-part filter for the drift step (ρ3).
    pub drift: Threshold,
    /// Continuous-part filter of the joint likelihood (ρ̄1).
    pub joint_continuous: Threshold,
    /// Jump-part filter of the joint likelihood (ρ̄2).
    pub joint_jump: Threshold,
}

impl ThresholdConfig {
    /// Every slot uses the same threshold.
    pub fn uniform(th: Threshold) -> Self {
        Self {
            diffusion: th,
            jump: th,
            drift: th,
            joint_continuous: th,
            joint_jump: th,
        }
    }

    pub fn from_rhos(d: f64, rho1: f64, rho2: f64, rho3: f64, rho1_bar: f64, rho2_bar: f64) -> Result<Self> {
        Ok(Self {
            diffusion: Threshold::new(d, rho1)?,
            jump: Threshold::new(d, rho2)?,
            drift: Threshold::new(d, rho3)?,
            joint_continuous: Threshold::new(d, rho1_bar)?,
            joint_jump: Threshold::new(d, rho2_bar)?,
        })
    }

    pub fn slots(&self) -> [(ThresholdSlot, Threshold); 5] {
        [
            (ThresholdSlot::Diffusion, self.diffusion),
            (ThresholdSlot::Jump, self.jump),
            (ThresholdSlot::Drift, self.drift),
            (ThresholdSlot::JointContinuous, self.joint_continuous),
            (ThresholdSlot::JointJump, self.joint_jump),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdSlot {
    Diffusion,
    Jump,
    Drift,
    JointContinuous,
    JointJump,
}

impl ThresholdSlot {
    pub fn label(&self) -> &'static str {
        match self {
            ThresholdSlot::Diffusion => "rho1",
            ThresholdSlot::Jump => "rho2",
            ThresholdSlot::Drift => "rho3",
            ThresholdSlot::JointContinuous => "rho1_bar",
            ThresholdSlot::JointJump => "rho2_bar",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncrementClassification {
    /// `small_mask[i - 1]` refers to ΔX_i.
    pub small_mask: Vec<bool>,
    pub n_small: usize,
    pub n_large: usize,
    pub cutoff: f64,
}

impl IncrementClassification {
    pub fn is_small(&self, i: usize) -> bool {
        self.small_mask[i - 1]
    }

    /// Indices i (1-based) of small increments.
    pub fn small_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.small_mask.iter().enumerate().filter(|(_, &s)| s).map(|(k, _)| k + 1)
    }

    /// Indices i (1-based) of large increments.
    pub fn large_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.small_mask.iter().enumerate().filter(|(_, &s)| !s).map(|(k, _)| k + 1)
    }
}

/// Classifies every increment of `path`; ties |ΔX_i| = cutoff count as small.
pub fn classify(path: &Path, th: &Threshold) -> IncrementClassification {
    let c = cutoff(th, path.h());
    let small_mask: Vec<bool> = if path.dim() == 1 {
        path.values().windows(2).map(|w| (w[1] - w[0]).abs() <= c).collect()
    } else {
        let mut dx = vec![0.0; path.dim()];
        (1..=path.n())
            .map(|i| {
                path.increment_into(i, &mut dx);
                dx.iter().map(|v| v * v).sum::<f64>().sqrt() <= c
            })
            .collect()
    };
    let n_small = small_mask.iter().filter(|&&s| s).count();
    IncrementClassification {
        n_large: small_mask.len() - n_small,
        n_small,
        small_mask,
        cutoff: c,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotDiagnostic {
    pub slot: ThresholdSlot,
    pub rho: f64,
    pub in_open_unit_half: bool,
    /// Lower end of the admissible window for asymptotic normality.
    pub window_lower: f64,
    pub window_lower_inclusive: bool,
    pub admissible: bool,
}

/// Finite-sample view of the asymptotic balance conditions. Advisory only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub n: usize,
    pub h: f64,
    pub delta: f64,
    pub nh: f64,
    pub nh2: f64,
    pub nh_one_plus_delta: f64,
    pub slots: Vec<SlotDiagnostic>,
}

impl BalanceReport {
    pub fn all_admissible(&self) -> bool {
        self.slots.iter().all(|s| s.admissible)
    }
}

/// Reports nh, nh², n h^{1+δ} and whether each ρ lies in its admissible
/// window: ρ1, ρ̄1 ∈ (1/5, ½) ∩ [(1+δ)/6, ½); ρ2, ρ̄2 ∈ [δ/2, ½);
/// ρ3 ∈ [δ/4, ½).
pub fn balance_diagnostics(n: usize, h: f64, thresholds: &[(ThresholdSlot, Threshold)], delta: f64) -> BalanceReport {
    let nf = n as f64;
    let slots = thresholds
        .iter()
        .map(|&(slot, th)| {
            let rho = th.rho;
            let in_open = rho > 0.0 && rho < 0.5;
            let (lower, inclusive) = match slot {
                ThresholdSlot::Diffusion | ThresholdSlot::JointContinuous => {
                    let l = (1.0 + delta) / 6.0;
                    if l > 0.2 {
                        (l, true)
                    } else {
                        (0.2, false)
                    }
                }
                ThresholdSlot::Jump | ThresholdSlot::JointJump => (delta / 2.0, true),
                ThresholdSlot::Drift => (delta / 4.0, true),
            };
            let above = if inclusive { rho >= lower } else { rho > lower };
            SlotDiagnostic {
                slot,
                rho,
                in_open_unit_half: in_open,
                window_lower: lower,
                window_lower_inclusive: inclusive,
                admissible: in_open && above,
            }
        })
        .collect();
    BalanceReport {
        n,
        h,
        delta,
        nh: nf * h,
        nh2: nf * h * h,
        nh_one_plus_delta: nf * h.powf(1.0 + delta),
        slots,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_values() {
        let c = cutoff(&Threshold::unit(0.3).unwrap(), 0.01);
        assert!((c - 10f64.powf(-0.6)).abs() < 1e-15);
        assert!((c - 0.251188643).abs() < 1e-9);
        for rho in [0.01, 0.2, 0.49] {
            assert_eq!(cutoff(&Threshold::unit(rho).unwrap(), 1.0), 1.0);
        }
        let c = cutoff(&Threshold::new(2.0, 0.25).unwrap(), 1e-4);
        assert!((c - 0.2).abs() < 1e-15);
    }

    #[test]
    fn threshold_validation() {
        assert!(Threshold::new(0.0, 0.3).is_err());
        assert!(Threshold::new(1.0, 0.5).is_err());
        assert!(Threshold::new(1.0, 0.0).is_err());
        assert!(Threshold::new(-1.0, 0.3).is_err());
    }

    fn path_from_increments(h: f64, dx: &[f64]) -> Path {
        let mut v = vec![0.0];
        for d in dx {
            v.push(v.last().unwrap() + d);
        }
        Path::from_values_1d(h, v).unwrap()
    }

    #[test]
    fn classify_example() {
        // X = [1.0, 1.1, 1.05, 4.05] has ΔX = [0.1, -0.05, 3.0] up to rounding.
        let path = Path::from_values_1d(0.01, vec![1.0, 1.1, 1.05, 4.05]).unwrap();
        let cls = classify(&path, &Threshold::unit(0.3).unwrap());
        assert_eq!(cls.small_mask, vec![true, true, false]);
        assert_eq!((cls.n_small, cls.n_large), (2, 1));
    }

    #[test]
    fn classify_zero_increments_and_ties() {
        let path = Path::from_values_1d(0.01, vec![2.0; 6]).unwrap();
        let cls = classify(&path, &Threshold::unit(0.3).unwrap());
        assert_eq!((cls.n_small, cls.n_large), (5, 0));

        // h = 1 gives cutoff exactly D; an increment of exactly D is small.
        let path = Path::from_values_1d(1.0, vec![0.0, 0.5, 0.0]).unwrap();
        let th = Threshold::new(0.5, 0.3).unwrap();
        assert_eq!(cutoff(&th, 1.0), 0.5);
        assert_eq!(classify(&path, &th).small_mask, vec![true, true]);
    }

    #[test]
    fn classify_euclidean_norm() {
        let path = Path::new(1.0, 2, vec![0.0, 0.0, 0.3, 0.4, 0.3, 0.41], None).unwrap();
        let th = Threshold::new(0.5, 0.3).unwrap();
        assert_eq!(classify(&path, &th).small_mask, vec![true, true]);
        let th = Threshold::new(0.49, 0.3).unwrap();
        assert_eq!(classify(&path, &th).small_mask, vec![false, true]);
    }

    #[test]
    fn monotone_in_rho() {
        let dx: Vec<f64> = (0..200).map(|k| ((k * 37 % 101) as f64 - 50.0) / 200.0).collect();
        let path = path_from_increments(0.01, &dx);
        let mut last = usize::MAX;
        for k in 1..50 {
            let n1 = classify(&path, &Threshold::unit(k as f64 / 100.0).unwrap()).n_small;
            assert!(n1 <= last);
            last = n1;
        }
    }

    #[test]
    fn balance_at_reference_design() {
        let n = 1_000_000usize;
        let h = (n as f64).powf(-2.0 / 3.0);
        let th = |r| Threshold::unit(r).unwrap();
        let rep = balance_diagnostics(
            n,
            h,
            &[(ThresholdSlot::Diffusion, th(0.285)), (ThresholdSlot::Jump, th(0.26)), (ThresholdSlot::Drift, th(0.255))],
            0.51,
        );
        assert!((rep.nh - 100.0).abs() < 1e-9);
        assert!(rep.all_admissible());
        assert!((rep.slots[0].window_lower - 1.51 / 6.0).abs() < 1e-15);

        let bad = Threshold { d: 1.0, rho: 0.5 };
        let rep = balance_diagnostics(n, h, &[(ThresholdSlot::Jump, bad)], 0.51);
        assert!(!rep.slots[0].in_open_unit_half);
        assert!(!rep.all_admissible());
    }
}
