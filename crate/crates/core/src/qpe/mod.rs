//! Quantum phase estimation with Trotterized evolution, simulated exactly.

pub mod evolution;
pub mod resources;
pub mod simulate;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::pauli::C64;
use crate::hamiltonian::QubitHamiltonian;
pub use evolution::{apply_pauli_exponential, basis_state, dense_hamiltonian, exact_propagator, trotter_slice_unitary};
pub use resources::{estimate_resources, two_qubit_gates_per_exponential, ResourceEstimate};
pub use simulate::{dirichlet_kernel, dominant_eigenphase, qpe_distribution, statevector_qpe, QpeDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Readout {
    MaxProb,
    WgtAve,
}

impl std::str::FromStr for Readout {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "maxprob" | "max-prob" => Ok(Readout::MaxProb),
            "wgtave" | "wgt-ave" => Ok(Readout::WgtAve),
            _ => Err(Error::Config(format!("unknown readout '{s}' (expected max-prob or wgt-ave)"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QpeConfig {
    /// Evolution time in atomic units.
    pub t: f64,
    pub n_ancilla: usize,
    pub m_list: Vec<usize>,
    /// Subtracted from the Hamiltonian before evolution (E_HF).
    pub offset: f64,
    pub readout: Readout,
}

impl QpeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::Config(format!("t must be positive (got {})", self.t)));
        }
        if self.n_ancilla == 0 {
            return Err(Error::Config("at least one ancilla qubit is required".into()));
        }
        if self.m_list.is_empty() || self.m_list.contains(&0) {
            return Err(Error::Config("every Trotter slice count must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Phase estimate under the given readout. WgtAve is the probability-weighted
/// mean of the peak bin and its two cyclic neighbours, unwrapped around the
/// peak and reduced mod 1 (a result within 10⁻¹² of 1 is read as 0).
pub fn read_phase(dist: &QpeDistribution, readout: Readout) -> f64 {
    let p = &dist.probabilities;
    let n = p.len();
    let k = p.iter().enumerate().fold(0, |best, (x, &v)| if v > p[best] { x } else { best });
    match readout {
        Readout::MaxProb => k as f64 / n as f64,
        Readout::WgtAve => {
            let mut num = 0.0;
            let mut den = 0.0;
            for off in [-1i64, 0, 1] {
                let w = p[(k as i64 + off).rem_euclid(n as i64) as usize];
                num += w * (k as i64 + off) as f64;
                den += w;
            }
            let phi = (num / den / n as f64).rem_euclid(1.0);
            // Round-off below zero must not wrap to the far end of the branch.
            if 1.0 - phi < 1e-12 {
                0.0
            } else {
                phi
            }
        }
    }
}

/// E = offset − 2πφ/t, on the branch E − offset ∈ (−2π/t, 0].
pub fn phase_to_energy(phase: f64, t: f64, offset: f64) -> f64 {
    offset - 2.0 * PI * phase / t
}

/// Half-bin rounding bound ½ · 2π/(t · 2^N_a) in hartree.
pub fn rounding_bound(t: f64, n_ancilla: usize) -> f64 {
    PI / (t * (1u64 << n_ancilla) as f64)
}

/// 2π/(5|E_corr|) rounded to the nearest power of two.
pub fn suggest_time(e_corr_estimate: f64) -> f64 {
    let raw = 2.0 * PI / (5.0 * e_corr_estimate.abs());
    2f64.powi(raw.log2().round() as i32)
}

#[derive(Debug, Clone, Serialize)]
pub struct AemFit {
    pub a: f64,
    pub b: f64,
    /// Parameter variances scaled by the residual variance; absent when the
    /// fit has no degrees of freedom.
    pub var_a: Option<f64>,
    pub var_b: Option<f64>,
    pub residual: f64,
    pub points: Vec<(usize, f64)>,
}

/// Least-squares fit of E′ = a/M² + b.
pub fn aem_extrapolate(points: &[(usize, f64)]) -> Result<AemFit> {
    let mut distinct: Vec<usize> = points.iter().map(|p| p.0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 || distinct.contains(&0) {
        return Err(Error::Invalid("extrapolation needs at least two distinct positive M values".into()));
    }
    let n = points.len();
    let a_mat = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 / (points[i].0 as f64).powi(2) } else { 1.0 });
    let y = DVector::from_iterator(n, points.iter().map(|p| p.1));
    // Centre the energies so the normal equations do not lose the digits of b.
    let shift = y.mean();
    let yc = y.map(|v| v - shift);
    let ata = a_mat.transpose() * &a_mat;
    let inv = ata.try_inverse().ok_or_else(|| Error::Numerical("singular extrapolation system".into()))?;
    let coef = &inv * a_mat.transpose() * &yc;
    let resid = &yc - &a_mat * &coef;
    let ssr = resid.norm_squared();
    let (var_a, var_b) = if n > 2 {
        let s2 = ssr / (n - 2) as f64;
        (Some(s2 * inv[(0, 0)]), Some(s2 * inv[(1, 1)]))
    } else {
        (None, None)
    };
    Ok(AemFit {
        a: coef[0],
        b: coef[1] + shift,
        var_a,
        var_b,
        residual: ssr.sqrt(),
        points: points.to_vec(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct QpeRun {
    pub m: usize,
    pub phase_max_prob: f64,
    pub phase_wgt_ave: f64,
    pub energy_max_prob: f64,
    pub energy_wgt_ave: f64,
    /// Energy of the Trotterized eigenvector with the largest overlap
    /// with the input state, without phase discretization.
    pub trotter_energy: f64,
    pub distribution: QpeDistribution,
}

impl QpeRun {
    pub fn energy(&self, readout: Readout) -> f64 {
        match readout {
            Readout::MaxProb => self.energy_max_prob,
            Readout::WgtAve => self.energy_wgt_ave,
        }
    }
}

/// Spectral QPE for one M with the offset folded into the identity term.
pub fn run_qpe(h: &QubitHamiltonian, cfg: &QpeConfig, m: usize, state: &DVector<C64>) -> Result<QpeRun> {
    let shifted = h.with_offset(-cfg.offset);
    let slice = trotter_slice_unitary(&shifted, cfg.t, m)?;
    let distribution = qpe_distribution(&slice, m, state, cfg.n_ancilla, cfg.t)?;
    let (arg, _) = dominant_eigenphase(&slice, state)?;
    let pm = read_phase(&distribution, Readout::MaxProb);
    let pw = read_phase(&distribution, Readout::WgtAve);
    Ok(QpeRun {
        m,
        phase_max_prob: pm,
        phase_wgt_ave: pw,
        energy_max_prob: phase_to_energy(pm, cfg.t, cfg.offset),
        energy_wgt_ave: phase_to_energy(pw, cfg.t, cfg.offset),
        trotter_energy: cfg.offset - arg * m as f64 / cfg.t,
        distribution,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct QpeAemResult {
    pub runs: Vec<QpeRun>,
    pub fit_max_prob: AemFit,
    pub fit_wgt_ave: AemFit,
}

impl QpeAemResult {
    pub fn fit(&self, readout: Readout) -> &AemFit {
        match readout {
            Readout::MaxProb => &self.fit_max_prob,
            Readout::WgtAve => &self.fit_wgt_ave,
        }
    }
}

/// QPE over every M of the configuration (in parallel) followed by the
/// quadratic extrapolation for both readouts.
pub fn run_qpe_aem(h: &QubitHamiltonian, cfg: &QpeConfig, state: &DVector<C64>) -> Result<QpeAemResult> {
    use rayon::prelude::*;
    cfg.validate()?;
    let runs: Vec<QpeRun> = cfg.m_list.par_iter().map(|&m| run_qpe(h, cfg, m, state)).collect::<Result<_>>()?;
    let pts = |r: Readout| runs.iter().map(|x| (x.m, x.energy(r))).collect::<Vec<_>>();
    let fit_max_prob = aem_extrapolate(&pts(Readout::MaxProb))?;
    let fit_wgt_ave = aem_extrapolate(&pts(Readout::WgtAve))?;
    Ok(QpeAemResult {
        runs,
        fit_max_prob,
        fit_wgt_ave,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dist(p: Vec<f64>) -> QpeDistribution {
        let n_ancilla = p.len().trailing_zeros() as usize;
        QpeDistribution {
            probabilities: p,
            n_ancilla,
            m: 1,
            t: 1.0,
        }
    }

    #[test]
    fn weighted_average_hand_value() {
        let mut p = vec![0.0; 64];
        p[10] = 0.2;
        p[11] = 0.6;
        p[12] = 0.2;
        assert!((read_phase(&dist(p.clone()), Readout::WgtAve) - 11.0 / 64.0).abs() < 1e-15);
        assert_eq!(read_phase(&dist(p), Readout::MaxProb), 11.0 / 64.0);
    }

    #[test]
    fn delta_and_ties() {
        let mut p = vec![0.0; 16];
        p[5] = 1.0;
        assert_eq!(read_phase(&dist(p.clone()), Readout::WgtAve), 5.0 / 16.0);
        p[5] = 0.5;
        p[9] = 0.5;
        assert_eq!(read_phase(&dist(p), Readout::MaxProb), 5.0 / 16.0);
    }

    #[test]
    fn peak_at_zero_with_negligible_left_leakage_reads_zero() {
        let mut p = vec![0.0; 64];
        p[0] = 1.0;
        p[63] = 1e-30;
        assert_eq!(read_phase(&dist(p), Readout::WgtAve), 0.0);
    }

    proptest! {
        #[test]
        fn weighted_average_is_cyclic(shift in 0usize..32, a in 0.01f64..1.0, b in 0.02f64..1.0, c in 0.01f64..1.0) {
            let n = 32;
            let mut base = vec![0.0; n];
            base[n - 1] = a;
            base[0] = b + a.max(c);
            base[1] = c;
            let phi0 = read_phase(&dist(base.clone()), Readout::WgtAve);
            let rolled: Vec<f64> = (0..n).map(|x| base[(x + n - shift) % n]).collect();
            let phi1 = read_phase(&dist(rolled), Readout::WgtAve);
            let expected = (phi0 + shift as f64 / n as f64).rem_euclid(1.0);
            let d = (phi1 - expected).rem_euclid(1.0);
            prop_assert!(d.min(1.0 - d) < 1e-12);
        }
    }

    #[test]
    fn rounding_bound_value() {
        let kcal = crate::units::to_kcal(rounding_bound(128.0, 6));
        assert!((kcal - 0.2407).abs() < 5e-4, "{kcal}");
        assert_eq!(phase_to_energy(0.0, 128.0, -1.5), -1.5);
    }

    #[test]
    fn suggested_time_is_power_of_two() {
        assert_eq!(suggest_time(-0.0115), 128.0);
        assert_eq!(suggest_time(-1.0), 1.0);
    }

    #[test]
    fn aem_exact_quadratic_and_two_points() {
        let (a, b) = (104.5, -149.95);
        let pts: Vec<(usize, f64)> = [128, 256, 512].iter().map(|&m| (m, a / (m as f64).powi(2) + b)).collect();
        let fit = aem_extrapolate(&pts).unwrap();
        assert!((fit.a - a).abs() < 1e-6 && (fit.b - b).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
        let two = aem_extrapolate(&pts[..2]).unwrap();
        assert!(two.residual < 1e-12 && two.var_a.is_none());
        assert!(aem_extrapolate(&pts[..1]).is_err());
        assert!(aem_extrapolate(&[(4, 1.0), (4, 2.0)]).is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = QpeConfig {
            t: 128.0,
            n_ancilla: 6,
            m_list: vec![128],
            offset: 0.0,
            readout: Readout::WgtAve,
        };
        assert!(cfg.validate().is_ok());
        cfg.m_list.push(0);
        assert!(cfg.validate().unwrap_err().is_config());
        assert_eq!("WgtAve".parse::<Readout>().unwrap(), Readout::WgtAve);
    }
}
