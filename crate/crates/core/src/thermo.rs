//! Steady-state thermodynamic quantities.
//!
//! Sign conventions: a positive heat flux flows from the bath into the
//! system; negative power means work is extracted.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lindblad::SystemSpec;
use crate::operator::{log_psd, DensityMatrix, Operator, C64, I};
use crate::tolerance;

fn real_trace(z: C64) -> Result<f64> {
    if z.im.abs() > tolerance::IMAGINARY_RESIDUE {
        return Err(Error::ImaginaryResidue(z.im.abs()));
    }
    Ok(z.re)
}

/// Effective inverse temperature of the `|1>`-`|2>` subspace of a qutrit
/// coupled to a hot bath on `|1>`-`|3>` and a cold bath on `|2>`-`|3>`:
/// `(β_H E_H − β_C E_C) / (E_H − E_C)`.
pub fn synthetic_beta(beta_h: f64, e_h: f64, beta_c: f64, e_c: f64) -> Result<f64> {
    if !(e_h > e_c && e_c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need e_h > e_c > 0 (e_h={e_h}, e_c={e_c})"
        )));
    }
    Ok((beta_h * e_h - beta_c * e_c) / (e_h - e_c))
}

/// Inverse of [`synthetic_beta`] for `E_H` at fixed `E_S = E_H − E_C`.
pub fn hot_energy_for_synthetic_beta(
    beta_s: f64,
    e_s: f64,
    beta_h: f64,
    beta_c: f64,
) -> Result<f64> {
    if beta_h == beta_c {
        return Err(Error::InvalidParameter(
            "synthetic temperature cannot be tuned with beta_h == beta_c".into(),
        ));
    }
    let e_h = e_s * (beta_s - beta_c) / (beta_h - beta_c);
    if !(e_h > e_s) {
        return Err(Error::InvalidParameter(format!(
            "synthetic beta {beta_s} unreachable with beta_h={beta_h}, beta_c={beta_c}"
        )));
    }
    Ok(e_h)
}

/// Descriptor of one synthetic bath.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SyntheticBathDescriptor {
    pub beta_s: f64,
    pub beta_h: f64,
    pub beta_c: f64,
    pub e_h: f64,
    pub e_c: f64,
    pub e_s: f64,
}

impl SyntheticBathDescriptor {
    pub fn new(beta_h: f64, e_h: f64, beta_c: f64, e_c: f64) -> Result<Self> {
        if !(beta_h > 0.0 && beta_c > 0.0) {
            return Err(Error::InvalidParameter(
                "bath inverse temperatures must be positive".into(),
            ));
        }
        Ok(Self {
            beta_s: synthetic_beta(beta_h, e_h, beta_c, e_c)?,
            beta_h,
            beta_c,
            e_h,
            e_c,
            e_s: e_h - e_c,
        })
    }
}

/// `Tr[L_group(σ) H]` for an arbitrary Hamiltonian `H`.
pub fn heat_flux_against(
    spec: &SystemSpec,
    sigma: &DensityMatrix,
    group: &str,
    hamiltonian: &Operator,
) -> Result<f64> {
    let l = spec.apply_group(group, sigma.op())?;
    real_trace(l.trace_product(hamiltonian))
}

/// `Tr[L_group(σ) H_0]`.
pub fn heat_flux(spec: &SystemSpec, sigma: &DensityMatrix, group: &str) -> Result<f64> {
    heat_flux_against(spec, sigma, group, &spec.h_base)
}

/// Heat flux of a single channel against `H`.
pub fn channel_heat_flux(
    spec: &SystemSpec,
    sigma: &DensityMatrix,
    channel: &str,
    hamiltonian: &Operator,
) -> Result<f64> {
    let l = crate::lindblad::apply_lso(spec.channel(channel)?, sigma.op())?;
    real_trace(l.trace_product(hamiltonian))
}

/// `−Tr[L_group(σ) log σ]`.
pub fn entropy_flux_vn(spec: &SystemSpec, sigma: &DensityMatrix, group: &str) -> Result<f64> {
    let l = spec.apply_group(group, sigma.op())?;
    let log = log_psd(sigma, tolerance::LOG_FLOOR);
    Ok(-real_trace(l.trace_product(&log))?)
}

/// `−Tr[i[σ, H_frame] log σ]`; vanishes because `σ` commutes with `log σ`.
pub fn unitary_entropy_flux(spec: &SystemSpec, sigma: &DensityMatrix) -> Result<f64> {
    let l = spec.apply_unitary(sigma.op())?;
    let log = log_psd(sigma, tolerance::LOG_FLOOR);
    Ok(-real_trace(l.trace_product(&log))?)
}

pub fn entropy_flux_clausius(beta_s: f64, q_dot: f64) -> f64 {
    beta_s * q_dot
}

/// `Σ = (β_RS − β_LS) Q̇_L` for two baths exchanging heat at steady state.
pub fn entropy_production(beta_ls: f64, beta_rs: f64, q_dot_l: f64) -> f64 {
    (beta_rs - beta_ls) * q_dot_l
}

/// `P = i Tr[σ [V, H]]`.
pub fn power(sigma: &DensityMatrix, v_int: &Operator, h: &Operator) -> Result<f64> {
    let c = v_int.commutator(h);
    real_trace(sigma.op().trace_product(&c) * I)
}

/// `−Σ λ ln λ` over the clamped spectrum.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    rho.spectrum()
        .eigenvalues
        .iter()
        .map(|&l| {
            let l = l.max(tolerance::LOG_FLOOR);
            -l * l.ln()
        })
        .sum::<f64>()
        .max(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Efficiencies {
    /// `−P / Q̇_X` per group.
    pub per_group: BTreeMap<String, f64>,
    /// `−P` over the total absorbed heat (sum of positive group fluxes).
    pub total: f64,
    /// Every group heat flux positive and `P < 0`.
    pub engine_regime: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FluxReport {
    pub heat_flux: BTreeMap<String, f64>,
    pub entropy_flux_vn: BTreeMap<String, f64>,
    pub entropy_flux_clausius: BTreeMap<String, f64>,
    pub power: f64,
    /// `−Σ_X β_X Q̇_X`, the steady-state entropy production.
    pub entropy_production: f64,
    pub efficiencies: Efficiencies,
    /// `|Σ_X Q̇_X + P|`.
    pub first_law_residual: f64,
    /// `|Σ_X Ṡ_X|` with von Neumann entropy fluxes.
    pub entropy_balance_residual: f64,
    pub unitary_entropy_flux: f64,
}

/// Efficiencies from heat fluxes and power; fails if the engine regime
/// holds but the total efficiency is not one.
pub fn efficiencies(heat_flux: &BTreeMap<String, f64>, power: f64) -> Result<Efficiencies> {
    let per_group = heat_flux
        .iter()
        .map(|(k, &q)| (k.clone(), -power / q))
        .collect();
    let absorbed: f64 = heat_flux.values().filter(|&&q| q > 0.0).sum();
    let total = -power / absorbed;
    let engine_regime =
        !heat_flux.is_empty() && power < 0.0 && heat_flux.values().all(|&q| q > 0.0);
    if engine_regime && (total - 1.0).abs() > tolerance::UNIT_EFFICIENCY {
        return Err(Error::InvariantBreach(format!(
            "engine efficiency {total} differs from one"
        )));
    }
    Ok(Efficiencies {
        per_group,
        total,
        engine_regime,
    })
}

/// Every flux, power and balance diagnostic for a steady state of `spec`.
pub fn flux_report(spec: &SystemSpec, sigma: &DensityMatrix) -> Result<FluxReport> {
    let log = log_psd(sigma, tolerance::LOG_FLOOR);
    let mut heat = BTreeMap::new();
    let mut svn = BTreeMap::new();
    let mut scl = BTreeMap::new();
    let mut production = 0.0;
    for g in &spec.groups {
        let l = spec.apply_group(&g.label, sigma.op())?;
        let q = real_trace(l.trace_product(&spec.h_base))?;
        let s = -real_trace(l.trace_product(&log))?;
        heat.insert(g.label.clone(), q);
        svn.insert(g.label.clone(), s);
        scl.insert(g.label.clone(), entropy_flux_clausius(g.beta, q));
        production -= g.beta * q;
    }
    let p = match &spec.v_int {
        Some(v) => power(sigma, v, &spec.h_base)?,
        None => 0.0,
    };
    let first_law_residual = (heat.values().sum::<f64>() + p).abs();
    let entropy_balance_residual = svn.values().sum::<f64>().abs();
    Ok(FluxReport {
        efficiencies: efficiencies(&heat, p)?,
        heat_flux: heat,
        entropy_flux_vn: svn,
        entropy_flux_clausius: scl,
        power: p,
        entropy_production: production,
        first_law_residual,
        entropy_balance_residual,
        unitary_entropy_flux: unitary_entropy_flux(spec, sigma)?,
    })
}

/// Power from `spec`'s interaction against `H`; errors if the spec has none.
pub fn power_against(spec: &SystemSpec, sigma: &DensityMatrix, h: &Operator) -> Result<f64> {
    let v = spec.v_int.as_ref().ok_or(Error::MissingInteraction)?;
    power(sigma, v, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_beta_cases() {
        assert!((synthetic_beta(0.3, 4.0, 0.3, 1.5).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(synthetic_beta(0.05, 10.0, 1.0, 0.5).unwrap(), 0.0);
        assert!((synthetic_beta(0.05, 20.0, 1.0, 10.5).unwrap() + 1.0).abs() < 1e-14);
        assert!(synthetic_beta(0.05, 1.0, 1.0, 1.0).is_err());
        assert!(synthetic_beta(0.05, 1.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn hot_energy_inverts_synthetic_beta() {
        let e_h = hot_energy_for_synthetic_beta(-1.0, 9.5, 0.05, 1.0).unwrap();
        assert!((e_h - 20.0).abs() < 1e-12);
        assert!(hot_energy_for_synthetic_beta(0.06, 9.5, 0.05, 1.0).is_err());
    }

    #[test]
    fn descriptor_satisfies_defining_relation() {
        let d = SyntheticBathDescriptor::new(0.05, 20.0, 1.0, 10.5).unwrap();
        assert_eq!(d.e_s, 9.5);
        assert_eq!(d.beta_s, (d.beta_h * d.e_h - d.beta_c * d.e_c) / d.e_s);
    }

    #[test]
    fn clausius_and_production_arithmetic() {
        assert_eq!(entropy_flux_clausius(3.0, 0.0), 0.0);
        assert!((entropy_flux_clausius(-1.0, 0.002) + 0.002).abs() < 1e-18);
        assert_eq!(entropy_production(0.2, 0.2, 1.0), 0.0);
        assert!(entropy_production(-0.5, 0.5, 0.01) > 0.0);
    }

    #[test]
    fn efficiency_arithmetic() {
        let heat = BTreeMap::from([("L".to_string(), 0.6), ("W".to_string(), 0.4)]);
        let e = efficiencies(&heat, -1.0).unwrap();
        assert!((e.per_group["L"] - 5.0 / 3.0).abs() < 1e-14);
        assert!((e.per_group["W"] - 2.5).abs() < 1e-14);
        assert!((e.total - 1.0).abs() < 1e-14);
        assert!(e.engine_regime);

        let heat = BTreeMap::from([("L".to_string(), -0.6), ("W".to_string(), 0.4)]);
        assert!(!efficiencies(&heat, 0.2).unwrap().engine_regime);

        let heat = BTreeMap::from([("L".to_string(), 0.6), ("W".to_string(), 0.5)]);
        assert!(matches!(
            efficiencies(&heat, -1.0),
            Err(Error::InvariantBreach(_))
        ));
    }

    #[test]
    fn entropy_values() {
        let pure = DensityMatrix::from_populations(&[0.0, 1.0, 0.0]).unwrap();
        assert!(von_neumann_entropy(&pure) < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(4);
        assert!((von_neumann_entropy(&mixed) - 4f64.ln()).abs() < 1e-13);
        let rho = DensityMatrix::from_populations(&[0.7, 0.2, 0.1]).unwrap();
        let expected: f64 = -[0.7f64, 0.2, 0.1].iter().map(|p| p * p.ln()).sum::<f64>();
        assert!((von_neumann_entropy(&rho) - expected).abs() < 1e-13);
    }

    #[test]
    fn power_vanishes_for_commuting_interaction() {
        let h = Operator::from_real_diagonal(&[0.0, 1.0, 2.0]);
        let v = Operator::from_real_diagonal(&[0.3, -0.1, 0.0]);
        let rho = DensityMatrix::maximally_mixed(3);
        assert_eq!(power(&rho, &v, &h).unwrap(), 0.0);
    }
}
