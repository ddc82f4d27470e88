//! Lindblad generators, time evolution and steady states.
//!
//! The generator is
//! `dρ/dt = i[ρ, H] + Σ_X Γ_X (N_X + 1) D[A_X](ρ) + Γ_X N_X D[A_X†](ρ)`
//! with `D[A](ρ) = AρA† − ½{A†A, ρ}`.
//!
//! Superoperator matrices act on column-stacked vectors,
//! `vec(ρ)[i + j·d] = ρ[i, j]`, so that `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{kron, DensityMatrix, Operator, C64, I, ONE, ZERO};
use crate::tolerance;

/// Bose-Einstein occupation `1 / (exp(β E) − 1)`.
pub fn bose_occupation(beta: f64, gap: f64) -> Result<f64> {
    if !(gap > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gap must be positive, got {gap}"
        )));
    }
    let x = beta * gap;
    if x == 0.0 {
        return Err(Error::SingularOccupation(x));
    }
    Ok(1.0 / x.exp_m1())
}

/// One dissipative coupling to a thermal bath.
#[derive(Clone, Debug)]
pub struct JumpChannel {
    pub label: String,
    /// Lowering operator on the full Hilbert space.
    pub a: Operator,
    pub gamma: f64,
    pub occupation: f64,
    pub beta: f64,
    pub gap: f64,
}

impl JumpChannel {
    /// Builds a channel whose occupation is the Bose factor of `(beta, gap)`.
    pub fn thermal(label: &str, a: Operator, gamma: f64, beta: f64, gap: f64) -> Result<Self> {
        let ch = Self {
            label: label.to_string(),
            a,
            gamma,
            occupation: bose_occupation(beta, gap)?,
            beta,
            gap,
        };
        ch.validate()?;
        Ok(ch)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "channel {}: rate must be positive",
                self.label
            )));
        }
        if !(self.gap > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "channel {}: gap must be positive",
                self.label
            )));
        }
        if !(self.occupation >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "channel {}: occupation must be non-negative",
                self.label
            )));
        }
        if self.beta * self.gap > 0.0 {
            let n = bose_occupation(self.beta, self.gap)?;
            if (n - self.occupation).abs() > 1e-12 * n.max(1.0) {
                return Err(Error::InvalidParameter(format!(
                    "channel {}: occupation {} inconsistent with beta={}, gap={}",
                    self.label, self.occupation, self.beta, self.gap
                )));
            }
        }
        Ok(())
    }

    fn emission_rate(&self) -> f64 {
        self.gamma * (self.occupation + 1.0)
    }

    fn absorption_rate(&self) -> f64 {
        self.gamma * self.occupation
    }
}

/// `D[A](ρ) = AρA† − ½{A†A, ρ}`.
fn dissipator(a: &Operator, a_dag: &Operator, rho: &Operator) -> Operator {
    let ada = a_dag * a;
    &(&(a * rho) * a_dag) - &ada.anticommutator(rho).scale_real(0.5)
}

/// Action of one channel's Lindblad superoperator on `rho`.
pub fn apply_lso(ch: &JumpChannel, rho: &Operator) -> Result<Operator> {
    rho.ensure_dim(ch.a.dim())?;
    let a_dag = ch.a.adjoint();
    let down = dissipator(&ch.a, &a_dag, rho).scale_real(ch.emission_rate());
    let up = dissipator(&a_dag, &ch.a, rho).scale_real(ch.absorption_rate());
    Ok(down + up)
}

/// A named set of channels whose combined action defines one heat current.
#[derive(Clone, Debug)]
pub struct ChannelGroup {
    pub label: String,
    pub channels: Vec<String>,
    /// Inverse temperature attributed to the group (synthetic for qutrit
    /// pairs), used by the Clausius entropy flux and entropy production.
    pub beta: f64,
}

/// A fully specified master equation.
#[derive(Clone, Debug)]
pub struct SystemSpec {
    pub dim: usize,
    /// Bare Hamiltonian `H_0` used in flux formulas.
    pub h_base: Operator,
    /// Generator of the unitary part of the dynamics.
    pub h_frame: Operator,
    /// Interaction or drive operator used for power.
    pub v_int: Option<Operator>,
    pub channels: Vec<JumpChannel>,
    pub groups: Vec<ChannelGroup>,
    /// Local Hamiltonians embedded in the full space, summing to `h_base`.
    pub local_hamiltonians: Vec<(String, Operator)>,
}

impl SystemSpec {
    pub fn validate(&self) -> Result<()> {
        let d = self.dim;
        self.h_base.ensure_dim(d)?;
        self.h_frame.ensure_dim(d)?;
        for h in [&self.h_base, &self.h_frame]
            .into_iter()
            .chain(self.v_int.iter())
            .chain(self.local_hamiltonians.iter().map(|(_, h)| h))
        {
            h.ensure_dim(d)?;
            let deviation = h.hermiticity_error();
            if deviation > tolerance::HERMITIAN {
                return Err(Error::NotHermitian { deviation });
            }
        }
        for ch in &self.channels {
            ch.a.ensure_dim(d)?;
            ch.validate()?;
        }
        for g in &self.groups {
            for label in &g.channels {
                if !self.channels.iter().any(|c| &c.label == label) {
                    return Err(Error::InvalidParameter(format!(
                        "group {} references unknown channel {label}",
                        g.label
                    )));
                }
            }
        }
        if !self.local_hamiltonians.is_empty() {
            let mut total = Operator::zeros(d);
            for (_, h) in &self.local_hamiltonians {
                total += h;
            }
            if total.max_abs_diff(&self.h_base) > 1e-12 {
                return Err(Error::InvalidParameter(
                    "local Hamiltonians do not sum to the base Hamiltonian".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn group(&self, label: &str) -> Result<&ChannelGroup> {
        self.groups
            .iter()
            .find(|g| g.label == label)
            .ok_or_else(|| Error::UnknownGroup(label.to_string()))
    }

    pub fn channel(&self, label: &str) -> Result<&JumpChannel> {
        self.channels
            .iter()
            .find(|c| c.label == label)
            .ok_or_else(|| Error::UnknownGroup(label.to_string()))
    }

    pub fn local_hamiltonian(&self, label: &str) -> Result<&Operator> {
        self.local_hamiltonians
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, h)| h)
            .ok_or_else(|| Error::UnknownGroup(label.to_string()))
    }

    /// Combined dissipator of the channels in `group`.
    pub fn apply_group(&self, group: &str, rho: &Operator) -> Result<Operator> {
        let g = self.group(group)?;
        let mut out = Operator::zeros(self.dim);
        for label in &g.channels {
            out += &apply_lso(self.channel(label)?, rho)?;
        }
        Ok(out)
    }

    /// Unitary part `i[ρ, H_frame]`.
    pub fn apply_unitary(&self, rho: &Operator) -> Result<Operator> {
        rho.ensure_dim(self.dim)?;
        Ok(rho.commutator(&self.h_frame).scale(I))
    }
}

/// Full generator `i[ρ, H_frame] + Σ_ch L_ch(ρ)`.
pub fn liouvillian_action(spec: &SystemSpec, rho: &Operator) -> Result<Operator> {
    let mut out = spec.apply_unitary(rho)?;
    for ch in &spec.channels {
        out += &apply_lso(ch, rho)?;
    }
    Ok(out)
}

fn left_mul(a: &Operator) -> DMatrix<C64> {
    // vec(Aρ) = (I ⊗ A) vec(ρ)
    kron(&Operator::identity(a.dim()), a).into_matrix()
}

fn right_mul(b: &Operator) -> DMatrix<C64> {
    // vec(ρB) = (Bᵀ ⊗ I) vec(ρ)
    kron(&b.transpose(), &Operator::identity(b.dim())).into_matrix()
}

fn dissipator_matrix(a: &Operator) -> DMatrix<C64> {
    let a_dag = a.adjoint();
    let ada = &a_dag * a;
    let sandwich = kron(&a.conj(), a).into_matrix();
    sandwich - (left_mul(&ada) + right_mul(&ada)).map(|z| z * 0.5)
}

/// Superoperator matrix of the generator in the column-stacking convention.
pub fn build_liouvillian_matrix(spec: &SystemSpec) -> DMatrix<C64> {
    let h = &spec.h_frame;
    let mut l = (right_mul(h) - left_mul(h)).map(|z| z * I);
    for ch in &spec.channels {
        l += dissipator_matrix(&ch.a) * C64::from(ch.emission_rate());
        if ch.absorption_rate() != 0.0 {
            l += dissipator_matrix(&ch.a.adjoint()) * C64::from(ch.absorption_rate());
        }
    }
    l
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SolveMethod {
    NullSpace,
    LongTimeIntegration,
}

#[derive(Clone, Debug)]
pub struct SteadyState {
    pub sigma: DensityMatrix,
    /// `‖L(σ)‖_max`.
    pub residual: f64,
    pub method: SolveMethod,
}

/// Largest elementwise modulus of the generator applied to `sigma`.
pub fn generator_residual(spec: &SystemSpec, sigma: &Operator) -> Result<f64> {
    Ok(liouvillian_action(spec, sigma)?.max_abs())
}

/// Singular values of the Liouvillian matrix, ascending.
pub fn liouvillian_singular_values(spec: &SystemSpec) -> Vec<f64> {
    let l = build_liouvillian_matrix(spec);
    let mut sv: Vec<f64> = l.singular_values().iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    sv
}

fn finish_steady_state(
    spec: &SystemSpec,
    candidate: &Operator,
    method: SolveMethod,
) -> Result<SteadyState> {
    let h = candidate.hermitian_part();
    let tr = h.trace().re;
    if !(tr.is_finite() && tr.abs() > 0.0) {
        return Err(Error::SingularSystem);
    }
    let h = h.scale_real(1.0 / tr);
    let sigma = match DensityMatrix::new(h.clone()) {
        Ok(s) => s,
        Err(Error::InvalidDensityMatrix(_)) => {
            let min = crate::operator::hermitian_eig(&h)?.eigenvalues[0];
            return Err(Error::PositivityViolation(min));
        }
        Err(e) => return Err(e),
    };
    let residual = generator_residual(spec, sigma.op())?;
    if residual > tolerance::STEADY_STATE_RESIDUAL {
        return Err(Error::ResidualTooLarge(residual));
    }
    Ok(SteadyState {
        sigma,
        residual,
        method,
    })
}

/// Steady state from the trace-constrained linear system.
///
/// The first row of the Liouvillian matrix is replaced by `vec(I)†`, which
/// encodes `Tr σ = 1`; this is valid because the rows belonging to diagonal
/// entries sum to zero for any trace-preserving generator.
pub fn solve_steady_state(spec: &SystemSpec) -> Result<SteadyState> {
    let d = spec.dim;
    let l = build_liouvillian_matrix(spec);

    let mut sv: Vec<f64> = l.singular_values().iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    if sv.len() > 1 && sv[1] <= tolerance::UNIQUENESS_GAP {
        return Err(Error::NonUniqueSteadyState(sv[1]));
    }

    let mut m = l;
    for col in 0..d * d {
        m[(0, col)] = ZERO;
    }
    for i in 0..d {
        m[(0, i + i * d)] = ONE;
    }
    let mut rhs = DVector::from_element(d * d, ZERO);
    rhs[0] = ONE;
    let x = m.lu().solve(&rhs).ok_or(Error::SingularSystem)?;
    let sigma = Operator::from_vectorized(d, x.as_slice())?;
    finish_steady_state(spec, &sigma, SolveMethod::NullSpace)
}

/// Time step satisfying `dt ≤ 0.1 / max(|H_frame|_max, Γ(N+1))`.
pub fn stable_time_step(spec: &SystemSpec) -> f64 {
    let scale = spec
        .channels
        .iter()
        .map(JumpChannel::emission_rate)
        .fold(spec.h_frame.max_abs(), f64::max);
    if scale > 0.0 {
        0.1 / scale
    } else {
        0.1
    }
}

/// One classical fourth-order Runge-Kutta step of the generator.
pub fn rk4_step(spec: &SystemSpec, rho: &Operator, dt: f64) -> Result<Operator> {
    let f = |x: &Operator| liouvillian_action(spec, x);
    let k1 = f(rho)?;
    let k2 = f(&(rho + &k1.scale_real(dt / 2.0)))?;
    let k3 = f(&(rho + &k2.scale_real(dt / 2.0)))?;
    let k4 = f(&(rho + &k3.scale_real(dt)))?;
    let incr = (k1 + k4 + (k2 + k3).scale_real(2.0)).scale_real(dt / 6.0);
    Ok(rho + &incr)
}

/// Matrix of one RK4 step for the linear generator `L`:
/// `I + hL + (hL)²/2 + (hL)³/6 + (hL)⁴/24`.
pub fn rk4_step_matrix(liouvillian: &DMatrix<C64>, dt: f64) -> DMatrix<C64> {
    let n = liouvillian.nrows();
    let id = DMatrix::<C64>::identity(n, n);
    let hl = liouvillian.map(|z| z * dt);
    // Horner form of the truncated exponential.
    let mut acc = &id + &hl.map(|z| z / 4.0);
    acc = &id + &hl * acc.map(|z| z / 3.0);
    acc = &id + &hl * acc.map(|z| z / 2.0);
    &id + &hl * acc
}

fn renormalize(spec: &SystemSpec, v: &DVector<C64>) -> Result<DVector<C64>> {
    let rho = Operator::from_vectorized(spec.dim, v.as_slice())?;
    let tr = rho.trace();
    if !(tr.re.is_finite()) || (tr - ONE).norm() > tolerance::TRACE_DRIFT {
        return Err(Error::Unstable(format!("trace drifted to {tr}")));
    }
    if rho.max_abs() > 1.0 + tolerance::TRACE_DRIFT {
        return Err(Error::Unstable(format!(
            "entry modulus {} exceeds density-matrix bound",
            rho.max_abs()
        )));
    }
    let h = rho.hermitian_part().scale_real(1.0 / tr.re);
    Ok(DVector::from_vec(h.vectorize()))
}

/// Integrates the master equation with fixed-step RK4 from `rho0` to `t_final`.
///
/// The number of steps is `ceil(t_final / dt)` with the step shrunk to land
/// on `t_final` exactly. Because the generator is linear and time
/// independent, `n` RK4 steps equal the `n`-th power of the one-step matrix;
/// the power is accumulated by binary exponentiation and the state is
/// symmetrized and renormalized after every applied block.
pub fn evolve(
    spec: &SystemSpec,
    rho0: &DensityMatrix,
    dt: f64,
    t_final: f64,
) -> Result<DensityMatrix> {
    rho0.op().ensure_dim(spec.dim)?;
    if !(dt > 0.0) || !(t_final >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need dt > 0 and t_final >= 0 (dt={dt}, t_final={t_final})"
        )));
    }
    let mut steps = (t_final / dt).ceil() as u64;
    if steps == 0 {
        return Ok(rho0.clone());
    }
    let h = t_final / steps as f64;
    let mut block = rk4_step_matrix(&build_liouvillian_matrix(spec), h);
    let mut state = DVector::from_vec(rho0.op().vectorize());
    loop {
        if steps & 1 == 1 {
            state = renormalize(spec, &(&block * &state))?;
        }
        steps >>= 1;
        if steps == 0 {
            break;
        }
        block = &block * &block;
    }
    let rho = Operator::from_vectorized(spec.dim, state.as_slice())?;
    DensityMatrix::normalized(&rho)
}

/// Default horizon for the integration oracle: many multiples of the slowest bare decay time.
pub fn relaxation_horizon(spec: &SystemSpec) -> f64 {
    let slowest = spec
        .channels
        .iter()
        .map(|c| c.gamma)
        .fold(f64::INFINITY, f64::min);
    if slowest.is_finite() {
        400.0 / slowest
    } else {
        1.0
    }
}

/// Steady state from long-time RK4 integration starting at the maximally mixed state.
pub fn integrate_steady_state(spec: &SystemSpec) -> Result<SteadyState> {
    let rho0 = DensityMatrix::maximally_mixed(spec.dim);
    let rho = evolve(
        spec,
        &rho0,
        stable_time_step(spec),
        relaxation_horizon(spec),
    )?;
    finish_steady_state(spec, rho.op(), SolveMethod::LongTimeIntegration)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qutrit_decay_channel(n_gamma: f64, occupation: f64) -> JumpChannel {
        JumpChannel {
            label: "X".into(),
            a: Operator::ket_bra(3, 0, 2),
            gamma: n_gamma,
            occupation,
            beta: -1.0,
            gap: 1.0,
        }
    }

    #[test]
    fn occupation_values() {
        assert!((bose_occupation(1.0, 2f64.ln()).unwrap() - 1.0).abs() < 1e-14);
        let frozen = bose_occupation(10.0, 10.0).unwrap();
        assert!(frozen > 0.0 && frozen < 4e-44);
        let n = bose_occupation(0.05, 10.0).unwrap();
        assert!((n - 1.0 / (0.5f64.exp() - 1.0)).abs() < 1e-14);
        assert!((n - 1.541_494_08).abs() < 1e-8);
        assert!(bose_occupation(-1.0, 1.0).unwrap() < -1.0);
        assert!(matches!(
            bose_occupation(0.0, 1.0),
            Err(Error::SingularOccupation(_))
        ));
    }

    #[test]
    fn thermal_channel_rejects_inconsistent_occupation() {
        let mut ch = JumpChannel::thermal("H", Operator::ket_bra(3, 0, 2), 0.1, 1.0, 1.0).unwrap();
        ch.occupation += 0.1;
        assert!(ch.validate().is_err());
    }

    #[test]
    fn pure_decay_of_excited_level() {
        let gamma = 0.3;
        let ch = qutrit_decay_channel(gamma, 0.0);
        let rho = Operator::projector(3, 2);
        let out = apply_lso(&ch, &rho).unwrap();
        let expected = (Operator::projector(3, 0) - Operator::projector(3, 2)).scale_real(gamma);
        assert!(out.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn detailed_balance_fixed_point() {
        // p_upper / p_lower = N / (N + 1) for one channel alone.
        let n = 0.7;
        let ch = qutrit_decay_channel(0.2, n);
        let p_lower = (n + 1.0) / (2.0 * n + 1.0);
        let p_upper = n / (2.0 * n + 1.0);
        let rho = Operator::from_real_diagonal(&[p_lower, 0.0, p_upper]);
        let out = apply_lso(&ch, &rho).unwrap();
        assert!(out.max_abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let ch = qutrit_decay_channel(0.2, 0.1);
        assert!(apply_lso(&ch, &Operator::identity(2)).is_err());
    }

    fn empty_spec(h: Operator) -> SystemSpec {
        SystemSpec {
            dim: h.dim(),
            h_base: h.clone(),
            h_frame: h,
            v_int: None,
            channels: vec![],
            groups: vec![],
            local_hamiltonians: vec![],
        }
    }

    #[test]
    fn commuting_state_is_stationary() {
        let spec = empty_spec(Operator::from_real_diagonal(&[0.0, 1.0, 3.0]));
        let rho = Operator::from_real_diagonal(&[0.5, 0.3, 0.2]);
        assert!(liouvillian_action(&spec, &rho).unwrap().max_abs() < 1e-15);

        let rho0 = DensityMatrix::new(rho).unwrap();
        let out = evolve(&spec, &rho0, 0.01, 5.0).unwrap();
        assert!(out.op().max_abs_diff(rho0.op()) < 1e-12);
    }

    #[test]
    fn zero_spec_has_zero_matrix() {
        let spec = empty_spec(Operator::zeros(3));
        assert!(build_liouvillian_matrix(&spec)
            .iter()
            .all(|z| z.norm() == 0.0));
    }

    #[test]
    fn propagator_matches_explicit_steps() {
        let mut spec = empty_spec(Operator::from_real_diagonal(&[0.0, 1.0, 2.5]));
        spec.h_frame += &(Operator::ket_bra(3, 0, 1) + Operator::ket_bra(3, 1, 0)).scale_real(0.3);
        spec.channels
            .push(JumpChannel::thermal("H", Operator::ket_bra(3, 0, 2), 0.2, 0.5, 2.5).unwrap());
        let rho0 = DensityMatrix::maximally_mixed(3);
        let dt = 0.01;
        let mut rho = rho0.op().clone();
        for _ in 0..37 {
            rho = rk4_step(&spec, &rho, dt).unwrap();
        }
        let fast = evolve(&spec, &rho0, dt, 0.37).unwrap();
        assert!(fast.op().max_abs_diff(&rho) < 1e-13);
    }

    #[test]
    fn evolve_rejects_bad_step() {
        let spec = empty_spec(Operator::zeros(2));
        let rho0 = DensityMatrix::maximally_mixed(2);
        assert!(evolve(&spec, &rho0, 0.0, 1.0).is_err());
    }

    #[test]
    fn oversized_step_is_detected() {
        let mut spec = empty_spec(Operator::from_real_diagonal(&[0.0, 1.0, 2.5]));
        spec.channels
            .push(JumpChannel::thermal("H", Operator::ket_bra(3, 0, 2), 5.0, 0.5, 2.5).unwrap());
        let rho0 = DensityMatrix::from_populations(&[0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            evolve(&spec, &rho0, 10.0, 1000.0),
            Err(Error::Unstable(_))
        ));
    }

    #[test]
    fn isolated_system_has_degenerate_steady_state() {
        let spec = empty_spec(Operator::from_real_diagonal(&[0.0, 1.0]));
        assert!(matches!(
            solve_steady_state(&spec),
            Err(Error::NonUniqueSteadyState(_))
        ));
    }
}
