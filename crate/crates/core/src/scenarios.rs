//! Builders for the qutrit and qubit bath configurations.
//!
//! Qutrit Hamiltonians are `E_S |2><2| + E_H |3><3|` with `E_S = E_H − E_C`.
//! The hot bath couples `|1>`-`|3>` through `A_H = |1><3|`, the cold bath
//! couples `|2>`-`|3>` through `A_C = |2><3|`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lindblad::{ChannelGroup, JumpChannel, SystemSpec};
use crate::operator::{embed, kron, Operator, C64};
use crate::thermo::{hot_energy_for_synthetic_beta, synthetic_beta};

fn qutrit_hamiltonian(e_s: f64, e_h: f64) -> Operator {
    Operator::from_real_diagonal(&[0.0, e_s, e_h])
}

fn hot_jump() -> Operator {
    Operator::ket_bra(3, 0, 2)
}

fn cold_jump() -> Operator {
    Operator::ket_bra(3, 1, 2)
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive, got {x}"
        )))
    }
}

fn finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be finite, got {x}"
        )))
    }
}

fn unknown(scenario: &str, name: &str) -> Error {
    Error::InvalidParameter(format!("`{name}` is not a tunable parameter of {scenario}"))
}

/// One qutrit between a hot and a cold bath.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingleQutritParams {
    pub beta_h: f64,
    pub beta_c: f64,
    pub e_h: f64,
    pub e_c: f64,
    pub gamma_h: f64,
    pub gamma_c: f64,
}

impl Default for SingleQutritParams {
    fn default() -> Self {
        Self {
            beta_h: 0.05,
            beta_c: 1.0,
            e_h: 20.0,
            e_c: 10.5,
            gamma_h: 0.001,
            gamma_c: 0.001,
        }
    }
}

impl SingleQutritParams {
    pub const TUNABLE: &'static [&'static str] = &[
        "beta_h", "beta_c", "e_h", "e_c", "gamma_h", "gamma_c", "beta_s",
    ];

    pub fn validate(&self) -> Result<()> {
        positive("beta_h", self.beta_h)?;
        positive("beta_c", self.beta_c)?;
        positive("gamma_h", self.gamma_h)?;
        positive("gamma_c", self.gamma_c)?;
        positive("e_c", self.e_c)?;
        if !(self.e_h > self.e_c) {
            return Err(Error::InvalidParameter("need e_h > e_c".into()));
        }
        if self.beta_h > self.beta_c {
            return Err(Error::InvalidParameter("need beta_h <= beta_c".into()));
        }
        Ok(())
    }

    pub fn e_s(&self) -> f64 {
        self.e_h - self.e_c
    }

    pub fn beta_s(&self) -> Result<f64> {
        synthetic_beta(self.beta_h, self.e_h, self.beta_c, self.e_c)
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "beta_h" => self.beta_h = value,
            "beta_c" => self.beta_c = value,
            "e_h" => self.e_h = value,
            "e_c" => self.e_c = value,
            "gamma_h" => self.gamma_h = value,
            "gamma_c" => self.gamma_c = value,
            "beta_s" => {
                let e_s = self.e_s();
                self.e_h = hot_energy_for_synthetic_beta(value, e_s, self.beta_h, self.beta_c)?;
                self.e_c = self.e_h - e_s;
            }
            _ => return Err(unknown("single", name)),
        }
        Ok(())
    }
}

pub fn build_single_qutrit(p: &SingleQutritParams) -> Result<SystemSpec> {
    p.validate()?;
    let h = qutrit_hamiltonian(p.e_s(), p.e_h);
    let spec = SystemSpec {
        dim: 3,
        h_base: h.clone(),
        h_frame: h.clone(),
        v_int: None,
        channels: vec![
            JumpChannel::thermal("H", hot_jump(), p.gamma_h, p.beta_h, p.e_h)?,
            JumpChannel::thermal("C", cold_jump(), p.gamma_c, p.beta_c, p.e_c)?,
        ],
        groups: vec![
            ChannelGroup {
                label: "H".into(),
                channels: vec!["H".into()],
                beta: p.beta_h,
            },
            ChannelGroup {
                label: "C".into(),
                channels: vec!["C".into()],
                beta: p.beta_c,
            },
        ],
        local_hamiltonians: vec![("S".into(), h)],
    };
    spec.validate()?;
    Ok(spec)
}

/// Two qutrits, each a synthetic bath, exchanging energy through
/// `(λ + iγ)|12><21| + h.c.`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoQutritParams {
    pub beta_h: f64,
    pub beta_c: f64,
    pub gamma_h: f64,
    pub gamma_c: f64,
    /// Common `|1>`-`|2>` gap of both qutrits.
    pub e_s: f64,
    /// Level-3 energy of the left qutrit.
    pub e_lh: f64,
    /// Level-3 energy of the right qutrit.
    pub e_rh: f64,
    pub lambda: f64,
    pub gamma_int: f64,
}

impl Default for TwoQutritParams {
    fn default() -> Self {
        Self {
            beta_h: 0.05,
            beta_c: 1.0,
            gamma_h: 0.001,
            gamma_c: 0.001,
            e_s: 9.5,
            e_lh: 10.0,
            e_rh: 10.0,
            lambda: 1.0,
            gamma_int: 0.0,
        }
    }
}

impl TwoQutritParams {
    pub const TUNABLE: &'static [&'static str] = &[
        "beta_h",
        "beta_c",
        "gamma_h",
        "gamma_c",
        "e_s",
        "e_lh",
        "e_rh",
        "lambda",
        "gamma_int",
        "beta_ls",
        "beta_rs",
    ];

    /// Default couplings with level-3 energies tuned to the requested synthetic temperatures.
    pub fn with_synthetic_betas(beta_ls: f64, beta_rs: f64) -> Result<Self> {
        let mut p = Self::default();
        p.set("beta_ls", beta_ls)?;
        p.set("beta_rs", beta_rs)?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        positive("beta_h", self.beta_h)?;
        positive("beta_c", self.beta_c)?;
        positive("gamma_h", self.gamma_h)?;
        positive("gamma_c", self.gamma_c)?;
        positive("e_s", self.e_s)?;
        finite("lambda", self.lambda)?;
        finite("gamma_int", self.gamma_int)?;
        if !(self.e_lh > self.e_s && self.e_rh > self.e_s) {
            return Err(Error::InvalidParameter("need e_lh, e_rh > e_s".into()));
        }
        Ok(())
    }

    pub fn beta_ls(&self) -> Result<f64> {
        synthetic_beta(self.beta_h, self.e_lh, self.beta_c, self.e_lh - self.e_s)
    }

    pub fn beta_rs(&self) -> Result<f64> {
        synthetic_beta(self.beta_h, self.e_rh, self.beta_c, self.e_rh - self.e_s)
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "beta_h" => self.beta_h = value,
            "beta_c" => self.beta_c = value,
            "gamma_h" => self.gamma_h = value,
            "gamma_c" => self.gamma_c = value,
            "e_s" => self.e_s = value,
            "e_lh" => self.e_lh = value,
            "e_rh" => self.e_rh = value,
            "lambda" => self.lambda = value,
            "gamma_int" => self.gamma_int = value,
            "beta_ls" => {
                self.e_lh =
                    hot_energy_for_synthetic_beta(value, self.e_s, self.beta_h, self.beta_c)?
            }
            "beta_rs" => {
                self.e_rh =
                    hot_energy_for_synthetic_beta(value, self.e_s, self.beta_h, self.beta_c)?
            }
            _ => return Err(unknown("two-qutrit", name)),
        }
        Ok(())
    }

    /// Single-qutrit parameters of the left (`left = true`) or right qutrit.
    pub fn qutrit(&self, left: bool) -> SingleQutritParams {
        let e_h = if left { self.e_lh } else { self.e_rh };
        SingleQutritParams {
            beta_h: self.beta_h,
            beta_c: self.beta_c,
            e_h,
            e_c: e_h - self.e_s,
            gamma_h: self.gamma_h,
            gamma_c: self.gamma_c,
        }
    }
}

/// Basis index of `|m n>` for levels numbered from one.
pub fn product_index(levels: &[usize], dims: &[usize]) -> usize {
    levels
        .iter()
        .zip(dims)
        .fold(0, |acc, (&level, &d)| acc * d + (level - 1))
}

pub fn build_two_qutrit(p: &TwoQutritParams) -> Result<SystemSpec> {
    p.validate()?;
    let dims = [3, 3];
    let h_left = embed(&qutrit_hamiltonian(p.e_s, p.e_lh), 0, &dims)?;
    let h_right = embed(&qutrit_hamiltonian(p.e_s, p.e_rh), 1, &dims)?;
    let h0 = &h_left + &h_right;

    let i12 = product_index(&[1, 2], &dims);
    let i21 = product_index(&[2, 1], &dims);
    let h_in = Operator::ket_bra(9, i12, i21).scale(C64::new(p.lambda, p.gamma_int))
        + Operator::ket_bra(9, i21, i12).scale(C64::new(p.lambda, -p.gamma_int));
    let conservation = h_in.commutator(&h0).max_abs();
    if conservation > 1e-12 {
        return Err(Error::InvariantBreach(format!(
            "interaction does not conserve energy ([H_in, H_0] = {conservation:e})"
        )));
    }

    let left = p.qutrit(true);
    let right = p.qutrit(false);
    let spec = SystemSpec {
        dim: 9,
        h_frame: &h0 + &h_in,
        h_base: h0,
        v_int: Some(h_in),
        channels: vec![
            JumpChannel::thermal(
                "LH",
                embed(&hot_jump(), 0, &dims)?,
                p.gamma_h,
                p.beta_h,
                left.e_h,
            )?,
            JumpChannel::thermal(
                "LC",
                embed(&cold_jump(), 0, &dims)?,
                p.gamma_c,
                p.beta_c,
                left.e_c,
            )?,
            JumpChannel::thermal(
                "RH",
                embed(&hot_jump(), 1, &dims)?,
                p.gamma_h,
                p.beta_h,
                right.e_h,
            )?,
            JumpChannel::thermal(
                "RC",
                embed(&cold_jump(), 1, &dims)?,
                p.gamma_c,
                p.beta_c,
                right.e_c,
            )?,
        ],
        groups: vec![
            ChannelGroup {
                label: "L".into(),
                channels: vec!["LH".into(), "LC".into()],
                beta: p.beta_ls()?,
            },
            ChannelGroup {
                label: "R".into(),
                channels: vec!["RH".into(), "RC".into()],
                beta: p.beta_rs()?,
            },
        ],
        local_hamiltonians: vec![("L".into(), h_left), ("R".into(), h_right)],
    };
    spec.validate()?;
    Ok(spec)
}

/// `amplitude · e^{i ω t} |row><col|` in the product basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveTerm {
    pub row: usize,
    pub col: usize,
    pub amplitude: C64,
    pub frequency: f64,
}

/// A Hermitian, periodically modulated coupling on a product space.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicDrive {
    pub dims: Vec<usize>,
    pub terms: Vec<DriveTerm>,
}

impl PeriodicDrive {
    /// `amplitude (|u><v| e^{iωt} + |v><u| e^{−iωt})` with real amplitude.
    pub fn single_pair(dims: Vec<usize>, u: usize, v: usize, amplitude: f64, omega: f64) -> Self {
        let a = C64::new(amplitude, 0.0);
        Self {
            dims,
            terms: vec![
                DriveTerm {
                    row: u,
                    col: v,
                    amplitude: a,
                    frequency: omega,
                },
                DriveTerm {
                    row: v,
                    col: u,
                    amplitude: a.conj(),
                    frequency: -omega,
                },
            ],
        }
    }
}

/// Counter-rotation generator `H_R` and the stationary coupling `V`.
#[derive(Clone, Debug)]
pub struct RotatingFrame {
    pub generator: Operator,
    pub coupling: Operator,
}

fn split_index(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut levels = vec![0; dims.len()];
    for (k, &d) in dims.iter().enumerate().rev() {
        levels[k] = index % d;
        index /= d;
    }
    levels
}

/// Finds a diagonal `H_R`, additive over subsystems, for which
/// `e^{iH_R t} H_drive(t) e^{−iH_R t}` is time independent.
///
/// The drive must couple a single pair of `H_0` eigenstates. The frequency
/// is split evenly among the subsystems whose level changes across the pair;
/// levels not touched by the drive get zero.
pub fn choose_rotating_frame(h0: &Operator, drive: &PeriodicDrive) -> Result<RotatingFrame> {
    let dim: usize = drive.dims.iter().product();
    h0.ensure_dim(dim)?;
    if !h0.is_diagonal(1e-12) {
        return Err(Error::NoValidFrame(
            "bare Hamiltonian must be diagonal in the product basis".into(),
        ));
    }
    let first = *drive
        .terms
        .iter()
        .find(|t| t.frequency >= 0.0)
        .or(drive.terms.first())
        .ok_or_else(|| Error::NoValidFrame("drive has no terms".into()))?;
    let pair = |t: &DriveTerm| (t.row.min(t.col), t.row.max(t.col));
    for t in &drive.terms {
        if t.row >= dim || t.col >= dim || t.row == t.col {
            return Err(Error::NoValidFrame(format!(
                "term ({}, {}) is not an off-diagonal element",
                t.row, t.col
            )));
        }
        if pair(t) != pair(&first) {
            return Err(Error::NoValidFrame(
                "drive couples more than one pair of levels".into(),
            ));
        }
        let partner = drive.terms.iter().any(|s| {
            s.row == t.col
                && s.col == t.row
                && (s.amplitude - t.amplitude.conj()).norm() <= 1e-14
                && s.frequency == -t.frequency
        });
        if !partner {
            return Err(Error::InvalidParameter("drive is not Hermitian".into()));
        }
    }

    let from = split_index(first.row, &drive.dims);
    let to = split_index(first.col, &drive.dims);
    let changed: Vec<usize> = (0..drive.dims.len())
        .filter(|&k| from[k] != to[k])
        .collect();
    let share = first.frequency / changed.len() as f64;
    let mut generator = Operator::zeros(dim);
    for &k in &changed {
        let mut local = vec![0.0; drive.dims[k]];
        local[to[k]] = share;
        generator += &embed(&Operator::from_real_diagonal(&local), k, &drive.dims)?;
    }

    let mut coupling = Operator::zeros(dim);
    for t in &drive.terms {
        let phase = generator.get(t.row, t.row).re - generator.get(t.col, t.col).re + t.frequency;
        if phase.abs() > 1e-12 * t.frequency.abs().max(1.0) {
            return Err(Error::NoValidFrame(format!(
                "element ({}, {}) keeps frequency {phase}",
                t.row, t.col
            )));
        }
        coupling += &Operator::ket_bra(dim, t.row, t.col).scale(t.amplitude);
    }
    if generator.commutator(h0).max_abs() > 1e-12 {
        return Err(Error::NoValidFrame(
            "frame generator does not commute with H_0".into(),
        ));
    }
    Ok(RotatingFrame {
        generator,
        coupling,
    })
}

/// True when `e^{iGt} A e^{−iGt}` is `A` times a phase, so the dissipator
/// built from `A` is unchanged by the frame rotation.
pub fn frame_preserves_jump(generator: &Operator, a: &Operator) -> bool {
    let g = generator.real_diagonal();
    let n = a.dim();
    let mut shift: Option<f64> = None;
    for i in 0..n {
        for j in 0..n {
            if a.get(i, j).norm() == 0.0 {
                continue;
            }
            let d = g[i] - g[j];
            match shift {
                None => shift = Some(d),
                Some(s) if (s - d).abs() > 1e-12 => return false,
                _ => {}
            }
        }
    }
    true
}

fn rotating_spec(
    h0: Operator,
    frame: RotatingFrame,
    channels: Vec<JumpChannel>,
    groups: Vec<ChannelGroup>,
    local_hamiltonians: Vec<(String, Operator)>,
) -> Result<SystemSpec> {
    for ch in &channels {
        if !frame_preserves_jump(&frame.generator, &ch.a) {
            return Err(Error::NoValidFrame(format!(
                "rotation does not leave channel {} invariant",
                ch.label
            )));
        }
    }
    let spec = SystemSpec {
        dim: h0.dim(),
        h_frame: &(&h0 - &frame.generator) + &frame.coupling,
        h_base: h0,
        v_int: Some(frame.coupling),
        channels,
        groups,
        local_hamiltonians,
    };
    spec.validate()?;
    Ok(spec)
}

/// Qutrit `L` (synthetic bath) driven against qubit `W` through
/// `δ(|11><22| e^{iωt} + h.c.)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EngineParams {
    pub beta_h: f64,
    pub beta_c: f64,
    pub beta_w: f64,
    /// Qutrit `|1>`-`|2>` gap, equal to the qubit gap `E_W`.
    pub e_s: f64,
    /// Qutrit level-3 energy; `E_C = E_H − E_S`.
    pub e_h: f64,
    pub delta: f64,
    pub omega: f64,
    pub gamma_h: f64,
    pub gamma_c: f64,
    pub gamma_w: f64,
}

impl Default for EngineParams {
    fn default() -> Self {
        let mut p = Self {
            beta_h: 0.01,
            beta_c: 10.0,
            beta_w: 0.1,
            e_s: 5.0,
            e_h: 6.0,
            delta: 5.0,
            omega: 1.0,
            gamma_h: 0.001,
            gamma_c: 0.001,
            gamma_w: 0.001,
        };
        p.set("beta_sl", -0.5)
            .expect("default synthetic temperature is reachable");
        p
    }
}

impl EngineParams {
    pub const TUNABLE: &'static [&'static str] = &[
        "beta_h", "beta_c", "beta_w", "e_s", "e_h", "delta", "omega", "gamma_h", "gamma_c",
        "gamma_w", "beta_sl",
    ];

    pub fn e_c(&self) -> f64 {
        self.e_h - self.e_s
    }

    pub fn beta_sl(&self) -> Result<f64> {
        synthetic_beta(self.beta_h, self.e_h, self.beta_c, self.e_c())
    }

    pub fn validate(&self) -> Result<()> {
        positive("beta_h", self.beta_h)?;
        positive("beta_c", self.beta_c)?;
        positive("beta_w", self.beta_w)?;
        positive("e_s", self.e_s)?;
        positive("gamma_h", self.gamma_h)?;
        positive("gamma_c", self.gamma_c)?;
        positive("gamma_w", self.gamma_w)?;
        finite("delta", self.delta)?;
        finite("omega", self.omega)?;
        if !(self.e_h > self.e_s) {
            return Err(Error::InvalidParameter("need e_h > e_s".into()));
        }
        Ok(())
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "beta_h" => self.beta_h = value,
            "beta_c" => self.beta_c = value,
            "beta_w" => self.beta_w = value,
            "e_s" => self.e_s = value,
            "e_h" => self.e_h = value,
            "delta" => self.delta = value,
            "omega" => self.omega = value,
            "gamma_h" => self.gamma_h = value,
            "gamma_c" => self.gamma_c = value,
            "gamma_w" => self.gamma_w = value,
            "beta_sl" => {
                self.e_h = hot_energy_for_synthetic_beta(value, self.e_s, self.beta_h, self.beta_c)?
            }
            _ => return Err(unknown("engine", name)),
        }
        Ok(())
    }
}

pub fn build_engine(p: &EngineParams) -> Result<SystemSpec> {
    p.validate()?;
    let dims = vec![3, 2];
    let h_l = embed(&qutrit_hamiltonian(p.e_s, p.e_h), 0, &dims)?;
    let h_w = embed(&Operator::from_real_diagonal(&[0.0, p.e_s]), 1, &dims)?;
    let h0 = &h_l + &h_w;
    let drive = PeriodicDrive::single_pair(
        dims.clone(),
        product_index(&[1, 1], &dims),
        product_index(&[2, 2], &dims),
        p.delta,
        p.omega,
    );
    let frame = choose_rotating_frame(&h0, &drive)?;
    let channels = vec![
        JumpChannel::thermal(
            "LH",
            embed(&hot_jump(), 0, &dims)?,
            p.gamma_h,
            p.beta_h,
            p.e_h,
        )?,
        JumpChannel::thermal(
            "LC",
            embed(&cold_jump(), 0, &dims)?,
            p.gamma_c,
            p.beta_c,
            p.e_c(),
        )?,
        JumpChannel::thermal(
            "W",
            embed(&Operator::ket_bra(2, 0, 1), 1, &dims)?,
            p.gamma_w,
            p.beta_w,
            p.e_s,
        )?,
    ];
    let groups = vec![
        ChannelGroup {
            label: "L".into(),
            channels: vec!["LH".into(), "LC".into()],
            beta: p.beta_sl()?,
        },
        ChannelGroup {
            label: "W".into(),
            channels: vec!["W".into()],
            beta: p.beta_w,
        },
    ];
    rotating_spec(
        h0,
        frame,
        channels,
        groups,
        vec![("L".into(), h_l), ("W".into(), h_w)],
    )
}

/// A qutrit between hot and cold baths with `α(|1><2| e^{iωt} + h.c.)` drive.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DrivenQutritParams {
    pub beta_h: f64,
    pub beta_c: f64,
    pub gamma_h: f64,
    pub gamma_c: f64,
    pub e_h: f64,
    pub e_c: f64,
    pub alpha: f64,
    pub omega: f64,
}

impl Default for DrivenQutritParams {
    fn default() -> Self {
        Self {
            beta_h: 0.05,
            beta_c: 1.0,
            gamma_h: 0.001,
            gamma_c: 0.001,
            e_h: 20.0,
            e_c: 10.5,
            alpha: 0.001,
            omega: 9.5,
        }
    }
}

impl DrivenQutritParams {
    pub const TUNABLE: &'static [&'static str] = &[
        "beta_h", "beta_c", "gamma_h", "gamma_c", "e_h", "e_c", "alpha", "omega", "beta_s",
    ];

    fn qutrit(&self) -> SingleQutritParams {
        SingleQutritParams {
            beta_h: self.beta_h,
            beta_c: self.beta_c,
            e_h: self.e_h,
            e_c: self.e_c,
            gamma_h: self.gamma_h,
            gamma_c: self.gamma_c,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.qutrit().validate()?;
        finite("alpha", self.alpha)?;
        finite("omega", self.omega)
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "alpha" => self.alpha = value,
            "omega" => self.omega = value,
            _ => {
                let mut q = self.qutrit();
                q.set(name, value).map_err(|e| match e {
                    Error::InvalidParameter(m) if m.contains("tunable") => unknown("driven", name),
                    other => other,
                })?;
                self.beta_h = q.beta_h;
                self.beta_c = q.beta_c;
                self.e_h = q.e_h;
                self.e_c = q.e_c;
                self.gamma_h = q.gamma_h;
                self.gamma_c = q.gamma_c;
            }
        }
        Ok(())
    }
}

pub fn build_driven_qutrit(p: &DrivenQutritParams) -> Result<SystemSpec> {
    p.validate()?;
    let base = build_single_qutrit(&p.qutrit())?;
    let drive = PeriodicDrive::single_pair(vec![3], 0, 1, p.alpha, p.omega);
    let frame = choose_rotating_frame(&base.h_base, &drive)?;
    rotating_spec(
        base.h_base.clone(),
        frame,
        base.channels,
        base.groups,
        base.local_hamiltonians,
    )
}

/// `ρ_L ⊗ ρ_R` built from each qutrit's isolated Gibbs-ratio fixed point.
pub fn uncoupled_product_state(p: &TwoQutritParams) -> Result<Operator> {
    let l = single_qutrit_fixed_point(&p.qutrit(true))?;
    let r = single_qutrit_fixed_point(&p.qutrit(false))?;
    Ok(kron(
        &Operator::from_real_diagonal(&l),
        &Operator::from_real_diagonal(&r),
    ))
}

/// Populations with `p1/p3 = e^{β_H E_H}` and `p2/p3 = e^{β_C E_C}`.
///
/// Computed relative to the largest weight so that large exponents do not overflow.
pub fn single_qutrit_fixed_point(p: &SingleQutritParams) -> Result<[f64; 3]> {
    p.validate()?;
    let logs = [p.beta_h * p.e_h, p.beta_c * p.e_c, 0.0];
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let z: f64 = w.iter().sum();
    Ok([w[0] / z, w[1] / z, w[2] / z])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_index_convention() {
        assert_eq!(product_index(&[1, 2], &[3, 3]), 1);
        assert_eq!(product_index(&[2, 1], &[3, 3]), 3);
        assert_eq!(product_index(&[2, 2], &[3, 2]), 3);
        assert_eq!(split_index(3, &[3, 2]), vec![1, 1]);
    }

    #[test]
    fn engine_frame_splits_frequency() {
        let omega = 1.0;
        let delta = 5.0;
        let dims = vec![3, 2];
        let h0 = embed(&qutrit_hamiltonian(5.0, 6.0), 0, &dims).unwrap()
            + embed(&Operator::from_real_diagonal(&[0.0, 5.0]), 1, &dims).unwrap();
        let drive = PeriodicDrive::single_pair(dims.clone(), 0, 3, delta, omega);
        let frame = choose_rotating_frame(&h0, &drive).unwrap();
        let p2 = Operator::projector(3, 1);
        let q2 = Operator::projector(2, 1);
        let expected =
            (embed(&p2, 0, &dims).unwrap() + embed(&q2, 1, &dims).unwrap()).scale_real(omega / 2.0);
        assert!(frame.generator.max_abs_diff(&expected) < 1e-15);
        let v = (Operator::ket_bra(6, 0, 3) + Operator::ket_bra(6, 3, 0)).scale_real(delta);
        assert!(frame.coupling.max_abs_diff(&v) < 1e-15);
        assert!(frame.generator.commutator(&h0).max_abs() < 1e-12);
    }

    #[test]
    fn qutrit_frame_and_static_drive() {
        let h0 = qutrit_hamiltonian(9.5, 20.0);
        let drive = PeriodicDrive::single_pair(vec![3], 0, 1, 0.2, 9.5);
        let frame = choose_rotating_frame(&h0, &drive).unwrap();
        let expected = Operator::projector(3, 1).scale_real(9.5);
        assert!(frame.generator.max_abs_diff(&expected) < 1e-15);
        let v = (Operator::ket_bra(3, 0, 1) + Operator::ket_bra(3, 1, 0)).scale_real(0.2);
        assert!(frame.coupling.max_abs_diff(&v) < 1e-15);

        let drive = PeriodicDrive::single_pair(vec![3], 0, 1, 0.2, 0.0);
        let frame = choose_rotating_frame(&h0, &drive).unwrap();
        assert_eq!(frame.generator.max_abs(), 0.0);
    }

    #[test]
    fn frame_rejects_multi_pair_and_non_hermitian_drives() {
        let h0 = qutrit_hamiltonian(1.0, 2.0);
        let mut drive = PeriodicDrive::single_pair(vec![3], 0, 1, 0.2, 1.0);
        drive
            .terms
            .extend(PeriodicDrive::single_pair(vec![3], 1, 2, 0.2, 1.7).terms);
        assert!(matches!(
            choose_rotating_frame(&h0, &drive),
            Err(Error::NoValidFrame(_))
        ));

        let mut drive = PeriodicDrive::single_pair(vec![3], 0, 1, 0.2, 1.0);
        drive.terms.pop();
        assert!(choose_rotating_frame(&h0, &drive).is_err());
    }

    #[test]
    fn frame_compatibility_of_jumps() {
        let g = Operator::from_real_diagonal(&[0.0, 1.0, 0.0, 1.0]);
        assert!(frame_preserves_jump(&g, &Operator::ket_bra(4, 0, 1)));
        let a = Operator::ket_bra(4, 0, 1) + Operator::ket_bra(4, 2, 0);
        assert!(!frame_preserves_jump(&g, &a));
    }

    #[test]
    fn builders_validate_parameters() {
        let mut p = SingleQutritParams::default();
        p.e_c = p.e_h + 1.0;
        assert!(build_single_qutrit(&p).is_err());

        let mut p = TwoQutritParams::default();
        p.e_lh = p.e_s;
        assert!(build_two_qutrit(&p).is_err());

        let p = EngineParams {
            gamma_w: 0.0,
            ..Default::default()
        };
        assert!(build_engine(&p).is_err());

        assert!(TwoQutritParams::default().set("bogus", 1.0).is_err());
        assert!(DrivenQutritParams::default().set("bogus", 1.0).is_err());
    }

    #[test]
    fn synthetic_targets_round_trip() {
        let p = TwoQutritParams::with_synthetic_betas(-0.03, 0.02).unwrap();
        assert!((p.beta_ls().unwrap() + 0.03).abs() < 1e-14);
        assert!((p.beta_rs().unwrap() - 0.02).abs() < 1e-14);
        let e = EngineParams::default();
        assert!((e.beta_sl().unwrap() + 0.5).abs() < 1e-13);
    }

    #[test]
    fn builder_group_beta_is_exact_synthetic_beta() {
        let p = TwoQutritParams::with_synthetic_betas(-0.03, 0.02).unwrap();
        let spec = build_two_qutrit(&p).unwrap();
        assert_eq!(
            spec.group("L").unwrap().beta,
            synthetic_beta(p.beta_h, p.e_lh, p.beta_c, p.e_lh - p.e_s).unwrap()
        );
    }
}
