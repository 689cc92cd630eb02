//! Register basis, pulse descriptions and the exact action of the quantized
//! carrier and red-sideband pulses on the register joined with one field mode.
//!
//! Every pulse couples disjoint pairs of register states. Within a pair the
//! *upper* state emits a photon into the field when it flips and the *lower*
//! state absorbs one. With Rabi angle θₙ = (area·π/2)·√(n/n̄):
//!
//! ```text
//! |upper⟩|n⟩ → cos θₙ₊₁ |upper⟩|n⟩   − i e^{−iφ} sin θₙ₊₁ |lower⟩|n+1⟩
//! |lower⟩|n⟩ → cos θₙ   |lower⟩|n⟩   − i e^{+iφ} sin θₙ   |upper⟩|n−1⟩
//! ```
//!
//! States outside every coupled pair are left alone, field included.

use crate::field::{CoherentField, FieldError};
use crate::linalg::{Matrix12, DIM};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("level {level:?} is not available on ion {ion:?}")]
    InvalidLevel { ion: Ion, level: Level },
    #[error("phonon level must be 0 or 1, got {0}")]
    InvalidPhonon(u8),
    #[error("basis index {0} out of range 0..12")]
    InvalidIndex(usize),
    #[error("pulse pair must consist of two distinct levels")]
    DegeneratePair,
    #[error("expected a {expected} pulse")]
    WrongTransition { expected: &'static str },
    #[error("level {0:?} is not part of the pulse's coupled pair")]
    NotCoupled(Level),
    #[error("unknown protocol '{0}' (available: cz-cnot)")]
    UnknownProtocol(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    Zero,
    One,
    Aux,
}

impl Level {
    fn code(self) -> usize {
        match self {
            Level::Zero => 0,
            Level::One => 1,
            Level::Aux => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ion {
    /// Control ion, levels {0, 1}.
    X,
    /// Target ion, levels {0, 1, aux}.
    Y,
}

/// One of the twelve register states. Linear index `x + 2·y + 6·ph`, i.e.
/// |00,0⟩, |10,0⟩, |01,0⟩, |11,0⟩, |0a,0⟩, |1a,0⟩, then the same with ph = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisIndex {
    x: Level,
    y: Level,
    ph: u8,
}

impl BasisIndex {
    pub fn new(x: Level, y: Level, ph: u8) -> Result<Self, DynamicsError> {
        if x == Level::Aux {
            return Err(DynamicsError::InvalidLevel { ion: Ion::X, level: x });
        }
        if ph > 1 {
            return Err(DynamicsError::InvalidPhonon(ph));
        }
        Ok(BasisIndex { x, y, ph })
    }

    pub fn from_index(i: usize) -> Result<Self, DynamicsError> {
        if i >= DIM {
            return Err(DynamicsError::InvalidIndex(i));
        }
        let x = if i.is_multiple_of(2) { Level::Zero } else { Level::One };
        let y = [Level::Zero, Level::One, Level::Aux][(i / 2) % 3];
        Ok(BasisIndex { x, y, ph: (i / 6) as u8 })
    }

    pub fn index(&self) -> usize {
        self.x.code() + 2 * self.y.code() + 6 * self.ph as usize
    }

    pub fn x(&self) -> Level {
        self.x
    }

    pub fn y(&self) -> Level {
        self.y
    }

    pub fn phonon(&self) -> u8 {
        self.ph
    }

    pub fn level(&self, ion: Ion) -> Level {
        match ion {
            Ion::X => self.x,
            Ion::Y => self.y,
        }
    }

    fn with_level(mut self, ion: Ion, level: Level) -> Self {
        match ion {
            Ion::X => self.x = level,
            Ion::Y => self.y = level,
        }
        self
    }

    fn with_phonon(mut self, ph: u8) -> Self {
        self.ph = ph;
        self
    }

    pub fn all() -> impl Iterator<Item = BasisIndex> {
        (0..DIM).map(|i| BasisIndex::from_index(i).unwrap())
    }
}

impl fmt::Display for BasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = |v: Level| match v {
            Level::Zero => "0",
            Level::One => "1",
            Level::Aux => "a",
        };
        write!(f, "|{}{},{}⟩", l(self.x), l(self.y), self.ph)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Transition {
    /// Flips the ion, phonon untouched.
    Carrier,
    /// Flips the ion together with the phonon. The upper state of the pair
    /// carries phonon `upper_phonon`, the lower state the other one.
    Sideband { upper_phonon: u8 },
}

/// Ordered level pair on the addressed ion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelPair {
    pub upper: Level,
    pub lower: Level,
}

impl LevelPair {
    pub fn new(upper: Level, lower: Level) -> Self {
        LevelPair { upper, lower }
    }

    pub fn qubit() -> Self {
        LevelPair::new(Level::One, Level::Zero)
    }
}

/// Where a register state sits relative to a pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Upper(BasisIndex),
    Lower(BasisIndex),
    Spectator,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pulse {
    pub transition: Transition,
    pub ion: Ion,
    pub pair: LevelPair,
    /// In units of π.
    pub area: f64,
    /// Laser phase φ in radians.
    pub phase: f64,
    pub field: CoherentField,
}

impl Pulse {
    pub fn new(
        transition: Transition,
        ion: Ion,
        pair: LevelPair,
        area: f64,
        phase: f64,
        field: CoherentField,
    ) -> Result<Self, DynamicsError> {
        if pair.upper == pair.lower {
            return Err(DynamicsError::DegeneratePair);
        }
        for level in [pair.upper, pair.lower] {
            if ion == Ion::X && level == Level::Aux {
                return Err(DynamicsError::InvalidLevel { ion, level });
            }
        }
        if let Transition::Sideband { upper_phonon } = transition {
            if upper_phonon > 1 {
                return Err(DynamicsError::InvalidPhonon(upper_phonon));
            }
        }
        Ok(Pulse {
            transition,
            ion,
            pair,
            area,
            phase,
            field,
        })
    }

    /// θ for Fock index `m`: (area·π/2)·√(m/n̄).
    pub fn rabi_angle(&self, m: u64) -> f64 {
        self.area * FRAC_PI_2 * (m as f64 / self.field.nbar()).sqrt()
    }

    /// Rotation angle in the n̄ → ∞ limit.
    pub fn ideal_angle(&self) -> f64 {
        self.area * FRAC_PI_2
    }

    pub fn role(&self, s: BasisIndex) -> Role {
        let level = s.level(self.ion);
        let (is_upper, is_lower) = match self.transition {
            Transition::Carrier => (level == self.pair.upper, level == self.pair.lower),
            Transition::Sideband { upper_phonon } => (
                level == self.pair.upper && s.ph == upper_phonon,
                level == self.pair.lower && s.ph == 1 - upper_phonon,
            ),
        };
        let flip_phonon = |b: BasisIndex| match self.transition {
            Transition::Carrier => b,
            Transition::Sideband { .. } => b.with_phonon(1 - s.ph),
        };
        if is_upper {
            Role::Upper(flip_phonon(s.with_level(self.ion, self.pair.lower)))
        } else if is_lower {
            Role::Lower(flip_phonon(s.with_level(self.ion, self.pair.upper)))
        } else {
            Role::Spectator
        }
    }

    /// Phase factor of the upper → lower branch, −i e^{−iφ}.
    fn emit_phase(&self) -> Complex64 {
        Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, -self.phase)
    }

    /// Phase factor of the lower → upper branch, −i e^{+iφ}.
    fn absorb_phase(&self) -> Complex64 {
        Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, self.phase)
    }
}

/// One output branch of a pulse: amplitude, register state, field index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch<S> {
    pub amplitude: Complex64,
    pub state: S,
    pub n: u64,
}

/// Image of a single `|state⟩|n⟩` under a pulse. `flip` is absent for
/// spectators and for a lower state at n = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseAction<S> {
    pub stay: Branch<S>,
    pub flip: Option<Branch<S>>,
}

impl<S> PulseAction<S> {
    pub fn probability(&self) -> f64 {
        self.stay.amplitude.norm_sqr() + self.flip.as_ref().map_or(0.0, |b| b.amplitude.norm_sqr())
    }

    fn map<T>(self, f: impl Fn(S) -> T) -> PulseAction<T> {
        PulseAction {
            stay: Branch {
                amplitude: self.stay.amplitude,
                state: f(self.stay.state),
                n: self.stay.n,
            },
            flip: self.flip.map(|b| Branch {
                amplitude: b.amplitude,
                state: f(b.state),
                n: b.n,
            }),
        }
    }
}

/// Exact action of `pulse` on `|state⟩|n⟩`.
pub fn pulse_action(pulse: &Pulse, state: BasisIndex, n: u64) -> PulseAction<BasisIndex> {
    let one = Complex64::new(1.0, 0.0);
    match pulse.role(state) {
        Role::Spectator => PulseAction {
            stay: Branch { amplitude: one, state, n },
            flip: None,
        },
        Role::Upper(partner) => {
            let theta = pulse.rabi_angle(n + 1);
            PulseAction {
                stay: Branch {
                    amplitude: Complex64::new(theta.cos(), 0.0),
                    state,
                    n,
                },
                flip: Some(Branch {
                    amplitude: pulse.emit_phase() * theta.sin(),
                    state: partner,
                    n: n + 1,
                }),
            }
        }
        Role::Lower(partner) => {
            let theta = pulse.rabi_angle(n);
            PulseAction {
                stay: Branch {
                    amplitude: Complex64::new(theta.cos(), 0.0),
                    state,
                    n,
                },
                flip: (n > 0).then(|| Branch {
                    amplitude: pulse.absorb_phase() * theta.sin(),
                    state: partner,
                    n: n - 1,
                }),
            }
        }
    }
}

/// Carrier action on a bare ion level; the other ion and the phonon are
/// irrelevant to a carrier pulse.
pub fn carrier_amplitudes(pulse: &Pulse, ion_level: Level, n: u64) -> Result<PulseAction<Level>, DynamicsError> {
    if pulse.transition != Transition::Carrier {
        return Err(DynamicsError::WrongTransition { expected: "carrier" });
    }
    if ion_level != pulse.pair.upper && ion_level != pulse.pair.lower {
        return Err(DynamicsError::NotCoupled(ion_level));
    }
    let probe = BasisIndex::new(Level::Zero, Level::Zero, 0)?.with_level(pulse.ion, ion_level);
    let ion = pulse.ion;
    Ok(pulse_action(pulse, probe, n).map(|s| s.level(ion)))
}

pub fn sideband_amplitudes(
    pulse: &Pulse,
    state: BasisIndex,
    n: u64,
) -> Result<PulseAction<BasisIndex>, DynamicsError> {
    match pulse.transition {
        Transition::Sideband { .. } => Ok(pulse_action(pulse, state, n)),
        Transition::Carrier => Err(DynamicsError::WrongTransition { expected: "sideband" }),
    }
}

/// The n̄ → ∞ limit of `pulse`: a rotation by half the area on every coupled
/// pair with the same phase convention.
pub fn ideal_pulse(pulse: &Pulse) -> Matrix12 {
    let mut u = Matrix12::identity();
    let theta = pulse.ideal_angle();
    let (s, co) = theta.sin_cos();
    for state in BasisIndex::all() {
        if let Role::Upper(partner) = pulse.role(state) {
            let (a, b) = (state.index(), partner.index());
            u[(a, a)] = Complex64::new(co, 0.0);
            u[(b, b)] = Complex64::new(co, 0.0);
            u[(b, a)] = pulse.emit_phase() * s;
            u[(a, b)] = pulse.absorb_phase() * s;
        }
    }
    u
}

/// An ordered pulse sequence, each pulse driven by its own field mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Protocol {
    pub name: String,
    pub steps: Vec<Pulse>,
}

impl Protocol {
    /// The five-pulse CNOT: π/2 carrier on y, π sideband on x, 2π sideband
    /// through the auxiliary level of y, π sideband on x, −π/2 carrier on y.
    pub fn cz_cnot(nbar: f64, tail_eps: f64) -> Result<Self, DynamicsError> {
        let field = CoherentField::new(nbar, tail_eps)?;
        Self::cz_cnot_with_fields([field; 5])
    }

    pub fn cz_cnot_with_fields(fields: [CoherentField; 5]) -> Result<Self, DynamicsError> {
        let carrier = |phase: f64, field| {
            Pulse::new(Transition::Carrier, Ion::Y, LevelPair::qubit(), 0.5, phase, field)
        };
        let x_sideband = |field| {
            Pulse::new(
                Transition::Sideband { upper_phonon: 0 },
                Ion::X,
                LevelPair::qubit(),
                1.0,
                0.0,
                field,
            )
        };
        let steps = vec![
            carrier(-FRAC_PI_2, fields[0])?,
            x_sideband(fields[1])?,
            Pulse::new(
                Transition::Sideband { upper_phonon: 1 },
                Ion::Y,
                LevelPair::new(Level::Zero, Level::Aux),
                2.0,
                0.0,
                fields[2],
            )?,
            x_sideband(fields[3])?,
            carrier(FRAC_PI_2, fields[4])?,
        ];
        Ok(Protocol {
            name: "cz-cnot".into(),
            steps,
        })
    }

    pub fn by_name(name: &str, nbar: f64, tail_eps: f64) -> Result<Self, DynamicsError> {
        match name {
            "cz-cnot" => Self::cz_cnot(nbar, tail_eps),
            other => Err(DynamicsError::UnknownProtocol(other.to_string())),
        }
    }

    pub fn presets() -> &'static [&'static str] {
        &["cz-cnot"]
    }

    /// Product of the ideal pulses, last step leftmost.
    pub fn ideal_unitary(&self) -> Matrix12 {
        self.steps
            .iter()
            .fold(Matrix12::identity(), |acc, p| ideal_pulse(p) * acc)
    }

    /// Same protocol with every area scaled; `0.0` switches all pulses off.
    pub fn with_area_scale(&self, factor: f64) -> Self {
        let mut p = self.clone();
        for s in &mut p.steps {
            s.area *= factor;
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use std::f64::consts::PI;

    fn field(nbar: f64) -> CoherentField {
        CoherentField::new(nbar, 1e-14).unwrap()
    }

    fn proto() -> Protocol {
        Protocol::cz_cnot(1e4, 1e-14).unwrap()
    }

    fn b(x: Level, y: Level, ph: u8) -> BasisIndex {
        BasisIndex::new(x, y, ph).unwrap()
    }

    #[test]
    fn basis_order_follows_listing() {
        use Level::*;
        let expected = [
            (Zero, Zero, 0),
            (One, Zero, 0),
            (Zero, One, 0),
            (One, One, 0),
            (Zero, Aux, 0),
            (One, Aux, 0),
        ];
        for (i, &(x, y, ph)) in expected.iter().enumerate() {
            assert_eq!(b(x, y, ph).index(), i);
            assert_eq!(b(x, y, ph + 1).index(), i + 6);
            assert_eq!(BasisIndex::from_index(i).unwrap(), b(x, y, ph));
        }
        assert!(BasisIndex::new(Aux, Zero, 0).is_err());
        assert!(BasisIndex::from_index(12).is_err());
    }

    #[test]
    fn zero_area_is_identity() {
        let p = proto().with_area_scale(0.0);
        for pulse in &p.steps {
            for s in BasisIndex::all() {
                for n in [0, 1, 9_999, 10_000] {
                    let a = pulse_action(pulse, s, n);
                    assert_eq!(a.stay.amplitude, Complex64::new(1.0, 0.0));
                    assert_eq!(a.stay.state, s);
                    assert!(a.flip.is_none_or(|f| f.amplitude.norm() == 0.0));
                }
            }
            assert_eq!(ideal_pulse(pulse), Matrix12::identity());
        }
    }

    #[test]
    fn lower_level_at_vacuum_stays() {
        let step1 = proto().steps[0];
        let a = carrier_amplitudes(&step1, Level::Zero, 0).unwrap();
        assert_eq!(a.stay.amplitude, Complex64::new(1.0, 0.0));
        assert!(a.flip.is_none());
    }

    #[test]
    fn carrier_sign_for_upper_level_at_mean() {
        // φ = −π/2 makes −i e^{−iφ} = +1
        let nbar = 1e4f64;
        let step1 = proto().steps[0];
        let a = carrier_amplitudes(&step1, Level::One, nbar as u64).unwrap();
        let angle = PI / 4.0 * ((nbar + 1.0) / nbar).sqrt();
        assert!((a.stay.amplitude - Complex64::new(angle.cos(), 0.0)).norm() < 1e-15);
        let flip = a.flip.unwrap();
        assert_eq!(flip.state, Level::Zero);
        assert_eq!(flip.n, nbar as u64 + 1);
        assert!((flip.amplitude - Complex64::new(angle.sin(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn sideband_example_on_control_ion() {
        use Level::*;
        let step2 = proto().steps[1];
        let n = 9_876;
        let a = sideband_amplitudes(&step2, b(One, Zero, 0), n).unwrap();
        let theta = PI / 2.0 * ((n + 1) as f64 / 1e4).sqrt();
        assert!((a.stay.amplitude.re - theta.cos()).abs() < 1e-15);
        let flip = a.flip.unwrap();
        assert_eq!((flip.state, flip.n), (b(Zero, Zero, 1), n + 1));
        assert!((flip.amplitude - Complex64::new(0.0, -theta.sin())).norm() < 1e-15);

        // |0⟩ₓ|0⟩_ph and |1⟩ₓ|1⟩_ph are untouched
        for s in [b(Zero, One, 0), b(One, Aux, 1), b(One, Zero, 1)] {
            let a = sideband_amplitudes(&step2, s, n).unwrap();
            assert_eq!(a.stay.amplitude, Complex64::new(1.0, 0.0));
            assert!(a.flip.is_none());
        }
        assert!(sideband_amplitudes(&proto().steps[0], s0(), 3).is_err());
    }

    fn s0() -> BasisIndex {
        BasisIndex::from_index(0).unwrap()
    }

    #[test]
    fn step3_moves_phonon_excitation_into_aux() {
        use Level::*;
        let step3 = proto().steps[2];
        let a = pulse_action(&step3, b(One, Zero, 1), 500);
        let flip = a.flip.unwrap();
        assert_eq!((flip.state, flip.n), (b(One, Aux, 0), 501));
        assert!(matches!(step3.role(b(One, Aux, 0)), Role::Lower(_)));
        assert_eq!(step3.role(b(One, One, 1)), Role::Spectator);
    }

    #[test]
    fn columns_are_isometric_and_obey_selection_rule() {
        for pulse in &proto().steps {
            for s in BasisIndex::all() {
                for n in [1, 37, 9_950, 10_000, 10_400] {
                    let a = pulse_action(pulse, s, n);
                    assert!((a.probability() - 1.0).abs() < 1e-12);
                    assert_eq!(a.stay.n, n);
                    if let Some(f) = a.flip {
                        let dn = f.n as i64 - n as i64;
                        assert_eq!(dn.abs(), 1);
                        let (from, to) = (s.level(pulse.ion), f.state.level(pulse.ion));
                        assert_ne!(from, to);
                        // emitting state is the upper one
                        assert_eq!(dn == 1, from == pulse.pair.upper);
                        let other = match pulse.ion {
                            Ion::X => Ion::Y,
                            Ion::Y => Ion::X,
                        };
                        assert_eq!(s.level(other), f.state.level(other));
                        match pulse.transition {
                            Transition::Carrier => assert_eq!(s.phonon(), f.state.phonon()),
                            Transition::Sideband { .. } => assert_ne!(s.phonon(), f.state.phonon()),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn full_cycle_gives_minus_one_on_the_pair() {
        let p = Pulse::new(Transition::Carrier, Ion::X, LevelPair::qubit(), 2.0, 0.3, field(50.0)).unwrap();
        let u = ideal_pulse(&p);
        let mut expected = Matrix12::identity();
        for s in BasisIndex::all() {
            if p.role(s) != Role::Spectator {
                expected[(s.index(), s.index())] = Complex64::new(-1.0, 0.0);
            }
        }
        assert!(max_abs_diff(&u, &expected) < 1e-15);

        let step3 = proto().steps[2];
        let u3 = ideal_pulse(&step3);
        let mut expected = Matrix12::identity();
        for i in [6, 7, 4, 5] {
            expected[(i, i)] = Complex64::new(-1.0, 0.0);
        }
        assert!(max_abs_diff(&u3, &expected) < 1e-15);
    }

    #[test]
    fn opposite_half_pulses_cancel() {
        let p = proto();
        let u = ideal_pulse(&p.steps[4]) * ideal_pulse(&p.steps[0]);
        assert!(max_abs_diff(&u, &Matrix12::identity()) < 1e-15);
    }

    #[test]
    fn ideal_protocol_is_cnot_on_phonon_vacuum() {
        let u = proto().ideal_unitary();
        // |00⟩→|00⟩, |10⟩→|11⟩, |01⟩→|01⟩, |11⟩→|10⟩
        let image = [0usize, 3, 2, 1];
        for (col, &row) in image.iter().enumerate() {
            for r in 0..DIM {
                let expected = if r == row { 1.0 } else { 0.0 };
                assert!(
                    (u[(r, col)].norm() - expected).abs() < 1e-15,
                    "column {col} row {r}: {}",
                    u[(r, col)]
                );
            }
        }
        // exact CNOT on the qubit block, not just up to per-column phases
        let block = u.fixed_view::<4, 4>(0, 0);
        let phase = block[(0, 0)];
        for (col, &row) in image.iter().enumerate() {
            assert!((block[(row, col)] - phase).norm() < 1e-15);
        }
    }

    #[test]
    fn unknown_protocol_is_reported() {
        assert!(matches!(
            Protocol::by_name("nope", 10.0, 1e-10),
            Err(DynamicsError::UnknownProtocol(_))
        ));
        assert!(Protocol::by_name("cz-cnot", 10.0, 1e-10).is_ok());
    }
}
