//! Vacuum correlators of dichotomic operators `W† (1 − 2|0⟩⟨0|) W` built from Weyl
//! unitaries, evaluated on tables of smeared bilinears.
//!
//! Every correlator reduces to overlaps of coherent states `|c⟩ = W_c |0⟩`:
//!
//! ```text
//! ⟨0|c⟩ = e^{−H(c,c)/2}
//! ⟨a|b⟩ = e^{(i/2) Δ(a,b)} e^{−H(b−a, b−a)/2}
//! ```

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::Mass;

/// Test-function labels of the three parties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    F,
    FPrime,
    G,
    GPrime,
    H,
    HPrime,
}

impl Label {
    pub const ALL: [Label; 6] = [Label::F, Label::FPrime, Label::G, Label::GPrime, Label::H, Label::HPrime];

    fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::F => "f",
            Label::FPrime => "f'",
            Label::G => "g",
            Label::GPrime => "g'",
            Label::H => "h",
            Label::HPrime => "h'",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorrelatorError {
    #[error("bilinear table has no H({0},{1}) entry")]
    MissingHadamard(Label, Label),
    #[error("bilinear table has no Δ_PJ({0},{1}) entry")]
    MissingPauliJordan(Label, Label),
}

/// Smeared bilinears for a set of labelled test functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilinearTable {
    pub mass: Mass,
    hadamard: BTreeMap<(Label, Label), f64>,
    pauli_jordan: BTreeMap<(Label, Label), f64>,
}

fn unordered(a: Label, b: Label) -> (Label, Label) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl BilinearTable {
    pub fn new(mass: Mass) -> Self {
        Self {
            mass,
            hadamard: BTreeMap::new(),
            pauli_jordan: BTreeMap::new(),
        }
    }

    /// Every `H` and `Δ_PJ` entry among `labels` set to zero.
    pub fn zeros(mass: Mass, labels: &[Label]) -> Self {
        let mut t = Self::new(mass);
        for &a in labels {
            for &b in labels {
                t.set_h(a, b, 0.0);
                if a != b {
                    t.set_pj(a, b, 0.0);
                }
            }
        }
        t
    }

    pub fn set_h(&mut self, a: Label, b: Label, value: f64) {
        self.hadamard.insert(unordered(a, b), value);
    }

    /// Sets `Δ(a, b) = value` and `Δ(b, a) = −value`.
    pub fn set_pj(&mut self, a: Label, b: Label, value: f64) {
        self.pauli_jordan.insert((a, b), value);
        self.pauli_jordan.insert((b, a), -value);
    }

    pub fn h(&self, a: Label, b: Label) -> Result<f64, CorrelatorError> {
        self.hadamard
            .get(&unordered(a, b))
            .copied()
            .ok_or(CorrelatorError::MissingHadamard(a, b))
    }

    pub fn pj(&self, a: Label, b: Label) -> Result<f64, CorrelatorError> {
        if a == b {
            return Ok(0.0);
        }
        self.pauli_jordan
            .get(&(a, b))
            .copied()
            .ok_or(CorrelatorError::MissingPauliJordan(a, b))
    }

    pub fn hadamard_entries(&self) -> impl Iterator<Item = ((Label, Label), f64)> + '_ {
        self.hadamard.iter().map(|(k, v)| (*k, *v))
    }

    pub fn pauli_jordan_entries(&self) -> impl Iterator<Item = ((Label, Label), f64)> + '_ {
        self.pauli_jordan.iter().filter(|((a, b), _)| a < b).map(|(k, v)| (*k, *v))
    }
}

/// Which side the Weyl unitary sits on: `W† F W` projects onto `W_{−h}|0⟩`,
/// `W F W†` onto `W_h|0⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dressing {
    #[default]
    Adjoint,
    Direct,
}

impl Dressing {
    fn sign(self) -> f64 {
        match self {
            Dressing::Adjoint => -1.0,
            Dressing::Direct => 1.0,
        }
    }
}

/// One factor `1 − 2P` of a word; `label = None` is the undressed `1 − 2|0⟩⟨0|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub label: Option<Label>,
    pub dressing: Dressing,
}

impl Factor {
    pub fn new(label: Label, dressing: Dressing) -> Self {
        Self {
            label: Some(label),
            dressing,
        }
    }

    pub fn bare() -> Self {
        Self {
            label: None,
            dressing: Dressing::Adjoint,
        }
    }

    fn coherent(&self) -> Coherent {
        let mut c = [0.0; 6];
        if let Some(l) = self.label {
            c[l.index()] = self.dressing.sign();
        }
        Coherent(c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DressedProjectorWord {
    pub factors: Vec<Factor>,
}

impl DressedProjectorWord {
    pub fn new(factors: Vec<Factor>) -> Self {
        assert!(!factors.is_empty(), "a projector word needs at least one factor");
        Self { factors }
    }
}

/// Coefficients of a coherent vector over the six labels.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Coherent([f64; 6]);

impl Coherent {
    fn minus(self, other: Coherent) -> Coherent {
        let mut c = self.0;
        for (x, y) in c.iter_mut().zip(other.0) {
            *x -= y;
        }
        Coherent(c)
    }
}

fn form(
    table: &BilinearTable,
    a: Coherent,
    b: Coherent,
    entry: impl Fn(&BilinearTable, Label, Label) -> Result<f64, CorrelatorError>,
) -> Result<f64, CorrelatorError> {
    let mut total = 0.0;
    for la in Label::ALL {
        let ca = a.0[la.index()];
        if ca == 0.0 {
            continue;
        }
        for lb in Label::ALL {
            let cb = b.0[lb.index()];
            if cb == 0.0 {
                continue;
            }
            total += ca * cb * entry(table, la, lb)?;
        }
    }
    Ok(total)
}

/// `⟨a|b⟩` for coherent states.
fn overlap(table: &BilinearTable, a: Coherent, b: Coherent) -> Result<Complex64, CorrelatorError> {
    let d = b.minus(a);
    let norm = form(table, d, d, BilinearTable::h)?;
    let phase = form(table, a, b, BilinearTable::pj)?;
    Ok(Complex64::from_polar((-0.5 * norm).exp(), 0.5 * phase))
}

/// Expands `⟨0| Π (1 − 2P_k) |0⟩` over all ordered sub-products of projectors.
pub fn reduce_vacuum_expectation_complex(
    word: &DressedProjectorWord,
    table: &BilinearTable,
) -> Result<Complex64, CorrelatorError> {
    let vectors: Vec<Coherent> = word.factors.iter().map(Factor::coherent).collect();
    let n = vectors.len();
    let vacuum = Coherent([0.0; 6]);
    let mut total = Complex64::new(0.0, 0.0);
    for mask in 0u32..(1 << n) {
        let mut amp = Complex64::new(1.0, 0.0);
        let mut prev = vacuum;
        for (k, &c) in vectors.iter().enumerate() {
            if mask & (1 << k) != 0 {
                amp *= overlap(table, prev, c)?;
                prev = c;
            }
        }
        amp *= overlap(table, prev, vacuum)?;
        total += amp * (-2.0f64).powi(mask.count_ones() as i32);
    }
    Ok(total)
}

/// Real part of [`reduce_vacuum_expectation_complex`].
pub fn reduce_vacuum_expectation(word: &DressedProjectorWord, table: &BilinearTable) -> Result<f64, CorrelatorError> {
    Ok(reduce_vacuum_expectation_complex(word, table)?.re)
}

/// Closed forms as printed, or the reducer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaMode {
    Printed,
    #[default]
    Derived,
}

impl fmt::Display for FormulaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FormulaMode::Printed => "printed",
            FormulaMode::Derived => "derived",
        })
    }
}

/// Operator conventions for the derived formulas. Alice's and Charlie's operators are
/// always `W† F W`; Bob's defaults to the same.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Conventions {
    pub mode: FormulaMode,
    pub bob: Dressing,
}

impl Conventions {
    /// The printed closed forms are the expansions with `B_g = W_g F W_g†`.
    fn reported_bob(&self) -> Dressing {
        match self.mode {
            FormulaMode::Printed => Dressing::Direct,
            FormulaMode::Derived => self.bob,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundCheck {
    Within,
    ViolatedClassical,
    ExceedsQuantumBound,
}

pub const CHSH_CLASSICAL: f64 = 2.0;
pub const TSIRELSON: f64 = 2.0 * SQRT_2;
pub const MERMIN_CLASSICAL: f64 = 2.0;
pub const MERMIN_QUANTUM: f64 = 4.0;
pub const BOUND_SLACK: f64 = 1e-6;

pub fn bound_check(value: f64, classical: f64, quantum: f64) -> BoundCheck {
    let a = value.abs();
    if a <= classical {
        BoundCheck::Within
    } else if a <= quantum + BOUND_SLACK {
        BoundCheck::ViolatedClassical
    } else {
        BoundCheck::ExceedsQuantumBound
    }
}

/// One exponential term `coefficient · e^{−exponent}` of a closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coefficient: f64,
    pub exponent: f64,
    pub formula: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelatorKind {
    Chsh,
    Mermin3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorReport {
    pub kind: CorrelatorKind,
    pub value: f64,
    pub formula_mode: FormulaMode,
    pub bob_dressing: Dressing,
    pub terms: Vec<Term>,
    pub bound_check: BoundCheck,
}

/// Exponent builder over a table: `e(&[(a, b), ...])` is the sum of the `H` entries.
struct Exp<'a>(&'a BilinearTable);

impl Exp<'_> {
    fn sum(&self, pairs: &[(Label, Label)]) -> Result<(f64, String), CorrelatorError> {
        let mut total = 0.0;
        let mut text = String::new();
        for (i, &(a, b)) in pairs.iter().enumerate() {
            total += self.0.h(a, b)?;
            if i > 0 {
                text.push('+');
            }
            text.push_str(&format!("H({a},{b})"));
        }
        Ok((total, text))
    }

    /// Signed sum, for the printed forms that subtract an entry.
    fn signed(&self, pairs: &[(f64, Label, Label)]) -> Result<(f64, String), CorrelatorError> {
        let mut total = 0.0;
        let mut text = String::new();
        for (i, &(s, a, b)) in pairs.iter().enumerate() {
            total += s * self.0.h(a, b)?;
            if s < 0.0 {
                text.push('-');
            } else if i > 0 {
                text.push('+');
            }
            text.push_str(&format!("H({a},{b})"));
        }
        Ok((total, text))
    }
}

fn term(coefficient: f64, (exponent, formula): (f64, String)) -> Term {
    Term {
        coefficient,
        exponent,
        formula,
    }
}

fn evaluate(terms: &[Term]) -> f64 {
    terms.iter().map(|t| t.coefficient * (-t.exponent).exp()).sum()
}

/// Exponential terms of the reducer expansion of a real word. Each term is
/// `(−2)^k ⟨0|c₁⟩⟨c₁|c₂⟩…⟨c_k|0⟩`; phases are reported only through the value.
fn reducer_terms(sign: f64, word: &DressedProjectorWord, table: &BilinearTable) -> Result<Vec<Term>, CorrelatorError> {
    let vectors: Vec<Coherent> = word.factors.iter().map(Factor::coherent).collect();
    let vacuum = Coherent([0.0; 6]);
    let mut out = Vec::new();
    for mask in 0u32..(1 << vectors.len()) {
        let mut exponent = 0.0;
        let mut prev = vacuum;
        let mut names = Vec::new();
        for (k, &c) in vectors.iter().enumerate() {
            if mask & (1 << k) != 0 {
                let d = c.minus(prev);
                exponent += 0.5 * form(table, d, d, BilinearTable::h)?;
                prev = c;
                names.push(match word.factors[k].label {
                    Some(l) => format!("P[{l}]"),
                    None => "P[0]".to_string(),
                });
            }
        }
        exponent += 0.5 * form(table, prev, prev, BilinearTable::h)?;
        let formula = if names.is_empty() { "1".to_string() } else { names.join("·") };
        out.push(Term {
            coefficient: sign * (-2.0f64).powi(mask.count_ones() as i32),
            exponent,
            formula,
        });
    }
    Ok(out)
}

fn ab_word(a: Label, b: Label, bob: Dressing) -> DressedProjectorWord {
    DressedProjectorWord::new(vec![Factor::new(a, Dressing::Adjoint), Factor::new(b, bob)])
}

fn abc_word(a: Label, b: Label, c: Label, bob: Dressing) -> DressedProjectorWord {
    DressedProjectorWord::new(vec![
        Factor::new(a, Dressing::Adjoint),
        Factor::new(b, bob),
        Factor::new(c, Dressing::Adjoint),
    ])
}

/// `⟨A_f B_g⟩ = 1 + 4e^{−(H(f,f)+H(g,g)+H(f,g))} − 2e^{−H(f,f)} − 2e^{−H(g,g)}`.
pub fn two_op_correlator(table: &BilinearTable, f: Label, g: Label) -> Result<f64, CorrelatorError> {
    let (hff, hgg, hfg) = (table.h(f, f)?, table.h(g, g)?, table.h(f, g)?);
    Ok(1.0 + 4.0 * (-(hff + hgg + hfg)).exp() - 2.0 * (-hff).exp() - 2.0 * (-hgg).exp())
}

/// `⟨(A_f + A_f′) B_g + (A_f − A_f′) B_g′⟩`.
pub fn chsh_correlator(
    table: &BilinearTable,
    [f, fp, g, gp]: [Label; 4],
    conventions: Conventions,
) -> Result<CorrelatorReport, CorrelatorError> {
    let (terms, value) = match conventions.mode {
        FormulaMode::Printed => {
            let e = Exp(table);
            let terms = vec![
                term(2.0, (0.0, "1".into())),
                term(4.0, e.sum(&[(f, f), (g, g), (f, g)])?),
                term(4.0, e.sum(&[(fp, fp), (g, g), (fp, g)])?),
                term(4.0, e.sum(&[(f, f), (gp, gp), (f, gp)])?),
                term(-4.0, e.sum(&[(fp, fp), (gp, gp), (fp, gp)])?),
                term(-4.0, e.sum(&[(f, f)])?),
                term(-4.0, e.sum(&[(g, g)])?),
            ];
            let value = evaluate(&terms);
            (terms, value)
        }
        FormulaMode::Derived => {
            let mut terms = Vec::new();
            let mut value = 0.0;
            for (sign, a, b) in [(1.0, f, g), (1.0, fp, g), (1.0, f, gp), (-1.0, fp, gp)] {
                let word = ab_word(a, b, conventions.bob);
                value += sign * reduce_vacuum_expectation(&word, table)?;
                terms.extend(reducer_terms(sign, &word, table)?);
            }
            (terms, value)
        }
    };
    Ok(CorrelatorReport {
        kind: CorrelatorKind::Chsh,
        value,
        formula_mode: conventions.mode,
        bob_dressing: conventions.reported_bob(),
        terms,
        bound_check: bound_check(value, CHSH_CLASSICAL, TSIRELSON),
    })
}

fn three_op_printed_terms(table: &BilinearTable, f: Label, g: Label, h: Label) -> Result<Vec<Term>, CorrelatorError> {
    let e = Exp(table);
    Ok(vec![
        term(1.0, (0.0, "1".into())),
        term(-8.0, e.sum(&[(f, f), (g, g), (f, g), (g, h)])?),
        term(4.0, e.sum(&[(f, f), (g, g), (f, g)])?),
        term(4.0, e.sum(&[(g, g), (h, h), (h, g)])?),
        term(4.0, e.sum(&[(f, f), (h, h), (f, h)])?),
        term(-2.0, e.sum(&[(f, f)])?),
        term(-2.0, e.sum(&[(g, g)])?),
        term(-2.0, e.sum(&[(h, h)])?),
    ])
}

/// `⟨A_f B_g C_h⟩`.
pub fn three_op_correlator(
    table: &BilinearTable,
    [f, g, h]: [Label; 3],
    conventions: Conventions,
) -> Result<f64, CorrelatorError> {
    match conventions.mode {
        FormulaMode::Printed => Ok(evaluate(&three_op_printed_terms(table, f, g, h)?)),
        FormulaMode::Derived => reduce_vacuum_expectation(&abc_word(f, g, h, conventions.bob), table),
    }
}

fn mermin_printed_terms(table: &BilinearTable, [f, fp, g, gp, h, hp]: [Label; 6]) -> Result<Vec<Term>, CorrelatorError> {
    let e = Exp(table);
    Ok(vec![
        term(2.0, (0.0, "1".into())),
        term(-8.0, e.sum(&[(fp, fp), (g, g), (h, h), (fp, g), (g, h)])?),
        term(-8.0, e.sum(&[(f, f), (gp, gp), (h, h), (f, gp), (g, h)])?),
        term(-8.0, e.sum(&[(f, f), (g, g), (hp, hp), (f, g), (g, hp)])?),
        term(
            8.0,
            e.signed(&[(1.0, fp, fp), (-1.0, gp, gp), (1.0, hp, hp), (1.0, fp, gp), (1.0, gp, hp)])?,
        ),
        term(4.0, e.sum(&[(fp, fp), (g, g), (fp, g)])?),
        term(4.0, e.sum(&[(g, g), (h, h), (h, g)])?),
        term(4.0, e.sum(&[(fp, fp), (h, h), (fp, h)])?),
        term(4.0, e.sum(&[(f, f), (gp, gp), (f, gp)])?),
        term(4.0, e.sum(&[(gp, gp), (h, h), (gp, h)])?),
        term(4.0, e.sum(&[(f, f), (h, h), (h, f)])?),
        term(4.0, e.sum(&[(f, f), (g, g), (f, g)])?),
        term(4.0, e.sum(&[(g, g), (hp, hp), (g, hp)])?),
        term(4.0, e.sum(&[(f, f), (f, hp), (hp, hp)])?),
        term(-4.0, e.sum(&[(fp, fp), (gp, gp), (fp, gp)])?),
        term(-4.0, e.sum(&[(gp, gp), (hp, hp), (gp, hp)])?),
        term(-4.0, e.sum(&[(fp, fp), (hp, hp), (hp, fp)])?),
        term(-4.0, e.sum(&[(f, f)])?),
        term(-4.0, e.sum(&[(g, g)])?),
        term(-4.0, e.sum(&[(h, h)])?),
    ])
}

/// `⟨A_f′ B_g C_h + A_f B_g′ C_h + A_f B_g C_h′ − A_f′ B_g′ C_h′⟩`.
pub fn mermin3_correlator(
    table: &BilinearTable,
    labels: [Label; 6],
    conventions: Conventions,
) -> Result<CorrelatorReport, CorrelatorError> {
    let [f, fp, g, gp, h, hp] = labels;
    let (terms, value) = match conventions.mode {
        FormulaMode::Printed => {
            let terms = mermin_printed_terms(table, labels)?;
            let value = evaluate(&terms);
            (terms, value)
        }
        FormulaMode::Derived => {
            let mut terms = Vec::new();
            let mut value = 0.0;
            for (sign, a, b, c) in [(1.0, fp, g, h), (1.0, f, gp, h), (1.0, f, g, hp), (-1.0, fp, gp, hp)] {
                let word = abc_word(a, b, c, conventions.bob);
                value += sign * reduce_vacuum_expectation(&word, table)?;
                terms.extend(reducer_terms(sign, &word, table)?);
            }
            (terms, value)
        }
    };
    Ok(CorrelatorReport {
        kind: CorrelatorKind::Mermin3,
        value,
        formula_mode: conventions.mode,
        bob_dressing: conventions.reported_bob(),
        terms,
        bound_check: bound_check(value, MERMIN_CLASSICAL, MERMIN_QUANTUM),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    /// `e^{−(H(f,f)+H(h,h))} |1 − e^{−H(f,h)}| − ¼ e^{−md}`; non-positive when the
    /// cluster bound holds.
    pub value: f64,
    /// `⟨A_f C_h⟩ − ⟨A_f⟩⟨C_h⟩` from the reducer.
    pub connected: f64,
    /// `4 e^{−(H(f,f)+H(h,h))} (e^{−H(f,h)} − 1)`.
    pub connected_closed_form: f64,
    pub m: f64,
    pub d: f64,
}

/// Connected two-point correlator of `A_f` and a partner operator on `h`.
pub fn connected_correlator(
    table: &BilinearTable,
    f: Label,
    h: Label,
    partner: Dressing,
) -> Result<f64, CorrelatorError> {
    let a = Factor::new(f, Dressing::Adjoint);
    let c = Factor::new(h, partner);
    let joint = reduce_vacuum_expectation(&DressedProjectorWord::new(vec![a, c]), table)?;
    let ea = reduce_vacuum_expectation(&DressedProjectorWord::new(vec![a]), table)?;
    let ec = reduce_vacuum_expectation(&DressedProjectorWord::new(vec![c]), table)?;
    Ok(joint - ea * ec)
}

/// Cluster check for the gap `d` between the supports. The reducer's connected
/// correlator uses the partner dressing under which it matches the closed form
/// with `e^{−H(f,h)}`.
pub fn cluster_quantity(table: &BilinearTable, f: Label, h: Label, d: f64) -> Result<ClusterReport, CorrelatorError> {
    let (hff, hhh, hfh) = (table.h(f, f)?, table.h(h, h)?, table.h(f, h)?);
    let m = table.mass.value();
    let value = (-(hff + hhh)).exp() * (1.0 - (-hfh).exp()).abs() - 0.25 * (-m * d).exp();
    Ok(ClusterReport {
        value,
        connected: connected_correlator(table, f, h, Dressing::Direct)?,
        connected_closed_form: 4.0 * (-(hff + hhh)).exp() * ((-hfh).exp() - 1.0),
        m,
        d,
    })
}
